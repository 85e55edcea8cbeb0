//! Constant expressions: `+ - * /`, parentheses, integers, reals and `pi`.

use std::collections::HashMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
}

impl Value {
    pub fn as_f64(self) -> f64 {
        match self {
            Value::Int(i) => i as f64,
            Value::Real(r) => r,
        }
    }

    /// Integral value, accepting reals with no fractional part.
    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(i),
            Value::Real(r) if r.fract() == 0.0 && r.abs() < 9.0e15 => Some(r as i64),
            Value::Real(_) => None,
        }
    }

    fn binary(self, op: char, rhs: Value) -> Result<Value, String> {
        use Value::*;
        Ok(match (self, rhs) {
            (Int(a), Int(b)) => match op {
                '+' => a.checked_add(b).map(Int).unwrap_or(Real(a as f64 + b as f64)),
                '-' => a.checked_sub(b).map(Int).unwrap_or(Real(a as f64 - b as f64)),
                '*' => a.checked_mul(b).map(Int).unwrap_or(Real(a as f64 * b as f64)),
                '%' if b == 0 => return Err("modulo by zero".into()),
                '%' => Int(a.rem_euclid(b)),
                _ => {
                    if b == 0 {
                        return Err("division by zero".into());
                    }
                    // exact integer quotients stay integers
                    if a % b == 0 {
                        Int(a / b)
                    } else {
                        Real(a as f64 / b as f64)
                    }
                }
            },
            (a, b) => {
                let (a, b) = (a.as_f64(), b.as_f64());
                match op {
                    '+' => Real(a + b),
                    '-' => Real(a - b),
                    '*' => Real(a * b),
                    '%' if b == 0.0 => return Err("modulo by zero".into()),
                    '%' => Real(a.rem_euclid(b)),
                    _ => {
                        if b == 0.0 {
                            return Err("division by zero".into());
                        }
                        Real(a / b)
                    }
                }
            }
        })
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExprError {
    /// Byte offset into the expression text.
    pub offset: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    vars: &'a dyn Fn(&str) -> Option<Value>,
}

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn expr(&mut self) -> Result<Value, ExprError> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(op @ ('+' | '-')) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = acc.binary(op, rhs).or_else(|m| self.err(m))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Value, ExprError> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(op @ ('*' | '/' | '%')) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = acc.binary(op, rhs).or_else(|m| self.err(m))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Value, ExprError> {
        self.skip_ws();
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(match self.unary()? {
                    Value::Int(i) => Value::Int(-i),
                    Value::Real(r) => Value::Real(-r),
                })
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Value, ExprError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let bytes = self.src.as_bytes();
                let mut end = self.pos;
                let mut real = false;
                while end < bytes.len() {
                    let b = bytes[end];
                    if b.is_ascii_digit() {
                        end += 1;
                    } else if b == b'.' {
                        real = true;
                        end += 1;
                    } else if (b == b'e' || b == b'E')
                        && end + 1 < bytes.len()
                        && (bytes[end + 1].is_ascii_digit()
                            || ((bytes[end + 1] == b'-' || bytes[end + 1] == b'+')
                                && end + 2 < bytes.len()
                                && bytes[end + 2].is_ascii_digit()))
                    {
                        real = true;
                        end += 2;
                    } else {
                        break;
                    }
                }
                let text = &self.src[start..end];
                self.pos = end;
                if !real {
                    if let Ok(i) = text.parse::<i64>() {
                        return Ok(Value::Int(i));
                    }
                }
                match text.parse::<f64>() {
                    Ok(r) => Ok(Value::Real(r)),
                    Err(_) => {
                        self.pos = start;
                        self.err(format!("malformed number `{text}`"))
                    }
                }
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let end = self.src[start..]
                    .find(|c: char| !(c.is_alphanumeric() || c == '_'))
                    .map_or(self.src.len(), |k| start + k);
                let name = &self.src[start..end];
                self.pos = end;
                if name == "pi" {
                    return Ok(Value::Real(std::f64::consts::PI));
                }
                match (self.vars)(name) {
                    Some(v) => Ok(v),
                    None => {
                        self.pos = start;
                        self.err(format!("undefined name `{name}`"))
                    }
                }
            }
            Some(c) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of expression"),
        }
    }
}

/// Evaluates `src`, resolving names other than `pi` through `vars`.
pub fn eval_with(src: &str, vars: &dyn Fn(&str) -> Option<Value>) -> Result<Value, ExprError> {
    let mut p = Parser { src, pos: 0, vars };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != src.len() {
        return p.err(format!("unexpected `{}`", &src[p.pos..]));
    }
    Ok(v)
}

pub fn eval(src: &str, vars: &HashMap<String, Value>) -> Result<Value, ExprError> {
    eval_with(src, &|name| vars.get(name).copied())
}
