//! `%define`, `%for … %endfor` and `$(expr)` expansion.

use std::collections::HashMap;

use super::expr::{eval_with, Value};
use super::{AsmError, AsmErrorKind};

/// One output line and the source line it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceLine {
    pub line: usize,
    pub text: String,
}

enum Node {
    Text(usize, String),
    Define(String, String),
    For {
        line: usize,
        col: usize,
        var: String,
        from: String,
        to: String,
        body: Vec<Node>,
    },
}

fn strip_comment(s: &str) -> &str {
    s.find('#').map_or(s, |k| &s[..k])
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_alphabetic() || c == '_') && cs.all(|c| c.is_alphanumeric() || c == '_')
}

fn directive_error(line: usize, col: usize, msg: impl Into<String>) -> AsmError {
    AsmError::new(line, col, AsmErrorKind::BadDirective(msg.into()))
}

fn build(lines: &mut std::iter::Peekable<impl Iterator<Item = (usize, String)>>, depth: usize) -> Result<(Vec<Node>, bool), AsmError> {
    let mut nodes = Vec::new();
    while let Some((n, raw)) = lines.next() {
        let text = strip_comment(&raw);
        let trimmed = text.trim();
        let col = text.len() - text.trim_start().len() + 1;
        if let Some(rest) = trimmed.strip_prefix('%') {
            let (word, args) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
            let args = args.trim();
            match word {
                "define" => {
                    let (name, value) = args.split_once(char::is_whitespace).unwrap_or((args, ""));
                    if !is_ident(name) {
                        return Err(directive_error(n, col, format!("bad macro name `{name}`")));
                    }
                    nodes.push(Node::Define(name.to_string(), value.trim().to_string()));
                }
                "for" => {
                    let bad = || directive_error(n, col, "expected `%for VAR = A to B`");
                    let (var, range) = args.split_once('=').ok_or_else(bad)?;
                    let var = var.trim();
                    if !is_ident(var) {
                        return Err(bad());
                    }
                    let (from, to) = range.split_once(" to ").ok_or_else(bad)?;
                    let (body, closed) = build(lines, depth + 1)?;
                    if !closed {
                        return Err(AsmError::new(n, col, AsmErrorKind::UnterminatedLoop));
                    }
                    nodes.push(Node::For {
                        line: n,
                        col,
                        var: var.to_string(),
                        from: from.trim().to_string(),
                        to: to.trim().to_string(),
                        body,
                    });
                }
                "endfor" => {
                    if depth == 0 {
                        return Err(AsmError::new(n, col, AsmErrorKind::UnmatchedEndfor));
                    }
                    return Ok((nodes, true));
                }
                other => return Err(directive_error(n, col, format!("unknown directive `%{other}`"))),
            }
        } else {
            nodes.push(Node::Text(n, text.trim_end().to_string()));
        }
    }
    Ok((nodes, false))
}

struct Env {
    vars: Vec<(String, i64)>,
    defines: HashMap<String, String>,
}

impl Env {
    fn lookup(&self, name: &str, depth: usize) -> Option<Value> {
        if let Some((_, v)) = self.vars.iter().rev().find(|(n, _)| n == name) {
            return Some(Value::Int(*v));
        }
        if depth > 32 {
            return None;
        }
        let text = self.defines.get(name)?;
        eval_with(text, &|n| self.lookup(n, depth + 1)).ok()
    }

    fn eval(&self, src: &str, line: usize, col: usize) -> Result<Value, AsmError> {
        eval_with(src, &|n| self.lookup(n, 0))
            .map_err(|e| AsmError::new(line, col + e.offset, AsmErrorKind::Expression(e.message)))
    }

    /// Replaces `$(…)` with its value and whole-word macro names with their text.
    fn substitute(&self, text: &str, line: usize, depth: usize) -> Result<String, AsmError> {
        let mut out = String::with_capacity(text.len());
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            if c == b'$' && bytes.get(i + 1) == Some(&b'(') {
                let mut level = 0usize;
                let mut end = None;
                for (k, &b) in bytes.iter().enumerate().skip(i + 1) {
                    match b {
                        b'(' => level += 1,
                        b')' => {
                            level -= 1;
                            if level == 0 {
                                end = Some(k);
                                break;
                            }
                        }
                        _ => {}
                    }
                }
                let end = end.ok_or_else(|| {
                    AsmError::new(line, i + 1, AsmErrorKind::Expression("unclosed `$(`".into()))
                })?;
                let v = self.eval(&text[i + 2..end], line, i + 3)?;
                out.push_str(&v.to_string());
                i = end + 1;
            } else if c.is_ascii_alphabetic() || c == b'_' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                match self.defines.get(word) {
                    Some(v) if depth < 32 => out.push_str(&self.substitute(v, line, depth + 1)?),
                    _ => out.push_str(word),
                }
            } else if c.is_ascii_digit() {
                // keep numbers such as 1e5 whole
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'.') {
                    i += 1;
                }
                out.push_str(&text[start..i]);
            } else {
                let ch = text[i..].chars().next().expect("in bounds");
                out.push(ch);
                i += ch.len_utf8();
            }
        }
        Ok(out)
    }

    fn run(&mut self, nodes: &[Node], out: &mut Vec<SourceLine>) -> Result<(), AsmError> {
        for node in nodes {
            match node {
                Node::Text(line, text) => {
                    let text = self.substitute(text, *line, 0)?;
                    out.push(SourceLine { line: *line, text });
                }
                Node::Define(name, value) => {
                    self.defines.insert(name.clone(), value.clone());
                }
                Node::For {
                    line,
                    col,
                    var,
                    from,
                    to,
                    body,
                } => {
                    let bound = |s: &str, env: &Env| -> Result<i64, AsmError> {
                        env.eval(s, *line, *col)?.as_int().ok_or_else(|| {
                            AsmError::new(*line, *col, AsmErrorKind::BadDirective(format!("loop bound `{s}` is not an integer")))
                        })
                    };
                    let (a, b) = (bound(from, self)?, bound(to, self)?);
                    for v in a..=b {
                        self.vars.push((var.clone(), v));
                        let r = self.run(body, out);
                        self.vars.pop();
                        r?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Expands directives, keeping the source line of every output line.
pub fn expand(source: &str) -> Result<Vec<SourceLine>, AsmError> {
    let mut lines = source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r').to_string()))
        .peekable();
    let (nodes, _) = build(&mut lines, 0)?;
    let mut env = Env {
        vars: Vec::new(),
        defines: HashMap::new(),
    };
    let mut out = Vec::new();
    env.run(&nodes, &mut out)?;
    Ok(out)
}

/// Flat text with no directives left.
pub fn preprocess(source: &str) -> Result<String, AsmError> {
    let mut s = String::new();
    for l in expand(source)? {
        if !l.text.trim().is_empty() {
            s.push_str(l.text.trim());
            s.push('\n');
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loops_expand() {
        assert_eq!(preprocess("%for i = 0 to 2\nh($(i))\n%endfor").unwrap(), "h(0)\nh(1)\nh(2)\n");
        assert_eq!(preprocess("%for i = 0 to -1\nh($(i))\n%endfor").unwrap(), "");
    }

    #[test]
    fn trotter_angle() {
        assert_eq!(preprocess("rz(1, $(2*0.5*0.02))").unwrap(), "rz(1, 0.02)\n");
    }

    #[test]
    fn defines_and_nesting() {
        let src = "%define N 2\n%define G 0.5\n%for i = 0 to N - 1\n%for j = i to 1\ncnot($(i), $(j+N))\n%endfor\n%endfor\nrx(0, G)";
        assert_eq!(preprocess(src).unwrap(), "cnot(0, 2)\ncnot(0, 3)\ncnot(1, 3)\nrx(0, 0.5)\n");
    }

    #[test]
    fn substitution_is_whole_word() {
        assert_eq!(preprocess("%define N 3\nNN(N)").unwrap(), "NN(3)\n");
        assert_eq!(preprocess("%define e 3\nrz(0, 1e5)").unwrap(), "rz(0, 1e5)\n");
    }

    #[test]
    fn line_numbers_kept() {
        let lines = expand("qubits 1\n%for i = 1 to 2\nx(0) # c\n%endfor").unwrap();
        assert_eq!(lines.iter().map(|l| l.line).collect::<Vec<_>>(), vec![1, 3, 3]);
        assert_eq!(lines[1].text, "x(0)");
    }

    #[test]
    fn errors_carry_lines() {
        let e = preprocess("x(0)\n%for i = 0 to 2\nh(0)").unwrap_err();
        assert_eq!((e.line, e.kind), (2, AsmErrorKind::UnterminatedLoop));
        let e = preprocess("%endfor").unwrap_err();
        assert_eq!(e.kind, AsmErrorKind::UnmatchedEndfor);
        let e = preprocess("\n\nh($(k))").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(matches!(e.kind, AsmErrorKind::Expression(_)));
        assert!(preprocess("h($(1 +))").is_err());
    }

    #[test]
    fn deterministic() {
        let src = "%for i = 1 to 3\nrz(0, $(pi/i))\n%endfor";
        assert_eq!(preprocess(src).unwrap(), preprocess(src).unwrap());
    }
}
