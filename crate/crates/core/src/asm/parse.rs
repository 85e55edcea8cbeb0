use std::collections::{BTreeMap, HashMap};

use super::expr::eval;
use super::preprocess::SourceLine;
use super::{AsmError, AsmErrorKind};
use crate::isa::{ClassicalOp, Gate, Instruction, Program, ProgramError};

struct Operand<'a> {
    col: usize,
    text: &'a str,
}

struct Ctx {
    line: usize,
    declared: usize,
}

impl Ctx {
    fn err(&self, col: usize, kind: AsmErrorKind) -> AsmError {
        AsmError::new(self.line, col, kind)
    }

    fn number(&self, op: &Operand) -> Result<f64, AsmError> {
        eval(op.text, &HashMap::new())
            .map(|v| v.as_f64())
            .map_err(|e| self.err(op.col + e.offset, AsmErrorKind::Expression(e.message)))
    }

    fn index(&self, op: &Operand, what: &str) -> Result<u64, AsmError> {
        let v = eval(op.text, &HashMap::new())
            .map_err(|e| self.err(op.col + e.offset, AsmErrorKind::Expression(e.message)))?;
        match v.as_int() {
            Some(i) if i >= 0 => Ok(i as u64),
            _ => Err(self.err(
                op.col,
                AsmErrorKind::BadOperand(format!("{what} must be a non-negative integer, got `{}`", op.text)),
            )),
        }
    }

    fn qubit(&self, op: &Operand) -> Result<usize, AsmError> {
        let q = self.index(op, "qubit")? as usize;
        if q >= self.declared {
            return Err(self.err(
                op.col,
                AsmErrorKind::QubitRange {
                    qubit: q,
                    declared: self.declared,
                },
            ));
        }
        Ok(q)
    }

    fn creg(&self, op: &Operand) -> Result<usize, AsmError> {
        let c = self.index(op, "register")?;
        if c > 1 << 20 {
            return Err(self.err(op.col, AsmErrorKind::BadOperand(format!("register {c} too large"))));
        }
        Ok(c as usize)
    }

    fn name<'a>(&self, op: &Operand<'a>) -> Result<&'a str, AsmError> {
        if is_ident(op.text) {
            Ok(op.text)
        } else {
            Err(self.err(op.col, AsmErrorKind::BadOperand(format!("expected a name, got `{}`", op.text))))
        }
    }
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_alphabetic() || c == '_') && cs.all(|c| c.is_alphanumeric() || c == '_')
}

/// Splits on top-level commas; `base` is the column of `s[0]`.
fn split_operands<'a>(s: &'a str, base: usize) -> Vec<Operand<'a>> {
    let mut out = Vec::new();
    let (mut depth, mut quoted, mut start) = (0i32, false, 0);
    let push = |out: &mut Vec<Operand<'a>>, from: usize, to: usize| {
        let piece = &s[from..to];
        let lead = piece.len() - piece.trim_start().len();
        out.push(Operand {
            col: base + from + lead,
            text: piece.trim(),
        });
    };
    for (i, c) in s.char_indices() {
        match c {
            '\'' | '`' if !quoted => quoted = true,
            '\'' if quoted => quoted = false,
            '(' if !quoted => depth += 1,
            ')' if !quoted => depth -= 1,
            ',' if !quoted && depth == 0 => {
                push(&mut out, start, i);
                start = i + 1;
            }
            _ => {}
        }
    }
    if !s.trim().is_empty() || !out.is_empty() {
        push(&mut out, start, s.len());
    }
    out
}

fn arity(ctx: &Ctx, col: usize, mnemonic: &str, ops: &[Operand], n: usize) -> Result<(), AsmError> {
    if ops.len() != n {
        return Err(ctx.err(
            col,
            AsmErrorKind::Arity {
                mnemonic: mnemonic.to_string(),
                expected: n.to_string(),
                got: ops.len(),
            },
        ));
    }
    Ok(())
}

fn distinct(ctx: &Ctx, ops: &[Operand], qs: &[usize]) -> Result<(), AsmError> {
    for (k, q) in qs.iter().enumerate() {
        if qs[..k].contains(q) {
            return Err(ctx.err(ops[k].col, AsmErrorKind::DuplicateQubit(*q)));
        }
    }
    Ok(())
}

/// Parses `mnemonic(operands)` starting at column `col`. Jump targets are
/// left unresolved.
fn instruction(ctx: &Ctx, text: &str, col: usize) -> Result<Instruction, AsmError> {
    let text_trim = text.trim();
    let col = col + (text.len() - text.trim_start().len());
    if text_trim == "halt" || text_trim == "halt()" {
        return Ok(Instruction::Halt);
    }
    let open = text_trim
        .find('(')
        .ok_or_else(|| ctx.err(col, AsmErrorKind::Syntax(format!("expected `name(...)`, got `{text_trim}`"))))?;
    if !text_trim.ends_with(')') {
        return Err(ctx.err(col + text_trim.len(), AsmErrorKind::Syntax("expected `)` at end of line".into())));
    }
    let mnemonic = text_trim[..open].trim();
    let ops = split_operands(&text_trim[open + 1..text_trim.len() - 1], col + open + 1);

    let one_q = |f: fn(usize) -> Gate| -> Result<Instruction, AsmError> {
        arity(ctx, col, mnemonic, &ops, 1)?;
        Ok(Instruction::Gate(f(ctx.qubit(&ops[0])?)))
    };
    let rot = |f: fn(usize, f64) -> Gate| -> Result<Instruction, AsmError> {
        arity(ctx, col, mnemonic, &ops, 2)?;
        Ok(Instruction::Gate(f(ctx.qubit(&ops[0])?, ctx.number(&ops[1])?)))
    };
    let arith = |op: ClassicalOp| -> Result<Instruction, AsmError> {
        arity(ctx, col, mnemonic, &ops, 3)?;
        Ok(Instruction::Arith {
            op,
            dst: ctx.creg(&ops[0])?,
            a: ctx.creg(&ops[1])?,
            b: ctx.creg(&ops[2])?,
        })
    };

    let instr = match mnemonic {
        "x" => one_q(Gate::X)?,
        "y" => one_q(Gate::Y)?,
        "z" => one_q(Gate::Z)?,
        "s" => one_q(Gate::S)?,
        "sdg" => one_q(Gate::Sdg)?,
        "h" => one_q(Gate::H)?,
        "rx" => rot(Gate::Rx)?,
        "ry" => rot(Gate::Ry)?,
        "rz" => rot(Gate::Rz)?,
        "cnot" => {
            arity(ctx, col, mnemonic, &ops, 2)?;
            let (c, t) = (ctx.qubit(&ops[0])?, ctx.qubit(&ops[1])?);
            distinct(ctx, &ops, &[c, t])?;
            Instruction::Gate(Gate::Cnot { control: c, target: t })
        }
        "ccnot" => {
            arity(ctx, col, mnemonic, &ops, 3)?;
            let qs = [ctx.qubit(&ops[0])?, ctx.qubit(&ops[1])?, ctx.qubit(&ops[2])?];
            distinct(ctx, &ops, &qs)?;
            Instruction::Gate(Gate::Ccnot {
                controls: [qs[0], qs[1]],
                target: qs[2],
            })
        }
        "swap" => {
            arity(ctx, col, mnemonic, &ops, 2)?;
            let (a, b) = (ctx.qubit(&ops[0])?, ctx.qubit(&ops[1])?);
            distinct(ctx, &ops, &[a, b])?;
            Instruction::Gate(Gate::Swap(a, b))
        }
        "u" => {
            arity(ctx, col, mnemonic, &ops, 4)?;
            Instruction::Gate(Gate::U {
                target: ctx.qubit(&ops[0])?,
                theta: ctx.number(&ops[1])?,
                phi: ctx.number(&ops[2])?,
                lambda: ctx.number(&ops[3])?,
            })
        }
        "cu" => {
            if ops.len() < 5 {
                return Err(ctx.err(
                    col,
                    AsmErrorKind::Arity {
                        mnemonic: "cu".into(),
                        expected: "at least 5".into(),
                        got: ops.len(),
                    },
                ));
            }
            let n = ops.len();
            let qs = ops[..n - 3].iter().map(|o| ctx.qubit(o)).collect::<Result<Vec<_>, _>>()?;
            distinct(ctx, &ops, &qs)?;
            Instruction::Gate(Gate::Cu {
                controls: qs[..qs.len() - 1].to_vec(),
                target: qs[qs.len() - 1],
                theta: ctx.number(&ops[n - 3])?,
                phi: ctx.number(&ops[n - 2])?,
                lambda: ctx.number(&ops[n - 1])?,
            })
        }
        "meas" => {
            arity(ctx, col, mnemonic, &ops, 2)?;
            Instruction::Meas {
                qubit: ctx.qubit(&ops[0])?,
                creg: ctx.creg(&ops[1])?,
            }
        }
        "cif" => {
            arity(ctx, col, mnemonic, &ops, 2)?;
            let creg = ctx.creg(&ops[0])?;
            let body = ops[1].text;
            let inner = body
                .strip_prefix('\'')
                .or_else(|| body.strip_prefix('`'))
                .and_then(|b| b.strip_suffix('\''))
                .ok_or_else(|| {
                    ctx.err(ops[1].col, AsmErrorKind::Syntax("cif body must be quoted, as in 'x(2)'".into()))
                })?;
            let body = instruction(ctx, inner, ops[1].col + 1)?;
            if matches!(body, Instruction::Cif { .. } | Instruction::Jmp { .. } | Instruction::Cjmp { .. }) {
                return Err(ctx.err(
                    ops[1].col,
                    AsmErrorKind::Syntax("cif body may not be cif, jmp or cjmp".into()),
                ));
            }
            Instruction::Cif {
                creg,
                body: Box::new(body),
            }
        }
        "jmp" => {
            arity(ctx, col, mnemonic, &ops, 1)?;
            Instruction::Jmp {
                label: ctx.name(&ops[0])?.to_string(),
                target: usize::MAX,
            }
        }
        "cjmp" => {
            arity(ctx, col, mnemonic, &ops, 2)?;
            Instruction::Cjmp {
                creg: ctx.creg(&ops[0])?,
                label: ctx.name(&ops[1])?.to_string(),
                target: usize::MAX,
            }
        }
        "cset" => {
            arity(ctx, col, mnemonic, &ops, 2)?;
            Instruction::Cset {
                dst: ctx.creg(&ops[0])?,
                value: ctx.index(&ops[1], "value")?,
            }
        }
        "cadd" => arith(ClassicalOp::Add)?,
        "csub" => arith(ClassicalOp::Sub)?,
        "cmul" => arith(ClassicalOp::Mul)?,
        "cxor" => arith(ClassicalOp::Xor)?,
        "snap" => {
            arity(ctx, col, mnemonic, &ops, 1)?;
            let t = ops[0].text;
            let tag = match t.strip_prefix('\'').and_then(|t| t.strip_suffix('\'')) {
                Some(inner) => inner,
                None => ctx.name(&ops[0])?,
            };
            Instruction::Snap(tag.to_string())
        }
        other => return Err(ctx.err(col, AsmErrorKind::UnknownMnemonic(other.to_string()))),
    };
    Ok(instr)
}

fn jump_label(instr: &mut Instruction) -> Option<(&String, &mut usize)> {
    match instr {
        Instruction::Jmp { label, target } | Instruction::Cjmp { label, target, .. } => Some((label, target)),
        _ => None,
    }
}

/// Parses preprocessed lines into a validated program.
pub fn parse_lines(lines: &[SourceLine]) -> Result<Program, AsmError> {
    let mut body = lines.iter().filter_map(|l| {
        let text = l.text.find('#').map_or(l.text.as_str(), |k| &l.text[..k]);
        (!text.trim().is_empty()).then_some((l.line, text))
    });

    let (hline, header) = body
        .next()
        .ok_or_else(|| AsmError::new(1, 1, AsmErrorKind::MissingHeader))?;
    let hcol = header.len() - header.trim_start().len() + 1;
    let declared = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["qubits", n] => n
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| AsmError::new(hline, hcol, AsmErrorKind::BadOperand(format!("qubit count `{n}`"))))?,
        _ => return Err(AsmError::new(hline, hcol, AsmErrorKind::MissingHeader)),
    };

    let mut instructions = Vec::new();
    let mut source_lines = Vec::new();
    let mut cols = Vec::new();
    let mut labels = BTreeMap::new();
    for (line, text) in body {
        let ctx = Ctx { line, declared };
        let trimmed = text.trim();
        let col = text.len() - text.trim_start().len() + 1;
        if let Some(name) = trimmed.strip_suffix(':') {
            let name = name.trim();
            if !is_ident(name) {
                return Err(ctx.err(col, AsmErrorKind::Syntax(format!("bad label `{name}`"))));
            }
            if labels.insert(name.to_string(), instructions.len()).is_some() {
                return Err(ctx.err(col, AsmErrorKind::DuplicateLabel(name.to_string())));
            }
            continue;
        }
        instructions.push(instruction(&ctx, text, 1)?);
        source_lines.push(line);
        cols.push(col);
    }

    for (k, instr) in instructions.iter_mut().enumerate() {
        if let Some((label, target)) = jump_label(instr) {
            *target = *labels.get(label).ok_or_else(|| {
                AsmError::new(source_lines[k], cols[k], AsmErrorKind::UndefinedLabel(label.clone()))
            })?;
        }
    }

    let num_registers = Program::registers_needed(&instructions);
    let program = Program {
        num_qubits: declared,
        num_registers,
        instructions,
        labels,
        source_lines,
    };
    program.validate().map_err(|e| {
        let index = match &e {
            ProgramError::QubitRange { index, .. }
            | ProgramError::DuplicateQubit { index, .. }
            | ProgramError::RegisterRange { index, .. }
            | ProgramError::UndefinedLabel { index, .. }
            | ProgramError::StaleTarget { index, .. }
            | ProgramError::NestedControl { index } => Some(*index),
            ProgramError::LabelRange(_) => None,
        };
        let line = index.and_then(|i| program.source_lines.get(i).copied()).unwrap_or(hline);
        let col = index.and_then(|i| cols.get(i).copied()).unwrap_or(1);
        AsmError::new(line, col, AsmErrorKind::Program(e.to_string()))
    })?;
    Ok(program)
}
