use std::fmt::Write as _;

use crate::isa::{Gate, Instruction, Program};

/// 17 significant digits: enough to read back the identical `f64`.
pub fn format_angle(a: f64) -> String {
    format!("{a:.16e}")
}

fn gate_text(g: &Gate) -> String {
    let m = g.mnemonic();
    match g {
        Gate::Rx(q, t) | Gate::Ry(q, t) | Gate::Rz(q, t) => format!("{m}({q}, {})", format_angle(*t)),
        Gate::U {
            target,
            theta,
            phi,
            lambda,
        } => format!(
            "u({target}, {}, {}, {})",
            format_angle(*theta),
            format_angle(*phi),
            format_angle(*lambda)
        ),
        Gate::Cu {
            controls,
            target,
            theta,
            phi,
            lambda,
        } => {
            let mut s = String::from("cu(");
            for c in controls {
                let _ = write!(s, "{c}, ");
            }
            let _ = write!(
                s,
                "{target}, {}, {}, {})",
                format_angle(*theta),
                format_angle(*phi),
                format_angle(*lambda)
            );
            s
        }
        _ => {
            let qs: Vec<String> = g.qubits().iter().map(|q| q.to_string()).collect();
            format!("{m}({})", qs.join(", "))
        }
    }
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_alphabetic() || c == '_') && cs.all(|c| c.is_alphanumeric() || c == '_')
}

pub fn instruction_text(instr: &Instruction) -> String {
    match instr {
        Instruction::Gate(g) => gate_text(g),
        Instruction::Meas { qubit, creg } => format!("meas({qubit}, {creg})"),
        Instruction::Cif { creg, body } => format!("cif({creg}, '{}')", instruction_text(body)),
        Instruction::Jmp { label, .. } => format!("jmp({label})"),
        Instruction::Cjmp { creg, label, .. } => format!("cjmp({creg}, {label})"),
        Instruction::Cset { dst, value } => format!("cset({dst}, {value})"),
        Instruction::Arith { op, dst, a, b } => format!("{}({dst}, {a}, {b})", op.mnemonic()),
        Instruction::Snap(tag) if is_ident(tag) => format!("snap({tag})"),
        Instruction::Snap(tag) => format!("snap('{tag}')"),
        Instruction::Halt => "halt".to_string(),
    }
}

/// Canonical QtASM text; labels precede the instruction they name.
pub fn emit(p: &Program) -> String {
    let mut out = format!("qubits {}\n", p.num_qubits);
    let mut by_index: Vec<Vec<&str>> = vec![Vec::new(); p.len() + 1];
    for (name, &at) in &p.labels {
        by_index[at.min(p.len())].push(name);
    }
    for (i, labels) in by_index.iter().enumerate() {
        for l in labels {
            let _ = writeln!(out, "{l}:");
        }
        if let Some(instr) = p.instructions.get(i) {
            out.push_str(&instruction_text(instr));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{compile, parse};
    use super::*;

    #[test]
    fn round_trip_teleport_and_labels() {
        let src = "qubits 3\nh(1)\ncnot(1,2)\ncnot(0,1)\nh(0)\nmeas(0,1)\nmeas(1,2)\ncif(2,'x(2)')\ncif(1,'z(2)')\n";
        let p = parse(src).unwrap();
        assert_eq!(parse(&emit(&p)).unwrap(), p);

        let src = "qubits 2\ncset(0, 2)\nstart:\nry(0, 0.1)\ncsub(0, 0, 1)\ncjmp(0, start)\nsnap('after loop')\nend:\n";
        let p = compile(src).unwrap();
        let text = emit(&p);
        assert!(text.contains("start:\nry(0, "));
        assert!(text.ends_with("end:\n"));
        assert_eq!(parse(&text).unwrap(), p);
    }

    #[test]
    fn angles_have_17_digits() {
        assert_eq!(format_angle(0.1), "1.0000000000000001e-1");
        let g = Gate::U {
            target: 0,
            theta: 1.0 / 3.0,
            phi: -std::f64::consts::PI,
            lambda: 0.0,
        };
        assert_eq!(
            gate_text(&g),
            "u(0, 3.3333333333333331e-1, -3.1415926535897931e0, 0.0000000000000000e0)"
        );
    }
}
