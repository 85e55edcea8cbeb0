use std::collections::BTreeSet;

use crate::isa::{Instruction, Program};
use crate::optimize::{optimize_span, Slot};

/// Level 0 returns the program unchanged. Level 1 runs fusion and
/// cancellation inside each straight-line gate span; spans end at any
/// non-gate instruction and at label positions.
pub fn optimize(p: &Program, level: u8) -> Program {
    if level == 0 {
        return p.clone();
    }
    let targets: BTreeSet<usize> = p.labels.values().copied().collect();
    let line_of = |i: usize| p.source_lines.get(i).copied().unwrap_or(0);
    let mut remap = vec![0usize; p.len() + 1];
    let mut instructions = Vec::with_capacity(p.len());
    let mut lines = Vec::with_capacity(p.len());
    let mut span: Vec<Slot> = Vec::new();

    let flush = |span: &mut Vec<Slot>, instructions: &mut Vec<Instruction>, lines: &mut Vec<usize>| {
        for slot in optimize_span(std::mem::take(span)) {
            instructions.push(Instruction::Gate(slot.raise()));
            lines.push(slot.line);
        }
    };

    for (i, instr) in p.instructions.iter().enumerate() {
        if targets.contains(&i) {
            flush(&mut span, &mut instructions, &mut lines);
        }
        remap[i] = instructions.len();
        match instr {
            Instruction::Gate(g) => span.push(Slot::from_gate(g, line_of(i))),
            other => {
                flush(&mut span, &mut instructions, &mut lines);
                remap[i] = instructions.len();
                instructions.push(other.clone());
                lines.push(line_of(i));
            }
        }
    }
    flush(&mut span, &mut instructions, &mut lines);
    remap[p.len()] = instructions.len();

    let labels = p.labels.iter().map(|(k, &v)| (k.clone(), remap[v])).collect();
    for instr in &mut instructions {
        if let Instruction::Jmp { target, .. } | Instruction::Cjmp { target, .. } = instr {
            *target = remap[*target];
        }
    }
    Program {
        num_qubits: p.num_qubits,
        num_registers: p.num_registers,
        instructions,
        labels,
        source_lines: if p.source_lines.is_empty() { Vec::new() } else { lines },
    }
}

#[cfg(test)]
mod tests {
    use super::super::compile;
    use super::*;
    use crate::isa::Gate;

    #[test]
    fn hh_vanishes() {
        let p = compile("qubits 1\nh(0)\nh(0)").unwrap();
        assert!(optimize(&p, 1).is_empty());
        assert_eq!(optimize(&p, 0), p);
    }

    #[test]
    fn measurement_splits_spans() {
        let p = compile("qubits 1\nh(0)\nmeas(0, 0)\nh(0)").unwrap();
        assert_eq!(optimize(&p, 1), p);
    }

    #[test]
    fn labels_split_spans_and_are_remapped() {
        let src = "qubits 2\nx(1)\nx(1)\nh(0)\ntop:\nh(0)\ncjmp(0, top)\n";
        let p = compile(src).unwrap();
        let o = optimize(&p, 1);
        assert_eq!(o.labels["top"], 1);
        assert_eq!(o.instructions[0], Instruction::Gate(Gate::H(0)));
        assert!(matches!(o.instructions[2], Instruction::Cjmp { target: 1, .. }));
        assert_eq!(o.source_lines, vec![4, 6, 7]);
        o.validate().unwrap();
    }
}
