//! The QtVM instruction set and the validated `Program` it is loaded into.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::GateMatrix;

/// Quantum gate instructions. Qubit operands are logical indices.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    X(usize),
    Y(usize),
    Z(usize),
    S(usize),
    Sdg(usize),
    H(usize),
    Cnot {
        control: usize,
        target: usize,
    },
    /// Toffoli.
    Ccnot {
        controls: [usize; 2],
        target: usize,
    },
    Swap(usize, usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    U {
        target: usize,
        theta: f64,
        phi: f64,
        lambda: f64,
    },
    Cu {
        controls: Vec<usize>,
        target: usize,
        theta: f64,
        phi: f64,
        lambda: f64,
    },
}

impl Gate {
    pub fn mnemonic(&self) -> &'static str {
        match self {
            Gate::X(_) => "x",
            Gate::Y(_) => "y",
            Gate::Z(_) => "z",
            Gate::S(_) => "s",
            Gate::Sdg(_) => "sdg",
            Gate::H(_) => "h",
            Gate::Cnot { .. } => "cnot",
            Gate::Ccnot { .. } => "ccnot",
            Gate::Swap(..) => "swap",
            Gate::Rx(..) => "rx",
            Gate::Ry(..) => "ry",
            Gate::Rz(..) => "rz",
            Gate::U { .. } => "u",
            Gate::Cu { .. } => "cu",
        }
    }

    /// All qubits the gate touches, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::H(q)
            | Gate::Rx(q, _)
            | Gate::Ry(q, _)
            | Gate::Rz(q, _)
            | Gate::U { target: q, .. } => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Ccnot { controls, target } => vec![controls[0], controls[1], *target],
            Gate::Swap(a, b) => vec![*a, *b],
            Gate::Cu {
                controls, target, ..
            } => {
                let mut v = controls.clone();
                v.push(*target);
                v
            }
        }
    }

    pub fn controls(&self) -> Vec<usize> {
        match self {
            Gate::Cnot { control, .. } => vec![*control],
            Gate::Ccnot { controls, .. } => controls.to_vec(),
            Gate::Cu { controls, .. } => controls.clone(),
            _ => Vec::new(),
        }
    }

    /// Target qubit and 2×2 matrix; `None` for swap.
    pub fn target_matrix(&self) -> Option<(usize, GateMatrix)> {
        let m = match self {
            Gate::X(q) => (*q, GateMatrix::x()),
            Gate::Y(q) => (*q, GateMatrix::y()),
            Gate::Z(q) => (*q, GateMatrix::z()),
            Gate::S(q) => (*q, GateMatrix::s()),
            Gate::Sdg(q) => (*q, GateMatrix::sdg()),
            Gate::H(q) => (*q, GateMatrix::h()),
            Gate::Cnot { target, .. } | Gate::Ccnot { target, .. } => (*target, GateMatrix::x()),
            Gate::Swap(..) => return None,
            Gate::Rx(q, t) => (*q, GateMatrix::rx(*t)),
            Gate::Ry(q, t) => (*q, GateMatrix::ry(*t)),
            Gate::Rz(q, t) => (*q, GateMatrix::rz(*t)),
            Gate::U {
                target,
                theta,
                phi,
                lambda,
            }
            | Gate::Cu {
                target,
                theta,
                phi,
                lambda,
                ..
            } => (*target, GateMatrix::u(*theta, *phi, *lambda)),
        };
        Some(m)
    }

    pub fn is_single_qubit(&self) -> bool {
        self.qubits().len() == 1
    }

    /// Returns the gate with every qubit index mapped through `f`.
    pub fn map_qubits(&self, f: impl Fn(usize) -> usize) -> Gate {
        match self {
            Gate::X(q) => Gate::X(f(*q)),
            Gate::Y(q) => Gate::Y(f(*q)),
            Gate::Z(q) => Gate::Z(f(*q)),
            Gate::S(q) => Gate::S(f(*q)),
            Gate::Sdg(q) => Gate::Sdg(f(*q)),
            Gate::H(q) => Gate::H(f(*q)),
            Gate::Cnot { control, target } => Gate::Cnot {
                control: f(*control),
                target: f(*target),
            },
            Gate::Ccnot { controls, target } => Gate::Ccnot {
                controls: [f(controls[0]), f(controls[1])],
                target: f(*target),
            },
            Gate::Swap(a, b) => Gate::Swap(f(*a), f(*b)),
            Gate::Rx(q, t) => Gate::Rx(f(*q), *t),
            Gate::Ry(q, t) => Gate::Ry(f(*q), *t),
            Gate::Rz(q, t) => Gate::Rz(f(*q), *t),
            Gate::U {
                target,
                theta,
                phi,
                lambda,
            } => Gate::U {
                target: f(*target),
                theta: *theta,
                phi: *phi,
                lambda: *lambda,
            },
            Gate::Cu {
                controls,
                target,
                theta,
                phi,
                lambda,
            } => Gate::Cu {
                controls: controls.iter().map(|&c| f(c)).collect(),
                target: f(*target),
                theta: *theta,
                phi: *phi,
                lambda: *lambda,
            },
        }
    }
}

/// Binary classical operation `dst = a ∘ b` on 64-bit wrapping integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassicalOp {
    Add,
    Sub,
    Mul,
    Xor,
}

impl ClassicalOp {
    pub fn mnemonic(self) -> &'static str {
        match self {
            ClassicalOp::Add => "cadd",
            ClassicalOp::Sub => "csub",
            ClassicalOp::Mul => "cmul",
            ClassicalOp::Xor => "cxor",
        }
    }

    pub fn eval(self, a: u64, b: u64) -> u64 {
        match self {
            ClassicalOp::Add => a.wrapping_add(b),
            ClassicalOp::Sub => a.wrapping_sub(b),
            ClassicalOp::Mul => a.wrapping_mul(b),
            ClassicalOp::Xor => a ^ b,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    Gate(Gate),
    /// Measure `qubit` into classical register `creg`.
    Meas { qubit: usize, creg: usize },
    /// Execute `body` iff `cregs[creg] != 0`.
    Cif { creg: usize, body: Box<Instruction> },
    Jmp { label: String, target: usize },
    Cjmp {
        creg: usize,
        label: String,
        target: usize,
    },
    Cset { dst: usize, value: u64 },
    Arith {
        op: ClassicalOp,
        dst: usize,
        a: usize,
        b: usize,
    },
    Snap(String),
    Halt,
}

impl Instruction {
    /// True for plain gates: the instructions an optimizer may reorder or fuse.
    pub fn is_gate(&self) -> bool {
        matches!(self, Instruction::Gate(_))
    }

    pub fn as_gate(&self) -> Option<&Gate> {
        match self {
            Instruction::Gate(g) => Some(g),
            _ => None,
        }
    }

    /// Qubits referenced, including inside a `cif` body.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Instruction::Gate(g) => g.qubits(),
            Instruction::Meas { qubit, .. } => vec![*qubit],
            Instruction::Cif { body, .. } => body.qubits(),
            _ => Vec::new(),
        }
    }

    /// Registers read or written, including inside a `cif` body.
    pub fn registers(&self) -> Vec<usize> {
        match self {
            Instruction::Meas { creg, .. } => vec![*creg],
            Instruction::Cif { creg, body } => {
                let mut v = vec![*creg];
                v.extend(body.registers());
                v
            }
            Instruction::Cjmp { creg, .. } => vec![*creg],
            Instruction::Cset { dst, .. } => vec![*dst],
            Instruction::Arith { dst, a, b, .. } => vec![*dst, *a, *b],
            _ => Vec::new(),
        }
    }

    /// Register this instruction can write, if any.
    pub fn written_register(&self) -> Option<usize> {
        match self {
            Instruction::Meas { creg, .. } => Some(*creg),
            Instruction::Cset { dst, .. } | Instruction::Arith { dst, .. } => Some(*dst),
            Instruction::Cif { body, .. } => body.written_register(),
            _ => None,
        }
    }
}

/// Default classical register file size.
pub const DEFAULT_REGISTERS: usize = 64;

/// A validated instruction stream with resolved labels.
#[derive(Clone, Debug, Default)]
pub struct Program {
    pub num_qubits: usize,
    pub num_registers: usize,
    pub instructions: Vec<Instruction>,
    /// Label name → instruction index it precedes.
    pub labels: BTreeMap<String, usize>,
    /// Source line of each instruction (1-based), when compiled from text.
    pub source_lines: Vec<usize>,
}

/// Structural equality: source-line metadata is ignored.
impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.num_qubits == other.num_qubits
            && self.num_registers == other.num_registers
            && self.instructions == other.instructions
            && self.labels == other.labels
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProgramError {
    #[error("instruction {index}: qubit {qubit} out of range (declared {declared})")]
    QubitRange {
        index: usize,
        qubit: usize,
        declared: usize,
    },
    #[error("instruction {index}: qubit {qubit} repeated")]
    DuplicateQubit { index: usize, qubit: usize },
    #[error("instruction {index}: register {creg} out of range ({size} registers)")]
    RegisterRange {
        index: usize,
        creg: usize,
        size: usize,
    },
    #[error("instruction {index}: undefined label `{label}`")]
    UndefinedLabel { index: usize, label: String },
    #[error("instruction {index}: jump target for `{label}` does not match label table")]
    StaleTarget { index: usize, label: String },
    #[error("instruction {index}: cif body may not be cif, jmp or cjmp")]
    NestedControl { index: usize },
    #[error("label `{0}` points past the end of the program")]
    LabelRange(String),
}

impl Program {
    /// Builds a label-free program from instructions and validates it.
    pub fn new(num_qubits: usize, instructions: Vec<Instruction>) -> Result<Self, ProgramError> {
        let num_registers = Self::registers_needed(&instructions);
        let p = Program {
            num_qubits,
            num_registers,
            source_lines: Vec::new(),
            instructions,
            labels: BTreeMap::new(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_gates(num_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self, ProgramError> {
        Self::new(num_qubits, gates.into_iter().map(Instruction::Gate).collect())
    }

    /// At least [`DEFAULT_REGISTERS`], grown to fit the largest index used.
    pub fn registers_needed(instructions: &[Instruction]) -> usize {
        instructions
            .iter()
            .flat_map(|i| i.registers())
            .map(|c| c + 1)
            .max()
            .unwrap_or(0)
            .max(DEFAULT_REGISTERS)
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Registers some instruction may write, ascending.
    pub fn written_registers(&self) -> BTreeSet<usize> {
        self.instructions
            .iter()
            .filter_map(|i| i.written_register())
            .collect()
    }

    pub fn gate_count(&self) -> usize {
        self.instructions.iter().filter(|i| i.is_gate()).count()
    }

    pub fn validate(&self) -> Result<(), ProgramError> {
        for (name, &at) in &self.labels {
            if at > self.instructions.len() {
                return Err(ProgramError::LabelRange(name.clone()));
            }
        }
        for (index, instr) in self.instructions.iter().enumerate() {
            self.validate_one(index, instr)?;
        }
        Ok(())
    }

    fn validate_one(&self, index: usize, instr: &Instruction) -> Result<(), ProgramError> {
        let qs = instr.qubits();
        for (k, &qubit) in qs.iter().enumerate() {
            if qubit >= self.num_qubits {
                return Err(ProgramError::QubitRange {
                    index,
                    qubit,
                    declared: self.num_qubits,
                });
            }
            if qs[..k].contains(&qubit) {
                return Err(ProgramError::DuplicateQubit { index, qubit });
            }
        }
        for creg in instr.registers() {
            if creg >= self.num_registers {
                return Err(ProgramError::RegisterRange {
                    index,
                    creg,
                    size: self.num_registers,
                });
            }
        }
        match instr {
            Instruction::Cif { body, .. } => {
                if matches!(
                    **body,
                    Instruction::Cif { .. } | Instruction::Jmp { .. } | Instruction::Cjmp { .. }
                ) {
                    return Err(ProgramError::NestedControl { index });
                }
            }
            Instruction::Jmp { label, target } | Instruction::Cjmp { label, target, .. } => {
                match self.labels.get(label) {
                    None => {
                        return Err(ProgramError::UndefinedLabel {
                            index,
                            label: label.clone(),
                        })
                    }
                    Some(&at) if at != *target => {
                        return Err(ProgramError::StaleTarget {
                            index,
                            label: label.clone(),
                        })
                    }
                    Some(_) => {}
                }
            }
            _ => {}
        }
        Ok(())
    }
}
