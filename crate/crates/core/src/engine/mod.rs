//! Dense state-vector storage and the gate/measurement kernels behind it.
//!
//! Qubit `q` is bit `q` of a basis index (qubit 0 is the least significant
//! bit). Real and imaginary parts live in two separate contiguous buffers.

use thiserror::Error;

mod dump;
mod gate;
pub(crate) mod kernels;
mod state;

pub use dump::{read_dump, write_dump, DUMP_MAGIC, DUMP_VERSION};
pub use gate::GateMatrix;
pub use state::{Capacity, StateVector};
pub(crate) use state::alloc_zeroed;

/// One kernel invocation in physical qubit positions, with exact matrices.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelOp {
    Unitary {
        controls: Vec<usize>,
        target: usize,
        matrix: GateMatrix,
    },
    Swap {
        a: usize,
        b: usize,
    },
}

impl KernelOp {
    pub fn single(target: usize, matrix: GateMatrix) -> Self {
        KernelOp::Unitary {
            controls: Vec::new(),
            target,
            matrix,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            KernelOp::Unitary {
                controls, target, ..
            } => {
                let mut v = controls.clone();
                v.push(*target);
                v
            }
            KernelOp::Swap { a, b } => vec![*a, *b],
        }
    }
}


/// Branches with less probability than this cannot be selected by a collapse.
pub const IMPOSSIBLE_BRANCH: f64 = 1e-300;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit {0} used more than once in one gate")]
    DuplicateQubit(usize),
    #[error("register size must be at least 1 qubit")]
    NoQubits,
    #[error("{num_qubits} qubits need {required} bytes, budget is {budget} bytes")]
    Capacity {
        num_qubits: usize,
        required: u128,
        budget: u64,
    },
    #[error("{num_qubits} qubits exceed the configured maximum of {max}")]
    TooManyQubits { num_qubits: usize, max: usize },
    #[error("dimension mismatch: {0} vs {1} qubits")]
    DimensionMismatch(usize, usize),
    #[error("outcome {outcome} on qubit {qubit} has probability {probability:e}")]
    ImpossibleBranch {
        qubit: usize,
        outcome: u8,
        probability: f64,
    },
    #[error("malformed state dump: {0}")]
    Dump(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
