//! Straight-line optimization passes shared by the compiler (`-O1`) and the
//! pagetable's per-sector queues.
//!
//! A gate is merged with the most recent earlier gate that touches exactly the
//! same qubits, provided nothing in between touches any of them:
//! single-qubit gates fuse by matrix product, any pair whose product is the
//! identity cancels, and identical swap pairs cancel. Matrices are kept with
//! their exact phase, so a pass never introduces a relative phase.

use std::collections::HashMap;

use crate::engine::{GateMatrix, KernelOp};
use crate::isa::Gate;

/// Elementwise tolerance for treating a product as the identity.
pub const IDENTITY_TOL: f64 = 1e-13;

/// An op plus the gate it was lowered from, cleared once the op is rewritten.
#[derive(Clone, Debug)]
pub struct Slot {
    pub op: KernelOp,
    pub origin: Option<Gate>,
    pub line: usize,
}

impl Slot {
    pub fn from_gate(gate: &Gate, line: usize) -> Self {
        Slot {
            op: lower(gate),
            origin: Some(gate.clone()),
            line,
        }
    }

    pub fn from_op(op: KernelOp) -> Self {
        Slot {
            op,
            origin: None,
            line: 0,
        }
    }

    /// The gate to emit: the original one if untouched, otherwise a `u` gate
    /// (global phase dropped).
    pub fn raise(&self) -> Gate {
        if let Some(g) = &self.origin {
            return g.clone();
        }
        match &self.op {
            KernelOp::Unitary {
                controls,
                target,
                matrix,
            } => {
                debug_assert!(controls.is_empty(), "only single-qubit ops are fused");
                let (theta, phi, lambda, _) = matrix.to_u_params();
                Gate::U {
                    target: *target,
                    theta,
                    phi,
                    lambda,
                }
            }
            KernelOp::Swap { a, b } => Gate::Swap(*a, *b),
        }
    }
}

pub fn lower(gate: &Gate) -> KernelOp {
    match gate.target_matrix() {
        Some((target, matrix)) => KernelOp::Unitary {
            controls: gate.controls(),
            target,
            matrix,
        },
        None => match gate {
            Gate::Swap(a, b) => KernelOp::Swap { a: *a, b: *b },
            _ => unreachable!("only swap lacks a target matrix"),
        },
    }
}

fn same_set(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && a.iter().all(|q| b.contains(q))
}

fn is_identity_op(op: &KernelOp) -> bool {
    match op {
        KernelOp::Unitary { matrix, .. } => matrix.is_identity(IDENTITY_TOL),
        KernelOp::Swap { .. } => false,
    }
}

enum Merge {
    Cancel,
    Replace(GateMatrix),
    Keep,
}

fn merge(earlier: &KernelOp, later: &KernelOp) -> Merge {
    match (earlier, later) {
        (
            KernelOp::Unitary {
                controls: c1,
                target: t1,
                matrix: m1,
            },
            KernelOp::Unitary {
                controls: c2,
                target: t2,
                matrix: m2,
            },
        ) if t1 == t2 && same_set(c1, c2) => {
            let product = *m2 * *m1;
            if product.is_identity(IDENTITY_TOL) {
                Merge::Cancel
            } else if c1.is_empty() {
                Merge::Replace(product)
            } else {
                Merge::Keep
            }
        }
        (KernelOp::Swap { a, b }, KernelOp::Swap { a: a2, b: b2 }) if same_set(&[*a, *b], &[*a2, *b2]) => {
            Merge::Cancel
        }
        _ => Merge::Keep,
    }
}

/// Runs fusion, cancellation and identity removal over a gate-only span.
pub fn optimize_span(input: Vec<Slot>) -> Vec<Slot> {
    let mut out: Vec<Option<Slot>> = Vec::with_capacity(input.len());
    let mut last: HashMap<usize, Vec<usize>> = HashMap::new();

    for slot in input {
        if is_identity_op(&slot.op) {
            continue;
        }
        let qs = slot.op.qubits();
        let candidate = qs
            .iter()
            .map(|q| last.get(q).and_then(|s| s.last().copied()))
            .try_fold(None, |acc: Option<usize>, j| match (acc, j) {
                (_, None) => Err(()),
                (None, Some(j)) => Ok(Some(j)),
                (Some(a), Some(j)) if a == j => Ok(Some(a)),
                _ => Err(()),
            })
            .ok()
            .flatten();

        if let Some(j) = candidate {
            let earlier = out[j].as_ref().expect("live slot");
            if same_set(&earlier.op.qubits(), &qs) {
                match merge(&earlier.op, &slot.op) {
                    Merge::Cancel => {
                        out[j] = None;
                        for q in &qs {
                            last.get_mut(q).map(|s| s.pop());
                        }
                        continue;
                    }
                    Merge::Replace(m) => {
                        let e = out[j].as_mut().unwrap();
                        if let KernelOp::Unitary { matrix, .. } = &mut e.op {
                            *matrix = m;
                        }
                        e.origin = None;
                        continue;
                    }
                    Merge::Keep => {}
                }
            }
        }
        let idx = out.len();
        for q in &qs {
            last.entry(*q).or_default().push(idx);
        }
        out.push(Some(slot));
    }
    out.into_iter().flatten().collect()
}

/// Convenience for queues that hold bare ops.
pub fn optimize_ops(ops: Vec<KernelOp>) -> Vec<KernelOp> {
    optimize_span(ops.into_iter().map(Slot::from_op).collect())
        .into_iter()
        .map(|s| s.op)
        .collect()
}
