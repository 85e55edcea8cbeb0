//! Probability-tree enumeration and machine inspection.
//!
//! [`enumerate_branches`] forks the machine at every measurement and follows
//! both outcomes with their Born probabilities, so the result is exact and
//! uses no randomness. Branches below [`PRUNE_BELOW`] are kept as marked,
//! childless nodes so their mass stays visible.

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::asm::instruction_text;
use crate::engine::StateVector;
use crate::isa::Program;
use crate::vm::{Event, Histogram, MachineState, RunOptions, Snapshot, VmError};

pub const PRUNE_BELOW: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum DebugError {
    #[error(transparent)]
    Vm(#[from] VmError),
    #[error("a path needs more than {0} measurements")]
    BranchBudget(usize),
}

#[derive(Clone, Copy, Debug)]
pub struct DebugOptions {
    pub max_measurements: usize,
    /// Keep each leaf's final state vector.
    pub keep_states: bool,
    pub run: RunOptions,
}

impl Default for DebugOptions {
    fn default() -> Self {
        DebugOptions {
            max_measurements: 20,
            keep_states: false,
            run: RunOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Fork {
    pub pc: usize,
    pub qubit: usize,
    pub creg: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Leaf {
    pub key: String,
    pub cregs: Vec<u64>,
    pub snapshots: Vec<Snapshot>,
    #[serde(skip)]
    pub state: Option<StateVector>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchNode {
    pub outcome_prefix: Vec<u8>,
    pub probability: f64,
    pub pruned: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fork: Option<Fork>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<BranchNode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leaf: Option<Leaf>,
}

impl BranchNode {
    /// Surviving leaves, depth-first with outcome 0 first.
    pub fn leaves(&self) -> Vec<&BranchNode> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a BranchNode>) {
        if self.leaf.is_some() {
            out.push(self);
        }
        for c in &self.children {
            c.collect(out);
        }
    }

    /// Probability carried by pruned nodes in this subtree.
    pub fn pruned_mass(&self) -> f64 {
        if self.pruned {
            return self.probability;
        }
        self.children.iter().map(BranchNode::pruned_mass).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    fn write_text(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        let label = if self.outcome_prefix.is_empty() {
            "root".to_string()
        } else {
            format!("-> {}", self.outcome_prefix.last().unwrap())
        };
        let _ = write!(out, "{pad}{label} p={:.12}", self.probability);
        if self.pruned {
            out.push_str(" [pruned]");
        }
        if let Some(f) = &self.fork {
            let _ = write!(out, " meas(q{}, c{}) at pc {}", f.qubit, f.creg, f.pc);
        }
        if let Some(l) = &self.leaf {
            let _ = write!(out, " leaf {}", l.key);
        }
        out.push('\n');
        for c in &self.children {
            c.write_text(depth + 1, out);
        }
    }
}

impl fmt::Display for BranchNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_text(0, &mut s);
        f.write_str(&s)
    }
}

struct Walker<'a> {
    program: &'a Program,
    opts: &'a DebugOptions,
    keys: Histogram,
}

impl Walker<'_> {
    fn explore(&self, mut m: MachineState, probability: f64, prefix: Vec<u8>) -> Result<BranchNode, DebugError> {
        match m.advance(self.program, &self.opts.run)? {
            Event::Halted => {
                let state = if self.opts.keep_states {
                    Some(m.quantum.to_state_vector().map_err(VmError::from)?)
                } else {
                    None
                };
                Ok(BranchNode {
                    outcome_prefix: prefix,
                    probability,
                    pruned: false,
                    fork: None,
                    children: Vec::new(),
                    leaf: Some(Leaf {
                        key: self.keys.key(&m.cregs),
                        cregs: m.cregs,
                        snapshots: m.snapshots,
                        state,
                    }),
                })
            }
            Event::Measure { qubit, creg, .. } => {
                if prefix.len() >= self.opts.max_measurements {
                    return Err(DebugError::BranchBudget(self.opts.max_measurements));
                }
                let (p0, p1) = m.quantum.probabilities(qubit).map_err(VmError::from)?;
                let fork = Fork { pc: m.pc, qubit, creg };
                let mut children = Vec::with_capacity(2);
                let live: Vec<bool> = [p0, p1].iter().map(|p| p * probability >= PRUNE_BELOW).collect();
                let mut owner = Some(m);
                for (bit, p) in [(0u8, p0), (1u8, p1)] {
                    let mut child_prefix = prefix.clone();
                    child_prefix.push(bit);
                    let child_p = probability * p;
                    if !live[bit as usize] {
                        children.push(BranchNode {
                            outcome_prefix: child_prefix,
                            probability: child_p,
                            pruned: true,
                            fork: None,
                            children: Vec::new(),
                            leaf: None,
                        });
                        continue;
                    }
                    // the last live child takes the machine without a copy
                    let mut branch = if bit == 0 && live[1] {
                        owner.clone().expect("machine present")
                    } else {
                        owner.take().expect("machine present")
                    };
                    branch.resolve(bit == 1)?;
                    children.push(self.explore(branch, child_p, child_prefix)?);
                }
                Ok(BranchNode {
                    outcome_prefix: prefix,
                    probability,
                    pruned: false,
                    fork: Some(fork),
                    children,
                    leaf: None,
                })
            }
        }
    }
}

/// Explores every measurement branch of `program` from `|0…0⟩`.
pub fn enumerate_branches(program: &Program, opts: &DebugOptions) -> Result<BranchNode, DebugError> {
    let m = MachineState::new(program, &opts.run.engine)?;
    let walker = Walker {
        program,
        opts,
        keys: Histogram::new(program.written_registers().into_iter().rev().collect()),
    };
    walker.explore(m, 1.0, Vec::new())
}

/// Default number of amplitudes listed by [`inspect`].
pub const DEFAULT_TOP_K: usize = 16;

#[derive(Clone, Debug, Serialize)]
pub struct AmplitudeEntry {
    pub index: usize,
    /// Basis label, qubit `L−1` leftmost.
    pub label: String,
    pub re: f64,
    pub im: f64,
    pub probability: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub pc: usize,
    pub halted: bool,
    pub source_line: Option<usize>,
    pub next: Vec<String>,
    /// Nonzero registers as `(index, value)`; all others read 0.
    pub registers: Vec<(usize, u64)>,
    pub amplitudes: Vec<AmplitudeEntry>,
}

/// Renders pc, upcoming instructions, registers and the `top_k`
/// largest-magnitude amplitudes.
pub fn inspect(m: &mut MachineState, program: &Program, top_k: usize) -> Result<Report, VmError> {
    let state = m.quantum.to_state_vector()?;
    let n = state.num_qubits();
    let mut idx: Vec<usize> = (0..state.len()).filter(|&i| state.probability(i) > 0.0).collect();
    idx.sort_by(|&a, &b| state.probability(b).total_cmp(&state.probability(a)).then(a.cmp(&b)));
    idx.truncate(top_k);
    let amplitudes = idx
        .into_iter()
        .map(|i| {
            let a = state.amplitude(i);
            AmplitudeEntry {
                index: i,
                label: format!("{i:0n$b}"),
                re: a.re,
                im: a.im,
                probability: a.norm_sqr(),
            }
        })
        .collect();
    Ok(Report {
        pc: m.pc,
        halted: m.halted,
        source_line: program.source_lines.get(m.pc).copied(),
        next: program.instructions.iter().skip(m.pc).take(5).map(instruction_text).collect(),
        registers: m.cregs.iter().copied().enumerate().filter(|&(_, v)| v != 0).collect(),
        amplitudes,
    })
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pc {}", self.pc)?;
        if let Some(l) = self.source_line {
            write!(f, " (line {l})")?;
        }
        if self.halted {
            write!(f, " halted")?;
        }
        writeln!(f)?;
        for (k, instr) in self.next.iter().enumerate() {
            writeln!(f, "  {} {instr}", if k == 0 { ">" } else { " " })?;
        }
        if self.registers.is_empty() {
            writeln!(f, "registers: all 0")?;
        } else {
            let regs: Vec<String> = self.registers.iter().map(|(i, v)| format!("c{i}={v}")).collect();
            writeln!(f, "registers: {} (others 0)", regs.join(" "))?;
        }
        for a in &self.amplitudes {
            writeln!(f, "  |{}> {:+.6} {:+.6}i  p={:.6}", a.label, a.re, a.im, a.probability)?;
        }
        Ok(())
    }
}

/// Runs until `pc == breakpoint`, a halt, or a measurement (whose outcome
/// `choose` picks from `(qubit, p1)`).
pub fn run_to(
    m: &mut MachineState,
    program: &Program,
    opts: &RunOptions,
    breakpoint: usize,
    mut choose: impl FnMut(usize, f64) -> bool,
) -> Result<(), VmError> {
    while m.pc != breakpoint || m.pending_measurement().is_some() {
        match m.step(program, opts)? {
            Some(Event::Halted) => break,
            Some(Event::Measure { qubit, p1, .. }) => m.resolve(choose(qubit, p1))?,
            None => {}
        }
    }
    Ok(())
}
