//! Program execution: machine state, single shots and shot histograms.
//!
//! Per-shot randomness comes from `ChaCha8Rng::seed_from_u64(seed)` switched
//! to stream `shot_index`. Every measurement draws exactly one `u ∈ [0,1)` and
//! yields 1 iff `u < p1`, so a shot's outcomes depend only on
//! `(program, seed, shot_index)` no matter how shots are scheduled.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{Capacity, EngineError, StateVector};
use crate::isa::{Gate, Instruction, Program, ProgramError};
use crate::optimize::lower;
use crate::pagetable::{default_sector_bits, PagedState, PagetableError};

#[derive(Debug, thiserror::Error)]
pub enum VmError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Pagetable(#[from] PagetableError),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error("instruction budget of {0} exhausted")]
    Budget(u64),
    #[error("shots must be at least 1")]
    NoShots,
    #[error("machine is not waiting on a measurement")]
    NotMeasuring,
}

impl VmError {
    /// True when the failure is a memory/capacity limit.
    pub fn is_capacity(&self) -> bool {
        matches!(
            self,
            VmError::Engine(EngineError::Capacity { .. } | EngineError::TooManyQubits { .. })
                | VmError::Pagetable(PagetableError::Engine(
                    EngineError::Capacity { .. } | EngineError::TooManyQubits { .. }
                ))
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EngineKind {
    #[default]
    Single,
    /// Paged storage; `None` picks the default sector size.
    Paged(Option<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct EngineConfig {
    pub kind: EngineKind,
    pub capacity: Capacity,
}

/// The quantum half of a machine.
#[derive(Clone, Debug)]
pub enum Register {
    Single(StateVector),
    Paged(PagedState),
}

impl Register {
    pub fn new(num_qubits: usize, config: &EngineConfig) -> Result<Self, VmError> {
        Ok(match config.kind {
            EngineKind::Single => Register::Single(StateVector::with_capacity(num_qubits, &config.capacity)?),
            EngineKind::Paged(bits) => {
                let s = bits.unwrap_or_else(|| default_sector_bits(num_qubits));
                Register::Paged(PagedState::with_capacity(num_qubits, s, &config.capacity)?)
            }
        })
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            Register::Single(s) => s.num_qubits(),
            Register::Paged(p) => p.num_qubits(),
        }
    }

    /// Bytes of amplitude storage held.
    pub fn memory_bytes(&self) -> u128 {
        Capacity::required_bytes(self.num_qubits())
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), EngineError> {
        match self {
            Register::Single(s) => s.apply_op(&lower(gate)),
            Register::Paged(p) => p.enqueue(gate),
        }
    }

    pub fn probabilities(&mut self, q: usize) -> Result<(f64, f64), EngineError> {
        match self {
            Register::Single(s) => s.probabilities(q),
            Register::Paged(p) => p.probabilities(q),
        }
    }

    pub fn collapse(&mut self, q: usize, outcome: bool) -> Result<(), EngineError> {
        match self {
            Register::Single(s) => s.collapse(q, outcome),
            Register::Paged(p) => p.collapse(q, outcome),
        }
    }

    pub fn expectation_z(&mut self, q: usize) -> Result<f64, EngineError> {
        match self {
            Register::Single(s) => s.expectation_z(q),
            Register::Paged(p) => p.expectation_z(q),
        }
    }

    pub fn expectation_x(&mut self, q: usize) -> Result<f64, EngineError> {
        match self {
            Register::Single(s) => s.expectation_x(q),
            Register::Paged(p) => p.expectation_x(q),
        }
    }

    /// Canonical full state (flushes a paged register).
    pub fn to_state_vector(&mut self) -> Result<StateVector, EngineError> {
        match self {
            Register::Single(s) => Ok(s.clone()),
            Register::Paged(p) => p.gather(),
        }
    }
}

/// What a `snap` records.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SnapOptions {
    pub expect_z: bool,
    pub expect_x: bool,
    pub state: bool,
}

impl Default for SnapOptions {
    fn default() -> Self {
        SnapOptions {
            expect_z: true,
            expect_x: false,
            state: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Snapshot {
    pub tag: String,
    /// Instructions executed before the snap.
    pub executed: u64,
    /// `⟨σᶻ_q⟩` per qubit, empty if not recorded.
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    #[serde(skip)]
    pub state: Option<StateVector>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ShotStrategy {
    /// Every shot re-executes the program from `|0…0⟩`.
    Independent,
    /// Shots sharing a measurement-outcome prefix share the work up to it.
    #[default]
    SharedPrefix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub engine: EngineConfig,
    /// Opt-in cap on executed instructions per shot.
    pub max_instructions: Option<u64>,
    pub snap: SnapOptions,
    pub strategy: ShotStrategy,
}

/// What the machine needs next.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Event {
    Halted,
    /// Waiting on the outcome of measuring `qubit`; `p1` is its Born probability.
    Measure { qubit: usize, creg: usize, p1: f64 },
}

/// One shot's full state.
#[derive(Clone, Debug)]
pub struct MachineState {
    pub quantum: Register,
    pub cregs: Vec<u64>,
    pub pc: usize,
    pub halted: bool,
    pub executed: u64,
    pub snapshots: Vec<Snapshot>,
    pending: Option<(usize, usize)>,
}

impl MachineState {
    pub fn new(program: &Program, config: &EngineConfig) -> Result<Self, VmError> {
        Ok(MachineState {
            quantum: Register::new(program.num_qubits, config)?,
            cregs: vec![0; program.num_registers],
            pc: 0,
            halted: program.is_empty(),
            executed: 0,
            snapshots: Vec::new(),
            pending: None,
        })
    }

    pub fn is_terminated(&self) -> bool {
        self.halted
    }

    /// Executes up to the next measurement or termination.
    pub fn advance(&mut self, program: &Program, opts: &RunOptions) -> Result<Event, VmError> {
        loop {
            if let Some(event) = self.step(program, opts)? {
                return Ok(event);
            }
        }
    }

    /// Executes at most one instruction. Returns an event when the machine
    /// is halted or waiting on a measurement outcome.
    pub fn step(&mut self, program: &Program, opts: &RunOptions) -> Result<Option<Event>, VmError> {
        if let Some((qubit, creg)) = self.pending {
            let p1 = self.quantum.probabilities(qubit)?.1;
            return Ok(Some(Event::Measure { qubit, creg, p1 }));
        }
        if self.pc >= program.len() {
            self.halted = true;
        }
        if self.halted {
            return Ok(Some(Event::Halted));
        }
        if let Some(limit) = opts.max_instructions {
            if self.executed >= limit {
                return Err(VmError::Budget(limit));
            }
        }
        let instr = &program.instructions[self.pc];
        self.executed += 1;
        self.exec(instr, program, opts)
    }

    /// Qubit and register of the measurement awaiting an outcome.
    pub fn pending_measurement(&self) -> Option<(usize, usize)> {
        self.pending
    }

    /// Supplies the outcome of the pending measurement.
    pub fn resolve(&mut self, outcome: bool) -> Result<(), VmError> {
        let (qubit, creg) = self.pending.take().ok_or(VmError::NotMeasuring)?;
        self.quantum.collapse(qubit, outcome)?;
        self.cregs[creg] = outcome as u64;
        self.pc += 1;
        Ok(())
    }

    fn exec(&mut self, instr: &Instruction, program: &Program, opts: &RunOptions) -> Result<Option<Event>, VmError> {
        match instr {
            Instruction::Gate(g) => {
                self.quantum.apply_gate(g)?;
                self.pc += 1;
            }
            Instruction::Meas { qubit, creg } => {
                self.pending = Some((*qubit, *creg));
                let p1 = self.quantum.probabilities(*qubit)?.1;
                return Ok(Some(Event::Measure {
                    qubit: *qubit,
                    creg: *creg,
                    p1,
                }));
            }
            Instruction::Cif { creg, body } => {
                if self.cregs[*creg] != 0 {
                    // the body advances pc itself
                    return self.exec(body, program, opts);
                }
                self.pc += 1;
            }
            Instruction::Jmp { target, .. } => self.pc = *target,
            Instruction::Cjmp { creg, target, .. } => {
                if self.cregs[*creg] != 0 {
                    self.pc = *target;
                } else {
                    self.pc += 1;
                }
            }
            Instruction::Cset { dst, value } => {
                self.cregs[*dst] = *value;
                self.pc += 1;
            }
            Instruction::Arith { op, dst, a, b } => {
                self.cregs[*dst] = op.eval(self.cregs[*a], self.cregs[*b]);
                self.pc += 1;
            }
            Instruction::Snap(tag) => {
                let snap = self.snapshot(tag, &opts.snap)?;
                self.snapshots.push(snap);
                self.pc += 1;
            }
            Instruction::Halt => {
                self.halted = true;
                self.pc = program.len();
            }
        }
        Ok(None)
    }

    fn snapshot(&mut self, tag: &str, opts: &SnapOptions) -> Result<Snapshot, VmError> {
        let n = self.quantum.num_qubits();
        let z = if opts.expect_z {
            (0..n).map(|q| self.quantum.expectation_z(q)).collect::<Result<_, _>>()?
        } else {
            Vec::new()
        };
        let x = if opts.expect_x {
            (0..n).map(|q| self.quantum.expectation_x(q)).collect::<Result<_, _>>()?
        } else {
            Vec::new()
        };
        let state = if opts.state {
            Some(self.quantum.to_state_vector()?)
        } else {
            None
        };
        Ok(Snapshot {
            tag: tag.to_string(),
            executed: self.executed - 1,
            z,
            x,
            state,
        })
    }
}

/// The RNG stream of one shot.
pub fn shot_rng(seed: u64, shot_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot_index);
    rng
}

#[derive(Clone, Debug, Serialize)]
pub struct ShotResult {
    pub shot_index: u64,
    pub cregs: Vec<u64>,
    pub snapshots: Vec<Snapshot>,
    /// Measurement outcomes in execution order.
    pub outcomes: Vec<bool>,
}

fn drive(
    machine: &mut MachineState,
    program: &Program,
    opts: &RunOptions,
    rng: &mut ChaCha8Rng,
    outcomes: &mut Vec<bool>,
) -> Result<(), VmError> {
    while let Event::Measure { p1, .. } = machine.advance(program, opts)? {
        let outcome = rng.gen::<f64>() < p1;
        machine.resolve(outcome)?;
        outcomes.push(outcome);
    }
    Ok(())
}

/// Runs one shot from `|0…0⟩` and returns the final machine too.
pub fn run_shot_machine(
    program: &Program,
    seed: u64,
    shot_index: u64,
    opts: &RunOptions,
) -> Result<(ShotResult, MachineState), VmError> {
    let mut machine = MachineState::new(program, &opts.engine)?;
    let mut rng = shot_rng(seed, shot_index);
    let mut outcomes = Vec::new();
    drive(&mut machine, program, opts, &mut rng, &mut outcomes)?;
    let result = ShotResult {
        shot_index,
        cregs: machine.cregs.clone(),
        snapshots: machine.snapshots.clone(),
        outcomes,
    };
    Ok((result, machine))
}

pub fn run_shot(program: &Program, seed: u64, shot_index: u64, opts: &RunOptions) -> Result<ShotResult, VmError> {
    run_shot_machine(program, seed, shot_index, opts).map(|(r, _)| r)
}

struct Pending {
    machine: MachineState,
    shots: Vec<(u64, ChaCha8Rng, Vec<bool>)>,
}

/// Runs every shot, sharing execution between shots with equal outcome
/// prefixes. Results equal [`run_shot`] for each index.
fn run_shared(program: &Program, shots: u64, seed: u64, opts: &RunOptions) -> Result<Vec<ShotResult>, VmError> {
    let root = MachineState::new(program, &opts.engine)?;
    let state_bytes = root.quantum.memory_bytes();
    let budget = opts.engine.capacity.memory_budget as u128;
    let mut stack = vec![Pending {
        machine: root,
        shots: (0..shots).map(|i| (i, shot_rng(seed, i), Vec::new())).collect(),
    }];
    let mut results = Vec::with_capacity(shots as usize);

    while let Some(Pending { mut machine, mut shots }) = stack.pop() {
        loop {
            match machine.advance(program, opts)? {
                Event::Halted => {
                    for (shot_index, _, outcomes) in shots {
                        results.push(ShotResult {
                            shot_index,
                            cregs: machine.cregs.clone(),
                            snapshots: machine.snapshots.clone(),
                            outcomes,
                        });
                    }
                    break;
                }
                Event::Measure { p1, .. } => {
                    let (mut ones, mut zeros) = (Vec::new(), Vec::new());
                    for (i, mut rng, mut outcomes) in shots {
                        let bit = rng.gen::<f64>() < p1;
                        outcomes.push(bit);
                        if bit {
                            ones.push((i, rng, outcomes));
                        } else {
                            zeros.push((i, rng, outcomes));
                        }
                    }
                    if ones.is_empty() || zeros.is_empty() {
                        let bit = zeros.is_empty();
                        machine.resolve(bit)?;
                        shots = if bit { ones } else { zeros };
                        continue;
                    }
                    // the larger group waits on the stack and the smaller continues,
                    // so at most log2(shots) states are parked at once
                    let (stay_bit, stay, fork) = if ones.len() > zeros.len() {
                        (false, zeros, ones)
                    } else {
                        (true, ones, zeros)
                    };
                    // live states: everything stacked, this one and the fork
                    if (stack.len() as u128 + 2) * state_bytes <= budget {
                        let mut other = machine.clone();
                        other.resolve(!stay_bit)?;
                        stack.push(Pending {
                            machine: other,
                            shots: fork,
                        });
                    } else {
                        for (i, _, _) in fork {
                            results.push(run_shot(program, seed, i, opts)?);
                        }
                    }
                    machine.resolve(stay_bit)?;
                    shots = stay;
                }
            }
        }
    }
    results.sort_by_key(|r| r.shot_index);
    Ok(results)
}

/// Runs shots `0..shots` and returns each result in shot order.
pub fn run_shot_results(
    program: &Program,
    shots: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<Vec<ShotResult>, VmError> {
    if shots == 0 {
        return Err(VmError::NoShots);
    }
    match opts.strategy {
        ShotStrategy::SharedPrefix => run_shared(program, shots, seed, opts),
        ShotStrategy::Independent => (0..shots)
            .into_par_iter()
            .map(|i| run_shot(program, seed, i, opts))
            .collect(),
    }
}

pub fn run_shots(program: &Program, shots: u64, seed: u64, opts: &RunOptions) -> Result<Histogram, VmError> {
    let results = run_shot_results(program, shots, seed, opts)?;
    let mut h = Histogram::new(program.written_registers().into_iter().rev().collect());
    for r in &results {
        h.record(&r.cregs);
    }
    Ok(h)
}

/// Shot counts keyed by the rendered classical registers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Histogram {
    pub shots: u64,
    /// Registers in key order, most significant first.
    pub registers: Vec<usize>,
    pub counts: BTreeMap<String, u64>,
}

impl Histogram {
    pub fn new(registers: Vec<usize>) -> Self {
        Histogram {
            shots: 0,
            registers,
            counts: BTreeMap::new(),
        }
    }

    /// `'0'`/`'1'` per register, or `(v)` for wider values.
    pub fn key(&self, cregs: &[u64]) -> String {
        let mut s = String::new();
        for &r in &self.registers {
            match cregs.get(r).copied().unwrap_or(0) {
                v @ (0 | 1) => s.push(if v == 1 { '1' } else { '0' }),
                v => {
                    let _ = write!(s, "({v})");
                }
            }
        }
        s
    }

    pub fn record(&mut self, cregs: &[u64]) {
        let k = self.key(cregs);
        *self.counts.entry(k).or_default() += 1;
        self.shots += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (k, v) in &other.counts {
            *self.counts.entry(k.clone()).or_default() += v;
        }
        self.shots += other.shots;
    }

    pub fn count(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("histogram serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bitstring,count\n");
        for (k, v) in &self.counts {
            let _ = writeln!(s, "{k},{v}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::ClassicalOp;

    fn prog(n: usize, instrs: Vec<Instruction>) -> Program {
        Program::new(n, instrs).unwrap()
    }

    fn g(gate: Gate) -> Instruction {
        Instruction::Gate(gate)
    }

    #[test]
    fn meas_writes_register() {
        let p = prog(2, vec![g(Gate::X(0)), Instruction::Meas { qubit: 0, creg: 1 }]);
        let r = run_shot(&p, 1, 0, &RunOptions::default()).unwrap();
        assert_eq!(r.cregs[1], 1);
        assert_eq!(r.outcomes, vec![true]);
    }

    #[test]
    fn cif_not_taken_on_zero() {
        let p = prog(
            3,
            vec![Instruction::Cif {
                creg: 2,
                body: Box::new(g(Gate::X(2))),
            }],
        );
        let (_, mut m) = run_shot_machine(&p, 0, 0, &RunOptions::default()).unwrap();
        assert_eq!(m.quantum.to_state_vector().unwrap(), StateVector::new(3).unwrap());
        assert_eq!(m.pc, 1);
    }

    #[test]
    fn cjmp_nonzero_taken() {
        let mut labels = BTreeMap::new();
        labels.insert("end".to_string(), 3);
        let p = Program {
            num_qubits: 1,
            num_registers: 64,
            instructions: vec![
                Instruction::Cset { dst: 4, value: 5 },
                Instruction::Cjmp {
                    creg: 4,
                    label: "end".into(),
                    target: 3,
                },
                g(Gate::X(0)),
            ],
            labels,
            source_lines: vec![],
        };
        p.validate().unwrap();
        let (_, mut m) = run_shot_machine(&p, 0, 0, &RunOptions::default()).unwrap();
        assert_eq!(m.quantum.expectation_z(0).unwrap(), 1.0);
    }

    #[test]
    fn classical_ops() {
        let p = prog(
            1,
            vec![
                Instruction::Cset { dst: 3, value: 7 },
                Instruction::Cset { dst: 1, value: 2 },
                Instruction::Cset { dst: 2, value: 3 },
                Instruction::Arith {
                    op: ClassicalOp::Add,
                    dst: 0,
                    a: 1,
                    b: 2,
                },
                Instruction::Arith {
                    op: ClassicalOp::Sub,
                    dst: 5,
                    a: 6,
                    b: 7,
                },
            ],
        );
        let mut p = p;
        p.instructions.insert(4, Instruction::Cset { dst: 7, value: 1 });
        let r = run_shot(&p, 0, 0, &RunOptions::default()).unwrap();
        assert_eq!(r.cregs[3], 7);
        assert_eq!(r.cregs[0], 5);
        assert_eq!(r.cregs[5], u64::MAX);
        assert_eq!(r.cregs[1], 2);
    }

    #[test]
    fn snaps_record_without_disturbing() {
        let p = prog(
            2,
            vec![
                Instruction::Snap("a".into()),
                g(Gate::H(0)),
                Instruction::Snap("b".into()),
                Instruction::Snap("c".into()),
            ],
        );
        let r = run_shot(&p, 0, 0, &RunOptions::default()).unwrap();
        assert_eq!(r.snapshots[0].z, vec![1.0, 1.0]);
        assert_eq!(r.snapshots[1].z, r.snapshots[2].z);
        assert!(r.snapshots[1].z[0].abs() < 1e-15);
    }

    #[test]
    fn budget_stops_loops() {
        let mut labels = BTreeMap::new();
        labels.insert("top".to_string(), 0);
        let p = Program {
            num_qubits: 1,
            num_registers: 64,
            instructions: vec![Instruction::Jmp {
                label: "top".into(),
                target: 0,
            }],
            labels,
            source_lines: vec![],
        };
        let opts = RunOptions {
            max_instructions: Some(1000),
            ..Default::default()
        };
        assert!(matches!(run_shot(&p, 0, 0, &opts), Err(VmError::Budget(1000))));
    }

    #[test]
    fn shared_prefix_matches_independent() {
        let p = prog(
            3,
            vec![
                g(Gate::H(0)),
                Instruction::Meas { qubit: 0, creg: 0 },
                Instruction::Cif {
                    creg: 0,
                    body: Box::new(g(Gate::Ry(1, 0.7))),
                },
                g(Gate::H(2)),
                Instruction::Meas { qubit: 1, creg: 1 },
                Instruction::Meas { qubit: 2, creg: 2 },
            ],
        );
        let shared = run_shot_results(&p, 200, 9, &RunOptions::default()).unwrap();
        let indep = run_shot_results(
            &p,
            200,
            9,
            &RunOptions {
                strategy: ShotStrategy::Independent,
                ..Default::default()
            },
        )
        .unwrap();
        for (a, b) in shared.iter().zip(&indep) {
            assert_eq!(a.cregs, b.cregs);
            assert_eq!(a.outcomes, b.outcomes);
        }
        // a budget too small for any fork still gives identical results
        let mut tight = RunOptions::default();
        tight.engine.capacity.memory_budget = Capacity::required_bytes(3) as u64;
        let low = run_shot_results(&p, 200, 9, &tight).unwrap();
        for (a, b) in low.iter().zip(&indep) {
            assert_eq!(a.cregs, b.cregs);
        }
    }

    #[test]
    fn histogram_key_and_outputs() {
        let mut h = Histogram::new(vec![2, 1, 0]);
        h.record(&[1, 0, 1]);
        h.record(&[1, 0, 1]);
        h.record(&[0, 5, 0]);
        assert_eq!(h.count("101"), 2);
        assert_eq!(h.count("0(5)0"), 1);
        assert_eq!(h.shots, 3);
        assert!(h.to_csv().starts_with("bitstring,count\n"));
        let v: serde_json::Value = serde_json::from_str(&h.to_json()).unwrap();
        assert_eq!(v["shots"], 3);
        assert_eq!(v["registers"], serde_json::json!([2, 1, 0]));
    }

    #[test]
    fn single_shot_histogram() {
        let p = prog(1, vec![g(Gate::H(0)), Instruction::Meas { qubit: 0, creg: 0 }]);
        let h = run_shots(&p, 1, 3, &RunOptions::default()).unwrap();
        assert_eq!(h.shots, 1);
        assert_eq!(h.counts.values().sum::<u64>(), 1);
        assert!(matches!(run_shots(&p, 0, 3, &RunOptions::default()), Err(VmError::NoShots)));
    }
}
