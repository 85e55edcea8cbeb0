//! Throughput benchmark: random programs of single-qubit gates and CNOTs,
//! finished by measuring every qubit, timed over a range of register sizes.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::isa::{Gate, Instruction, Program};
use crate::vm::{run_shots, RunOptions, VmError};

/// `single` random one-qubit gates and `cnots` random CNOTs in a seeded random
/// order, then `meas(q, q)` for every qubit.
pub fn random_program(num_qubits: usize, single: usize, cnots: usize, seed: u64) -> Program {
    assert!(num_qubits >= 2, "benchmark programs need two qubits");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kinds: Vec<bool> = std::iter::repeat_n(true, single)
        .chain(std::iter::repeat_n(false, cnots))
        .collect();
    kinds.shuffle(&mut rng);
    let mut instrs = Vec::with_capacity(single + cnots + num_qubits);
    for one in kinds {
        let q = rng.gen_range(0..num_qubits);
        let g = if one {
            let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            match rng.gen_range(0..8) {
                0 => Gate::H(q),
                1 => Gate::X(q),
                2 => Gate::Y(q),
                3 => Gate::Z(q),
                4 => Gate::S(q),
                5 => Gate::Rx(q, angle),
                6 => Gate::Ry(q, angle),
                _ => Gate::Rz(q, angle),
            }
        } else {
            let t = (q + rng.gen_range(1..num_qubits)) % num_qubits;
            Gate::Cnot { control: q, target: t }
        };
        instrs.push(Instruction::Gate(g));
    }
    instrs.extend((0..num_qubits).map(|q| Instruction::Meas { qubit: q, creg: q }));
    Program::new(num_qubits, instrs).expect("benchmark program is well formed")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BenchConfig {
    pub min_qubits: usize,
    pub max_qubits: usize,
    pub single: usize,
    pub cnots: usize,
    pub shots: u64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            min_qubits: 4,
            max_qubits: 20,
            single: 100,
            cnots: 100,
            shots: 100,
            seed: 2020,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub qubits: usize,
    pub gates: usize,
    pub shots: u64,
    pub seconds: f64,
}

/// Times one program per size; `on_row` sees each row as soon as it is measured.
pub fn run_bench(config: &BenchConfig, opts: &RunOptions, mut on_row: impl FnMut(&BenchRow)) -> Result<Vec<BenchRow>, VmError> {
    let mut rows = Vec::new();
    for l in config.min_qubits.max(2)..=config.max_qubits {
        let p = random_program(l, config.single, config.cnots, config.seed.wrapping_add(l as u64));
        let start = Instant::now();
        run_shots(&p, config.shots, config.seed, opts)?;
        let row = BenchRow {
            qubits: l,
            gates: p.gate_count(),
            shots: config.shots,
            seconds: start.elapsed().as_secs_f64(),
        };
        on_row(&row);
        rows.push(row);
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("qubits,gates,shots,seconds\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{:.6}", r.qubits, r.gates, r.shots, r.seconds);
    }
    s
}

/// Least-squares slope of `log2(seconds)` against qubit count over rows with
/// `lo ≤ qubits ≤ hi`; `None` with fewer than two such rows.
pub fn log2_slope(rows: &[BenchRow], lo: usize, hi: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| (lo..=hi).contains(&r.qubits) && r.seconds > 0.0)
        .map(|r| (r.qubits as f64, r.seconds.log2()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}
