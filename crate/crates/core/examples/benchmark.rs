//! Wall time of 200-gate random programs with 100 shots against register size.
//!
//! cargo run --release --example benchmark -- [max_qubits]

use qtvm::bench::{log2_slope, run_bench, BenchConfig};
use qtvm::engine::Capacity;
use qtvm::vm::{EngineConfig, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let max_qubits: usize = std::env::args().nth(1).map_or(Ok(20), |s| s.parse())?;
    let config = BenchConfig {
        max_qubits,
        ..BenchConfig::default()
    };
    let opts = RunOptions {
        engine: EngineConfig {
            capacity: Capacity {
                max_qubits: 30,
                memory_budget: 2 << 30,
            },
            ..EngineConfig::default()
        },
        ..RunOptions::default()
    };
    println!("qubits,seconds");
    let rows = run_bench(&config, &opts, |r| println!("{},{:.4}", r.qubits, r.seconds))?;
    if let Some(s) = log2_slope(&rows, 14, max_qubits) {
        println!("slope of log2(time) from 14 qubits: {s:.3}");
    }
    Ok(())
}
