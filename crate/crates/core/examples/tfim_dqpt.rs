//! Quench of the Ising ring from g0 = 0 to g1 (default 2): magnetization zero
//! crossings and return-rate maxima against (n + 1/2) t*.
//!
//! cargo run --release --example tfim_dqpt -- [g1] [out_dir]

use std::time::Instant;

use qtvm::analytics::{
    magnetization_series, symmetric_loschmidt_series, QuenchParams, QuenchSummary,
};
use qtvm::circuits::{build_tfim_quench, TfimQuenchSpec};
use qtvm::vm::{run_shot, RunOptions, SnapOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let g1: f64 = args.next().map_or(Ok(2.0), |s| s.parse())?;
    let out_dir = args.next();

    let spec = TfimQuenchSpec {
        num_qubits: 10,
        g0: 0.0,
        g1,
        dt: 0.01,
        steps: 500,
        snapshot_every: 1,
    };
    let program = build_tfim_quench(&spec)?;
    let opts = RunOptions {
        snap: SnapOptions {
            expect_z: true,
            expect_x: false,
            state: true,
        },
        ..RunOptions::default()
    };
    let start = Instant::now();
    let shot = run_shot(&program, 0, 0, &opts)?;
    println!("{} gates, {} snapshots in {:.2?}", program.gate_count(), shot.snapshots.len(), start.elapsed());

    let mz = magnetization_series(&shot.snapshots, spec.dt)?;
    let rate = symmetric_loschmidt_series(&shot.snapshots, spec.dt)?;
    let params = QuenchParams { g0: 0.0, g1, l: 10 };
    let summary = QuenchSummary::new(params, spec.dt, &mz, Some(&rate));
    println!("{}", summary.to_json());
    match summary.t_star {
        Some(t) => println!("t* = {t:.4}"),
        None => println!("no DQPT; min m_z = {:.4}", mz.min_value()),
    }

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(format!("{dir}/mz.csv"), mz.to_csv("mz"))?;
        std::fs::write(format!("{dir}/rate.csv"), rate.to_csv("rate"))?;
        std::fs::write(format!("{dir}/summary.json"), summary.to_json())?;
    }
    Ok(())
}
