//! Transverse magnetization after a g = 0 -> 2 quench: simulation against the
//! closed-form mode sum.

use qtvm::analytics::{mx_analytic, transverse_series};
use qtvm::circuits::{build_tfim_quench, TfimQuenchSpec};
use qtvm::vm::{run_shot, RunOptions, SnapOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = TfimQuenchSpec {
        num_qubits: 10,
        g0: 0.0,
        g1: 2.0,
        dt: 0.02,
        steps: 150,
        snapshot_every: 10,
    };
    let opts = RunOptions {
        snap: SnapOptions {
            expect_z: false,
            expect_x: true,
            state: false,
        },
        ..RunOptions::default()
    };
    let shot = run_shot(&build_tfim_quench(&spec)?, 0, 0, &opts)?;
    let mx = transverse_series(&shot.snapshots, spec.dt)?;
    println!("t,mx_sim,mx_formula");
    for (t, v) in mx.times.iter().zip(&mx.values) {
        println!("{t:.2},{v:.6},{:.6}", mx_analytic(10, 0.0, 2.0, *t)?);
    }
    Ok(())
}
