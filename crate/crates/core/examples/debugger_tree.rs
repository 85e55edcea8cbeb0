//! Probability tree of a small adaptive program, then a breakpoint report.

use qtvm::asm::compile;
use qtvm::debugger::{enumerate_branches, inspect, run_to, DebugOptions};
use qtvm::vm::{MachineState, RunOptions};

const SOURCE: &str = "\
qubits 2
ry(0, 1.2)
meas(0, 0)
cif(0, 'h(1)')
meas(1, 1)
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let program = compile(SOURCE)?;
    let tree = enumerate_branches(&program, &DebugOptions::default())?;
    print!("{tree}");
    println!("{}", tree.to_json());

    let opts = RunOptions::default();
    let mut m = MachineState::new(&program, &opts.engine)?;
    // stop before the second measurement, taking outcome 1 on the first
    run_to(&mut m, &program, &opts, 3, |_, _| true)?;
    print!("{}", inspect(&mut m, &program, 4)?);
    Ok(())
}
