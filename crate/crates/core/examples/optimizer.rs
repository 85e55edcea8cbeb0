//! Gate fusion at -O1: the optimized program has fewer gates and the same
//! final state up to a global phase.

use qtvm::asm::{compile, emit, optimize};
use qtvm::vm::{run_shot_machine, RunOptions};

const SOURCE: &str = "\
qubits 3
h(0)
h(0)
rz(1, 0.3)
rx(1, 0.2)
rz(1, -0.1)
cnot(0, 2)
cnot(0, 2)
s(2)
sdg(2)
t_gate:
x(1)
y(1)
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let program = compile(SOURCE)?;
    let fused = optimize(&program, 1);
    println!("{} gates -> {} gates\n", program.gate_count(), fused.gate_count());
    print!("{}", emit(&fused));

    let opts = RunOptions::default();
    let (_, mut a) = run_shot_machine(&program, 0, 0, &opts)?;
    let (_, mut b) = run_shot_machine(&fused, 0, 0, &opts)?;
    let diff = a.quantum.to_state_vector()?.max_abs_diff_up_to_phase(&b.quantum.to_state_vector()?);
    println!("\nmax amplitude difference up to phase: {diff:.2e}");
    Ok(())
}
