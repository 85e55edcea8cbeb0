//! Order finding for 2 mod 15 with four phase bits, then the factors.

use std::time::Instant;

use qtvm::circuits::{build_shor_order_finding, extract_order, factors_from_order, ShorSpec};
use qtvm::vm::{run_shots, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ShorSpec::new(15, 4);
    let program = build_shor_order_finding(&spec)?;
    println!("{} qubits, {} gates", program.num_qubits, program.gate_count());

    let start = Instant::now();
    let hist = run_shots(&program, 1000, 15, &RunOptions::default())?;
    println!("1000 shots in {:.2?}", start.elapsed());
    for (key, count) in &hist.counts {
        println!("  {key}  {count}");
    }

    let r = extract_order(&hist, spec.phase_bits, spec.base_x, spec.modulus_n)?;
    let (p, q) = factors_from_order(spec.modulus_n, spec.base_x, r)?;
    println!("order {r}, 15 = {p} x {q}");
    Ok(())
}
