//! Order finding for 2 mod 35 with eight phase bits (21 qubits).

use std::time::Instant;

use qtvm::circuits::{build_shor_order_finding, extract_order, factors_from_order, ShorSpec};
use qtvm::vm::{run_shots, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let shots: u64 = std::env::args().nth(1).map_or(Ok(100), |s| s.parse())?;
    let spec = ShorSpec::new(35, 8);
    let program = build_shor_order_finding(&spec)?;
    println!("{} qubits, {} gates", program.num_qubits, program.gate_count());

    let start = Instant::now();
    let hist = run_shots(&program, shots, 35, &RunOptions::default())?;
    println!("{shots} shots in {:.2?}", start.elapsed());
    for (key, count) in &hist.counts {
        let y = u64::from_str_radix(key, 2)?;
        println!("  {key}  {y:>3}/256  {count}");
    }

    let r = extract_order(&hist, spec.phase_bits, spec.base_x, spec.modulus_n)?;
    let (p, q) = factors_from_order(spec.modulus_n, spec.base_x, r)?;
    println!("order {r}, 35 = {p} x {q}");
    Ok(())
}
