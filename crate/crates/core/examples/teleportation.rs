//! Teleport a random single-qubit state and check every measurement branch.

use std::f64::consts::PI;

use qtvm::circuits::build_teleportation;
use qtvm::debugger::{enumerate_branches, DebugOptions};
use qtvm::engine::StateVector;
use qtvm::isa::Gate;
use rand::{Rng, SeedableRng};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let (theta, phi, lambda) = (rng.gen_range(0.0..PI), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
    let program = build_teleportation(theta, phi, lambda);

    let mut input = StateVector::new(1)?;
    input.apply_gate(&Gate::U { target: 0, theta, phi, lambda })?;
    let want = input.amplitudes();

    let opts = DebugOptions {
        keep_states: true,
        ..DebugOptions::default()
    };
    let tree = enumerate_branches(&program, &opts)?;
    print!("{tree}");
    for leaf in tree.leaves() {
        let data = leaf.leaf.as_ref().expect("leaf");
        let state = data.state.as_ref().expect("kept");
        // the qubit-2 amplitudes sit at the indices fixed by the measured bits
        let base = (data.cregs[1] | data.cregs[2] << 1) as usize;
        let out = [state.amplitude(base), state.amplitude(base | 4)];
        let fidelity = (want[0].conj() * out[0] + want[1].conj() * out[1]).norm_sqr();
        println!("branch {}: p = {:.6}, fidelity = {:.12}", data.key, leaf.probability, fidelity);
    }
    Ok(())
}
