//! The same circuit on one flat vector and on 2^s-amplitude sectors.

use qtvm::engine::StateVector;
use qtvm::isa::Gate;
use qtvm::pagetable::PagedState;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let l = 10;
    let mut gates = Vec::new();
    for q in 0..l {
        gates.push(Gate::H(q));
        gates.push(Gate::Rz(q, 0.1 * (q + 1) as f64));
    }
    for q in 0..l - 1 {
        gates.push(Gate::Cnot { control: q, target: q + 1 });
    }
    gates.push(Gate::Swap(0, l - 1));
    gates.push(Gate::Ry(l - 1, 0.7));

    let mut flat = StateVector::new(l)?;
    for g in &gates {
        flat.apply_gate(g)?;
    }
    for s in [1, 4, 7, 10] {
        let mut paged = PagedState::new(l, s)?;
        for g in &gates {
            paged.enqueue(g)?;
        }
        let queued = paged.pending();
        let out = paged.gather()?;
        println!(
            "s = {s:2}: {:4} sectors, {queued:3} ops queued before sync, {} sync events, permutation identity: {}, max diff {:.1e}",
            paged.sectors().len(),
            paged.sync_events(),
            paged.permutation().is_identity(),
            out.max_abs_diff(&flat)
        );
    }
    Ok(())
}
