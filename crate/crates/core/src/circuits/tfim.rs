//! Trotterized quench of the periodic transverse-field Ising chain.
//!
//! One step of length `Δt` applies, on every bond, `e^{+iΔt/2 σᶻσᶻ}` and then
//! `e^{+i g Δt/2 σˣ}` on every site, i.e. evolution under
//! `H = −½ Σ_j (σᶻ_j σᶻ_{j+1} + g σˣ_j)`. This is the normalization under which
//! the critical time is `t* = π / ε_{k*}(g1)`.

use std::fmt::Write as _;

use crate::asm::{compile, AsmError};
use crate::isa::{Gate, Program};

/// `e^{−iθ σᶻ_{q1} σᶻ_{q2}}` up to global phase.
pub fn zz_rotation(q1: usize, q2: usize, theta: f64) -> [Gate; 3] {
    assert_ne!(q1, q2, "zz_rotation needs two distinct qubits");
    let c = Gate::Cnot {
        control: q1,
        target: q2,
    };
    [c.clone(), Gate::Rz(q2, 2.0 * theta), c]
}

#[derive(Clone, Debug, PartialEq)]
pub struct TfimQuenchSpec {
    pub num_qubits: usize,
    /// Field of the initial Hamiltonian; only `0` (initial `|0…0⟩`) is generated.
    pub g0: f64,
    pub g1: f64,
    pub dt: f64,
    pub steps: usize,
    /// Snap every this many steps (and at t = 0); `0` disables snaps.
    pub snapshot_every: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum TfimError {
    #[error("need at least 2 sites, got {0}")]
    TooFewSites(usize),
    #[error("time step must be positive, got {0}")]
    BadStep(f64),
    #[error("initial field g0 = {0}: only quenches from the g0 = 0 ferromagnet are generated")]
    InitialField(f64),
    #[error(transparent)]
    Asm(#[from] AsmError),
}

impl TfimQuenchSpec {
    pub fn validate(&self) -> Result<(), TfimError> {
        if self.num_qubits < 2 {
            return Err(TfimError::TooFewSites(self.num_qubits));
        }
        if self.dt.is_nan() || self.dt <= 0.0 {
            return Err(TfimError::BadStep(self.dt));
        }
        if self.g0 != 0.0 {
            return Err(TfimError::InitialField(self.g0));
        }
        Ok(())
    }
}

/// Bonds of the ring with their multiplicity (`L = 2` has one doubled bond).
fn bonds(l: usize) -> Vec<(usize, usize, f64)> {
    if l == 2 {
        return vec![(0, 1, 2.0)];
    }
    (0..l).map(|j| (j, (j + 1) % l, 1.0)).collect()
}

/// Gates of one Trotter step.
pub fn trotter_step(l: usize, g: f64, dt: f64) -> Vec<Gate> {
    let mut out = Vec::with_capacity(4 * l);
    for (a, b, mult) in bonds(l) {
        out.extend(zz_rotation(a, b, -mult * dt / 2.0));
    }
    for j in 0..l {
        out.push(Gate::Rx(j, -g * dt));
    }
    out
}

/// Snap tag for step `k`.
pub fn snapshot_tag(step: usize) -> String {
    format!("t{step}")
}

/// Inverse of [`snapshot_tag`].
pub fn snapshot_step(tag: &str) -> Option<usize> {
    tag.strip_prefix('t')?.parse().ok()
}

fn step_body(out: &mut String, l: usize) {
    if l == 2 {
        // both ring bonds are (0, 1): one triple with a doubled angle
        out.push_str("cnot(0, 1)\nrz(1, $(-2 * DT))\ncnot(0, 1)\n");
    } else {
        let _ = writeln!(out, "%for j = 0 to {}", l - 2);
        out.push_str("cnot($(j), $(j + 1))\nrz($(j + 1), $(-DT))\ncnot($(j), $(j + 1))\n%endfor\n");
        let _ = writeln!(out, "cnot({0}, 0)\nrz(0, $(-DT))\ncnot({0}, 0)", l - 1);
    }
    let _ = writeln!(out, "%for j = 0 to {}\nrx($(j), $(-G * DT))\n%endfor", l - 1);
}

/// QtASM source for the quench, built from `%for` loops.
pub fn tfim_source(spec: &TfimQuenchSpec) -> Result<String, TfimError> {
    spec.validate()?;
    let l = spec.num_qubits;
    let mut body = String::new();
    step_body(&mut body, l);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "# transverse-field Ising quench g0 = {} -> g1 = {}, L = {}, dt = {}, {} steps",
        spec.g0, spec.g1, l, spec.dt, spec.steps
    );
    let _ = writeln!(s, "qubits {l}");
    let _ = writeln!(s, "%define DT {:?}", spec.dt);
    let _ = writeln!(s, "%define G {:?}", spec.g1);
    let every = spec.snapshot_every;
    if every == 0 {
        let _ = writeln!(s, "%for step = 1 to {}", spec.steps);
        s.push_str(&body);
        s.push_str("%endfor\n");
        return Ok(s);
    }
    let _ = writeln!(s, "snap({})", snapshot_tag(0));
    let blocks = spec.steps / every;
    let rest = spec.steps % every;
    let _ = writeln!(s, "%for blk = 1 to {blocks}");
    let _ = writeln!(s, "%for step = 1 to {every}");
    s.push_str(&body);
    s.push_str("%endfor\n");
    let _ = writeln!(s, "snap(t$(blk * {every}))");
    s.push_str("%endfor\n");
    if rest > 0 {
        let _ = writeln!(s, "%for step = 1 to {rest}");
        s.push_str(&body);
        s.push_str("%endfor\n");
    }
    Ok(s)
}

pub fn build_tfim_quench(spec: &TfimQuenchSpec) -> Result<Program, TfimError> {
    Ok(compile(&tfim_source(spec)?)?)
}
