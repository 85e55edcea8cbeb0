//! Dense-matrix oracles, written from textbook definitions and independent of
//! the engine kernels.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;
use qtvm::engine::StateVector;
use qtvm::isa::Gate;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// `cos(θ/2) I − i sin(θ/2) P` for a Pauli matrix `P`.
fn pauli_rotation(p: [[C; 2]; 2], theta: f64) -> [[C; 2]; 2] {
    let (s, co) = (theta / 2.0).sin_cos();
    let mut m = [[C::default(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let id = if i == j { co } else { 0.0 };
            m[i][j] = c(id, 0.0) - c(0.0, s) * p[i][j];
        }
    }
    m
}

pub fn single_qubit_matrix(g: &Gate) -> Option<[[C; 2]; 2]> {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let px = [[o, l], [l, o]];
    let py = [[o, -i], [i, o]];
    let pz = [[l, o], [o, -l]];
    Some(match g {
        Gate::X(_) | Gate::Cnot { .. } | Gate::Ccnot { .. } => px,
        Gate::Y(_) => py,
        Gate::Z(_) => pz,
        Gate::S(_) => [[l, o], [o, i]],
        Gate::Sdg(_) => [[l, o], [o, -i]],
        Gate::H(_) => [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]],
        Gate::Rx(_, t) => pauli_rotation(px, *t),
        Gate::Ry(_, t) => pauli_rotation(py, *t),
        Gate::Rz(_, t) => pauli_rotation(pz, *t),
        Gate::U { theta, phi, lambda, .. } | Gate::Cu { theta, phi, lambda, .. } => {
            let (s, co) = (theta / 2.0).sin_cos();
            [
                [c(co, 0.0), -C::from_polar(s, *lambda)],
                [C::from_polar(s, *phi), C::from_polar(co, phi + lambda)],
            ]
        }
        Gate::Swap(..) => return None,
    })
}

/// Full `2^n × 2^n` unitary of one gate, built entry by entry.
pub fn dense_gate(g: &Gate, n: usize) -> DMatrix<C> {
    let dim = 1usize << n;
    let mut m = DMatrix::<C>::zeros(dim, dim);
    let bit = |x: usize, q: usize| (x >> q) & 1;
    if let Gate::Swap(a, b) = g {
        for x in 0..dim {
            let mut y = x & !(1 << a) & !(1 << b);
            y |= bit(x, *a) << b | bit(x, *b) << a;
            m[(y, x)] = c(1.0, 0.0);
        }
        return m;
    }
    let u = single_qubit_matrix(g).expect("single-target gate");
    let (controls, target): (Vec<usize>, usize) = match g {
        Gate::Cnot { control, target } => (vec![*control], *target),
        Gate::Ccnot { controls, target } => (controls.to_vec(), *target),
        Gate::Cu { controls, target, .. } => (controls.clone(), *target),
        other => (vec![], other.qubits()[0]),
    };
    for x in 0..dim {
        if controls.iter().all(|&q| bit(x, q) == 1) {
            let xb = bit(x, target);
            for (yb, row) in u.iter().enumerate() {
                let y = (x & !(1 << target)) | yb << target;
                m[(y, x)] += row[xb];
            }
        } else {
            m[(x, x)] = c(1.0, 0.0);
        }
    }
    m
}

pub fn dense_unitary(gates: &[Gate], n: usize) -> DMatrix<C> {
    let mut u = DMatrix::<C>::identity(1 << n, 1 << n);
    for g in gates {
        u = dense_gate(g, n) * u;
    }
    u
}

pub fn zero_state(n: usize) -> DVector<C> {
    let mut v = DVector::<C>::zeros(1 << n);
    v[0] = c(1.0, 0.0);
    v
}

pub fn dense_apply(gates: &[Gate], n: usize, psi: &DVector<C>) -> DVector<C> {
    let mut v = psi.clone();
    for g in gates {
        v = dense_gate(g, n) * v;
    }
    v
}

pub fn engine_run(gates: &[Gate], n: usize) -> StateVector {
    let mut s = StateVector::new(n).unwrap();
    for g in gates {
        s.apply_gate(g).unwrap();
    }
    s
}

pub fn to_dvector(s: &StateVector) -> DVector<C> {
    DVector::from_vec(s.amplitudes())
}

pub fn max_diff(a: &DVector<C>, b: &DVector<C>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest entry difference after removing the global phase of `b` relative to `a`.
pub fn max_diff_up_to_phase(a: &DMatrix<C>, b: &DMatrix<C>) -> f64 {
    let (k, _) = a.iter().enumerate().fold((0, 0.0), |best, (k, x)| if x.norm() > best.1 { (k, x.norm()) } else { best });
    let (x, y) = (a.as_slice()[k], b.as_slice()[k]);
    if y.norm() == 0.0 {
        return f64::INFINITY;
    }
    let phase = x / y / (x / y).norm();
    a.iter().zip(b.iter()).map(|(x, y)| (x - y * phase).norm()).fold(0.0, f64::max)
}

/// `H = −½ Σ_j (Z_j Z_{j+1} + g X_j)` on a ring, both ring bonds kept at `L = 2`.
pub fn tfim_hamiltonian(l: usize, g: f64) -> DMatrix<f64> {
    let dim = 1usize << l;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for x in 0..dim {
        for j in 0..l {
            let k = (j + 1) % l;
            let zz = if ((x >> j) ^ (x >> k)) & 1 == 0 { 1.0 } else { -1.0 };
            h[(x, x)] -= 0.5 * zz;
            h[(x ^ (1 << j), x)] -= 0.5 * g;
        }
    }
    h
}

/// Exact `e^{−iHt}|ψ0⟩` at each time, by diagonalizing the real symmetric `H`.
pub struct ExactEvolution {
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
    coeffs: DVector<C>,
}

impl ExactEvolution {
    pub fn new(h: DMatrix<f64>, psi0: &DVector<C>) -> Self {
        let eig = h.symmetric_eigen();
        let vt = eig.eigenvectors.transpose().map(|x| c(x, 0.0));
        let coeffs = vt * psi0;
        ExactEvolution { eig, coeffs }
    }

    pub fn state(&self, t: f64) -> DVector<C> {
        let phased = DVector::from_iterator(
            self.coeffs.len(),
            self.coeffs
                .iter()
                .zip(self.eig.eigenvalues.iter())
                .map(|(a, e)| a * C::from_polar(1.0, -e * t)),
        );
        self.eig.eigenvectors.map(|x| c(x, 0.0)) * phased
    }
}

/// Site-averaged `⟨σᶻ⟩`.
pub fn mz(psi: &DVector<C>, l: usize) -> f64 {
    let mut s = 0.0;
    for (x, a) in psi.iter().enumerate() {
        let p = a.norm_sqr();
        for j in 0..l {
            s += if (x >> j) & 1 == 0 { p } else { -p };
        }
    }
    s / l as f64
}

/// Site-averaged `⟨σˣ⟩`.
pub fn mx(psi: &DVector<C>, l: usize) -> f64 {
    let mut s = 0.0;
    for (x, a) in psi.iter().enumerate() {
        for j in 0..l {
            s += (a.conj() * psi[x ^ (1 << j)]).re;
        }
    }
    s / l as f64
}

pub fn angle() -> impl Strategy<Value = f64> {
    -7.0f64..7.0
}

/// Any gate on `n` qubits (multi-qubit gates only where they fit).
pub fn gate(n: usize) -> BoxedStrategy<Gate> {
    let q = 0..n;
    let mut options: Vec<BoxedStrategy<Gate>> = vec![
        q.clone().prop_map(Gate::X).boxed(),
        q.clone().prop_map(Gate::Y).boxed(),
        q.clone().prop_map(Gate::Z).boxed(),
        q.clone().prop_map(Gate::S).boxed(),
        q.clone().prop_map(Gate::Sdg).boxed(),
        q.clone().prop_map(Gate::H).boxed(),
        (q.clone(), angle()).prop_map(|(q, t)| Gate::Rx(q, t)).boxed(),
        (q.clone(), angle()).prop_map(|(q, t)| Gate::Ry(q, t)).boxed(),
        (q.clone(), angle()).prop_map(|(q, t)| Gate::Rz(q, t)).boxed(),
        (q.clone(), angle(), angle(), angle())
            .prop_map(|(target, theta, phi, lambda)| Gate::U { target, theta, phi, lambda })
            .boxed(),
    ];
    if n >= 2 {
        let pair = (0..n, 1..n).prop_map(move |(a, d)| (a, (a + d) % n));
        options.push(pair.clone().prop_map(|(control, target)| Gate::Cnot { control, target }).boxed());
        options.push(pair.clone().prop_map(|(a, b)| Gate::Swap(a, b)).boxed());
        options.push(
            (pair, angle(), angle(), angle())
                .prop_map(|((c, target), theta, phi, lambda)| Gate::Cu {
                    controls: vec![c],
                    target,
                    theta,
                    phi,
                    lambda,
                })
                .boxed(),
        );
    }
    if n >= 3 {
        let triple = (0..n, 1..n, 0..n - 2).prop_map(move |(a, d, k)| {
            let b = (a + d) % n;
            let rest: Vec<usize> = (0..n).filter(|&x| x != a && x != b).collect();
            (a, b, rest[k])
        });
        options.push(triple.clone().prop_map(|(a, b, t)| Gate::Ccnot { controls: [a, b], target: t }).boxed());
        options.push(
            (triple, angle(), angle(), angle())
                .prop_map(|((a, b, target), theta, phi, lambda)| Gate::Cu {
                    controls: vec![a, b],
                    target,
                    theta,
                    phi,
                    lambda,
                })
                .boxed(),
        );
    }
    prop::strategy::Union::new(options).boxed()
}

/// Straight-line programs: `(num_qubits, gates)` with `min_n ≤ n ≤ max_n`.
pub fn program(min_n: usize, max_n: usize, max_len: usize) -> impl Strategy<Value = (usize, Vec<Gate>)> {
    (min_n..=max_n).prop_flat_map(move |n| (Just(n), prop::collection::vec(gate(n), 0..max_len)))
}

/// Programs biased towards fusable runs: repeated qubits and inverse pairs.
pub fn fusable(n: usize) -> impl Strategy<Value = Vec<Gate>> {
    prop::collection::vec(
        prop_oneof![
            3 => gate(n).prop_map(|g| vec![g]),
            2 => (0..n, angle()).prop_map(|(q, t)| vec![Gate::Rz(q, t), Gate::Rx(q, t / 2.0), Gate::Rz(q, -t)]),
            1 => (0..n).prop_map(|q| vec![Gate::H(q), Gate::H(q)]),
            1 => (0..n).prop_map(|q| vec![Gate::S(q), Gate::Sdg(q)]),
            1 => (0..n, 1..n).prop_map(move |(a, d)| {
                let g = Gate::Cnot { control: a, target: (a + d) % n };
                vec![g.clone(), g]
            }),
        ],
        0..30,
    )
    .prop_map(|v| v.into_iter().flatten().collect())
}
