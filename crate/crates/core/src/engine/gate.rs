use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Mul;

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A 2×2 complex matrix acting on one qubit, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateMatrix(pub [[Complex64; 2]; 2]);

impl GateMatrix {
    pub const IDENTITY: GateMatrix = GateMatrix([[ONE, ZERO], [ZERO, ONE]]);

    pub const fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        GateMatrix([[m00, m01], [m10, m11]])
    }

    pub fn x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn y() -> Self {
        Self::new(ZERO, -I, I, ZERO)
    }

    pub fn z() -> Self {
        Self::new(ONE, ZERO, ZERO, -ONE)
    }

    pub fn s() -> Self {
        Self::new(ONE, ZERO, ZERO, I)
    }

    pub fn sdg() -> Self {
        Self::new(ONE, ZERO, ZERO, -I)
    }

    pub fn h() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::new(h, h, h, -h)
    }

    /// `e^{-iθ/2 σx}`
    pub fn rx(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        let c = Complex64::new(c, 0.0);
        let ms = Complex64::new(0.0, -s);
        Self::new(c, ms, ms, c)
    }

    /// `e^{-iθ/2 σy}`
    pub fn ry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self::new(
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        )
    }

    /// `e^{-iθ/2 σz}`
    pub fn rz(theta: f64) -> Self {
        Self::new(
            Complex64::from_polar(1.0, -theta / 2.0),
            ZERO,
            ZERO,
            Complex64::from_polar(1.0, theta / 2.0),
        )
    }

    /// `u(θ,φ,λ) = [[cos θ/2, −e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(φ+λ)} cos θ/2]]`
    pub fn u(theta: f64, phi: f64, lambda: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self::new(
            Complex64::new(c, 0.0),
            -Complex64::from_polar(s, lambda),
            Complex64::from_polar(s, phi),
            Complex64::from_polar(c, phi + lambda),
        )
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let m = &self.0;
        Self::new(m[0][0] * k, m[0][1] * k, m[1][0] * k, m[1][1] * k)
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &GateMatrix) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        d
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.dagger() * *self).max_abs_diff(&Self::IDENTITY) <= tol
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.max_abs_diff(&Self::IDENTITY) <= tol
    }

    /// True when both off-diagonal entries are exactly zero.
    pub fn is_diagonal(&self) -> bool {
        self.0[0][1] == ZERO && self.0[1][0] == ZERO
    }

    /// True for the exact Pauli-X matrix.
    pub fn is_pauli_x(&self) -> bool {
        *self == Self::x()
    }

    /// Decomposes a unitary as `e^{iα} u(θ,φ,λ)`, returning `(θ, φ, λ, α)`.
    pub fn to_u_params(&self) -> (f64, f64, f64, f64) {
        const EPS: f64 = 1e-14;
        let m = &self.0;
        let (a00, a10) = (m[0][0].norm(), m[1][0].norm());
        let theta = 2.0 * a10.atan2(a00);
        if a10 < EPS {
            // diagonal up to rounding: cos θ/2 ≈ 1
            let alpha = m[0][0].arg();
            (theta, 0.0, m[1][1].arg() - alpha, alpha)
        } else if a00 < EPS {
            let alpha = 0.0;
            (theta, m[1][0].arg(), (-m[0][1]).arg(), alpha)
        } else {
            let alpha = m[0][0].arg();
            let phi = m[1][0].arg() - alpha;
            let lambda = (-m[0][1]).arg() - alpha;
            (theta, phi, lambda, alpha)
        }
    }
}

impl Mul for GateMatrix {
    type Output = GateMatrix;

    /// Matrix product `self · rhs` (apply `rhs` first).
    fn mul(self, rhs: GateMatrix) -> GateMatrix {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, slot) in row.iter_mut().enumerate() {
                *slot = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        GateMatrix(out)
    }
}
