use num_complex::Complex64;
use rand::Rng;

use super::gate::GateMatrix;
use super::{kernels, EngineError, KernelOp, IMPOSSIBLE_BRANCH};

/// Limits checked before a register is allocated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Capacity {
    pub max_qubits: usize,
    /// Bytes available for amplitude storage.
    pub memory_budget: u64,
}

impl Default for Capacity {
    fn default() -> Self {
        Capacity {
            max_qubits: 30,
            memory_budget: 8 << 30,
        }
    }
}

impl Capacity {
    /// Raised limits for server-scale runs (34 qubits needs 256 GiB).
    pub fn large(memory_budget: u64) -> Self {
        Capacity {
            max_qubits: 40,
            memory_budget,
        }
    }

    pub fn required_bytes(num_qubits: usize) -> u128 {
        2 * 8 * (1u128 << num_qubits)
    }

    pub fn check(&self, num_qubits: usize) -> Result<(), EngineError> {
        if num_qubits == 0 {
            return Err(EngineError::NoQubits);
        }
        if num_qubits > self.max_qubits {
            return Err(EngineError::TooManyQubits {
                num_qubits,
                max: self.max_qubits,
            });
        }
        let required = Self::required_bytes(num_qubits);
        if required > self.memory_budget as u128 {
            return Err(EngineError::Capacity {
                num_qubits,
                required,
                budget: self.memory_budget,
            });
        }
        Ok(())
    }
}

pub(crate) fn alloc_zeroed(len: usize, num_qubits: usize) -> Result<Vec<f64>, EngineError> {
    let mut v = Vec::new();
    v.try_reserve_exact(len).map_err(|_| EngineError::Capacity {
        num_qubits,
        required: Capacity::required_bytes(num_qubits),
        budget: 0,
    })?;
    v.resize(len, 0.0);
    Ok(v)
}

/// An L-qubit register: `2^L` amplitudes, reals and imaginaries stored apart.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl StateVector {
    /// `|0…0⟩` under the default [`Capacity`].
    pub fn new(num_qubits: usize) -> Result<Self, EngineError> {
        Self::with_capacity(num_qubits, &Capacity::default())
    }

    pub fn with_capacity(num_qubits: usize, capacity: &Capacity) -> Result<Self, EngineError> {
        capacity.check(num_qubits)?;
        let len = 1usize << num_qubits;
        let mut re = alloc_zeroed(len, num_qubits)?;
        let im = alloc_zeroed(len, num_qubits)?;
        re[0] = 1.0;
        Ok(StateVector { num_qubits, re, im })
    }

    /// The computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, EngineError> {
        let mut s = Self::new(num_qubits)?;
        if index >= s.len() {
            return Err(EngineError::QubitOutOfRange {
                qubit: index,
                num_qubits,
            });
        }
        s.re[0] = 0.0;
        s.re[index] = 1.0;
        Ok(s)
    }

    /// Wraps existing buffers; both must have length `2^num_qubits`.
    pub fn from_parts(num_qubits: usize, re: Vec<f64>, im: Vec<f64>) -> Result<Self, EngineError> {
        if num_qubits == 0 || num_qubits >= usize::BITS as usize {
            return Err(EngineError::NoQubits);
        }
        let len = 1usize << num_qubits;
        if re.len() != len || im.len() != len {
            return Err(EngineError::Dump(format!(
                "expected {len} reals and imaginaries, got {} and {}",
                re.len(),
                im.len()
            )));
        }
        Ok(StateVector { num_qubits, re, im })
    }

    pub fn from_amplitudes(amps: &[Complex64]) -> Result<Self, EngineError> {
        let num_qubits = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << num_qubits {
            return Err(EngineError::Dump(format!("{} is not a power of two", amps.len())));
        }
        Self::from_parts(
            num_qubits,
            amps.iter().map(|a| a.re).collect(),
            amps.iter().map(|a| a.im).collect(),
        )
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn reals(&self) -> &[f64] {
        &self.re
    }

    pub fn imags(&self) -> &[f64] {
        &self.im
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        Complex64::new(self.re[index], self.im[index])
    }

    pub fn amplitudes(&self) -> Vec<Complex64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.re[index] * self.re[index] + self.im[index] * self.im[index]
    }

    fn check_qubit(&self, q: usize) -> Result<(), EngineError> {
        if q >= self.num_qubits {
            return Err(EngineError::QubitOutOfRange {
                qubit: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    fn check_distinct(&self, qubits: &[usize]) -> Result<(), EngineError> {
        for (i, &q) in qubits.iter().enumerate() {
            self.check_qubit(q)?;
            if qubits[..i].contains(&q) {
                return Err(EngineError::DuplicateQubit(q));
            }
        }
        Ok(())
    }

    pub fn apply_1q(&mut self, q: usize, u: &GateMatrix) -> Result<(), EngineError> {
        self.check_qubit(q)?;
        kernels::apply_unitary(&mut self.re, &mut self.im, q, &[], u);
        Ok(())
    }

    /// Applies `u` to `target` on basis states where every control is 1.
    pub fn apply_controlled(
        &mut self,
        controls: &[usize],
        target: usize,
        u: &GateMatrix,
    ) -> Result<(), EngineError> {
        let mut all = controls.to_vec();
        all.push(target);
        self.check_distinct(&all)?;
        kernels::apply_unitary(&mut self.re, &mut self.im, target, controls, u);
        Ok(())
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) -> Result<(), EngineError> {
        self.apply_controlled_swap(&[], a, b)
    }

    pub fn apply_controlled_swap(
        &mut self,
        controls: &[usize],
        a: usize,
        b: usize,
    ) -> Result<(), EngineError> {
        let mut all = controls.to_vec();
        all.extend([a, b]);
        self.check_distinct(&all)?;
        kernels::apply_swap(&mut self.re, &mut self.im, a, b, controls);
        Ok(())
    }

    pub fn apply_op(&mut self, op: &KernelOp) -> Result<(), EngineError> {
        match op {
            KernelOp::Unitary {
                controls,
                target,
                matrix,
            } => self.apply_controlled(controls, *target, matrix),
            KernelOp::Swap { a, b } => self.apply_swap(*a, *b),
        }
    }

    pub fn apply_gate(&mut self, gate: &crate::isa::Gate) -> Result<(), EngineError> {
        self.apply_op(&crate::optimize::lower(gate))
    }

    /// `(p0, p1)` for qubit `q`, each clamped to `[0, 1]`.
    pub fn probabilities(&self, q: usize) -> Result<(f64, f64), EngineError> {
        self.check_qubit(q)?;
        let (p0, p1) = kernels::split_probabilities(&self.re, &self.im, q);
        Ok((p0.clamp(0.0, 1.0), p1.clamp(0.0, 1.0)))
    }

    pub fn prob_one(&self, q: usize) -> Result<f64, EngineError> {
        Ok(self.probabilities(q)?.1)
    }

    /// Projects qubit `q` onto `outcome` and renormalizes.
    pub fn collapse(&mut self, q: usize, outcome: bool) -> Result<(), EngineError> {
        let (p0, p1) = self.probabilities(q)?;
        let p = if outcome { p1 } else { p0 };
        if p < IMPOSSIBLE_BRANCH {
            return Err(EngineError::ImpossibleBranch {
                qubit: q,
                outcome: outcome as u8,
                probability: p,
            });
        }
        kernels::collapse(&mut self.re, &mut self.im, q, outcome, 1.0 / p.sqrt());
        Ok(())
    }

    /// Projective measurement: returns 1 iff a uniform draw `u ∈ [0,1)` is below `p1`.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool, EngineError> {
        let p1 = self.prob_one(q)?;
        let outcome = rng.gen::<f64>() < p1;
        self.collapse(q, outcome)?;
        Ok(outcome)
    }

    /// `⟨σᶻ_q⟩ = p0 − p1`, with `|0⟩ ↦ +1`.
    pub fn expectation_z(&self, q: usize) -> Result<f64, EngineError> {
        let (p0, p1) = self.probabilities(q)?;
        Ok(p0 - p1)
    }

    pub fn expectation_x(&self, q: usize) -> Result<f64, EngineError> {
        self.check_qubit(q)?;
        Ok(kernels::x_correlation(&self.re, &self.im, q))
    }

    pub fn norm_sqr(&self) -> f64 {
        kernels::norm_sqr(&self.re, &self.im)
    }

    /// `⟨self|other⟩`
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64, EngineError> {
        if self.num_qubits != other.num_qubits {
            return Err(EngineError::DimensionMismatch(self.num_qubits, other.num_qubits));
        }
        Ok(kernels::inner(&self.re, &self.im, &other.re, &other.im))
    }

    /// Multiplies the whole vector by a scalar (a global phase when `|k| = 1`).
    pub fn scale(&mut self, k: Complex64) {
        kernels::scale_all(&mut self.re, &mut self.im, k);
    }

    /// Largest per-amplitude modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        (0..self.len().min(other.len()))
            .map(|k| (self.amplitude(k) - other.amplitude(k)).norm())
            .fold(0.0, f64::max)
    }

    /// Like [`max_abs_diff`](Self::max_abs_diff) after aligning the global phase
    /// of `other` to `self` on the largest amplitude.
    pub fn max_abs_diff_up_to_phase(&self, other: &StateVector) -> f64 {
        let overlap = other.inner_product(self).unwrap_or_default();
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        (0..self.len().min(other.len()))
            .map(|k| (self.amplitude(k) - other.amplitude(k) * phase).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a.re - re).abs() < 1e-12 && (a.im - im).abs() < 1e-12
    }

    #[test]
    fn init_is_ground_state() {
        let s = StateVector::new(1).unwrap();
        assert_eq!(s.reals(), &[1.0, 0.0]);
        assert_eq!(s.imags(), &[0.0, 0.0]);
        let s = StateVector::new(3).unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s.probability(0), 1.0);
    }

    #[test]
    fn capacity_limits() {
        assert!(matches!(StateVector::new(0), Err(EngineError::NoQubits)));
        assert!(matches!(
            Capacity::default().check(34),
            Err(EngineError::TooManyQubits { .. })
        ));
        // 2·2^34 reals of 8 bytes
        assert_eq!(Capacity::required_bytes(34), 2 * 8 * (1u128 << 34));
        assert!(Capacity::large(256 << 30).check(34).is_ok());
        assert!(matches!(
            Capacity::large(255 << 30).check(34),
            Err(EngineError::Capacity { .. })
        ));
        assert!(matches!(
            Capacity { max_qubits: 30, memory_budget: 1 << 20 }.check(20),
            Err(EngineError::Capacity { .. })
        ));
    }

    #[test]
    fn single_qubit_examples() {
        let mut s = StateVector::new(1).unwrap();
        s.apply_1q(0, &GateMatrix::h()).unwrap();
        assert!(close(s.amplitude(0), FRAC_1_SQRT_2, 0.0));
        assert!(close(s.amplitude(1), FRAC_1_SQRT_2, 0.0));

        s.apply_1q(0, &GateMatrix::rz(PI)).unwrap();
        // e^{-iπ/2}/√2 and e^{iπ/2}/√2
        assert!(close(s.amplitude(0), 0.0, -FRAC_1_SQRT_2));
        assert!(close(s.amplitude(1), 0.0, FRAC_1_SQRT_2));

        let mut s = StateVector::new(1).unwrap();
        s.apply_1q(0, &GateMatrix::x()).unwrap();
        assert_eq!(s.reals(), &[0.0, 1.0]);
        assert!(matches!(
            s.apply_1q(1, &GateMatrix::x()),
            Err(EngineError::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn controlled_examples() {
        let mut s = StateVector::basis(2, 1).unwrap();
        s.apply_controlled(&[0], 1, &GateMatrix::x()).unwrap();
        assert_eq!(s.probability(3), 1.0);

        let mut s = StateVector::basis(3, 0b011).unwrap();
        s.apply_controlled(&[0, 1], 2, &GateMatrix::x()).unwrap();
        assert_eq!(s.probability(0b111), 1.0);

        let mut s = StateVector::new(2).unwrap();
        s.apply_1q(0, &GateMatrix::h()).unwrap();
        s.apply_controlled(&[0], 1, &GateMatrix::x()).unwrap();
        assert!(close(s.amplitude(0), FRAC_1_SQRT_2, 0.0));
        assert!(close(s.amplitude(3), FRAC_1_SQRT_2, 0.0));

        assert!(matches!(
            s.apply_controlled(&[1], 1, &GateMatrix::x()),
            Err(EngineError::DuplicateQubit(1))
        ));
    }

    #[test]
    fn swap_examples() {
        let mut s = StateVector::basis(2, 0b01).unwrap();
        s.apply_swap(0, 1).unwrap();
        assert_eq!(s.probability(0b10), 1.0);
        let mut s = StateVector::new(2).unwrap();
        s.apply_swap(0, 1).unwrap();
        assert_eq!(s.probability(0), 1.0);
        assert!(s.apply_swap(0, 0).is_err());
    }

    #[test]
    fn swap_matches_index_permutation() {
        let amps: Vec<Complex64> = (0..8)
            .map(|k| Complex64::new(k as f64 + 1.0, -(k as f64)))
            .collect();
        let mut s = StateVector::from_amplitudes(&amps).unwrap();
        s.apply_swap(0, 2).unwrap();
        // brute force: exchange bits 0 and 2 of every index
        for (i, &a) in amps.iter().enumerate() {
            let b0 = i & 1;
            let b2 = (i >> 2) & 1;
            let j = (i & 0b010) | (b0 << 2) | b2;
            assert_eq!(s.amplitude(j), a);
        }
        assert_eq!(s.amplitude(4), amps[1]);
        assert_eq!(s.amplitude(6), amps[3]);
    }

    #[test]
    fn measurement_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = StateVector::basis(1, 1).unwrap();
        let before = s.clone();
        assert!(s.measure(0, &mut rng).unwrap());
        assert_eq!(s, before);

        let mut bell = StateVector::new(2).unwrap();
        bell.apply_1q(0, &GateMatrix::h()).unwrap();
        bell.apply_controlled(&[0], 1, &GateMatrix::x()).unwrap();
        bell.collapse(0, true).unwrap();
        assert!(close(bell.amplitude(3), 1.0, 0.0));
        assert_eq!(bell.probability(0), 0.0);

        assert!(matches!(
            bell.collapse(1, false),
            Err(EngineError::ImpossibleBranch { .. })
        ));
    }

    #[test]
    fn born_rule_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let shots = 10_000;
        let mut ones = 0;
        for _ in 0..shots {
            let mut s = StateVector::new(1).unwrap();
            s.apply_1q(0, &GateMatrix::h()).unwrap();
            ones += s.measure(0, &mut rng).unwrap() as usize;
        }
        let sigma = (shots as f64 * 0.25).sqrt();
        assert!((ones as f64 - shots as f64 / 2.0).abs() < 3.0 * sigma, "{ones}");
    }

    #[test]
    fn expectation_and_inner_product() {
        let s = StateVector::new(4).unwrap();
        for q in 0..4 {
            assert_eq!(s.expectation_z(q).unwrap(), 1.0);
        }
        let mut plus = StateVector::new(1).unwrap();
        plus.apply_1q(0, &GateMatrix::h()).unwrap();
        assert!(plus.expectation_z(0).unwrap().abs() < 1e-15);
        assert!((plus.expectation_x(0).unwrap() - 1.0).abs() < 1e-15);

        let zero = StateVector::new(1).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert_eq!(zero.inner_product(&one).unwrap(), Complex64::new(0.0, 0.0));
        assert!(close(zero.inner_product(&plus).unwrap(), FRAC_1_SQRT_2, 0.0));
        assert!(close(plus.inner_product(&plus).unwrap(), 1.0, 0.0));
        assert!(matches!(
            zero.inner_product(&StateVector::new(2).unwrap()),
            Err(EngineError::DimensionMismatch(1, 2))
        ));
    }
}
