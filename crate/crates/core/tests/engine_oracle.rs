mod common;

use common::*;
use proptest::prelude::*;
use qtvm::engine::{read_dump, write_dump, StateVector};
use qtvm::isa::Gate;
use qtvm::pagetable::PagedState;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn engine_matches_dense_products((n, gates) in program(1, 5, 40)) {
        let got = to_dvector(&engine_run(&gates, n));
        let want = dense_apply(&gates, n, &zero_state(n));
        prop_assert!(max_diff(&got, &want) < 1e-12);
    }

    #[test]
    fn engine_matches_dense_on_random_input((n, gates) in program(1, 4, 20), seed in any::<u64>()) {
        // start from a random normalized state instead of |0…0⟩
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<C> = (0..1 << n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<C> = raw.iter().map(|a| a / norm).collect();
        let mut s = StateVector::from_amplitudes(&amps).unwrap();
        for g in &gates {
            s.apply_gate(g).unwrap();
        }
        let want = dense_apply(&gates, n, &nalgebra::DVector::from_vec(amps));
        prop_assert!(max_diff(&to_dvector(&s), &want) < 1e-12);
    }

    #[test]
    fn paged_matches_single((n, gates) in program(1, 8, 60), s_pick in 0usize..16) {
        let s = 1 + s_pick % n;
        let mut paged = PagedState::new(n, s).unwrap();
        for g in &gates {
            paged.enqueue(g).unwrap();
        }
        let single = engine_run(&gates, n);
        prop_assert!(paged.gather().unwrap().max_abs_diff(&single) < 1e-12);
    }

    #[test]
    fn paged_measurement_agrees((n, gates) in program(2, 7, 40), s_pick in 0usize..16, q_pick in 0usize..16) {
        let s = 1 + s_pick % n;
        let q = q_pick % n;
        let mut paged = PagedState::new(n, s).unwrap();
        let mut single = StateVector::new(n).unwrap();
        for g in &gates {
            paged.enqueue(g).unwrap();
            single.apply_gate(g).unwrap();
        }
        let (p0, p1) = paged.probabilities(q).unwrap();
        let (w0, w1) = single.probabilities(q).unwrap();
        prop_assert!((p0 - w0).abs() < 1e-12 && (p1 - w1).abs() < 1e-12);
        prop_assert!((paged.expectation_x(q).unwrap() - single.expectation_x(q).unwrap()).abs() < 1e-12);
        let outcome = p1 > 0.5;
        paged.collapse(q, outcome).unwrap();
        single.collapse(q, outcome).unwrap();
        prop_assert!(paged.gather().unwrap().max_abs_diff(&single) < 1e-12);
    }

    #[test]
    fn gates_preserve_norm((n, gates) in program(1, 6, 60)) {
        prop_assert!((engine_run(&gates, n).norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collapse_normalizes((n, gates) in program(1, 5, 30), q_pick in 0usize..8) {
        let q = q_pick % n;
        let mut s = engine_run(&gates, n);
        let (p0, p1) = s.probabilities(q).unwrap();
        prop_assert!((p0 + p1 - 1.0).abs() < 1e-12);
        let outcome = p1 >= p0;
        s.collapse(q, outcome).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let want = if outcome { 1.0 } else { 0.0 };
        prop_assert!((s.prob_one(q).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn dump_round_trips((n, gates) in program(1, 5, 20)) {
        let s = engine_run(&gates, n);
        let mut buf = Vec::new();
        write_dump(&s, &mut buf).unwrap();
        prop_assert_eq!(buf.len(), 9 + 16 * (1 << n));
        prop_assert_eq!(read_dump(buf.as_slice()).unwrap(), s);
    }
}

#[test]
fn bell_state() {
    let s = engine_run(&[Gate::H(0), Gate::Cnot { control: 0, target: 1 }], 2);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    assert!((s.amplitude(0).re - r).abs() < 1e-15);
    assert!((s.amplitude(3).re - r).abs() < 1e-15);
    assert_eq!(s.probability(1), 0.0);
}

#[test]
fn rz_convention() {
    let s = engine_run(&[Gate::H(0), Gate::Rz(0, 0.8)], 1);
    // relative phase e^{iθ} between |1⟩ and |0⟩
    let rel = s.amplitude(1) / s.amplitude(0);
    assert!((rel - C::from_polar(1.0, 0.8)).norm() < 1e-15);
}

#[test]
fn dense_oracle_is_unitary() {
    let g = Gate::Cu { controls: vec![2], target: 0, theta: 0.3, phi: 1.1, lambda: -0.4 };
    let u = dense_gate(&g, 3);
    let id = u.adjoint() * &u;
    assert!((id - nalgebra::DMatrix::<C>::identity(8, 8)).norm() < 1e-14);
}
