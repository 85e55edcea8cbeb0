mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use qtvm::analytics::*;
use qtvm::engine::StateVector;

/// The mode sum transcribed a second time, from the printed expression.
fn mx_reference(l: usize, g0: f64, g: f64, t: f64) -> f64 {
    let mut total = 0.0;
    let mut m = 1;
    while 2 * m - 1 < l {
        let k = (2 * m - 1) as f64 * PI / l as f64;
        let omega = ((g - k.cos()).powi(2) + k.sin().powi(2)).sqrt();
        let omega0 = ((g0 - k.cos()).powi(2) + k.sin().powi(2)).sqrt();
        let static_part = (g0 + k.cos()) / omega0;
        let dynamic = ((g - g0) * k.sin() * k.sin()) / (omega * omega * omega0) * (1.0 - 4.0 * (omega * t).cos());
        total += static_part + dynamic;
        m += 1;
    }
    2.0 * total / l as f64
}

proptest! {
    #[test]
    fn mx_double_entry(half in 1usize..20, g0 in 0.0f64..3.0, g in 0.0f64..3.0, t in 0.0f64..10.0) {
        let l = 2 * half;
        let a = mx_analytic(l, g0, g, t).unwrap();
        prop_assert!((a - mx_reference(l, g0, g, t)).abs() <= 1e-15 * a.abs().max(1.0) * 4.0);
    }

    #[test]
    fn dispersion_bounded_by_sine(g in -3.0f64..3.0, k in -PI..PI) {
        prop_assert!(epsilon_k(g, k) + 1e-15 >= k.sin().abs());
    }

    #[test]
    fn critical_momentum_is_symmetric(g0 in 0.0f64..1.0, g1 in 1.0f64..4.0) {
        prop_assume!((g0 - g1).abs() > 1e-3);
        let a = critical_momentum(g0, g1).unwrap();
        let b = critical_momentum(g1, g0).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn crossing_quench_has_critical_time(g0 in 0.0f64..0.95, g1 in 1.05f64..5.0) {
        prop_assert!(critical_time(g0, g1).unwrap() > 0.0);
        // both fields on one side of the critical point: no transition
        prop_assert!(critical_time(g0, g0 + 0.04).is_err());
    }

    #[test]
    fn rate_ignores_global_phase(theta in -PI..PI, phi in -PI..PI, lam in -PI..PI, alpha in -PI..PI) {
        let mut a = StateVector::new(2).unwrap();
        a.apply_gate(&qtvm::isa::Gate::U { target: 0, theta, phi, lambda: lam }).unwrap();
        a.apply_gate(&qtvm::isa::Gate::Cnot { control: 0, target: 1 }).unwrap();
        let mut b = a.clone();
        b.scale(C::from_polar(1.0, alpha));
        prop_assert!(loschmidt_rate(&a, &b, 2).unwrap().abs() < 1e-14);
    }

    #[test]
    fn linear_crossing_is_exact(t0 in 0.05f64..0.95, slope in 0.1f64..10.0) {
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
        let values = times.iter().map(|t| slope * (t0 - t)).collect();
        let s = TimeSeries::new(times, values).unwrap();
        let z = s.zero_crossings();
        prop_assert_eq!(z.len(), 1);
        prop_assert!((z[0] - t0).abs() < 1e-12);
    }
}

#[test]
fn critical_time_values() {
    assert!((critical_time(0.0, 2.0).unwrap() - 1.8137993642342178).abs() < 1e-12);
    assert!(matches!(critical_time(0.0, 0.5), Err(AnalyticsError::NoDqpt { .. })));
}

#[test]
fn mx_static_term_without_quench() {
    let l = 10;
    let want: f64 = momentum_grid(l).unwrap().iter().map(|&k| (0.7 + k.cos()) / epsilon_k(0.7, k)).sum::<f64>() * 2.0 / l as f64;
    assert!((mx_analytic(l, 0.7, 0.7, 0.0).unwrap() - want).abs() < 1e-15);
    // g0 = 1 is gapless only at k = 0, which the grid avoids
    assert!(mx_analytic(l, 1.0, 2.0, 0.5).is_ok());
}

/// First local maximum of the parity-symmetric return rate, from exact evolution.
fn first_rate_peak(l: usize) -> f64 {
    let ex = ExactEvolution::new(tfim_hamiltonian(l, 2.0), &zero_state(l));
    let dim = 1usize << l;
    let rate = |t: f64| {
        let psi = ex.state(t);
        let amp = psi[0] + psi[dim - 1];
        -amp.norm_sqr().ln() / l as f64
    };
    let ts: Vec<f64> = (0..=150).map(|i| i as f64 * 0.01).collect();
    let v: Vec<f64> = ts.iter().map(|&t| rate(t)).collect();
    let i = (1..v.len() - 1).find(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1]).unwrap();
    ts[i]
}

#[test]
fn return_rate_peak_approaches_half_critical_time() {
    let target = critical_time(0.0, 2.0).unwrap() / 2.0;
    let d: Vec<f64> = [6, 8, 10].iter().map(|&l| (first_rate_peak(l) - target).abs()).collect();
    assert!(d[0] >= d[1] && d[1] >= d[2], "{d:?}");
    assert!(d[2] < 0.1 * target);
}
