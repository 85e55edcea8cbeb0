//! Quench observables of the transverse-field Ising chain: the quasiparticle
//! dispersion, the critical time of the return rate, the closed-form `m_x(t)`
//! expression and post-processing of snapshot series.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::circuits::tfim::snapshot_step;
use crate::engine::StateVector;
use crate::vm::Snapshot;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("no DQPT for g0 = {g0} -> g1 = {g1}: cos k* = {cos_k} is outside [-1, 1]")]
    NoDqpt { g0: f64, g1: f64, cos_k: f64 },
    #[error("singular mode k = {0}: the initial dispersion vanishes")]
    SingularMode(f64),
    #[error("system size must be even and positive, got {0}")]
    OddSize(usize),
    #[error("no snapshots")]
    Empty,
    #[error("times and values differ in length ({0} vs {1})")]
    Length(usize, usize),
    #[error("times must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("snapshot `{0}` carries no step index")]
    Tag(String),
    #[error("snapshot `{0}` recorded no expectation values")]
    NoData(String),
    #[error("states have different dimensions")]
    Dimension,
    #[error("invalid quench: {0}")]
    Params(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuenchParams {
    pub g0: f64,
    pub g1: f64,
    pub l: usize,
}

impl QuenchParams {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if self.g0 < 0.0 || self.g1 < 0.0 {
            return Err(AnalyticsError::Params("fields must be non-negative".into()));
        }
        if self.g0 == self.g1 {
            return Err(AnalyticsError::Params("g0 equals g1: nothing is quenched".into()));
        }
        Ok(())
    }
}

/// Quasiparticle energy `√((g − cos k)² + sin² k)`.
pub fn epsilon_k(g: f64, k: f64) -> f64 {
    ((g - k.cos()).powi(2) + k.sin().powi(2)).sqrt()
}

/// `cos k* = (1 + g0 g1) / (g0 + g1)`.
pub fn critical_momentum(g0: f64, g1: f64) -> Result<f64, AnalyticsError> {
    let cos_k = (1.0 + g0 * g1) / (g0 + g1);
    if cos_k.is_nan() || cos_k.abs() > 1.0 {
        return Err(AnalyticsError::NoDqpt { g0, g1, cos_k });
    }
    Ok(cos_k.acos())
}

/// `t* = π / ε_{k*}(g1)`.
pub fn critical_time(g0: f64, g1: f64) -> Result<f64, AnalyticsError> {
    Ok(PI / epsilon_k(g1, critical_momentum(g0, g1)?))
}

/// `(n + ½) t*` for every `n` with the time at most `t_max`.
pub fn predicted_times(t_star: f64, t_max: f64) -> Vec<f64> {
    (0..)
        .map(|n| (n as f64 + 0.5) * t_star)
        .take_while(|&t| t <= t_max)
        .collect()
}

/// `−(1/L) ln |⟨initial|evolved⟩|²`; `+∞` when the overlap is below `1e-300`.
pub fn loschmidt_rate(initial: &StateVector, evolved: &StateVector, l: usize) -> Result<f64, AnalyticsError> {
    let o = initial
        .inner_product(evolved)
        .map_err(|_| AnalyticsError::Dimension)?
        .norm_sqr();
    if o < 1e-300 {
        return Ok(f64::INFINITY);
    }
    Ok(-o.ln() / l as f64)
}

/// `(|ψ⟩ + Πˣ|ψ⟩)/√2` with `Πˣ = ∏ σˣ_j`. Applied to the evolved `|0…0⟩`
/// this is the evolved two-fold degenerate `g = 0` ground state.
pub fn parity_symmetrize(psi: &StateVector) -> StateVector {
    let amps = psi.amplitudes();
    let mask = amps.len() - 1;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let out: Vec<_> = (0..amps.len()).map(|i| (amps[i] + amps[i ^ mask]) * s).collect();
    StateVector::from_amplitudes(&out).expect("same dimension")
}

/// Momenta `π(2m − 1)/L`, `m = 1..=L/2`.
pub fn momentum_grid(l: usize) -> Result<Vec<f64>, AnalyticsError> {
    if l == 0 || l % 2 == 1 {
        return Err(AnalyticsError::OddSize(l));
    }
    Ok((1..=l / 2).map(|m| PI * (2 * m - 1) as f64 / l as f64).collect())
}

/// The closed-form transverse magnetization after a quench `g0 → g`:
/// `(2/L) Σ_k [(g0 + cos k)/ω0 + (g − g0) sin²k / (ω² ω0) (1 − 4 cos ωt)]`
/// with `ω = ε_k(g)`, `ω0 = ε_k(g0)`.
pub fn mx_analytic(l: usize, g0: f64, g: f64, t: f64) -> Result<f64, AnalyticsError> {
    let mut sum = 0.0;
    for k in momentum_grid(l)? {
        let w = epsilon_k(g, k);
        let w0 = epsilon_k(g0, k);
        if w0 == 0.0 || w == 0.0 {
            return Err(AnalyticsError::SingularMode(k));
        }
        let s2 = k.sin().powi(2);
        sum += (g0 + k.cos()) / w0 + (g - g0) * s2 / (w * w * w0) * (1.0 - 4.0 * (w * t).cos());
    }
    Ok(2.0 / l as f64 * sum)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, AnalyticsError> {
        if times.len() != values.len() {
            return Err(AnalyticsError::Length(times.len(), values.len()));
        }
        if let Some(i) = times.windows(2).position(|w| w[1].is_nan() || w[1] <= w[0]) {
            return Err(AnalyticsError::NotIncreasing(i + 1));
        }
        Ok(TimeSeries { times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sign changes, located by linear interpolation between the two samples.
    pub fn zero_crossings(&self) -> Vec<f64> {
        let (t, v) = (&self.times, &self.values);
        let mut out = Vec::new();
        for i in 1..t.len() {
            let (a, b) = (v[i - 1], v[i]);
            if a == 0.0 && (i == 1 || v[i - 2] != 0.0) {
                out.push(t[i - 1]);
            } else if a * b < 0.0 {
                out.push(t[i - 1] + (t[i] - t[i - 1]) * a / (a - b));
            }
        }
        out
    }

    /// Times of interior samples larger than the left neighbour and no smaller
    /// than the right one.
    pub fn local_maxima(&self) -> Vec<f64> {
        let v = &self.values;
        (1..v.len().saturating_sub(1))
            .filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1])
            .map(|i| self.times[i])
            .collect()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Restriction to `t ≤ t_max`.
    pub fn until(&self, t_max: f64) -> TimeSeries {
        let n = self.times.partition_point(|&t| t <= t_max);
        TimeSeries {
            times: self.times[..n].to_vec(),
            values: self.values[..n].to_vec(),
        }
    }

    /// Two-column CSV with header `t,{column}`.
    pub fn to_csv(&self, column: &str) -> String {
        let mut s = format!("t,{column}\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(s, "{t},{v}");
        }
        s
    }
}

fn series_from(snapshots: &[Snapshot], dt: f64, value: impl Fn(&Snapshot) -> Option<f64>) -> Result<TimeSeries, AnalyticsError> {
    if snapshots.is_empty() {
        return Err(AnalyticsError::Empty);
    }
    let mut times = Vec::with_capacity(snapshots.len());
    let mut values = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        let k = snapshot_step(&s.tag).ok_or_else(|| AnalyticsError::Tag(s.tag.clone()))?;
        times.push(k as f64 * dt);
        values.push(value(s).ok_or_else(|| AnalyticsError::NoData(s.tag.clone()))?);
    }
    TimeSeries::new(times, values)
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// `m_z(t_k)`, the site average of `⟨σᶻ⟩`, from snaps tagged with step `k`.
pub fn magnetization_series(snapshots: &[Snapshot], dt: f64) -> Result<TimeSeries, AnalyticsError> {
    series_from(snapshots, dt, |s| mean(&s.z))
}

/// Site average of `⟨σˣ⟩` from snaps recorded with x expectations.
pub fn transverse_series(snapshots: &[Snapshot], dt: f64) -> Result<TimeSeries, AnalyticsError> {
    series_from(snapshots, dt, |s| mean(&s.x))
}

/// Return rate of the parity-symmetric `g = 0` ground state, from snaps that
/// recorded the state of the run started in `|0…0⟩`.
pub fn symmetric_loschmidt_series(snapshots: &[Snapshot], dt: f64) -> Result<TimeSeries, AnalyticsError> {
    let first = snapshots
        .iter()
        .find_map(|s| s.state.as_ref())
        .ok_or(AnalyticsError::Empty)?;
    let l = first.num_qubits();
    let initial = parity_symmetrize(&StateVector::new(l).map_err(|_| AnalyticsError::Dimension)?);
    series_from(snapshots, dt, |s| {
        let psi = s.state.as_ref()?;
        loschmidt_rate(&initial, &parity_symmetrize(psi), l).ok()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuenchSummary {
    pub params: QuenchParams,
    pub dt: f64,
    /// `None` when the quench does not cross the critical point.
    pub t_star: Option<f64>,
    pub predicted: Vec<f64>,
    pub mz_zero_crossings: Vec<f64>,
    pub rate_maxima: Vec<f64>,
}

impl QuenchSummary {
    pub fn new(params: QuenchParams, dt: f64, mz: &TimeSeries, rate: Option<&TimeSeries>) -> Self {
        let t_star = critical_time(params.g0, params.g1).ok();
        let t_max = mz.times.last().copied().unwrap_or(0.0);
        QuenchSummary {
            params,
            dt,
            t_star,
            predicted: t_star.map(|t| predicted_times(t, t_max)).unwrap_or_default(),
            mz_zero_crossings: mz.zero_crossings(),
            rate_maxima: rate.map(TimeSeries::local_maxima).unwrap_or_default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dispersion() {
        assert_eq!(epsilon_k(1.0, 0.0), 0.0);
        assert_abs_diff_eq!(epsilon_k(2.0, PI / 3.0), 3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn critical_times() {
        assert_abs_diff_eq!(critical_time(0.0, 2.0).unwrap(), PI / 3f64.sqrt(), epsilon = 1e-14);
        assert!(matches!(critical_time(0.0, 0.5), Err(AnalyticsError::NoDqpt { .. })));
        assert_abs_diff_eq!(critical_momentum(0.3, 2.0).unwrap(), critical_momentum(2.0, 0.3).unwrap());
        let p = predicted_times(1.0, 2.6);
        assert_eq!(p, vec![0.5, 1.5, 2.5]);
    }

    #[test]
    fn rates() {
        let a = StateVector::new(2).unwrap();
        assert_eq!(loschmidt_rate(&a, &a, 2).unwrap(), 0.0);
        let b = StateVector::basis(2, 3).unwrap();
        assert_eq!(loschmidt_rate(&a, &b, 2).unwrap(), f64::INFINITY);
        let g = parity_symmetrize(&a);
        assert_abs_diff_eq!(g.norm_sqr(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.probability(3), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn mx_static_value() {
        // no quench: only the time-independent term survives
        let l = 8;
        let want: f64 = momentum_grid(l).unwrap().iter().map(|&k| (0.5 + k.cos()) / epsilon_k(0.5, k)).sum::<f64>() * 2.0 / l as f64;
        assert_abs_diff_eq!(mx_analytic(l, 0.5, 0.5, 1.3).unwrap(), want, epsilon = 1e-15);
        assert!(matches!(mx_analytic(7, 0.0, 2.0, 0.0), Err(AnalyticsError::OddSize(7))));
    }

    #[test]
    fn series_tools() {
        let s = TimeSeries::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, -1.0, 0.5, 0.2]).unwrap();
        assert_eq!(s.zero_crossings(), vec![0.5, 1.0 + 1.0 / 1.5]);
        assert_eq!(s.local_maxima(), vec![2.0]);
        assert_eq!(s.until(1.5).len(), 2);
        assert!(s.to_csv("mz").starts_with("t,mz\n0,1\n"));
        assert!(TimeSeries::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(TimeSeries::new(vec![0.0], vec![]).is_err());
    }

    #[test]
    fn snapshot_series() {
        let snap = |tag: &str, z: f64| Snapshot {
            tag: tag.into(),
            executed: 0,
            z: vec![z, z],
            x: vec![],
            state: None,
        };
        let s = magnetization_series(&[snap("t0", 1.0), snap("t10", 0.5)], 0.01).unwrap();
        assert_eq!(s.times, vec![0.0, 0.1]);
        assert_eq!(s.values, vec![1.0, 0.5]);
        assert_eq!(magnetization_series(&[], 0.01), Err(AnalyticsError::Empty));
        assert!(transverse_series(&[snap("t0", 1.0)], 0.01).is_err());
        assert!(magnetization_series(&[snap("begin", 1.0)], 0.01).is_err());
    }
}
