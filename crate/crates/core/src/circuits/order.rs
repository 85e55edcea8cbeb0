//! Classical post-processing of phase-estimation samples.

use std::collections::BTreeSet;

use super::shor::{gcd, mod_pow};
use crate::vm::Histogram;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrderError {
    #[error("histogram is empty")]
    Empty,
    #[error("bad histogram key `{0}`")]
    Key(String),
    #[error("no candidate order satisfies {x}^r = 1 mod {n}")]
    NotFound { x: u64, n: u64 },
    #[error("order {0} is odd")]
    OddOrder(u64),
    #[error("{x}^(r/2) = -1 mod {n}")]
    MinusOne { x: u64, n: u64 },
    #[error("gcds give only trivial factors of {0}")]
    Trivial(u64),
}

/// Continued-fraction convergent denominators of `num / den`, up to `max_den`.
pub fn convergent_denominators(num: u64, den: u64, max_den: u64) -> Vec<u64> {
    let (mut p, mut q) = (num as u128, den as u128);
    let (mut h0, mut h1) = (1u128, 0u128);
    let mut out = Vec::new();
    while q != 0 {
        let a = p / q;
        (p, q) = (q, p - a * q);
        // denominators follow h_k = a_k h_{k-1} + h_{k-2}
        let h = a * h1 + h0;
        (h0, h1) = (h1, h);
        if h1 > max_den as u128 {
            break;
        }
        if h1 > 0 {
            out.push(h1 as u64);
        }
    }
    out
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Value of a key whose characters are bits, most significant first.
pub fn key_value(key: &str) -> Result<u64, OrderError> {
    u64::from_str_radix(key, 2).map_err(|_| OrderError::Key(key.to_string()))
}

/// Order of `x` modulo `n` from a phase-estimation histogram with `phase_bits`
/// bits. Outcomes seen at least `max(2, 2%)` of the time contribute their
/// convergent denominators; the smallest denominator (or pairwise lcm) that
/// is a true period wins.
pub fn extract_order(hist: &Histogram, phase_bits: usize, x: u64, n: u64) -> Result<u64, OrderError> {
    if hist.shots == 0 || hist.counts.is_empty() {
        return Err(OrderError::Empty);
    }
    let threshold = (hist.shots / 50).max(2);
    let frequent: Vec<u64> = hist
        .counts
        .iter()
        .filter(|(_, &c)| c >= threshold)
        .map(|(k, _)| key_value(k))
        .collect::<Result<_, _>>()?;
    let den = 1u64 << phase_bits;
    let mut dens = BTreeSet::new();
    for y in frequent.into_iter().filter(|&y| y != 0) {
        dens.extend(convergent_denominators(y, den, n));
    }
    let mut candidates = dens.clone();
    for &a in &dens {
        for &b in &dens {
            let l = lcm(a, b);
            if l <= n {
                candidates.insert(l);
            }
        }
    }
    candidates
        .into_iter()
        .find(|&r| mod_pow(x, r, n) == 1)
        .ok_or(OrderError::NotFound { x, n })
}

/// Non-trivial factors `(gcd(x^{r/2} − 1, n), gcd(x^{r/2} + 1, n))`.
pub fn factors_from_order(n: u64, x: u64, r: u64) -> Result<(u64, u64), OrderError> {
    if r % 2 == 1 {
        return Err(OrderError::OddOrder(r));
    }
    let h = mod_pow(x, r / 2, n);
    if h == n - 1 {
        return Err(OrderError::MinusOne { x, n });
    }
    let f1 = gcd((h + n - 1) % n, n);
    let f2 = gcd((h + 1) % n, n);
    let trivial = |f: u64| f == 1 || f == n || f == 0;
    if trivial(f1) || trivial(f2) {
        return Err(OrderError::Trivial(n));
    }
    Ok((f1, f2))
}
