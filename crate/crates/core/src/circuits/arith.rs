//! Reversible ripple-carry arithmetic (Vedral–Barenco–Ekert) and the
//! controlled doubling modulo an odd `N`.

use crate::isa::Gate;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("registers overlap on qubit {0}")]
    Overlap(usize),
    #[error("register sizes: a has {a}, b needs a+1 = {b_expected} (got {b}), carries need {a} (got {c})")]
    Sizes {
        a: usize,
        b: usize,
        b_expected: usize,
        c: usize,
    },
    #[error("modulus must be odd and at least 3, got {0}")]
    Modulus(u64),
    #[error("modulus {modulus} needs {needed} bits, register has {bits}")]
    TooWide { modulus: u64, needed: usize, bits: usize },
}

fn ccnot(c1: usize, c2: usize, t: usize) -> Gate {
    Gate::Ccnot {
        controls: [c1, c2],
        target: t,
    }
}

fn cnot(c: usize, t: usize) -> Gate {
    Gate::Cnot { control: c, target: t }
}

fn carry(c: usize, a: usize, b: usize, c_next: usize) -> [Gate; 3] {
    [ccnot(a, b, c_next), cnot(a, b), ccnot(c, b, c_next)]
}

fn carry_dagger(c: usize, a: usize, b: usize, c_next: usize) -> [Gate; 3] {
    let [g0, g1, g2] = carry(c, a, b, c_next);
    [g2, g1, g0]
}

fn sum(c: usize, a: usize, b: usize) -> [Gate; 2] {
    [cnot(a, b), cnot(c, b)]
}

fn check_disjoint(regs: &[&[usize]]) -> Result<(), ArithError> {
    let mut seen = std::collections::BTreeSet::new();
    for q in regs.iter().flat_map(|r| r.iter()) {
        if !seen.insert(*q) {
            return Err(ArithError::Overlap(*q));
        }
    }
    Ok(())
}

/// `|a, b, 0⟩ → |a, a + b mod 2^{n+1}, 0⟩` for `n`-bit `a`, `(n+1)`-bit `b`
/// and `n` carry ancillas. Index 0 of every slice is the least significant bit.
pub fn build_adder(a: &[usize], b: &[usize], c: &[usize]) -> Result<Vec<Gate>, ArithError> {
    let n = a.len();
    if n == 0 || b.len() != n + 1 || c.len() != n {
        return Err(ArithError::Sizes {
            a: n,
            b: b.len(),
            b_expected: n + 1,
            c: c.len(),
        });
    }
    check_disjoint(&[a, b, c])?;
    // carry i + 1 lives in c[i + 1], the last one in the overflow bit of b
    let next = |i: usize| if i + 1 < n { c[i + 1] } else { b[n] };
    let mut out = Vec::with_capacity(8 * n);
    for i in 0..n {
        out.extend(carry(c[i], a[i], b[i], next(i)));
    }
    out.push(cnot(a[n - 1], b[n - 1]));
    out.extend(sum(c[n - 1], a[n - 1], b[n - 1]));
    for i in (0..n - 1).rev() {
        out.extend(carry_dagger(c[i], a[i], b[i], next(i)));
        out.extend(sum(c[i], a[i], b[i]));
    }
    Ok(out)
}

/// The adder run backwards: `|a, b⟩ → |a, b − a mod 2^{n+1}⟩`.
pub fn build_subtractor(a: &[usize], b: &[usize], c: &[usize]) -> Result<Vec<Gate>, ArithError> {
    let mut g = build_adder(a, b, c)?;
    g.reverse();
    Ok(g)
}

/// Qubits used by the controlled doubling circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModLayout {
    /// `n` bits, holds `N` between operations.
    pub a: Vec<usize>,
    /// `n + 1` bits, holds `y`.
    pub b: Vec<usize>,
    /// `n` carry ancillas.
    pub c: Vec<usize>,
    /// Comparison flag ancilla.
    pub flag: usize,
}

impl ModLayout {
    /// Contiguous layout starting at `first`: `a`, then `b`, then `c`, then the flag.
    pub fn contiguous(first: usize, n: usize) -> Self {
        ModLayout {
            a: (first..first + n).collect(),
            b: (first + n..first + 2 * n + 1).collect(),
            c: (first + 2 * n + 1..first + 3 * n + 1).collect(),
            flag: first + 3 * n + 1,
        }
    }

    pub fn bits(&self) -> usize {
        self.a.len()
    }
}

/// Bits needed to hold `n`.
pub fn bit_length(n: u64) -> usize {
    (64 - n.leading_zeros()) as usize
}

/// Gates setting (or clearing) `a = N`.
pub fn load_modulus(modulus: u64, layout: &ModLayout) -> Vec<Gate> {
    (0..layout.bits())
        .filter(|i| modulus >> i & 1 == 1)
        .map(|i| Gate::X(layout.a[i]))
        .collect()
}

/// Controlled `|y⟩ → |2y mod N⟩` for `0 ≤ y < N`, with `a` holding `N` and
/// all other ancillas zero; every ancilla is restored.
pub fn build_times2_mod_n(modulus: u64, control: usize, layout: &ModLayout) -> Result<Vec<Gate>, ArithError> {
    if modulus < 3 || modulus.is_multiple_of(2) {
        return Err(ArithError::Modulus(modulus));
    }
    let n = layout.bits();
    if bit_length(modulus) > n {
        return Err(ArithError::TooWide {
            modulus,
            needed: bit_length(modulus),
            bits: n,
        });
    }
    check_disjoint(&[&layout.a, &layout.b, &layout.c, &[layout.flag, control]])?;
    let (a, b, c, t) = (&layout.a, &layout.b, &layout.c, layout.flag);
    let mut out = Vec::new();

    // controlled left rotation of b; the top bit is 0 so this doubles y
    for i in (0..n).rev() {
        let (x, y) = (b[i], b[i + 1]);
        out.extend([cnot(y, x), ccnot(control, x, y), cnot(y, x)]);
    }
    out.extend(build_subtractor(a, b, c)?);
    // the sign bit is set iff 2y < N
    out.push(cnot(b[n], t));
    // add N back in that case: zero the a-register otherwise
    out.push(Gate::X(t));
    let mask: Vec<usize> = (0..n).filter(|i| modulus >> i & 1 == 1).map(|i| a[i]).collect();
    out.extend(mask.iter().map(|&q| cnot(t, q)));
    out.extend(build_adder(a, b, c)?);
    out.extend(mask.iter().map(|&q| cnot(t, q)));
    out.push(Gate::X(t));
    // uncompute the flag: it equals 1 when the control is off, and
    // otherwise the parity of the result (2y is even, 2y − N is odd)
    out.push(ccnot(control, b[0], t));
    out.push(Gate::X(t));
    Ok(out)
}
