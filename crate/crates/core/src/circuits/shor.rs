//! Order finding for `x = 2` with iterative phase estimation on one
//! recycled control qubit.
//!
//! Qubit layout for an `n`-bit modulus (`3n + 3` qubits in total):
//! control `0`, `a = 1..=n` holding `N`, `b = n+1..=2n+1` holding the work
//! value, `n` carry ancillas, then one comparison flag. Register `i` holds bit
//! `i` of the phase estimate, so the histogram key reads it most significant
//! bit first.

use std::fmt::Write as _;

use super::arith::{bit_length, build_times2_mod_n, load_modulus, ArithError, ModLayout};
use crate::asm::{compile, instruction_text, AsmError};
use crate::isa::{Gate, Instruction, Program};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShorSpec {
    pub modulus_n: u64,
    pub base_x: u64,
    pub phase_bits: usize,
}

impl ShorSpec {
    pub fn new(modulus_n: u64, phase_bits: usize) -> Self {
        ShorSpec {
            modulus_n,
            base_x: 2,
            phase_bits,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ShorError {
    #[error("modulus must be odd and at least 3, got {0}")]
    Modulus(u64),
    #[error("{n} = {p}^{k} is a prime power")]
    PrimePower { n: u64, p: u64, k: u32 },
    #[error("only base 2 is supported, got {0}")]
    Base(u64),
    #[error("gcd({x}, {n}) = {g} already splits the modulus")]
    SharedFactor { x: u64, n: u64, g: u64 },
    #[error("need at least one phase bit")]
    PhaseBits,
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Asm(#[from] AsmError),
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut b = base as u128 % m;
    let mut r = 1u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    r as u64
}

fn integer_root(n: u64, k: u32) -> u64 {
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    while r > 0 && r.checked_pow(k).is_none_or(|v| v > n) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).is_some_and(|v| v <= n) {
        r += 1;
    }
    r
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// `Some((p, k))` when `n = p^k` with `p` prime.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    (1..64).rev().find_map(|k| {
        let p = integer_root(n, k);
        (p >= 2 && p.checked_pow(k) == Some(n) && is_prime(p)).then_some((p, k))
    })
}

impl ShorSpec {
    pub fn validate(&self) -> Result<(), ShorError> {
        let n = self.modulus_n;
        if n < 3 || n.is_multiple_of(2) {
            return Err(ShorError::Modulus(n));
        }
        if let Some((p, k)) = prime_power(n) {
            return Err(ShorError::PrimePower { n, p, k });
        }
        if self.base_x != 2 {
            return Err(ShorError::Base(self.base_x));
        }
        let g = gcd(self.base_x, n);
        if g != 1 {
            return Err(ShorError::SharedFactor { x: self.base_x, n, g });
        }
        if self.phase_bits == 0 {
            return Err(ShorError::PhaseBits);
        }
        Ok(())
    }

    pub fn register_bits(&self) -> usize {
        bit_length(self.modulus_n)
    }

    pub fn num_qubits(&self) -> usize {
        3 * self.register_bits() + 3
    }

    pub fn layout(&self) -> ModLayout {
        ModLayout::contiguous(1, self.register_bits())
    }
}

fn gate_lines(out: &mut String, gates: &[Gate]) {
    for g in gates {
        out.push_str(&instruction_text(&Instruction::Gate(g.clone())));
        out.push('\n');
    }
}

/// QtASM source for the order-finding circuit.
pub fn shor_source(spec: &ShorSpec) -> Result<String, ShorError> {
    spec.validate()?;
    let t = spec.phase_bits;
    let layout = spec.layout();
    let mul = build_times2_mod_n(spec.modulus_n, 0, &layout)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# order of {} mod {}, {} phase bits",
        spec.base_x, spec.modulus_n, t
    );
    let _ = writeln!(s, "qubits {}", spec.num_qubits());
    s.push_str("# a = N, work register = 1\n");
    gate_lines(&mut s, &load_modulus(spec.modulus_n, &layout));
    let _ = writeln!(s, "x({})", layout.b[0]);
    for i in 0..t {
        let _ = writeln!(s, "# phase bit {i}");
        s.push_str("h(0)\n");
        let _ = writeln!(s, "%for rep = 1 to {}", 1u64 << (t - 1 - i));
        gate_lines(&mut s, &mul);
        s.push_str("%endfor\n");
        for j in 1..=i {
            let _ = writeln!(s, "cif({}, 'rz(0, $(-pi / {}))')", i - j, 1u64 << j);
        }
        let _ = writeln!(s, "h(0)\nmeas(0, {i})\ncif({i}, 'x(0)')");
    }
    Ok(s)
}

pub fn build_shor_order_finding(spec: &ShorSpec) -> Result<Program, ShorError> {
    Ok(compile(&shor_source(spec)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ShorSpec::new(15, 4).validate().is_ok());
        assert!(ShorSpec::new(35, 8).validate().is_ok());
        assert!(matches!(ShorSpec::new(14, 4).validate(), Err(ShorError::Modulus(14))));
        assert!(matches!(
            ShorSpec::new(27, 4).validate(),
            Err(ShorError::PrimePower { p: 3, k: 3, .. })
        ));
        assert!(ShorSpec::new(7, 4).validate().is_err());
        assert!(ShorSpec::new(15, 0).validate().is_err());
        let mut s = ShorSpec::new(15, 4);
        s.base_x = 7;
        assert!(matches!(s.validate(), Err(ShorError::Base(7))));
    }

    #[test]
    fn helpers() {
        assert_eq!(gcd(28, 35), 7);
        assert_eq!(mod_pow(2, 12, 35), 1);
        assert_eq!(mod_pow(2, 6, 35), 29);
        assert_eq!(prime_power(49), Some((7, 2)));
        assert_eq!(prime_power(15), None);
        assert_eq!(prime_power(1 << 40), Some((2, 40)));
    }

    #[test]
    fn sizes() {
        let p = build_shor_order_finding(&ShorSpec::new(15, 4)).unwrap();
        assert_eq!(p.num_qubits, 15);
        assert_eq!(p.written_registers().len(), 4);
        let spec = ShorSpec::new(35, 8);
        assert_eq!(spec.num_qubits(), 21);
    }
}
