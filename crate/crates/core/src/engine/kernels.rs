//! Gate and reduction kernels over split real/imaginary buffers.
//!
//! Every kernel walks the `2^(n-f)` index patterns left free by the `f` fixed
//! (control/target) bits, so each amplitude is touched at most once per gate.
//! Work is split across the rayon pool once the buffer is large enough.

use num_complex::Complex64;
use rayon::prelude::*;

use super::gate::GateMatrix;

/// Below this many index patterns a kernel runs on the calling thread.
const PAR_MIN_PATTERNS: usize = 1 << 14;
const PAR_GRAIN: usize = 1 << 12;
/// Chunk length for the chunked reductions; a power of two.
const REDUCE_CHUNK: usize = 1 << 13;

/// Raw view of the two amplitude buffers shared by the workers of one kernel.
///
/// Invariant: concurrent users touch pairwise disjoint index sets.
#[derive(Clone, Copy)]
struct SplitPtr {
    re: *mut f64,
    im: *mut f64,
}

unsafe impl Send for SplitPtr {}
unsafe impl Sync for SplitPtr {}

impl SplitPtr {
    #[inline(always)]
    unsafe fn load(self, i: usize) -> (f64, f64) {
        (*self.re.add(i), *self.im.add(i))
    }

    #[inline(always)]
    unsafe fn store(self, i: usize, v: (f64, f64)) {
        *self.re.add(i) = v.0;
        *self.im.add(i) = v.1;
    }
}

/// Inserts a zero bit at each of `fixed` (sorted ascending) into `k`.
#[inline(always)]
fn deposit(mut k: usize, fixed: &[usize]) -> usize {
    for &pos in fixed {
        let low = k & ((1usize << pos) - 1);
        k = ((k >> pos) << (pos + 1)) | low;
    }
    k
}

fn patterns<F>(count: usize, f: F)
where
    F: Fn(usize) + Sync + Send,
{
    if count >= PAR_MIN_PATTERNS && rayon::current_num_threads() > 1 {
        (0..count).into_par_iter().with_min_len(PAR_GRAIN).for_each(f);
    } else {
        (0..count).for_each(f);
    }
}

fn sorted_fixed(extra: &[usize], controls: &[usize]) -> Vec<usize> {
    let mut fixed: Vec<usize> = extra.iter().chain(controls).copied().collect();
    fixed.sort_unstable();
    fixed
}

fn mask_of(qubits: &[usize]) -> usize {
    qubits.iter().fold(0, |m, &q| m | (1usize << q))
}

/// Applies `m` to `target` on the subspace where every control bit is 1.
///
/// Callers guarantee distinct in-range qubits and `re.len() == im.len() == 2^n`.
pub(crate) fn apply_unitary(
    re: &mut [f64],
    im: &mut [f64],
    target: usize,
    controls: &[usize],
    m: &GateMatrix,
) {
    debug_assert_eq!(re.len(), im.len());
    let n = re.len().trailing_zeros() as usize;
    let fixed = sorted_fixed(&[target], controls);
    let count = 1usize << (n - fixed.len());
    let cmask = mask_of(controls);
    let tbit = 1usize << target;
    let ptr = SplitPtr {
        re: re.as_mut_ptr(),
        im: im.as_mut_ptr(),
    };
    let fixed = fixed.as_slice();

    if m.is_pauli_x() {
        patterns(count, |k| {
            let lo = deposit(k, fixed) | cmask;
            let hi = lo | tbit;
            // SAFETY: lo/hi are unique to k.
            unsafe {
                let a = ptr.load(lo);
                let b = ptr.load(hi);
                ptr.store(lo, b);
                ptr.store(hi, a);
            }
        });
    } else if m.is_diagonal() {
        let d0 = m.get(0, 0);
        let d1 = m.get(1, 1);
        let touch0 = d0 != Complex64::new(1.0, 0.0);
        let touch1 = d1 != Complex64::new(1.0, 0.0);
        patterns(count, |k| {
            let lo = deposit(k, fixed) | cmask;
            let hi = lo | tbit;
            // SAFETY: lo/hi are unique to k.
            unsafe {
                if touch0 {
                    let (r, i) = ptr.load(lo);
                    ptr.store(lo, (d0.re * r - d0.im * i, d0.re * i + d0.im * r));
                }
                if touch1 {
                    let (r, i) = ptr.load(hi);
                    ptr.store(hi, (d1.re * r - d1.im * i, d1.re * i + d1.im * r));
                }
            }
        });
    } else {
        let [[m00, m01], [m10, m11]] = m.0;
        patterns(count, |k| {
            let lo = deposit(k, fixed) | cmask;
            let hi = lo | tbit;
            // SAFETY: lo/hi are unique to k.
            unsafe {
                let (ar, ai) = ptr.load(lo);
                let (br, bi) = ptr.load(hi);
                ptr.store(
                    lo,
                    (
                        m00.re * ar - m00.im * ai + m01.re * br - m01.im * bi,
                        m00.re * ai + m00.im * ar + m01.re * bi + m01.im * br,
                    ),
                );
                ptr.store(
                    hi,
                    (
                        m10.re * ar - m10.im * ai + m11.re * br - m11.im * bi,
                        m10.re * ai + m10.im * ar + m11.re * bi + m11.im * br,
                    ),
                );
            }
        });
    }
}

/// Exchanges the amplitudes whose bits `(a, b)` read `(1, 0)` and `(0, 1)`,
/// restricted to the subspace where every control bit is 1.
pub(crate) fn apply_swap(re: &mut [f64], im: &mut [f64], a: usize, b: usize, controls: &[usize]) {
    let n = re.len().trailing_zeros() as usize;
    let fixed = sorted_fixed(&[a, b], controls);
    let count = 1usize << (n - fixed.len());
    let cmask = mask_of(controls);
    let (abit, bbit) = (1usize << a, 1usize << b);
    let ptr = SplitPtr {
        re: re.as_mut_ptr(),
        im: im.as_mut_ptr(),
    };
    let fixed = fixed.as_slice();
    patterns(count, |k| {
        let base = deposit(k, fixed) | cmask;
        let (i, j) = (base | abit, base | bbit);
        // SAFETY: i/j are unique to k.
        unsafe {
            let x = ptr.load(i);
            let y = ptr.load(j);
            ptr.store(i, y);
            ptr.store(j, x);
        }
    });
}

/// Multiplies every amplitude by `k`.
pub(crate) fn scale_all(re: &mut [f64], im: &mut [f64], k: Complex64) {
    re.par_iter_mut().zip(im.par_iter_mut()).for_each(|(r, i)| {
        let (a, b) = (*r, *i);
        *r = k.re * a - k.im * b;
        *i = k.re * b + k.im * a;
    });
}

/// Calls `f(bit, re_chunk, im_chunk)` over chunks that each lie in a single
/// half with respect to qubit `q`.
fn chunked_by_bit<T, F>(re: &[f64], im: &[f64], q: usize, f: F) -> T
where
    T: Send + std::iter::Sum<T>,
    F: Fn(bool, &[f64], &[f64]) -> T + Sync + Send,
{
    let stride = 1usize << q;
    if 2 * stride <= REDUCE_CHUNK {
        re.par_chunks(2 * stride)
            .zip(im.par_chunks(2 * stride))
            .map(|(r, i)| {
                let (r0, r1) = r.split_at(stride);
                let (i0, i1) = i.split_at(stride);
                [f(false, r0, i0), f(true, r1, i1)].into_iter().sum::<T>()
            })
            .sum()
    } else {
        re.par_chunks(REDUCE_CHUNK)
            .zip(im.par_chunks(REDUCE_CHUNK))
            .enumerate()
            .map(|(c, (r, i))| f((c * REDUCE_CHUNK) & stride != 0, r, i))
            .sum()
    }
}

fn chunked_by_bit_mut<F>(re: &mut [f64], im: &mut [f64], q: usize, f: F)
where
    F: Fn(bool, &mut [f64], &mut [f64]) + Sync + Send,
{
    let stride = 1usize << q;
    if 2 * stride <= REDUCE_CHUNK {
        re.par_chunks_mut(2 * stride)
            .zip(im.par_chunks_mut(2 * stride))
            .for_each(|(r, i)| {
                let (r0, r1) = r.split_at_mut(stride);
                let (i0, i1) = i.split_at_mut(stride);
                f(false, r0, i0);
                f(true, r1, i1);
            });
    } else {
        re.par_chunks_mut(REDUCE_CHUNK)
            .zip(im.par_chunks_mut(REDUCE_CHUNK))
            .enumerate()
            .for_each(|(c, (r, i))| f((c * REDUCE_CHUNK) & stride != 0, r, i));
    }
}

fn sum_sq(re: &[f64], im: &[f64]) -> f64 {
    re.iter().zip(im).map(|(r, i)| r * r + i * i).sum()
}

/// `(p0, p1)`: squared norm of the bit-0 and bit-1 halves for qubit `q`.
pub(crate) fn split_probabilities(re: &[f64], im: &[f64], q: usize) -> (f64, f64) {
    #[derive(Default)]
    struct Pair(f64, f64);
    impl std::iter::Sum for Pair {
        fn sum<I: Iterator<Item = Pair>>(iter: I) -> Pair {
            iter.fold(Pair(0.0, 0.0), |a, b| Pair(a.0 + b.0, a.1 + b.1))
        }
    }
    let Pair(p0, p1) = chunked_by_bit(re, im, q, |bit, r, i| {
        let s = sum_sq(r, i);
        if bit {
            Pair(0.0, s)
        } else {
            Pair(s, 0.0)
        }
    });
    (p0, p1)
}

/// Zeroes the half not matching `outcome` and multiplies the kept half by `factor`.
pub(crate) fn collapse(re: &mut [f64], im: &mut [f64], q: usize, outcome: bool, factor: f64) {
    chunked_by_bit_mut(re, im, q, |bit, r, i| {
        if bit == outcome {
            r.iter_mut().for_each(|v| *v *= factor);
            i.iter_mut().for_each(|v| *v *= factor);
        } else {
            r.fill(0.0);
            i.fill(0.0);
        }
    });
}

/// `Σ 2·Re(conj(a_lo)·a_hi)` over the pairs split by qubit `q`.
pub(crate) fn x_correlation(re: &[f64], im: &[f64], q: usize) -> f64 {
    let stride = 1usize << q;
    let body = |r: &[f64], i: &[f64]| -> f64 {
        let (r0, r1) = r.split_at(stride);
        let (i0, i1) = i.split_at(stride);
        (0..stride)
            .map(|k| 2.0 * (r0[k] * r1[k] + i0[k] * i1[k]))
            .sum::<f64>()
    };
    re.par_chunks(2 * stride)
        .zip(im.par_chunks(2 * stride))
        .map(|(r, i)| body(r, i))
        .sum()
}

pub(crate) fn norm_sqr(re: &[f64], im: &[f64]) -> f64 {
    re.par_chunks(REDUCE_CHUNK)
        .zip(im.par_chunks(REDUCE_CHUNK))
        .map(|(r, i)| sum_sq(r, i))
        .sum()
}

/// `Σ conj(a_k)·b_k`
pub(crate) fn inner(a_re: &[f64], a_im: &[f64], b_re: &[f64], b_im: &[f64]) -> Complex64 {
    a_re.par_chunks(REDUCE_CHUNK)
        .zip(a_im.par_chunks(REDUCE_CHUNK))
        .zip(b_re.par_chunks(REDUCE_CHUNK).zip(b_im.par_chunks(REDUCE_CHUNK)))
        .map(|((ar, ai), (br, bi))| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..ar.len() {
                acc.re += ar[k] * br[k] + ai[k] * bi[k];
                acc.im += ar[k] * bi[k] - ai[k] * br[k];
            }
            acc
        })
        .sum()
}
