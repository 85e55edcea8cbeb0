//! Sector/pagetable storage for large registers.
//!
//! The physical address space of `2^L` amplitudes is cut into `2^(L−s)`
//! sectors of `2^s` amplitudes: physical bits `[0, s)` are the offset inside a
//! sector ("local"), bits `[s, L)` are the sector id ("global"). A
//! [`QubitPermutation`] maps logical qubits onto physical bit positions.
//!
//! Gates are not applied eagerly. Each sector owns a queue of [`KernelOp`]s in
//! local coordinates; a gate whose target is local is specialized per sector
//! (global controls are resolved against the sector id) and pushed. A global
//! target is first relabeled onto a local position. `swap` gates only touch
//! the permutation. Measurement and `gather` are synchronization events: every
//! queue is optimized and run.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::engine::{kernels, Capacity, EngineError, KernelOp, StateVector, IMPOSSIBLE_BRANCH};
use crate::isa::Gate;
use crate::optimize::{lower, optimize_ops};

/// Default sector size: `min(L, 20)` local bits.
pub fn default_sector_bits(num_qubits: usize) -> usize {
    num_qubits.min(20)
}

/// Bijection between logical qubits and physical bit positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitPermutation {
    to_physical: Vec<usize>,
    to_logical: Vec<usize>,
}

impl QubitPermutation {
    pub fn identity(n: usize) -> Self {
        QubitPermutation {
            to_physical: (0..n).collect(),
            to_logical: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.to_physical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_physical.is_empty()
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.to_physical[logical]
    }

    pub fn logical(&self, physical: usize) -> usize {
        self.to_logical[physical]
    }

    /// Exchanges the physical slots of two logical qubits.
    pub fn swap_logical(&mut self, a: usize, b: usize) {
        let (pa, pb) = (self.to_physical[a], self.to_physical[b]);
        self.to_physical.swap(a, b);
        self.to_logical[pa] = b;
        self.to_logical[pb] = a;
    }

    pub fn inverse(&self) -> Self {
        QubitPermutation {
            to_physical: self.to_logical.clone(),
            to_logical: self.to_physical.clone(),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &QubitPermutation) -> Self {
        let to_physical: Vec<usize> = (0..self.len()).map(|l| self.physical(other.physical(l))).collect();
        let mut to_logical = vec![0; self.len()];
        for (l, &p) in to_physical.iter().enumerate() {
            to_logical[p] = l;
        }
        QubitPermutation {
            to_physical,
            to_logical,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.to_physical.iter().enumerate().all(|(l, &p)| l == p)
    }

    /// Maps a logical basis index to its physical address.
    pub fn physical_index(&self, logical_index: usize) -> usize {
        let mut out = 0;
        for (l, &p) in self.to_physical.iter().enumerate() {
            out |= ((logical_index >> l) & 1) << p;
        }
        out
    }
}

/// One `2^s`-amplitude region of the address space and its pending ops.
#[derive(Clone, Debug)]
pub struct Sector {
    pub id: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    queue: Vec<KernelOp>,
}

impl Sector {
    pub fn queue(&self) -> &[KernelOp] {
        &self.queue
    }

    pub fn reals(&self) -> &[f64] {
        &self.re
    }

    pub fn imags(&self) -> &[f64] {
        &self.im
    }

    fn flush(&mut self) {
        if self.queue.is_empty() {
            return;
        }
        let ops = optimize_ops(std::mem::take(&mut self.queue));
        for op in &ops {
            match op {
                KernelOp::Unitary {
                    controls,
                    target,
                    matrix,
                } => kernels::apply_unitary(&mut self.re, &mut self.im, *target, controls, matrix),
                KernelOp::Swap { a, b } => kernels::apply_swap(&mut self.re, &mut self.im, *a, *b, &[]),
            }
        }
    }

    fn norm_sqr(&self) -> f64 {
        kernels::norm_sqr(&self.re, &self.im)
    }

    fn scale(&mut self, factor: f64) {
        self.re.iter_mut().for_each(|v| *v *= factor);
        self.im.iter_mut().for_each(|v| *v *= factor);
    }

    fn zero(&mut self) {
        self.re.fill(0.0);
        self.im.fill(0.0);
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PagetableError {
    #[error("sector bits must be in 1..={num_qubits}, got {sector_bits}")]
    SectorBits {
        num_qubits: usize,
        sector_bits: usize,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A register stored as `2^(L−s)` sectors behind a qubit permutation.
#[derive(Clone, Debug)]
pub struct PagedState {
    num_qubits: usize,
    sector_bits: usize,
    sectors: Vec<Sector>,
    perm: QubitPermutation,
    sync_events: usize,
}

impl PagedState {
    pub fn new(num_qubits: usize, sector_bits: usize) -> Result<Self, PagetableError> {
        Self::with_capacity(num_qubits, sector_bits, &Capacity::default())
    }

    pub fn with_capacity(
        num_qubits: usize,
        sector_bits: usize,
        capacity: &Capacity,
    ) -> Result<Self, PagetableError> {
        capacity.check(num_qubits)?;
        if sector_bits == 0 || sector_bits > num_qubits {
            return Err(PagetableError::SectorBits {
                num_qubits,
                sector_bits,
            });
        }
        let len = 1usize << sector_bits;
        let sectors = (0..1usize << (num_qubits - sector_bits))
            .map(|id| {
                let mut re = crate::engine::alloc_zeroed(len, num_qubits)?;
                let im = crate::engine::alloc_zeroed(len, num_qubits)?;
                if id == 0 {
                    re[0] = 1.0;
                }
                Ok(Sector {
                    id,
                    re,
                    im,
                    queue: Vec::new(),
                })
            })
            .collect::<Result<Vec<_>, EngineError>>()?;
        Ok(PagedState {
            num_qubits,
            sector_bits,
            sectors,
            perm: QubitPermutation::identity(num_qubits),
            sync_events: 0,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn sector_bits(&self) -> usize {
        self.sector_bits
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn permutation(&self) -> &QubitPermutation {
        &self.perm
    }

    /// Number of synchronization events that found work queued.
    pub fn sync_events(&self) -> usize {
        self.sync_events
    }

    pub fn pending(&self) -> usize {
        self.sectors.iter().map(|s| s.queue.len()).sum()
    }

    fn is_local(&self, physical: usize) -> bool {
        physical < self.sector_bits
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

    /// Queues a gate, relabeling first if its target is global.
    pub fn enqueue(&mut self, gate: &Gate) -> Result<(), EngineError> {
        let qubits = gate.qubits();
        for (i, &q) in qubits.iter().enumerate() {
            self.check_qubit(q)?;
            if qubits[..i].contains(&q) {
                return Err(EngineError::DuplicateQubit(q));
            }
        }
        let (controls, target, matrix) = match lower(gate) {
            KernelOp::Swap { a, b } => {
                // a swap gate is exactly a relabel with no data movement
                self.perm.swap_logical(a, b);
                return Ok(());
            }
            KernelOp::Unitary {
                controls,
                target,
                matrix,
            } => (controls, target, matrix),
        };

        if !self.is_local(self.perm.physical(target)) {
            let busy: Vec<usize> = controls.iter().map(|&c| self.perm.physical(c)).collect();
            // prefer a slot no control sits on; otherwise the displaced
            // control simply becomes global and is resolved per sector
            let slot = (0..self.sector_bits)
                .rev()
                .find(|p| !busy.contains(p))
                .unwrap_or(self.sector_bits - 1);
            self.relabel(target, self.perm.logical(slot));
        }

        let s = self.sector_bits;
        let local_target = self.perm.physical(target);
        let mut local_controls = Vec::new();
        let mut global_mask = 0usize;
        for &c in &controls {
            let p = self.perm.physical(c);
            if p < s {
                local_controls.push(p);
            } else {
                global_mask |= 1 << (p - s);
            }
        }
        for sector in &mut self.sectors {
            if sector.id & global_mask == global_mask {
                sector.queue.push(KernelOp::Unitary {
                    controls: local_controls.clone(),
                    target: local_target,
                    matrix,
                });
            }
        }
        Ok(())
    }

    /// Exchanges the physical slots of logical qubits `a` and `b`, moving
    /// amplitudes so the logical state is unchanged.
    pub fn relabel(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (pa, pb) = (self.perm.physical(a), self.perm.physical(b));
        let s = self.sector_bits;
        match (self.is_local(pa), self.is_local(pb)) {
            (false, false) => {
                // renumber sectors: pure metadata
                let (ga, gb) = (pa - s, pb - s);
                let mut sectors = std::mem::take(&mut self.sectors);
                for sector in &mut sectors {
                    let id = sector.id;
                    let (ba, bb) = ((id >> ga) & 1, (id >> gb) & 1);
                    sector.id = (id & !(1 << ga) & !(1 << gb)) | (bb << ga) | (ba << gb);
                }
                sectors.sort_by_key(|sec| sec.id);
                self.sectors = sectors;
            }
            (true, true) => {
                for sector in &mut self.sectors {
                    sector.queue.push(KernelOp::Swap { a: pa, b: pb });
                }
            }
            _ => {
                let (local, global) = if pa < s { (pa, pb - s) } else { (pb, pa - s) };
                self.synchronize();
                self.exchange_blocks(local, global);
            }
        }
        self.perm.swap_logical(a, b);
    }

    /// Swaps the bit-1 half (w.r.t. `local`) of each sector whose `global`
    /// bit is 0 with the bit-0 half of its partner.
    fn exchange_blocks(&mut self, local: usize, global: usize) {
        let stride = 1usize << local;
        let gbit = 1usize << global;
        let mut lows: Vec<&mut Sector> = Vec::new();
        let mut highs: Vec<&mut Sector> = Vec::new();
        for sector in self.sectors.iter_mut() {
            if sector.id & gbit == 0 {
                lows.push(sector);
            } else {
                highs.push(sector);
            }
        }
        // both lists are in id order, so position k pairs id with id | gbit
        lows.into_par_iter().zip(highs).for_each(|(lo, hi)| {
            for (parts_lo, parts_hi) in [(&mut lo.re, &mut hi.re), (&mut lo.im, &mut hi.im)] {
                for (cl, ch) in parts_lo.chunks_mut(2 * stride).zip(parts_hi.chunks_mut(2 * stride)) {
                    cl[stride..].swap_with_slice(&mut ch[..stride]);
                }
            }
        });
    }

    /// Optimizes and runs every queue. Sectors run independently.
    pub fn synchronize(&mut self) {
        if self.pending() == 0 {
            return;
        }
        self.sectors.par_iter_mut().for_each(Sector::flush);
        self.sync_events += 1;
    }

    pub fn probabilities(&mut self, q: usize) -> Result<(f64, f64), EngineError> {
        self.check_qubit(q)?;
        self.synchronize();
        let p = self.perm.physical(q);
        let (p0, p1) = if self.is_local(p) {
            self.sectors
                .par_iter()
                .map(|sec| kernels::split_probabilities(&sec.re, &sec.im, p))
                .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
        } else {
            let gbit = 1usize << (p - self.sector_bits);
            self.sectors
                .par_iter()
                .map(|sec| {
                    let n = sec.norm_sqr();
                    if sec.id & gbit == 0 {
                        (n, 0.0)
                    } else {
                        (0.0, n)
                    }
                })
                .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
        };
        Ok((p0.clamp(0.0, 1.0), p1.clamp(0.0, 1.0)))
    }

    pub fn collapse(&mut self, q: usize, outcome: bool) -> Result<(), EngineError> {
        let (p0, p1) = self.probabilities(q)?;
        let prob = if outcome { p1 } else { p0 };
        if prob < IMPOSSIBLE_BRANCH {
            return Err(EngineError::ImpossibleBranch {
                qubit: q,
                outcome: outcome as u8,
                probability: prob,
            });
        }
        let factor = 1.0 / prob.sqrt();
        let p = self.perm.physical(q);
        if self.is_local(p) {
            self.sectors
                .par_iter_mut()
                .for_each(|sec| kernels::collapse(&mut sec.re, &mut sec.im, p, outcome, factor));
        } else {
            let gbit = 1usize << (p - self.sector_bits);
            self.sectors.par_iter_mut().for_each(|sec| {
                if (sec.id & gbit != 0) == outcome {
                    sec.scale(factor);
                } else {
                    sec.zero();
                }
            });
        }
        Ok(())
    }

    pub fn expectation_z(&mut self, q: usize) -> Result<f64, EngineError> {
        let (p0, p1) = self.probabilities(q)?;
        Ok(p0 - p1)
    }

    pub fn expectation_x(&mut self, q: usize) -> Result<f64, EngineError> {
        self.check_qubit(q)?;
        self.synchronize();
        let p = self.perm.physical(q);
        if self.is_local(p) {
            return Ok(self
                .sectors
                .par_iter()
                .map(|sec| kernels::x_correlation(&sec.re, &sec.im, p))
                .sum());
        }
        let gbit = 1usize << (p - self.sector_bits);
        let mut total = 0.0;
        for lo in self.sectors.iter().filter(|sec| sec.id & gbit == 0) {
            let hi = &self.sectors[lo.id | gbit];
            let c: Complex64 = kernels::inner(&lo.re, &lo.im, &hi.re, &hi.im);
            total += 2.0 * c.re;
        }
        Ok(total)
    }

    /// Flushes the queues and returns the canonical (logical-order) state.
    pub fn gather(&mut self) -> Result<StateVector, EngineError> {
        self.synchronize();
        let len = 1usize << self.num_qubits;
        let mut re = crate::engine::alloc_zeroed(len, self.num_qubits)?;
        let mut im = crate::engine::alloc_zeroed(len, self.num_qubits)?;
        let s = self.sector_bits;
        let mask = (1usize << s) - 1;
        let inv = self.perm.inverse();
        for sec in &self.sectors {
            for off in 0..1usize << s {
                let phys = (sec.id << s) | off;
                let logical = inv.physical_index(phys);
                re[logical] = sec.re[off & mask];
                im[logical] = sec.im[off & mask];
            }
        }
        StateVector::from_parts(self.num_qubits, re, im)
    }
}
