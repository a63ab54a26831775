//! Brownian increments on dyadic uniform grids.
//!
//! A lattice at level `L` holds the `2^L` increments of one Brownian
//! path over `[0, T]`. Because resolutions are dyadic, the same path can
//! be viewed at any coarser level by summing adjacent pairs, which is
//! exactly what strong-error comparisons between scheme resolutions
//! need: every resolution is driven by one common trajectory and the
//! coupling is exact, no bridge interpolation involved.

use thiserror::Error;

use crate::rng::{self, DOMAIN_BROWNIAN};

/// Hard cap on the lattice resolution: 2^26 increments is a 512 MiB buffer.
pub const MAX_LEVEL: u32 = 26;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice level {0} exceeds the cap of {MAX_LEVEL}")]
    LevelOverCap(u32),
    #[error("lattice horizon must be positive and finite")]
    BadHorizon,
    #[error("level-0 lattice cannot be coarsened")]
    AlreadyCoarsest,
}

/// One Brownian path sampled as increments on the dyadic grid `kT/2^L`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianLattice {
    seed: u64,
    path_index: u64,
    level: u32,
    horizon: f64,
    increments: Vec<f64>,
}

impl BrownianLattice {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of increments, `2^level`.
    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Terminal value `W_T` (sum of all increments, left to right).
    pub fn total(&self) -> f64 {
        self.increments.iter().sum()
    }

    /// Pairwise-summed view of the same trajectory one level coarser.
    ///
    /// Entry `j` of the result is exactly `increments[2j] + increments[2j+1]`
    /// in floating-point addition; seed and path index are preserved so the
    /// coarse lattice remains attributable to its generating keys.
    pub fn coarsen(&self) -> Result<BrownianLattice, LatticeError> {
        if self.level == 0 {
            return Err(LatticeError::AlreadyCoarsest);
        }
        let coarse: Vec<f64> = self
            .increments
            .chunks_exact(2)
            .map(|pair| pair[0] + pair[1])
            .collect();
        Ok(BrownianLattice {
            seed: self.seed,
            path_index: self.path_index,
            level: self.level - 1,
            horizon: self.horizon,
            increments: coarse,
        })
    }
}

/// Generate the level-`level` lattice for `(seed, path_index)`.
///
/// Increment `k` is a deterministic function of `(seed, path_index, k)`
/// through the counter-based generator, so any lattice regenerates
/// identically regardless of worker scheduling, and distinct path
/// indices are independent streams.
pub fn generate_lattice(
    seed: u64,
    path_index: u64,
    level: u32,
    horizon: f64,
) -> Result<BrownianLattice, LatticeError> {
    check_level_horizon(level, horizon)?;
    let n = 1usize << level;
    let mut increments = Vec::with_capacity(n);
    let mut stream = IncrementStream::new(seed, path_index, level, horizon);
    for _ in 0..n {
        increments.push(stream.next_increment());
    }
    Ok(BrownianLattice {
        seed,
        path_index,
        level,
        horizon,
        increments,
    })
}

pub(crate) fn check_level_horizon(level: u32, horizon: f64) -> Result<(), LatticeError> {
    if level > MAX_LEVEL {
        return Err(LatticeError::LevelOverCap(level));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(LatticeError::BadHorizon);
    }
    Ok(())
}

/// Streaming generator of the increments of one lattice, in step order.
///
/// Produces the exact same values `generate_lattice` stores, without
/// materialising them; used for resolutions too fine to hold densely.
pub(crate) struct IncrementStream {
    seed: u64,
    path_index: u64,
    scale: f64,
    block: u64,
    buf: [u64; 4],
    pos: usize,
}

impl IncrementStream {
    pub(crate) fn new(seed: u64, path_index: u64, level: u32, horizon: f64) -> Self {
        let n = (1u64 << level) as f64;
        IncrementStream {
            seed,
            path_index,
            scale: (horizon / n).sqrt(),
            block: 0,
            buf: [0; 4],
            pos: 4,
        }
    }

    #[inline(always)]
    pub(crate) fn next_increment(&mut self) -> f64 {
        if self.pos == 4 {
            self.buf = rng::block(self.seed, DOMAIN_BROWNIAN, self.path_index, self.block);
            self.block += 1;
            self.pos = 0;
        }
        let w = self.buf[self.pos];
        self.pos += 1;
        rng::normal_quantile(rng::u64_to_open01(w)) * self.scale
    }
}
