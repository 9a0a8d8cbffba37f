//! Exact sampling from the source conditioned on a quantizer cell.
//!
//! The source is the image of `(z1, z2)` uniform on the unit square, so
//! `p(x | cell)` is the image of `(z1, z2)` uniform on the cell's preimage.
//! Both proposals below are rejection samplers for that target:
//!
//! * [`Proposal::Prior`] draws fresh source samples until one lands in the
//!   cell.
//! * [`Proposal::Tiled`] first finds, by interval bounds on a quadtree over
//!   the unit square, the equal-sized tiles that can reach the cell, then
//!   draws uniformly from their union until a sample lands in the cell.
//!   The union covers the preimage, so accepted samples have exactly the
//!   same law as with `Prior`; only the acceptance rate differs.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::source::{CubicCell, SineSource};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ATTEMPTS: u64 = 100_000_000;
/// Default quadtree depth; tiles have side `2^-depth`.
pub const DEFAULT_TILE_DEPTH: u32 = 7;
const BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Proposal {
    Prior,
    Tiled,
}

/// Range of `cos` over the phase interval `[lo, hi]`.
fn cos_range(lo: f64, hi: f64) -> (f64, f64) {
    let two_pi = 2.0 * PI;
    if hi - lo >= two_pi {
        return (-1.0, 1.0);
    }
    let (a, b) = (lo.cos(), hi.cos());
    let mut min = a.min(b);
    let mut max = a.max(b);
    if (lo / two_pi).ceil() <= hi / two_pi {
        max = 1.0;
    }
    if ((lo - PI) / two_pi).ceil() <= (hi - PI) / two_pi {
        min = -1.0;
    }
    (min, max)
}

/// Tiles of the unit square (at a fixed depth) whose image can meet a cell.
#[derive(Clone, Debug)]
pub struct CellRegion {
    tiles: Vec<(u32, u32)>,
    side: f64,
}

impl CellRegion {
    pub fn find(source: &SineSource, cell: &CubicCell, depth: u32) -> Self {
        let delta = cell.delta();
        let bounds: Vec<(f64, f64)> = cell
            .indices()
            .iter()
            .map(|&q| cell.grid().bounds(q, delta))
            .collect();
        let reaches = |x0: f64, y0: f64, s: f64| {
            (0..source.dim()).all(|i| {
                let k = (i + 1) as f64;
                let lo = PI * (k * x0 + 2.0 * y0);
                let hi = PI * (k * (x0 + s) + 2.0 * (y0 + s));
                let (cmin, cmax) = cos_range(lo, hi);
                let (blo, bhi) = bounds[i];
                cmax >= blo - BOUND_SLACK && cmin <= bhi + BOUND_SLACK
            })
        };
        let mut level = vec![(0u32, 0u32)];
        for level_depth in 1..=depth {
            let s = (-(level_depth as f64)).exp2();
            let mut next = Vec::with_capacity(level.len() * 4);
            for &(i, j) in &level {
                for (di, dj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let (ci, cj) = (2 * i + di, 2 * j + dj);
                    if reaches(ci as f64 * s, cj as f64 * s, s) {
                        next.push((ci, cj));
                    }
                }
            }
            level = next;
        }
        CellRegion {
            tiles: level,
            side: (-(depth as f64)).exp2(),
        }
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Fraction of the unit square covered.
    pub fn area(&self) -> f64 {
        self.tiles.len() as f64 * self.side * self.side
    }
}

#[derive(Clone, Debug)]
pub struct ConditionalSampler {
    source: SineSource,
    proposal: Proposal,
    max_attempts: u64,
    tile_depth: u32,
}

impl ConditionalSampler {
    pub fn new(source: SineSource, proposal: Proposal) -> Self {
        ConditionalSampler {
            source,
            proposal,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            tile_depth: DEFAULT_TILE_DEPTH,
        }
    }

    /// Deeper trees give tighter regions (fewer rejections) at a higher
    /// one-off cost per cell. Capped at 16.
    pub fn with_tile_depth(mut self, depth: u32) -> Self {
        self.tile_depth = depth.min(16);
        self
    }

    pub fn with_max_attempts(mut self, max_attempts: u64) -> Self {
        self.max_attempts = max_attempts;
        self
    }

    pub fn source(&self) -> &SineSource {
        &self.source
    }

    /// Per-cell state reused across draws from the same cell.
    pub fn prepare(&self, cell: &CubicCell) -> Option<CellRegion> {
        match self.proposal {
            Proposal::Prior => None,
            Proposal::Tiled => Some(CellRegion::find(&self.source, cell, self.tile_depth)),
        }
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        cell: &CubicCell,
        region: Option<&CellRegion>,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.source.dim()];
        if let Some(region) = region {
            if region.is_empty() {
                return Err(Error::invalid("cell does not meet the source manifold"));
            }
        }
        for _ in 0..self.max_attempts {
            let (z1, z2) = match region {
                None => (rng.gen::<f64>(), rng.gen::<f64>()),
                Some(r) => {
                    let (i, j) = r.tiles[rng.gen_range(0..r.tiles.len())];
                    (
                        (i as f64 + rng.gen::<f64>()) * r.side,
                        (j as f64 + rng.gen::<f64>()) * r.side,
                    )
                }
            };
            self.source.fill(z1, z2, &mut x);
            if cell.contains(&x) {
                return Ok(x);
            }
        }
        Err(Error::SamplingTimeout {
            attempts: self.max_attempts,
        })
    }

    pub fn sample_many<R: Rng + ?Sized>(
        &self,
        cell: &CubicCell,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<Vec<f64>>> {
        let region = self.prepare(cell);
        (0..count)
            .map(|_| self.sample(cell, region.as_ref(), rng))
            .collect()
    }
}

/// One draw from `p(x | cell)` by plain rejection from the source.
pub fn conditional_sample(cell: &CubicCell, source: &SineSource, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ConditionalSampler::new(*source, Proposal::Prior).sample(cell, None, &mut rng)
}
