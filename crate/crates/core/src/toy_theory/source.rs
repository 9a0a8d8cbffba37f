use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};

/// Random unit-amplitude sines `x[k] = cos(pi (z1 k + 2 z2))`, `k = 1..=dim`,
/// with `z1, z2` independent and uniform on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SineSource {
    dim: usize,
}

impl Default for SineSource {
    fn default() -> Self {
        SineSource { dim: 10 }
    }
}

impl SineSource {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        Ok(SineSource { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fill(&self, z1: f64, z2: f64, out: &mut [f64]) {
        for (i, x) in out.iter_mut().enumerate() {
            let k = (i + 1) as f64;
            *x = (PI * (z1 * k + 2.0 * z2)).cos();
        }
    }

    pub fn at(&self, z1: f64, z2: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.fill(z1, z2, &mut out);
        out
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z1 = rng.gen::<f64>();
        let z2 = rng.gen::<f64>();
        self.at(z1, z2)
    }
}

/// How a scalar quantizer with step `delta` tiles the real line.
///
/// `MidTread` puts a reconstruction level at zero (`delta * round(x / delta)`),
/// `MidRise` puts a cell boundary there (cells `[q delta, (q + 1) delta)`
/// reconstructed at their centres).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellGrid {
    MidTread,
    MidRise,
}

impl CellGrid {
    pub fn index(self, x: f64, delta: f64) -> i32 {
        match self {
            CellGrid::MidTread => (x / delta).round() as i32,
            CellGrid::MidRise => (x / delta).floor() as i32,
        }
    }

    pub fn center(self, q: i32, delta: f64) -> f64 {
        match self {
            CellGrid::MidTread => q as f64 * delta,
            CellGrid::MidRise => (q as f64 + 0.5) * delta,
        }
    }

    /// Closed hull `[lo, hi]` of cell `q`.
    pub fn bounds(self, q: i32, delta: f64) -> (f64, f64) {
        let c = self.center(q, delta);
        (c - 0.5 * delta, c + 0.5 * delta)
    }

    pub fn name(self) -> &'static str {
        match self {
            CellGrid::MidTread => "mid-tread",
            CellGrid::MidRise => "mid-rise",
        }
    }
}

impl std::str::FromStr for CellGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mid-tread" | "midtread" => Ok(CellGrid::MidTread),
            "mid-rise" | "midrise" => Ok(CellGrid::MidRise),
            _ => Err(Error::invalid(format!("unknown grid {s:?}"))),
        }
    }
}

/// A hypercube cell of the per-component scalar quantizer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CubicCell {
    indices: Vec<i32>,
    delta_bits: u64,
    grid: CellGrid,
}

impl CubicCell {
    pub fn indices(&self) -> &[i32] {
        &self.indices
    }

    pub fn delta(&self) -> f64 {
        f64::from_bits(self.delta_bits)
    }

    pub fn grid(&self) -> CellGrid {
        self.grid
    }

    pub fn center(&self) -> Vec<f64> {
        let d = self.delta();
        self.indices.iter().map(|&q| self.grid.center(q, d)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let d = self.delta();
        x.len() == self.indices.len()
            && x.iter()
                .zip(&self.indices)
                .all(|(&v, &q)| self.grid.index(v, d) == q)
    }
}

pub fn quantize_on(grid: CellGrid, x: &[f64], delta: f64) -> CubicCell {
    assert!(delta > 0.0, "step must be positive");
    CubicCell {
        indices: x.iter().map(|&v| grid.index(v, delta)).collect(),
        delta_bits: delta.to_bits(),
        grid,
    }
}

/// `delta * round(x / delta)` per component, ties away from zero.
pub fn midpoint_quantize(x: &[f64], delta: f64) -> CubicCell {
    quantize_on(CellGrid::MidTread, x, delta)
}
