//! Exact enumeration of the expected negative log-likelihood of a decoder
//! model on a small discrete source.
//!
//! The source emits vectors of i.i.d. symbols. The codec maps each vector to
//! a cell by integer-dividing every symbol by `bin`. A conditional model
//! assigns each vector a probability within its own cell.

use rand::Rng;

use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSource {
    pmf: Vec<f64>,
    length: usize,
    bin: usize,
}

impl Default for DiscreteSource {
    /// Four symbols, pairs, two symbols per quantizer bin: 16 vectors, 4 cells.
    fn default() -> Self {
        DiscreteSource {
            pmf: vec![0.1, 0.2, 0.3, 0.4],
            length: 2,
            bin: 2,
        }
    }
}

impl DiscreteSource {
    pub fn new(pmf: Vec<f64>, length: usize, bin: usize) -> Result<Self> {
        if pmf.is_empty() || pmf.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::invalid("symbol probabilities must be positive"));
        }
        if (pmf.iter().sum::<f64>() - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invalid("symbol probabilities must sum to 1"));
        }
        if length == 0 || bin == 0 {
            return Err(Error::invalid("length and bin must be positive"));
        }
        if pmf.len().checked_pow(length as u32).map_or(true, |n| n > 1 << 16) {
            return Err(Error::invalid("alphabet too large to enumerate"));
        }
        Ok(DiscreteSource { pmf, length, bin })
    }

    pub fn num_vectors(&self) -> usize {
        self.pmf.len().pow(self.length as u32)
    }

    /// Symbols of vector `index`, most significant first.
    pub fn vector(&self, mut index: usize) -> Vec<usize> {
        let q = self.pmf.len();
        let mut v = vec![0; self.length];
        for slot in v.iter_mut().rev() {
            *slot = index % q;
            index /= q;
        }
        v
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.vector(index).iter().map(|&s| self.pmf[s]).product()
    }

    pub fn cell_of(&self, index: usize) -> Vec<usize> {
        self.vector(index).iter().map(|s| s / self.bin).collect()
    }

    /// Vector indices grouped by cell, in first-appearance order.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut keys: Vec<Vec<usize>> = Vec::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in 0..self.num_vectors() {
            let key = self.cell_of(i);
            match keys.iter().position(|k| *k == key) {
                Some(pos) => groups[pos].push(i),
                None => {
                    keys.push(key);
                    groups.push(vec![i]);
                }
            }
        }
        groups
    }

    /// The true conditional `p(x | y)` for every vector.
    pub fn true_conditional(&self) -> Vec<f64> {
        let mut theta = vec![0.0; self.num_vectors()];
        for cell in self.cells() {
            let mass: f64 = cell.iter().map(|&i| self.prob(i)).sum();
            for &i in &cell {
                theta[i] = self.prob(i) / mass;
            }
        }
        theta
    }

    pub fn uniform_conditional(&self) -> Vec<f64> {
        let mut theta = vec![0.0; self.num_vectors()];
        for cell in self.cells() {
            for &i in &cell {
                theta[i] = 1.0 / cell.len() as f64;
            }
        }
        theta
    }

    /// A random conditional model with every entry strictly positive.
    pub fn random_conditional<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let raw: Vec<f64> = (0..self.num_vectors())
            .map(|_| rng.gen_range(0.01..1.0))
            .collect();
        self.normalize_per_cell(&raw)
    }

    /// The true conditional multiplied by `1 + scale * u`, `u` uniform on
    /// [-1, 1], then renormalised within each cell.
    pub fn perturbed_conditional<R: Rng + ?Sized>(&self, scale: f64, rng: &mut R) -> Vec<f64> {
        let raw: Vec<f64> = self
            .true_conditional()
            .iter()
            .map(|p| p * (1.0 + scale * rng.gen_range(-1.0..1.0)))
            .collect();
        self.normalize_per_cell(&raw)
    }

    pub fn normalize_per_cell(&self, weights: &[f64]) -> Vec<f64> {
        let mut theta = weights.to_vec();
        for cell in self.cells() {
            let mass: f64 = cell.iter().map(|&i| weights[i]).sum();
            for &i in &cell {
                theta[i] /= mass;
            }
        }
        theta
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NllReport {
    /// `E[-ln theta(x | y)]` in nats.
    pub lhs: f64,
    /// `E[-ln p(x | y)]`, the conditional entropy.
    pub rhs: f64,
    /// Cell-probability-weighted `KL(p(.|y) || theta(.|y))`, computed directly.
    pub expected_kl: f64,
}

impl NllReport {
    pub fn gap(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn holds(&self) -> bool {
        self.gap() >= -1e-12
    }
}

/// Evaluates both sides of the likelihood bound for the model `theta`,
/// indexed like [`DiscreteSource::vector`].
pub fn nll_bound_check(source: &DiscreteSource, theta: &[f64]) -> Result<NllReport> {
    if theta.len() != source.num_vectors() {
        return Err(Error::invalid(format!(
            "model has {} entries, source has {} vectors",
            theta.len(),
            source.num_vectors()
        )));
    }
    if theta.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return Err(Error::invalid("model probabilities must lie in [0, 1]"));
    }
    let truth = source.true_conditional();
    let (mut lhs, mut rhs, mut kl) = (0.0, 0.0, 0.0);
    for cell in source.cells() {
        let mass: f64 = cell.iter().map(|&i| theta[i]).sum();
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invalid(format!("model sums to {mass} within a cell")));
        }
        let p_cell: f64 = cell.iter().map(|&i| source.prob(i)).sum();
        let mut cell_kl = 0.0;
        for &i in &cell {
            let p = source.prob(i);
            lhs -= p * theta[i].ln();
            rhs -= p * truth[i].ln();
            cell_kl += truth[i] * (truth[i] / theta[i]).ln();
        }
        kl += p_cell * cell_kl;
    }
    Ok(NllReport {
        lhs,
        rhs,
        expected_kl: kl,
    })
}
