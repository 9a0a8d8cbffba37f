//! Monte Carlo distortion experiments on the sine source.
//!
//! Each trial draws its own generator from `(seed, trial index)`, so results
//! do not depend on how trials are scheduled across threads: per-trial
//! values are collected in trial order and reduced sequentially.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::ks::{ks_critical_value, ks_statistic};
use super::sampler::{ConditionalSampler, Proposal, DEFAULT_MAX_ATTEMPTS};
use super::source::{quantize_on, CellGrid, SineSource};
use crate::error::{Error, Result};

/// Conditional samples used to estimate the cell mean.
pub const CELL_MEAN_SAMPLES: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct ToyConfig {
    pub delta: f64,
    pub dim: usize,
    pub trials: usize,
    pub k_avg: usize,
    pub seed: u64,
    pub grid: CellGrid,
    pub proposal: Proposal,
    pub max_attempts: u64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            delta: 0.5,
            dim: 10,
            trials: 10_000,
            k_avg: 10,
            seed: 1,
            grid: CellGrid::MidRise,
            proposal: Proposal::Tiled,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

impl ToyConfig {
    fn validate(&self) -> Result<SineSource> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.k_avg == 0 {
            return Err(Error::invalid("k_avg must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid(format!("step {} must be positive", self.delta)));
        }
        SineSource::new(self.dim)
    }

    fn sampler(&self, source: SineSource) -> ConditionalSampler {
        ConditionalSampler::new(source, self.proposal).with_max_attempts(self.max_attempts)
    }

    fn trial_rng(&self, stream: u64, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream.wrapping_mul(1 << 40).wrapping_add(trial as u64));
        rng
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialStats {
    pub method: String,
    /// Per-sample mean squared error.
    pub mse: f64,
    pub trials: usize,
    pub stderr: f64,
}

impl TrialStats {
    pub fn from_values(method: impl Into<String>, values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        TrialStats {
            method: method.into(),
            mse: mean,
            trials: values.len(),
            stderr: (var / n).sqrt(),
        }
    }

    pub fn csv_row(&self, delta: f64) -> String {
        format!(
            "{},{},{},{:.6e},{:.6e}",
            self.method, delta, self.trials, self.mse, self.stderr
        )
    }
}

pub const CSV_HEADER: &str = "method,delta,trials,mse,stderr";

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn mean_of(samples: &[Vec<f64>], k: usize) -> Vec<f64> {
    let dim = samples[0].len();
    let mut m = vec![0.0; dim];
    for s in &samples[..k] {
        for (a, v) in m.iter_mut().zip(s) {
            *a += v;
        }
    }
    m.iter_mut().for_each(|a| *a /= k as f64);
    m
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToyReport {
    pub midpoint: TrialStats,
    pub sampling: TrialStats,
    pub mean_of_k: TrialStats,
}

impl ToyReport {
    pub fn rows(&self) -> [&TrialStats; 3] {
        [&self.midpoint, &self.sampling, &self.mean_of_k]
    }
}

/// Per-sample distortion of midpoint reconstruction, one conditional sample,
/// and the average of `k_avg` conditional samples. The single sample is the
/// first of the `k_avg` draws.
pub fn run_toy_experiment(cfg: &ToyConfig) -> Result<ToyReport> {
    let source = cfg.validate()?;
    let sampler = cfg.sampler(source);
    let d = cfg.dim as f64;
    let per_trial: Vec<[f64; 3]> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = cfg.trial_rng(0, t);
            let x = source.draw(&mut rng);
            let cell = quantize_on(cfg.grid, &x, cfg.delta);
            let draws = sampler.sample_many(&cell, cfg.k_avg, &mut rng)?;
            Ok([
                sq_dist(&cell.center(), &x) / d,
                sq_dist(&draws[0], &x) / d,
                sq_dist(&mean_of(&draws, cfg.k_avg), &x) / d,
            ])
        })
        .collect::<Result<_>>()?;
    let column = |i: usize| per_trial.iter().map(|r| r[i]).collect::<Vec<_>>();
    Ok(ToyReport {
        midpoint: TrialStats::from_values("midpoint", &column(0)),
        sampling: TrialStats::from_values("sampling", &column(1)),
        mean_of_k: TrialStats::from_values(format!("mean_of_{}", cfg.k_avg), &column(2)),
    })
}

/// Squared errors (not normalised by dimension) of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    /// `||x||^2`
    pub signal: f64,
    /// `||x~ - x||^2` for the first conditional sample
    pub sample_error: f64,
    /// `||x - mu||^2` with `mu` the estimated cell mean
    pub mean_error: f64,
    /// `mean_error` minus an unbiased estimate of `||mu_hat - mu||^2`
    pub mean_error_corrected: f64,
    /// `||x~ - mu||^2`
    pub sample_to_mean: f64,
    /// `||mean_k - x||^2` for k = 1..=k_avg
    pub mean_of_k_error: Vec<f64>,
}

/// Ratio of sums `sum(num) / sum(den)` with a delta-method standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioEstimate {
    pub ratio: f64,
    pub stderr: f64,
}

impl RatioEstimate {
    pub fn from_pairs(num: &[f64], den: &[f64]) -> Self {
        let n = num.len() as f64;
        let mean_den = den.iter().sum::<f64>() / n;
        let ratio = num.iter().sum::<f64>() / den.iter().sum::<f64>();
        let resid: Vec<f64> = num.iter().zip(den).map(|(a, b)| a - ratio * b).collect();
        let mr = resid.iter().sum::<f64>() / n;
        let var = resid.iter().map(|r| (r - mr).powi(2)).sum::<f64>() / (n - 1.0);
        RatioEstimate {
            ratio,
            stderr: (var / n).sqrt() / mean_den,
        }
    }

    /// Distance from `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.ratio - target) / self.stderr
    }
}

#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub delta: f64,
    /// `E||x~ - x||^2` per sample
    pub lhs: TrialStats,
    /// `E||x - mu||^2` per sample
    pub term1: TrialStats,
    /// `E||x~ - mu||^2` per sample
    pub term2: TrialStats,
    /// `|lhs - (term1 + term2)| / lhs`
    pub relative_residual: f64,
    /// Paired standard error of `lhs - term1 - term2`, relative to `lhs`.
    pub residual_stderr: f64,
    /// `lhs / term1`, expected to be 2. The denominator uses the
    /// bias-corrected per-trial cell-mean error, as do the mean-of-k ratios.
    pub sampling_ratio: RatioEstimate,
    /// `E||mean_k - x||^2 / E||x - mu||^2` for k = 1..=k_avg, expected `1 + 1/k`.
    pub mean_of_k_ratios: Vec<RatioEstimate>,
    pub records: Vec<TrialRecord>,
}

/// Estimates both sides of the conditional-mean decomposition. The cell mean
/// is estimated per trial from [`CELL_MEAN_SAMPLES`] independent conditional
/// samples.
pub fn decomposition_check(cfg: &ToyConfig) -> Result<DecompositionReport> {
    let source = cfg.validate()?;
    let sampler = cfg.sampler(source);
    let d = cfg.dim as f64;
    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = cfg.trial_rng(1, t);
            let x = source.draw(&mut rng);
            let cell = quantize_on(cfg.grid, &x, cfg.delta);
            let region = sampler.prepare(&cell);
            let draws = (0..cfg.k_avg)
                .map(|_| sampler.sample(&cell, region.as_ref(), &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let mu_draws = (0..CELL_MEAN_SAMPLES)
                .map(|_| sampler.sample(&cell, region.as_ref(), &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let mu = mean_of(&mu_draws, CELL_MEAN_SAMPLES);
            let n = CELL_MEAN_SAMPLES as f64;
            let spread = mu_draws.iter().map(|s| sq_dist(s, &mu)).sum::<f64>() / (n - 1.0);
            let mean_error = sq_dist(&x, &mu);
            Ok(TrialRecord {
                signal: x.iter().map(|v| v * v).sum(),
                sample_error: sq_dist(&draws[0], &x),
                mean_error,
                mean_error_corrected: mean_error - spread / n,
                sample_to_mean: sq_dist(&draws[0], &mu),
                mean_of_k_error: (1..=cfg.k_avg)
                    .map(|k| sq_dist(&mean_of(&draws, k), &x))
                    .collect(),
            })
        })
        .collect::<Result<_>>()?;

    let col = |f: &dyn Fn(&TrialRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
    let lhs_v = col(&|r| r.sample_error / d);
    let t1_v = col(&|r| r.mean_error / d);
    let t2_v = col(&|r| r.sample_to_mean / d);
    let lhs = TrialStats::from_values("sampling", &lhs_v);
    let term1 = TrialStats::from_values("cell_mean", &t1_v);
    let term2 = TrialStats::from_values("sample_to_mean", &t2_v);
    let resid: Vec<f64> = (0..records.len()).map(|i| lhs_v[i] - t1_v[i] - t2_v[i]).collect();
    let resid_stats = TrialStats::from_values("residual", &resid);
    let mean_of_k_ratios = (0..cfg.k_avg)
        .map(|i| {
            RatioEstimate::from_pairs(&col(&|r| r.mean_of_k_error[i]), &col(&|r| r.mean_error_corrected))
        })
        .collect();
    Ok(DecompositionReport {
        delta: cfg.delta,
        relative_residual: resid_stats.mse.abs() / lhs.mse,
        residual_stderr: resid_stats.stderr / lhs.mse,
        sampling_ratio: RatioEstimate::from_pairs(&lhs_v, &col(&|r| r.mean_error_corrected / d)),
        mean_of_k_ratios,
        lhs,
        term1,
        term2,
        records,
    })
}

/// Per-block SNR difference in dB between two reconstructions, where each
/// block pools `block` consecutive trials. Positive means `a` is better.
pub fn block_snr_improvement(
    records: &[TrialRecord],
    block: usize,
    error_a: impl Fn(&TrialRecord) -> f64,
    error_b: impl Fn(&TrialRecord) -> f64,
) -> Vec<f64> {
    records
        .chunks_exact(block)
        .map(|c| {
            let ea: f64 = c.iter().map(&error_a).sum();
            let eb: f64 = c.iter().map(&error_b).sum();
            10.0 * (eb / ea).log10()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreservationReport {
    pub samples: usize,
    pub critical_value: f64,
    pub sampler_ks: f64,
    pub midpoint_ks: f64,
    pub mean_of_k_ks: f64,
}

impl PreservationReport {
    pub fn sampler_preserves(&self) -> bool {
        self.sampler_ks < self.critical_value
    }
}

/// Two-sample KS comparison of one component per trial (cycling through the
/// dimensions) of fresh source draws against each reconstruction.
pub fn distribution_preservation_check(cfg: &ToyConfig) -> Result<PreservationReport> {
    let source = cfg.validate()?;
    let sampler = cfg.sampler(source);
    let rows: Vec<[f64; 4]> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let k = t % cfg.dim;
            let mut rng = cfg.trial_rng(2, t);
            let reference = source.draw(&mut rng)[k];
            let x = source.draw(&mut rng);
            let cell = quantize_on(cfg.grid, &x, cfg.delta);
            let draws = sampler.sample_many(&cell, cfg.k_avg, &mut rng)?;
            Ok([
                reference,
                draws[0][k],
                cell.center()[k],
                mean_of(&draws, cfg.k_avg)[k],
            ])
        })
        .collect::<Result<_>>()?;
    let col = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<_>>();
    let reference = col(0);
    let n = rows.len();
    Ok(PreservationReport {
        samples: n,
        critical_value: ks_critical_value(n, n),
        sampler_ks: ks_statistic(&reference, &col(1)),
        midpoint_ks: ks_statistic(&reference, &col(2)),
        mean_of_k_ks: ks_statistic(&reference, &col(3)),
    })
}
