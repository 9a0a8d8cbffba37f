//! The toy sine-source experiments: midpoint quantization, exact conditional
//! sampling, distortion decompositions and distribution checks.

mod experiment;
mod ks;
mod nll;
mod sampler;
mod source;

pub use experiment::{
    block_snr_improvement, decomposition_check, distribution_preservation_check, run_toy_experiment,
    DecompositionReport, PreservationReport, RatioEstimate, ToyConfig, ToyReport, TrialRecord, TrialStats,
    CELL_MEAN_SAMPLES, CSV_HEADER,
};
pub use ks::{ks_critical_value, ks_statistic};
pub use nll::{nll_bound_check, DiscreteSource, NllReport};
pub use sampler::{
    conditional_sample, CellRegion, ConditionalSampler, Proposal, DEFAULT_MAX_ATTEMPTS, DEFAULT_TILE_DEPTH,
};
pub use source::{midpoint_quantize, quantize_on, CellGrid, CubicCell, SineSource};
