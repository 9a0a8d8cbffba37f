pub mod analysis;
pub mod bitstream;
pub mod cli;
pub mod coeff_quant;
pub mod envelope;
pub mod error;
pub mod huffman;
pub mod rate_control;
pub mod tables;
pub mod toy_theory;
pub mod transform;

pub use error::{Error, Result};
