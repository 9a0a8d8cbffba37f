//! Per-frame bit allocation.
//!
//! Every band uses quantizer `m_n = clamp(i_env(n) - i_offset, 0, M)`, so one
//! integer steers the whole frame: lowering `i_offset` moves every band one
//! rung up the ladder (+1.5 dB SNR). Within a frame this gives each band an
//! SNR that grows by 1.5 dB per 3 dB of envelope, i.e. noise that follows
//! the square root of the envelope. The offset is the smallest one whose
//! entropy-coded size fits the budget; coded size never grows with the
//! offset, so a binary search finds it.

use crate::coeff_quant::{FlattenedFrame, QuantizerLadder};
use crate::envelope::{default_band_layout, envelope_bits, BandLayout, Envelope, RAW_INDEX_BITS};
use crate::error::{Error, Result};
use crate::huffman::Symbol;
use crate::tables::envelope_table;
use crate::transform::FrameConfig;

/// Width of the signed `i_offset` field.
pub const OFFSET_BITS: u32 = 8;
/// Nominal SNR gained per quantizer rung, in dB.
pub const SNR_STEP_DB: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allocation {
    pub i_offset: i32,
    pub m: Vec<usize>,
    pub bits_used: usize,
    pub budget: usize,
}

/// Smallest frame that can carry a (flat) envelope and the offset field.
pub fn min_frame_bits(layout: &BandLayout) -> usize {
    let zero = envelope_table().len_of(Symbol::Value(0)) as usize;
    RAW_INDEX_BITS as usize + (layout.num_bands() - 1) * zero + OFFSET_BITS as usize
}

/// Bits available to one frame at `bitrate`, covering envelope, offset and
/// coefficients.
pub fn frame_budget(bitrate: u32, cfg: &FrameConfig) -> Result<usize> {
    let bits = bitrate as u64 * cfg.stride() as u64 / cfg.sample_rate() as u64;
    let min = min_frame_bits(&default_band_layout());
    if (bits as usize) < min {
        return Err(Error::InvalidConfig(format!(
            "{bitrate} b/s gives {bits} bits per frame, need at least {min}"
        )));
    }
    Ok(bits as usize)
}

pub fn quantizer_indices(env: &Envelope, i_offset: i32, max_index: usize) -> Vec<usize> {
    env.indices()
        .iter()
        .map(|&i| (i - i_offset).clamp(0, max_index as i32) as usize)
        .collect()
}

/// Range of offsets worth searching: below it every band saturates at M,
/// at its top every band is at zero rate.
pub fn offset_range(env: &Envelope, ladder: &QuantizerLadder) -> (i32, i32) {
    (env.min() - ladder.max_index() as i32, env.max())
}

/// Exact coefficient bits for the frame at a given offset.
pub fn coefficient_bits(
    flat: &FlattenedFrame,
    layout: &BandLayout,
    ladder: &QuantizerLadder,
    i_offset: i32,
) -> usize {
    quantizer_indices(flat.envelope(), i_offset, ladder.max_index())
        .into_iter()
        .zip(layout.bands())
        .map(|(m, band)| ladder.band_bits(&flat.coefficients[band], m))
        .sum()
}

pub fn allocate(
    flat: &FlattenedFrame,
    layout: &BandLayout,
    ladder: &QuantizerLadder,
    budget: usize,
) -> Allocation {
    let env = flat.envelope();
    let (mut lo, mut hi) = offset_range(env, ladder);
    // invariant: hi is feasible; everything below lo is out of range
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if coefficient_bits(flat, layout, ladder, mid) <= budget {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Allocation {
        i_offset: hi,
        m: quantizer_indices(env, hi, ladder.max_index()),
        bits_used: coefficient_bits(flat, layout, ladder, hi),
        budget,
    }
}

/// Predicted in-band SNR (dB) implied by the allocation.
pub fn snr_shape_check(alloc: &Allocation) -> Vec<f64> {
    alloc.m.iter().map(|&m| SNR_STEP_DB * m as f64).collect()
}

/// Envelope actually sent for a frame: the measured one if it fits next to
/// the offset field, otherwise a slew-limited copy, otherwise a flat one.
pub fn fit_envelope(env: &Envelope, frame_bits: usize) -> Envelope {
    let table = envelope_table();
    let room = frame_bits.saturating_sub(OFFSET_BITS as usize);
    if envelope_bits(env, table) <= room {
        return env.clone();
    }
    let limited = env.slew_limited(crate::tables::ENVELOPE_DIFF_RANGE);
    if envelope_bits(&limited, table) <= room {
        return limited;
    }
    env.flattened_to_mean()
}
