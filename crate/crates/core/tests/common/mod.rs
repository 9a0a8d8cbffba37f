#![allow(dead_code)]

use std::f64::consts::PI;

use gwc::bitstream::BitWriter;
use gwc::coeff_quant::{dequantize_band, flatten, unflatten, write_band, FlattenedFrame, QuantizerLadder};
use gwc::envelope::{default_band_layout, write_envelope, BandLayout, Envelope};
use gwc::rate_control::{offset_range, quantizer_indices, OFFSET_BITS};
use gwc::tables::envelope_table;
use gwc::transform::{sine_window, SpectralFrame};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A spectral frame with a random band-level contour spanning a wide
/// dynamic range, occasional silent bands and occasional outliers that
/// push symbols into the escape path.
pub fn random_spectral_frame(rng: &mut ChaCha8Rng, layout: &BandLayout, index: usize) -> SpectralFrame {
    let mut level_db: f64 = rng.gen_range(-20.0..90.0);
    let mut coefficients = Vec::with_capacity(layout.num_bins());
    for band in layout.bands() {
        level_db = (level_db + rng.gen_range(-25.0..25.0)).clamp(-60.0, 110.0);
        let silent = rng.gen_bool(0.05);
        let amp = 10f64.powf(level_db / 20.0);
        for _ in band {
            let g: f64 = StandardNormal.sample(rng);
            let mut v = if silent { 0.0 } else { amp * g };
            if rng.gen_bool(0.01) {
                v *= 200.0;
            }
            coefficients.push(v);
        }
    }
    SpectralFrame::new(coefficients, index)
}

/// Stationary noise through a two-pole resonator plus a white floor, at a
/// level typical of 16-bit speech recordings.
pub fn coloured_noise(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng(seed);
    let (mut y1, mut y2) = (0.0, 0.0);
    (0..len)
        .map(|_| {
            let w: f64 = StandardNormal.sample(&mut rng);
            let y = 1.6 * y1 - 0.8 * y2 + 1000.0 * w;
            y2 = y1;
            y1 = y;
            let floor: f64 = StandardNormal.sample(&mut rng);
            y + 20.0 * floor
        })
        .collect()
}

/// Coefficient bits at one offset, counted by actually serialising every band.
pub fn serialised_bits(
    flat: &FlattenedFrame,
    layout: &BandLayout,
    ladder: &QuantizerLadder,
    offset: i32,
) -> usize {
    let m = quantizer_indices(flat.envelope(), offset, ladder.max_index());
    let mut w = BitWriter::new();
    for (band, &mn) in layout.bands().zip(&m) {
        let symbols: Vec<i32> = flat.coefficients[band]
            .iter()
            .map(|&v| ladder.quantize_value(v, mn))
            .collect();
        write_band(&symbols, mn, ladder, &mut w);
    }
    w.len()
}

/// Exhaustive scan for the smallest offset whose serialised size fits.
pub fn scan_offset(
    flat: &FlattenedFrame,
    layout: &BandLayout,
    ladder: &QuantizerLadder,
    budget: usize,
) -> i32 {
    let (lo, hi) = offset_range(flat.envelope(), ladder);
    (lo..=hi)
        .find(|&off| serialised_bits(flat, layout, ladder, off) <= budget)
        .expect("the top of the range codes nothing")
}

pub const N: usize = 320;

pub fn mdct_basis(n: usize, k: usize) -> f64 {
    (2.0 / N as f64).sqrt() * (PI / N as f64 * (n as f64 + 0.5 + N as f64 / 2.0) * (k as f64 + 0.5)).cos()
}

/// O(N^2) forward transform of a signal padded by one stride on each side.
pub fn oracle_mdct(x: &[f64]) -> Vec<Vec<f64>> {
    let w = sine_window(N);
    let mut padded = vec![0.0; x.len() + 2 * N];
    padded[N..N + x.len()].copy_from_slice(x);
    (0..x.len() / N + 1)
        .map(|t| {
            (0..N)
                .map(|k| {
                    (0..2 * N)
                        .map(|n| w[n] * padded[t * N + n] * mdct_basis(n, k))
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// O(N^2) synthesis with overlap-add and padding trimmed.
pub fn oracle_inverse(frames: &[Vec<f64>]) -> Vec<f64> {
    let w = sine_window(N);
    let mut acc = vec![0.0; (frames.len() + 1) * N];
    for (t, c) in frames.iter().enumerate() {
        for n in 0..2 * N {
            acc[t * N + n] += w[n] * (0..N).map(|k| c[k] * mdct_basis(n, k)).sum::<f64>();
        }
    }
    acc[N..acc.len() - N].to_vec()
}

pub fn rel_rms(a: &[f64], b: &[f64]) -> f64 {
    let err: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let norm: f64 = b.iter().map(|y| y * y).sum();
    (err / norm).sqrt()
}

/// What the decoder must reproduce for one frame, computed from the
/// encoder's own decisions.
pub fn expected_reconstruction(
    frame: &SpectralFrame,
    env: &Envelope,
    offset: i32,
    layout: &BandLayout,
    ladder: &QuantizerLadder,
) -> SpectralFrame {
    let flat = flatten(frame, env, layout).unwrap();
    let m = quantizer_indices(env, offset, ladder.max_index());
    let mut coefficients = Vec::new();
    for (band, &mn) in layout.bands().zip(&m) {
        let symbols: Vec<i32> = flat.coefficients[band]
            .iter()
            .map(|&v| ladder.quantize_value(v, mn))
            .collect();
        coefficients.extend(dequantize_band(&symbols, mn, ladder));
    }
    unflatten(
        &FlattenedFrame::from_parts(coefficients, env.clone()),
        layout,
        frame.frame_index,
    )
    .unwrap()
}

/// Re-serialises a decoded frame from its reconstructed coefficients.
pub fn reserialise(frame: &SpectralFrame, env: &Envelope, offset: i32, frame_bits: usize) -> Vec<u8> {
    let layout = default_band_layout();
    let ladder = QuantizerLadder::default();
    let flat = flatten(frame, env, &layout).unwrap();
    let mut w = BitWriter::new();
    write_envelope(env, envelope_table(), &mut w);
    w.write_signed(offset, OFFSET_BITS);
    for (band, &m) in layout
        .bands()
        .zip(&quantizer_indices(env, offset, ladder.max_index()))
    {
        let symbols: Vec<i32> = flat.coefficients[band]
            .iter()
            .map(|&v| ladder.quantize_value(v, m))
            .collect();
        write_band(&symbols, m, &ladder, &mut w);
    }
    w.pad_to(frame_bits);
    w.align_to_byte();
    w.into_bytes()
}
