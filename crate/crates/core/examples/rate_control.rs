//! How one frame's bit budget is spent: the allocator picks a single offset
//! so that every band's quantizer follows its envelope, then the coded size
//! is the largest that fits.

use gwc::coeff_quant::{flatten, QuantizerLadder};
use gwc::envelope::{compute_envelope, default_band_layout};
use gwc::rate_control::{allocate, coefficient_bits, offset_range, snr_shape_check};
use gwc::transform::{mdct_forward, FrameConfig, SignalBlock};

fn main() -> gwc::Result<()> {
    let cfg = FrameConfig::default();
    let layout = default_band_layout();
    let ladder = QuantizerLadder::default();
    let mut state = 12345u64;
    let mut noise = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut y = 0.0;
    let x: Vec<f64> = (0..1_280)
        .map(|_| {
            y = 0.95 * y + 1_000.0 * noise();
            y
        })
        .collect();
    let frame = &mdct_forward(&SignalBlock::new(x)?, &cfg)?[2];
    let flat = flatten(frame, &compute_envelope(frame, &layout), &layout)?;

    let (lo, hi) = offset_range(flat.envelope(), &ladder);
    println!("offset range {lo}..={hi}");
    for off in (lo..=hi).step_by(4) {
        println!(
            "  offset {off:>4}: {:>5} coefficient bits",
            coefficient_bits(&flat, &layout, &ladder, off)
        );
    }
    for budget in [100, 250, 500, 1000] {
        let a = allocate(&flat, &layout, &ladder, budget);
        let snr = snr_shape_check(&a);
        println!(
            "budget {budget:>4}: offset {:>3}, {:>4} bits used, m = {:?}, predicted SNR {:.1} .. {:.1} dB",
            a.i_offset,
            a.bits_used,
            a.m,
            snr.iter().cloned().fold(f64::MAX, f64::min),
            snr.iter().cloned().fold(f64::MIN, f64::max)
        );
    }
    Ok(())
}
