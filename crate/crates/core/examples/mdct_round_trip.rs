//! Analysis and synthesis with the 20 ms sine-windowed MDCT: a tone lands in
//! the expected bin, and overlap-add gives the input back.

use gwc::transform::{mdct_forward, mdct_inverse, FrameConfig, SignalBlock};

fn main() -> gwc::Result<()> {
    let cfg = FrameConfig::default();
    let freq = 1_000.0;
    let x: Vec<f64> = (0..16_000)
        .map(|n| (2.0 * std::f64::consts::PI * freq * n as f64 / cfg.sample_rate() as f64).sin())
        .collect();
    let signal = SignalBlock::new(x)?;

    let frames = mdct_forward(&signal, &cfg)?;
    let mid = &frames[frames.len() / 2].coefficients;
    let (peak, _) = mid.iter().enumerate().fold(
        (0, 0.0),
        |best, (k, c)| if c.abs() > best.1 { (k, c.abs()) } else { best },
    );
    println!(
        "{} frames of {} coefficients; a {freq} Hz tone peaks in bin {peak} ({:.1} Hz)",
        frames.len(),
        cfg.stride(),
        cfg.bin_frequency(peak)
    );

    let y = mdct_inverse(&frames, &cfg)?;
    let err = signal
        .samples()
        .iter()
        .zip(y.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("round trip: {} samples, max abs error {err:.2e}", y.len());
    Ok(())
}
