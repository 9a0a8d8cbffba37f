//! Encodes seeded coloured noise and measures how the coding error follows
//! the spectral envelope: the slope of band SNR against band level should
//! sit near one half, and neighbouring quantizers differ by about 1.5 dB.
//!
//! cargo run --release --example noise_shaping -- [seconds] [seed]

use gwc::analysis::noise_shaping_fit;
use gwc::bitstream::{decode_stream_detailed, encode_stream, CodecConfig};
use gwc::coeff_quant::QuantizerLadder;
use gwc::envelope::default_band_layout;
use gwc::transform::{mdct_forward, SignalBlock};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Second-order resonator driven by white noise, plus a little white floor.
fn coloured_noise(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
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

fn main() -> gwc::Result<()> {
    let mut args = std::env::args().skip(1);
    let seconds: usize = args.next().map_or(10, |a| a.parse().expect("seconds"));
    let seed = args.next().map_or(5, |a| a.parse().expect("seed"));

    let layout = default_band_layout();
    let ladder = QuantizerLadder::default();
    let signal = SignalBlock::padded(coloured_noise(seconds * 16_000, seed), 320)?;

    let steps: Vec<f64> = (2..=ladder.max_index())
        .map(|m| 20.0 * (ladder.step(m - 1).unwrap() / ladder.step(m).unwrap()).log10())
        .collect();
    println!(
        "quantizer spacing: {:.3} dB per step",
        steps.iter().sum::<f64>() / steps.len() as f64
    );

    for bitrate in [16_000, 32_000] {
        let config = CodecConfig::new(bitrate)?;
        let bytes = encode_stream(&signal, &config)?;
        let decoded = decode_stream_detailed(&bytes)?;
        let reference = mdct_forward(&signal, &config.frame)?;
        let fit = noise_shaping_fit(&reference, &decoded, &layout, ladder.max_index())?;
        println!(
            "{bitrate} b/s: {} bytes, slope {:.3} over {} band-frames",
            bytes.len(),
            fit.slope,
            fit.points.len()
        );
    }
    Ok(())
}
