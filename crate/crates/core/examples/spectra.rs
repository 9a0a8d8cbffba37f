//! Power and error spectra of a coded signal, per-band SNR, and the
//! histogram of per-band SNR gains from doubling the rate. Writes CSV files
//! into the given directory (default: the system temp directory).

use std::path::PathBuf;

use gwc::analysis::{band_snr, error_spectrum, power_spectrum, snr_improvement_histogram};
use gwc::bitstream::{decode_stream, encode_stream, CodecConfig};
use gwc::envelope::default_band_layout;
use gwc::transform::{FrameConfig, SignalBlock};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> gwc::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(std::env::temp_dir, PathBuf::from);
    let cfg = FrameConfig::default();
    let layout = default_band_layout();

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut y1, mut y2) = (0.0, 0.0);
    let x: Vec<f64> = (0..5 * 16_000)
        .map(|_| {
            let w: f64 = StandardNormal.sample(&mut rng);
            let y = 1.3 * y1 - 0.6 * y2 + 500.0 * w;
            (y2, y1) = (y1, y);
            y
        })
        .collect();
    let x = SignalBlock::new(x)?;
    let at = |bitrate| -> gwc::Result<SignalBlock> {
        decode_stream(&encode_stream(&x, &CodecConfig::new(bitrate)?)?)
    };
    let low = at(16_000)?;
    let high = at(32_000)?;

    let power = power_spectrum(&x, &cfg)?;
    let error = error_spectrum(&x, &low, &cfg)?;
    let snr_low = band_snr(&x, &low, &layout, &cfg)?;
    let snr_high = band_snr(&x, &high, &layout, &cfg)?;
    let hist = snr_improvement_histogram(&snr_high, &snr_low, 0.5)?;

    println!("band  signal dB  error dB  SNR 16k  SNR 32k");
    let (sp, ep) = (power.band_power_db(&layout), error.band_power_db(&layout));
    for n in 0..layout.num_bands() {
        println!(
            "{n:>4}  {:>9.1}  {:>8.1}  {:>7.1}  {:>7.1}",
            sp[n],
            ep[n],
            snr_low.snr_db[n].unwrap_or(f64::NAN),
            snr_high.snr_db[n].unwrap_or(f64::NAN)
        );
    }
    println!(
        "SNR gain from doubling the rate: mean {:+.2} dB over {} band-frames",
        hist.mean().unwrap(),
        hist.total()
    );

    for (name, csv) in [
        ("power.csv", power.to_csv()),
        ("error.csv", error.to_csv()),
        ("band_snr.csv", snr_low.to_csv()),
        ("snr_gain_hist.csv", hist.to_csv()),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, csv)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
