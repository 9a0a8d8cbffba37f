//! Encode a signal to a `.gwc` byte stream at several bit rates, decode it,
//! and report size and SNR.
//!
//! cargo run --release --example codec -- [input.wav]

use gwc::bitstream::{decode_stream_detailed, encode_stream, CodecConfig, HEADER_BYTES};
use gwc::cli::read_wav;
use gwc::transform::{SignalBlock, STRIDE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let samples = match std::env::args().nth(1) {
        Some(path) => read_wav(path.as_ref()).map_err(|f| f.message)?,
        None => {
            // two seconds of a vowel-like pulse train through a formant
            let mut y = [0.0f64; 2];
            (0..32_000)
                .map(|n| {
                    let pulse = if n % 128 == 0 { 8_000.0 } else { 0.0 };
                    let v = pulse + 1.8 * y[0] * 0.96 - 0.92 * y[1];
                    y = [v, y[0]];
                    v
                })
                .collect()
        }
    };
    let signal = SignalBlock::padded(samples, STRIDE)?;
    for bitrate in [8_000, 16_000, 32_000, 64_000] {
        let config = CodecConfig::new(bitrate)?;
        let bytes = encode_stream(&signal, &config)?;
        let decoded = decode_stream_detailed(&bytes)?;
        let err: f64 = signal
            .samples()
            .iter()
            .zip(decoded.signal.samples())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        println!(
            "{:>2} kb/s: {} frames x {} bytes + {HEADER_BYTES} header = {} bytes, SNR {:.1} dB",
            bitrate / 1000,
            decoded.header.num_frames,
            config.frame_bytes()?,
            bytes.len(),
            10.0 * (signal.energy() / err).log10()
        );
    }
    Ok(())
}
