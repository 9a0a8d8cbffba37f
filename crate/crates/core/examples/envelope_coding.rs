//! Measures the 3 dB band envelope of one frame and shows its
//! differential Huffman coding.

use gwc::bitstream::BitReader;
use gwc::envelope::{compute_envelope, decode_envelope, default_band_layout, encode_envelope};
use gwc::tables::envelope_table;
use gwc::transform::{mdct_forward, FrameConfig, SignalBlock};

fn main() -> gwc::Result<()> {
    let cfg = FrameConfig::default();
    let layout = default_band_layout();
    // a 200 Hz harmonic series whose partials fall off as 1/h^2
    let x: Vec<f64> = (0..1_280)
        .map(|n| {
            let t = n as f64 / 16_000.0;
            (1..40)
                .map(|h| 8_000.0 / (h * h) as f64 * (2.0 * std::f64::consts::PI * 200.0 * h as f64 * t).sin())
                .sum()
        })
        .collect();
    let frames = mdct_forward(&SignalBlock::new(x)?, &cfg)?;
    let env = compute_envelope(&frames[2], &layout);

    println!("band  bins      index  level");
    for (n, band) in layout.bands().enumerate() {
        println!(
            "{n:>4}  {:>3}..{:<3}  {:>5}  {:>5.0} dB",
            band.start,
            band.end,
            env.indices()[n],
            env.db(n)
        );
    }
    let bits = encode_envelope(&env, envelope_table());
    println!("coded in {} bits: {}", bits.len(), bits.to_bit_string());

    let back = decode_envelope(
        &mut BitReader::new(bits.as_bytes()),
        envelope_table(),
        layout.num_bands(),
    )?;
    assert_eq!(back, env);
    println!("decoded envelope matches");
    Ok(())
}
