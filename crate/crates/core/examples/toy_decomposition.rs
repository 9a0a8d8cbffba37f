//! Splits the single-sample distortion into the cell-mean error plus the
//! sample spread, checks the factor of two between them, and the `1 + 1/k`
//! law for averages of `k` conditional samples.
//!
//! cargo run --release --example toy_decomposition -- [trials] [seed]

use gwc::toy_theory::{block_snr_improvement, decomposition_check, ToyConfig};

fn main() -> gwc::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().map_or(10_000, |a| a.parse().expect("trials"));
    let seed = args.next().map_or(7, |a| a.parse().expect("seed"));

    for delta in [0.25, 0.5, 1.0] {
        let cfg = ToyConfig {
            delta,
            trials,
            seed,
            ..ToyConfig::default()
        };
        let r = decomposition_check(&cfg)?;
        println!("delta = {delta}");
        println!(
            "  E|x~-x|^2 = {:.5}  E|x-mu|^2 = {:.5}  E|x~-mu|^2 = {:.5}  residual = {:.2}%",
            r.lhs.mse,
            r.term1.mse,
            r.term2.mse,
            100.0 * r.relative_residual
        );
        println!(
            "  sampling / cell mean = {:.3} +- {:.3}",
            r.sampling_ratio.ratio, r.sampling_ratio.stderr
        );
        for k in [2, 5, 10] {
            let e = r.mean_of_k_ratios[k - 1];
            println!(
                "  mean of {k:>2} / cell mean = {:.4} +- {:.4} (1 + 1/k = {:.4})",
                e.ratio,
                e.stderr,
                1.0 + 1.0 / k as f64
            );
        }
        let blocks = block_snr_improvement(
            &r.records,
            100,
            |t| t.sample_error,
            |t| t.mean_of_k_error[t.mean_of_k_error.len() - 1],
        );
        let mean = blocks.iter().sum::<f64>() / blocks.len() as f64;
        println!("  single sample vs mean of 10, per 100-trial block: {mean:+.2} dB");
    }
    Ok(())
}
