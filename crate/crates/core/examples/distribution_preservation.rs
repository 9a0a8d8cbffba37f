//! Does a reconstruction look like the source? Two-sample KS statistics of
//! one coordinate against fresh source draws.
//!
//! cargo run --release --example distribution_preservation -- [delta] [trials]

use gwc::toy_theory::{distribution_preservation_check, ToyConfig};

fn main() -> gwc::Result<()> {
    let mut args = std::env::args().skip(1);
    let delta = args.next().map_or(1.0, |a| a.parse().expect("delta"));
    let trials = args.next().map_or(10_000, |a| a.parse().expect("trials"));
    let r = distribution_preservation_check(&ToyConfig {
        delta,
        trials,
        ..ToyConfig::default()
    })?;
    println!("critical value at 1%: {:.4}", r.critical_value);
    for (name, ks) in [
        ("conditional sample", r.sampler_ks),
        ("midpoint", r.midpoint_ks),
        ("mean of 10", r.mean_of_k_ks),
    ] {
        let verdict = if ks < r.critical_value {
            "same law"
        } else {
            "different"
        };
        println!("{name:<19} KS {ks:.4}  {verdict}");
    }
    Ok(())
}
