//! Midpoint, single-sample and mean-of-10 distortions on the random-sine
//! source for the two step sizes used in the distortion comparison.
//!
//! cargo run --release --example toy_table -- [trials] [seed]

use gwc::toy_theory::{run_toy_experiment, ToyConfig, CSV_HEADER};

fn main() -> gwc::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().map_or(10_000, |a| a.parse().expect("trials"));
    let seed = args.next().map_or(1, |a| a.parse().expect("seed"));

    println!("{CSV_HEADER}");
    for delta in [0.5, 1.0] {
        let cfg = ToyConfig {
            delta,
            trials,
            seed,
            ..ToyConfig::default()
        };
        let report = run_toy_experiment(&cfg)?;
        for row in report.rows() {
            println!("{}", row.csv_row(delta));
        }
    }
    Ok(())
}
