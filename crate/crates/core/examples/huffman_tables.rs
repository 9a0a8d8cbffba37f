//! Inspect the embedded codebooks, or regenerate them from their models.
//!
//! ```bash
//! cargo run -p gwc --example huffman_tables            # summary
//! cargo run -p gwc --example huffman_tables -- --write # rewrite tables/
//! ```

use std::path::PathBuf;

use gwc::coeff_quant::{ladder_step, DEFAULT_BASE_STEP, DEFAULT_MAX_INDEX};
use gwc::huffman::Symbol;
use gwc::tables;

fn main() -> std::io::Result<()> {
    let steps: Vec<f64> = (1..=DEFAULT_MAX_INDEX)
        .map(|m| ladder_step(DEFAULT_BASE_STEP, m))
        .collect();
    let lengths = tables::coefficient_lengths(&steps);

    if std::env::args().any(|a| a == "--write") {
        let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tables");
        std::fs::write(dir.join("envelope_diff.txt"), tables::envelope_table_text())?;
        for (i, (step, l)) in steps.iter().zip(&lengths).enumerate() {
            let text = tables::coefficient_table_text(i + 1, *step, l);
            std::fs::write(dir.join(format!("coef_{:02}.txt", i + 1)), text)?;
        }
        println!("wrote {} tables to {}", lengths.len() + 1, dir.display());
        return Ok(());
    }

    let env = tables::envelope_table();
    println!("envelope differences (range +-{}):", env.range());
    for d in 0..=4 {
        println!("  d={d:<3} {:>2} bits", env.len_of(Symbol::Value(d)));
    }
    println!("  ESC   {:>2} bits + 7 raw", env.len_of(Symbol::Escape));

    println!("\n m   step        |s|=0 |s|=1 |s|=8 |s|=31  ESC   Kraft");
    for (m, t) in tables::default_coefficient_tables().iter().enumerate() {
        let len = |s| t.len_of(Symbol::Value(s));
        println!(
            "{:>2}  {:.6}  {:>5} {:>5} {:>5} {:>6} {:>4}   {:.4}",
            m + 1,
            steps[m],
            len(0),
            len(1),
            len(8),
            len(31),
            t.len_of(Symbol::Escape),
            t.kraft_sum()
        );
    }
    Ok(())
}
