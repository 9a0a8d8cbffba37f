//! Offline construction of the embedded codebooks and access to the copies
//! checked in under `tables/`.
//!
//! Envelope differences use a two-sided geometric model. Coefficient tables
//! use a discretised unit-variance Laplacian at each ladder step, after which
//! code lengths are raised where needed so that the coded size of any value
//! never decreases when moving to a finer quantizer. Raising lengths keeps
//! the Kraft sum below one, so a canonical code still exists.

use std::sync::LazyLock;

use crate::huffman::{huffman_lengths, HuffmanTable};

pub const ENVELOPE_DIFF_RANGE: i32 = 15;
pub const ENVELOPE_GEOMETRIC_RATIO: f64 = 0.6;
pub const COEFF_SYMBOL_RANGE: i32 = 31;
pub const COEFF_ESCAPE_BITS: u32 = 16;

// Floors on model probabilities. The symbol floor bounds codeword length,
// the escape floor keeps the escape codeword short on coarse quantizers.
const SYMBOL_WEIGHT_FLOOR: f64 = 1.0 / 16384.0;
const ESCAPE_WEIGHT_FLOOR: f64 = 1.0 / 64.0;

pub fn envelope_diff_weights() -> Vec<f64> {
    let r = ENVELOPE_DIFF_RANGE;
    let p = ENVELOPE_GEOMETRIC_RATIO;
    let mut w: Vec<f64> = (-r..=r).map(|d| p.powi(d.abs())).collect();
    // both tails beyond the range
    w.push(2.0 * p.powi(r + 1) / (1.0 - p));
    w
}

pub fn envelope_diff_lengths() -> Vec<u8> {
    huffman_lengths(&envelope_diff_weights())
}

/// Probabilities of each symbol in `[-range, range]` and of the escape for
/// a unit-variance Laplacian quantized with `step` (midpoint rule).
pub fn laplacian_symbol_probs(step: f64, range: i32) -> Vec<f64> {
    let rate = std::f64::consts::SQRT_2; // 1/b for unit variance
                                         // P(|X| > t) / 2 for a Laplacian
    let tail = |t: f64| 0.5 * (-rate * t).exp();
    let mut probs: Vec<f64> = (-range..=range)
        .map(|s| {
            let a = s.unsigned_abs() as f64;
            if a == 0.0 {
                -(-rate * 0.5 * step).exp_m1()
            } else {
                tail((a - 0.5) * step) - tail((a + 0.5) * step)
            }
        })
        .collect();
    probs.push(2.0 * tail((range as f64 + 0.5) * step));
    probs
}

/// Smallest symbol magnitude a value coded as `s` can take on the next finer
/// quantizer (step ratio `2^-1/4`), rounded conservatively.
fn next_min_symbol(s: i32) -> i32 {
    if s == 0 {
        return 0;
    }
    let ratio = 2f64.powf(0.25);
    (ratio * (s as f64 - 0.5) - 1e-6).round() as i32
}

/// Lowest lengths a table may use given the previous (coarser) table: for
/// every magnitude, the most the coarser table charges for any value that
/// lands on it here. Index `|s|` for `0..=range`, then escape.
fn lower_bounds(range: i32, coarser: Option<&[u8]>) -> Vec<u8> {
    let r = range as usize;
    let mut lb = vec![1u8; r + 2];
    if let Some(prev) = coarser {
        for target in 0..=range {
            lb[target as usize] = (0..=range)
                .filter(|&s| next_min_symbol(s) <= target)
                .map(|s| prev[r + s as usize])
                .max()
                .unwrap_or(1);
        }
        lb[r + 1] = prev[prev.len() - 1];
    }
    lb
}

/// Adjusts Huffman lengths so that they are symmetric, non-decreasing in
/// `|s|` and respect the bounds implied by the coarser table, then shortens
/// codewords again (most probable first) wherever the Kraft sum allows.
pub fn enforce_monotone(lengths: &mut [u8], weights: &[f64], range: i32, coarser: Option<&[u8]>) {
    let r = range as usize;
    let esc = lengths.len() - 1;
    let lb = lower_bounds(range, coarser);
    // work on magnitudes: mag[a] for a = 0..=r, then escape
    let mut mag: Vec<u8> = (0..=r)
        .map(|a| lengths[r + a].max(lengths[r - a]).max(lb[a]))
        .collect();
    for a in 1..=r {
        mag[a] = mag[a].max(mag[a - 1]);
    }
    mag.push(lengths[esc].max(lb[r + 1]));

    let mult = |a: usize| if a == 0 || a == r + 1 { 1.0 } else { 2.0 };
    let mut kraft: f64 = (0..=r + 1).map(|a| mult(a) * (-(mag[a] as f64)).exp2()).sum();
    let mut order: Vec<usize> = (0..=r + 1).collect();
    let weight = |a: usize| {
        if a == r + 1 {
            weights[esc]
        } else {
            mult(a) * weights[r + a]
        }
    };
    order.sort_by(|&x, &y| weight(y).total_cmp(&weight(x)).then(x.cmp(&y)));
    loop {
        let mut changed = false;
        for &a in &order {
            let cur = mag[a];
            if cur <= 1 || cur - 1 < lb[a] || (a >= 1 && a <= r && cur - 1 < mag[a - 1]) {
                continue;
            }
            let delta = mult(a) * (-((cur - 1) as f64)).exp2() - mult(a) * (-(cur as f64)).exp2();
            if kraft + delta <= 1.0 {
                kraft += delta;
                mag[a] = cur - 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for a in 0..=r {
        lengths[r + a] = mag[a];
        lengths[r - a] = mag[a];
    }
    lengths[esc] = mag[r + 1];
}

/// Code lengths for every quantizer `m = 1..=steps.len()`.
pub fn coefficient_lengths(steps: &[f64]) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = Vec::with_capacity(steps.len());
    for &step in steps {
        let mut w = laplacian_symbol_probs(step, COEFF_SYMBOL_RANGE);
        let esc = w.len() - 1;
        for (i, p) in w.iter_mut().enumerate() {
            let floor = if i == esc {
                ESCAPE_WEIGHT_FLOOR
            } else {
                SYMBOL_WEIGHT_FLOOR
            };
            *p = p.max(floor);
        }
        let mut lengths = huffman_lengths(&w);
        enforce_monotone(
            &mut lengths,
            &w,
            COEFF_SYMBOL_RANGE,
            out.last().map(|v| v.as_slice()),
        );
        out.push(lengths);
    }
    out
}

pub fn envelope_table_text() -> String {
    let table = HuffmanTable::canonical(ENVELOPE_DIFF_RANGE, &envelope_diff_lengths())
        .expect("envelope model yields a valid code");
    table.to_text(&format!(
        "envelope index differences, two-sided geometric model (ratio {ENVELOPE_GEOMETRIC_RATIO})\n\
         ESC is followed by the 7-bit raw index (i_env + 60)"
    ))
}

pub fn coefficient_table_text(m: usize, step: f64, lengths: &[u8]) -> String {
    let table =
        HuffmanTable::canonical(COEFF_SYMBOL_RANGE, lengths).expect("coefficient model yields a valid code");
    table.to_text(&format!(
        "quantizer m={m}, step {step:.12e}, discretised unit-variance Laplacian\n\
         ESC is followed by a 16-bit two's complement symbol"
    ))
}

const EMBEDDED_ENVELOPE: &str = include_str!("../tables/envelope_diff.txt");

const EMBEDDED_COEFFICIENTS: [&str; 24] = [
    include_str!("../tables/coef_01.txt"),
    include_str!("../tables/coef_02.txt"),
    include_str!("../tables/coef_03.txt"),
    include_str!("../tables/coef_04.txt"),
    include_str!("../tables/coef_05.txt"),
    include_str!("../tables/coef_06.txt"),
    include_str!("../tables/coef_07.txt"),
    include_str!("../tables/coef_08.txt"),
    include_str!("../tables/coef_09.txt"),
    include_str!("../tables/coef_10.txt"),
    include_str!("../tables/coef_11.txt"),
    include_str!("../tables/coef_12.txt"),
    include_str!("../tables/coef_13.txt"),
    include_str!("../tables/coef_14.txt"),
    include_str!("../tables/coef_15.txt"),
    include_str!("../tables/coef_16.txt"),
    include_str!("../tables/coef_17.txt"),
    include_str!("../tables/coef_18.txt"),
    include_str!("../tables/coef_19.txt"),
    include_str!("../tables/coef_20.txt"),
    include_str!("../tables/coef_21.txt"),
    include_str!("../tables/coef_22.txt"),
    include_str!("../tables/coef_23.txt"),
    include_str!("../tables/coef_24.txt"),
];

pub fn embedded_envelope_text() -> &'static str {
    EMBEDDED_ENVELOPE
}

pub fn embedded_coefficient_texts() -> &'static [&'static str] {
    &EMBEDDED_COEFFICIENTS
}

static ENVELOPE_TABLE: LazyLock<HuffmanTable> =
    LazyLock::new(|| HuffmanTable::parse(EMBEDDED_ENVELOPE).expect("embedded envelope table is valid"));

static COEFFICIENT_TABLES: LazyLock<Vec<HuffmanTable>> = LazyLock::new(|| {
    EMBEDDED_COEFFICIENTS
        .iter()
        .map(|t| HuffmanTable::parse(t).expect("embedded coefficient table is valid"))
        .collect()
});

pub fn envelope_table() -> &'static HuffmanTable {
    &ENVELOPE_TABLE
}

/// Embedded tables for the default ladder; index `m - 1`.
pub fn default_coefficient_tables() -> &'static [HuffmanTable] {
    &COEFFICIENT_TABLES
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff_quant::{ladder_step, QuantizerLadder};
    use crate::huffman::Symbol;

    #[test]
    fn laplacian_probs_sum_to_one() {
        for step in [0.01, 0.1, 0.5, 2.0] {
            let s: f64 = laplacian_symbol_probs(step, 31).iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "step {step}: {s}");
        }
    }

    #[test]
    fn next_symbol_bound() {
        assert_eq!(next_min_symbol(0), 0);
        assert_eq!(next_min_symbol(1), 1);
        assert_eq!(next_min_symbol(6), 7);
        assert_eq!(next_min_symbol(31), 36);
    }

    #[test]
    fn embedded_tables_match_their_models() {
        assert_eq!(embedded_envelope_text(), envelope_table_text());
        let steps: Vec<f64> = (1..=24).map(|m| ladder_step(0.5, m)).collect();
        let lengths = coefficient_lengths(&steps);
        for (i, text) in embedded_coefficient_texts().iter().enumerate() {
            assert_eq!(
                *text,
                coefficient_table_text(i + 1, steps[i], &lengths[i]),
                "m={}",
                i + 1
            );
        }
    }

    #[test]
    fn tables_are_valid_prefix_codes() {
        let t = envelope_table();
        assert!(t.kraft_sum() <= 1.0);
        let zero = t.len_of(Symbol::Value(0));
        assert!(t.symbols().all(|s| t.len_of(s) >= zero));
        for t in default_coefficient_tables() {
            assert!(t.kraft_sum() <= 1.0 + 1e-12);
            assert_eq!(t.range(), COEFF_SYMBOL_RANGE);
            for a in 1..=COEFF_SYMBOL_RANGE {
                assert_eq!(t.len_of(Symbol::Value(a)), t.len_of(Symbol::Value(-a)));
                assert!(t.len_of(Symbol::Value(a)) >= t.len_of(Symbol::Value(a - 1)));
            }
        }
    }

    #[test]
    fn coded_size_is_monotone_on_a_dense_grid() {
        let ladder = QuantizerLadder::default();
        // sweep values densely enough to hit every symbol boundary of every quantizer
        for i in 0..200_000 {
            let v = i as f64 * 2e-4;
            for m in 0..ladder.max_index() {
                let coarse = ladder.symbol_bits(ladder.quantize_value(v, m), m);
                let fine = ladder.symbol_bits(ladder.quantize_value(v, m + 1), m + 1);
                assert!(coarse <= fine, "v={v} m={m}");
                let coarse = ladder.symbol_bits(ladder.quantize_value(-v, m), m);
                let fine = ladder.symbol_bits(ladder.quantize_value(-v, m + 1), m + 1);
                assert!(coarse <= fine, "v=-{v} m={m}");
            }
        }
    }
}
