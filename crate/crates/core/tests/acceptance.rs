//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

mod common;

use std::time::Instant;

use common::{
    coloured_noise, expected_reconstruction, oracle_mdct, random_spectral_frame, rel_rms, reserialise, rng,
    scan_offset, serialised_bits,
};
use gwc::analysis::{noise_shaping_fit, Histogram};
use gwc::bitstream::{
    decode_stream, decode_stream_detailed, encode_frame, encode_stream, BitReader, BitWriter, CodecConfig,
    StreamHeader, VERSION,
};
use gwc::cli::{read_wav, write_wav};
use gwc::coeff_quant::{flatten, read_band, write_band, QuantizerLadder};
use gwc::envelope::{compute_envelope, decode_envelope, default_band_layout, encode_envelope, BandLayout};
use gwc::rate_control::{allocate, fit_envelope, offset_range};
use gwc::tables::envelope_table;
use gwc::toy_theory::{
    block_snr_improvement, decomposition_check, distribution_preservation_check, nll_bound_check,
    run_toy_experiment, CellGrid, DecompositionReport, DiscreteSource, ToyConfig,
};
use gwc::transform::{mdct_forward, mdct_inverse, FrameConfig, SignalBlock, SpectralFrame};
use rand::Rng;

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.pass &= ok;
        self.lines
            .push(format!("{} {detail}", if ok { "ok  " } else { "MISS" }));
    }
}

fn within_rel(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target
}

fn toy(delta: f64) -> ToyConfig {
    ToyConfig {
        delta,
        dim: 10,
        trials: 10_000,
        k_avg: 10,
        seed: 1,
        ..ToyConfig::default()
    }
}

fn table_one() -> Outcome {
    let mut o = Outcome::new();
    for (delta, targets) in [(0.5, [0.026, 0.011, 0.0056]), (1.0, [0.11, 0.068, 0.038])] {
        let r = run_toy_experiment(&toy(delta)).unwrap();
        for (stats, (target, tol)) in r.rows().iter().zip(targets.iter().zip([0.10, 0.15, 0.15])) {
            o.check(
                within_rel(stats.mse, *target, tol),
                format!(
                    "delta {delta} {:<11} {:.5} +- {:.5} (target {target}, +-{:.0}%)",
                    stats.method,
                    stats.mse,
                    stats.stderr,
                    tol * 100.0
                ),
            );
        }
        let tread = run_toy_experiment(&ToyConfig {
            grid: CellGrid::MidTread,
            ..toy(delta)
        })
        .unwrap();
        o.lines.push(format!(
            "info delta {delta} on the mid-tread grid: {:.5} / {:.5} / {:.5}",
            tread.midpoint.mse, tread.sampling.mse, tread.mean_of_k.mse
        ));
    }
    o
}

fn factor_two(d: &DecompositionReport) -> Outcome {
    let mut o = Outcome::new();
    let r = d.sampling_ratio;
    o.check(
        (1.85..=2.15).contains(&r.ratio),
        format!(
            "delta {}: E|x~-x|^2 / E|x-mu|^2 = {:.4} +- {:.4}, need [1.85, 2.15]",
            d.delta, r.ratio, r.stderr
        ),
    );
    o
}

fn additivity(reports: &[DecompositionReport]) -> Outcome {
    let mut o = Outcome::new();
    for d in reports {
        o.check(
            d.relative_residual < 0.05,
            format!(
                "delta {}: lhs {:.5}, terms {:.5} + {:.5}, relative residual {:.2}% (+- {:.2}%), need < 5%",
                d.delta,
                d.lhs.mse,
                d.term1.mse,
                d.term2.mse,
                100.0 * d.relative_residual,
                100.0 * d.residual_stderr
            ),
        );
    }
    o
}

fn likelihood_bound() -> Outcome {
    let mut o = Outcome::new();
    let s = DiscreteSource::default();
    let exact = nll_bound_check(&s, &s.true_conditional()).unwrap();
    o.check(
        exact.gap().abs() < 1e-12,
        format!("p_theta = p(.|y): gap {:.2e}", exact.gap()),
    );
    let mut rng = rng(401);
    let mut worst_gap = f64::INFINITY;
    let mut worst_kl_mismatch: f64 = 0.0;
    for _ in 0..100 {
        let r = nll_bound_check(&s, &s.random_conditional(&mut rng)).unwrap();
        worst_gap = worst_gap.min(r.gap());
        worst_kl_mismatch = worst_kl_mismatch.max((r.gap() - r.expected_kl).abs());
    }
    o.check(
        worst_gap >= 0.0 && worst_kl_mismatch < 1e-12,
        format!(
            "100 random models: smallest gap {worst_gap:.4} nats, |gap - E KL| <= {worst_kl_mismatch:.1e}"
        ),
    );
    o
}

fn mean_of_k(d: &DecompositionReport) -> Outcome {
    let mut o = Outcome::new();
    for k in [2, 5, 10] {
        let e = d.mean_of_k_ratios[k - 1];
        let target = 1.0 + 1.0 / k as f64;
        let z = e.z_score(target);
        o.check(
            z.abs() <= 3.0,
            format!(
                "k = {k:>2}: ratio {:.4} +- {:.4} vs {target:.4} ({z:+.2} SE)",
                e.ratio, e.stderr
            ),
        );
    }
    let blocks = block_snr_improvement(&d.records, 100, |t| t.sample_error, |t| t.mean_error_corrected);
    let h = Histogram::from_values(blocks, 0.25).unwrap();
    let centre = h.mean().unwrap();
    o.check(
        (centre + 3.0).abs() <= 0.5,
        format!(
            "single sample vs cell mean, {} blocks of 100 trials: centre {centre:+.2} dB, mode {:+.2} dB, need -3 +- 0.5",
            h.total(),
            h.mode().unwrap()
        ),
    );
    let blocks = block_snr_improvement(&d.records, 100, |t| t.mean_of_k_error[9], |t| t.sample_error);
    let h = Histogram::from_values(blocks, 0.25).unwrap();
    o.lines.push(format!(
        "info mean of 10 vs single sample: centre {:+.2} dB (10 log10(2/1.1) = {:+.2})",
        h.mean().unwrap(),
        10.0 * (2.0f64 / 1.1).log10()
    ));
    o
}

fn preservation() -> Outcome {
    let mut o = Outcome::new();
    let r = distribution_preservation_check(&toy(1.0)).unwrap();
    o.check(
        r.sampler_ks < r.critical_value,
        format!("sampler: KS {:.4} < {:.4}", r.sampler_ks, r.critical_value),
    );
    o.check(
        r.midpoint_ks > r.critical_value,
        format!("midpoint: KS {:.4} > {:.4}", r.midpoint_ks, r.critical_value),
    );
    o.check(
        r.mean_of_k_ks > r.critical_value,
        format!("mean of 10: KS {:.4} > {:.4}", r.mean_of_k_ks, r.critical_value),
    );
    o
}

fn perfect_reconstruction() -> Outcome {
    let mut o = Outcome::new();
    let cfg = FrameConfig::default();
    let mut rng = rng(701);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let len = 320 * rng.gen_range(1..50);
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let block = SignalBlock::new(x.clone()).unwrap();
        let y = mdct_inverse(&mdct_forward(&block, &cfg).unwrap(), &cfg).unwrap();
        worst = worst.max(rel_rms(y.samples(), &x));
    }
    o.check(
        worst < 1e-9,
        format!("100 random signals: worst relative RMS error {worst:.2e} (< 1e-9)"),
    );

    let x: Vec<f64> = (0..3200).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let fast = mdct_forward(&SignalBlock::new(x.clone()).unwrap(), &cfg).unwrap();
    let slow = oracle_mdct(&x);
    let diff = fast
        .iter()
        .zip(&slow)
        .flat_map(|(f, s)| f.coefficients.iter().zip(s).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    o.check(
        diff < 1e-10,
        format!("forward vs direct summation: max difference {diff:.2e} (< 1e-10)"),
    );
    o
}

fn round_trips(layout: &BandLayout, ladder: &QuantizerLadder) -> Outcome {
    let mut o = Outcome::new();
    let table = envelope_table();
    let mut rng = rng(801);
    let (mut env_ok, mut coef_ok, mut frame_ok) = (0, 0, 0);
    let frames: Vec<SpectralFrame> = (0..1000)
        .map(|t| random_spectral_frame(&mut rng, layout, t % 10))
        .collect();
    for f in &frames {
        let env = fit_envelope(&compute_envelope(f, layout), rng.gen_range(160..1280));
        let w = encode_envelope(&env, table);
        let mut r = BitReader::new(w.as_bytes());
        env_ok += (decode_envelope(&mut r, table, 20).ok() == Some(env.clone()) && r.position() == w.len())
            as usize;

        let flat = flatten(f, &env, layout).unwrap();
        let mut w = BitWriter::new();
        let mut sent = Vec::new();
        for band in layout.bands() {
            let m = rng.gen_range(0..=24);
            let symbols: Vec<i32> = flat.coefficients[band]
                .iter()
                .map(|&v| ladder.quantize_value(v, m))
                .collect();
            write_band(&symbols, m, ladder, &mut w);
            sent.push((m, symbols));
        }
        let mut r = BitReader::new(w.as_bytes());
        let back = sent
            .iter()
            .enumerate()
            .all(|(n, (m, s))| read_band(&mut r, layout.width(n), *m, ladder).ok().as_ref() == Some(s));
        coef_ok += (back && r.position() == w.len()) as usize;
    }
    for (chunk_index, chunk) in frames.chunks(10).enumerate() {
        let bitrate = 8_000 + 560 * chunk_index as u32;
        let config = CodecConfig::new(bitrate).unwrap();
        let frame_bits = config.frame_bits().unwrap();
        let header = StreamHeader {
            version: VERSION,
            sample_rate: 16_000,
            bitrate,
            num_frames: chunk.len() as u32,
            band_layout_id: 0,
        };
        let mut bytes = header.to_bytes().to_vec();
        let mut sent = Vec::new();
        for f in chunk {
            let (w, report) = encode_frame(f, layout, ladder, frame_bits).unwrap();
            bytes.extend_from_slice(w.as_bytes());
            sent.push((w.into_bytes(), report));
        }
        let d = decode_stream_detailed(&bytes).unwrap();
        for (t, (chunk_bytes, report)) in sent.iter().enumerate() {
            let expected = expected_reconstruction(
                &chunk[t],
                &report.envelope,
                report.allocation.i_offset,
                layout,
                ladder,
            );
            let same = d.envelopes[t] == report.envelope
                && d.offsets[t] == report.allocation.i_offset
                && d.frames[t].coefficients == expected.coefficients
                && reserialise(&d.frames[t], &d.envelopes[t], d.offsets[t], frame_bits) == *chunk_bytes;
            frame_ok += same as usize;
        }
    }
    o.check(
        env_ok == 1000,
        format!("envelope path: {env_ok}/1000 frames bit-exact"),
    );
    o.check(
        coef_ok == 1000,
        format!("coefficient path: {coef_ok}/1000 frames bit-exact"),
    );
    o.check(
        frame_ok == 1000,
        format!("full bitstream, 8 to 63.4 kb/s: {frame_ok}/1000 frames bit-exact"),
    );

    let data = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let input = SignalBlock::new(read_wav(&data.join("golden_input.wav")).unwrap()).unwrap();
    let bytes = encode_stream(&input, &CodecConfig::new(16_000).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("decoded.wav");
    write_wav(&wav, decode_stream(&bytes).unwrap().samples()).unwrap();
    let same_stream = bytes == std::fs::read(data.join("golden_16k.gwc")).unwrap();
    let same_wav =
        std::fs::read(&wav).unwrap() == std::fs::read(data.join("golden_16k_decoded.wav")).unwrap();
    o.check(
        same_stream && same_wav,
        format!("golden vector: stream identical {same_stream}, decoded WAV identical {same_wav}"),
    );
    o
}

fn rate_control(layout: &BandLayout, ladder: &QuantizerLadder) -> Outcome {
    let mut o = Outcome::new();
    let mut rng = rng(901);
    let (mut equal, mut within, mut tight, mut monotone) = (0, 0, 0, 0);
    for t in 0..1000 {
        let f = random_spectral_frame(&mut rng, layout, t);
        let flat = flatten(&f, &compute_envelope(&f, layout), layout).unwrap();
        let budget = rng.gen_range(0..1200);
        let a = allocate(&flat, layout, ladder, budget);
        equal += (a.i_offset == scan_offset(&flat, layout, ladder, budget)) as usize;
        within +=
            (serialised_bits(&flat, layout, ladder, a.i_offset) <= budget && a.bits_used <= budget) as usize;
        let at_bound = a.i_offset == offset_range(flat.envelope(), ladder).0;
        tight += (at_bound || serialised_bits(&flat, layout, ladder, a.i_offset - 1) > budget) as usize;
        let b = allocate(&flat, layout, ladder, budget + rng.gen_range(1..400));
        monotone += (b.i_offset <= a.i_offset && b.m.iter().zip(&a.m).all(|(x, y)| x >= y)) as usize;
    }
    o.check(
        equal == 1000,
        format!("binary search equals exhaustive scan: {equal}/1000"),
    );
    o.check(within == 1000, format!("bits_used <= budget: {within}/1000"));
    o.check(
        tight == 1000,
        format!("offset - 1 infeasible unless at the bound: {tight}/1000"),
    );
    o.check(
        monotone == 1000,
        format!("larger budget never coarsens a band: {monotone}/1000"),
    );
    o
}

fn noise_shaping(layout: &BandLayout, ladder: &QuantizerLadder) -> Outcome {
    let mut o = Outcome::new();
    let signal = SignalBlock::new(coloured_noise(20 * 16_000, 5)).unwrap();
    for bitrate in [16_000, 32_000] {
        let config = CodecConfig::new(bitrate).unwrap();
        let decoded = decode_stream_detailed(&encode_stream(&signal, &config).unwrap()).unwrap();
        let reference = mdct_forward(&signal, &config.frame).unwrap();
        let fit = noise_shaping_fit(&reference, &decoded, layout, ladder.max_index()).unwrap();
        o.check(
            (fit.slope - 0.5).abs() <= 0.1,
            format!(
                "{} kb/s: band SNR vs envelope slope {:.3} over {} band-frames (0.5 +- 0.1)",
                bitrate / 1000,
                fit.slope,
                fit.points.len()
            ),
        );
    }
    let spacing: Vec<f64> = (2..=ladder.max_index())
        .map(|m| 20.0 * (ladder.step(m - 1).unwrap() / ladder.step(m).unwrap()).log10())
        .collect();
    let (lo, hi) = spacing
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &s| (a.min(s), b.max(s)));
    o.check(
        (lo - 1.5).abs() <= 0.3 && (hi - 1.5).abs() <= 0.3,
        format!("ladder spacing {lo:.3} to {hi:.3} dB per step (1.5 +- 0.3)"),
    );
    o
}

fn main() {
    let layout = default_band_layout();
    let ladder = QuantizerLadder::default();
    let start = Instant::now();

    let decompositions: Vec<DecompositionReport> = [0.25, 0.5, 1.0]
        .into_iter()
        .map(|delta| {
            decomposition_check(&ToyConfig {
                seed: 7,
                ..toy(delta)
            })
            .unwrap()
        })
        .collect();

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (
            "toy distortion table (midpoint / sampling / mean of 10)",
            Box::new(table_one),
        ),
        (
            "factor of two between sampling and cell-mean distortion",
            Box::new(|| factor_two(&decompositions[1])),
        ),
        (
            "two-term decomposition of the sampling distortion",
            Box::new(|| additivity(&decompositions)),
        ),
        (
            "likelihood bound by exact enumeration",
            Box::new(likelihood_bound),
        ),
        (
            "mean-of-k law and the -3 dB histogram",
            Box::new(|| mean_of_k(&decompositions[1])),
        ),
        ("distribution preservation (KS at 1%)", Box::new(preservation)),
        ("MDCT perfect reconstruction", Box::new(perfect_reconstruction)),
        (
            "entropy-coding round trips and golden vector",
            Box::new(|| round_trips(&layout, &ladder)),
        ),
        ("rate control", Box::new(|| rate_control(&layout, &ladder))),
        (
            "noise shaping and quantizer spacing",
            Box::new(|| noise_shaping(&layout, &ladder)),
        ),
    ];

    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        failures += !outcome.pass as usize;
        println!(
            "{} [{}] {name} ({:.1} s)",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64()
        );
        for line in &outcome.lines {
            println!("       {line}");
        }
    }
    println!(
        "INFO [11] listening-test scores and the neural decoder are not reproduced here; \
         their measurable content is covered by [2], [5] and [10]"
    );
    println!(
        "{} of 10 criteria passed in {:.1} s",
        10 - failures,
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
