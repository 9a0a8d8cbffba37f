//! Objective measurements on coded signals: per-band SNR, SNR-difference
//! histograms, MDCT-domain spectra and envelope-weighted distortion.
//!
//! Everything is measured on the codec's own MDCT frames so bands line up
//! with the coder's band layout.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::bitstream::DecodedStream;
use crate::envelope::{envelope_gain, BandLayout, Envelope};
use crate::error::{Error, Result};
use crate::rate_control::quantizer_indices;
use crate::transform::{mdct_forward, FrameConfig, SignalBlock, SpectralFrame};

/// Band energies below this are not measured.
pub const ENERGY_FLOOR: f64 = 1e-12;
/// Upper limit on reported SNRs, reached by error-free bands.
pub const SNR_CAP_DB: f64 = 99.0;

fn snr_db(signal: f64, error: f64) -> Option<f64> {
    if signal < ENERGY_FLOOR {
        return None;
    }
    if error <= 0.0 {
        return Some(SNR_CAP_DB);
    }
    Some((10.0 * (signal / error).log10()).min(SNR_CAP_DB))
}

fn check_lengths(a: &SignalBlock, b: &SignalBlock) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "signals differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Diagonal weighting of spectral errors, one weight per band.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightingForm {
    weights: Vec<f64>,
}

impl WeightingForm {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::invalid("weights must be finite and non-negative"));
        }
        Ok(WeightingForm { weights })
    }

    pub fn unit(bands: usize) -> Self {
        WeightingForm {
            weights: vec![1.0; bands],
        }
    }

    /// Inverse of the quantized band variance: errors are measured relative
    /// to the coded envelope, as in the flattened domain.
    pub fn from_envelope(env: &Envelope) -> Result<Self> {
        let weights = env
            .indices()
            .iter()
            .map(|&i| envelope_gain(i).map(|g| 1.0 / (g * g)))
            .collect::<Result<_>>()?;
        Ok(WeightingForm { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sum_k w(band(k)) (a_k - b_k)^2` over one frame.
    pub fn apply(&self, a: &[f64], b: &[f64], layout: &BandLayout) -> Result<f64> {
        if self.weights.len() != layout.num_bands() {
            return Err(Error::invalid("weighting form does not match the band layout"));
        }
        if a.len() != layout.num_bins() || b.len() != layout.num_bins() {
            return Err(Error::invalid("frame length does not match the band layout"));
        }
        Ok(layout
            .bands()
            .zip(&self.weights)
            .map(|(r, w)| {
                w * a[r.clone()]
                    .iter()
                    .zip(&b[r])
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
            })
            .sum())
    }
}

/// Total weighted squared error over aligned frame sequences. `forms` holds
/// either one form shared by all frames or one per frame.
pub fn weighted_error_energy(
    reference: &[SpectralFrame],
    test: &[SpectralFrame],
    forms: &[WeightingForm],
    layout: &BandLayout,
) -> Result<f64> {
    if reference.len() != test.len() {
        return Err(Error::invalid("frame counts differ"));
    }
    if forms.len() != 1 && forms.len() != reference.len() {
        return Err(Error::invalid("need one weighting form or one per frame"));
    }
    reference
        .iter()
        .zip(test)
        .enumerate()
        .map(|(f, (r, t))| forms[f.min(forms.len() - 1)].apply(&r.coefficients, &t.coefficients, layout))
        .sum()
}

/// Weighted squared error per signal sample. With unit weights this is the
/// plain time-domain mean squared error.
pub fn weighted_mse(
    reference: &SignalBlock,
    test: &SignalBlock,
    forms: &[WeightingForm],
    layout: &BandLayout,
    cfg: &FrameConfig,
) -> Result<f64> {
    check_lengths(reference, test)?;
    let r = mdct_forward(reference, cfg)?;
    let t = mdct_forward(test, cfg)?;
    Ok(weighted_error_energy(&r, &t, forms, layout)? / reference.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandSnrReport {
    /// SNR per band over all frames (energy ratio of sums).
    pub snr_db: Vec<Option<f64>>,
    pub signal_energy: Vec<f64>,
    pub error_energy: Vec<f64>,
    /// `per_frame[f][n]`, `None` where the band is below the energy floor.
    pub per_frame: Vec<Vec<Option<f64>>>,
}

impl BandSnrReport {
    pub fn frames(&self) -> usize {
        self.per_frame.len()
    }

    pub fn num_bands(&self) -> usize {
        self.snr_db.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("band,snr_db\n");
        for (n, s) in self.snr_db.iter().enumerate() {
            match s {
                Some(v) => writeln!(out, "{n},{v:.4}"),
                None => writeln!(out, "{n},nan"),
            }
            .expect("write to string");
        }
        out
    }
}

/// Per-band SNR between aligned MDCT frame sequences.
pub fn band_snr_frames(
    reference: &[SpectralFrame],
    test: &[SpectralFrame],
    layout: &BandLayout,
) -> Result<BandSnrReport> {
    if reference.len() != test.len() {
        return Err(Error::invalid("frame counts differ"));
    }
    let bands = layout.num_bands();
    let mut signal_energy = vec![0.0; bands];
    let mut error_energy = vec![0.0; bands];
    let mut per_frame = Vec::with_capacity(reference.len());
    for (r, t) in reference.iter().zip(test) {
        if r.len() != layout.num_bins() || t.len() != layout.num_bins() {
            return Err(Error::invalid("frame length does not match the band layout"));
        }
        let row = layout
            .bands()
            .enumerate()
            .map(|(n, range)| {
                let s: f64 = r.coefficients[range.clone()].iter().map(|v| v * v).sum();
                let e: f64 = r.coefficients[range.clone()]
                    .iter()
                    .zip(&t.coefficients[range])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                signal_energy[n] += s;
                error_energy[n] += e;
                snr_db(s, e)
            })
            .collect();
        per_frame.push(row);
    }
    let snr_db = signal_energy
        .iter()
        .zip(&error_energy)
        .map(|(&s, &e)| snr_db(s, e))
        .collect();
    Ok(BandSnrReport {
        snr_db,
        signal_energy,
        error_energy,
        per_frame,
    })
}

/// Per-band SNR of `test` against `reference`, measured in the MDCT domain.
/// The reference sets the signal energy, so swapping the arguments changes
/// the result even though the error energy is the same.
pub fn band_snr(
    reference: &SignalBlock,
    test: &SignalBlock,
    layout: &BandLayout,
    cfg: &FrameConfig,
) -> Result<BandSnrReport> {
    check_lengths(reference, test)?;
    band_snr_frames(&mdct_forward(reference, cfg)?, &mdct_forward(test, cfg)?, layout)
}

/// Fixed-width histogram. Bin `j` covers `[(j - 1/2) w, (j + 1/2) w)`, so a
/// value of exactly zero sits in the centre of bin zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    bin_width: f64,
    counts: BTreeMap<i64, usize>,
    sum: f64,
}

impl Histogram {
    pub fn from_values(values: impl IntoIterator<Item = f64>, bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::invalid("bin width must be positive"));
        }
        let mut h = Histogram {
            bin_width,
            counts: BTreeMap::new(),
            sum: 0.0,
        };
        for v in values {
            if !v.is_finite() {
                return Err(Error::invalid("histogram values must be finite"));
            }
            *h.counts.entry((v / bin_width).round() as i64).or_default() += 1;
            h.sum += v;
        }
        Ok(h)
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// `(bin centre, count)` for every occupied bin, ascending.
    pub fn bins(&self) -> Vec<(f64, usize)> {
        self.counts
            .iter()
            .map(|(&j, &c)| (j as f64 * self.bin_width, c))
            .collect()
    }

    /// Centre of the fullest bin (lowest centre on ties).
    pub fn mode(&self) -> Option<f64> {
        self.bins()
            .into_iter()
            .fold(None, |best: Option<(f64, usize)>, (x, c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((x, c)),
            })
            .map(|(x, _)| x)
    }

    pub fn mean(&self) -> Option<f64> {
        let n = self.total();
        (n > 0).then(|| self.sum / n as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_center_db,count\n");
        for (x, c) in self.bins() {
            writeln!(out, "{x:.4},{c}").expect("write to string");
        }
        out
    }
}

/// Histogram of `SNR(a) - SNR(b)` over every (frame, band) pair measured in
/// both reports.
pub fn snr_improvement_histogram(
    a: &BandSnrReport,
    b: &BandSnrReport,
    bin_width_db: f64,
) -> Result<Histogram> {
    if a.frames() != b.frames() || a.num_bands() != b.num_bands() {
        return Err(Error::invalid("reports have different band structure"));
    }
    let diffs = a
        .per_frame
        .iter()
        .zip(&b.per_frame)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).filter_map(|(x, y)| Some((*x)? - (*y)?)));
    Histogram::from_values(diffs.collect::<Vec<_>>(), bin_width_db)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEstimate {
    pub freq_hz: Vec<f64>,
    pub power_db: Vec<f64>,
    pub frames: usize,
}

impl SpectrumEstimate {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,power_db\n");
        for (f, p) in self.freq_hz.iter().zip(&self.power_db) {
            writeln!(out, "{f:.2},{p:.4}").expect("write to string");
        }
        out
    }

    /// Mean power in dB over the bins of each band (dB of the mean power).
    pub fn band_power_db(&self, layout: &BandLayout) -> Vec<f64> {
        layout
            .bands()
            .map(|r| {
                let n = r.len() as f64;
                let p: f64 = self.power_db[r].iter().map(|d| 10f64.powf(d / 10.0)).sum();
                10.0 * (p / n).log10()
            })
            .collect()
    }
}

fn spectrum_of_frames(frames: &[SpectralFrame], cfg: &FrameConfig) -> SpectrumEstimate {
    let n = cfg.stride();
    let mut power = vec![0.0; n];
    for f in frames {
        for (p, c) in power.iter_mut().zip(&f.coefficients) {
            *p += c * c;
        }
    }
    SpectrumEstimate {
        freq_hz: (0..n).map(|k| cfg.bin_frequency(k)).collect(),
        power_db: power
            .iter()
            .map(|p| 10.0 * (p / frames.len() as f64).max(ENERGY_FLOOR).log10())
            .collect(),
        frames: frames.len(),
    }
}

/// Squared MDCT coefficients averaged over frames, in dB, one row per bin.
pub fn power_spectrum(signal: &SignalBlock, cfg: &FrameConfig) -> Result<SpectrumEstimate> {
    if signal.len() < cfg.stride() {
        return Err(Error::invalid("signal is shorter than one frame"));
    }
    Ok(spectrum_of_frames(&mdct_forward(signal, cfg)?, cfg))
}

/// Power spectrum of `test - reference`.
pub fn error_spectrum(
    reference: &SignalBlock,
    test: &SignalBlock,
    cfg: &FrameConfig,
) -> Result<SpectrumEstimate> {
    check_lengths(reference, test)?;
    if reference.len() < cfg.stride() {
        return Err(Error::invalid("signal is shorter than one frame"));
    }
    let diff: Vec<f64> = reference
        .samples()
        .iter()
        .zip(test.samples())
        .map(|(a, b)| b - a)
        .collect();
    Ok(spectrum_of_frames(
        &mdct_forward(&SignalBlock::new(diff)?, cfg)?,
        cfg,
    ))
}

/// Least-squares slope of band SNR against band envelope level, both in dB,
/// after removing each frame's mean. Only bands whose quantizer index is
/// strictly inside the ladder are used: the bottom of the ladder means the
/// band was not coded and the top means it hit the finest quantizer.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseShapingFit {
    pub slope: f64,
    /// `(frame, band, envelope_db, snr_db)` of every point used.
    pub points: Vec<(usize, usize, f64, f64)>,
}

pub fn noise_shaping_fit(
    reference: &[SpectralFrame],
    decoded: &DecodedStream,
    layout: &BandLayout,
    max_index: usize,
) -> Result<NoiseShapingFit> {
    let report = band_snr_frames(reference, &decoded.frames, layout)?;
    let mut points = Vec::new();
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (f, row) in report.per_frame.iter().enumerate() {
        let env = &decoded.envelopes[f];
        let m = quantizer_indices(env, decoded.offsets[f], max_index);
        let frame_points: Vec<(usize, f64, f64)> = (0..layout.num_bands())
            .filter(|&n| m[n] > 0 && m[n] < max_index)
            .filter_map(|n| Some((n, env.db(n), row[n]?)))
            .collect();
        if frame_points.len() < 2 {
            continue;
        }
        let k = frame_points.len() as f64;
        let mx = frame_points.iter().map(|p| p.1).sum::<f64>() / k;
        let my = frame_points.iter().map(|p| p.2).sum::<f64>() / k;
        for &(n, x, y) in &frame_points {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx).powi(2);
            points.push((f, n, x, y));
        }
    }
    if sxx == 0.0 {
        return Err(Error::invalid(
            "no frame has two interior bands with distinct levels",
        ));
    }
    Ok(NoiseShapingFit {
        slope: sxy / sxx,
        points,
    })
}
