//! Band layout, spectral envelope estimation and its differential coding.

use crate::bitstream::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::huffman::{HuffmanTable, Symbol};
use crate::transform::SpectralFrame;

pub const ENVELOPE_MIN: i32 = -60;
pub const ENVELOPE_MAX: i32 = 60;
/// Envelope quantization step in dB.
pub const ENVELOPE_STEP_DB: f64 = 3.0;
pub const VARIANCE_FLOOR: f64 = 1e-10;
/// Width of the raw index field (first band and escapes).
pub const RAW_INDEX_BITS: u32 = 7;

const DEFAULT_WIDTHS: [usize; 20] = [
    4, 4, 4, 4, 8, 8, 8, 8, 12, 12, 16, 16, 20, 20, 24, 24, 28, 32, 32, 36,
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BandLayout {
    edges: Vec<usize>,
}

impl BandLayout {
    pub fn from_edges(edges: Vec<usize>) -> Result<Self> {
        if edges.len() < 2 || edges[0] != 0 {
            return Err(Error::invalid("band edges must start at 0 and define a band"));
        }
        let widths: Vec<usize> = edges.windows(2).map(|w| w[1].wrapping_sub(w[0])).collect();
        if widths.iter().any(|&w| w == 0 || w > edges[edges.len() - 1]) {
            return Err(Error::invalid("band edges must be strictly increasing"));
        }
        if widths.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("band widths must not decrease with frequency"));
        }
        Ok(BandLayout { edges })
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn num_bands(&self) -> usize {
        self.edges.len() - 1
    }

    /// Number of coefficients covered.
    pub fn num_bins(&self) -> usize {
        self.edges[self.edges.len() - 1]
    }

    pub fn band(&self, n: usize) -> std::ops::Range<usize> {
        self.edges[n]..self.edges[n + 1]
    }

    pub fn width(&self, n: usize) -> usize {
        self.edges[n + 1] - self.edges[n]
    }

    pub fn bands(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        self.edges.windows(2).map(|w| w[0]..w[1])
    }

    pub fn band_of(&self, bin: usize) -> Option<usize> {
        if bin >= self.num_bins() {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= bin) - 1)
    }
}

/// The fixed 20-band layout over 320 bins. Its stream identifier is 0.
pub fn default_band_layout() -> BandLayout {
    let mut edges = vec![0];
    for w in DEFAULT_WIDTHS {
        edges.push(edges[edges.len() - 1] + w);
    }
    BandLayout::from_edges(edges).expect("default layout is valid")
}

/// Quantized per-band log variance, one index per band in 3 dB units.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Envelope {
    indices: Vec<i32>,
}

impl Envelope {
    pub fn new(indices: Vec<i32>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("envelope has no bands"));
        }
        if let Some(i) = indices
            .iter()
            .find(|i| !(ENVELOPE_MIN..=ENVELOPE_MAX).contains(*i))
        {
            return Err(Error::invalid(format!("envelope index {i} out of range")));
        }
        Ok(Envelope { indices })
    }

    pub fn indices(&self) -> &[i32] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn min(&self) -> i32 {
        *self.indices.iter().min().unwrap()
    }

    pub fn max(&self) -> i32 {
        *self.indices.iter().max().unwrap()
    }

    /// Band envelope in dB (`3 * i_env`).
    pub fn db(&self, n: usize) -> f64 {
        ENVELOPE_STEP_DB * self.indices[n] as f64
    }

    pub fn negated(&self) -> Envelope {
        Envelope {
            indices: self.indices.iter().map(|i| -i).collect(),
        }
    }

    /// Copy with every difference limited to the directly codable range.
    pub fn slew_limited(&self, max_step: i32) -> Envelope {
        let mut out = Vec::with_capacity(self.indices.len());
        let mut prev = self.indices[0];
        out.push(prev);
        for &i in &self.indices[1..] {
            prev = i.clamp(prev - max_step, prev + max_step);
            out.push(prev);
        }
        Envelope { indices: out }
    }

    /// Flat envelope at the rounded mean index.
    pub fn flattened_to_mean(&self) -> Envelope {
        let mean = self.indices.iter().sum::<i32>() as f64 / self.indices.len() as f64;
        let level = (mean.round() as i32).clamp(ENVELOPE_MIN, ENVELOPE_MAX);
        Envelope {
            indices: vec![level; self.indices.len()],
        }
    }
}

/// Quantized envelope index for a band variance.
pub fn envelope_index(variance: f64) -> i32 {
    let db = 10.0 * variance.max(VARIANCE_FLOOR).log10();
    ((db / ENVELOPE_STEP_DB).round() as i32).clamp(ENVELOPE_MIN, ENVELOPE_MAX)
}

pub fn band_variances(frame: &SpectralFrame, layout: &BandLayout) -> Vec<f64> {
    layout
        .bands()
        .map(|b| {
            let w = b.len() as f64;
            frame.coefficients[b].iter().map(|c| c * c).sum::<f64>() / w
        })
        .collect()
}

pub fn compute_envelope(frame: &SpectralFrame, layout: &BandLayout) -> Envelope {
    assert_eq!(frame.len(), layout.num_bins(), "frame/layout size mismatch");
    Envelope {
        indices: band_variances(frame, layout)
            .into_iter()
            .map(envelope_index)
            .collect(),
    }
}

/// Amplitude gain for an envelope index: `10^(3 i / 20)`.
pub fn envelope_gain(i: i32) -> Result<f64> {
    if !(ENVELOPE_MIN..=ENVELOPE_MAX).contains(&i) {
        return Err(Error::invalid(format!("envelope index {i} out of range")));
    }
    Ok(10f64.powf(ENVELOPE_STEP_DB * i as f64 / 20.0))
}

fn raw_index(i: i32) -> u32 {
    (i - ENVELOPE_MIN) as u32
}

fn from_raw(raw: u32) -> Result<i32> {
    let i = raw as i32 + ENVELOPE_MIN;
    if i > ENVELOPE_MAX {
        return Err(Error::corrupt(format!("envelope index {i} out of range")));
    }
    Ok(i)
}

pub fn write_envelope(env: &Envelope, table: &HuffmanTable, w: &mut BitWriter) {
    let idx = env.indices();
    w.write(raw_index(idx[0]), RAW_INDEX_BITS);
    for pair in idx.windows(2) {
        match table.symbol_for(pair[1] - pair[0]) {
            Symbol::Escape => {
                table.write(Symbol::Escape, w);
                w.write(raw_index(pair[1]), RAW_INDEX_BITS);
            }
            sym => table.write(sym, w),
        }
    }
}

/// Exact size in bits of the coded envelope.
pub fn envelope_bits(env: &Envelope, table: &HuffmanTable) -> usize {
    let idx = env.indices();
    RAW_INDEX_BITS as usize
        + idx
            .windows(2)
            .map(|p| match table.symbol_for(p[1] - p[0]) {
                Symbol::Escape => (table.len_of(Symbol::Escape) + RAW_INDEX_BITS) as usize,
                sym => table.len_of(sym) as usize,
            })
            .sum::<usize>()
}

pub fn encode_envelope(env: &Envelope, table: &HuffmanTable) -> BitWriter {
    let mut w = BitWriter::new();
    write_envelope(env, table, &mut w);
    w
}

pub fn decode_envelope(r: &mut BitReader<'_>, table: &HuffmanTable, bands: usize) -> Result<Envelope> {
    if bands == 0 {
        return Err(Error::invalid("envelope has no bands"));
    }
    let mut indices = Vec::with_capacity(bands);
    indices.push(from_raw(r.read(RAW_INDEX_BITS)?)?);
    while indices.len() < bands {
        let prev = indices[indices.len() - 1];
        let next = match table.read(r)? {
            Symbol::Escape => from_raw(r.read(RAW_INDEX_BITS)?)?,
            Symbol::Value(d) => prev + d,
        };
        if !(ENVELOPE_MIN..=ENVELOPE_MAX).contains(&next) {
            return Err(Error::corrupt(format!("envelope index {next} out of range")));
        }
        indices.push(next);
    }
    Ok(Envelope { indices })
}
