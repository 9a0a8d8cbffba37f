//! Framing and the MDCT analysis/synthesis pair.
//!
//! The transform is the orthonormal MDCT with a sine window, so the lapped
//! transform as a whole is orthogonal: overlap-adding the inverse of every
//! frame reproduces the input exactly and coefficient energy equals signal
//! energy. The DCT-IV core is evaluated with a half-length complex FFT.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlannerScalar};

use crate::error::{Error, Result};

pub const SAMPLE_RATE: u32 = 16_000;
pub const STRIDE: usize = 320;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameConfig {
    sample_rate: u32,
    stride: usize,
}

impl FrameConfig {
    pub fn new(sample_rate: u32, stride: usize) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        if stride == 0 || stride % 4 != 0 {
            return Err(Error::InvalidConfig(format!(
                "stride must be a positive multiple of 4, got {stride}"
            )));
        }
        Ok(FrameConfig { sample_rate, stride })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn window_length(&self) -> usize {
        2 * self.stride
    }

    /// Centre frequency of MDCT bin `k` in Hz.
    pub fn bin_frequency(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.sample_rate as f64 / (2.0 * self.stride as f64)
    }
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            sample_rate: SAMPLE_RATE,
            stride: STRIDE,
        }
    }
}

/// A block of time-domain samples (input, codec output or sampled output).
#[derive(Clone, Debug, PartialEq)]
pub struct SignalBlock {
    samples: Vec<f64>,
}

impl SignalBlock {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("empty signal"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(SignalBlock { samples })
    }

    /// Builds a block zero-extended to the next multiple of `stride`.
    pub fn padded(mut samples: Vec<f64>, stride: usize) -> Result<Self> {
        let rem = samples.len() % stride;
        if rem != 0 || samples.is_empty() {
            samples.resize(samples.len() + stride - rem, 0.0);
        }
        Self::new(samples)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFrame {
    pub coefficients: Vec<f64>,
    pub frame_index: usize,
}

impl SpectralFrame {
    pub fn new(coefficients: Vec<f64>, frame_index: usize) -> Self {
        SpectralFrame {
            coefficients,
            frame_index,
        }
    }

    pub fn zeros(len: usize, frame_index: usize) -> Self {
        Self::new(vec![0.0; len], frame_index)
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// Sine window of length `2 * stride`.
pub fn sine_window(stride: usize) -> Vec<f64> {
    let len = 2 * stride;
    (0..len)
        .map(|n| (PI * (n as f64 + 0.5) / len as f64).sin())
        .collect()
}

/// Single-frame MDCT kernel with precomputed window and twiddles.
pub struct Mdct {
    n: usize,
    window: Vec<f64>,
    pre: Vec<Complex<f64>>,
    post: Vec<Complex<f64>>,
    fft: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl Mdct {
    pub fn new(cfg: &FrameConfig) -> Self {
        let n = cfg.stride();
        let half = n / 2;
        // The scalar planner keeps the operation order identical on every
        // target, which the bit-exact stream relies on.
        let fft = FftPlannerScalar::new().plan_fft_forward(half);
        let pre = (0..half)
            .map(|i| Complex::from_polar(1.0, -PI * (i as f64 + 0.25) / n as f64))
            .collect();
        let post = (0..half)
            .map(|i| Complex::from_polar(1.0, -PI * i as f64 / n as f64))
            .collect();
        Mdct {
            n,
            window: sine_window(n),
            pre,
            post,
            fft,
            scale: (2.0 / n as f64).sqrt(),
        }
    }

    pub fn stride(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    // Unnormalised DCT-IV: X[k] = sum_n u[n] cos(pi/N (n + 1/2)(k + 1/2)).
    fn dct4(&self, input: &[f64], out: &mut [f64]) {
        let n = self.n;
        let half = n / 2;
        let mut buf: Vec<Complex<f64>> = (0..half)
            .map(|i| Complex::new(input[2 * i], input[n - 1 - 2 * i]) * self.pre[i])
            .collect();
        self.fft.process(&mut buf);
        for (i, (v, tw)) in buf.iter().zip(&self.post).enumerate() {
            let y = v * tw;
            out[2 * i] = y.re;
            out[n - 1 - 2 * i] = -y.im;
        }
    }

    /// Transforms one window of `2 * stride` samples (the window is applied here).
    pub fn forward(&self, block: &[f64], out: &mut [f64]) {
        let n = self.n;
        let h = n / 2;
        debug_assert_eq!(block.len(), 2 * n);
        let w = &self.window;
        let z = |i: usize| block[i] * w[i];
        let mut folded = vec![0.0; n];
        for i in 0..h {
            // (-c_r - d, a - b_r) with a,b,c,d the quarters of the windowed block
            folded[i] = -z(n + h - 1 - i) - z(n + h + i);
            folded[h + i] = z(i) - z(n - 1 - i);
        }
        self.dct4(&folded, out);
        for v in out.iter_mut() {
            *v *= self.scale;
        }
    }

    /// Inverse of one frame: `2 * stride` windowed samples ready for overlap-add.
    pub fn inverse(&self, coefficients: &[f64], out: &mut [f64]) {
        let n = self.n;
        let h = n / 2;
        debug_assert_eq!(out.len(), 2 * n);
        let mut u = vec![0.0; n];
        self.dct4(coefficients, &mut u);
        for i in 0..h {
            out[i] = u[h + i];
            out[h + i] = -u[n - 1 - i];
            out[n + i] = -u[h - 1 - i];
            out[n + h + i] = -u[i];
        }
        for (v, w) in out.iter_mut().zip(&self.window) {
            *v *= w * self.scale;
        }
    }
}

/// Number of MDCT frames produced for a signal of `len` samples.
pub fn frame_count(len: usize, stride: usize) -> usize {
    len / stride + 1
}

pub fn mdct_forward(signal: &SignalBlock, cfg: &FrameConfig) -> Result<Vec<SpectralFrame>> {
    let n = cfg.stride();
    if signal.is_empty() {
        return Err(Error::invalid("empty signal"));
    }
    if signal.len() % n != 0 {
        return Err(Error::invalid(format!(
            "signal length {} is not a multiple of the stride {n}",
            signal.len()
        )));
    }
    let mdct = Mdct::new(cfg);
    let mut padded = vec![0.0; signal.len() + 2 * n];
    padded[n..n + signal.len()].copy_from_slice(signal.samples());

    Ok(padded
        .windows(2 * n)
        .step_by(n)
        .enumerate()
        .map(|(t, block)| {
            let mut coefficients = vec![0.0; n];
            mdct.forward(block, &mut coefficients);
            SpectralFrame::new(coefficients, t)
        })
        .collect())
}

pub fn mdct_inverse(frames: &[SpectralFrame], cfg: &FrameConfig) -> Result<SignalBlock> {
    let n = cfg.stride();
    if frames.len() < 2 {
        return Err(Error::invalid("need at least two frames to synthesise a block"));
    }
    if let Some(f) = frames.iter().find(|f| f.len() != n) {
        return Err(Error::invalid(format!(
            "frame {} has {} coefficients, expected {n}",
            f.frame_index,
            f.len()
        )));
    }
    let mdct = Mdct::new(cfg);
    let mut acc = vec![0.0; (frames.len() + 1) * n];
    let mut tmp = vec![0.0; 2 * n];
    for (t, frame) in frames.iter().enumerate() {
        mdct.inverse(&frame.coefficients, &mut tmp);
        for (a, v) in acc[t * n..t * n + 2 * n].iter_mut().zip(&tmp) {
            *a += v;
        }
    }
    let end = acc.len() - n;
    SignalBlock::new(acc[n..end].to_vec())
}
