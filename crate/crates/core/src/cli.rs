//! Command-line front end: WAV encode/decode, toy experiments and analysis
//! CSVs. Exit status 0 on success, 2 for usage or format problems, 3 for
//! I/O failures and 4 for corrupt streams.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis::{band_snr, error_spectrum, power_spectrum, snr_improvement_histogram};
use crate::bitstream::{decode_stream, encode_stream, CodecConfig};
use crate::envelope::default_band_layout;
use crate::error::Error;
use crate::toy_theory::{decomposition_check, run_toy_experiment, CellGrid, Proposal, ToyConfig, CSV_HEADER};
use crate::transform::{FrameConfig, SignalBlock, SAMPLE_RATE, STRIDE};

pub const MIN_BITRATE: u32 = 8_000;
pub const MAX_BITRATE: u32 = 64_000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CORRUPT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "gwc",
    version,
    about = "MDCT waveform codec and conditional-sampling toy experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a 16-bit mono 16 kHz WAV file into a .gwc stream.
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 16_000, value_parser = parse_bitrate)]
        bitrate: u32,
    },
    /// Decode a .gwc stream into a 16-bit mono WAV file.
    Decode { input: PathBuf, output: PathBuf },
    /// Distortions of midpoint, sampled and averaged reconstructions on the
    /// random-sine source, as CSV.
    Toy {
        #[arg(long, default_value_t = 0.5, value_parser = parse_positive)]
        delta: f64,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=1000))]
        dim: u32,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..=1000))]
        k_avg: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = GridArg::MidRise)]
        grid: GridArg,
        /// Skip the cell-mean decomposition rows.
        #[arg(long)]
        no_decomposition: bool,
    },
    /// Compare a test WAV against a reference WAV.
    Analyze {
        reference: PathBuf,
        test: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Snr)]
        mode: Mode,
        /// Second reconstruction for histogram mode; the histogram is of
        /// SNR(test) - SNR(baseline) per band and frame.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5, value_parser = parse_positive)]
        bin_width: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    MidRise,
    MidTread,
}

impl From<GridArg> for CellGrid {
    fn from(g: GridArg) -> Self {
        match g {
            GridArg::MidRise => CellGrid::MidRise,
            GridArg::MidTread => CellGrid::MidTread,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Per-band SNR, `band,snr_db`.
    Snr,
    /// Error spectrum, `freq_hz,power_db`.
    Spectrum,
    /// Power spectrum of the reference, `freq_hz,power_db`.
    Power,
    /// SNR-difference histogram against `--baseline`, `bin_center_db,count`.
    Histogram,
}

fn parse_bitrate(s: &str) -> Result<u32, String> {
    let v: u32 = s.parse().map_err(|e| format!("{e}"))?;
    if (MIN_BITRATE..=MAX_BITRATE).contains(&v) {
        Ok(v)
    } else {
        Err(format!("bitrate must be within [{MIN_BITRATE}, {MAX_BITRATE}]"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err("must be a positive number".into())
    }
}

/// A failure with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::InvalidConfig(_) | Error::UnsupportedStream(_) => EXIT_USAGE,
            Error::Io(_) => EXIT_IO,
            Error::CorruptStream(_) => EXIT_CORRUPT,
            Error::SamplingTimeout { .. } => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<hound::Error> for Failure {
    fn from(e: hound::Error) -> Self {
        let code = match e {
            hound::Error::IoError(_) => EXIT_IO,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: format!("wav: {e}"),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Reads a 16-bit PCM mono 16 kHz WAV file as integer-valued samples.
pub fn read_wav(path: &Path) -> Result<Vec<f64>, Failure> {
    let reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => io_failure(path, io),
        other => other.into(),
    })?;
    let spec = reader.spec();
    if spec.channels != 1
        || spec.bits_per_sample != 16
        || spec.sample_format != hound::SampleFormat::Int
        || spec.sample_rate != SAMPLE_RATE
    {
        return Err(usage(format!(
            "{}: need 16-bit PCM mono at {SAMPLE_RATE} Hz, got {} channel(s), {} bits, {} Hz",
            path.display(),
            spec.channels,
            spec.bits_per_sample,
            spec.sample_rate
        )));
    }
    reader
        .into_samples::<i16>()
        .map(|s| s.map(f64::from).map_err(Failure::from))
        .collect()
}

/// Writes samples as 16-bit PCM mono 16 kHz, rounding and clipping.
pub fn write_wav(path: &Path, samples: &[f64]) -> Result<(), Failure> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: SAMPLE_RATE,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec)?;
    for &s in samples {
        w.write_sample(s.round().clamp(i16::MIN as f64, i16::MAX as f64) as i16)?;
    }
    w.finalize()?;
    Ok(())
}

fn signal_from_wav(path: &Path) -> Result<SignalBlock, Failure> {
    let samples = read_wav(path)?;
    if samples.is_empty() {
        return Err(usage(format!("{}: no samples", path.display())));
    }
    Ok(SignalBlock::padded(samples, STRIDE)?)
}

fn cmd_encode(input: &Path, output: &Path, bitrate: u32, out: &mut dyn Write) -> Result<(), Failure> {
    let samples = read_wav(input)?;
    if samples.is_empty() {
        return Err(usage(format!("{}: no samples", input.display())));
    }
    let duration = samples.len() as f64 / SAMPLE_RATE as f64;
    let signal = SignalBlock::padded(samples, STRIDE)?;
    let config = CodecConfig::new(bitrate)?;
    let bytes = encode_stream(&signal, &config)?;
    fs::write(output, &bytes).map_err(|e| io_failure(output, e))?;
    let frames = signal.len() / STRIDE + 1;
    writeln!(
        out,
        "frames={frames} bits_per_frame={} bytes={} achieved_bps={:.1}",
        config.frame_bits()?,
        bytes.len(),
        bytes.len() as f64 * 8.0 / duration
    )
    .map_err(|e| io_failure(Path::new("<stdout>"), e))
}

fn cmd_decode(input: &Path, output: &Path) -> Result<(), Failure> {
    let bytes = fs::read(input).map_err(|e| io_failure(input, e))?;
    let signal = decode_stream(&bytes)?;
    write_wav(output, signal.samples())
}

fn toy_csv(cfg: &ToyConfig, decomposition: bool) -> Result<String, Failure> {
    let mut csv = format!("{CSV_HEADER}\n");
    let report = run_toy_experiment(cfg)?;
    for row in report.rows() {
        csv.push_str(&row.csv_row(cfg.delta));
        csv.push('\n');
    }
    if decomposition {
        let d = decomposition_check(cfg)?;
        for row in [&d.term1, &d.term2] {
            csv.push_str(&row.csv_row(cfg.delta));
            csv.push('\n');
        }
    }
    Ok(csv)
}

fn cmd_analyze(
    reference: &Path,
    test: &Path,
    mode: Mode,
    baseline: Option<&Path>,
    bin_width: f64,
) -> Result<String, Failure> {
    let cfg = FrameConfig::default();
    let layout = default_band_layout();
    let r = signal_from_wav(reference)?;
    if mode == Mode::Power {
        return Ok(power_spectrum(&r, &cfg)?.to_csv());
    }
    let t = signal_from_wav(test)?;
    Ok(match mode {
        Mode::Snr => band_snr(&r, &t, &layout, &cfg)?.to_csv(),
        Mode::Spectrum => error_spectrum(&r, &t, &cfg)?.to_csv(),
        Mode::Histogram => {
            let b = signal_from_wav(baseline.ok_or_else(|| usage("histogram mode needs --baseline"))?)?;
            let a = band_snr(&r, &t, &layout, &cfg)?;
            let b = band_snr(&r, &b, &layout, &cfg)?;
            snr_improvement_histogram(&a, &b, bin_width)?.to_csv()
        }
        Mode::Power => unreachable!(),
    })
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let stdout_failure = |e| io_failure(Path::new("<stdout>"), e);
    match cli.command {
        Command::Encode {
            input,
            output,
            bitrate,
        } => cmd_encode(&input, &output, bitrate, out),
        Command::Decode { input, output } => cmd_decode(&input, &output),
        Command::Toy {
            delta,
            dim,
            trials,
            k_avg,
            seed,
            grid,
            no_decomposition,
        } => {
            let cfg = ToyConfig {
                delta,
                dim: dim as usize,
                trials: trials as usize,
                k_avg: k_avg as usize,
                seed,
                grid: grid.into(),
                proposal: Proposal::Tiled,
                ..ToyConfig::default()
            };
            let csv = toy_csv(&cfg, !no_decomposition)?;
            out.write_all(csv.as_bytes()).map_err(stdout_failure)
        }
        Command::Analyze {
            reference,
            test,
            mode,
            baseline,
            bin_width,
        } => {
            let csv = cmd_analyze(&reference, &test, mode, baseline.as_deref(), bin_width)?;
            out.write_all(csv.as_bytes()).map_err(stdout_failure)
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status. Diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "gwc: {}", f.message);
            f.code
        }
    }
}
