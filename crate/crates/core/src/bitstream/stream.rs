use crate::coeff_quant::{
    dequantize_band, flatten, read_band, unflatten, write_band, FlattenedFrame, QuantizerLadder,
};
use crate::envelope::{
    compute_envelope, decode_envelope, default_band_layout, write_envelope, BandLayout, Envelope,
};
use crate::error::{Error, Result};
use crate::rate_control::{allocate, fit_envelope, frame_budget, quantizer_indices, Allocation, OFFSET_BITS};
use crate::tables::envelope_table;
use crate::transform::{mdct_forward, mdct_inverse, FrameConfig, SignalBlock, SpectralFrame, SAMPLE_RATE};

use super::{BitReader, BitWriter};

pub const MAGIC: [u8; 4] = *b"GWC1";
pub const VERSION: u8 = 1;
pub const HEADER_BYTES: usize = 18;
const DEFAULT_LAYOUT_ID: u8 = 0;

/// Fixed 18-byte stream header. Multi-byte fields are little-endian.
///
/// ```text
/// offset  size  field
///      0     4  magic "GWC1"
///      4     1  version (1)
///      5     4  sample_rate (16000)
///      9     4  bitrate in b/s
///     13     4  num_frames (MDCT frames; the signal has num_frames - 1 strides)
///     17     1  band_layout_id (0 = default 20-band layout)
/// ```
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamHeader {
    pub version: u8,
    pub sample_rate: u32,
    pub bitrate: u32,
    pub num_frames: u32,
    pub band_layout_id: u8,
}

impl StreamHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_BYTES] {
        let mut out = [0u8; HEADER_BYTES];
        out[0..4].copy_from_slice(&MAGIC);
        out[4] = self.version;
        out[5..9].copy_from_slice(&self.sample_rate.to_le_bytes());
        out[9..13].copy_from_slice(&self.bitrate.to_le_bytes());
        out[13..17].copy_from_slice(&self.num_frames.to_le_bytes());
        out[17] = self.band_layout_id;
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || bytes[0..4] != MAGIC {
            return Err(Error::UnsupportedStream("bad magic".into()));
        }
        if bytes.len() < HEADER_BYTES {
            return Err(Error::corrupt("truncated header"));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let header = StreamHeader {
            version: bytes[4],
            sample_rate: u32_at(5),
            bitrate: u32_at(9),
            num_frames: u32_at(13),
            band_layout_id: bytes[17],
        };
        if header.version != VERSION {
            return Err(Error::UnsupportedStream(format!("version {}", header.version)));
        }
        if header.sample_rate != SAMPLE_RATE {
            return Err(Error::UnsupportedStream(format!(
                "sample rate {}",
                header.sample_rate
            )));
        }
        if header.band_layout_id != DEFAULT_LAYOUT_ID {
            return Err(Error::UnsupportedStream(format!(
                "band layout {}",
                header.band_layout_id
            )));
        }
        Ok(header)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodecConfig {
    pub bitrate: u32,
    pub frame: FrameConfig,
}

impl CodecConfig {
    pub fn new(bitrate: u32) -> Result<Self> {
        let cfg = CodecConfig {
            bitrate,
            frame: FrameConfig::default(),
        };
        cfg.frame_bits()?;
        Ok(cfg)
    }

    pub fn frame_bits(&self) -> Result<usize> {
        frame_budget(self.bitrate, &self.frame)
    }

    /// Bytes occupied by one frame (frame budget rounded up to a byte).
    pub fn frame_bytes(&self) -> Result<usize> {
        Ok(self.frame_bits()?.div_ceil(8))
    }
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig::new(16_000).expect("16 kb/s is valid")
    }
}

/// What the encoder decided for one frame.
#[derive(Clone, Debug)]
pub struct FrameReport {
    pub envelope: Envelope,
    pub allocation: Allocation,
    pub envelope_bits: usize,
}

/// Codes one MDCT frame into exactly `frame_bits` bits.
pub fn encode_frame(
    frame: &SpectralFrame,
    layout: &BandLayout,
    ladder: &QuantizerLadder,
    frame_bits: usize,
) -> Result<(BitWriter, FrameReport)> {
    let measured = compute_envelope(frame, layout);
    let env = fit_envelope(&measured, frame_bits);
    let flat = flatten(frame, &env, layout)?;

    let mut w = BitWriter::new();
    write_envelope(&env, envelope_table(), &mut w);
    let envelope_bits = w.len();
    let coef_budget = frame_bits
        .checked_sub(envelope_bits + OFFSET_BITS as usize)
        .ok_or_else(|| Error::InvalidConfig("frame too small for its envelope".into()))?;
    let alloc = allocate(&flat, layout, ladder, coef_budget);
    w.write_signed(alloc.i_offset, OFFSET_BITS);
    for (band, &m) in layout.bands().zip(&alloc.m) {
        let values = &flat.coefficients[band];
        let symbols: Vec<i32> = values.iter().map(|&v| ladder.quantize_value(v, m)).collect();
        write_band(&symbols, m, ladder, &mut w);
    }
    debug_assert!(w.len() <= frame_bits);
    w.pad_to(frame_bits);
    w.align_to_byte();
    Ok((
        w,
        FrameReport {
            envelope: env,
            allocation: alloc,
            envelope_bits,
        },
    ))
}

/// Encodes a block whose length is a multiple of the stride.
pub fn encode_stream(signal: &SignalBlock, config: &CodecConfig) -> Result<Vec<u8>> {
    Ok(encode_stream_with_report(signal, config)?.0)
}

pub fn encode_stream_with_report(
    signal: &SignalBlock,
    config: &CodecConfig,
) -> Result<(Vec<u8>, Vec<FrameReport>)> {
    let frame_bits = config.frame_bits()?;
    let layout = default_band_layout();
    let ladder = QuantizerLadder::default();
    let frames = mdct_forward(signal, &config.frame)?;
    let header = StreamHeader {
        version: VERSION,
        sample_rate: config.frame.sample_rate(),
        bitrate: config.bitrate,
        num_frames: u32::try_from(frames.len())
            .map_err(|_| Error::invalid("signal too long for one stream"))?,
        band_layout_id: DEFAULT_LAYOUT_ID,
    };
    let mut out = header.to_bytes().to_vec();
    let mut reports = Vec::with_capacity(frames.len());
    for frame in &frames {
        let (bits, report) = encode_frame(frame, &layout, &ladder, frame_bits)?;
        out.extend_from_slice(bits.as_bytes());
        reports.push(report);
    }
    Ok((out, reports))
}

/// Everything the decoder reconstructs, not just the output signal.
#[derive(Clone, Debug)]
pub struct DecodedStream {
    pub header: StreamHeader,
    pub signal: SignalBlock,
    pub frames: Vec<SpectralFrame>,
    pub envelopes: Vec<Envelope>,
    pub offsets: Vec<i32>,
}

fn decode_frame(
    bytes: &[u8],
    frame_bits: usize,
    index: usize,
    layout: &BandLayout,
    ladder: &QuantizerLadder,
) -> Result<(SpectralFrame, Envelope, i32)> {
    let mut r = BitReader::with_limit(bytes, frame_bits);
    let env = decode_envelope(&mut r, envelope_table(), layout.num_bands())?;
    let i_offset = r.read_signed(OFFSET_BITS)?;
    let m = quantizer_indices(&env, i_offset, ladder.max_index());
    let mut coefficients = Vec::with_capacity(layout.num_bins());
    for (n, &mn) in m.iter().enumerate() {
        let symbols = read_band(&mut r, layout.width(n), mn, ladder)?;
        coefficients.extend(dequantize_band(&symbols, mn, ladder));
    }
    let flat = FlattenedFrame::from_parts(coefficients, env.clone());
    Ok((unflatten(&flat, layout, index)?, env, i_offset))
}

pub fn decode_stream_detailed(bytes: &[u8]) -> Result<DecodedStream> {
    let header = StreamHeader::parse(bytes)?;
    let config = CodecConfig::new(header.bitrate)
        .map_err(|_| Error::UnsupportedStream(format!("bitrate {}", header.bitrate)))?;
    let frame_bits = config.frame_bits()?;
    let frame_bytes = config.frame_bytes()?;
    let num_frames = header.num_frames as usize;
    if num_frames < 2 {
        return Err(Error::corrupt(format!("{num_frames} frames")));
    }
    let expected = HEADER_BYTES + num_frames * frame_bytes;
    if bytes.len() != expected {
        return Err(Error::corrupt(format!(
            "stream is {} bytes, header implies {expected}",
            bytes.len()
        )));
    }
    let layout = default_band_layout();
    let ladder = QuantizerLadder::default();
    let mut frames = Vec::with_capacity(num_frames);
    let mut envelopes = Vec::with_capacity(num_frames);
    let mut offsets = Vec::with_capacity(num_frames);
    for (t, chunk) in bytes[HEADER_BYTES..].chunks_exact(frame_bytes).enumerate() {
        let (frame, env, off) = decode_frame(chunk, frame_bits, t, &layout, &ladder)?;
        frames.push(frame);
        envelopes.push(env);
        offsets.push(off);
    }
    let signal = mdct_inverse(&frames, &config.frame)?;
    Ok(DecodedStream {
        header,
        signal,
        frames,
        envelopes,
        offsets,
    })
}

pub fn decode_stream(bytes: &[u8]) -> Result<SignalBlock> {
    Ok(decode_stream_detailed(bytes)?.signal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let h = StreamHeader {
            version: 1,
            sample_rate: 16_000,
            bitrate: 24_000,
            num_frames: 77,
            band_layout_id: 0,
        };
        let bytes = h.to_bytes();
        assert_eq!(&bytes[..4], b"GWC1");
        assert_eq!(StreamHeader::parse(&bytes).unwrap(), h);
    }

    #[test]
    fn header_rejections() {
        let h = StreamHeader {
            version: 1,
            sample_rate: 16_000,
            bitrate: 16_000,
            num_frames: 3,
            band_layout_id: 0,
        };
        let mut b = h.to_bytes();
        b[0] = b'X';
        assert!(matches!(
            StreamHeader::parse(&b),
            Err(Error::UnsupportedStream(_))
        ));
        let mut b = h.to_bytes();
        b[4] = 2;
        assert!(matches!(
            StreamHeader::parse(&b),
            Err(Error::UnsupportedStream(_))
        ));
        let b = h.to_bytes();
        assert!(matches!(
            StreamHeader::parse(&b[..10]),
            Err(Error::CorruptStream(_))
        ));
        assert!(matches!(
            StreamHeader::parse(&b[..2]),
            Err(Error::UnsupportedStream(_))
        ));
    }

    #[test]
    fn silence_stays_silent() {
        let cfg = CodecConfig::default();
        let x = SignalBlock::new(vec![0.0; 3200]).unwrap();
        let (bytes, reports) = encode_stream_with_report(&x, &cfg).unwrap();
        assert_eq!(bytes.len(), HEADER_BYTES + 11 * 40);
        for r in &reports {
            assert!(r.envelope.indices().iter().all(|&i| i == -33));
            assert!(r.allocation.m.iter().all(|&m| m == 0));
        }
        let y = decode_stream(&bytes).unwrap();
        assert_eq!(y.len(), 3200);
        assert!(y.energy() < 1e-6);
    }

    #[test]
    fn truncation_and_trailing_bytes() {
        let cfg = CodecConfig::default();
        let x = SignalBlock::new((0..640).map(|n| (n as f64 * 0.1).sin() * 0.3).collect()).unwrap();
        let bytes = encode_stream(&x, &cfg).unwrap();
        assert!(matches!(
            decode_stream(&bytes[..bytes.len() - 1]),
            Err(Error::CorruptStream(_))
        ));
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(matches!(decode_stream(&longer), Err(Error::CorruptStream(_))));
    }
}
