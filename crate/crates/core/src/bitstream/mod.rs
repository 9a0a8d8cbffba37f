//! Bit-level I/O and the `.gwc` stream format.

mod bits;
mod stream;

pub use bits::{BitReader, BitWriter};
pub use stream::{
    decode_stream, decode_stream_detailed, encode_frame, encode_stream, encode_stream_with_report,
    CodecConfig, DecodedStream, FrameReport, StreamHeader, HEADER_BYTES, MAGIC, VERSION,
};
