use crate::error::{Error, Result};

/// MSB-first bit packer.
#[derive(Clone, Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of bits written so far.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn write_bit(&mut self, bit: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Writes the low `width` bits of `value`, most significant first.
    pub fn write(&mut self, value: u32, width: u32) {
        assert!((1..=32).contains(&width), "bit width {width} out of range");
        debug_assert!(width == 32 || value >> width == 0, "value does not fit");
        for i in (0..width).rev() {
            self.write_bit((value >> i) & 1 == 1);
        }
    }

    /// Two's complement signed field.
    pub fn write_signed(&mut self, value: i32, width: u32) {
        let mask = if width == 32 {
            u32::MAX
        } else {
            (1u32 << width) - 1
        };
        self.write(value as u32 & mask, width);
    }

    /// Zero-fills up to `total` bits. Does nothing if already past it.
    pub fn pad_to(&mut self, total: usize) {
        while self.len < total {
            self.write_bit(false);
        }
    }

    pub fn align_to_byte(&mut self) {
        while self.len % 8 != 0 {
            self.write_bit(false);
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// The written bits as a `0`/`1` string, handy in tests.
    pub fn to_bit_string(&self) -> String {
        (0..self.len)
            .map(|i| {
                if self.bytes[i / 8] & (0x80 >> (i % 8)) != 0 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }
}

/// MSB-first bit reader that never reads beyond `limit` bits.
#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    limit: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        BitReader {
            data,
            pos: 0,
            limit: data.len() * 8,
        }
    }

    /// Restricts reading to the first `limit_bits` bits of `data`.
    pub fn with_limit(data: &'a [u8], limit_bits: usize) -> Self {
        BitReader {
            data,
            pos: 0,
            limit: limit_bits.min(data.len() * 8),
        }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.limit - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.limit {
            return Err(Error::corrupt(format!("read past end at bit {}", self.pos)));
        }
        let bit = self.data[self.pos / 8] & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read(&mut self, width: u32) -> Result<u32> {
        assert!((1..=32).contains(&width), "bit width {width} out of range");
        if self.remaining() < width as usize {
            return Err(Error::corrupt(format!(
                "need {width} bits at position {}, only {} left",
                self.pos,
                self.remaining()
            )));
        }
        let mut v = 0u32;
        for _ in 0..width {
            v = (v << 1) | self.read_bit()? as u32;
        }
        Ok(v)
    }

    pub fn read_signed(&mut self, width: u32) -> Result<i32> {
        let raw = self.read(width)?;
        let shift = 32 - width;
        Ok(((raw << shift) as i32) >> shift)
    }
}
