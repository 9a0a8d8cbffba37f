//! Prefix codes over a symmetric integer alphabet `[-range, range]` plus an
//! escape symbol, with the plain-text table format used for the embedded
//! codebooks.
//!
//! Text format: one `symbol bitstring` pair per line, where `symbol` is a
//! decimal integer or `ESC`. Blank lines and lines starting with `#` are
//! ignored. The embedded tables are canonical: codewords are assigned in
//! order of (length, symbol) with integer symbols ascending and `ESC` last.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::bitstream::{BitReader, BitWriter};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Value(i32),
    Escape,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Codeword {
    pub bits: u32,
    pub len: u8,
}

impl Codeword {
    pub fn to_bit_string(self) -> String {
        (0..self.len)
            .rev()
            .map(|i| if (self.bits >> i) & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Empty,
    Node(usize),
    Leaf(usize),
}

#[derive(Clone, Debug)]
pub struct HuffmanTable {
    range: i32,
    // value v at index v + range; escape in the last slot
    codes: Vec<Codeword>,
    trie: Vec<[Slot; 2]>,
}

#[derive(PartialEq, PartialOrd)]
struct Weight(f64);

impl Eq for Weight {}

impl Ord for Weight {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Huffman code lengths for strictly positive weights. Ties are broken by
/// creation order so the result is fully deterministic.
pub fn huffman_lengths(weights: &[f64]) -> Vec<u8> {
    assert!(weights.iter().all(|w| *w > 0.0 && w.is_finite()));
    let n = weights.len();
    if n == 1 {
        return vec![1];
    }
    let mut parent = vec![usize::MAX; 2 * n - 1];
    let mut heap: BinaryHeap<Reverse<(Weight, usize)>> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| Reverse((Weight(w), i)))
        .collect();
    let mut next = n;
    while heap.len() > 1 {
        let Reverse((Weight(wa), a)) = heap.pop().unwrap();
        let Reverse((Weight(wb), b)) = heap.pop().unwrap();
        parent[a] = next;
        parent[b] = next;
        heap.push(Reverse((Weight(wa + wb), next)));
        next += 1;
    }
    (0..n)
        .map(|mut i| {
            let mut depth = 0u8;
            while parent[i] != usize::MAX {
                i = parent[i];
                depth += 1;
            }
            depth
        })
        .collect()
}

impl HuffmanTable {
    /// Canonical code from per-symbol lengths, indexed like the table slots
    /// (`2 * range + 1` values, then escape).
    pub fn canonical(range: i32, lengths: &[u8]) -> Result<Self> {
        let slots = 2 * range as usize + 2;
        if lengths.len() != slots {
            return Err(Error::invalid(format!(
                "expected {slots} code lengths, got {}",
                lengths.len()
            )));
        }
        if lengths.iter().any(|&l| l == 0 || l > 32) {
            return Err(Error::invalid("code lengths must be in 1..=32"));
        }
        let kraft: f64 = lengths.iter().map(|&l| (-(l as f64)).exp2()).sum();
        if kraft > 1.0 + 1e-12 {
            return Err(Error::invalid(format!("Kraft sum {kraft} exceeds 1")));
        }
        let mut order: Vec<usize> = (0..slots).collect();
        order.sort_by_key(|&i| (lengths[i], i));
        let mut codes = vec![Codeword { bits: 0, len: 0 }; slots];
        let mut code: u64 = 0;
        let mut prev_len = lengths[order[0]];
        for (k, &i) in order.iter().enumerate() {
            let len = lengths[i];
            if k > 0 {
                code = (code + 1) << (len - prev_len);
            }
            prev_len = len;
            codes[i] = Codeword {
                bits: code as u32,
                len,
            };
        }
        Self::from_codes(range, codes)
    }

    fn from_codes(range: i32, codes: Vec<Codeword>) -> Result<Self> {
        let mut trie = vec![[Slot::Empty, Slot::Empty]];
        for (sym, cw) in codes.iter().enumerate() {
            if cw.len == 0 {
                return Err(Error::invalid("empty codeword"));
            }
            let mut node = 0;
            for i in (0..cw.len).rev() {
                let bit = ((cw.bits >> i) & 1) as usize;
                let last = i == 0;
                match (trie[node][bit], last) {
                    (Slot::Empty, true) => trie[node][bit] = Slot::Leaf(sym),
                    (Slot::Empty, false) => {
                        trie.push([Slot::Empty, Slot::Empty]);
                        let id = trie.len() - 1;
                        trie[node][bit] = Slot::Node(id);
                        node = id;
                    }
                    (Slot::Node(id), false) => node = id,
                    _ => return Err(Error::invalid("code is not prefix-free")),
                }
            }
        }
        Ok(HuffmanTable { range, codes, trie })
    }

    /// Largest magnitude coded directly; anything beyond needs the escape.
    pub fn range(&self) -> i32 {
        self.range
    }

    fn slot(&self, sym: Symbol) -> usize {
        match sym {
            Symbol::Value(v) => {
                assert!(v.abs() <= self.range, "value {v} outside table range");
                (v + self.range) as usize
            }
            Symbol::Escape => self.codes.len() - 1,
        }
    }

    fn symbol_at(&self, slot: usize) -> Symbol {
        if slot == self.codes.len() - 1 {
            Symbol::Escape
        } else {
            Symbol::Value(slot as i32 - self.range)
        }
    }

    /// Maps a value onto the alphabet, escaping it when out of range.
    pub fn symbol_for(&self, v: i32) -> Symbol {
        if v.abs() <= self.range {
            Symbol::Value(v)
        } else {
            Symbol::Escape
        }
    }

    pub fn codeword(&self, sym: Symbol) -> Codeword {
        self.codes[self.slot(sym)]
    }

    pub fn len_of(&self, sym: Symbol) -> u32 {
        self.codeword(sym).len as u32
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.codes.len()).map(|i| self.symbol_at(i))
    }

    pub fn kraft_sum(&self) -> f64 {
        self.codes.iter().map(|c| (-(c.len as f64)).exp2()).sum()
    }

    pub fn write(&self, sym: Symbol, w: &mut BitWriter) {
        let cw = self.codeword(sym);
        w.write(cw.bits, cw.len as u32);
    }

    pub fn read(&self, r: &mut BitReader<'_>) -> Result<Symbol> {
        let mut node = 0;
        loop {
            let bit = r.read_bit()? as usize;
            match self.trie[node][bit] {
                Slot::Leaf(s) => return Ok(self.symbol_at(s)),
                Slot::Node(id) => node = id,
                Slot::Empty => return Err(Error::corrupt("invalid Huffman codeword")),
            }
        }
    }

    pub fn to_text(&self, header: &str) -> String {
        let mut out = String::new();
        for line in header.lines() {
            let _ = writeln!(out, "# {line}");
        }
        for (i, cw) in self.codes.iter().enumerate() {
            match self.symbol_at(i) {
                Symbol::Value(v) => {
                    let _ = writeln!(out, "{v} {}", cw.to_bit_string());
                }
                Symbol::Escape => {
                    let _ = writeln!(out, "ESC {}", cw.to_bit_string());
                }
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::invalid(format!("malformed table line {}: {line:?}", lineno + 1));
            let mut parts = line.split_whitespace();
            let (sym, bits) = (parts.next().ok_or_else(bad)?, parts.next().ok_or_else(bad)?);
            if parts.next().is_some() || bits.len() > 32 || bits.is_empty() {
                return Err(bad());
            }
            let sym = if sym == "ESC" {
                Symbol::Escape
            } else {
                Symbol::Value(sym.parse().map_err(|_| bad())?)
            };
            let code = u32::from_str_radix(bits, 2).map_err(|_| bad())?;
            entries.push((
                sym,
                Codeword {
                    bits: code,
                    len: bits.len() as u8,
                },
            ));
        }
        let range = entries
            .iter()
            .filter_map(|(s, _)| match s {
                Symbol::Value(v) => Some(v.abs()),
                Symbol::Escape => None,
            })
            .max()
            .ok_or_else(|| Error::invalid("table has no symbols"))?;
        let slots = 2 * range as usize + 2;
        let mut codes: Vec<Option<Codeword>> = vec![None; slots];
        for (sym, cw) in entries {
            let i = match sym {
                Symbol::Value(v) => (v + range) as usize,
                Symbol::Escape => slots - 1,
            };
            if codes[i].replace(cw).is_some() {
                return Err(Error::invalid(format!("duplicate symbol {sym:?}")));
            }
        }
        let codes = codes
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::invalid("table does not cover its whole alphabet"))?;
        Self::from_codes(range, codes)
    }
}
