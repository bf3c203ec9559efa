//! PAM-3 symbols, frames, and the 3-bit to symbol-pair modulation table.
//!
//! Three 8-bit words `X`, `Y`, `Z` are read column by column. Column `i`
//! takes bit `7 - i` of each word (MSB first) and forms the 3-bit symbol
//! `xyz`, which maps to a pair of line levels `(A[i], B[i])`:
//!
//! ```text
//! 000 -> (-1,-1)   001 -> (-1, 0)   010 -> (-1,+1)   011 -> ( 0,-1)
//! 100 -> ( 0,+1)   101 -> (+1,-1)   110 -> (+1, 0)   111 -> (+1,+1)
//! ```
//!
//! The ninth pair `(0, 0)` is never produced by [`modulate`] and is rejected
//! by [`demodulate`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of symbols on each of the two lines of a frame.
pub const LINE_LEN: usize = 8;

/// Total symbols per frame (both lines).
pub const FRAME_SYMBOLS: u32 = 2 * LINE_LEN as u32;

/// One PAM-3 line level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(i8)]
pub enum Pam3Symbol {
    Neg = -1,
    Zero = 0,
    Pos = 1,
}

impl Pam3Symbol {
    /// All levels in ascending order.
    pub const ALL: [Pam3Symbol; 3] = [Pam3Symbol::Neg, Pam3Symbol::Zero, Pam3Symbol::Pos];

    pub const fn level(self) -> i8 {
        self as i8
    }

    pub fn from_level(level: i8) -> Option<Self> {
        match level {
            -1 => Some(Pam3Symbol::Neg),
            0 => Some(Pam3Symbol::Zero),
            1 => Some(Pam3Symbol::Pos),
            _ => None,
        }
    }

    /// Position of this level in [`Pam3Symbol::ALL`] (0, 1 or 2).
    pub const fn index(self) -> usize {
        (self as i8 + 1) as usize
    }

    /// Level negation: -1 and +1 swap, 0 stays.
    pub const fn negate(self) -> Self {
        match self {
            Pam3Symbol::Neg => Pam3Symbol::Pos,
            Pam3Symbol::Zero => Pam3Symbol::Zero,
            Pam3Symbol::Pos => Pam3Symbol::Neg,
        }
    }

    /// Single-character form used in the encoded-frame text format.
    pub const fn as_char(self) -> char {
        match self {
            Pam3Symbol::Neg => '-',
            Pam3Symbol::Zero => '0',
            Pam3Symbol::Pos => '+',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '-' => Some(Pam3Symbol::Neg),
            '0' => Some(Pam3Symbol::Zero),
            '+' => Some(Pam3Symbol::Pos),
            _ => None,
        }
    }
}

impl fmt::Display for Pam3Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pam3Symbol::Neg => f.write_str("-1"),
            Pam3Symbol::Zero => f.write_str("0"),
            Pam3Symbol::Pos => f.write_str("+1"),
        }
    }
}

/// Three 8-bit word lines carried by one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Word24 {
    pub x: u8,
    pub y: u8,
    pub z: u8,
}

impl Word24 {
    pub const fn new(x: u8, y: u8, z: u8) -> Self {
        Word24 { x, y, z }
    }

    /// Packs as `0x00XXYYZZ`.
    pub const fn to_u32(self) -> u32 {
        (self.x as u32) << 16 | (self.y as u32) << 8 | self.z as u32
    }

    /// Uses the low 24 bits of `v`.
    pub const fn from_u32(v: u32) -> Self {
        Word24 {
            x: (v >> 16) as u8,
            y: (v >> 8) as u8,
            z: v as u8,
        }
    }

    pub const fn to_bytes(self) -> [u8; 3] {
        [self.x, self.y, self.z]
    }
}

/// Two lines of eight PAM-3 symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pam3Frame {
    pub line_a: [Pam3Symbol; LINE_LEN],
    pub line_b: [Pam3Symbol; LINE_LEN],
}

impl Pam3Frame {
    pub const fn new(line_a: [Pam3Symbol; LINE_LEN], line_b: [Pam3Symbol; LINE_LEN]) -> Self {
        Pam3Frame { line_a, line_b }
    }

    /// Frame with every symbol on both lines set to `s`.
    pub const fn uniform(s: Pam3Symbol) -> Self {
        Pam3Frame {
            line_a: [s; LINE_LEN],
            line_b: [s; LINE_LEN],
        }
    }

    /// Builds a frame from integer levels; `None` if any level is outside {-1, 0, 1}.
    pub fn from_levels(a: [i8; LINE_LEN], b: [i8; LINE_LEN]) -> Option<Self> {
        let mut frame = Pam3Frame::uniform(Pam3Symbol::Zero);
        for i in 0..LINE_LEN {
            frame.line_a[i] = Pam3Symbol::from_level(a[i])?;
            frame.line_b[i] = Pam3Symbol::from_level(b[i])?;
        }
        Some(frame)
    }

    /// Symbols of line A followed by line B.
    pub fn symbols(&self) -> impl Iterator<Item = Pam3Symbol> + '_ {
        self.line_a.iter().chain(self.line_b.iter()).copied()
    }

    /// Applies `f` to every symbol of both lines.
    pub fn map(&self, mut f: impl FnMut(Pam3Symbol) -> Pam3Symbol) -> Self {
        Pam3Frame {
            line_a: self.line_a.map(&mut f),
            line_b: self.line_b.map(&mut f),
        }
    }
}

/// Occurrences of each level across both lines of a frame (or a sum over frames).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SymbolCounts {
    pub neg: u64,
    pub zero: u64,
    pub pos: u64,
}

impl SymbolCounts {
    pub const fn new(neg: u64, zero: u64, pos: u64) -> Self {
        SymbolCounts { neg, zero, pos }
    }

    pub const fn total(&self) -> u64 {
        self.neg + self.zero + self.pos
    }

    pub const fn get(&self, s: Pam3Symbol) -> u64 {
        match s {
            Pam3Symbol::Neg => self.neg,
            Pam3Symbol::Zero => self.zero,
            Pam3Symbol::Pos => self.pos,
        }
    }

    /// Counts in `[cnt(-1), cnt(0), cnt(+1)]` order.
    pub const fn as_array(&self) -> [u64; 3] {
        [self.neg, self.zero, self.pos]
    }

    pub fn add(&mut self, s: Pam3Symbol) {
        match s {
            Pam3Symbol::Neg => self.neg += 1,
            Pam3Symbol::Zero => self.zero += 1,
            Pam3Symbol::Pos => self.pos += 1,
        }
    }
}

impl std::ops::AddAssign for SymbolCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.neg += rhs.neg;
        self.zero += rhs.zero;
        self.pos += rhs.pos;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("column {column} holds the unused (0, 0) pair")]
    InvalidPair { column: usize },
}

use Pam3Symbol::{Neg, Pos, Zero};

/// Symbol pair for each 3-bit value `xyz`.
const PAIRS: [(Pam3Symbol, Pam3Symbol); 8] = [
    (Neg, Neg),
    (Neg, Zero),
    (Neg, Pos),
    (Zero, Neg),
    (Zero, Pos),
    (Pos, Neg),
    (Pos, Zero),
    (Pos, Pos),
];

/// Inverse of `PAIRS`, indexed by `3 * a.index() + b.index()`.
const PAIR_TO_BITS: [Option<u8>; 9] = [
    Some(0b000),
    Some(0b001),
    Some(0b010),
    Some(0b011),
    None,
    Some(0b100),
    Some(0b101),
    Some(0b110),
    Some(0b111),
];

pub fn modulate(word: Word24) -> Pam3Frame {
    let mut frame = Pam3Frame::uniform(Neg);
    for i in 0..LINE_LEN {
        let shift = 7 - i;
        let bits = ((word.x >> shift) & 1) << 2 | ((word.y >> shift) & 1) << 1 | ((word.z >> shift) & 1);
        let (a, b) = PAIRS[bits as usize];
        frame.line_a[i] = a;
        frame.line_b[i] = b;
    }
    frame
}

pub fn demodulate(frame: &Pam3Frame) -> Result<Word24, FrameError> {
    let mut word = Word24::default();
    for i in 0..LINE_LEN {
        let key = 3 * frame.line_a[i].index() + frame.line_b[i].index();
        let bits = PAIR_TO_BITS[key].ok_or(FrameError::InvalidPair { column: i })?;
        let shift = 7 - i;
        word.x |= ((bits >> 2) & 1) << shift;
        word.y |= ((bits >> 1) & 1) << shift;
        word.z |= (bits & 1) << shift;
    }
    Ok(word)
}

/// `cnt(-1)`, `cnt(0)`, `cnt(+1)` over all 16 symbols of the frame.
pub fn count_symbols(frame: &Pam3Frame) -> SymbolCounts {
    let mut counts = SymbolCounts::default();
    for s in frame.symbols() {
        counts.add(s);
    }
    counts
}
