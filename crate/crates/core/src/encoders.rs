//! Low-power frame encodings.
//!
//! Each encoder looks at `cnt(-1)`, `cnt(0)`, `cnt(+1)` over the whole
//! 16-symbol frame and rewrites the symbols through a bijection of the three
//! levels, returning a flag that identifies the bijection:
//!
//! - DBI (1 flag bit): negate every level when `cnt(-1) > cnt(+1)`.
//! - MF (2 flag bits): swap the most frequent level with `+1`.
//! - SORT (3 flag bits): rank levels by frequency and send the least
//!   frequent to `-1`, the middle to `0` and the most frequent to `+1`.
//!
//! All three bijections are members of the six-entry [`PermutationCode`]
//! table, so SORT never does worse than DBI or MF on termination power.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modulation::{count_symbols, Pam3Frame, Pam3Symbol, SymbolCounts};
use crate::power::PowerModel;

use Pam3Symbol::{Neg, Pos, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Algorithm {
    None,
    Dbi,
    Mf,
    Sort,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::None, Algorithm::Dbi, Algorithm::Mf, Algorithm::Sort];

    /// Number of flag wires accompanying each frame.
    pub const fn flag_width(self) -> u32 {
        match self {
            Algorithm::None => 0,
            Algorithm::Dbi => 1,
            Algorithm::Mf => 2,
            Algorithm::Sort => 3,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Algorithm::None => "NONE",
            Algorithm::Dbi => "DBI",
            Algorithm::Mf => "MF",
            Algorithm::Sort => "SORT",
        }
    }

    /// Whether `flag` is a legal value for this algorithm.
    pub const fn flag_is_valid(self, flag: u8) -> bool {
        match self {
            Algorithm::None => flag == 0,
            Algorithm::Dbi => flag <= 1,
            Algorithm::Mf => flag <= 2,
            Algorithm::Sort => flag <= 5,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown algorithm '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("expected a {expected} frame, got {found}")]
    WrongAlgorithm { expected: Algorithm, found: Algorithm },
    #[error("flag {flag:#b} is not valid for {algorithm}")]
    InvalidFlag { algorithm: Algorithm, flag: u8 },
}

/// A frame after conversion, with the flag needed to undo it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EncodedFrame {
    pub frame: Pam3Frame,
    pub algorithm: Algorithm,
    pub flag: u8,
}

impl EncodedFrame {
    /// Pass-through frame with no flag wires.
    pub const fn unencoded(frame: Pam3Frame) -> Self {
        EncodedFrame {
            frame,
            algorithm: Algorithm::None,
            flag: 0,
        }
    }
}

/// Images of `(-1, 0, +1)` for each permutation number.
const PERMUTATIONS: [[Pam3Symbol; 3]; 6] = [
    [Neg, Zero, Pos],
    [Neg, Pos, Zero],
    [Zero, Neg, Pos],
    [Zero, Pos, Neg],
    [Pos, Neg, Zero],
    [Pos, Zero, Neg],
];

/// One of the six bijections of `{-1, 0, +1}`, identified by its 3-bit number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PermutationCode(u8);

impl PermutationCode {
    pub const IDENTITY: PermutationCode = PermutationCode(0);
    pub const COUNT: u8 = 6;

    pub fn from_index(index: u8) -> Option<Self> {
        (index < Self::COUNT).then_some(PermutationCode(index))
    }

    /// Looks up the number of the bijection sending `-1, 0, +1` to `images`.
    /// `None` if `images` is not a bijection.
    pub fn from_mapping(images: [Pam3Symbol; 3]) -> Option<Self> {
        PERMUTATIONS
            .iter()
            .position(|p| *p == images)
            .map(|i| PermutationCode(i as u8))
    }

    pub fn all() -> impl Iterator<Item = PermutationCode> {
        (0..Self::COUNT).map(PermutationCode)
    }

    pub const fn index(self) -> u8 {
        self.0
    }

    /// Images of `(-1, 0, +1)`.
    pub const fn mapping(self) -> [Pam3Symbol; 3] {
        PERMUTATIONS[self.0 as usize]
    }

    pub const fn apply(self, s: Pam3Symbol) -> Pam3Symbol {
        PERMUTATIONS[self.0 as usize][s.index()]
    }

    pub fn inverse(self) -> Self {
        let mut images = [Neg; 3];
        for s in Pam3Symbol::ALL {
            images[self.apply(s).index()] = s;
        }
        PermutationCode::from_mapping(images).expect("inverse of a bijection is a bijection")
    }

    pub fn apply_frame(self, frame: &Pam3Frame) -> Pam3Frame {
        frame.map(|s| self.apply(s))
    }

    /// Counts after sending every symbol through this bijection.
    pub fn apply_counts(self, counts: &SymbolCounts) -> SymbolCounts {
        let mut out = SymbolCounts::default();
        for s in Pam3Symbol::ALL {
            match self.apply(s) {
                Neg => out.neg += counts.get(s),
                Zero => out.zero += counts.get(s),
                Pos => out.pos += counts.get(s),
            }
        }
        out
    }
}

impl fmt::Display for PermutationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.mapping();
        write!(f, "#{} (-1->{a}, 0->{b}, +1->{c})", self.0)
    }
}

pub fn encode_dbi(frame: &Pam3Frame) -> EncodedFrame {
    let counts = count_symbols(frame);
    let invert = counts.neg > counts.pos;
    EncodedFrame {
        frame: if invert { frame.map(Pam3Symbol::negate) } else { *frame },
        algorithm: Algorithm::Dbi,
        flag: invert as u8,
    }
}

pub fn decode_dbi(encoded: &EncodedFrame) -> Result<Pam3Frame, CodecError> {
    check(encoded, Algorithm::Dbi)?;
    Ok(if encoded.flag == 1 {
        encoded.frame.map(Pam3Symbol::negate)
    } else {
        encoded.frame
    })
}

/// Most frequent level; ties prefer `+1`, then `0`, then `-1`.
pub fn most_frequent(counts: &SymbolCounts) -> Pam3Symbol {
    let mut best = Pos;
    for s in [Zero, Neg] {
        if counts.get(s) > counts.get(best) {
            best = s;
        }
    }
    best
}

/// The transposition of `signal` and `+1` (identity when `signal` is `+1`).
fn mf_swap(signal: Pam3Symbol) -> impl Fn(Pam3Symbol) -> Pam3Symbol {
    move |s| {
        if s == signal {
            Pos
        } else if s == Pos {
            signal
        } else {
            s
        }
    }
}

const fn mf_flag(signal: Pam3Symbol) -> u8 {
    match signal {
        Neg => 0b00,
        Zero => 0b01,
        Pos => 0b10,
    }
}

pub fn encode_mf(frame: &Pam3Frame) -> EncodedFrame {
    let mf = most_frequent(&count_symbols(frame));
    EncodedFrame {
        frame: frame.map(mf_swap(mf)),
        algorithm: Algorithm::Mf,
        flag: mf_flag(mf),
    }
}

pub fn decode_mf(encoded: &EncodedFrame) -> Result<Pam3Frame, CodecError> {
    check(encoded, Algorithm::Mf)?;
    let signal = match encoded.flag {
        0b00 => Neg,
        0b01 => Zero,
        _ => Pos,
    };
    Ok(encoded.frame.map(mf_swap(signal)))
}

/// Bijection ranking levels by ascending count: least frequent to `-1`,
/// most frequent to `+1`. Equal counts keep `-1, 0, +1` order.
pub fn sort_permutation(counts: &SymbolCounts) -> PermutationCode {
    let mut order = Pam3Symbol::ALL;
    order.sort_by_key(|&s| counts.get(s));
    let mut images = [Neg; 3];
    for (rank, s) in order.into_iter().enumerate() {
        images[s.index()] = Pam3Symbol::ALL[rank];
    }
    PermutationCode::from_mapping(images).expect("rank assignment is a bijection")
}

pub fn encode_sort(frame: &Pam3Frame) -> EncodedFrame {
    let perm = sort_permutation(&count_symbols(frame));
    EncodedFrame {
        frame: perm.apply_frame(frame),
        algorithm: Algorithm::Sort,
        flag: perm.index(),
    }
}

pub fn decode_sort(encoded: &EncodedFrame) -> Result<Pam3Frame, CodecError> {
    check(encoded, Algorithm::Sort)?;
    let perm = PermutationCode::from_index(encoded.flag).expect("flag checked");
    Ok(perm.inverse().apply_frame(&encoded.frame))
}

/// Encodes with any algorithm; [`Algorithm::None`] passes the frame through.
pub fn encode(frame: &Pam3Frame, algorithm: Algorithm) -> EncodedFrame {
    match algorithm {
        Algorithm::None => EncodedFrame::unencoded(*frame),
        Algorithm::Dbi => encode_dbi(frame),
        Algorithm::Mf => encode_mf(frame),
        Algorithm::Sort => encode_sort(frame),
    }
}

/// Decodes according to the frame's own algorithm tag.
pub fn decode(encoded: &EncodedFrame) -> Result<Pam3Frame, CodecError> {
    match encoded.algorithm {
        Algorithm::None => {
            check(encoded, Algorithm::None)?;
            Ok(encoded.frame)
        }
        Algorithm::Dbi => decode_dbi(encoded),
        Algorithm::Mf => decode_mf(encoded),
        Algorithm::Sort => decode_sort(encoded),
    }
}

fn check(encoded: &EncodedFrame, expected: Algorithm) -> Result<(), CodecError> {
    if encoded.algorithm != expected {
        return Err(CodecError::WrongAlgorithm {
            expected,
            found: encoded.algorithm,
        });
    }
    if !expected.flag_is_valid(encoded.flag) {
        return Err(CodecError::InvalidFlag {
            algorithm: expected,
            flag: encoded.flag,
        });
    }
    Ok(())
}

/// Tries all six bijections and returns the one with the lowest termination
/// power, preferring the lowest permutation number on ties.
pub fn brute_force_best_permutation(frame: &Pam3Frame, model: &PowerModel) -> (PermutationCode, f64) {
    let counts = count_symbols(frame);
    let mut best = (PermutationCode::IDENTITY, f64::INFINITY);
    for perm in PermutationCode::all() {
        let power = model.termination_for_counts(&perm.apply_counts(&counts));
        if power < best.1 {
            best = (perm, power);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power::termination_power;

    fn hand_frame() -> Pam3Frame {
        Pam3Frame::from_levels([-1, 0, 1, -1, -1, 0, 1, 1], [0, 0, -1, 1, -1, -1, 1, 0]).unwrap()
    }

    /// Frame whose first `neg` symbols are -1, next `zero` are 0, rest +1.
    fn frame_with_counts(neg: usize, zero: usize) -> Pam3Frame {
        let mut levels = [1i8; 16];
        levels[..neg].fill(-1);
        levels[neg..neg + zero].fill(0);
        Pam3Frame::from_levels(levels[..8].try_into().unwrap(), levels[8..].try_into().unwrap()).unwrap()
    }

    #[test]
    fn permutation_table_is_lexicographic() {
        let mut oracle = Vec::new();
        for a in -1i8..=1 {
            for b in -1i8..=1 {
                for c in -1i8..=1 {
                    if a != b && b != c && a != c {
                        oracle.push([a, b, c]);
                    }
                }
            }
        }
        let table: Vec<[i8; 3]> = PermutationCode::all().map(|p| p.mapping().map(|s| s.level())).collect();
        assert_eq!(table, oracle);
    }

    #[test]
    fn permutation_inverse() {
        for p in PermutationCode::all() {
            for s in Pam3Symbol::ALL {
                assert_eq!(p.inverse().apply(p.apply(s)), s);
            }
        }
        assert!(PermutationCode::from_index(6).is_none());
        assert!(PermutationCode::from_mapping([Neg, Neg, Pos]).is_none());
    }

    #[test]
    fn dbi_examples() {
        let e = encode_dbi(&Pam3Frame::uniform(Neg));
        assert_eq!((e.frame, e.flag), (Pam3Frame::uniform(Pos), 1));
        let e = encode_dbi(&Pam3Frame::uniform(Pos));
        assert_eq!((e.frame, e.flag), (Pam3Frame::uniform(Pos), 0));
        let e = encode_dbi(&hand_frame());
        assert_eq!(e.flag, 1);
        assert_eq!(count_symbols(&e.frame), SymbolCounts::new(5, 5, 6));
    }

    #[test]
    fn dbi_tie_keeps_frame() {
        let f = frame_with_counts(5, 6);
        assert_eq!(encode_dbi(&f).flag, 0);
    }

    #[test]
    fn dbi_decode_examples() {
        let inverted = EncodedFrame {
            frame: Pam3Frame::uniform(Pos),
            algorithm: Algorithm::Dbi,
            flag: 1,
        };
        assert_eq!(decode_dbi(&inverted).unwrap(), Pam3Frame::uniform(Neg));
        let plain = EncodedFrame { flag: 0, ..inverted };
        assert_eq!(decode_dbi(&plain).unwrap(), Pam3Frame::uniform(Pos));
        let bad = EncodedFrame { flag: 2, ..inverted };
        assert_eq!(
            decode_dbi(&bad),
            Err(CodecError::InvalidFlag {
                algorithm: Algorithm::Dbi,
                flag: 2
            })
        );
    }

    #[test]
    fn mf_examples() {
        let e = encode_mf(&frame_with_counts(10, 4));
        assert_eq!(e.flag, 0b00);
        assert_eq!(count_symbols(&e.frame), SymbolCounts::new(2, 4, 10));

        let e = encode_mf(&Pam3Frame::uniform(Pos));
        assert_eq!((e.frame, e.flag), (Pam3Frame::uniform(Pos), 0b10));

        let e = encode_mf(&hand_frame());
        assert_eq!(e.flag, 0b00);
        assert_eq!(count_symbols(&e.frame), SymbolCounts::new(5, 5, 6));
    }

    #[test]
    fn mf_zero_dominant_swaps_zero() {
        let e = encode_mf(&frame_with_counts(3, 9));
        assert_eq!(e.flag, 0b01);
        assert_eq!(count_symbols(&e.frame), SymbolCounts::new(3, 4, 9));
    }

    #[test]
    fn mf_ties_prefer_pos_then_zero() {
        assert_eq!(most_frequent(&SymbolCounts::new(6, 5, 5)), Neg);
        assert_eq!(most_frequent(&SymbolCounts::new(6, 6, 4)), Zero);
        assert_eq!(most_frequent(&SymbolCounts::new(6, 4, 6)), Pos);
        assert_eq!(most_frequent(&SymbolCounts::new(4, 6, 6)), Pos);
    }

    #[test]
    fn mf_decode_examples() {
        let e = EncodedFrame {
            frame: frame_with_counts(2, 4),
            algorithm: Algorithm::Mf,
            flag: 0b00,
        };
        assert_eq!(count_symbols(&decode_mf(&e).unwrap()), SymbolCounts::new(10, 4, 2));
        let f = hand_frame();
        let e = EncodedFrame {
            frame: f,
            algorithm: Algorithm::Mf,
            flag: 0b10,
        };
        assert_eq!(decode_mf(&e).unwrap(), f);
        let e = EncodedFrame { flag: 0b11, ..e };
        assert_eq!(
            decode_mf(&e),
            Err(CodecError::InvalidFlag {
                algorithm: Algorithm::Mf,
                flag: 3
            })
        );
    }

    #[test]
    fn sort_least_pos_middle_zero_most() {
        // cnt(-1) least, cnt(+1) middle, cnt(0) most
        let perm = sort_permutation(&SymbolCounts::new(2, 9, 5));
        assert_eq!(perm.mapping(), [Neg, Pos, Zero]);
        assert_eq!(perm.apply(Neg), Neg);
        assert_eq!(perm.apply(Pos), Zero);
        assert_eq!(perm.apply(Zero), Pos);
        let inv = perm.inverse();
        assert_eq!([inv.apply(Neg), inv.apply(Zero), inv.apply(Pos)], [Neg, Pos, Zero]);
    }

    #[test]
    fn sort_examples() {
        let e = encode_sort(&Pam3Frame::uniform(Pos));
        assert_eq!((e.frame, e.flag), (Pam3Frame::uniform(Pos), 0));

        // stable ascending: 0 (5), +1 (5), -1 (6)
        let e = encode_sort(&hand_frame());
        let perm = PermutationCode::from_index(e.flag).unwrap();
        assert_eq!(perm.mapping(), [Pos, Neg, Zero]);
        assert_eq!(count_symbols(&e.frame), SymbolCounts::new(5, 5, 6));
    }

    #[test]
    fn sort_decode_examples() {
        let f = hand_frame();
        let e = EncodedFrame {
            frame: f,
            algorithm: Algorithm::Sort,
            flag: 0,
        };
        assert_eq!(decode_sort(&e).unwrap(), f);
        for flag in [6, 7] {
            let e = EncodedFrame { flag, ..e };
            assert_eq!(
                decode_sort(&e),
                Err(CodecError::InvalidFlag {
                    algorithm: Algorithm::Sort,
                    flag
                })
            );
        }
        let e = EncodedFrame {
            algorithm: Algorithm::Mf,
            ..e
        };
        assert_eq!(
            decode_sort(&e),
            Err(CodecError::WrongAlgorithm {
                expected: Algorithm::Sort,
                found: Algorithm::Mf
            })
        );
    }

    #[test]
    fn brute_force_examples() {
        let m = PowerModel::default();
        let (perm, power) = brute_force_best_permutation(&Pam3Frame::uniform(Neg), &m);
        assert_eq!(perm.apply(Neg), Pos);
        assert_eq!(power, 0.0);

        let (_, power) = brute_force_best_permutation(&hand_frame(), &m);
        assert!((power - 0.075).abs() < 1e-15);
        assert!(power <= termination_power(&hand_frame(), &m));
    }

    #[test]
    fn brute_force_tie_takes_lowest_index() {
        // identity and #2 both keep +1 fixed and cost 0 on an all +1 frame
        let (perm, _) = brute_force_best_permutation(&Pam3Frame::uniform(Pos), &PowerModel::default());
        assert_eq!(perm, PermutationCode::IDENTITY);
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("sort".parse::<Algorithm>().unwrap(), Algorithm::Sort);
        assert!("pam4".parse::<Algorithm>().is_err());
    }

    #[test]
    fn dispatch_roundtrip() {
        let f = hand_frame();
        for a in Algorithm::ALL {
            let e = encode(&f, a);
            assert_eq!(e.algorithm, a);
            assert!(a.flag_is_valid(e.flag));
            assert!(u32::from(e.flag) < (1 << a.flag_width()).max(1));
            assert_eq!(decode(&e).unwrap(), f);
        }
    }
}
