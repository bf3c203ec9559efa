//! Bus trace ingestion, framing into 24-bit word groups, and synthetic traces.
//!
//! Text traces hold one record per line:
//!
//! ```text
//! # comment
//! W 0x1f00 00ff00
//! R 0x0 aabbccdd
//! ```
//!
//! Raw traces are flat byte files treated as a single write at address 0.

use std::fmt;
use std::io::{self, BufRead, Read, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modulation::{demodulate, modulate, FrameError, Pam3Frame, Word24};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("input is empty")]
    EmptyInput,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Read,
    Write,
}

impl Op {
    pub const fn code(self) -> char {
        match self {
            Op::Read => 'R',
            Op::Write => 'W',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub op: Op,
    pub address: u64,
    pub payload: Vec<u8>,
}

/// Which records take part in an analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpFilter {
    #[default]
    All,
    Read,
    Write,
}

impl OpFilter {
    pub fn accepts(self, op: Op) -> bool {
        match self {
            OpFilter::All => true,
            OpFilter::Read => op == Op::Read,
            OpFilter::Write => op == Op::Write,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            OpFilter::All => "all",
            OpFilter::Read => "read",
            OpFilter::Write => "write",
        }
    }
}

impl fmt::Display for OpFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(OpFilter::All),
            "read" => Ok(OpFilter::Read),
            "write" => Ok(OpFilter::Write),
            _ => Err(format!("unknown op filter '{s}'")),
        }
    }
}

fn parse_line(line: &str) -> Result<TraceRecord, String> {
    let mut fields = line.split_whitespace();
    let (Some(op), Some(addr), Some(payload), None) = (fields.next(), fields.next(), fields.next(), fields.next())
    else {
        return Err("expected `<op> <address> <payload>`".to_string());
    };
    let op = match op {
        "R" => Op::Read,
        "W" => Op::Write,
        other => return Err(format!("unknown op '{other}' (expected R or W)")),
    };
    let digits = addr
        .strip_prefix("0x")
        .ok_or_else(|| format!("address '{addr}' must be 0x-prefixed hex"))?;
    let address = u64::from_str_radix(digits, 16).map_err(|e| format!("bad address '{addr}': {e}"))?;
    if payload.len() % 2 != 0 {
        return Err(format!("payload has odd hex length {}", payload.len()));
    }
    let payload = hex::decode(payload).map_err(|e| format!("bad payload: {e}"))?;
    Ok(TraceRecord { op, address, payload })
}

/// Parses a text trace, skipping blank lines and `#` comments.
pub fn parse_text_trace<R: BufRead>(input: R) -> Result<Vec<TraceRecord>, TraceError> {
    let mut records = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let record = parse_line(trimmed).map_err(|message| TraceError::Parse { line: idx + 1, message })?;
        records.push(record);
    }
    Ok(records)
}

/// Writes records in the text trace format accepted by [`parse_text_trace`].
pub fn format_text_trace<W: Write>(records: &[TraceRecord], mut out: W) -> io::Result<()> {
    for r in records {
        writeln!(out, "{} {:#x} {}", r.op.code(), r.address, hex::encode(&r.payload))?;
    }
    Ok(())
}

/// Reads a whole raw byte stream as one write record at address 0.
pub fn parse_raw_trace<R: Read>(mut input: R) -> Result<Vec<TraceRecord>, TraceError> {
    let mut payload = Vec::new();
    input.read_to_end(&mut payload)?;
    if payload.is_empty() {
        return Err(TraceError::EmptyInput);
    }
    Ok(vec![TraceRecord {
        op: Op::Write,
        address: 0,
        payload,
    }])
}

/// Modulated frames of a byte sequence, with the zero padding added to the last group.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrameStream {
    pub frames: Vec<Pam3Frame>,
    pub pad_bytes: u8,
}

impl FrameStream {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Demodulates every frame and strips the padding.
    pub fn to_bytes(&self) -> Result<Vec<u8>, FrameError> {
        let mut out = Vec::with_capacity(self.frames.len() * 3);
        for f in &self.frames {
            out.extend_from_slice(&demodulate(f)?.to_bytes());
        }
        out.truncate(out.len() - self.pad_bytes as usize);
        Ok(out)
    }
}

/// Incremental 3-byte grouping; bytes go to X, Y, Z in arrival order.
#[derive(Debug, Clone, Default)]
pub struct Framer {
    pending: [u8; 3],
    filled: usize,
}

impl Framer {
    pub fn new() -> Self {
        Framer::default()
    }

    pub fn push(&mut self, bytes: &[u8], mut on_frame: impl FnMut(Pam3Frame)) {
        for &b in bytes {
            self.pending[self.filled] = b;
            self.filled += 1;
            if self.filled == 3 {
                let [x, y, z] = self.pending;
                on_frame(modulate(Word24::new(x, y, z)));
                self.filled = 0;
            }
        }
    }

    /// Emits the zero-padded partial group, if any, and returns the pad length.
    pub fn finish(mut self, on_frame: impl FnOnce(Pam3Frame)) -> u8 {
        if self.filled == 0 {
            return 0;
        }
        let pad = 3 - self.filled;
        self.pending[self.filled..].fill(0);
        let [x, y, z] = self.pending;
        on_frame(modulate(Word24::new(x, y, z)));
        pad as u8
    }
}

/// Concatenates payloads in record order and frames them.
pub fn frame_records<'a>(records: impl IntoIterator<Item = &'a TraceRecord>) -> FrameStream {
    let mut framer = Framer::new();
    let mut frames = Vec::new();
    for r in records {
        framer.push(&r.payload, |f| frames.push(f));
    }
    let pad_bytes = framer.finish(|f| frames.push(f));
    FrameStream { frames, pad_bytes }
}

/// Frames a raw byte stream without buffering it; returns `(total_bytes, pad_bytes)`.
pub fn frame_reader<R: Read>(mut input: R, mut on_frame: impl FnMut(Pam3Frame)) -> io::Result<(u64, u8)> {
    let mut framer = Framer::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = match input.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        };
        total += n as u64;
        framer.push(&buf[..n], &mut on_frame);
    }
    let pad = framer.finish(on_frame);
    Ok((total, pad))
}

/// Uniformly random bytes as a single write record.
///
/// Panics if `byte_count` is zero.
pub fn generate_random_trace(byte_count: usize, seed: u64) -> Vec<TraceRecord> {
    assert!(byte_count >= 1, "byte_count must be >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut payload = vec![0u8; byte_count];
    rng.fill(payload.as_mut_slice());
    vec![TraceRecord {
        op: Op::Write,
        address: 0,
        payload,
    }]
}

/// Mostly-zero bytes: each byte is 0 with probability `zero_fraction`, otherwise uniform.
///
/// Models the zero-heavy traffic typical of real memory traces.
pub fn generate_sparse_trace(byte_count: usize, zero_fraction: f64, seed: u64) -> Vec<TraceRecord> {
    assert!(byte_count >= 1, "byte_count must be >= 1");
    assert!((0.0..=1.0).contains(&zero_fraction), "zero_fraction must be in [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let payload = (0..byte_count)
        .map(|_| if rng.gen_bool(zero_fraction) { 0 } else { rng.gen() })
        .collect();
    vec![TraceRecord {
        op: Op::Write,
        address: 0,
        payload,
    }]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::Pam3Symbol::{Neg, Zero};

    fn parse(s: &str) -> Result<Vec<TraceRecord>, TraceError> {
        parse_text_trace(s.as_bytes())
    }

    #[test]
    fn text_examples() {
        let r = parse("W 0x1f00 00ff00").unwrap();
        assert_eq!(
            r,
            vec![TraceRecord {
                op: Op::Write,
                address: 0x1f00,
                payload: vec![0x00, 0xff, 0x00]
            }]
        );
        let r = parse("R 0x0 aabbccdd").unwrap();
        assert_eq!(r[0].op, Op::Read);
        assert_eq!(r[0].address, 0);
        assert_eq!(r[0].payload.len(), 4);
    }

    #[test]
    fn text_skips_comments_and_blanks() {
        let r = parse("# header\n\nW 0x1 AB\n   \n  # indented comment\nR 0x2 cd\n").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].payload, vec![0xab]);
    }

    #[test]
    fn text_errors_carry_line_numbers() {
        for (input, line) in [
            ("W 0x10 abc", 1),
            ("# c\nW 0x10 zz", 2),
            ("W 0x1 00\nX 0x10 00", 2),
            ("W 10 00", 1),
            ("W 0x10", 1),
            ("W 0x10 00 11", 1),
            ("W 0xg 00", 1),
        ] {
            match parse(input) {
                Err(TraceError::Parse { line: l, .. }) => assert_eq!(l, line, "{input:?}"),
                other => panic!("{input:?}: expected parse error, got {other:?}"),
            }
        }
    }

    #[test]
    fn text_format_roundtrip() {
        let records = vec![
            TraceRecord {
                op: Op::Read,
                address: 0,
                payload: vec![1, 2, 3],
            },
            TraceRecord {
                op: Op::Write,
                address: u64::MAX,
                payload: vec![0xff],
            },
        ];
        let mut out = Vec::new();
        format_text_trace(&records, &mut out).unwrap();
        assert_eq!(parse_text_trace(out.as_slice()).unwrap(), records);
    }

    #[test]
    fn raw_examples() {
        let r = parse_raw_trace(&[1u8, 2, 3, 4, 5, 6][..]).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].payload.len(), 6);
        assert_eq!((r[0].op, r[0].address), (Op::Write, 0));
        assert!(matches!(parse_raw_trace(&[][..]), Err(TraceError::EmptyInput)));
    }

    #[test]
    fn framing_examples() {
        let rec = |p: Vec<u8>| TraceRecord {
            op: Op::Write,
            address: 0,
            payload: p,
        };

        let s = frame_records(&[rec(vec![0, 0, 0])]);
        assert_eq!(s.frames, vec![Pam3Frame::uniform(Neg)]);
        assert_eq!(s.pad_bytes, 0);

        let s = frame_records(&[rec(vec![1, 2, 3, 4])]);
        assert_eq!((s.len(), s.pad_bytes), (2, 2));

        let s = frame_records(&[rec(vec![0x00, 0x00, 0xFF])]);
        assert_eq!(s.frames[0].line_a, [Neg; 8]);
        assert_eq!(s.frames[0].line_b, [Zero; 8]);

        let s = frame_records(&[]);
        assert!(s.is_empty());
        assert_eq!(s.pad_bytes, 0);
    }

    #[test]
    fn framing_spans_record_boundaries() {
        let a = TraceRecord {
            op: Op::Write,
            address: 0,
            payload: vec![0x12],
        };
        let b = TraceRecord {
            op: Op::Read,
            address: 8,
            payload: vec![0x34, 0x56, 0x78],
        };
        let s = frame_records(&[a, b]);
        assert_eq!(s.len(), 2);
        assert_eq!(demodulate(&s.frames[0]).unwrap(), Word24::new(0x12, 0x34, 0x56));
        assert_eq!(s.to_bytes().unwrap(), vec![0x12, 0x34, 0x56, 0x78]);
    }

    #[test]
    fn reader_matches_record_framing() {
        let data: Vec<u8> = (0..200_000u32).map(|i| (i * 31 % 251) as u8).collect();
        let mut frames = Vec::new();
        let (total, pad) = frame_reader(data.as_slice(), |f| frames.push(f)).unwrap();
        assert_eq!(total, data.len() as u64);
        let expected = frame_records(&parse_raw_trace(data.as_slice()).unwrap());
        assert_eq!(frames, expected.frames);
        assert_eq!(pad, expected.pad_bytes);
    }

    #[test]
    fn random_trace_is_deterministic() {
        assert_eq!(generate_random_trace(3, 42), generate_random_trace(3, 42));
        assert_ne!(generate_random_trace(64, 1), generate_random_trace(64, 2));
        let s = frame_records(&generate_random_trace(1, 9));
        assert_eq!((s.len(), s.pad_bytes), (1, 2));
    }

    #[test]
    fn sparse_trace_zero_share() {
        let r = generate_sparse_trace(100_000, 0.9, 5);
        let zeros = r[0].payload.iter().filter(|&&b| b == 0).count() as f64 / 100_000.0;
        // 0.9 + 0.1/256 expected
        assert!((zeros - 0.9004).abs() < 0.005, "{zeros}");
    }

    #[test]
    fn op_filter() {
        assert!(OpFilter::All.accepts(Op::Read));
        assert!(!OpFilter::Write.accepts(Op::Read));
        assert_eq!("READ".parse::<OpFilter>().unwrap(), OpFilter::Read);
    }
}
