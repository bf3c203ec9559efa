//! `pam3` command-line front end.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on input or parse errors.
//!
//! Encoded frames are written one per line as
//! `A:<8 symbols> B:<8 symbols> F:<flag bits>` with symbols from `{-,0,+}`
//! and the flag in binary at the algorithm's wire width (MSB first).
//! A `# alg=<ALG>` header precedes the frames and a `# pad=<n>` trailer
//! follows them.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::analysis::{AnalysisError, AnalysisOptions, Distribution, TraceAccumulator};
use crate::encoders::{decode, encode, Algorithm, CodecError, EncodedFrame};
use crate::modulation::{count_symbols, demodulate, FrameError, Pam3Frame, Pam3Symbol, SymbolCounts, LINE_LEN};
use crate::power::PowerModel;
use crate::report::{write_distribution, write_report, ReportFormat};
use crate::trace::{frame_reader, frame_records, parse_text_trace, OpFilter, TraceError};

/// Raw-input frames buffered before each parallel analysis pass.
const RAW_BATCH_FRAMES: usize = 1 << 20;

#[derive(Debug, Parser)]
#[command(
    name = "pam3",
    version,
    about = "Low-power PAM-3 bus encoding and trace power analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frame a trace and encode every frame with one algorithm.
    Encode {
        #[arg(long = "alg", value_enum)]
        algorithm: AlgArg,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Decode an `encode` listing back to the raw payload bytes.
    Decode {
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Termination and switching power report against the unencoded baseline.
    Analyze {
        #[arg(long = "alg", value_enum, default_value = "all")]
        algorithm: AlgArg,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "report", value_enum, default_value = "csv")]
        report: ReportArg,
        /// Charge flag wires as binary lines in both power figures.
        #[arg(long)]
        include_flags: bool,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Share of -1, 0 and +1 symbols in the unencoded trace.
    Distribution {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "report", value_enum, default_value = "csv")]
        report: ReportArg,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Write uniformly random bytes as a raw trace.
    GenRandom {
        #[arg(long = "bytes", value_parser = clap::value_parser!(u64).range(1..))]
        byte_count: u64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        io: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Trace file; standard input when omitted or `-`.
    #[arg(short, long)]
    pub input: Option<PathBuf>,
    #[arg(long = "format", value_enum, default_value = "text")]
    pub format: InputFormat,
    /// Restrict text traces to reads or writes.
    #[arg(long = "op", value_enum, default_value = "all")]
    pub op: OpArg,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted or `-`.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgArg {
    None,
    Dbi,
    Mf,
    Sort,
    All,
}

impl AlgArg {
    fn algorithms(self) -> Vec<Algorithm> {
        match self {
            AlgArg::None => vec![Algorithm::None],
            AlgArg::Dbi => vec![Algorithm::Dbi],
            AlgArg::Mf => vec![Algorithm::Mf],
            AlgArg::Sort => vec![Algorithm::Sort],
            AlgArg::All => Algorithm::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Text,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportArg {
    Csv,
    Json,
}

impl From<ReportArg> for ReportFormat {
    fn from(r: ReportArg) -> Self {
        match r {
            ReportArg::Csv => ReportFormat::Csv,
            ReportArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpArg {
    All,
    Read,
    Write,
}

impl From<OpArg> for OpFilter {
    fn from(o: OpArg) -> Self {
        match o {
            OpArg::All => OpFilter::All,
            OpArg::Read => OpFilter::Read,
            OpArg::Write => OpFilter::Write,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("line {line}: {message}")]
    Encoded { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command, stdin, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn open_input<'a>(path: &Option<PathBuf>, stdin: &'a mut dyn Read) -> Result<Box<dyn Read + 'a>, CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            Ok(Box::new(File::open(p).map_err(|e| {
                io::Error::new(e.kind(), format!("{}: {e}", p.display()))
            })?))
        }
        _ => Ok(Box::new(stdin)),
    }
}

fn open_output<'a>(path: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            Ok(Box::new(BufWriter::new(File::create(p).map_err(|e| {
                io::Error::new(e.kind(), format!("{}: {e}", p.display()))
            })?)))
        }
        _ => Ok(Box::new(BufWriter::new(stdout))),
    }
}

/// Frames the input and hands every frame to `on_frame`; returns the pad length.
///
/// Raw input is streamed; text input is parsed whole and filtered by op.
fn for_each_frame(args: &InputArgs, stdin: &mut dyn Read, on_frame: impl FnMut(Pam3Frame)) -> Result<u8, CliError> {
    let input = open_input(&args.input, stdin)?;
    match args.format {
        InputFormat::Raw => {
            if args.op == OpArg::Read {
                // raw traces are a single write record
                return Ok(0);
            }
            let (total, pad) = frame_reader(input, on_frame)?;
            if total == 0 {
                return Err(TraceError::EmptyInput.into());
            }
            Ok(pad)
        }
        InputFormat::Text => {
            let records = parse_text_trace(BufReader::new(input))?;
            let filter = OpFilter::from(args.op);
            let stream = frame_records(records.iter().filter(|r| filter.accepts(r.op)));
            stream.frames.into_iter().for_each(on_frame);
            Ok(stream.pad_bytes)
        }
    }
}

fn execute(command: Command, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Encode { algorithm, input, io } => {
            let alg = match algorithm.algorithms().as_slice() {
                [one] => *one,
                _ => return Err(CliError::Usage("--alg all is only valid for analyze".into())),
            };
            let mut out = open_output(&io.output, stdout)?;
            writeln!(out, "# alg={alg}")?;
            let mut write_err = None;
            let pad = for_each_frame(&input, stdin, |f| {
                if write_err.is_none() {
                    if let Err(e) = writeln!(out, "{}", format_encoded(&encode(&f, alg))) {
                        write_err = Some(e);
                    }
                }
            })?;
            if let Some(e) = write_err {
                return Err(e.into());
            }
            writeln!(out, "# pad={pad}")?;
            out.flush()?;
        }
        Command::Decode { input, io } => {
            let reader = BufReader::new(open_input(&input, stdin)?);
            let bytes = decode_listing(reader)?;
            let mut out = open_output(&io.output, stdout)?;
            out.write_all(&bytes)?;
            out.flush()?;
        }
        Command::Analyze {
            algorithm,
            input,
            report,
            include_flags,
            io,
        } => {
            let mut acc = TraceAccumulator::new(&algorithm.algorithms());
            let mut batch = Vec::new();
            let pad = for_each_frame(&input, stdin, |f| {
                batch.push(f);
                if batch.len() == RAW_BATCH_FRAMES {
                    acc.extend_par(&batch);
                    batch.clear();
                }
            })?;
            acc.extend_par(&batch);
            if acc.frame_count() == 0 {
                return Err(AnalysisError::EmptyStream.into());
            }
            let options = AnalysisOptions {
                include_flags,
                op_filter: input.op.into(),
            };
            let stats = acc.finish(&PowerModel::default(), pad, options)?;
            let mut out = open_output(&io.output, stdout)?;
            out.write_all(write_report(&stats, report.into()).as_bytes())?;
            out.flush()?;
        }
        Command::Distribution { input, report, io } => {
            let mut totals = SymbolCounts::default();
            for_each_frame(&input, stdin, |f| totals += count_symbols(&f))?;
            let dist = Distribution::from_counts(&totals).ok_or(AnalysisError::EmptyStream)?;
            let mut out = open_output(&io.output, stdout)?;
            out.write_all(write_distribution(&dist, &totals, report.into()).as_bytes())?;
            out.flush()?;
        }
        Command::GenRandom { byte_count, seed, io } => {
            let mut out = open_output(&io.output, stdout)?;
            write_random(&mut out, byte_count, seed)?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Same byte sequence as [`crate::trace::generate_random_trace`], written in blocks.
fn write_random(out: &mut dyn Write, byte_count: u64, seed: u64) -> io::Result<()> {
    use rand::{RngCore, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut buf = vec![0u8; 1 << 16];
    let mut left = byte_count;
    while left > 0 {
        let n = left.min(buf.len() as u64) as usize;
        rng.fill_bytes(&mut buf[..n]);
        out.write_all(&buf[..n])?;
        left -= n as u64;
    }
    Ok(())
}

fn line_str(line: &[Pam3Symbol; LINE_LEN]) -> String {
    line.iter().map(|s| s.as_char()).collect()
}

/// One line of the encoded-frame listing.
pub fn format_encoded(e: &EncodedFrame) -> String {
    let width = e.algorithm.flag_width() as usize;
    let flag = if width == 0 {
        String::new()
    } else {
        format!("{:0width$b}", e.flag)
    };
    format!(
        "A:{} B:{} F:{flag}",
        line_str(&e.frame.line_a),
        line_str(&e.frame.line_b)
    )
}

fn parse_line_symbols(field: &str, prefix: &str) -> Result<[Pam3Symbol; LINE_LEN], String> {
    let body = field
        .strip_prefix(prefix)
        .ok_or_else(|| format!("expected field starting with '{prefix}'"))?;
    let symbols: Vec<Pam3Symbol> = body
        .chars()
        .map(|c| Pam3Symbol::from_char(c).ok_or_else(|| format!("bad symbol '{c}'")))
        .collect::<Result<_, _>>()?;
    symbols
        .try_into()
        .map_err(|v: Vec<_>| format!("expected {LINE_LEN} symbols, got {}", v.len()))
}

/// Parses one listing line for a frame encoded with `algorithm`.
pub fn parse_encoded(line: &str, algorithm: Algorithm) -> Result<EncodedFrame, String> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let [a, b, f] = fields.as_slice() else {
        // `F:` with no bits splits to three fields as well; anything else is malformed
        return Err("expected `A:<symbols> B:<symbols> F:<flag>`".into());
    };
    let line_a = parse_line_symbols(a, "A:")?;
    let line_b = parse_line_symbols(b, "B:")?;
    let bits = f.strip_prefix("F:").ok_or("expected field starting with 'F:'")?;
    let width = algorithm.flag_width() as usize;
    if bits.len() != width || !bits.chars().all(|c| c == '0' || c == '1') {
        return Err(format!(
            "flag must be {width} binary digits for {algorithm}, got '{bits}'"
        ));
    }
    let flag = if width == 0 {
        0
    } else {
        u8::from_str_radix(bits, 2).expect("checked digits")
    };
    Ok(EncodedFrame {
        frame: Pam3Frame::new(line_a, line_b),
        algorithm,
        flag,
    })
}

/// Decodes a full listing to payload bytes (padding removed).
pub fn decode_listing<R: BufRead>(reader: R) -> Result<Vec<u8>, CliError> {
    let mut algorithm = None;
    let mut pad: Option<(usize, u8)> = None;
    let mut bytes = Vec::new();
    let mut last_line = 0;
    for (idx, line) in reader.lines().enumerate() {
        let n = idx + 1;
        last_line = n;
        let line = line?;
        let line = line.trim();
        let bad = |message: String| CliError::Encoded { line: n, message };
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            for token in comment.split_whitespace() {
                if let Some(v) = token.strip_prefix("alg=") {
                    algorithm = Some(v.parse::<Algorithm>().map_err(bad)?);
                } else if let Some(v) = token.strip_prefix("pad=") {
                    let p: u8 = v.parse().map_err(|_| bad(format!("bad pad '{v}'")))?;
                    if p > 2 {
                        return Err(bad(format!("pad must be 0..=2, got {p}")));
                    }
                    pad = Some((n, p));
                }
            }
            continue;
        }
        if pad.is_some() {
            return Err(bad("frame after the pad trailer".into()));
        }
        let alg = algorithm.ok_or_else(|| bad("frame before `# alg=` header".into()))?;
        let encoded = parse_encoded(line, alg).map_err(bad)?;
        let frame = decode(&encoded).map_err(|e: CodecError| bad(e.to_string()))?;
        let word = demodulate(&frame).map_err(|e: FrameError| bad(e.to_string()))?;
        bytes.extend_from_slice(&word.to_bytes());
    }
    let (n, pad) = pad.ok_or(CliError::Encoded {
        line: last_line,
        message: "missing `# pad=` trailer".into(),
    })?;
    if pad as usize > bytes.len() {
        return Err(CliError::Encoded {
            line: n,
            message: "pad exceeds decoded length".into(),
        });
    }
    bytes.truncate(bytes.len() - pad as usize);
    Ok(bytes)
}
