//! CSV and JSON serialization of [`TraceStats`].
//!
//! Ratios and distribution percentages are printed with 4 decimal places;
//! powers are printed at full precision. Reading a report back yields
//! [`TraceStats::at_report_precision`] of the stats that were written.
//!
//! CSV layout (three blocks separated by blank lines):
//!
//! ```text
//! algorithm,termPower,termRatioPercent,switchPower,switchRatioPercent
//! NONE,0.16,100.0000,0,undefined
//! SORT,0,0.0000,0,undefined
//!
//! signal,count,percent
//! -1,16,100.0000
//! 0,0,0.0000
//! +1,0,0.0000
//!
//! key,value
//! frameCount,1
//! padBytes,0
//! opFilter,all
//! includeFlags,false
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::analysis::{AlgorithmStats, Distribution, TraceStats};
use crate::encoders::Algorithm;
use crate::modulation::SymbolCounts;
use crate::trace::OpFilter;

pub const CSV_HEADER: &str = "algorithm,termPower,termRatioPercent,switchPower,switchRatioPercent";
const UNDEFINED: &str = "undefined";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("CSV line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// The value recovered from printing `x` with 4 decimal places.
pub fn round4(x: f64) -> f64 {
    format!("{x:.4}").parse().expect("formatted float parses")
}

impl TraceStats {
    /// The values a report reader recovers: ratios and percentages rounded to 4 places.
    pub fn at_report_precision(&self) -> TraceStats {
        let mut out = self.clone();
        for s in out.per_algorithm.values_mut() {
            s.term_ratio_percent = round4(s.term_ratio_percent);
            s.switch_ratio_percent = s.switch_ratio_percent.map(round4);
        }
        let d = &mut out.distribution_percent;
        d.neg = round4(d.neg);
        d.zero = round4(d.zero);
        d.pos = round4(d.pos);
        out
    }
}

pub fn write_report(stats: &TraceStats, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => write_csv(stats),
        ReportFormat::Json => write_json(stats),
    }
}

fn write_csv(stats: &TraceStats) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (alg, s) in &stats.per_algorithm {
        let switch_ratio = match s.switch_ratio_percent {
            Some(r) => format!("{r:.4}"),
            None => UNDEFINED.to_string(),
        };
        let _ = writeln!(
            out,
            "{alg},{},{:.4},{},{switch_ratio}",
            s.term_power, s.term_ratio_percent, s.switch_power
        );
    }
    out.push_str("\nsignal,count,percent\n");
    let d = &stats.distribution_percent;
    let t = &stats.totals;
    let _ = writeln!(out, "-1,{},{:.4}", t.neg, d.neg);
    let _ = writeln!(out, "0,{},{:.4}", t.zero, d.zero);
    let _ = writeln!(out, "+1,{},{:.4}", t.pos, d.pos);
    out.push_str("\nkey,value\n");
    let _ = writeln!(out, "frameCount,{}", stats.frame_count);
    let _ = writeln!(out, "padBytes,{}", stats.pad_bytes);
    let _ = writeln!(out, "opFilter,{}", stats.op_filter);
    let _ = writeln!(out, "includeFlags,{}", stats.include_flags);
    out
}

fn write_json(stats: &TraceStats) -> String {
    let mut s = serde_json::to_string_pretty(&stats.at_report_precision()).expect("stats serialize");
    s.push('\n');
    s
}

pub fn read_json_report(input: &str) -> Result<TraceStats, ReportError> {
    Ok(serde_json::from_str(input)?)
}

pub fn read_csv_report(input: &str) -> Result<TraceStats, ReportError> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let err = |line: usize, message: String| ReportError::Csv { line, message };

    let mut next_block = |expected: &str| -> Result<Vec<(usize, Vec<String>)>, ReportError> {
        let (n, header) = lines
            .next()
            .ok_or_else(|| err(0, format!("missing `{expected}` block")))?;
        if header != expected {
            return Err(err(n, format!("expected header `{expected}`")));
        }
        let mut rows = Vec::new();
        for (n, line) in lines.by_ref() {
            if line.is_empty() {
                break;
            }
            rows.push((n, line.split(',').map(str::to_string).collect()));
        }
        Ok(rows)
    };

    fn field<T: FromStr>(n: usize, raw: &str, what: &str) -> Result<T, ReportError> {
        raw.parse().map_err(|_| ReportError::Csv {
            line: n,
            message: format!("bad {what} '{raw}'"),
        })
    }

    let mut per_algorithm = BTreeMap::new();
    for (n, cols) in next_block(CSV_HEADER)? {
        let [alg, term, term_ratio, switch, switch_ratio] = cols.as_slice() else {
            return Err(err(n, "expected 5 columns".into()));
        };
        let alg: Algorithm = field(n, alg, "algorithm")?;
        let switch_ratio_percent = if switch_ratio == UNDEFINED {
            None
        } else {
            Some(field(n, switch_ratio, "switchRatioPercent")?)
        };
        per_algorithm.insert(
            alg,
            AlgorithmStats {
                term_power: field(n, term, "termPower")?,
                term_ratio_percent: field(n, term_ratio, "termRatioPercent")?,
                switch_power: field(n, switch, "switchPower")?,
                switch_ratio_percent,
            },
        );
    }

    let mut totals = SymbolCounts::default();
    let mut dist = Distribution {
        neg: 0.0,
        zero: 0.0,
        pos: 0.0,
    };
    for (n, cols) in next_block("signal,count,percent")? {
        let [signal, count, pct] = cols.as_slice() else {
            return Err(err(n, "expected 3 columns".into()));
        };
        let (count, pct): (u64, f64) = (field(n, count, "count")?, field(n, pct, "percent")?);
        match signal.as_str() {
            "-1" => (totals.neg, dist.neg) = (count, pct),
            "0" => (totals.zero, dist.zero) = (count, pct),
            "+1" => (totals.pos, dist.pos) = (count, pct),
            other => return Err(err(n, format!("unknown signal '{other}'"))),
        }
    }

    let mut meta = BTreeMap::new();
    for (n, cols) in next_block("key,value")? {
        let [k, v] = cols.as_slice() else {
            return Err(err(n, "expected 2 columns".into()));
        };
        meta.insert(k.clone(), (n, v.clone()));
    }
    let get = |k: &str| meta.get(k).ok_or_else(|| err(0, format!("missing key '{k}'")));
    let (n, v) = get("frameCount")?;
    let frame_count = field(*n, v, "frameCount")?;
    let (n, v) = get("padBytes")?;
    let pad_bytes = field(*n, v, "padBytes")?;
    let (n, v) = get("opFilter")?;
    let op_filter: OpFilter = field(*n, v, "opFilter")?;
    let (n, v) = get("includeFlags")?;
    let include_flags = field(*n, v, "includeFlags")?;

    Ok(TraceStats {
        frame_count,
        pad_bytes,
        op_filter,
        include_flags,
        totals,
        distribution_percent: dist,
        per_algorithm,
    })
}

/// Signal distribution alone, as emitted by the `distribution` command.
pub fn write_distribution(dist: &Distribution, totals: &SymbolCounts, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = String::from("signal,count,percent\n");
            let _ = writeln!(out, "-1,{},{:.4}", totals.neg, dist.neg);
            let _ = writeln!(out, "0,{},{:.4}", totals.zero, dist.zero);
            let _ = writeln!(out, "+1,{},{:.4}", totals.pos, dist.pos);
            out
        }
        ReportFormat::Json => {
            let rounded = Distribution {
                neg: round4(dist.neg),
                zero: round4(dist.zero),
                pos: round4(dist.pos),
            };
            let v = serde_json::json!({ "totals": totals, "distributionPercent": rounded });
            let mut s = serde_json::to_string_pretty(&v).expect("distribution serializes");
            s.push('\n');
            s
        }
    }
}
