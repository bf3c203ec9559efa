//! Trace-level power statistics for one or more encoders.
//!
//! Every frame is encoded independently. Termination power is accumulated as
//! integer symbol counts and switching energy as integer squared level
//! steps, so totals do not depend on how the stream is chunked; powers are
//! only formed from the integers at the end.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoders::{encode, Algorithm};
use crate::modulation::{count_symbols, Pam3Frame, SymbolCounts};
use crate::power::{boundary_units, flag_levels, intra_frame_units, step_units, PowerError, PowerModel, PowerReport};
use crate::trace::{FrameStream, OpFilter};

/// Frames per parallel work unit. Fixed so reductions are reproducible.
pub const CHUNK_FRAMES: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("stream contains no frames")]
    EmptyStream,
    #[error("baseline termination power is zero; ratio is undefined")]
    ZeroBaseline,
}

impl From<PowerError> for AnalysisError {
    fn from(e: PowerError) -> Self {
        match e {
            PowerError::ZeroBaseline => AnalysisError::ZeroBaseline,
            PowerError::EmptyStream => AnalysisError::EmptyStream,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisOptions {
    /// Charge flag wires as binary lines (bit 1 on `+1`, bit 0 on `-1`).
    pub include_flags: bool,
    /// Recorded in the report; filtering happens before framing.
    pub op_filter: OpFilter,
}

/// Share of each level, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub neg: f64,
    pub zero: f64,
    pub pos: f64,
}

impl Distribution {
    pub fn from_counts(counts: &SymbolCounts) -> Option<Self> {
        let total = counts.total();
        if total == 0 {
            return None;
        }
        let pct = |c: u64| 100.0 * c as f64 / total as f64;
        Some(Distribution {
            neg: pct(counts.neg),
            zero: pct(counts.zero),
            pos: pct(counts.pos),
        })
    }

    pub fn sum(&self) -> f64 {
        self.neg + self.zero + self.pos
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AlgorithmStats {
    pub term_power: f64,
    pub switch_power: f64,
    pub term_ratio_percent: f64,
    /// `None` when the unencoded stream has no transitions.
    pub switch_ratio_percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceStats {
    pub frame_count: u64,
    pub pad_bytes: u8,
    pub op_filter: OpFilter,
    pub include_flags: bool,
    /// Symbol counts of the unencoded frames.
    pub totals: SymbolCounts,
    pub distribution_percent: Distribution,
    pub per_algorithm: BTreeMap<Algorithm, AlgorithmStats>,
}

/// Running totals for one encoder.
#[derive(Debug, Clone, Default)]
struct Lane {
    counts: SymbolCounts,
    switch_units: u64,
    flag_counts: SymbolCounts,
    flag_switch_units: u64,
    first: Option<(Pam3Frame, u8)>,
    last: Option<(Pam3Frame, u8)>,
}

impl Lane {
    fn flag_boundary(width: u32, prev: u8, next: u8) -> u64 {
        flag_levels(prev, width)
            .zip(flag_levels(next, width))
            .map(|(a, b)| step_units(a, b))
            .sum()
    }

    fn push(&mut self, frame: Pam3Frame, flag: u8, width: u32) {
        self.counts += count_symbols(&frame);
        self.switch_units += intra_frame_units(&frame);
        for level in flag_levels(flag, width) {
            self.flag_counts.add(level);
        }
        if let Some((prev, prev_flag)) = self.last {
            self.switch_units += boundary_units(&prev, &frame);
            self.flag_switch_units += Self::flag_boundary(width, prev_flag, flag);
        }
        if self.first.is_none() {
            self.first = Some((frame, flag));
        }
        self.last = Some((frame, flag));
    }

    /// Appends `next`, which must directly follow `self` in stream order.
    fn merge(&mut self, next: Lane, width: u32) {
        if let (Some((prev, prev_flag)), Some((head, head_flag))) = (self.last, next.first) {
            self.switch_units += boundary_units(&prev, &head);
            self.flag_switch_units += Self::flag_boundary(width, prev_flag, head_flag);
        }
        self.counts += next.counts;
        self.switch_units += next.switch_units;
        self.flag_counts += next.flag_counts;
        self.flag_switch_units += next.flag_switch_units;
        if self.first.is_none() {
            self.first = next.first;
        }
        if next.last.is_some() {
            self.last = next.last;
        }
    }

    fn powers(&self, model: &PowerModel, include_flags: bool) -> (f64, f64) {
        let (mut counts, mut units) = (self.counts, self.switch_units);
        if include_flags {
            counts += self.flag_counts;
            units += self.flag_switch_units;
        }
        (model.termination_for_counts(&counts), model.switching_for_units(units))
    }
}

/// Incremental analysis over frames pushed in stream order.
///
/// The unencoded baseline is always tracked, whether or not
/// [`Algorithm::None`] was requested.
#[derive(Debug, Clone)]
pub struct TraceAccumulator {
    algorithms: Vec<Algorithm>,
    lanes: Vec<Lane>,
    frame_count: u64,
}

impl TraceAccumulator {
    pub fn new(algorithms: &[Algorithm]) -> Self {
        let mut algs = vec![Algorithm::None];
        algs.extend(algorithms.iter().copied().filter(|&a| a != Algorithm::None));
        algs.sort();
        algs.dedup();
        TraceAccumulator {
            lanes: vec![Lane::default(); algs.len()],
            algorithms: algs,
            frame_count: 0,
        }
    }

    pub fn push(&mut self, frame: &Pam3Frame) {
        self.frame_count += 1;
        for (lane, &alg) in self.lanes.iter_mut().zip(&self.algorithms) {
            let e = encode(frame, alg);
            lane.push(e.frame, e.flag, alg.flag_width());
        }
    }

    /// Pushes `frames` in order, encoding fixed-size chunks in parallel.
    pub fn extend_par(&mut self, frames: &[Pam3Frame]) {
        let empty = TraceAccumulator {
            algorithms: self.algorithms.clone(),
            lanes: vec![Lane::default(); self.lanes.len()],
            frame_count: 0,
        };
        let partials: Vec<TraceAccumulator> = frames
            .par_chunks(CHUNK_FRAMES)
            .map(|chunk| {
                let mut acc = empty.clone();
                chunk.iter().for_each(|f| acc.push(f));
                acc
            })
            .collect();
        for p in partials {
            self.merge(p);
        }
    }

    /// Appends an accumulator built over the frames that directly follow this one's.
    pub fn merge(&mut self, next: TraceAccumulator) {
        assert_eq!(
            self.algorithms, next.algorithms,
            "accumulators track different algorithms"
        );
        self.frame_count += next.frame_count;
        for ((lane, other), alg) in self.lanes.iter_mut().zip(next.lanes).zip(&self.algorithms) {
            lane.merge(other, alg.flag_width());
        }
    }

    pub fn frame_count(&self) -> u64 {
        self.frame_count
    }

    /// Unencoded symbol totals.
    pub fn totals(&self) -> SymbolCounts {
        self.lanes[0].counts
    }

    pub fn finish(
        self,
        model: &PowerModel,
        pad_bytes: u8,
        options: AnalysisOptions,
    ) -> Result<TraceStats, AnalysisError> {
        let totals = self.totals();
        let distribution = Distribution::from_counts(&totals).ok_or(AnalysisError::EmptyStream)?;
        let (base_term, base_switch) = self.lanes[0].powers(model, options.include_flags);
        let mut per_algorithm = BTreeMap::new();
        for (lane, &alg) in self.lanes.iter().zip(&self.algorithms) {
            let (term, switch) = lane.powers(model, options.include_flags);
            let report = PowerReport::compare(base_term, term, base_switch, switch)?;
            per_algorithm.insert(
                alg,
                AlgorithmStats {
                    term_power: term,
                    switch_power: switch,
                    term_ratio_percent: report.term_ratio_percent,
                    switch_ratio_percent: report.switch_ratio_percent,
                },
            );
        }
        Ok(TraceStats {
            frame_count: self.frame_count,
            pad_bytes,
            op_filter: options.op_filter,
            include_flags: options.include_flags,
            totals,
            distribution_percent: distribution,
            per_algorithm,
        })
    }
}

/// Encodes every frame with each requested algorithm and compares against
/// the unencoded stream. The report always contains a `NONE` row.
pub fn analyze_trace(
    stream: &FrameStream,
    algorithms: &[Algorithm],
    model: &PowerModel,
    options: AnalysisOptions,
) -> Result<TraceStats, AnalysisError> {
    if stream.is_empty() {
        return Err(AnalysisError::EmptyStream);
    }
    let mut acc = TraceAccumulator::new(algorithms);
    acc.extend_par(&stream.frames);
    acc.finish(model, stream.pad_bytes, options)
}

pub fn signal_distribution(stream: &FrameStream) -> Result<Distribution, AnalysisError> {
    let totals = stream
        .frames
        .par_chunks(CHUNK_FRAMES)
        .map(|chunk| {
            let mut c = SymbolCounts::default();
            chunk.iter().for_each(|f| c += count_symbols(f));
            c
        })
        .reduce(SymbolCounts::default, |mut a, b| {
            a += b;
            a
        });
    Distribution::from_counts(&totals).ok_or(AnalysisError::EmptyStream)
}
