//! Termination and switching power of PAM-3 line traffic.
//!
//! Termination power is static per driven level: `-1` costs `V²/100`, `0`
//! costs `V²/200`, `+1` costs nothing. Switching energy is charged per line
//! transition as `unit × (ΔL)²`; only ratios of it are meaningful.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modulation::{count_symbols, Pam3Frame, Pam3Symbol, SymbolCounts, LINE_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PowerError {
    #[error("baseline power is zero; ratio is undefined")]
    ZeroBaseline,
    #[error("stream contains no frames")]
    EmptyStream,
}

/// Per-level termination weights and the switching energy unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub vdd_squared: f64,
    pub term_weight_neg: f64,
    pub term_weight_zero: f64,
    pub term_weight_pos: f64,
    /// Energy of one unit squared level step on one line.
    pub switch_unit_energy: f64,
}

impl PowerModel {
    /// Termination weights `V²/100`, `V²/200`, `0` for the given `V²`.
    ///
    /// Panics if `vdd_squared` is not strictly positive or `switch_unit_energy` is negative.
    pub fn new(vdd_squared: f64, switch_unit_energy: f64) -> Self {
        assert!(vdd_squared > 0.0, "vdd_squared must be > 0, got {vdd_squared}");
        assert!(
            switch_unit_energy >= 0.0,
            "switch_unit_energy must be >= 0, got {switch_unit_energy}"
        );
        PowerModel {
            vdd_squared,
            term_weight_neg: vdd_squared / 100.0,
            term_weight_zero: vdd_squared / 200.0,
            term_weight_pos: 0.0,
            switch_unit_energy,
        }
    }

    pub fn weight(&self, s: Pam3Symbol) -> f64 {
        match s {
            Pam3Symbol::Neg => self.term_weight_neg,
            Pam3Symbol::Zero => self.term_weight_zero,
            Pam3Symbol::Pos => self.term_weight_pos,
        }
    }

    /// Termination power of a symbol population.
    pub fn termination_for_counts(&self, counts: &SymbolCounts) -> f64 {
        counts.neg as f64 * self.term_weight_neg
            + counts.zero as f64 * self.term_weight_zero
            + counts.pos as f64 * self.term_weight_pos
    }

    pub fn switching_for_units(&self, units: u64) -> f64 {
        units as f64 * self.switch_unit_energy
    }
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel::new(1.0, 1.0)
    }
}

pub fn termination_power(frame: &Pam3Frame, model: &PowerModel) -> f64 {
    model.termination_for_counts(&count_symbols(frame))
}

/// `encoded / baseline × 100`.
pub fn termination_ratio(encoded_total: f64, baseline_total: f64) -> Result<f64, PowerError> {
    if baseline_total <= 0.0 || baseline_total.is_nan() {
        return Err(PowerError::ZeroBaseline);
    }
    Ok(encoded_total / baseline_total * 100.0)
}

/// Squared level step between two symbols.
pub fn step_units(prev: Pam3Symbol, next: Pam3Symbol) -> u64 {
    let d = (next.level() - prev.level()) as i64;
    (d * d) as u64
}

/// Squared steps inside one frame, per line.
pub fn intra_frame_units(frame: &Pam3Frame) -> u64 {
    let line = |l: &[Pam3Symbol; LINE_LEN]| -> u64 { l.windows(2).map(|w| step_units(w[0], w[1])).sum() };
    line(&frame.line_a) + line(&frame.line_b)
}

/// Squared steps across the boundary from the last column of `prev` to the first of `next`.
pub fn boundary_units(prev: &Pam3Frame, next: &Pam3Frame) -> u64 {
    step_units(prev.line_a[LINE_LEN - 1], next.line_a[0]) + step_units(prev.line_b[LINE_LEN - 1], next.line_b[0])
}

/// Total squared level steps over a frame sequence, both lines, including frame boundaries.
pub fn switching_units<'a>(stream: impl IntoIterator<Item = &'a Pam3Frame>) -> u64 {
    let mut total = 0;
    let mut prev: Option<&Pam3Frame> = None;
    for frame in stream {
        if let Some(p) = prev {
            total += boundary_units(p, frame);
        }
        total += intra_frame_units(frame);
        prev = Some(frame);
    }
    total
}

pub fn switching_power(stream: &[Pam3Frame], model: &PowerModel) -> Result<f64, PowerError> {
    if stream.is_empty() {
        return Err(PowerError::EmptyStream);
    }
    Ok(model.switching_for_units(switching_units(stream)))
}

/// Level driven by a binary flag wire: bit 1 on `+1`, bit 0 on `-1`.
pub fn flag_bit_level(bit: bool) -> Pam3Symbol {
    if bit {
        Pam3Symbol::Pos
    } else {
        Pam3Symbol::Neg
    }
}

/// Levels driven on `width` flag wires, LSB first.
pub fn flag_levels(flag: u8, width: u32) -> impl Iterator<Item = Pam3Symbol> {
    (0..width).map(move |bit| flag_bit_level((flag >> bit) & 1 == 1))
}

/// Baseline-vs-encoded comparison for one encoding over one trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub term_power_baseline: f64,
    pub term_power_encoded: f64,
    pub term_ratio_percent: f64,
    pub switch_power_baseline: f64,
    pub switch_power_encoded: f64,
    /// `None` when the baseline has no transitions.
    pub switch_ratio_percent: Option<f64>,
}

impl PowerReport {
    /// Fails with [`PowerError::ZeroBaseline`] when baseline termination power is zero.
    pub fn compare(
        term_power_baseline: f64,
        term_power_encoded: f64,
        switch_power_baseline: f64,
        switch_power_encoded: f64,
    ) -> Result<Self, PowerError> {
        Ok(PowerReport {
            term_power_baseline,
            term_power_encoded,
            term_ratio_percent: termination_ratio(term_power_encoded, term_power_baseline)?,
            switch_power_baseline,
            switch_power_encoded,
            switch_ratio_percent: termination_ratio(switch_power_encoded, switch_power_baseline).ok(),
        })
    }
}
