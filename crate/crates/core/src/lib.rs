//! Low-power data encodings for a PAM-3 DRAM bus.
//!
//! Three 8-bit words are modulated onto two lines of eight PAM-3 symbols
//! ([`modulation`]). Each frame can then be rewritten by one of three
//! encoders ([`encoders`]) that move symbols onto cheaper line levels, with a
//! small flag telling the receiver how to undo the conversion. [`power`]
//! prices frames by termination and switching power, and [`analysis`] runs
//! whole traces ([`trace`]) through the encoders and reports ratios against
//! the unencoded baseline ([`report`]).

pub mod analysis;
pub mod cli;
pub mod encoders;
pub mod modulation;
pub mod power;
pub mod report;
pub mod trace;

pub use analysis::{analyze_trace, signal_distribution, AnalysisError, AnalysisOptions, TraceStats};
pub use encoders::{
    brute_force_best_permutation, decode, decode_dbi, decode_mf, decode_sort, encode, encode_dbi, encode_mf,
    encode_sort, Algorithm, CodecError, EncodedFrame, PermutationCode,
};
pub use modulation::{count_symbols, demodulate, modulate, FrameError, Pam3Frame, Pam3Symbol, SymbolCounts, Word24};
pub use power::{switching_power, termination_power, termination_ratio, PowerError, PowerModel};
pub use trace::{frame_records, generate_random_trace, parse_raw_trace, parse_text_trace, FrameStream, TraceRecord};
