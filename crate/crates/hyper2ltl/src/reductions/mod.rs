//! Source-to-source translations between the logic's fragments and into
//! arithmetic, plus the stock artifacts they are built from.
//!
//! Every pass is a pure function from ASTs to ASTs: identical inputs give
//! byte-identical outputs, and no pass consults ambient state. Fresh
//! variable names are drawn deterministically from the input's own name
//! pool.

use thiserror::Error;

use crate::logic::LogicError;
use crate::traces::TraceError;

pub mod arithmetize;
pub mod closed_world;
pub mod library;
pub mod minmax;

pub use arithmetize::{ar_translate, ar_translate_open, fssat_arith_encode, mc_arith_encode};
pub use closed_world::cw_to_standard;
pub use library::{library, LibraryItem};
pub use minmax::{
    enc_marked, ext_traceset, ext_transition_system, minmax_encode, mm_desugar, MinMaxEncoding,
};

/// Errors raised by the translation passes and artifact builders.
#[derive(Debug, Error)]
pub enum ReductionError {
    /// The ambient set variable occurs where the pass forbids it.
    #[error("ambient set variable not supported here: {0}")]
    AmbientPresent(String),
    /// The input lies outside the fragment the pass accepts.
    #[error("input outside the supported fragment: {0}")]
    Fragment(String),
    /// Alphabets that must be disjoint or nested are not.
    #[error("alphabet mismatch: {0}")]
    Alphabet(String),
    /// Unknown artifact name or malformed parameters.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Traces(#[from] TraceError),
}
