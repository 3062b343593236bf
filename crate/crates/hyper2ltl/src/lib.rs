//! Toolkit for second-order HyperLTL over finite lasso-trace universes.
//!
//! The crate provides, layer by layer:
//!
//! - [`traces`]: ultimately-periodic traces (`stem · loop^ω`), finite trace
//!   sets, transition systems, and bounded lasso enumeration.
//! - [`logic`]: the formula AST (trace and set quantifiers, min/max-guarded
//!   set quantifiers, an LTL body), concrete syntax, prenexing, and shape
//!   validation for the least-fixed-point fragment.
//! - [`eval`]: brute-force truth evaluation under standard, closed-world,
//!   and min/max semantics, plus bounded model checking.
//! - [`lfp`]: least-fixed-point computation with stage tracking, sentence
//!   evaluation, and witness trees.
//! - [`arith`]: third-order arithmetic formulas with a bounded-scope
//!   evaluator and Cantor-pairing trace encodings.
//! - [`reductions`]: the syntactic translations between the logics and
//!   arithmetic, and a library of named formula/system artifacts.
//!
//! All values are immutable after construction and all operations are pure,
//! so everything is safe to use from multiple threads without coordination.

pub mod arith;
pub mod eval;
pub mod lfp;
pub mod logic;
pub mod reductions;
pub mod traces;

pub use arith::{ArithFormula, ScopeBounds};
pub use eval::{EvalError, EvalLimits, EvalMode, Evaluator};
pub use lfp::{FixpointTrace, WitnessTree};
pub use logic::{Formula, FormulaNode, LfpSentence, LtlBody, Polarity, Quantifier};
pub use reductions::ReductionError;
pub use traces::{Alphabet, Assignment, LassoTrace, TraceSet, TransitionSystem};
