//! Third-order arithmetic over (+, ·, <, ∈): ASTs, Cantor pairing, trace
//! encodings, a formula library, and a bounded-scope evaluator.
//!
//! Formulas quantify over three orders of variables: naturals, sets of
//! naturals, and sets of sets of naturals. Traces become sets of naturals
//! by pairing positions with proposition indices, so trace sets become
//! families of sets and the trace-level reductions can be cross-checked
//! against plain arithmetic.
//!
//! Truth in full arithmetic is out of reach, so [`eval_arith_bounded`]
//! evaluates against explicit finite scopes ([`ScopeBounds`]): first-order
//! variables range over an initial segment of the naturals, higher-order
//! variables over explicitly listed sets and families. Verdicts are exact
//! for the given scopes but only approximate truth in the naturals;
//! [`probe_stability`] re-checks a verdict at a grown first-order bound to
//! flag unstable answers.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::traces::{LassoTrace, TransitionSystem};

pub mod text;

pub use text::parse_arith;

/// Errors from parsing, validating, or evaluating arithmetic formulas.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("variable {0} is not bound and not in the environment")]
    UnknownVariable(String),
    #[error("variable {var} is used at order {found} but has order {expected}")]
    OrderMismatch { var: String, expected: u8, found: u8 },
    #[error("arithmetic overflow while evaluating a term")]
    Overflow,
    #[error("evaluation exceeded {0} steps; shrink the bounds")]
    StepCap(u64),
    #[error("powerset scopes require first_bound <= {max}, got {got}")]
    PowersetTooLarge { max: u64, got: u64 },
}

/// First-order term: variables, numerals, sums, products, and the pairing
/// function as syntactic sugar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArithTerm {
    Var(String),
    Const(u64),
    Add(Box<ArithTerm>, Box<ArithTerm>),
    Mul(Box<ArithTerm>, Box<ArithTerm>),
    Pair(Box<ArithTerm>, Box<ArithTerm>),
}

impl ArithTerm {
    pub fn var(name: impl Into<String>) -> ArithTerm {
        ArithTerm::Var(name.into())
    }

    pub fn num(n: u64) -> ArithTerm {
        ArithTerm::Const(n)
    }

    pub fn add(self, other: ArithTerm) -> ArithTerm {
        ArithTerm::Add(Box::new(self), Box::new(other))
    }

    pub fn mul(self, other: ArithTerm) -> ArithTerm {
        ArithTerm::Mul(Box::new(self), Box::new(other))
    }

    pub fn pair(self, other: ArithTerm) -> ArithTerm {
        ArithTerm::Pair(Box::new(self), Box::new(other))
    }

    fn node_count(&self) -> usize {
        match self {
            ArithTerm::Var(_) | ArithTerm::Const(_) => 1,
            ArithTerm::Add(a, b) | ArithTerm::Mul(a, b) | ArithTerm::Pair(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }

    fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            ArithTerm::Var(v) => {
                out.insert(v.clone());
            }
            ArithTerm::Const(_) => {}
            ArithTerm::Add(a, b) | ArithTerm::Mul(a, b) | ArithTerm::Pair(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }
}

/// Formula of third-order arithmetic. `InSet` relates a first-order term
/// to a second-order variable; `InFamily` relates a second-order variable
/// to a third-order variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArithFormula {
    Less(ArithTerm, ArithTerm),
    Eq(ArithTerm, ArithTerm),
    InSet(ArithTerm, String),
    InFamily(String, String),
    Not(Box<ArithFormula>),
    And(Box<ArithFormula>, Box<ArithFormula>),
    Or(Box<ArithFormula>, Box<ArithFormula>),
    Implies(Box<ArithFormula>, Box<ArithFormula>),
    Iff(Box<ArithFormula>, Box<ArithFormula>),
    Quant { order: u8, exists: bool, var: String, body: Box<ArithFormula> },
}

impl ArithFormula {
    pub fn less(a: ArithTerm, b: ArithTerm) -> ArithFormula {
        ArithFormula::Less(a, b)
    }

    pub fn eq(a: ArithTerm, b: ArithTerm) -> ArithFormula {
        ArithFormula::Eq(a, b)
    }

    pub fn in_set(t: ArithTerm, set: impl Into<String>) -> ArithFormula {
        ArithFormula::InSet(t, set.into())
    }

    pub fn in_family(set: impl Into<String>, family: impl Into<String>) -> ArithFormula {
        ArithFormula::InFamily(set.into(), family.into())
    }

    pub fn not(self) -> ArithFormula {
        ArithFormula::Not(Box::new(self))
    }

    pub fn and(self, other: ArithFormula) -> ArithFormula {
        ArithFormula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: ArithFormula) -> ArithFormula {
        ArithFormula::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: ArithFormula) -> ArithFormula {
        ArithFormula::Implies(Box::new(self), Box::new(other))
    }

    pub fn iff(self, other: ArithFormula) -> ArithFormula {
        ArithFormula::Iff(Box::new(self), Box::new(other))
    }

    /// Existential or universal quantifier of the given order (1 to 3).
    pub fn quant(
        order: u8,
        exists: bool,
        var: impl Into<String>,
        body: ArithFormula,
    ) -> ArithFormula {
        assert!((1..=3).contains(&order), "quantifier order must be 1, 2, or 3");
        ArithFormula::Quant { order, exists, var: var.into(), body: Box::new(body) }
    }

    /// Left-folded conjunction; the empty conjunction is `0 = 0`.
    pub fn and_all<I: IntoIterator<Item = ArithFormula>>(items: I) -> ArithFormula {
        let mut it = items.into_iter();
        match it.next() {
            Some(first) => it.fold(first, ArithFormula::and),
            None => ArithFormula::eq(ArithTerm::num(0), ArithTerm::num(0)),
        }
    }

    /// Left-folded disjunction; the empty disjunction is `0 < 0`.
    pub fn or_all<I: IntoIterator<Item = ArithFormula>>(items: I) -> ArithFormula {
        let mut it = items.into_iter();
        match it.next() {
            Some(first) => it.fold(first, ArithFormula::or),
            None => ArithFormula::less(ArithTerm::num(0), ArithTerm::num(0)),
        }
    }

    /// Total number of formula and term nodes.
    pub fn node_count(&self) -> usize {
        match self {
            ArithFormula::Less(a, b) | ArithFormula::Eq(a, b) => {
                1 + a.node_count() + b.node_count()
            }
            ArithFormula::InSet(t, _) => 2 + t.node_count(),
            ArithFormula::InFamily(_, _) => 3,
            ArithFormula::Not(a) => 1 + a.node_count(),
            ArithFormula::And(a, b)
            | ArithFormula::Or(a, b)
            | ArithFormula::Implies(a, b)
            | ArithFormula::Iff(a, b) => 1 + a.node_count() + b.node_count(),
            ArithFormula::Quant { body, .. } => 1 + body.node_count(),
        }
    }

    /// True when some quantifier of the given order occurs.
    pub fn has_quantifier_of_order(&self, order: u8) -> bool {
        match self {
            ArithFormula::Less(..)
            | ArithFormula::Eq(..)
            | ArithFormula::InSet(..)
            | ArithFormula::InFamily(..) => false,
            ArithFormula::Not(a) => a.has_quantifier_of_order(order),
            ArithFormula::And(a, b)
            | ArithFormula::Or(a, b)
            | ArithFormula::Implies(a, b)
            | ArithFormula::Iff(a, b) => {
                a.has_quantifier_of_order(order) || b.has_quantifier_of_order(order)
            }
            ArithFormula::Quant { order: o, body, .. } => {
                *o == order || body.has_quantifier_of_order(order)
            }
        }
    }

    /// Infers the order of every free variable and checks that each
    /// variable is used at one consistent order.
    pub fn infer_orders(&self) -> Result<BTreeMap<String, u8>, ArithError> {
        let mut free = BTreeMap::new();
        let mut bound = Vec::new();
        self.infer(&mut bound, &mut free)?;
        Ok(free)
    }

    fn infer(
        &self,
        bound: &mut Vec<(String, u8)>,
        free: &mut BTreeMap<String, u8>,
    ) -> Result<(), ArithError> {
        // Innermost binder wins; otherwise record or check the free use.
        fn use_var(
            name: &str,
            order: u8,
            bound: &[(String, u8)],
            free: &mut BTreeMap<String, u8>,
        ) -> Result<(), ArithError> {
            if let Some((_, bound_order)) = bound.iter().rev().find(|(n, _)| n == name) {
                if *bound_order != order {
                    return Err(ArithError::OrderMismatch {
                        var: name.to_string(),
                        expected: *bound_order,
                        found: order,
                    });
                }
                return Ok(());
            }
            match free.get(name) {
                Some(prev) if *prev != order => Err(ArithError::OrderMismatch {
                    var: name.to_string(),
                    expected: *prev,
                    found: order,
                }),
                _ => {
                    free.insert(name.to_string(), order);
                    Ok(())
                }
            }
        }
        fn term_vars(
            t: &ArithTerm,
            bound: &[(String, u8)],
            free: &mut BTreeMap<String, u8>,
        ) -> Result<(), ArithError> {
            let mut vs = BTreeSet::new();
            t.vars(&mut vs);
            for v in vs {
                use_var(&v, 1, bound, free)?;
            }
            Ok(())
        }
        match self {
            ArithFormula::Less(a, b) | ArithFormula::Eq(a, b) => {
                term_vars(a, bound, free)?;
                term_vars(b, bound, free)
            }
            ArithFormula::InSet(t, set) => {
                term_vars(t, bound, free)?;
                use_var(set, 2, bound, free)
            }
            ArithFormula::InFamily(set, family) => {
                use_var(set, 2, bound, free)?;
                use_var(family, 3, bound, free)
            }
            ArithFormula::Not(a) => a.infer(bound, free),
            ArithFormula::And(a, b)
            | ArithFormula::Or(a, b)
            | ArithFormula::Implies(a, b)
            | ArithFormula::Iff(a, b) => {
                a.infer(bound, free)?;
                b.infer(bound, free)
            }
            ArithFormula::Quant { order, var, body, .. } => {
                bound.push((var.clone(), *order));
                let r = body.infer(bound, free);
                bound.pop();
                r
            }
        }
    }
}

/// Value of an arithmetic variable: a natural, a set of naturals, or a
/// family of sets of naturals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArithValue {
    Nat(u64),
    Set(BTreeSet<u64>),
    Family(Vec<BTreeSet<u64>>),
}

impl ArithValue {
    fn order(&self) -> u8 {
        match self {
            ArithValue::Nat(_) => 1,
            ArithValue::Set(_) => 2,
            ArithValue::Family(_) => 3,
        }
    }
}

/// Valuation of free variables.
pub type ArithEnv = BTreeMap<String, ArithValue>;

/// Explicit finite quantifier scopes: first-order variables range over
/// `0..first_bound`, second-order variables over `second_universe`, and
/// third-order variables over `third_universe`. Members of the second
/// universe may contain naturals beyond `first_bound`, since encoded
/// traces use pair values that grow quadratically in the position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeBounds {
    pub first_bound: u64,
    pub second_universe: Vec<BTreeSet<u64>>,
    pub third_universe: Vec<Vec<BTreeSet<u64>>>,
}

/// Largest `first_bound` accepted by [`ScopeBounds::powerset_of_first_bound`].
pub const MAX_POWERSET_BOUND: u64 = 4;

impl ScopeBounds {
    /// Scopes with empty higher-order universes.
    pub fn new(first_bound: u64) -> ScopeBounds {
        ScopeBounds { first_bound, second_universe: Vec::new(), third_universe: Vec::new() }
    }

    pub fn with_second_universe(mut self, sets: Vec<BTreeSet<u64>>) -> ScopeBounds {
        self.second_universe = sets;
        self
    }

    pub fn with_third_universe(mut self, families: Vec<Vec<BTreeSet<u64>>>) -> ScopeBounds {
        self.third_universe = families;
        self
    }

    /// Second universe = all subsets of `0..first_bound`, third universe =
    /// all families of those subsets. Exponential twice over, hence the
    /// [`MAX_POWERSET_BOUND`] cap.
    pub fn powerset_of_first_bound(first_bound: u64) -> Result<ScopeBounds, ArithError> {
        if first_bound > MAX_POWERSET_BOUND {
            return Err(ArithError::PowersetTooLarge { max: MAX_POWERSET_BOUND, got: first_bound });
        }
        let second = powerset_of_segment(first_bound);
        let third = powerset_of_family(&second);
        Ok(ScopeBounds {
            first_bound,
            second_universe: second,
            third_universe: third,
        })
    }
}

/// All subsets of `0..bound` in bitmask order.
pub fn powerset_of_segment(bound: u64) -> Vec<BTreeSet<u64>> {
    let n = bound as u32;
    (0u64..1 << n)
        .map(|mask| (0..n as u64).filter(|i| mask & (1 << i) != 0).collect())
        .collect()
}

/// All sub-families of the given family, in bitmask order.
pub fn powerset_of_family(sets: &[BTreeSet<u64>]) -> Vec<Vec<BTreeSet<u64>>> {
    let n = sets.len() as u32;
    (0u64..1 << n)
        .map(|mask| {
            (0..n as usize).filter(|i| mask & (1 << i) != 0).map(|i| sets[i].clone()).collect()
        })
        .collect()
}

/// Cantor pairing: diagonal enumeration of pairs of naturals.
pub fn cantor_pair(i: u64, j: u64) -> u64 {
    let s = i as u128 + j as u128;
    u64::try_from(s * (s + 1) / 2 + j as u128).expect("pairing value exceeds u64")
}

/// Inverse of [`cantor_pair`].
pub fn cantor_unpair(n: u64) -> (u64, u64) {
    // Diagonal index: largest w with w(w+1)/2 <= n.
    let mut w = isqrt(8 * n as u128 + 1).saturating_sub(1) / 2;
    while (w + 1) * (w + 2) / 2 <= n as u128 {
        w += 1;
    }
    while w * (w + 1) / 2 > n as u128 {
        w -= 1;
    }
    let t = (w * (w + 1) / 2) as u64;
    let j = n - t;
    let i = w as u64 - j;
    (i, j)
}

fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = n;
    let mut y = (x + 1) / 2;
    while y < x {
        x = y;
        y = (x + n / x) / 2;
    }
    x
}

/// Membership test for the set encoding of a trace: `n` is in it exactly
/// when `n = pair(j, c)` for a proposition index `c` of the trace's
/// alphabet that holds at position `j`.
pub fn trace_encoding_contains(t: &LassoTrace, n: u64) -> bool {
    let (j, c) = cantor_unpair(n);
    (c as usize) < t.alphabet().len() && t.holds_at(c as usize, j as usize)
}

/// The pairs `pair(j, c)` for all positions `j < positions` and all
/// propositions holding there.
pub fn encode_trace_prefix(t: &LassoTrace, positions: u64) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    for j in 0..positions {
        for c in 0..t.alphabet().len() {
            if t.holds_at(c, j as usize) {
                out.insert(cantor_pair(j, c as u64));
            }
        }
    }
    out
}

/// The encoding of a trace intersected with `0..limit`.
pub fn encode_trace_restriction(t: &LassoTrace, limit: u64) -> BTreeSet<u64> {
    (0..limit).filter(|&n| trace_encoding_contains(t, n)).collect()
}

/// Smallest restriction limit that covers every pair `pair(j, c)` probed
/// by formulas whose position variables stay below `positions` over an
/// alphabet of `ap_count` propositions.
pub fn encoding_limit(positions: u64, ap_count: u64) -> u64 {
    if positions == 0 || ap_count == 0 {
        return 0;
    }
    cantor_pair(positions - 1, ap_count - 1) + 1
}

const STEP_CAP: u64 = 1 << 26;

/// Evaluates a formula against explicit finite scopes. Quantifiers range
/// over the scopes in [`ScopeBounds`], free variables are read from the
/// environment, and atoms are computed exactly. The verdict is decisive
/// for the scopes but only bounded evidence about the naturals.
pub fn eval_arith_bounded(
    f: &ArithFormula,
    bounds: &ScopeBounds,
    env: &ArithEnv,
) -> Result<bool, ArithError> {
    let mut scope = env.clone();
    let mut steps = 0u64;
    eval(f, bounds, &mut scope, &mut steps)
}

/// Outcome of re-checking a verdict at a grown first-order bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityProbe {
    pub verdict: bool,
    pub grown_verdict: bool,
}

impl StabilityProbe {
    /// True when growing the bound did not flip the verdict.
    pub fn stable(&self) -> bool {
        self.verdict == self.grown_verdict
    }
}

/// Evaluates at the given bounds and again with `first_bound` grown by
/// `grow`, reporting both verdicts so callers can flag instability
/// instead of claiming truth.
pub fn probe_stability(
    f: &ArithFormula,
    bounds: &ScopeBounds,
    env: &ArithEnv,
    grow: u64,
) -> Result<StabilityProbe, ArithError> {
    let verdict = eval_arith_bounded(f, bounds, env)?;
    let mut grown = bounds.clone();
    grown.first_bound += grow;
    let grown_verdict = eval_arith_bounded(f, &grown, env)?;
    Ok(StabilityProbe { verdict, grown_verdict })
}

fn eval(
    f: &ArithFormula,
    bounds: &ScopeBounds,
    scope: &mut ArithEnv,
    steps: &mut u64,
) -> Result<bool, ArithError> {
    *steps += 1;
    if *steps > STEP_CAP {
        return Err(ArithError::StepCap(STEP_CAP));
    }
    match f {
        ArithFormula::Less(a, b) => Ok(eval_term(a, scope)? < eval_term(b, scope)?),
        ArithFormula::Eq(a, b) => Ok(eval_term(a, scope)? == eval_term(b, scope)?),
        ArithFormula::InSet(t, set) => {
            let n = eval_term(t, scope)?;
            match scope.get(set) {
                Some(ArithValue::Set(s)) => Ok(s.contains(&n)),
                Some(v) => Err(ArithError::OrderMismatch {
                    var: set.clone(),
                    expected: v.order(),
                    found: 2,
                }),
                None => Err(ArithError::UnknownVariable(set.clone())),
            }
        }
        ArithFormula::InFamily(set, family) => {
            let s = match scope.get(set) {
                Some(ArithValue::Set(s)) => s.clone(),
                Some(v) => {
                    return Err(ArithError::OrderMismatch {
                        var: set.clone(),
                        expected: v.order(),
                        found: 2,
                    })
                }
                None => return Err(ArithError::UnknownVariable(set.clone())),
            };
            match scope.get(family) {
                Some(ArithValue::Family(fam)) => Ok(fam.iter().any(|member| *member == s)),
                Some(v) => Err(ArithError::OrderMismatch {
                    var: family.clone(),
                    expected: v.order(),
                    found: 3,
                }),
                None => Err(ArithError::UnknownVariable(family.clone())),
            }
        }
        ArithFormula::Not(a) => Ok(!eval(a, bounds, scope, steps)?),
        ArithFormula::And(a, b) => {
            Ok(eval(a, bounds, scope, steps)? && eval(b, bounds, scope, steps)?)
        }
        ArithFormula::Or(a, b) => {
            Ok(eval(a, bounds, scope, steps)? || eval(b, bounds, scope, steps)?)
        }
        ArithFormula::Implies(a, b) => {
            Ok(!eval(a, bounds, scope, steps)? || eval(b, bounds, scope, steps)?)
        }
        ArithFormula::Iff(a, b) => {
            Ok(eval(a, bounds, scope, steps)? == eval(b, bounds, scope, steps)?)
        }
        ArithFormula::Quant { order, exists, var, body } => {
            let saved = scope.get(var).cloned();
            let mut decided = !*exists;
            match order {
                1 => {
                    for v in 0..bounds.first_bound {
                        scope.insert(var.clone(), ArithValue::Nat(v));
                        if eval(body, bounds, scope, steps)? == *exists {
                            decided = *exists;
                            break;
                        }
                    }
                }
                2 => {
                    for s in &bounds.second_universe {
                        scope.insert(var.clone(), ArithValue::Set(s.clone()));
                        if eval(body, bounds, scope, steps)? == *exists {
                            decided = *exists;
                            break;
                        }
                    }
                }
                _ => {
                    for fam in &bounds.third_universe {
                        scope.insert(var.clone(), ArithValue::Family(fam.clone()));
                        if eval(body, bounds, scope, steps)? == *exists {
                            decided = *exists;
                            break;
                        }
                    }
                }
            }
            match saved {
                Some(v) => scope.insert(var.clone(), v),
                None => scope.remove(var),
            };
            Ok(decided)
        }
    }
}

fn eval_term(t: &ArithTerm, scope: &ArithEnv) -> Result<u64, ArithError> {
    match t {
        ArithTerm::Var(v) => match scope.get(v) {
            Some(ArithValue::Nat(n)) => Ok(*n),
            Some(val) => Err(ArithError::OrderMismatch {
                var: v.clone(),
                expected: val.order(),
                found: 1,
            }),
            None => Err(ArithError::UnknownVariable(v.clone())),
        },
        ArithTerm::Const(n) => Ok(*n),
        ArithTerm::Add(a, b) => {
            eval_term(a, scope)?.checked_add(eval_term(b, scope)?).ok_or(ArithError::Overflow)
        }
        ArithTerm::Mul(a, b) => {
            eval_term(a, scope)?.checked_mul(eval_term(b, scope)?).ok_or(ArithError::Overflow)
        }
        ArithTerm::Pair(a, b) => Ok(cantor_pair(eval_term(a, scope)?, eval_term(b, scope)?)),
    }
}

/// Ready-made arithmetic formulas: trace and transition-system encodings.
pub mod library {
    use super::*;

    fn v(name: &str) -> ArithTerm {
        ArithTerm::var(name)
    }

    fn pair(a: ArithTerm, b: ArithTerm) -> ArithTerm {
        a.pair(b)
    }

    fn ge(a: ArithTerm, b: ArithTerm) -> ArithFormula {
        ArithFormula::less(a, b).not()
    }

    /// A set `Y` encodes a trace: no pair with a proposition index at or
    /// beyond the alphabet size is a member.
    pub fn is_trace(ap_count: u64) -> ArithFormula {
        ArithFormula::quant(
            1,
            false,
            "x",
            ArithFormula::quant(
                1,
                false,
                "y",
                ge(v("y"), ArithTerm::num(ap_count))
                    .implies(ArithFormula::in_set(pair(v("x"), v("y")), "Y").not()),
            ),
        )
    }

    /// A family `YY` contains only sets encoding traces.
    pub fn only_traces(ap_count: u64) -> ArithFormula {
        ArithFormula::quant(
            2,
            false,
            "Y",
            ArithFormula::in_family("Y", "YY").implies(is_trace(ap_count)),
        )
    }

    /// A family `YY` contains exactly the sets encoding traces.
    pub fn all_traces(ap_count: u64) -> ArithFormula {
        only_traces(ap_count).and(ArithFormula::quant(
            2,
            false,
            "Y",
            is_trace(ap_count).implies(ArithFormula::in_family("Y", "YY")),
        ))
    }

    /// `n`, `E`, `I`, `L` encode a transition system on vertices
    /// `0..n`: edges are vertex pairs, every vertex has a successor,
    /// initial vertices are vertices, and labels pair a vertex with a
    /// proposition index below the alphabet size.
    pub fn is_ts(ap_count: u64) -> ArithFormula {
        let nonempty = ArithFormula::less(ArithTerm::num(0), v("n"));
        let edges_are_pairs = ArithFormula::quant(
            1,
            false,
            "y",
            ArithFormula::in_set(v("y"), "E").implies(ArithFormula::quant(
                1,
                true,
                "v",
                ArithFormula::quant(
                    1,
                    true,
                    "v'",
                    ArithFormula::less(v("v"), v("n"))
                        .and(ArithFormula::less(v("v'"), v("n")))
                        .and(ArithFormula::eq(v("y"), pair(v("v"), v("v'")))),
                ),
            )),
        );
        let successors = ArithFormula::quant(
            1,
            false,
            "v",
            ArithFormula::less(v("v"), v("n")).implies(ArithFormula::quant(
                1,
                true,
                "v'",
                ArithFormula::less(v("v'"), v("n"))
                    .and(ArithFormula::in_set(pair(v("v"), v("v'")), "E")),
            )),
        );
        let initial_are_vertices = ArithFormula::quant(
            1,
            false,
            "v",
            ArithFormula::in_set(v("v"), "I").implies(ArithFormula::less(v("v"), v("n"))),
        );
        let labels_are_pairs = ArithFormula::quant(
            1,
            false,
            "y",
            ArithFormula::in_set(v("y"), "L").implies(ArithFormula::quant(
                1,
                true,
                "v",
                ArithFormula::quant(
                    1,
                    true,
                    "p",
                    ArithFormula::less(v("v"), v("n"))
                        .and(ArithFormula::less(v("p"), ArithTerm::num(ap_count)))
                        .and(ArithFormula::eq(v("y"), pair(v("v"), v("p")))),
                ),
            )),
        );
        ArithFormula::and_all([
            nonempty,
            edges_are_pairs,
            successors,
            initial_are_vertices,
            labels_are_pairs,
        ])
    }

    /// A set `P` encodes a path through the system encoded by `n`, `E`,
    /// `I`: exactly one vertex per position, an initial start, and
    /// successive vertices connected by edges.
    pub fn is_path() -> ArithFormula {
        let one_vertex_per_position = ArithFormula::quant(
            1,
            false,
            "j",
            ArithFormula::quant(
                1,
                true,
                "v",
                ArithFormula::less(v("v"), v("n"))
                    .and(ArithFormula::in_set(pair(v("j"), v("v")), "P"))
                    .and(
                        ArithFormula::quant(
                            1,
                            true,
                            "v'",
                            ArithFormula::eq(v("v'"), v("v"))
                                .not()
                                .and(ArithFormula::in_set(pair(v("j"), v("v'")), "P")),
                        )
                        .not(),
                    ),
            ),
        );
        let starts_initial = ArithFormula::quant(
            1,
            true,
            "v",
            ArithFormula::in_set(v("v"), "I")
                .and(ArithFormula::in_set(pair(ArithTerm::num(0), v("v")), "P")),
        );
        let connected = ArithFormula::quant(
            1,
            false,
            "j",
            ArithFormula::quant(
                1,
                true,
                "v",
                ArithFormula::quant(
                    1,
                    true,
                    "v'",
                    ArithFormula::in_set(pair(v("j"), v("v")), "P")
                        .and(ArithFormula::in_set(
                            pair(v("j").add(ArithTerm::num(1)), v("v'")),
                            "P",
                        ))
                        .and(ArithFormula::in_set(pair(v("v"), v("v'")), "E")),
                ),
            ),
        );
        ArithFormula::and_all([one_vertex_per_position, starts_initial, connected])
    }

    /// A set `T` encodes the trace labeling the path encoded by `P` under
    /// the labeling `L`: a proposition holds at a position exactly when
    /// the vertex visited there carries it.
    pub fn trace_of() -> ArithFormula {
        ArithFormula::quant(
            1,
            false,
            "j",
            ArithFormula::quant(
                1,
                false,
                "p",
                ArithFormula::in_set(pair(v("j"), v("p")), "T").iff(ArithFormula::quant(
                    1,
                    true,
                    "v",
                    ArithFormula::in_set(pair(v("j"), v("v")), "P")
                        .and(ArithFormula::in_set(pair(v("v"), v("p")), "L")),
                )),
            ),
        )
    }

    /// A set `Y` encodes a path of this specific system, with vertices,
    /// initial vertices, and edges written out as constants: members stay
    /// below the vertex count, at most one vertex per position, an
    /// initial start, and every position takes one of the listed edges.
    pub fn system_path(ts: &TransitionSystem) -> ArithFormula {
        let n = ts.len() as u64;
        let in_range = ArithFormula::quant(
            1,
            false,
            "x",
            ArithFormula::quant(
                1,
                false,
                "y",
                ge(v("y"), ArithTerm::num(n))
                    .implies(ArithFormula::in_set(pair(v("x"), v("y")), "Y").not()),
            ),
        );
        let functional = ArithFormula::quant(
            1,
            false,
            "x",
            ArithFormula::quant(
                1,
                false,
                "y0",
                ArithFormula::quant(
                    1,
                    false,
                    "y1",
                    ArithFormula::in_set(pair(v("x"), v("y0")), "Y")
                        .and(ArithFormula::in_set(pair(v("x"), v("y1")), "Y"))
                        .implies(ArithFormula::eq(v("y0"), v("y1"))),
                ),
            ),
        );
        let starts_initial = ArithFormula::or_all(ts.initial().iter().map(|&i| {
            ArithFormula::in_set(pair(ArithTerm::num(0), ArithTerm::num(i as u64)), "Y")
        }));
        let follows_edges = ArithFormula::quant(
            1,
            false,
            "j",
            ArithFormula::or_all(ts.edges().iter().map(|&(a, b)| {
                ArithFormula::in_set(pair(v("j"), ArithTerm::num(a as u64)), "Y").and(
                    ArithFormula::in_set(
                        pair(v("j").add(ArithTerm::num(1)), ArithTerm::num(b as u64)),
                        "Y",
                    ),
                )
            })),
        );
        ArithFormula::and_all([in_range, functional, starts_initial, follows_edges])
    }

    /// A set `Y` encodes the trace of some path of this specific system:
    /// a proposition index holds at a position exactly when the path
    /// visits a vertex labeled with it.
    pub fn system_trace(ts: &TransitionSystem) -> ArithFormula {
        let ap = ts.alphabet().clone();
        let linking = ArithFormula::quant(
            1,
            false,
            "j",
            ArithFormula::and_all((0..ap.len()).map(|c| {
                let holds_here =
                    ArithFormula::in_set(pair(v("j"), ArithTerm::num(c as u64)), "Y");
                let visits_labeled = ArithFormula::or_all(
                    (0..ts.len())
                        .filter(|&vx| ts.label(vx) & (1 << c) != 0)
                        .map(|vx| {
                            ArithFormula::in_set(pair(v("j"), ArithTerm::num(vx as u64)), "P")
                        }),
                );
                holds_here.iff(visits_labeled)
            })),
        );
        ArithFormula::quant(2, true, "P", rename_path_target(system_path(ts)).and(linking))
    }

    // system_path constrains "Y"; inside system_trace the path set is the
    // bound variable "P".
    fn rename_path_target(f: ArithFormula) -> ArithFormula {
        rename_set_var(f, "Y", "P")
    }

    /// Renames a free set or family variable. Callers must pick a target
    /// that no quantifier in `f` shadows.
    pub(crate) fn rename_set_var(f: ArithFormula, from: &str, to: &str) -> ArithFormula {
        match f {
            ArithFormula::InSet(t, s) => {
                let s = if s == from { to.to_string() } else { s };
                ArithFormula::InSet(t, s)
            }
            ArithFormula::InFamily(s, fam) => {
                let s = if s == from { to.to_string() } else { s };
                let fam = if fam == from { to.to_string() } else { fam };
                ArithFormula::InFamily(s, fam)
            }
            ArithFormula::Less(..) | ArithFormula::Eq(..) => f,
            ArithFormula::Not(a) => rename_set_var(*a, from, to).not(),
            ArithFormula::And(a, b) => {
                rename_set_var(*a, from, to).and(rename_set_var(*b, from, to))
            }
            ArithFormula::Or(a, b) => {
                rename_set_var(*a, from, to).or(rename_set_var(*b, from, to))
            }
            ArithFormula::Implies(a, b) => {
                rename_set_var(*a, from, to).implies(rename_set_var(*b, from, to))
            }
            ArithFormula::Iff(a, b) => {
                rename_set_var(*a, from, to).iff(rename_set_var(*b, from, to))
            }
            ArithFormula::Quant { order, exists, var, body } => {
                // Emitted formulas never shadow the renamed variable.
                ArithFormula::quant(order, exists, var, rename_set_var(*body, from, to))
            }
        }
    }

    /// `A2` encodes the same variable assignment as `A` except that the
    /// slot with this index now holds exactly the trace encoded by `Y`.
    /// Assignments store `pair(m, slot)` for every member `m` of the
    /// assigned trace encoding.
    pub fn assignment_update(slot: u64) -> ArithFormula {
        let kept = ArithFormula::in_set(v("z"), "A").and(
            ArithFormula::quant(
                1,
                true,
                "m",
                ArithFormula::eq(v("z"), pair(v("m"), ArithTerm::num(slot))),
            )
            .not(),
        );
        let written = ArithFormula::quant(
            1,
            true,
            "m",
            ArithFormula::in_set(v("m"), "Y")
                .and(ArithFormula::eq(v("z"), pair(v("m"), ArithTerm::num(slot)))),
        );
        ArithFormula::quant(
            1,
            false,
            "z",
            ArithFormula::in_set(v("z"), "A2").iff(kept.or(written)),
        )
    }
}
