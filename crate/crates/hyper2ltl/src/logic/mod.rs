//! Formula ASTs, concrete syntax, normalization, and shape validation.
//!
//! A [`Formula`] is a tree of Boolean connectives over quantifier chains and
//! quantifier-free LTL bodies. Prenex sentences are the special case of a
//! single quantifier chain over one body; [`Formula::is_prenex`] and
//! [`Formula::prefix_and_body`] recover that view. Keeping the general tree
//! is what lets artifacts like a five-conjunct sentence keep their displayed
//! top-level structure, and it is required for guards of least-fixed-point
//! quantifiers, which conjoin quantifier-free seed constraints with a
//! universally quantified step rule.
//!
//! The membership shorthand `p |> X` ("the trace bound to p is a member of
//! the set bound to X") is kept as a primitive, position-independent atom of
//! the LTL body. It is equivalent to the defining existential formula
//! because traces over one alphabet are equal exactly when their canonical
//! lasso forms are equal. It is rejected under temporal operators.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::traces::{Alphabet, VAR_ALL, VAR_D};

mod lfp_shape;
mod parser;
mod prenex;
mod printer;

pub use lfp_shape::{validate_lfp_shape, LfpFixpoint, LfpSentence, TraceQuant};
pub use parser::{parse_formula, scan_props};
pub use prenex::{alpha_rename, normalize_prenex};

/// Errors from parsing, validation, and normalization.
#[derive(Debug, Error)]
pub enum LogicError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown proposition {0:?}")]
    UnknownProposition(String),
    #[error("membership atom {var} |> {set} cannot occur under a temporal operator")]
    InSetUnderTemporal { var: String, set: String },
    #[error("quantifier under a temporal operator; prenex the formula with normalize_prenex and keep quantifiers outside X/U/F/G")]
    QuantifierUnderTemporal,
    #[error("variable {0:?} is reserved and cannot be bound")]
    ReservedVariable(String),
    #[error("{0} is not a sentence: free trace variables {1:?}")]
    NotASentence(String, Vec<String>),
    #[error("lfp shape violation: {0}")]
    LfpShape(String),
}

/// Minimality (⋎-style) or maximality (⋏-style) polarity of a guarded
/// set quantifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Min,
    Max,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarity::Min => write!(f, "min"),
            Polarity::Max => write!(f, "max"),
        }
    }
}

/// Quantifier forms: plain set quantifiers, guarded min/max set
/// quantifiers, and trace quantifiers ranging over a named set variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quantifier {
    Set {
        exists: bool,
        var: String,
    },
    SetMM {
        exists: bool,
        var: String,
        polarity: Polarity,
        guard: Box<FormulaNode>,
    },
    Trace {
        exists: bool,
        var: String,
        range: String,
    },
}

impl Quantifier {
    pub fn exists(&self) -> bool {
        match self {
            Quantifier::Set { exists, .. }
            | Quantifier::SetMM { exists, .. }
            | Quantifier::Trace { exists, .. } => *exists,
        }
    }

    pub fn var(&self) -> &str {
        match self {
            Quantifier::Set { var, .. }
            | Quantifier::SetMM { var, .. }
            | Quantifier::Trace { var, .. } => var,
        }
    }

    /// True for plain and guarded set quantifiers.
    pub fn binds_set(&self) -> bool {
        !matches!(self, Quantifier::Trace { .. })
    }

    /// Flips ∃/∀ (used when negation is pushed through a prefix). Guarded
    /// quantifiers keep their guard and polarity.
    pub fn dual(&self) -> Quantifier {
        let mut q = self.clone();
        match &mut q {
            Quantifier::Set { exists, .. }
            | Quantifier::SetMM { exists, .. }
            | Quantifier::Trace { exists, .. } => *exists = !*exists,
        }
        q
    }
}

/// Quantifier-free LTL body over trace variables, plus the
/// position-independent membership atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LtlBody {
    Atom { prop: String, var: String },
    InSet { var: String, set: String },
    Not(Box<LtlBody>),
    And(Box<LtlBody>, Box<LtlBody>),
    Or(Box<LtlBody>, Box<LtlBody>),
    Implies(Box<LtlBody>, Box<LtlBody>),
    Iff(Box<LtlBody>, Box<LtlBody>),
    Xor(Box<LtlBody>, Box<LtlBody>),
    Next(Box<LtlBody>),
    Until(Box<LtlBody>, Box<LtlBody>),
    Eventually(Box<LtlBody>),
    Globally(Box<LtlBody>),
}

impl LtlBody {
    pub fn atom(prop: &str, var: &str) -> LtlBody {
        LtlBody::Atom { prop: prop.to_string(), var: var.to_string() }
    }

    pub fn in_set(var: &str, set: &str) -> LtlBody {
        LtlBody::InSet { var: var.to_string(), set: set.to_string() }
    }

    pub fn not(self) -> LtlBody {
        LtlBody::Not(Box::new(self))
    }

    pub fn and(self, other: LtlBody) -> LtlBody {
        LtlBody::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: LtlBody) -> LtlBody {
        LtlBody::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: LtlBody) -> LtlBody {
        LtlBody::Implies(Box::new(self), Box::new(other))
    }

    pub fn iff(self, other: LtlBody) -> LtlBody {
        LtlBody::Iff(Box::new(self), Box::new(other))
    }

    pub fn next(self) -> LtlBody {
        LtlBody::Next(Box::new(self))
    }

    pub fn until(self, other: LtlBody) -> LtlBody {
        LtlBody::Until(Box::new(self), Box::new(other))
    }

    pub fn eventually(self) -> LtlBody {
        LtlBody::Eventually(Box::new(self))
    }

    pub fn globally(self) -> LtlBody {
        LtlBody::Globally(Box::new(self))
    }

    /// Left-folded conjunction of a nonempty list.
    pub fn and_all<I: IntoIterator<Item = LtlBody>>(items: I) -> Option<LtlBody> {
        let mut it = items.into_iter();
        let first = it.next()?;
        Some(it.fold(first, |acc, b| acc.and(b)))
    }

    /// Left-folded disjunction of a nonempty list.
    pub fn or_all<I: IntoIterator<Item = LtlBody>>(items: I) -> Option<LtlBody> {
        let mut it = items.into_iter();
        let first = it.next()?;
        Some(it.fold(first, |acc, b| acc.or(b)))
    }

    /// The agreement shorthand: both traces carry the same letters over the
    /// listed propositions at every position, `G ⋀ (a[v1] <-> a[v2])`.
    pub fn eq_on<'a, I: IntoIterator<Item = &'a str>>(props: I, v1: &str, v2: &str) -> Option<LtlBody> {
        let mut props: Vec<&str> = props.into_iter().collect();
        props.sort_unstable();
        props.dedup();
        let conj = LtlBody::and_all(
            props
                .into_iter()
                .map(|p| LtlBody::atom(p, v1).iff(LtlBody::atom(p, v2))),
        )?;
        Some(conj.globally())
    }

    /// Rewrites to the core connectives {Atom, InSet, Not, Or, Next, Until}.
    pub fn desugar(&self) -> LtlBody {
        match self {
            LtlBody::Atom { .. } | LtlBody::InSet { .. } => self.clone(),
            LtlBody::Not(a) => a.desugar().not(),
            LtlBody::Or(a, b) => LtlBody::Or(Box::new(a.desugar()), Box::new(b.desugar())),
            LtlBody::And(a, b) => a.desugar().not().or(b.desugar().not()).not(),
            LtlBody::Implies(a, b) => a.desugar().not().or(b.desugar()),
            LtlBody::Iff(a, b) => {
                let (a, b) = (a.desugar(), b.desugar());
                // (a → b) ∧ (b → a) in core form.
                let fwd = a.clone().not().or(b.clone());
                let bwd = b.not().or(a);
                fwd.not().or(bwd.not()).not()
            }
            LtlBody::Xor(a, b) => LtlBody::Iff(a.clone(), b.clone()).desugar().not(),
            LtlBody::Next(a) => a.desugar().next(),
            LtlBody::Until(a, b) => LtlBody::Until(Box::new(a.desugar()), Box::new(b.desugar())),
            LtlBody::Eventually(a) => {
                let a = a.desugar();
                a.clone().not().until(a)
            }
            LtlBody::Globally(a) => {
                let fa = LtlBody::Eventually(Box::new(LtlBody::Not(a.clone()))).desugar();
                fa.not()
            }
        }
    }

    /// Trace variables occurring in atoms and membership atoms.
    pub fn trace_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            LtlBody::Atom { var, .. } => {
                out.insert(var.clone());
            }
            LtlBody::InSet { var, .. } => {
                out.insert(var.clone());
            }
            LtlBody::Not(a) | LtlBody::Next(a) | LtlBody::Eventually(a) | LtlBody::Globally(a) => {
                a.trace_vars(out)
            }
            LtlBody::And(a, b)
            | LtlBody::Or(a, b)
            | LtlBody::Implies(a, b)
            | LtlBody::Iff(a, b)
            | LtlBody::Xor(a, b)
            | LtlBody::Until(a, b) => {
                a.trace_vars(out);
                b.trace_vars(out);
            }
        }
    }

    /// Set variables mentioned by membership atoms.
    pub fn set_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            LtlBody::Atom { .. } => {}
            LtlBody::InSet { set, .. } => {
                out.insert(set.clone());
            }
            LtlBody::Not(a) | LtlBody::Next(a) | LtlBody::Eventually(a) | LtlBody::Globally(a) => {
                a.set_vars(out)
            }
            LtlBody::And(a, b)
            | LtlBody::Or(a, b)
            | LtlBody::Implies(a, b)
            | LtlBody::Iff(a, b)
            | LtlBody::Xor(a, b)
            | LtlBody::Until(a, b) => {
                a.set_vars(out);
                b.set_vars(out);
            }
        }
    }

    /// Propositions mentioned by atoms.
    pub fn props(&self, out: &mut BTreeSet<String>) {
        match self {
            LtlBody::Atom { prop, .. } => {
                out.insert(prop.clone());
            }
            LtlBody::InSet { .. } => {}
            LtlBody::Not(a) | LtlBody::Next(a) | LtlBody::Eventually(a) | LtlBody::Globally(a) => {
                a.props(out)
            }
            LtlBody::And(a, b)
            | LtlBody::Or(a, b)
            | LtlBody::Implies(a, b)
            | LtlBody::Iff(a, b)
            | LtlBody::Xor(a, b)
            | LtlBody::Until(a, b) => {
                a.props(out);
                b.props(out);
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            LtlBody::Atom { .. } | LtlBody::InSet { .. } => 1,
            LtlBody::Not(a) | LtlBody::Next(a) | LtlBody::Eventually(a) | LtlBody::Globally(a) => {
                1 + a.node_count()
            }
            LtlBody::And(a, b)
            | LtlBody::Or(a, b)
            | LtlBody::Implies(a, b)
            | LtlBody::Iff(a, b)
            | LtlBody::Xor(a, b)
            | LtlBody::Until(a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    // True iff a membership atom occurs under X/U/F/G.
    fn in_set_under_temporal(&self, under: bool) -> Option<(String, String)> {
        match self {
            LtlBody::Atom { .. } => None,
            LtlBody::InSet { var, set } => {
                if under {
                    Some((var.clone(), set.clone()))
                } else {
                    None
                }
            }
            LtlBody::Not(a) => a.in_set_under_temporal(under),
            LtlBody::And(a, b)
            | LtlBody::Or(a, b)
            | LtlBody::Implies(a, b)
            | LtlBody::Iff(a, b)
            | LtlBody::Xor(a, b) => a
                .in_set_under_temporal(under)
                .or_else(|| b.in_set_under_temporal(under)),
            LtlBody::Next(a) | LtlBody::Eventually(a) | LtlBody::Globally(a) => {
                a.in_set_under_temporal(true)
            }
            LtlBody::Until(a, b) => a
                .in_set_under_temporal(true)
                .or_else(|| b.in_set_under_temporal(true)),
        }
    }
}

/// Formula tree: Boolean connectives over quantifier chains and bodies.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FormulaNode {
    Body(LtlBody),
    Quant(Quantifier, Box<FormulaNode>),
    Not(Box<FormulaNode>),
    And(Box<FormulaNode>, Box<FormulaNode>),
    Or(Box<FormulaNode>, Box<FormulaNode>),
    Implies(Box<FormulaNode>, Box<FormulaNode>),
    Iff(Box<FormulaNode>, Box<FormulaNode>),
    Xor(Box<FormulaNode>, Box<FormulaNode>),
}

macro_rules! fuse_binary {
    ($name:ident, $variant:ident) => {
        /// Builds the connective, fusing two quantifier-free children into
        /// a single body node.
        pub fn $name(self, other: FormulaNode) -> FormulaNode {
            match (self, other) {
                (FormulaNode::Body(a), FormulaNode::Body(b)) => {
                    FormulaNode::Body(LtlBody::$variant(Box::new(a), Box::new(b)))
                }
                (a, b) => FormulaNode::$variant(Box::new(a), Box::new(b)),
            }
        }
    };
}

impl FormulaNode {
    pub fn body(b: LtlBody) -> FormulaNode {
        FormulaNode::Body(b)
    }

    pub fn quant(q: Quantifier, scope: FormulaNode) -> FormulaNode {
        FormulaNode::Quant(q, Box::new(scope))
    }

    /// Prefixes a chain of quantifiers (outermost first).
    pub fn quantify<I>(quants: I, scope: FormulaNode) -> FormulaNode
    where
        I: IntoIterator<Item = Quantifier>,
        I::IntoIter: DoubleEndedIterator,
    {
        quants
            .into_iter()
            .rev()
            .fold(scope, |acc, q| FormulaNode::Quant(q, Box::new(acc)))
    }

    pub fn not(self) -> FormulaNode {
        match self {
            FormulaNode::Body(b) => FormulaNode::Body(LtlBody::Not(Box::new(b))),
            other => FormulaNode::Not(Box::new(other)),
        }
    }

    fuse_binary!(and, And);
    fuse_binary!(or, Or);
    fuse_binary!(implies, Implies);
    fuse_binary!(iff, Iff);
    fuse_binary!(xor, Xor);

    /// Left-folded conjunction of a nonempty list.
    pub fn and_all<I: IntoIterator<Item = FormulaNode>>(items: I) -> Option<FormulaNode> {
        let mut it = items.into_iter();
        let first = it.next()?;
        Some(it.fold(first, |acc, n| acc.and(n)))
    }

    /// Flattens the top-level conjunction chain.
    pub fn conjuncts(&self) -> Vec<&FormulaNode> {
        match self {
            FormulaNode::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            other => vec![other],
        }
    }

    pub fn is_prenex(&self) -> bool {
        match self {
            FormulaNode::Body(_) => true,
            FormulaNode::Quant(_, scope) => scope.is_prenex(),
            _ => false,
        }
    }

    /// Prefix/body view for prenex trees.
    pub fn prefix_and_body(&self) -> Option<(Vec<&Quantifier>, &LtlBody)> {
        let mut prefix = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                FormulaNode::Quant(q, scope) => {
                    prefix.push(q);
                    cur = scope;
                }
                FormulaNode::Body(b) => return Some((prefix, b)),
                _ => return None,
            }
        }
    }

    /// True if any guarded min/max quantifier occurs (guards included).
    pub fn has_mm_quantifier(&self) -> bool {
        match self {
            FormulaNode::Body(_) => false,
            FormulaNode::Quant(Quantifier::SetMM { .. }, _) => true,
            FormulaNode::Quant(Quantifier::Set { .. } | Quantifier::Trace { .. }, scope) => {
                scope.has_mm_quantifier()
            }
            FormulaNode::Not(a) => a.has_mm_quantifier(),
            FormulaNode::And(a, b)
            | FormulaNode::Or(a, b)
            | FormulaNode::Implies(a, b)
            | FormulaNode::Iff(a, b)
            | FormulaNode::Xor(a, b) => a.has_mm_quantifier() || b.has_mm_quantifier(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            FormulaNode::Body(b) => b.node_count(),
            FormulaNode::Quant(q, scope) => {
                let guard = match q {
                    Quantifier::SetMM { guard, .. } => guard.node_count(),
                    _ => 0,
                };
                1 + guard + scope.node_count()
            }
            FormulaNode::Not(a) => 1 + a.node_count(),
            FormulaNode::And(a, b)
            | FormulaNode::Or(a, b)
            | FormulaNode::Implies(a, b)
            | FormulaNode::Iff(a, b)
            | FormulaNode::Xor(a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    /// Free trace and set variables, respecting quantifier binding. Guards
    /// of min/max quantifiers may use the quantified variable itself; its
    /// other variables contribute to the free set.
    pub fn free_vars(&self, free_traces: &mut BTreeSet<String>, free_sets: &mut BTreeSet<String>) {
        match self {
            FormulaNode::Body(b) => {
                b.trace_vars(free_traces);
                b.set_vars(free_sets);
            }
            FormulaNode::Quant(q, scope) => {
                let mut inner_traces = BTreeSet::new();
                let mut inner_sets = BTreeSet::new();
                scope.free_vars(&mut inner_traces, &mut inner_sets);
                match q {
                    Quantifier::Set { var, .. } => {
                        inner_sets.remove(var);
                    }
                    Quantifier::SetMM { var, guard, .. } => {
                        let mut gt = BTreeSet::new();
                        let mut gs = BTreeSet::new();
                        guard.free_vars(&mut gt, &mut gs);
                        gs.remove(var);
                        inner_traces.extend(gt);
                        inner_sets.extend(gs);
                        inner_sets.remove(var);
                    }
                    Quantifier::Trace { var, range, .. } => {
                        inner_traces.remove(var);
                        inner_sets.insert(range.clone());
                    }
                }
                free_traces.extend(inner_traces);
                free_sets.extend(inner_sets);
            }
            FormulaNode::Not(a) => a.free_vars(free_traces, free_sets),
            FormulaNode::And(a, b)
            | FormulaNode::Or(a, b)
            | FormulaNode::Implies(a, b)
            | FormulaNode::Iff(a, b)
            | FormulaNode::Xor(a, b) => {
                a.free_vars(free_traces, free_sets);
                b.free_vars(free_traces, free_sets);
            }
        }
    }

    /// Every variable name occurring anywhere (bound or free, any order);
    /// used to generate fresh names.
    pub fn all_var_names(&self, out: &mut BTreeSet<String>) {
        match self {
            FormulaNode::Body(b) => {
                b.trace_vars(out);
                b.set_vars(out);
            }
            FormulaNode::Quant(q, scope) => {
                out.insert(q.var().to_string());
                match q {
                    Quantifier::Trace { range, .. } => {
                        out.insert(range.clone());
                    }
                    Quantifier::SetMM { guard, .. } => guard.all_var_names(out),
                    Quantifier::Set { .. } => {}
                }
                scope.all_var_names(out);
            }
            FormulaNode::Not(a) => a.all_var_names(out),
            FormulaNode::And(a, b)
            | FormulaNode::Or(a, b)
            | FormulaNode::Implies(a, b)
            | FormulaNode::Iff(a, b)
            | FormulaNode::Xor(a, b) => {
                a.all_var_names(out);
                b.all_var_names(out);
            }
        }
    }

    /// Propositions mentioned anywhere, guards included.
    pub fn props(&self, out: &mut BTreeSet<String>) {
        match self {
            FormulaNode::Body(b) => b.props(out),
            FormulaNode::Quant(q, scope) => {
                if let Quantifier::SetMM { guard, .. } = q {
                    guard.props(out);
                }
                scope.props(out);
            }
            FormulaNode::Not(a) => a.props(out),
            FormulaNode::And(a, b)
            | FormulaNode::Or(a, b)
            | FormulaNode::Implies(a, b)
            | FormulaNode::Iff(a, b)
            | FormulaNode::Xor(a, b) => {
                a.props(out);
                b.props(out);
            }
        }
    }

    /// Substitutes set variable `from` by `to` at free occurrences
    /// (trace-quantifier ranges, membership atoms, guards). Binders named
    /// `to` on the path are renamed first, so no capture can happen.
    pub fn subst_set_var(&self, from: &str, to: &str) -> FormulaNode {
        if from == to {
            return self.clone();
        }
        let mut used = BTreeSet::new();
        self.all_var_names(&mut used);
        used.insert(to.to_string());
        self.subst_set_rec(from, to, &mut used)
    }

    fn subst_set_rec(&self, from: &str, to: &str, used: &mut BTreeSet<String>) -> FormulaNode {
        match self {
            FormulaNode::Body(b) => FormulaNode::Body(subst_set_in_body(b, from, to)),
            FormulaNode::Quant(q, scope) => {
                // A binder shadowing `from` stops the substitution below it;
                // a binder named `to` is renamed to avoid capturing.
                let (q, scope) = if q.binds_set() && q.var() == to {
                    let fresh = fresh_name(to, used);
                    let renamed_scope = scope.subst_set_var(to, &fresh);
                    let mut q2 = q.clone();
                    match &mut q2 {
                        Quantifier::Set { var, .. } | Quantifier::SetMM { var, .. } => {
                            *var = fresh.clone()
                        }
                        Quantifier::Trace { .. } => unreachable!("binds_set checked"),
                    }
                    // Guards bind the quantified variable too.
                    if let Quantifier::SetMM { guard, .. } = &mut q2 {
                        **guard = guard.subst_set_var(to, &fresh);
                    }
                    (q2, renamed_scope)
                } else {
                    (q.clone(), (**scope).clone())
                };
                let shadowed = q.binds_set() && q.var() == from;
                let mut q = q;
                match &mut q {
                    Quantifier::Trace { range, .. } => {
                        if range == from {
                            *range = to.to_string();
                        }
                    }
                    Quantifier::SetMM { guard, .. } => {
                        if !shadowed {
                            **guard = guard.subst_set_rec(from, to, used);
                        }
                    }
                    Quantifier::Set { .. } => {}
                }
                let scope = if shadowed { scope } else { scope.subst_set_rec(from, to, used) };
                FormulaNode::Quant(q, Box::new(scope))
            }
            FormulaNode::Not(a) => FormulaNode::Not(Box::new(a.subst_set_rec(from, to, used))),
            FormulaNode::And(a, b) => FormulaNode::And(
                Box::new(a.subst_set_rec(from, to, used)),
                Box::new(b.subst_set_rec(from, to, used)),
            ),
            FormulaNode::Or(a, b) => FormulaNode::Or(
                Box::new(a.subst_set_rec(from, to, used)),
                Box::new(b.subst_set_rec(from, to, used)),
            ),
            FormulaNode::Implies(a, b) => FormulaNode::Implies(
                Box::new(a.subst_set_rec(from, to, used)),
                Box::new(b.subst_set_rec(from, to, used)),
            ),
            FormulaNode::Iff(a, b) => FormulaNode::Iff(
                Box::new(a.subst_set_rec(from, to, used)),
                Box::new(b.subst_set_rec(from, to, used)),
            ),
            FormulaNode::Xor(a, b) => FormulaNode::Xor(
                Box::new(a.subst_set_rec(from, to, used)),
                Box::new(b.subst_set_rec(from, to, used)),
            ),
        }
    }

    fn validate(&self, alphabet: &Alphabet) -> Result<(), LogicError> {
        match self {
            FormulaNode::Body(b) => {
                let mut props = BTreeSet::new();
                b.props(&mut props);
                for p in props {
                    if !alphabet.contains(&p) {
                        return Err(LogicError::UnknownProposition(p));
                    }
                }
                if let Some((var, set)) = b.in_set_under_temporal(false) {
                    return Err(LogicError::InSetUnderTemporal { var, set });
                }
                Ok(())
            }
            FormulaNode::Quant(q, scope) => {
                if q.var() == VAR_ALL || q.var() == VAR_D {
                    return Err(LogicError::ReservedVariable(q.var().to_string()));
                }
                if let Quantifier::SetMM { guard, .. } = q {
                    guard.validate(alphabet)?;
                }
                scope.validate(alphabet)
            }
            FormulaNode::Not(a) => a.validate(alphabet),
            FormulaNode::And(a, b)
            | FormulaNode::Or(a, b)
            | FormulaNode::Implies(a, b)
            | FormulaNode::Iff(a, b)
            | FormulaNode::Xor(a, b) => {
                a.validate(alphabet)?;
                b.validate(alphabet)
            }
        }
    }
}

fn subst_set_in_body(b: &LtlBody, from: &str, to: &str) -> LtlBody {
    match b {
        LtlBody::Atom { .. } => b.clone(),
        LtlBody::InSet { var, set } => {
            let set = if set == from { to.to_string() } else { set.clone() };
            LtlBody::InSet { var: var.clone(), set }
        }
        LtlBody::Not(a) => LtlBody::Not(Box::new(subst_set_in_body(a, from, to))),
        LtlBody::Next(a) => LtlBody::Next(Box::new(subst_set_in_body(a, from, to))),
        LtlBody::Eventually(a) => LtlBody::Eventually(Box::new(subst_set_in_body(a, from, to))),
        LtlBody::Globally(a) => LtlBody::Globally(Box::new(subst_set_in_body(a, from, to))),
        LtlBody::And(a, b2) => LtlBody::And(
            Box::new(subst_set_in_body(a, from, to)),
            Box::new(subst_set_in_body(b2, from, to)),
        ),
        LtlBody::Or(a, b2) => LtlBody::Or(
            Box::new(subst_set_in_body(a, from, to)),
            Box::new(subst_set_in_body(b2, from, to)),
        ),
        LtlBody::Implies(a, b2) => LtlBody::Implies(
            Box::new(subst_set_in_body(a, from, to)),
            Box::new(subst_set_in_body(b2, from, to)),
        ),
        LtlBody::Iff(a, b2) => LtlBody::Iff(
            Box::new(subst_set_in_body(a, from, to)),
            Box::new(subst_set_in_body(b2, from, to)),
        ),
        LtlBody::Xor(a, b2) => LtlBody::Xor(
            Box::new(subst_set_in_body(a, from, to)),
            Box::new(subst_set_in_body(b2, from, to)),
        ),
        LtlBody::Until(a, b2) => LtlBody::Until(
            Box::new(subst_set_in_body(a, from, to)),
            Box::new(subst_set_in_body(b2, from, to)),
        ),
    }
}

/// Smallest `base` or `base_k` not present in `used`; inserts the result.
pub(crate) fn fresh_name(base: &str, used: &mut BTreeSet<String>) -> String {
    if !used.contains(base) {
        used.insert(base.to_string());
        return base.to_string();
    }
    let mut k = 1usize;
    loop {
        let cand = format!("{base}_{k}");
        if !used.contains(&cand) {
            used.insert(cand.clone());
            return cand;
        }
        k += 1;
    }
}

/// A formula together with its alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Formula {
    alphabet: Alphabet,
    node: FormulaNode,
}

/// Free-variable and reserved-variable report for a formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SentenceReport {
    pub free_trace_vars: Vec<String>,
    /// Free set variables other than the two distinguished ones.
    pub free_set_vars: Vec<String>,
    pub uses_all: bool,
    pub uses_d: bool,
    /// Human-readable violations (free traces, stray set variables, and the
    /// ambient variable when it is disallowed).
    pub violations: Vec<String>,
}

impl SentenceReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl Formula {
    pub fn new(alphabet: Alphabet, node: FormulaNode) -> Result<Formula, LogicError> {
        node.validate(&alphabet)?;
        Ok(Formula { alphabet, node })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn node(&self) -> &FormulaNode {
        &self.node
    }

    pub fn into_node(self) -> FormulaNode {
        self.node
    }

    pub fn is_prenex(&self) -> bool {
        self.node.is_prenex()
    }

    pub fn node_count(&self) -> usize {
        self.node.node_count()
    }

    /// Same formula over a larger alphabet.
    pub fn embed(&self, target: &Alphabet) -> Result<Formula, LogicError> {
        Formula::new(target.clone(), self.node.clone())
    }

    /// Lists free variables and checks sentence-hood. With `allow_xa =
    /// false` (closed-world mode) any use of the ambient variable is
    /// reported as a violation.
    pub fn check_sentence(&self, allow_xa: bool) -> SentenceReport {
        let mut traces = BTreeSet::new();
        let mut sets = BTreeSet::new();
        self.node.free_vars(&mut traces, &mut sets);
        let uses_all = sets.remove(VAR_ALL);
        let uses_d = sets.remove(VAR_D);
        let mut violations = Vec::new();
        for t in &traces {
            violations.push(format!("free trace variable {t}"));
        }
        for s in &sets {
            violations.push(format!("free set variable {s}"));
        }
        if uses_all && !allow_xa {
            violations.push(format!("{VAR_ALL} is not allowed under closed-world semantics"));
        }
        SentenceReport {
            free_trace_vars: traces.into_iter().collect(),
            free_set_vars: sets.into_iter().collect(),
            uses_all,
            uses_d,
            violations,
        }
    }

    /// True iff only the distinguished set variables are free.
    pub fn is_sentence(&self) -> bool {
        let r = self.check_sentence(true);
        r.free_trace_vars.is_empty() && r.free_set_vars.is_empty()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", printer::print_node(&self.node))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha() -> Alphabet {
        Alphabet::new(["x", "y"]).unwrap()
    }

    #[test]
    fn smart_constructors_fuse_bodies() {
        let a = FormulaNode::body(LtlBody::atom("x", "p"));
        let b = FormulaNode::body(LtlBody::atom("y", "p"));
        let f = a.and(b);
        assert!(matches!(f, FormulaNode::Body(LtlBody::And(_, _))));
    }

    #[test]
    fn conjuncts_flatten_left_chain() {
        let q = |p: &str| {
            FormulaNode::quant(
                Quantifier::Trace { exists: true, var: p.to_string(), range: VAR_D.into() },
                FormulaNode::body(LtlBody::atom("x", p)),
            )
        };
        let f = FormulaNode::and_all([q("p"), q("q"), q("r")]).unwrap();
        assert_eq!(f.conjuncts().len(), 3);
    }

    #[test]
    fn free_vars_respect_binding() {
        // exists p in D. x[p] & y[q] has free q, uses D.
        let body = LtlBody::atom("x", "p").and(LtlBody::atom("y", "q"));
        let f = FormulaNode::quant(
            Quantifier::Trace { exists: true, var: "p".into(), range: VAR_D.into() },
            FormulaNode::body(body),
        );
        let mut t = BTreeSet::new();
        let mut s = BTreeSet::new();
        f.free_vars(&mut t, &mut s);
        assert_eq!(t.into_iter().collect::<Vec<_>>(), ["q"]);
        assert_eq!(s.into_iter().collect::<Vec<_>>(), [VAR_D]);
    }

    #[test]
    fn guard_vars_count_as_free() {
        // exists (X, min, forall p in X. p |> Z). exists q in X. x[q]
        let guard = FormulaNode::quant(
            Quantifier::Trace { exists: false, var: "p".into(), range: "X".into() },
            FormulaNode::body(LtlBody::in_set("p", "Z")),
        );
        let f = FormulaNode::quant(
            Quantifier::SetMM {
                exists: true,
                var: "X".into(),
                polarity: Polarity::Min,
                guard: Box::new(guard),
            },
            FormulaNode::quant(
                Quantifier::Trace { exists: true, var: "q".into(), range: "X".into() },
                FormulaNode::body(LtlBody::atom("x", "q")),
            ),
        );
        let mut t = BTreeSet::new();
        let mut s = BTreeSet::new();
        f.free_vars(&mut t, &mut s);
        assert!(t.is_empty());
        assert_eq!(s.into_iter().collect::<Vec<_>>(), ["Z"]);
    }

    #[test]
    fn check_sentence_flags_ambient_in_cw_mode() {
        let f = Formula::new(
            alpha(),
            FormulaNode::quant(
                Quantifier::Trace { exists: false, var: "p".into(), range: VAR_ALL.into() },
                FormulaNode::body(LtlBody::in_set("p", VAR_D)),
            ),
        )
        .unwrap();
        assert!(f.check_sentence(true).is_clean());
        let r = f.check_sentence(false);
        assert!(!r.is_clean());
        assert!(r.uses_all);
    }

    #[test]
    fn check_sentence_lists_unbound_trace_var() {
        let f = Formula::new(alpha(), FormulaNode::body(LtlBody::atom("x", "p"))).unwrap();
        let r = f.check_sentence(true);
        assert_eq!(r.free_trace_vars, ["p"]);
        assert!(!r.is_clean());
    }

    #[test]
    fn formula_rejects_unknown_proposition() {
        let r = Formula::new(alpha(), FormulaNode::body(LtlBody::atom("z", "p")));
        assert!(matches!(r, Err(LogicError::UnknownProposition(_))));
    }

    #[test]
    fn formula_rejects_in_set_under_temporal() {
        let body = LtlBody::in_set("p", VAR_D).eventually();
        let r = Formula::new(alpha(), FormulaNode::body(body));
        assert!(matches!(r, Err(LogicError::InSetUnderTemporal { .. })));
    }

    #[test]
    fn formula_rejects_reserved_binders() {
        let f = FormulaNode::quant(
            Quantifier::Set { exists: true, var: VAR_D.into() },
            FormulaNode::body(LtlBody::atom("x", "p")),
        );
        assert!(matches!(
            Formula::new(alpha(), f),
            Err(LogicError::ReservedVariable(_))
        ));
    }

    #[test]
    fn desugar_produces_core_connectives() {
        fn core_only(b: &LtlBody) -> bool {
            match b {
                LtlBody::Atom { .. } | LtlBody::InSet { .. } => true,
                LtlBody::Not(a) | LtlBody::Next(a) => core_only(a),
                LtlBody::Or(a, b) | LtlBody::Until(a, b) => core_only(a) && core_only(b),
                _ => false,
            }
        }
        let b = LtlBody::atom("x", "p")
            .iff(LtlBody::atom("y", "p"))
            .globally()
            .implies(LtlBody::atom("x", "p").eventually());
        assert!(core_only(&b.desugar()));
    }

    #[test]
    fn eq_on_expands_to_globally_iff() {
        let b = LtlBody::eq_on(["y", "x"], "p", "q").unwrap();
        // Sorted proposition order: x before y.
        let expect = LtlBody::atom("x", "p")
            .iff(LtlBody::atom("x", "q"))
            .and(LtlBody::atom("y", "p").iff(LtlBody::atom("y", "q")))
            .globally();
        assert_eq!(b, expect);
    }

    #[test]
    fn subst_set_var_renames_capturing_binder() {
        // exists Y. forall p in X. p |> Y, substituting X -> Y must rename
        // the binder Y first.
        let f = FormulaNode::quant(
            Quantifier::Set { exists: true, var: "Y".into() },
            FormulaNode::quant(
                Quantifier::Trace { exists: false, var: "p".into(), range: "X".into() },
                FormulaNode::body(LtlBody::in_set("p", "Y")),
            ),
        );
        let g = f.subst_set_var("X", "Y");
        match &g {
            FormulaNode::Quant(Quantifier::Set { var, .. }, scope) => {
                assert_ne!(var, "Y");
                match &**scope {
                    FormulaNode::Quant(Quantifier::Trace { range, .. }, inner) => {
                        assert_eq!(range, "Y");
                        match &**inner {
                            FormulaNode::Body(LtlBody::InSet { set, .. }) => assert_eq!(set, var),
                            other => panic!("unexpected {other:?}"),
                        }
                    }
                    other => panic!("unexpected {other:?}"),
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn subst_set_var_stops_at_shadowing_binder() {
        let f = FormulaNode::quant(
            Quantifier::Set { exists: true, var: "X".into() },
            FormulaNode::body(LtlBody::in_set("p", "X")),
        );
        let g = f.subst_set_var("X", "Z");
        assert_eq!(f, g);
    }

    #[test]
    fn prefix_and_body_on_prenex_chain() {
        let f = FormulaNode::quantify(
            [
                Quantifier::Set { exists: true, var: "X".into() },
                Quantifier::Trace { exists: false, var: "p".into(), range: "X".into() },
            ],
            FormulaNode::body(LtlBody::atom("x", "p")),
        );
        assert!(f.is_prenex());
        let (prefix, body) = f.prefix_and_body().unwrap();
        assert_eq!(prefix.len(), 2);
        assert_eq!(body, &LtlBody::atom("x", "p"));
        let g = FormulaNode::body(LtlBody::atom("x", "p")).and(f);
        assert!(!g.is_prenex());
        assert!(g.prefix_and_body().is_none());
    }
}
