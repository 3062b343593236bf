//! Lasso traces, trace sets, transition systems, and assignments.
//!
//! Every infinite trace handled by the crate is ultimately periodic and kept
//! in the canonical form `stem · loop^ω` where the loop is primitive (not a
//! power of a shorter word) and the stem is maximally folded into the loop.
//! Two values denote the same infinite word exactly when their canonical
//! forms are identical, which makes set membership and deduplication
//! well-defined.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod text;

/// Distinguished set-variable name for the ambient set of all traces.
pub const VAR_ALL: &str = "ALL";
/// Distinguished set-variable name for the universe of discourse (the model).
pub const VAR_D: &str = "D";

/// Errors produced by trace-level operations.
#[derive(Debug, Error)]
pub enum TraceError {
    #[error("loop must be nonempty")]
    EmptyLoop,
    #[error("proposition {0:?} is not a valid identifier (lowercase-initial)")]
    BadProposition(String),
    #[error("alphabet has more than {max} propositions", max = MAX_PROPS)]
    AlphabetTooLarge,
    #[error("alphabets differ: {0} vs {1}")]
    AlphabetMismatch(String, String),
    #[error("alphabets overlap on {0:?}")]
    OverlappingAlphabets(String),
    #[error("{0:?} is not a subset of the alphabet")]
    NotSubAlphabet(String),
    #[error("vertex {0} has no outgoing edge")]
    NoOutgoingEdge(usize),
    #[error("edge references unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("initial set references unknown vertex {0}")]
    UnknownInitialVertex(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Maximum alphabet size; letters are stored as bitmasks in a `u64`.
pub const MAX_PROPS: usize = 64;

fn is_prop_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// Finite, ordered set of atomic propositions.
///
/// Propositions are kept sorted, so the index of a proposition (its
/// encoding `e(p)` used by the arithmetic bridge) is stable across runs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    props: Arc<Vec<String>>,
}

impl Alphabet {
    /// Builds an alphabet from proposition names; sorts and deduplicates.
    pub fn new<I, S>(props: I) -> Result<Self, TraceError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v: Vec<String> = props.into_iter().map(Into::into).collect();
        for p in &v {
            if !is_prop_name(p) {
                return Err(TraceError::BadProposition(p.clone()));
            }
        }
        v.sort();
        v.dedup();
        if v.len() > MAX_PROPS {
            return Err(TraceError::AlphabetTooLarge);
        }
        Ok(Alphabet { props: Arc::new(v) })
    }

    /// The empty alphabet.
    pub fn empty() -> Self {
        Alphabet { props: Arc::new(Vec::new()) }
    }

    pub fn len(&self) -> usize {
        self.props.len()
    }

    pub fn is_empty(&self) -> bool {
        self.props.is_empty()
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    /// Index of a proposition (the encoding `e(p)`), if present.
    pub fn index_of(&self, prop: &str) -> Option<usize> {
        self.props.binary_search_by(|p| p.as_str().cmp(prop)).ok()
    }

    pub fn contains(&self, prop: &str) -> bool {
        self.index_of(prop).is_some()
    }

    pub fn is_subset_of(&self, other: &Alphabet) -> bool {
        self.props.iter().all(|p| other.contains(p))
    }

    pub fn is_disjoint_from(&self, other: &Alphabet) -> bool {
        self.props.iter().all(|p| !other.contains(p))
    }

    /// Union of two alphabets.
    pub fn union(&self, other: &Alphabet) -> Result<Alphabet, TraceError> {
        Alphabet::new(self.props.iter().chain(other.props.iter()).cloned())
    }

    /// Letter (bitmask) from proposition names.
    pub fn letter<'a, I: IntoIterator<Item = &'a str>>(&self, props: I) -> Result<u64, TraceError> {
        let mut l = 0u64;
        for p in props {
            let i = self
                .index_of(p)
                .ok_or_else(|| TraceError::NotSubAlphabet(p.to_string()))?;
            l |= 1 << i;
        }
        Ok(l)
    }

    /// Proposition names present in a letter, in alphabet order.
    pub fn letter_props(&self, letter: u64) -> Vec<&str> {
        self.props
            .iter()
            .enumerate()
            .filter(|(i, _)| letter & (1 << i) != 0)
            .map(|(_, p)| p.as_str())
            .collect()
    }

    /// All letters over this alphabet (the powerset), in ascending mask order.
    pub fn all_letters(&self) -> impl Iterator<Item = u64> {
        0..(1u64 << self.len())
    }

    fn format_letter(&self, letter: u64) -> String {
        format!("{{{}}}", self.letter_props(letter).join(","))
    }
}

/// Ultimately periodic trace in canonical lasso form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LassoTrace {
    alphabet: Alphabet,
    stem: Vec<u64>,
    // Nonempty; primitive; the stem cannot be folded further into it.
    lasso: Vec<u64>,
}

// Smallest d dividing len such that the word is (word[..d])^(len/d).
fn primitive_period(word: &[u64]) -> usize {
    let n = word.len();
    'outer: for d in 1..=n {
        if n % d != 0 {
            continue;
        }
        for i in d..n {
            if word[i] != word[i - d] {
                continue 'outer;
            }
        }
        return d;
    }
    n
}

impl LassoTrace {
    /// Builds the canonical lasso denoting `stem · loop^ω`.
    pub fn new(alphabet: Alphabet, stem: Vec<u64>, lasso: Vec<u64>) -> Result<Self, TraceError> {
        if lasso.is_empty() {
            return Err(TraceError::EmptyLoop);
        }
        let mask = if alphabet.len() == MAX_PROPS {
            u64::MAX
        } else {
            (1u64 << alphabet.len()) - 1
        };
        debug_assert!(stem.iter().chain(lasso.iter()).all(|l| l & !mask == 0));
        let d = primitive_period(&lasso);
        let mut lasso: Vec<u64> = lasso[..d].to_vec();
        let mut stem = stem;
        while let Some(&last) = stem.last() {
            if last == *lasso.last().expect("loop nonempty") {
                stem.pop();
                lasso.rotate_right(1);
            } else {
                break;
            }
        }
        Ok(LassoTrace { alphabet, stem, lasso })
    }

    /// Convenience constructor from proposition-name letters.
    pub fn from_props(
        alphabet: &Alphabet,
        stem: &[&[&str]],
        lasso: &[&[&str]],
    ) -> Result<Self, TraceError> {
        let conv = |ls: &[&[&str]]| -> Result<Vec<u64>, TraceError> {
            ls.iter().map(|l| alphabet.letter(l.iter().copied())).collect()
        };
        LassoTrace::new(alphabet.clone(), conv(stem)?, conv(lasso)?)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn stem(&self) -> &[u64] {
        &self.stem
    }

    pub fn lasso(&self) -> &[u64] {
        &self.lasso
    }

    pub fn stem_len(&self) -> usize {
        self.stem.len()
    }

    pub fn loop_len(&self) -> usize {
        self.lasso.len()
    }

    /// Letter at position `i` of the denoted infinite word.
    pub fn at(&self, i: usize) -> u64 {
        if i < self.stem.len() {
            self.stem[i]
        } else {
            self.lasso[(i - self.stem.len()) % self.lasso.len()]
        }
    }

    /// True iff proposition `prop` holds at position `i`.
    pub fn holds_at(&self, prop_index: usize, i: usize) -> bool {
        self.at(i) & (1 << prop_index) != 0
    }

    /// First `n` letters of the denoted word.
    pub fn unfold(&self, n: usize) -> Vec<u64> {
        (0..n).map(|i| self.at(i)).collect()
    }

    /// The trace starting at position `j` (suffix), re-canonicalized.
    pub fn shift(&self, j: usize) -> LassoTrace {
        if j <= self.stem.len() {
            LassoTrace::new(self.alphabet.clone(), self.stem[j..].to_vec(), self.lasso.clone())
                .expect("loop stays nonempty")
        } else {
            let k = (j - self.stem.len()) % self.lasso.len();
            let mut l = self.lasso.clone();
            l.rotate_left(k);
            LassoTrace::new(self.alphabet.clone(), Vec::new(), l).expect("loop stays nonempty")
        }
    }

    /// Letter-wise restriction to a sub-alphabet.
    pub fn project(&self, target: &Alphabet) -> Result<LassoTrace, TraceError> {
        if !target.is_subset_of(&self.alphabet) {
            let missing = target
                .props()
                .iter()
                .find(|p| !self.alphabet.contains(p))
                .cloned()
                .unwrap_or_default();
            return Err(TraceError::NotSubAlphabet(missing));
        }
        let remap = |l: u64| -> u64 {
            let mut out = 0u64;
            for (new_i, p) in target.props().iter().enumerate() {
                let old_i = self.alphabet.index_of(p).expect("subset checked");
                if l & (1 << old_i) != 0 {
                    out |= 1 << new_i;
                }
            }
            out
        };
        LassoTrace::new(
            target.clone(),
            self.stem.iter().map(|&l| remap(l)).collect(),
            self.lasso.iter().map(|&l| remap(l)).collect(),
        )
    }

    /// Re-expresses the trace over a super-alphabet (no letters change).
    pub fn embed(&self, target: &Alphabet) -> Result<LassoTrace, TraceError> {
        if !self.alphabet.is_subset_of(target) {
            let missing = self
                .alphabet
                .props()
                .iter()
                .find(|p| !target.contains(p))
                .cloned()
                .unwrap_or_default();
            return Err(TraceError::NotSubAlphabet(missing));
        }
        let remap = |l: u64| -> u64 {
            let mut out = 0u64;
            for (old_i, p) in self.alphabet.props().iter().enumerate() {
                if l & (1 << old_i) != 0 {
                    out |= 1 << target.index_of(p).expect("superset checked");
                }
            }
            out
        };
        LassoTrace::new(
            target.clone(),
            self.stem.iter().map(|&l| remap(l)).collect(),
            self.lasso.iter().map(|&l| remap(l)).collect(),
        )
    }

    /// Position-wise union with a trace over a disjoint alphabet.
    pub fn pointwise_union(&self, other: &LassoTrace) -> Result<LassoTrace, TraceError> {
        if !self.alphabet.is_disjoint_from(&other.alphabet) {
            let clash = self
                .alphabet
                .props()
                .iter()
                .find(|p| other.alphabet.contains(p))
                .cloned()
                .unwrap_or_default();
            return Err(TraceError::OverlappingAlphabets(clash));
        }
        let target = self.alphabet.union(&other.alphabet)?;
        let a = self.embed(&target)?;
        let b = other.embed(&target)?;
        let stem_len = a.stem.len().max(b.stem.len());
        let period = lcm(a.lasso.len(), b.lasso.len());
        let stem: Vec<u64> = (0..stem_len).map(|i| a.at(i) | b.at(i)).collect();
        let lasso: Vec<u64> = (stem_len..stem_len + period).map(|i| a.at(i) | b.at(i)).collect();
        LassoTrace::new(target, stem, lasso)
    }
}

impl fmt::Display for LassoTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.stem {
            write!(f, "{} ", self.alphabet.format_letter(*l))?;
        }
        write!(f, ";")?;
        for l in &self.lasso {
            write!(f, " {}", self.alphabet.format_letter(*l))?;
        }
        Ok(())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Least common multiple; used for joint periods.
pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Finite set of canonical lasso traces sharing one alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TraceSet {
    alphabet: Alphabet,
    members: BTreeSet<LassoTrace>,
}

impl TraceSet {
    pub fn new(alphabet: Alphabet) -> Self {
        TraceSet { alphabet, members: BTreeSet::new() }
    }

    pub fn from_traces<I: IntoIterator<Item = LassoTrace>>(
        alphabet: Alphabet,
        traces: I,
    ) -> Result<Self, TraceError> {
        let mut set = TraceSet::new(alphabet);
        for t in traces {
            set.insert(t)?;
        }
        Ok(set)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn insert(&mut self, t: LassoTrace) -> Result<(), TraceError> {
        if t.alphabet != self.alphabet {
            return Err(TraceError::AlphabetMismatch(
                format!("{:?}", t.alphabet.props()),
                format!("{:?}", self.alphabet.props()),
            ));
        }
        self.members.insert(t);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, t: &LassoTrace) -> bool {
        self.members.contains(t)
    }

    pub fn iter(&self) -> impl Iterator<Item = &LassoTrace> {
        self.members.iter()
    }

    pub fn is_subset_of(&self, other: &TraceSet) -> bool {
        self.members.is_subset(&other.members)
    }

    /// Union with another set over the same alphabet.
    pub fn union(&self, other: &TraceSet) -> Result<TraceSet, TraceError> {
        let mut out = self.clone();
        for t in other.iter() {
            out.insert(t.clone())?;
        }
        Ok(out)
    }

    /// Projects every member onto a sub-alphabet.
    pub fn project(&self, target: &Alphabet) -> Result<TraceSet, TraceError> {
        let mut out = TraceSet::new(target.clone());
        for t in self.iter() {
            out.insert(t.project(target)?)?;
        }
        Ok(out)
    }

    /// Re-expresses every member over a super-alphabet.
    pub fn embed(&self, target: &Alphabet) -> Result<TraceSet, TraceError> {
        let mut out = TraceSet::new(target.clone());
        for t in self.iter() {
            out.insert(t.embed(target)?)?;
        }
        Ok(out)
    }

    /// All subsets, each as a `TraceSet`; caller must keep `len()` small.
    pub fn subsets(&self) -> impl Iterator<Item = TraceSet> + '_ {
        let members: Vec<&LassoTrace> = self.members.iter().collect();
        let n = members.len();
        (0..(1u64 << n)).map(move |mask| {
            let mut s = TraceSet::new(self.alphabet.clone());
            for (i, t) in members.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    s.members.insert((*t).clone());
                }
            }
            s
        })
    }
}

impl fmt::Display for TraceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.iter() {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Finite Kripke-style transition system (V, E, I, λ).
///
/// Vertices are `0..len`. Every vertex has at least one outgoing edge; the
/// initial set may be empty (needed by the single-initial-vertex transform).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionSystem {
    alphabet: Alphabet,
    labels: Vec<u64>,
    edges: BTreeSet<(usize, usize)>,
    initial: BTreeSet<usize>,
}

impl TransitionSystem {
    pub fn new(
        alphabet: Alphabet,
        labels: Vec<u64>,
        edges: BTreeSet<(usize, usize)>,
        initial: BTreeSet<usize>,
    ) -> Result<Self, TraceError> {
        let n = labels.len();
        for &(u, v) in &edges {
            if u >= n {
                return Err(TraceError::UnknownVertex(u));
            }
            if v >= n {
                return Err(TraceError::UnknownVertex(v));
            }
        }
        for &v in &initial {
            if v >= n {
                return Err(TraceError::UnknownInitialVertex(v));
            }
        }
        for u in 0..n {
            if !edges.iter().any(|&(a, _)| a == u) {
                return Err(TraceError::NoOutgoingEdge(u));
            }
        }
        Ok(TransitionSystem { alphabet, labels, edges, initial })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, v: usize) -> u64 {
        self.labels[v]
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn initial(&self) -> &BTreeSet<usize> {
        &self.initial
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.range((v, 0)..=(v, usize::MAX)).map(|&(_, w)| w)
    }

    /// Bounded under-approximation of the trace set: labels of all lasso
    /// paths with at most `stem_bound` stem vertices followed by a simple
    /// cycle of at most `loop_bound` vertices. Every returned trace is a
    /// trace of the system.
    pub fn enumerate_lassos(&self, stem_bound: usize, loop_bound: usize) -> TraceSet {
        let mut out = TraceSet::new(self.alphabet.clone());
        if self.is_empty() {
            return out;
        }
        // Walks (vertex revisits allowed) of length 0..=stem_bound from I.
        let mut stems: Vec<Vec<usize>> = self.initial.iter().map(|&v| vec![v]).collect();
        let mut all_stems: Vec<Vec<usize>> = vec![Vec::new()];
        while let Some(stem) = stems.pop() {
            all_stems.push(stem.clone());
            if stem.len() < stem_bound {
                let last = *stem.last().expect("nonempty");
                for w in self.successors(last) {
                    let mut next = stem.clone();
                    next.push(w);
                    stems.push(next);
                }
            }
        }
        for stem in &all_stems {
            // Cycle entry: successor of the stem end, or an initial vertex.
            let entries: Vec<usize> = match stem.last() {
                Some(&last) => self.successors(last).collect(),
                None => self.initial.iter().copied().collect(),
            };
            for entry in entries {
                for cycle in self.simple_cycles_from(entry, loop_bound) {
                    let stem_letters: Vec<u64> = stem.iter().map(|&v| self.labels[v]).collect();
                    let loop_letters: Vec<u64> = cycle.iter().map(|&v| self.labels[v]).collect();
                    let t = LassoTrace::new(self.alphabet.clone(), stem_letters, loop_letters)
                        .expect("cycle nonempty");
                    out.members.insert(t);
                }
            }
        }
        out
    }

    // Simple cycles c_0..c_{p-1} with c_0 = start, p <= bound, distinct
    // vertices, consecutive edges, and an edge c_{p-1} -> c_0.
    fn simple_cycles_from(&self, start: usize, bound: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut path = vec![start];
        self.cycle_dfs(start, bound, &mut path, &mut out);
        out
    }

    fn cycle_dfs(&self, start: usize, bound: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().expect("nonempty");
        if self.edges.contains(&(last, start)) {
            out.push(path.clone());
        }
        if path.len() < bound {
            for w in self.successors(last) {
                if !path.contains(&w) && w != start {
                    path.push(w);
                    self.cycle_dfs(start, bound, path, out);
                    path.pop();
                }
            }
        }
    }
}

/// Partial assignment of trace variables to traces and set variables to
/// finite trace sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    trace_vars: BTreeMap<String, LassoTrace>,
    set_vars: BTreeMap<String, TraceSet>,
}

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn with_trace(mut self, var: &str, t: LassoTrace) -> Self {
        self.trace_vars.insert(var.to_string(), t);
        self
    }

    pub fn with_set(mut self, var: &str, s: TraceSet) -> Self {
        self.set_vars.insert(var.to_string(), s);
        self
    }

    pub fn bind_trace(&mut self, var: &str, t: LassoTrace) {
        self.trace_vars.insert(var.to_string(), t);
    }

    pub fn bind_set(&mut self, var: &str, s: TraceSet) {
        self.set_vars.insert(var.to_string(), s);
    }

    pub fn trace(&self, var: &str) -> Option<&LassoTrace> {
        self.trace_vars.get(var)
    }

    pub fn set(&self, var: &str) -> Option<&TraceSet> {
        self.set_vars.get(var)
    }

    pub fn trace_vars(&self) -> impl Iterator<Item = (&str, &LassoTrace)> {
        self.trace_vars.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn set_vars(&self) -> impl Iterator<Item = (&str, &TraceSet)> {
        self.set_vars.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Suffix assignment: every trace variable shifted by `j`; set
    /// variables untouched.
    pub fn shift(&self, j: usize) -> Assignment {
        Assignment {
            trace_vars: self
                .trace_vars
                .iter()
                .map(|(k, t)| (k.clone(), t.shift(j)))
                .collect(),
            set_vars: self.set_vars.clone(),
        }
    }
}
