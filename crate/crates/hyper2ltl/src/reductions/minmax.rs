//! Minimality quantifiers and the marker encoding of set quantification.
//!
//! Two directions live here. `mm_desugar` removes guarded min/max set
//! quantifiers by spelling out optimality: a strict-subset (or
//! strict-superset) witness refutes the guard, so the guard plus a
//! no-better-candidate conjunct pins exactly the minimal (maximal)
//! guard models. `minmax_encode` goes the other way for full set
//! quantification over arbitrary trace sets: every plain set quantifier
//! becomes a guarded one whose guard forces the candidate set to be a
//! marker-tagged table of set encodings, so quantifying over subsets of
//! an extended model stands in for quantifying over all trace sets.
//! The trace-level companions `ext_traceset` / `ext_transition_system`
//! build those extended models, and `enc_marked` reads a tagged table
//! back.
//!
//! Size bounds: `mm_desugar` output has at most `2n + 24b` nodes for an
//! input with `n` nodes and `b` guarded binders whose guards are
//! themselves unguarded (each binder copies its guard once and adds a
//! fixed comparison scaffold; nested guarded guards double per nesting
//! level). `minmax_encode` output has at most `n + k·(420 + 30·(k +
//! |AP'|))` nodes for `k` set quantifiers over the extended alphabet
//! `AP'`. Both are deterministic: identical inputs give byte-identical
//! outputs, with fresh names drawn from the input's own name pool.

use std::collections::{BTreeMap, BTreeSet};

use crate::logic::{
    alpha_rename, fresh_name, Formula, FormulaNode, LtlBody, Polarity, Quantifier,
};
use crate::traces::{Alphabet, LassoTrace, TraceSet, TransitionSystem, VAR_D};

use super::library::{ap_all_sets, phi_all_sets_minmax_parts, ts_all_sets};
use super::ReductionError;

fn tq(exists: bool, var: &str, range: &str) -> Quantifier {
    Quantifier::Trace { exists, var: var.into(), range: range.into() }
}

/// Name of the `i`-th membership marker, 1-based.
fn marker(i: usize) -> String {
    format!("m{i}")
}

// Markers are `m` followed by digits; the collision check in
// `extended_alphabet` keeps them out of input alphabets.
fn is_marker(p: &str) -> bool {
    p.len() > 1 && p.starts_with('m') && p[1..].bytes().all(|b| b.is_ascii_digit())
}

/// Input alphabet plus `k` markers plus the set-encoding propositions.
fn extended_alphabet(ap: &Alphabet, k: usize) -> Result<Alphabet, ReductionError> {
    let mut extras: Vec<String> = (1..=k).map(marker).collect();
    extras.extend(ap_all_sets().props().iter().cloned());
    for p in &extras {
        if ap.contains(p) {
            return Err(ReductionError::Alphabet(format!(
                "proposition {p:?} is reserved by the marker encoding"
            )));
        }
    }
    Ok(ap.union(&Alphabet::new(extras)?)?)
}

/// Rewrites guarded min/max set quantifiers into plain set quantifiers:
/// the guard is kept, and a fresh rival set variable asserts that no
/// strict subset (minimality) or strict superset (maximality) also
/// satisfies the guard. Connective structure is preserved; the rewrite
/// works at each binder, so it is sound under both standard and
/// closed-world semantics.
pub fn mm_desugar(f: &Formula) -> Result<Formula, ReductionError> {
    let mut used = BTreeSet::new();
    f.node().all_var_names(&mut used);
    let node = desugar(f.node(), &mut used)?;
    Ok(Formula::new(f.alphabet().clone(), node)?)
}

fn desugar(n: &FormulaNode, used: &mut BTreeSet<String>) -> Result<FormulaNode, ReductionError> {
    let rec = |a: &FormulaNode, used: &mut BTreeSet<String>| desugar(a, used).map(Box::new);
    Ok(match n {
        FormulaNode::Body(b) => FormulaNode::Body(b.clone()),
        FormulaNode::Not(a) => FormulaNode::Not(rec(a, used)?),
        FormulaNode::And(a, b) => FormulaNode::And(rec(a, used)?, rec(b, used)?),
        FormulaNode::Or(a, b) => FormulaNode::Or(rec(a, used)?, rec(b, used)?),
        FormulaNode::Implies(a, b) => FormulaNode::Implies(rec(a, used)?, rec(b, used)?),
        FormulaNode::Iff(a, b) => FormulaNode::Iff(rec(a, used)?, rec(b, used)?),
        FormulaNode::Xor(a, b) => FormulaNode::Xor(rec(a, used)?, rec(b, used)?),
        FormulaNode::Quant(q @ Quantifier::Trace { .. }, scope) => {
            FormulaNode::Quant(q.clone(), rec(scope, used)?)
        }
        FormulaNode::Quant(Quantifier::Set { var, .. }, _) => {
            return Err(ReductionError::Fragment(format!(
                "plain set quantifier over {var}; only guarded min/max quantifiers desugar"
            )))
        }
        FormulaNode::Quant(Quantifier::SetMM { exists, var, polarity, guard }, scope) => {
            // Guards may carry their own guarded quantifiers.
            let guard = desugar(guard, used)?;
            let scope = desugar(scope, used)?;
            let rival = fresh_name(&format!("{var}'"), used);
            let (sub, sup) = match polarity {
                Polarity::Min => (rival.as_str(), var.as_str()),
                Polarity::Max => (var.as_str(), rival.as_str()),
            };
            let strict = strict_subset(sub, sup, used);
            let beaten = guard.subst_set_var(var, &rival);
            let optimal = FormulaNode::Quant(
                Quantifier::Set { exists: false, var: rival.clone() },
                Box::new(strict.implies(beaten.not())),
            );
            let inner = if *exists {
                guard.and(optimal).and(scope)
            } else {
                guard.and(optimal).implies(scope)
            };
            FormulaNode::Quant(
                Quantifier::Set { exists: *exists, var: var.clone() },
                Box::new(inner),
            )
        }
    })
}

// Every member of `sub` lies in `sup`, and `sup` has a member outside
// `sub`; fresh trace variables keep the comparison capture-free.
fn strict_subset(sub: &str, sup: &str, used: &mut BTreeSet<String>) -> FormulaNode {
    let inside = fresh_name("pi", used);
    let witness = fresh_name("pi", used);
    let all_in = FormulaNode::quant(
        tq(false, &inside, sub),
        FormulaNode::body(LtlBody::in_set(&inside, sup)),
    );
    let missing = FormulaNode::quant(
        tq(true, &witness, sup),
        FormulaNode::body(LtlBody::in_set(&witness, sub).not()),
    );
    all_in.and(missing)
}

/// Result of [`minmax_encode`]: the rewritten sentence and, when any
/// set quantifier was rewritten, the sentence describing the extended
/// models the rewrite expects (its first disjunct covers the empty
/// model, which has no extension).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinMaxEncoding {
    /// Input sentence with every set quantifier guarded and every trace
    /// quantifier over a rewritten set variable marker-restricted.
    pub formula: Formula,
    /// Shape of models extended by [`ext_traceset`] or
    /// [`ext_transition_system`]; `None` when the input had no set
    /// quantifier and was returned unchanged.
    pub model_shape: Option<Formula>,
}

/// Replaces every plain set quantifier with a guarded min/max
/// quantifier whose guard restricts candidates to marker-tagged tables
/// of set encodings, and conjoins the matching marker to every trace
/// quantifier ranging over a rewritten variable. Under the guard, a
/// candidate set over the extended model encodes one arbitrary trace
/// set per marker, so the rewritten sentence quantifies over all trace
/// sets while evaluating over finite extended models.
pub fn minmax_encode(f: &Formula, polarity: Polarity) -> Result<MinMaxEncoding, ReductionError> {
    if f.node().has_mm_quantifier() {
        return Err(ReductionError::Fragment(
            "input already carries guarded quantifiers; encode plain set quantifiers only".into(),
        ));
    }
    let renamed = alpha_rename(f);
    let mut vars = BTreeMap::new();
    collect_set_vars(renamed.node(), &mut vars);
    let k = vars.len();
    if k == 0 {
        return Ok(MinMaxEncoding { formula: f.clone(), model_shape: None });
    }
    let target = extended_alphabet(f.alphabet(), k)?;
    let node = mark_quantifiers(renamed.node(), &vars, k, polarity, &target);
    Ok(MinMaxEncoding {
        formula: Formula::new(target.clone(), node)?,
        model_shape: Some(model_shape(f.alphabet(), &target, k, polarity)?),
    })
}

// Assigns 1-based marker indices to set variables in order of first
// appearance; the input is alpha-renamed, so each name binds once.
fn collect_set_vars(n: &FormulaNode, vars: &mut BTreeMap<String, usize>) {
    match n {
        FormulaNode::Body(_) => {}
        FormulaNode::Not(a) => collect_set_vars(a, vars),
        FormulaNode::And(a, b)
        | FormulaNode::Or(a, b)
        | FormulaNode::Implies(a, b)
        | FormulaNode::Iff(a, b)
        | FormulaNode::Xor(a, b) => {
            collect_set_vars(a, vars);
            collect_set_vars(b, vars);
        }
        FormulaNode::Quant(q, scope) => {
            if let Quantifier::Set { var, .. } = q {
                let next = vars.len() + 1;
                vars.entry(var.clone()).or_insert(next);
            }
            collect_set_vars(scope, vars);
        }
    }
}

fn mark_quantifiers(
    n: &FormulaNode,
    vars: &BTreeMap<String, usize>,
    k: usize,
    polarity: Polarity,
    target: &Alphabet,
) -> FormulaNode {
    let rec = |a: &FormulaNode| Box::new(mark_quantifiers(a, vars, k, polarity, target));
    match n {
        FormulaNode::Body(b) => FormulaNode::Body(b.clone()),
        FormulaNode::Not(a) => FormulaNode::Not(rec(a)),
        FormulaNode::And(a, b) => FormulaNode::And(rec(a), rec(b)),
        FormulaNode::Or(a, b) => FormulaNode::Or(rec(a), rec(b)),
        FormulaNode::Implies(a, b) => FormulaNode::Implies(rec(a), rec(b)),
        FormulaNode::Iff(a, b) => FormulaNode::Iff(rec(a), rec(b)),
        FormulaNode::Xor(a, b) => FormulaNode::Xor(rec(a), rec(b)),
        FormulaNode::Quant(Quantifier::Set { exists, var }, scope) => {
            let i = vars[var];
            FormulaNode::Quant(
                Quantifier::SetMM {
                    exists: *exists,
                    var: var.clone(),
                    polarity,
                    guard: Box::new(set_guard(var, i, k, polarity, target)),
                },
                rec(scope),
            )
        }
        FormulaNode::Quant(q @ Quantifier::Trace { exists, var, range }, scope) => {
            let inner = mark_quantifiers(scope, vars, k, polarity, target);
            match vars.get(range) {
                None => FormulaNode::Quant(q.clone(), Box::new(inner)),
                Some(&i) => {
                    let mark = FormulaNode::body(LtlBody::atom(&marker(i), var));
                    let scoped = if *exists { mark.and(inner) } else { mark.implies(inner) };
                    FormulaNode::Quant(q.clone(), Box::new(scoped))
                }
            }
        }
        FormulaNode::Quant(Quantifier::SetMM { .. }, _) => {
            unreachable!("guarded input rejected before rewriting")
        }
    }
}

// Guard of the rewritten quantifier over `var` with marker index `i`:
// the set-encoding shape with `var` as the pool, all members tagged
// with `m_i` or untagged, and tagged tables determined letter-wise by
// their encoding component.
fn set_guard(
    var: &str,
    i: usize,
    k: usize,
    polarity: Polarity,
    target: &Alphabet,
) -> FormulaNode {
    let shape = FormulaNode::and_all(
        phi_all_sets_minmax_parts(polarity).map(|p| p.into_node().subst_set_var("Z", var)),
    )
    .expect("five conjuncts");
    shape.and(partition_guard(var, i, k, target))
}

// Members carry marker `i` everywhere or no marker anywhere, and two
// members equal on the encoding propositions are equal outright.
fn partition_guard(var: &str, i: usize, k: usize, target: &Alphabet) -> FormulaNode {
    let m = |j: usize, v: &str| LtlBody::atom(&marker(j), v);
    let tagged = m(i, "pi").globally();
    let untagged = LtlBody::and_all(
        std::iter::once(i)
            .chain((1..=k).filter(|j| *j != i))
            .map(|j| m(j, "pi").not().globally()),
    )
    .expect("at least one marker");
    let shape =
        FormulaNode::quant(tq(false, "pi", var), FormulaNode::body(tagged.or(untagged)));
    let all = ap_all_sets();
    let agree = LtlBody::eq_on(all.props().iter().map(String::as_str), "pi", "pi'")
        .expect("nonempty alphabet")
        .implies(
            LtlBody::eq_on(target.props().iter().map(String::as_str), "pi", "pi'")
                .expect("nonempty alphabet"),
        );
    let functional = FormulaNode::quantify(
        [tq(false, "pi", var), tq(false, "pi'", var)],
        FormulaNode::body(agree),
    );
    shape.and(functional)
}

// Shape of extended models: either the model is empty, or it satisfies
// the set-encoding shape on its encoding component and pairs every
// (encoding, payload) combination with one tagged copy per marker and
// one untagged copy.
fn model_shape(
    input: &Alphabet,
    target: &Alphabet,
    k: usize,
    polarity: Polarity,
) -> Result<Formula, ReductionError> {
    let p = &target.props()[0];
    let empty = FormulaNode::quant(
        tq(false, "pi", VAR_D),
        FormulaNode::body(LtlBody::atom(p, "pi").and(LtlBody::atom(p, "pi").not())),
    );
    let all_traces = FormulaNode::and_all(
        phi_all_sets_minmax_parts(polarity).map(|f| f.into_node().subst_set_var("Z", VAR_D)),
    )
    .expect("five conjuncts");
    let all = ap_all_sets();
    let eq_enc = || {
        LtlBody::eq_on(all.props().iter().map(String::as_str), "pi", "pi''")
            .expect("nonempty alphabet")
    };
    let eq_payload = || LtlBody::eq_on(input.props().iter().map(String::as_str), "pi'", "pi''");
    let copy = |marks: LtlBody| {
        let mut body = eq_enc();
        if let Some(eq) = eq_payload() {
            body = body.and(eq);
        }
        FormulaNode::quant(tq(true, "pi''", VAR_D), FormulaNode::body(body.and(marks)))
    };
    let m = |j: usize| LtlBody::atom(&marker(j), "pi''");
    let tagged = FormulaNode::and_all((1..=k).map(|i| {
        let mut marks = m(i).globally();
        for j in (1..=k).filter(|j| *j != i) {
            marks = marks.and(m(j).not().globally());
        }
        copy(marks)
    }))
    .expect("k is positive");
    let untagged = copy(
        LtlBody::and_all((1..=k).map(|j| m(j).not().globally())).expect("k is positive"),
    );
    let copies = FormulaNode::quantify(
        [tq(false, "pi", VAR_D), tq(false, "pi'", VAR_D)],
        tagged.and(untagged),
    );
    Ok(Formula::new(target.clone(), empty.or(all_traces.and(copies)))?)
}

/// Reads the trace set tagged with marker `i` (1-based) out of an
/// extended trace set: members carrying `m_i` at every position,
/// projected to the alphabet without markers and without the
/// set-encoding propositions.
pub fn enc_marked(t: &TraceSet, i: usize) -> Result<TraceSet, ReductionError> {
    if i == 0 {
        return Err(ReductionError::InvalidParams("marker indices start at 1".into()));
    }
    let name = marker(i);
    let Some(mi) = t.alphabet().index_of(&name) else {
        return Err(ReductionError::InvalidParams(format!(
            "alphabet has no marker proposition {name:?}"
        )));
    };
    let inner: Vec<String> = t
        .alphabet()
        .props()
        .iter()
        .filter(|p| !is_marker(p) && !ap_all_sets().contains(p))
        .cloned()
        .collect();
    let target = Alphabet::new(inner)?;
    let mut out = TraceSet::new(target.clone());
    for tr in t.iter() {
        let everywhere = (0..tr.stem_len() + tr.loop_len()).all(|pos| tr.holds_at(mi, pos));
        if everywhere {
            out.insert(tr.project(&target)?)?;
        }
    }
    Ok(out)
}

/// Extends a trace set for `k` markers: each member is overlaid with
/// its sample partner (an injective pairing in set order, standing in
/// for a bijection with all set encodings) and emitted once untagged
/// and once per marker with that marker at every position. The output
/// has `(k+1)·|t|` members over the extended alphabet.
pub fn ext_traceset(
    t: &TraceSet,
    k: usize,
    sample: &TraceSet,
) -> Result<TraceSet, ReductionError> {
    if k == 0 {
        return Err(ReductionError::InvalidParams("need at least one marker".into()));
    }
    if *sample.alphabet() != ap_all_sets() {
        return Err(ReductionError::InvalidParams(
            "sample must use the set-encoding alphabet".into(),
        ));
    }
    if sample.len() < t.len() {
        return Err(ReductionError::InvalidParams("sample too small for injectivity".into()));
    }
    let target = extended_alphabet(t.alphabet(), k)?;
    let mut out = TraceSet::new(target.clone());
    for (tr, partner) in t.iter().zip(sample.iter()) {
        let base = tr.pointwise_union(partner)?;
        out.insert(base.embed(&target)?)?;
        for i in 1..=k {
            let tag = LassoTrace::new(Alphabet::new([marker(i)])?, Vec::new(), vec![1])?;
            out.insert(base.pointwise_union(&tag)?.embed(&target)?)?;
        }
    }
    Ok(out)
}

/// Extends a transition system for `k` markers: the product with the
/// built-in set-encoding system, copied once per marker index and once
/// per tag bit, with the marker added to the labels of tagged copies.
/// The result has `|V|·8·k·2` vertices; its traces are exactly the
/// extensions of the input's traces.
pub fn ext_transition_system(
    ts: &TransitionSystem,
    k: usize,
) -> Result<TransitionSystem, ReductionError> {
    if k == 0 {
        return Err(ReductionError::InvalidParams("need at least one marker".into()));
    }
    let target = extended_alphabet(ts.alphabet(), k)?;
    let amb = ts_all_sets();
    let a = amb.len();
    let remap = |mask: u64, src: &Alphabet| -> u64 {
        let mut out = 0u64;
        for (j, p) in src.props().iter().enumerate() {
            if mask & (1 << j) != 0 {
                out |= 1 << target.index_of(p).expect("target extends source");
            }
        }
        out
    };
    let idx = |v: usize, va: usize, i: usize, b: usize| ((v * a + va) * k + i) * 2 + b;
    let mut labels = vec![0u64; ts.len() * a * k * 2];
    for v in 0..ts.len() {
        for va in 0..a {
            let base = remap(ts.label(v), ts.alphabet()) | remap(amb.label(va), amb.alphabet());
            for i in 0..k {
                let tag = 1u64 << target.index_of(&marker(i + 1)).expect("marker present");
                labels[idx(v, va, i, 0)] = base;
                labels[idx(v, va, i, 1)] = base | tag;
            }
        }
    }
    let mut edges = BTreeSet::new();
    for &(v, w) in ts.edges() {
        for &(va, wa) in amb.edges() {
            for i in 0..k {
                for b in 0..2 {
                    edges.insert((idx(v, va, i, b), idx(w, wa, i, b)));
                }
            }
        }
    }
    let mut initial = BTreeSet::new();
    for &v in ts.initial() {
        for &va in amb.initial() {
            for i in 0..k {
                for b in 0..2 {
                    initial.insert(idx(v, va, i, b));
                }
            }
        }
    }
    Ok(TransitionSystem::new(target, labels, edges, initial)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{EvalMode, Evaluator};
    use crate::logic::parse_formula;
    use crate::reductions::library::ts_full;
    use crate::traces::Assignment;
    use proptest::prelude::*;

    fn alpha() -> Alphabet {
        Alphabet::new(["x"]).unwrap()
    }

    fn parse(text: &str) -> Formula {
        parse_formula(text, &alpha()).unwrap()
    }

    #[test]
    fn min_binder_gets_strict_subset_obligation() {
        let f = parse("exists (X, min, exists p in X. x[p]). forall q in X. x[q]");
        let g = mm_desugar(&f).unwrap();
        assert_eq!(
            format!("{g}"),
            "exists X. (exists p in X. x[p]) \
             & (forall X'. (forall pi in X'. pi |> X) & (exists pi_1 in X. !pi_1 |> X') \
             -> !(exists p in X'. x[p])) \
             & (forall q in X. x[q])"
        );
    }

    #[test]
    fn max_binder_swaps_the_inclusion() {
        let f = parse("forall (X, max, forall p in X. x[p]). exists q in X. x[q]");
        let g = mm_desugar(&f).unwrap();
        let text = format!("{g}");
        assert!(text.starts_with("forall X. "), "{text}");
        // The rival now bounds the quantified set from above.
        assert!(text.contains("forall pi in X. pi |> X'"), "{text}");
        assert!(text.contains("exists pi_1 in X'. !pi_1 |> X"), "{text}");
        assert!(text.contains("->"), "{text}");
    }

    #[test]
    fn rejects_plain_set_quantifiers() {
        let f = parse("exists X. exists p in X. x[p]");
        assert!(matches!(mm_desugar(&f), Err(ReductionError::Fragment(_))));
    }

    #[test]
    fn guard_free_input_is_unchanged() {
        let f = parse("forall p in D. exists p' in D. F (x[p] & X x[p'])");
        assert_eq!(mm_desugar(&f).unwrap(), f);
    }

    #[test]
    fn desugared_output_reparses() {
        let f = parse("exists (X, min, exists p in X. x[p]). forall q in X. F x[q]");
        let g = mm_desugar(&f).unwrap();
        let reparsed = parse_formula(&format!("{g}"), &alpha()).unwrap();
        assert_eq!(format!("{reparsed}"), format!("{g}"));
    }

    fn mm_corpus() -> Vec<Formula> {
        [
            "exists (X, min, exists p in X. x[p]). forall q in X. x[q]",
            "forall (X, min, exists p in X. x[p]). exists q in X. x[q]",
            "exists (X, max, forall p in X. F x[p]). exists q in X. X x[q]",
            "forall (X, max, forall p in X. x[p]). forall q in X. x[q]",
            "exists (X, min, exists p in X. G x[p]). \
             exists (Y, max, forall r in Y. r |> X). exists s in Y. x[s]",
        ]
        .into_iter()
        .map(parse)
        .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn desugaring_preserves_guarded_truth(
            which in 0usize..5,
            picks in proptest::collection::vec(0usize..12, 0..3),
            extra in proptest::collection::vec(0usize..12, 0..2),
        ) {
            let space: Vec<LassoTrace> =
                ts_full(&alpha()).unwrap().enumerate_lassos(2, 2).iter().cloned().collect();
            let mut model = TraceSet::new(alpha());
            for p in &picks {
                model.insert(space[p % space.len()].clone()).unwrap();
            }
            let mut ambient = model.clone();
            for e in &extra {
                ambient.insert(space[e % space.len()].clone()).unwrap();
            }
            let f = &mm_corpus()[which];
            let g = mm_desugar(f).unwrap();
            let ev = Evaluator::default();
            prop_assert_eq!(
                ev.eval_mm(f, &ambient, &model, EvalMode::Standard).unwrap(),
                ev.eval_standard(&g, &ambient, &model).unwrap()
            );
            prop_assert_eq!(
                ev.eval_mm(f, &model, &model, EvalMode::ClosedWorld).unwrap(),
                ev.eval_closed_world(&g, &model).unwrap()
            );
        }
    }

    #[test]
    fn desugaring_is_deterministic_and_size_bounded() {
        for f in mm_corpus() {
            let g = mm_desugar(&f).unwrap();
            let h = mm_desugar(&f).unwrap();
            assert_eq!(format!("{g}"), format!("{h}"));
            assert!(
                g.node_count() <= 2 * f.node_count() + 24 * 2,
                "{} vs {}",
                g.node_count(),
                f.node_count()
            );
        }
    }

    fn parse_payload(text: &str) -> Formula {
        parse_formula(text, &payload_alphabet()).unwrap()
    }

    #[test]
    fn marks_trace_quantifiers_and_guards_set_quantifiers() {
        let f = parse_payload("exists X. exists p in X. a[p]");
        let enc = minmax_encode(&f, Polarity::Min).unwrap();
        let text = format!("{}", enc.formula);
        assert!(text.contains("exists p in X. m1[p] & a[p]"), "{text}");
        let FormulaNode::Quant(Quantifier::SetMM { polarity, guard, .. }, _) =
            enc.formula.node()
        else {
            panic!("expected a guarded quantifier, got {text}");
        };
        assert_eq!(*polarity, Polarity::Min);
        let mut traces = BTreeSet::new();
        let mut sets = BTreeSet::new();
        guard.free_vars(&mut traces, &mut sets);
        assert!(sets.contains("X"), "guard must range over the bound variable");
        assert!(!sets.contains("Z"), "the pool placeholder must be substituted away");
        let shape = enc.model_shape.unwrap();
        assert!(matches!(shape.node(), FormulaNode::Or(_, _)));
        assert_eq!(shape.alphabet(), enc.formula.alphabet());

        let f = parse_payload("forall X. forall p in X. a[p]");
        let enc = minmax_encode(&f, Polarity::Max).unwrap();
        let text = format!("{}", enc.formula);
        assert!(text.contains("forall p in X. m1[p] -> a[p]"), "{text}");
    }

    #[test]
    fn second_marker_reaches_the_second_set_variable() {
        let f = parse_payload("exists X. exists Y. exists p in X. exists q in Y. F (a[p] & a[q])");
        let enc = minmax_encode(&f, Polarity::Min).unwrap();
        let text = format!("{}", enc.formula);
        assert!(text.contains("exists p in X. m1[p] &"), "{text}");
        assert!(text.contains("exists q in Y. m2[q] &"), "{text}");
        let props = enc.formula.alphabet().props();
        assert!(props.contains(&"m1".to_string()) && props.contains(&"m2".to_string()));
    }

    #[test]
    fn set_free_input_passes_through() {
        let f = parse_payload("forall p in D. F a[p]");
        let enc = minmax_encode(&f, Polarity::Min).unwrap();
        assert_eq!(enc.formula, f);
        assert!(enc.model_shape.is_none());
    }

    #[test]
    fn rejects_collisions_and_guarded_input() {
        let clash = Alphabet::new(["s"]).unwrap();
        let f = parse_formula("exists X. exists p in X. s[p]", &clash).unwrap();
        assert!(matches!(
            minmax_encode(&f, Polarity::Min),
            Err(ReductionError::Alphabet(_))
        ));
        let clash = Alphabet::new(["m1"]).unwrap();
        let f = parse_formula("exists X. exists p in X. m1[p]", &clash).unwrap();
        assert!(matches!(
            minmax_encode(&f, Polarity::Min),
            Err(ReductionError::Alphabet(_))
        ));
        let f = parse("exists (X, min, exists p in X. x[p]). exists q in X. x[q]");
        assert!(matches!(
            minmax_encode(&f, Polarity::Min),
            Err(ReductionError::Fragment(_))
        ));
    }

    #[test]
    fn encoding_is_deterministic_and_size_bounded() {
        let f =
            parse_payload("exists X. forall Y. exists p in X. forall q in Y. F (a[p] & a[q])");
        let a = minmax_encode(&f, Polarity::Min).unwrap();
        let b = minmax_encode(&f, Polarity::Min).unwrap();
        assert_eq!(format!("{}", a.formula), format!("{}", b.formula));
        assert_eq!(
            format!("{}", a.model_shape.as_ref().unwrap()),
            format!("{}", b.model_shape.as_ref().unwrap())
        );
        let k = 2;
        let ap = a.formula.alphabet().len();
        assert!(
            a.formula.node_count() <= f.node_count() + k * (420 + 30 * (k + ap)),
            "{} nodes for input {}",
            a.formula.node_count(),
            f.node_count()
        );
    }

    fn payload_alphabet() -> Alphabet {
        Alphabet::new(["a"]).unwrap()
    }

    fn payload_traces() -> TraceSet {
        let ap = payload_alphabet();
        TraceSet::from_traces(
            ap.clone(),
            [
                LassoTrace::new(ap.clone(), vec![1], vec![0]).unwrap(),
                LassoTrace::new(ap.clone(), vec![], vec![1]).unwrap(),
            ],
        )
        .unwrap()
    }

    fn encoding_sample(n: usize) -> TraceSet {
        let all = ts_all_sets().enumerate_lassos(2, 2);
        TraceSet::from_traces(ap_all_sets(), all.iter().take(n).cloned()).unwrap()
    }

    #[test]
    fn marked_members_select_encoded_preimages() {
        let t = payload_traces();
        let ext = ext_traceset(&t, 1, &encoding_sample(t.len())).unwrap();
        let wide = ext.alphabet().clone();
        let ev = Evaluator::default();
        for body in ["a[p]", "F a[p]", "G a[p]", "X a[p]"] {
            for (shape, plain) in [
                (format!("exists p in W. m1[p] & {body}"), format!("exists p in W. {body}")),
                (format!("forall p in W. m1[p] -> {body}"), format!("forall p in W. {body}")),
            ] {
                let marked = parse_formula(&shape, &wide).unwrap();
                let bare = parse_formula(&plain, &payload_alphabet()).unwrap();
                let mut asg = Assignment::new();
                asg.bind_set("W", ext.clone());
                let lhs = ev.eval_with_assignment(&marked, &asg, &ext).unwrap();
                let mut asg = Assignment::new();
                asg.bind_set("W", t.clone());
                let rhs = ev.eval_with_assignment(&bare, &asg, &t).unwrap();
                assert_eq!(lhs, rhs, "{shape}");
            }
        }
    }

    #[test]
    fn marked_projection_inverts_extension() {
        let t = payload_traces();
        for k in [1, 2] {
            let ext = ext_traceset(&t, k, &encoding_sample(t.len())).unwrap();
            assert_eq!(ext.len(), t.len() * (k + 1));
            for i in 1..=k {
                assert_eq!(enc_marked(&ext, i).unwrap(), t);
            }
            assert_eq!(ext.project(&payload_alphabet()).unwrap(), t);
        }
        let empty = TraceSet::new(payload_alphabet());
        let ext = ext_traceset(&empty, 1, &encoding_sample(0)).unwrap();
        assert!(ext.is_empty());
        assert!(enc_marked(&ext, 1).unwrap().is_empty());
    }

    #[test]
    fn extension_rejects_bad_parameters() {
        let t = payload_traces();
        assert!(matches!(
            ext_traceset(&t, 0, &encoding_sample(2)),
            Err(ReductionError::InvalidParams(_))
        ));
        assert!(matches!(
            ext_traceset(&t, 1, &encoding_sample(1)),
            Err(ReductionError::InvalidParams(_))
        ));
        let wrong = TraceSet::new(payload_alphabet());
        assert!(matches!(
            ext_traceset(&t, 1, &wrong),
            Err(ReductionError::InvalidParams(_))
        ));
        assert!(matches!(enc_marked(&t, 1), Err(ReductionError::InvalidParams(_))));
    }

    fn one_vertex_system() -> TransitionSystem {
        TransitionSystem::new(
            payload_alphabet(),
            vec![1],
            [(0, 0)].into_iter().collect(),
            [0].into_iter().collect(),
        )
        .unwrap()
    }

    #[test]
    fn system_extension_has_the_product_shape() {
        let ext = ext_transition_system(&one_vertex_system(), 1).unwrap();
        assert_eq!(ext.len(), 16);
        let m1 = 1u64 << ext.alphabet().index_of("m1").unwrap();
        for v in 0..ext.len() {
            let tagged = v % 2 == 1;
            assert_eq!(ext.label(v) & m1 != 0, tagged, "vertex {v}");
        }
        let two = ts_full(&payload_alphabet()).unwrap();
        let ext = ext_transition_system(&two, 2).unwrap();
        assert_eq!(ext.len(), two.len() * 8 * 2 * 2);
        assert!(matches!(
            ext_transition_system(&one_vertex_system(), 0),
            Err(ReductionError::InvalidParams(_))
        ));
        let clash = TransitionSystem::new(
            Alphabet::new(["x"]).unwrap(),
            vec![1],
            [(0, 0)].into_iter().collect(),
            [0].into_iter().collect(),
        )
        .unwrap();
        assert!(matches!(
            ext_transition_system(&clash, 1),
            Err(ReductionError::Alphabet(_))
        ));
    }

    #[test]
    fn system_extension_matches_traceset_extension() {
        let ts = one_vertex_system();
        let ext = ext_transition_system(&ts, 1).unwrap();
        let got = ext.enumerate_lassos(3, 2);
        // All-pairs overlay of the component enumerations, tagged and
        // untagged, is exactly the product's enumeration.
        let target = ext.alphabet();
        let mut expected = TraceSet::new(target.clone());
        let tag = LassoTrace::new(Alphabet::new(["m1"]).unwrap(), Vec::new(), vec![1]).unwrap();
        for t in ts.enumerate_lassos(3, 2).iter() {
            for ta in ts_all_sets().enumerate_lassos(3, 2).iter() {
                let base = t.pointwise_union(ta).unwrap();
                expected.insert(base.embed(target).unwrap()).unwrap();
                expected
                    .insert(base.pointwise_union(&tag).unwrap().embed(target).unwrap())
                    .unwrap();
            }
        }
        assert_eq!(got, expected);
        // The injective extension picks out a subset of those traces.
        let payload = ts.enumerate_lassos(3, 2);
        let all = ts_all_sets().enumerate_lassos(3, 2);
        let sample =
            TraceSet::from_traces(ap_all_sets(), all.iter().take(payload.len()).cloned()).unwrap();
        let small = ext_traceset(&payload, 1, &sample).unwrap();
        for tr in small.iter() {
            assert!(got.contains(tr), "{tr}");
        }
    }
}
