//! Translation of hyperproperty sentences into third-order arithmetic.
//!
//! A trace over `AP` becomes the set of naturals `pair(j, e(p))` for every
//! position `j` where proposition `p` holds, a trace set becomes a family
//! (third-order object) of such sets, and quantifiers climb one order:
//! set quantifiers become third-order, trace quantifiers second-order, and
//! temporal operators become arithmetic over position variables. The three
//! entry points share the same core and differ in how they close over the
//! ambient and model families:
//!
//! * [`ar_translate`] quantifies both families and constrains them with the
//!   all-traces/only-traces axioms, deciding general satisfaction.
//! * [`fssat_arith_encode`] additionally quantifies a finite transition
//!   system (vertex count, edge set, initial set, labeling) and ties the
//!   model family to the traces of its paths, deciding satisfaction by some
//!   finite system.
//! * [`mc_arith_encode`] pins that transition system to a concrete one:
//!   the vertex count is inlined as a constant and the edge, initial, and
//!   label sets are forced element by element, deciding model checking.
//!
//! [`ar_translate_open`] exposes the bare core with both families free so
//! a finite model can be supplied as an explicit valuation and the result
//! checked with bounded evaluation.
//!
//! Naming: the set variable for trace variable `p` is `Yp`, the family for
//! set variable `X` is `FX` (the distinguished ranges map to `FD` and
//! `FALL`), and position variables are `i1`, `i2`, ... in order of
//! introduction. Families never collide with each other or with trace-set
//! variables: set variables cannot shadow the distinguished range names,
//! and the input is alpha-renamed so binders are pairwise distinct.
//!
//! Output size: each desugared temporal node contributes at most 20
//! arithmetic nodes (an until contributes 19 plus its children, a next 9,
//! an atom 7), each trace quantifier 5, each set quantifier the fixed
//! only-traces axiom plus 2, plus a fixed preamble. Body desugaring
//! duplicates the operands of F, G, iff, and xor, so those connectives can
//! double the body size per nesting level before the linear pass runs.

use crate::arith::library;
use crate::arith::{ArithFormula, ArithTerm};
use crate::logic::{alpha_rename, Formula, FormulaNode, LtlBody, Quantifier};
use crate::traces::{Alphabet, TransitionSystem, VAR_ALL, VAR_D};

use super::ReductionError;

/// Name of the family variable standing for the set variable `var`.
fn family(var: &str) -> String {
    format!("F{var}")
}

/// Name of the second-order variable holding trace variable `var`'s trace.
fn trace_set(var: &str) -> String {
    format!("Y{var}")
}

/// Per-translation state: the proposition encoding and a counter for
/// fresh position variables.
struct Ctx<'a> {
    alphabet: &'a Alphabet,
    positions: usize,
}

impl Ctx<'_> {
    fn fresh_pos(&mut self) -> String {
        self.positions += 1;
        format!("i{}", self.positions)
    }
}

/// Rejects inputs the translation has no clause for: guarded min/max
/// quantifiers and formulas with free variables beyond the distinguished
/// ranges.
fn check_input(f: &Formula) -> Result<(), ReductionError> {
    if f.node().has_mm_quantifier() {
        return Err(ReductionError::Fragment(
            "arithmetic translation takes plain set quantifiers; desugar min/max guards first"
                .into(),
        ));
    }
    let mut traces = std::collections::BTreeSet::new();
    let mut sets = std::collections::BTreeSet::new();
    f.node().free_vars(&mut traces, &mut sets);
    sets.remove(VAR_D);
    sets.remove(VAR_ALL);
    if let Some(v) = traces.iter().chain(sets.iter()).next() {
        return Err(ReductionError::InvalidParams(format!(
            "arithmetic translation needs a sentence; variable {v:?} is free"
        )));
    }
    Ok(())
}

/// Core clause-by-clause translation at the given position term. Boolean
/// structure maps homomorphically, quantifiers climb one order, and the
/// position only advances inside temporal bodies.
fn ar_node(
    node: &FormulaNode,
    pos: &ArithTerm,
    ctx: &mut Ctx,
) -> Result<ArithFormula, ReductionError> {
    match node {
        FormulaNode::Body(b) => Ok(ar_body(&b.desugar(), pos, ctx)),
        FormulaNode::Not(a) => Ok(ar_node(a, pos, ctx)?.not()),
        FormulaNode::And(a, b) => Ok(ar_node(a, pos, ctx)?.and(ar_node(b, pos, ctx)?)),
        FormulaNode::Or(a, b) => Ok(ar_node(a, pos, ctx)?.or(ar_node(b, pos, ctx)?)),
        FormulaNode::Implies(a, b) => Ok(ar_node(a, pos, ctx)?.implies(ar_node(b, pos, ctx)?)),
        FormulaNode::Iff(a, b) => Ok(ar_node(a, pos, ctx)?.iff(ar_node(b, pos, ctx)?)),
        FormulaNode::Xor(a, b) => Ok(ar_node(a, pos, ctx)?.iff(ar_node(b, pos, ctx)?).not()),
        FormulaNode::Quant(Quantifier::SetMM { .. }, _) => Err(ReductionError::Fragment(
            "arithmetic translation takes plain set quantifiers; desugar min/max guards first"
                .into(),
        )),
        FormulaNode::Quant(Quantifier::Set { exists, var }, scope) => {
            let fam = family(var);
            // The quantified family may hold any traces, nothing else.
            let axiom = library::rename_set_var(
                library::only_traces(ctx.alphabet.len() as u64),
                "YY",
                &fam,
            );
            let inner = ar_node(scope, pos, ctx)?;
            let body = if *exists { axiom.and(inner) } else { axiom.implies(inner) };
            Ok(ArithFormula::quant(3, *exists, fam, body))
        }
        FormulaNode::Quant(Quantifier::Trace { exists, var, range }, scope) => {
            let set = trace_set(var);
            let member = ArithFormula::in_family(&set, family(range));
            let inner = ar_node(scope, pos, ctx)?;
            let body = if *exists { member.and(inner) } else { member.implies(inner) };
            Ok(ArithFormula::quant(2, *exists, set, body))
        }
    }
}

/// Temporal core at a position term. Expects the desugared core
/// connectives; sugared nodes are desugared on the way in.
fn ar_body(b: &LtlBody, pos: &ArithTerm, ctx: &mut Ctx) -> ArithFormula {
    match b {
        LtlBody::Atom { prop, var } => {
            // Validation against the alphabet happened at Formula::new.
            let e = ctx.alphabet.index_of(prop).expect("validated proposition") as u64;
            ArithFormula::in_set(pos.clone().pair(ArithTerm::num(e)), trace_set(var))
        }
        LtlBody::InSet { var, set } => ArithFormula::in_family(trace_set(var), family(set)),
        LtlBody::Not(a) => ar_body(a, pos, ctx).not(),
        LtlBody::Or(a, b) => ar_body(a, pos, ctx).or(ar_body(b, pos, ctx)),
        LtlBody::Next(a) => {
            let next = ctx.fresh_pos();
            let step =
                ArithFormula::eq(ArithTerm::var(&next), pos.clone().add(ArithTerm::num(1)));
            let inner = ar_body(a, &ArithTerm::var(&next), ctx);
            ArithFormula::quant(1, true, next, step.and(inner))
        }
        LtlBody::Until(a, b) => {
            let wit = ctx.fresh_pos();
            let wit_ge_pos = ArithFormula::less(ArithTerm::var(&wit), pos.clone()).not();
            let at_wit = ar_body(b, &ArithTerm::var(&wit), ctx);
            let mid = ctx.fresh_pos();
            let mid_ge_pos = ArithFormula::less(ArithTerm::var(&mid), pos.clone()).not();
            let mid_lt_wit = ArithFormula::less(ArithTerm::var(&mid), ArithTerm::var(&wit));
            let at_mid = ar_body(a, &ArithTerm::var(&mid), ctx);
            let everywhere_before = ArithFormula::quant(
                1,
                false,
                mid,
                mid_ge_pos.and(mid_lt_wit).implies(at_mid),
            );
            ArithFormula::quant(
                1,
                true,
                wit,
                ArithFormula::and_all([wit_ge_pos, at_wit, everywhere_before]),
            )
        }
        sugared => ar_body(&sugared.desugar(), pos, ctx),
    }
}

/// Alpha-renames, checks the fragment, and runs the core at position 0.
fn ar_root(f: &Formula) -> Result<(ArithFormula, u64), ReductionError> {
    check_input(f)?;
    let renamed = alpha_rename(f);
    let ap = renamed.alphabet().len() as u64;
    let mut ctx = Ctx { alphabet: renamed.alphabet(), positions: 0 };
    let core = ar_node(renamed.node(), &ArithTerm::num(0), &mut ctx)?;
    Ok((core, ap))
}

/// Closed third-order sentence equivalent to satisfaction of `f`: the
/// ambient family `FALL` holds exactly the traces, the model family `FD`
/// holds some traces, and the translated core runs at position 0.
pub fn ar_translate(f: &Formula) -> Result<ArithFormula, ReductionError> {
    let (core, ap) = ar_root(f)?;
    let ambient =
        library::rename_set_var(library::all_traces(ap), "YY", &family(VAR_ALL));
    let model = library::rename_set_var(library::only_traces(ap), "YY", &family(VAR_D));
    Ok(ArithFormula::quant(
        3,
        true,
        family(VAR_ALL),
        ArithFormula::quant(
            3,
            true,
            family(VAR_D),
            ArithFormula::and_all([ambient, model, core]),
        ),
    ))
}

/// The bare translated core at position 0, with the ambient and model
/// families `FALL` and `FD` left free. Supplying concrete families as an
/// evaluation environment checks `f` against an explicit finite model.
pub fn ar_translate_open(f: &Formula) -> Result<ArithFormula, ReductionError> {
    Ok(ar_root(f)?.0)
}

/// The two containment conjuncts tying the model family `FD` to the paths
/// of the quantified system: every member is the trace of some path, and
/// every path contributes its trace.
fn paths_carve_model() -> [ArithFormula; 2] {
    let member_has_path = ArithFormula::quant(
        2,
        false,
        "T",
        ArithFormula::in_family("T", family(VAR_D)).implies(ArithFormula::quant(
            2,
            true,
            "P",
            library::is_path().and(library::trace_of()),
        )),
    );
    let path_has_member = ArithFormula::quant(
        2,
        false,
        "P",
        library::is_path().implies(ArithFormula::quant(
            2,
            true,
            "T",
            ArithFormula::in_family("T", family(VAR_D)).and(library::trace_of()),
        )),
    );
    [member_has_path, path_has_member]
}

/// Closed sentence equivalent to satisfaction of `f` by some finite
/// transition system: the closed translation plus an existentially
/// quantified system (`n`, `E`, `I`, `L`) whose path traces are exactly
/// the model family.
pub fn fssat_arith_encode(f: &Formula) -> Result<ArithFormula, ReductionError> {
    let (core, ap) = ar_root(f)?;
    let ambient =
        library::rename_set_var(library::all_traces(ap), "YY", &family(VAR_ALL));
    let model = library::rename_set_var(library::only_traces(ap), "YY", &family(VAR_D));
    let [member_has_path, path_has_member] = paths_carve_model();
    let system = ArithFormula::quant(
        1,
        true,
        "n",
        ArithFormula::quant(
            2,
            true,
            "E",
            ArithFormula::quant(
                2,
                true,
                "I",
                ArithFormula::quant(
                    2,
                    true,
                    "L",
                    ArithFormula::and_all([
                        library::is_ts(ap),
                        member_has_path,
                        path_has_member,
                    ]),
                ),
            ),
        ),
    );
    Ok(ArithFormula::quant(
        3,
        true,
        family(VAR_ALL),
        ArithFormula::quant(
            3,
            true,
            family(VAR_D),
            ArithFormula::and_all([ambient, model, system, core]),
        ),
    ))
}

/// Forces a quantified set of naturals to hold exactly the given terms.
fn pin_set(set: &str, members: Vec<ArithTerm>) -> ArithFormula {
    let picks = members.into_iter().map(|m| ArithFormula::eq(ArithTerm::var("y"), m));
    ArithFormula::quant(
        1,
        false,
        "y",
        ArithFormula::in_set(ArithTerm::var("y"), set).iff(ArithFormula::or_all(picks)),
    )
}

/// Replaces the first-order variable `name` by a constant, skipping scopes
/// that rebind it.
fn subst_num(f: &ArithFormula, name: &str, value: u64) -> ArithFormula {
    fn term(t: &ArithTerm, name: &str, value: u64) -> ArithTerm {
        match t {
            ArithTerm::Var(v) if v == name => ArithTerm::num(value),
            ArithTerm::Var(_) | ArithTerm::Const(_) => t.clone(),
            ArithTerm::Add(a, b) => term(a, name, value).add(term(b, name, value)),
            ArithTerm::Mul(a, b) => term(a, name, value).mul(term(b, name, value)),
            ArithTerm::Pair(a, b) => term(a, name, value).pair(term(b, name, value)),
        }
    }
    match f {
        ArithFormula::Less(a, b) => {
            ArithFormula::less(term(a, name, value), term(b, name, value))
        }
        ArithFormula::Eq(a, b) => ArithFormula::eq(term(a, name, value), term(b, name, value)),
        ArithFormula::InSet(t, s) => ArithFormula::in_set(term(t, name, value), s.clone()),
        ArithFormula::InFamily(_, _) => f.clone(),
        ArithFormula::Not(a) => subst_num(a, name, value).not(),
        ArithFormula::And(a, b) => subst_num(a, name, value).and(subst_num(b, name, value)),
        ArithFormula::Or(a, b) => subst_num(a, name, value).or(subst_num(b, name, value)),
        ArithFormula::Implies(a, b) => {
            subst_num(a, name, value).implies(subst_num(b, name, value))
        }
        ArithFormula::Iff(a, b) => subst_num(a, name, value).iff(subst_num(b, name, value)),
        ArithFormula::Quant { order, exists, var, body } => {
            let body = if *order == 1 && var == name {
                body.as_ref().clone()
            } else {
                subst_num(body, name, value)
            };
            ArithFormula::quant(*order, *exists, var.clone(), body)
        }
    }
}

/// Closed sentence equivalent to `ts` satisfying `f`: the finite-system
/// form with the quantified system pinned to `ts`. The vertex count is
/// inlined as a constant, and the edge, initial, and label sets are forced
/// element by element, which subsumes the shape axioms of the quantified
/// form.
pub fn mc_arith_encode(
    ts: &TransitionSystem,
    f: &Formula,
) -> Result<ArithFormula, ReductionError> {
    if ts.alphabet() != f.alphabet() {
        return Err(ReductionError::Alphabet(
            "transition system and formula share one alphabet".into(),
        ));
    }
    let (core, ap) = ar_root(f)?;
    let ambient =
        library::rename_set_var(library::all_traces(ap), "YY", &family(VAR_ALL));
    let model = library::rename_set_var(library::only_traces(ap), "YY", &family(VAR_D));
    let n = ts.len() as u64;
    let [member_has_path, path_has_member] = paths_carve_model();
    let pin_edges = pin_set(
        "E",
        ts.edges()
            .iter()
            .map(|&(a, b)| ArithTerm::num(a as u64).pair(ArithTerm::num(b as u64)))
            .collect(),
    );
    let pin_initial =
        pin_set("I", ts.initial().iter().map(|&v| ArithTerm::num(v as u64)).collect());
    let mut label_pairs = Vec::new();
    for v in 0..ts.len() {
        for c in 0..ts.alphabet().len() {
            if ts.label(v) & (1 << c) != 0 {
                label_pairs.push(ArithTerm::num(v as u64).pair(ArithTerm::num(c as u64)));
            }
        }
    }
    let pin_labels = pin_set("L", label_pairs);
    let system = ArithFormula::quant(
        2,
        true,
        "E",
        ArithFormula::quant(
            2,
            true,
            "I",
            ArithFormula::quant(
                2,
                true,
                "L",
                ArithFormula::and_all([
                    pin_edges,
                    pin_initial,
                    pin_labels,
                    subst_num(&member_has_path, "n", n),
                    subst_num(&path_has_member, "n", n),
                ]),
            ),
        ),
    );
    Ok(ArithFormula::quant(
        3,
        true,
        family(VAR_ALL),
        ArithFormula::quant(
            3,
            true,
            family(VAR_D),
            ArithFormula::and_all([ambient, model, system, core]),
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{
        encode_trace_restriction, encoding_limit, eval_arith_bounded, ArithEnv, ArithValue,
        ScopeBounds,
    };
    use crate::eval::Evaluator;
    use crate::logic::parse_formula;
    use crate::traces::{LassoTrace, TraceSet};

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    fn just_a() -> Alphabet {
        Alphabet::new(["a"]).unwrap()
    }

    fn parse_ab(src: &str) -> Formula {
        parse_formula(src, &ab()).unwrap()
    }

    fn parse_a(src: &str) -> Formula {
        parse_formula(src, &just_a()).unwrap()
    }

    /// True when some subformula equals `target`.
    fn has_subformula(f: &ArithFormula, target: &ArithFormula) -> bool {
        if f == target {
            return true;
        }
        match f {
            ArithFormula::Less(_, _)
            | ArithFormula::Eq(_, _)
            | ArithFormula::InSet(_, _)
            | ArithFormula::InFamily(_, _) => false,
            ArithFormula::Not(a) => has_subformula(a, target),
            ArithFormula::And(a, b)
            | ArithFormula::Or(a, b)
            | ArithFormula::Implies(a, b)
            | ArithFormula::Iff(a, b) => {
                has_subformula(a, target) || has_subformula(b, target)
            }
            ArithFormula::Quant { body, .. } => has_subformula(body, target),
        }
    }

    /// True when the variable occurs in some term.
    fn mentions_term_var(f: &ArithFormula, name: &str) -> bool {
        fn term_has(t: &ArithTerm, name: &str) -> bool {
            match t {
                ArithTerm::Var(v) => v == name,
                ArithTerm::Const(_) => false,
                ArithTerm::Add(a, b) | ArithTerm::Mul(a, b) | ArithTerm::Pair(a, b) => {
                    term_has(a, name) || term_has(b, name)
                }
            }
        }
        match f {
            ArithFormula::Less(a, b) | ArithFormula::Eq(a, b) => {
                term_has(a, name) || term_has(b, name)
            }
            ArithFormula::InSet(t, _) => term_has(t, name),
            ArithFormula::InFamily(_, _) => false,
            ArithFormula::Not(a) => mentions_term_var(a, name),
            ArithFormula::And(a, b)
            | ArithFormula::Or(a, b)
            | ArithFormula::Implies(a, b)
            | ArithFormula::Iff(a, b) => {
                mentions_term_var(a, name) || mentions_term_var(b, name)
            }
            ArithFormula::Quant { body, .. } => mentions_term_var(body, name),
        }
    }

    #[test]
    fn next_becomes_a_successor_position() {
        let f = parse_a("exists p in D. X a[p]");
        let got = ar_translate_open(&f).unwrap();
        let expected = ArithFormula::quant(
            2,
            true,
            "Yp",
            ArithFormula::in_family("Yp", "FD").and(ArithFormula::quant(
                1,
                true,
                "i1",
                ArithFormula::eq(
                    ArithTerm::var("i1"),
                    ArithTerm::num(0).add(ArithTerm::num(1)),
                )
                .and(ArithFormula::in_set(
                    ArithTerm::var("i1").pair(ArithTerm::num(0)),
                    "Yp",
                )),
            )),
        );
        assert_eq!(got, expected);
    }

    #[test]
    fn until_brackets_the_witness_interval() {
        let f = parse_ab("exists p in D. a[p] U b[p]");
        let got = ar_translate_open(&f).unwrap();
        let wit_ge = ArithFormula::less(ArithTerm::var("i1"), ArithTerm::num(0)).not();
        let at_wit =
            ArithFormula::in_set(ArithTerm::var("i1").pair(ArithTerm::num(1)), "Yp");
        let before = ArithFormula::quant(
            1,
            false,
            "i2",
            ArithFormula::less(ArithTerm::var("i2"), ArithTerm::num(0))
                .not()
                .and(ArithFormula::less(ArithTerm::var("i2"), ArithTerm::var("i1")))
                .implies(ArithFormula::in_set(
                    ArithTerm::var("i2").pair(ArithTerm::num(0)),
                    "Yp",
                )),
        );
        let expected = ArithFormula::quant(
            2,
            true,
            "Yp",
            ArithFormula::in_family("Yp", "FD").and(ArithFormula::quant(
                1,
                true,
                "i1",
                ArithFormula::and_all([wit_ge, at_wit, before]),
            )),
        );
        assert_eq!(got, expected);
    }

    #[test]
    fn quantifiers_climb_one_order() {
        let f = parse_a("exists X. forall p in X. a[p]");
        let got = ar_translate_open(&f).unwrap();
        let axiom = library::rename_set_var(library::only_traces(1), "YY", "FX");
        let expected = ArithFormula::quant(
            3,
            true,
            "FX",
            axiom.and(ArithFormula::quant(
                2,
                false,
                "Yp",
                ArithFormula::in_family("Yp", "FX").implies(ArithFormula::in_set(
                    ArithTerm::num(0).pair(ArithTerm::num(0)),
                    "Yp",
                )),
            )),
        );
        assert_eq!(got, expected);
    }

    #[test]
    fn closed_translation_is_a_sentence_with_both_families() {
        let f = parse_a("forall p in D. a[p]");
        let got = ar_translate(&f).unwrap();
        assert!(got.infer_orders().unwrap().is_empty());
        let ambient = library::rename_set_var(library::all_traces(1), "YY", "FALL");
        let model = library::rename_set_var(library::only_traces(1), "YY", "FD");
        let core = ArithFormula::quant(
            2,
            false,
            "Yp",
            ArithFormula::in_family("Yp", "FD").implies(ArithFormula::in_set(
                ArithTerm::num(0).pair(ArithTerm::num(0)),
                "Yp",
            )),
        );
        let expected = ArithFormula::quant(
            3,
            true,
            "FALL",
            ArithFormula::quant(3, true, "FD", ArithFormula::and_all([ambient, model, core])),
        );
        assert_eq!(got, expected);
    }

    #[test]
    fn finite_system_form_quantifies_a_nonempty_system() {
        let f = parse_a("forall p in D. a[p]");
        let got = fssat_arith_encode(&f).unwrap();
        assert!(got.infer_orders().unwrap().is_empty());
        assert!(has_subformula(&got, &library::is_ts(1)));
        let member_has_path = ArithFormula::quant(
            2,
            false,
            "T",
            ArithFormula::in_family("T", "FD").implies(ArithFormula::quant(
                2,
                true,
                "P",
                library::is_path().and(library::trace_of()),
            )),
        );
        assert!(has_subformula(&got, &member_has_path));
        let path_has_member = ArithFormula::quant(
            2,
            false,
            "P",
            library::is_path().implies(ArithFormula::quant(
                2,
                true,
                "T",
                ArithFormula::in_family("T", "FD").and(library::trace_of()),
            )),
        );
        assert!(has_subformula(&got, &path_has_member));
    }

    #[test]
    fn model_checking_form_pins_the_system() {
        let ts = TransitionSystem::new(
            just_a(),
            vec![1],
            [(0, 0)].into_iter().collect(),
            [0].into_iter().collect(),
        )
        .unwrap();
        let f = parse_a("forall p in D. a[p]");
        let got = mc_arith_encode(&ts, &f).unwrap();
        assert!(got.infer_orders().unwrap().is_empty());
        // The vertex count is inlined, so no quantified system size remains.
        assert!(!mentions_term_var(&got, "n"));
        let pin_edges = ArithFormula::quant(
            1,
            false,
            "y",
            ArithFormula::in_set(ArithTerm::var("y"), "E").iff(ArithFormula::eq(
                ArithTerm::var("y"),
                ArithTerm::num(0).pair(ArithTerm::num(0)),
            )),
        );
        assert!(has_subformula(&got, &pin_edges));
        let pin_labels = ArithFormula::quant(
            1,
            false,
            "y",
            ArithFormula::in_set(ArithTerm::var("y"), "L").iff(ArithFormula::eq(
                ArithTerm::var("y"),
                ArithTerm::num(0).pair(ArithTerm::num(0)),
            )),
        );
        assert!(has_subformula(&got, &pin_labels));
        assert!(!has_subformula(&got, &library::is_ts(1)));
    }

    #[test]
    fn model_checking_form_demands_matching_alphabets() {
        let ts = TransitionSystem::new(
            ab(),
            vec![1],
            [(0, 0)].into_iter().collect(),
            [0].into_iter().collect(),
        )
        .unwrap();
        let f = parse_a("forall p in D. a[p]");
        assert!(matches!(mc_arith_encode(&ts, &f), Err(ReductionError::Alphabet(_))));
    }

    #[test]
    fn guarded_quantifiers_are_rejected() {
        let f = parse_a("exists (X, min, exists p in X. a[p]). forall q in X. a[q]");
        assert!(matches!(ar_translate(&f), Err(ReductionError::Fragment(_))));
        assert!(matches!(fssat_arith_encode(&f), Err(ReductionError::Fragment(_))));
    }

    #[test]
    fn open_formulas_are_rejected() {
        let f = Formula::new(just_a(), FormulaNode::body(LtlBody::atom("a", "p"))).unwrap();
        assert!(matches!(ar_translate(&f), Err(ReductionError::InvalidParams(_))));
    }

    /// Bounded arithmetic evaluation of the open core, with the model
    /// family supplied explicitly, agrees with closed-world evaluation.
    #[test]
    fn open_core_matches_closed_world_evaluation() {
        let alphabet = just_a();
        let always_a = LassoTrace::new(alphabet.clone(), vec![], vec![1]).unwrap();
        let a_after_one = LassoTrace::new(alphabet.clone(), vec![0], vec![1]).unwrap();
        let models = [
            TraceSet::from_traces(alphabet.clone(), [always_a.clone()]).unwrap(),
            TraceSet::from_traces(alphabet.clone(), [a_after_one.clone()]).unwrap(),
            TraceSet::from_traces(alphabet.clone(), [always_a, a_after_one]).unwrap(),
        ];
        let formulas = [
            "forall p in D. G a[p]",
            "forall p in D. X !a[p]",
            "exists p in D. (!a[p]) U a[p]",
            "exists p in D. !a[p] & X G a[p]",
            "forall p in D. a[p]",
            "exists X. forall p in X. a[p]",
            "forall X. exists p in X. a[p] | !a[p]",
            "forall p in D. forall q in D. (a[p] <-> a[q]) | F a[p]",
        ];
        let eval = Evaluator::default();
        for model in &models {
            // Positions up to stem + two loop rounds decide these shallow
            // formulas; the second universe holds the model's encodings.
            let first_bound = model
                .iter()
                .map(|t| (t.stem_len() + 2 * t.loop_len()) as u64)
                .max()
                .unwrap();
            let limit = encoding_limit(first_bound, 1);
            let encodings: Vec<_> =
                model.iter().map(|t| encode_trace_restriction(t, limit)).collect();
            let families = crate::arith::powerset_of_family(&encodings);
            let bounds = ScopeBounds::new(first_bound)
                .with_second_universe(encodings.clone())
                .with_third_universe(families);
            let mut env = ArithEnv::new();
            env.insert("FD".into(), ArithValue::Family(encodings));
            for src in formulas {
                let f = parse_formula(src, &alphabet).unwrap();
                let want = eval.eval_closed_world(&f, model).unwrap();
                let open = ar_translate_open(&f).unwrap();
                let got = eval_arith_bounded(&open, &bounds, &env).unwrap();
                assert_eq!(got, want, "{src} over {model:?}");
            }
        }
    }

    #[test]
    fn translation_is_deterministic_and_size_bounded() {
        let sources = [
            "forall p in D. G a[p]",
            "exists X. forall p in X. a[p] U b[p]",
            "forall X. forall p in X. exists q in D. (a[p] <-> b[q]) & X X a[q]",
        ];
        for src in sources {
            let f = parse_ab(src);
            let once = ar_translate(&f).unwrap();
            assert_eq!(once, ar_translate(&f).unwrap());
            assert!(once.node_count() <= 25 * f.node_count() + 250, "{src}");
            let fssat = fssat_arith_encode(&f).unwrap();
            assert_eq!(fssat, fssat_arith_encode(&f).unwrap());
        }
    }
}
