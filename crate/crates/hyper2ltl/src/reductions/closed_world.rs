//! Closed-world semantics as a syntactic guard.
//!
//! Closed-world evaluation restricts set quantifiers to subsets of the
//! model. The same effect is had under standard semantics by guarding
//! each set quantifier with "every member is a model trace": widening
//! the ambient pool then adds no usable candidate sets, so the guarded
//! sentence has one truth value over all ambient supersets of the model.
//!
//! Guards are placed at each binder rather than hoisted into a prenex
//! prefix: pulling an existential guard out of a disjunction or out of
//! another quantifier's scope changes truth when a candidate set is
//! empty, so the output keeps the input's connective structure.

use std::collections::BTreeSet;

use crate::logic::{fresh_name, Formula, FormulaNode, LtlBody, Quantifier};
use crate::traces::{VAR_ALL, VAR_D};

use super::ReductionError;

/// Rewrites a closed-world sentence into a standard-semantics sentence
/// with the same models: plain set quantifiers get membership guards,
/// everything else is kept as-is. Output size is linear in input size.
pub fn cw_to_standard(f: &Formula) -> Result<Formula, ReductionError> {
    let report = f.check_sentence(false);
    if report.uses_all {
        return Err(ReductionError::AmbientPresent(format!(
            "{VAR_ALL} has no meaning under closed-world semantics"
        )));
    }
    let mut used = BTreeSet::new();
    f.node().all_var_names(&mut used);
    let node = guard_sets(f.node(), &mut used)?;
    Ok(Formula::new(f.alphabet().clone(), node)?)
}

fn guard_sets(
    n: &FormulaNode,
    used: &mut BTreeSet<String>,
) -> Result<FormulaNode, ReductionError> {
    let rec = |a: &FormulaNode, used: &mut BTreeSet<String>| guard_sets(a, used).map(Box::new);
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
        FormulaNode::Quant(Quantifier::Set { exists, var }, scope) => {
            let inner = guard_sets(scope, used)?;
            let member = fresh_name("pi", used);
            let guard = FormulaNode::quant(
                Quantifier::Trace {
                    exists: false,
                    var: member.clone(),
                    range: var.clone(),
                },
                FormulaNode::body(LtlBody::in_set(&member, VAR_D)),
            );
            let scoped = if *exists { guard.and(inner) } else { guard.implies(inner) };
            FormulaNode::Quant(
                Quantifier::Set { exists: *exists, var: var.clone() },
                Box::new(scoped),
            )
        }
        FormulaNode::Quant(Quantifier::SetMM { var, .. }, _) => {
            return Err(ReductionError::Fragment(format!(
                "guarded min/max quantifier over {var}; desugar it first"
            )))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::Evaluator;
    use crate::logic::parse_formula;
    use crate::reductions::library::ts_full;
    use crate::traces::{Alphabet, TraceSet};
    use proptest::prelude::*;

    fn alpha() -> Alphabet {
        Alphabet::new(["x"]).unwrap()
    }

    fn parse(text: &str) -> Formula {
        parse_formula(text, &alpha()).unwrap()
    }

    #[test]
    fn guards_each_binder_in_place() {
        let f = parse("exists X. exists p in X. x[p]");
        let g = cw_to_standard(&f).unwrap();
        assert_eq!(
            format!("{g}"),
            "exists X. (forall pi in X. pi |> D) & (exists p in X. x[p])"
        );
        let f = parse("forall X. exists p in X. x[p]");
        let g = cw_to_standard(&f).unwrap();
        assert_eq!(
            format!("{g}"),
            "forall X. (forall pi in X. pi |> D) -> (exists p in X. x[p])"
        );
    }

    #[test]
    fn trace_only_sentences_pass_through() {
        let f = parse("forall p in D. exists p' in D. F (x[p] & X x[p'])");
        let g = cw_to_standard(&f).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn guard_variable_avoids_capture() {
        let f = parse("exists X. forall pi in X. x[pi]");
        let g = cw_to_standard(&f).unwrap();
        assert_eq!(
            format!("{g}"),
            "exists X. (forall pi_1 in X. pi_1 |> D) & (forall pi in X. x[pi])"
        );
    }

    #[test]
    fn rejects_ambient_and_guarded_quantifiers() {
        let f = parse("exists p in ALL. x[p]");
        assert!(matches!(cw_to_standard(&f), Err(ReductionError::AmbientPresent(_))));
        let f = parse("forall (X, min, exists p in X. x[p]). forall q in X. x[q]");
        assert!(matches!(cw_to_standard(&f), Err(ReductionError::Fragment(_))));
    }

    #[test]
    fn output_stays_linear_in_input() {
        for text in [
            "exists X. exists p in X. x[p]",
            "forall X. forall Y. (exists p in X. x[p]) | (exists q in Y. !x[q])",
            "exists X. (forall p in X. x[p]) & exists Y. forall q in Y. q |> X",
        ] {
            let f = parse(text);
            let g = cw_to_standard(&f).unwrap();
            assert!(g.node_count() <= 6 * f.node_count(), "{text}");
        }
    }

    // All lasso traces with stem <= 2 and loop <= 2 over {x}.
    fn lasso_space() -> Vec<crate::traces::LassoTrace> {
        ts_full(&alpha()).unwrap().enumerate_lassos(2, 2).iter().cloned().collect()
    }

    proptest! {
        // Truth is preserved from closed-world evaluation to standard
        // evaluation over every sampled ambient superset.
        #[test]
        fn translation_preserves_truth(
            model_picks in proptest::collection::vec(0usize..30, 0..3),
            extra_picks in proptest::collection::vec(0usize..30, 0..3),
            which in 0..4usize,
        ) {
            let space = lasso_space();
            let model = TraceSet::from_traces(
                alpha(),
                model_picks.iter().map(|&i| space[i % space.len()].clone()),
            )
            .unwrap();
            let mut ambient = model.clone();
            for &i in &extra_picks {
                ambient.insert(space[i % space.len()].clone()).unwrap();
            }
            let f = parse(match which {
                0 => "exists X. exists p in X. x[p]",
                1 => "forall X. (exists p in X. x[p]) | !(exists q in X. x[q])",
                2 => "exists X. forall p in D. p |> X",
                _ => "forall X. exists Y. forall p in X. p |> Y",
            });
            let g = cw_to_standard(&f).unwrap();
            let ev = Evaluator::default();
            let cw = ev.eval_closed_world(&f, &model).unwrap();
            let std = ev.eval_standard(&g, &ambient, &model).unwrap();
            prop_assert_eq!(cw, std);
        }
    }
}
