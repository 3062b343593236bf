//! Renaming apart and prenexing.
//!
//! [`alpha_rename`] makes every bound variable distinct from all other
//! binders, from the free variables, and from the two distinguished set
//! names, renaming second occurrences to `name_1`, `name_2`, and so on. It
//! is idempotent and leaves guards intact apart from renaming.
//!
//! [`normalize_prenex`] turns a Boolean combination of quantified blocks
//! into one quantifier chain over a single body. Quantifiers are pulled in
//! textual order after renaming apart; negation dualizes the pulled
//! quantifiers (guarded quantifiers keep their guard and polarity);
//! implications, equivalences, and exclusive-ors whose operands contain
//! quantifiers are first rewritten with negation, conjunction, and
//! disjunction. The result is equivalent when every trace quantifier
//! ranges over a nonempty set. Over an empty range the laws used here can
//! fail: `(exists p in X. x[p]) | !(exists q in X. x[q])` holds when `X`
//! is empty, while its prenexed form starts with `exists p in X.` and does
//! not. Callers evaluating over universes with empty set bindings should
//! evaluate the original tree instead.

use std::collections::{BTreeMap, BTreeSet};

use crate::traces::{VAR_ALL, VAR_D};

use super::{fresh_name, Formula, FormulaNode, LtlBody, Quantifier};

fn rename_body(b: &LtlBody, env: &BTreeMap<String, String>) -> LtlBody {
    let map = |name: &str| env.get(name).cloned().unwrap_or_else(|| name.to_string());
    match b {
        LtlBody::Atom { prop, var } => LtlBody::Atom { prop: prop.clone(), var: map(var) },
        LtlBody::InSet { var, set } => LtlBody::InSet { var: map(var), set: map(set) },
        LtlBody::Not(a) => LtlBody::Not(Box::new(rename_body(a, env))),
        LtlBody::Next(a) => LtlBody::Next(Box::new(rename_body(a, env))),
        LtlBody::Eventually(a) => LtlBody::Eventually(Box::new(rename_body(a, env))),
        LtlBody::Globally(a) => LtlBody::Globally(Box::new(rename_body(a, env))),
        LtlBody::And(a, b2) => {
            LtlBody::And(Box::new(rename_body(a, env)), Box::new(rename_body(b2, env)))
        }
        LtlBody::Or(a, b2) => {
            LtlBody::Or(Box::new(rename_body(a, env)), Box::new(rename_body(b2, env)))
        }
        LtlBody::Implies(a, b2) => {
            LtlBody::Implies(Box::new(rename_body(a, env)), Box::new(rename_body(b2, env)))
        }
        LtlBody::Iff(a, b2) => {
            LtlBody::Iff(Box::new(rename_body(a, env)), Box::new(rename_body(b2, env)))
        }
        LtlBody::Xor(a, b2) => {
            LtlBody::Xor(Box::new(rename_body(a, env)), Box::new(rename_body(b2, env)))
        }
        LtlBody::Until(a, b2) => {
            LtlBody::Until(Box::new(rename_body(a, env)), Box::new(rename_body(b2, env)))
        }
    }
}

fn rename_node(
    n: &FormulaNode,
    env: &BTreeMap<String, String>,
    used: &mut BTreeSet<String>,
) -> FormulaNode {
    match n {
        FormulaNode::Body(b) => FormulaNode::Body(rename_body(b, env)),
        FormulaNode::Quant(q, scope) => {
            let name = fresh_name(q.var(), used);
            let mut inner = env.clone();
            inner.insert(q.var().to_string(), name.clone());
            let q2 = match q {
                Quantifier::Set { exists, .. } => Quantifier::Set { exists: *exists, var: name },
                Quantifier::SetMM { exists, polarity, guard, .. } => Quantifier::SetMM {
                    exists: *exists,
                    var: name,
                    polarity: *polarity,
                    guard: Box::new(rename_node(guard, &inner, used)),
                },
                Quantifier::Trace { exists, range, .. } => Quantifier::Trace {
                    exists: *exists,
                    var: name,
                    range: env.get(range).cloned().unwrap_or_else(|| range.clone()),
                },
            };
            FormulaNode::Quant(q2, Box::new(rename_node(scope, &inner, used)))
        }
        FormulaNode::Not(a) => FormulaNode::Not(Box::new(rename_node(a, env, used))),
        FormulaNode::And(a, b) => FormulaNode::And(
            Box::new(rename_node(a, env, used)),
            Box::new(rename_node(b, env, used)),
        ),
        FormulaNode::Or(a, b) => FormulaNode::Or(
            Box::new(rename_node(a, env, used)),
            Box::new(rename_node(b, env, used)),
        ),
        FormulaNode::Implies(a, b) => FormulaNode::Implies(
            Box::new(rename_node(a, env, used)),
            Box::new(rename_node(b, env, used)),
        ),
        FormulaNode::Iff(a, b) => FormulaNode::Iff(
            Box::new(rename_node(a, env, used)),
            Box::new(rename_node(b, env, used)),
        ),
        FormulaNode::Xor(a, b) => FormulaNode::Xor(
            Box::new(rename_node(a, env, used)),
            Box::new(rename_node(b, env, used)),
        ),
    }
}

/// Renames bound variables apart. Binders are visited in textual order;
/// a binder keeps its name unless an earlier binder, a free variable, or a
/// distinguished set name already claimed it.
pub fn alpha_rename(f: &Formula) -> Formula {
    let mut free_traces = BTreeSet::new();
    let mut free_sets = BTreeSet::new();
    f.node().free_vars(&mut free_traces, &mut free_sets);
    let mut used: BTreeSet<String> = free_traces;
    used.extend(free_sets);
    used.insert(VAR_ALL.to_string());
    used.insert(VAR_D.to_string());
    let node = rename_node(f.node(), &BTreeMap::new(), &mut used);
    Formula { alphabet: f.alphabet().clone(), node }
}

// Rewrites formula-level ->, <->, ^ into !, &, | wherever a quantifier
// occurs underneath, so that prenexing only meets And/Or/Not over chains.
fn eliminate_arrows(n: &FormulaNode) -> FormulaNode {
    match n {
        FormulaNode::Body(_) => n.clone(),
        FormulaNode::Quant(q, scope) => {
            FormulaNode::Quant(q.clone(), Box::new(eliminate_arrows(scope)))
        }
        FormulaNode::Not(a) => eliminate_arrows(a).not(),
        FormulaNode::And(a, b) => eliminate_arrows(a).and(eliminate_arrows(b)),
        FormulaNode::Or(a, b) => eliminate_arrows(a).or(eliminate_arrows(b)),
        FormulaNode::Implies(a, b) => {
            let (a, b) = (eliminate_arrows(a), eliminate_arrows(b));
            a.not().or(b)
        }
        FormulaNode::Iff(a, b) => {
            let (a, b) = (eliminate_arrows(a), eliminate_arrows(b));
            let fwd = a.clone().not().or(b.clone());
            let bwd = b.not().or(a);
            fwd.and(bwd)
        }
        FormulaNode::Xor(a, b) => {
            let (a, b) = (eliminate_arrows(a), eliminate_arrows(b));
            let fwd = a.clone().not().or(b.clone());
            let bwd = b.not().or(a);
            fwd.and(bwd).not()
        }
    }
}

// Returns the pulled prefix (outermost first) and the remaining body.
fn pull(n: &FormulaNode) -> (Vec<Quantifier>, LtlBody) {
    match n {
        FormulaNode::Body(b) => (Vec::new(), b.clone()),
        FormulaNode::Quant(q, scope) => {
            let (mut prefix, body) = pull(scope);
            prefix.insert(0, q.clone());
            (prefix, body)
        }
        FormulaNode::Not(a) => {
            let (prefix, body) = pull(a);
            (prefix.iter().map(Quantifier::dual).collect(), body.not())
        }
        FormulaNode::And(a, b) => {
            let (mut prefix, ba) = pull(a);
            let (pb, bb) = pull(b);
            prefix.extend(pb);
            (prefix, ba.and(bb))
        }
        FormulaNode::Or(a, b) => {
            let (mut prefix, ba) = pull(a);
            let (pb, bb) = pull(b);
            prefix.extend(pb);
            (prefix, ba.or(bb))
        }
        FormulaNode::Implies(_, _) | FormulaNode::Iff(_, _) | FormulaNode::Xor(_, _) => {
            unreachable!("eliminated before pulling")
        }
    }
}

/// Prenexes a Boolean combination of quantified blocks: renames apart,
/// rewrites arrows where quantifiers occur underneath, then pulls
/// quantifiers in textual order (dualizing under negation). See the module
/// notes for the nonempty-range precondition.
pub fn normalize_prenex(f: &Formula) -> Formula {
    let rewritten = Formula { alphabet: f.alphabet().clone(), node: eliminate_arrows(f.node()) };
    let renamed = alpha_rename(&rewritten);
    let (prefix, body) = pull(renamed.node());
    Formula {
        alphabet: f.alphabet().clone(),
        node: FormulaNode::quantify(prefix, FormulaNode::Body(body)),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_formula, printer::print_node};
    use super::*;
    use crate::traces::Alphabet;

    fn alpha() -> Alphabet {
        Alphabet::new(["x", "y"]).unwrap()
    }

    fn parse(text: &str) -> Formula {
        parse_formula(text, &alpha()).unwrap()
    }

    #[test]
    fn negated_universal_becomes_existential() {
        let f = parse("!(forall p in D. x[p])");
        let g = normalize_prenex(&f);
        assert_eq!(print_node(g.node()), "exists p in D. !x[p]");
    }

    #[test]
    fn conjunction_pulls_in_textual_order() {
        let f = parse("(exists p in D. x[p]) & (forall q in ALL. y[q])");
        let g = normalize_prenex(&f);
        assert_eq!(print_node(g.node()), "exists p in D. forall q in ALL. x[p] & y[q]");
    }

    #[test]
    fn implication_dualizes_the_antecedent() {
        let f = parse("(exists p in D. x[p]) -> exists q in D. y[q]");
        let g = normalize_prenex(&f);
        assert_eq!(print_node(g.node()), "forall p in D. exists q in D. !x[p] | y[q]");
    }

    #[test]
    fn clashing_binders_are_renamed_apart() {
        let f = parse("(exists p in D. x[p]) & (exists p in D. y[p])");
        let g = normalize_prenex(&f);
        assert_eq!(print_node(g.node()), "exists p in D. exists p_1 in D. x[p] & y[p_1]");
    }

    #[test]
    fn renaming_respects_range_references() {
        let f = parse("(exists X. exists p in X. x[p]) & (exists X. forall p in X. y[p])");
        let g = normalize_prenex(&f);
        assert_eq!(
            print_node(g.node()),
            "exists X. exists p in X. exists X_1. forall p_1 in X_1. x[p] & y[p_1]"
        );
    }

    #[test]
    fn guarded_quantifier_keeps_guard_and_polarity_under_negation() {
        let f = parse("!(exists (X, min, forall p in X. p |> D). exists q in X. x[q])");
        let g = normalize_prenex(&f);
        assert_eq!(
            print_node(g.node()),
            "forall (X, min, forall p in X. p |> D). forall q in X. !x[q]"
        );
    }

    #[test]
    fn iff_duplicates_quantifiers_with_fresh_names() {
        let f = parse("(exists p in D. x[p]) <-> exists q in D. y[q]");
        let g = normalize_prenex(&f);
        assert!(g.is_prenex());
        let (prefix, _) = g.node().prefix_and_body().unwrap();
        // Two copies of each side, renamed apart.
        assert_eq!(prefix.len(), 4);
        let names: BTreeSet<&str> = prefix.iter().map(|q| q.var()).collect();
        assert_eq!(names.len(), 4);
    }

    #[test]
    fn alpha_rename_is_idempotent() {
        let f = parse("(exists p in D. x[p]) & (exists p in D. exists X. forall q in X. y[p])");
        let once = alpha_rename(&f);
        let twice = alpha_rename(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn alpha_rename_avoids_free_variables() {
        // Free q must not be captured by renaming the second p.
        let f = parse("(exists p in D. x[p] & y[q]) & (exists p in D. x[p])");
        let g = alpha_rename(&f);
        let mut t = BTreeSet::new();
        let mut s = BTreeSet::new();
        g.node().free_vars(&mut t, &mut s);
        assert!(t.contains("q"));
        assert_eq!(print_node(g.node()), "(exists p in D. x[p] & y[q]) & (exists p_1 in D. x[p_1])");
    }

    #[test]
    fn alpha_rename_renames_guard_binders() {
        let f = parse(
            "exists (X, max, forall p in X. p |> D). exists p in X. x[p]",
        );
        let g = alpha_rename(&f);
        // The guard's p and the scope's p are different binders.
        let FormulaNode::Quant(Quantifier::SetMM { guard, .. }, scope) = g.node() else {
            panic!()
        };
        let FormulaNode::Quant(gq, _) = &**guard else { panic!() };
        let FormulaNode::Quant(sq, _) = &**scope else { panic!() };
        assert_ne!(gq.var(), sq.var());
    }

    #[test]
    fn prenex_leaves_prenex_input_unchanged() {
        let f = parse("exists X. forall p in X. exists q in D. x[p] -> y[q]");
        let g = normalize_prenex(&f);
        assert_eq!(f, g);
    }

    #[test]
    fn prenex_output_is_prenex_on_mixed_tree() {
        let f = parse(
            "((exists p in D. x[p]) | !(forall q in D. y[q])) -> exists (X, max, exists r in X. x[r]). forall s in X. y[s]",
        );
        let g = normalize_prenex(&f);
        assert!(g.is_prenex());
        let (prefix, _) = g.node().prefix_and_body().unwrap();
        // p flips once through ->; q flips at its own ! and again through
        // ->; then the guarded block and its scope quantifier.
        assert_eq!(prefix.len(), 4);
        assert!(!prefix[0].exists());
        assert!(!prefix[1].exists());
        assert!(matches!(prefix[2], Quantifier::SetMM { exists: true, .. }));
        assert!(!prefix[3].exists());
    }
}
