//! Named stock artifacts: the formulas, trace sets, and transition
//! systems the translation passes assemble and the test suites probe.
//!
//! Set encodings used throughout: a trace encodes the set `A ⊆ ℕ` by
//! carrying `x` exactly at the positions in `A`, with one of the kind
//! flags `plus`, `minus`, or `s` held everywhere. A `plus`/`minus` trace
//! carries at most one `x` and stands for a single element (or, with no
//! `x`, for membership bookkeeping of the empty set); an `s` trace
//! carries an arbitrary `x` pattern and names a whole set.

use std::collections::BTreeSet;

use crate::logic::{fresh_name, Formula, FormulaNode, LfpFixpoint, LtlBody, Polarity, Quantifier};
use crate::traces::{Alphabet, LassoTrace, TraceSet, TransitionSystem, VAR_D};

use super::ReductionError;

/// The kind-flag/payload alphabet of the set-encoding artifacts.
pub fn ap_all_sets() -> Alphabet {
    Alphabet::new(["minus", "plus", "s", "x"]).unwrap()
}

/// The alphabet of arithmetic triple traces: operation flags `add` and
/// `mult`, position marks `arg1`, `arg2`, `res`.
pub fn ap_arith() -> Alphabet {
    Alphabet::new(["add", "arg1", "arg2", "mult", "res"]).unwrap()
}

fn tq(exists: bool, var: &str, range: &str) -> Quantifier {
    Quantifier::Trace { exists, var: var.into(), range: range.into() }
}

/// `!p U (p & X G !p)`: proposition `p` holds at exactly one position of
/// the trace bound to `v`.
pub fn unique_pos(p: &str, v: &str) -> LtlBody {
    LtlBody::atom(p, v)
        .not()
        .until(LtlBody::atom(p, v).and(LtlBody::atom(p, v).not().globally().next()))
}

/// Conjunction of three sentences over `{x}` whose only closed-world
/// model is the infinite family of single-spike traces: every trace
/// carries exactly one `x`, some trace spikes at the origin, and every
/// spike has a one-step-later successor spike in the model.
pub fn psi_example31() -> Formula {
    let x = |v: &str| LtlBody::atom("x", v);
    let psi1 = FormulaNode::quant(tq(false, "pi", VAR_D), FormulaNode::body(unique_pos("x", "pi")));
    let psi2 = FormulaNode::quant(tq(true, "pi", VAR_D), FormulaNode::body(x("pi")));
    let psi3 = FormulaNode::quantify(
        [tq(false, "pi", VAR_D), tq(true, "pi'", VAR_D)],
        FormulaNode::body(x("pi").and(x("pi'").next()).eventually()),
    );
    Formula::new(Alphabet::new(["x"]).unwrap(), psi1.and(psi2).and(psi3)).unwrap()
}

// The five conjuncts shared by the set-encoding sentences, over a given
// pool variable (the model set or a free stand-in).

// Every trace is of exactly one kind.
fn kinds_partition(pool: &str) -> FormulaNode {
    let kinds = ["plus", "minus", "s"];
    let arms = kinds.iter().map(|p| {
        let others = LtlBody::and_all(
            kinds.iter().filter(|q| q != &p).map(|q| LtlBody::atom(q, "pi").not()),
        )
        .unwrap();
        LtlBody::atom(p, "pi").and(others).globally()
    });
    FormulaNode::quant(
        tq(false, "pi", pool),
        FormulaNode::body(LtlBody::or_all(arms).unwrap()),
    )
}

fn plus_or_minus(v: &str) -> LtlBody {
    LtlBody::atom("plus", v).or(LtlBody::atom("minus", v))
}

// Element traces carry exactly one x (strict variant), or at most one
// (lenient variant, which admits the empty-set representative).
fn element_shape(pool: &str, allow_empty: bool) -> FormulaNode {
    let shape = if allow_empty {
        LtlBody::atom("x", "pi").not().globally().or(unique_pos("x", "pi"))
    } else {
        unique_pos("x", "pi")
    };
    FormulaNode::quant(
        tq(false, "pi", pool),
        FormulaNode::body(plus_or_minus("pi").implies(shape)),
    )
}

// Both polarities populate the origin (strict), or both the empty and
// the origin representatives exist (lenient).
fn origin_exists(pool: &str, allow_empty: bool) -> FormulaNode {
    FormulaNode::and_all(["plus", "minus"].iter().flat_map(|p| {
        let spike = FormulaNode::quant(
            tq(true, "pi", pool),
            FormulaNode::body(LtlBody::atom(p, "pi").and(LtlBody::atom("x", "pi"))),
        );
        let empty = allow_empty.then(|| {
            FormulaNode::quant(
                tq(true, "pi", pool),
                FormulaNode::body(
                    LtlBody::atom(p, "pi").and(LtlBody::atom("x", "pi").not().globally()),
                ),
            )
        });
        empty.into_iter().chain([spike])
    }))
    .unwrap()
}

// Every element trace has a successor-element trace of the same kind.
// The lenient variant only requires this of spiking traces.
fn successors_exist(pool: &str, spiking_only: bool) -> FormulaNode {
    FormulaNode::and_all(["plus", "minus"].iter().map(|p| {
        let ant = if spiking_only {
            LtlBody::atom(p, "pi").and(LtlBody::atom("x", "pi").eventually())
        } else {
            LtlBody::atom(p, "pi")
        };
        FormulaNode::quantify(
            [tq(false, "pi", pool), tq(true, "pi'", pool)],
            FormulaNode::body(ant.implies(LtlBody::atom(p, "pi'").and(
                LtlBody::atom("x", "pi").and(LtlBody::atom("x", "pi'").next()).eventually(),
            ))),
        )
    }))
    .unwrap()
}

// X holds element traces of the pool, and no plus member shares an x
// position with a minus member.
fn contradiction_free(pool: &str) -> FormulaNode {
    let membership = FormulaNode::quant(
        tq(false, "pi", "X"),
        FormulaNode::body(LtlBody::in_set("pi", pool).and(plus_or_minus("pi"))),
    );
    let no_clash = FormulaNode::quantify(
        [tq(false, "pi", "X"), tq(false, "pi'", "X")],
        FormulaNode::body(LtlBody::atom("plus", "pi").and(LtlBody::atom("minus", "pi'")).implies(
            LtlBody::atom("x", "pi").and(LtlBody::atom("x", "pi'")).eventually().not(),
        )),
    );
    membership.and(no_clash)
}

// X contains an origin spike and a one-later successor for every
// member: the sets satisfying this are unions of full polarity tails,
// so the minimal ones enumerate single polarities over all positions.
fn completeness() -> FormulaNode {
    let nonempty = FormulaNode::quant(
        tq(true, "pi", "X"),
        FormulaNode::body(LtlBody::atom("x", "pi").and(plus_or_minus("pi"))),
    );
    let successors = FormulaNode::quantify(
        [tq(false, "pi", "X"), tq(true, "pi'", "X")],
        FormulaNode::body(plus_or_minus("pi").implies(plus_or_minus("pi'").and(
            LtlBody::atom("x", "pi").and(LtlBody::atom("x", "pi'").next()).eventually(),
        ))),
    );
    nonempty.and(successors)
}

// Some s trace of the pool agrees with X: x wherever a plus member
// spikes, no x wherever a minus member spikes. The strict variant
// checks every member, the lenient one only spiking members.
fn set_representative(pool: &str, spiking_only: bool) -> FormulaNode {
    let guard = |p: &str| {
        let base = LtlBody::atom(p, "pi'''");
        if spiking_only {
            base.and(LtlBody::atom("x", "pi'''").eventually())
        } else {
            base
        }
    };
    let matrix = LtlBody::atom("s", "pi''")
        .and(guard("plus").implies(
            LtlBody::atom("x", "pi'''").and(LtlBody::atom("x", "pi''")).eventually(),
        ))
        .and(guard("minus").implies(
            LtlBody::atom("x", "pi'''").and(LtlBody::atom("x", "pi''").not()).eventually(),
        ));
    FormulaNode::quantify(
        [tq(true, "pi''", pool), tq(false, "pi'''", "X")],
        FormulaNode::body(matrix),
    )
}

/// The five conjuncts of [`phi_all_sets`], in order: kind partition,
/// single-spike elements, origin spikes of both polarities, successor
/// spikes of both polarities, and the second-order conjunct asserting
/// an `s` representative for every contradiction-free element set.
pub fn phi_all_sets_parts() -> [Formula; 5] {
    let alpha = ap_all_sets();
    let quantified = FormulaNode::quant(
        Quantifier::Set { exists: false, var: "X".into() },
        contradiction_free(VAR_D).implies(set_representative(VAR_D, false)),
    );
    [
        kinds_partition(VAR_D),
        element_shape(VAR_D, false),
        origin_exists(VAR_D, false),
        successors_exist(VAR_D, false),
        quantified,
    ]
    .map(|node| Formula::new(alpha.clone(), node).unwrap())
}

/// Sentence over [`ap_all_sets`] whose models encode, via `s` traces,
/// every subset of ℕ; its smallest models are uncountable.
pub fn phi_all_sets() -> Formula {
    let alpha = ap_all_sets();
    let node =
        FormulaNode::and_all(phi_all_sets_parts().map(Formula::into_node)).unwrap();
    Formula::new(alpha, node).unwrap()
}

fn phi_all_sets_minmax_node(polarity: Polarity) -> [FormulaNode; 5] {
    // Free pool variable Z: callers substitute their own set variable.
    let pool = "Z";
    let quantified = match polarity {
        Polarity::Max => FormulaNode::quant(
            Quantifier::SetMM {
                exists: false,
                var: "X".into(),
                polarity,
                guard: Box::new(contradiction_free(pool)),
            },
            set_representative(pool, true),
        ),
        Polarity::Min => FormulaNode::quant(
            Quantifier::SetMM {
                exists: false,
                var: "X".into(),
                polarity,
                guard: Box::new(completeness().and(contradiction_free(pool))),
            },
            set_representative(pool, false),
        ),
    };
    [
        kinds_partition(pool),
        element_shape(pool, true),
        origin_exists(pool, true),
        successors_exist(pool, true),
        quantified,
    ]
}

/// The five conjuncts of [`phi_all_sets_min`] / [`phi_all_sets_max`],
/// over the free pool variable `Z`.
pub fn phi_all_sets_minmax_parts(polarity: Polarity) -> [Formula; 5] {
    let alpha = ap_all_sets();
    phi_all_sets_minmax_node(polarity)
        .map(|node| Formula::new(alpha.clone(), node).unwrap())
}

/// Guarded-quantifier variant of [`phi_all_sets`] with minimality
/// guards, over the free pool variable `Z`. The guard additionally
/// demands completeness, so minimal guard models are the per-element
/// closures; empty-`x` element traces are admitted and exempt from the
/// successor obligations.
pub fn phi_all_sets_min() -> Formula {
    let node =
        FormulaNode::and_all(phi_all_sets_minmax_node(Polarity::Min)).unwrap();
    Formula::new(ap_all_sets(), node).unwrap()
}

/// Maximality twin of [`phi_all_sets_min`]: maximal contradiction-free
/// sets pick one polarity per position, so each names a subset of ℕ.
pub fn phi_all_sets_max() -> Formula {
    let node =
        FormulaNode::and_all(phi_all_sets_minmax_node(Polarity::Max)).unwrap();
    Formula::new(ap_all_sets(), node).unwrap()
}

/// Common knowledge of `goal` among agents with the given observation
/// sets: around every model trace there is an observation-closed model
/// subset on which `goal` holds everywhere.
pub fn phi_ck(observations: &[Vec<String>], goal: &str) -> Result<Formula, ReductionError> {
    if observations.is_empty() {
        return Err(ReductionError::InvalidParams("need at least one agent".into()));
    }
    let mut arms = Vec::new();
    for obs in observations {
        let arm = LtlBody::eq_on(obs.iter().map(String::as_str), "pi'", "pi''").ok_or_else(
            || ReductionError::InvalidParams("empty observation set".into()),
        )?;
        arms.push(arm);
    }
    let mut props: BTreeSet<&str> = observations.iter().flatten().map(String::as_str).collect();
    props.insert(goal);
    let alpha = Alphabet::new(props)?;
    let closed = FormulaNode::quantify(
        [tq(false, "pi'", "X"), tq(false, "pi''", VAR_D)],
        FormulaNode::body(
            LtlBody::or_all(arms).unwrap().implies(LtlBody::in_set("pi''", "X")),
        ),
    );
    let all_goal = FormulaNode::quant(
        tq(false, "pi'", "X"),
        FormulaNode::body(LtlBody::atom(goal, "pi'")),
    );
    let scope = FormulaNode::body(LtlBody::in_set("pi", "X")).and(closed).and(all_goal);
    let node = FormulaNode::quantify(
        [tq(false, "pi", VAR_D), Quantifier::Set { exists: true, var: "X".into() }],
        scope,
    );
    Ok(Formula::new(alpha, node)?)
}

/// Sentence over `{hash, x}` forcing the marked prefixes of its models
/// to cover every finite word over `2^{x}`: each trace carries one
/// `hash`, the empty word's trace exists, and every prefix extends by
/// both letters.
pub fn phi_prefs() -> Formula {
    let alpha = Alphabet::new(["hash", "x"]).unwrap();
    let unique = FormulaNode::quant(
        tq(false, "pi", VAR_D),
        FormulaNode::body(unique_pos("hash", "pi")),
    );
    let origin = FormulaNode::quant(
        tq(true, "pi", VAR_D),
        FormulaNode::body(LtlBody::atom("hash", "pi")),
    );
    let extend = |with_x: bool| {
        let letter = if with_x {
            LtlBody::atom("x", "pi'")
        } else {
            LtlBody::atom("x", "pi'").not()
        };
        FormulaNode::quantify(
            [tq(false, "pi", VAR_D), tq(true, "pi'", VAR_D)],
            FormulaNode::body(LtlBody::atom("x", "pi").iff(LtlBody::atom("x", "pi'")).until(
                LtlBody::atom("hash", "pi").and(letter).and(LtlBody::atom("hash", "pi'").next()),
            )),
        )
    };
    let node = unique.and(origin).and(extend(false)).and(extend(true));
    Formula::new(alpha, node).unwrap()
}

/// Two-kind spike components plus a free `s` component: the system
/// whose traces are exactly the set encodings over [`ap_all_sets`].
/// Eight vertices, twelve edges, six initial vertices.
pub fn ts_all_sets() -> TransitionSystem {
    let alpha = ap_all_sets();
    let bit = |p: &str| 1u64 << alpha.index_of(p).unwrap();
    let (m, p, s, x) = (bit("minus"), bit("plus"), bit("s"), bit("x"));
    // Vertices 0-2: plus spike (pre, spike, post); 3-5: minus twin;
    // 6-7: s component alternating freely between x and no-x.
    let labels = vec![p, x | p, p, m, x | m, m, x | s, s];
    let edges = [
        (0, 0),
        (0, 1),
        (1, 2),
        (2, 2),
        (3, 3),
        (3, 4),
        (4, 5),
        (5, 5),
        (6, 6),
        (6, 7),
        (7, 6),
        (7, 7),
    ];
    let initial = [0, 1, 3, 4, 6, 7];
    TransitionSystem::new(
        alpha,
        labels,
        edges.into_iter().collect(),
        initial.into_iter().collect(),
    )
    .unwrap()
}

/// Complete system over `ap`: one vertex per letter, all edges, all
/// initial. Its traces are all infinite words over the alphabet.
pub fn ts_full(ap: &Alphabet) -> Result<TransitionSystem, ReductionError> {
    if ap.len() > 10 {
        return Err(ReductionError::InvalidParams(format!(
            "complete system over {} propositions has {} vertices",
            ap.len(),
            (1u64 << ap.len().min(63)),
        )));
    }
    let count = 1usize << ap.len();
    let labels: Vec<u64> = (0..count as u64).collect();
    let edges = (0..count).flat_map(|i| (0..count).map(move |j| (i, j))).collect();
    let initial = (0..count).collect();
    Ok(TransitionSystem::new(ap.clone(), labels, edges, initial)?)
}

/// The marked trace for `n1 ∘ n2 = n3` (`op` is `add` or `mult`): the
/// operation flag holds everywhere, `arg1`/`arg2`/`res` mark positions
/// `n1`/`n2`/`n3`.
pub fn triple_trace(op: &str, n1: u64, n2: u64, n3: u64) -> Result<LassoTrace, ReductionError> {
    if op != "add" && op != "mult" {
        return Err(ReductionError::InvalidParams(format!("unknown operation {op}")));
    }
    let alpha = ap_arith();
    let bit = |p: &str| 1u64 << alpha.index_of(p).unwrap();
    let opb = bit(op);
    let stem: Vec<u64> = (0..=n1.max(n2).max(n3))
        .map(|i| {
            let mut letter = opb;
            if i == n1 {
                letter |= bit("arg1");
            }
            if i == n2 {
                letter |= bit("arg2");
            }
            if i == n3 {
                letter |= bit("res");
            }
            letter
        })
        .collect();
    Ok(LassoTrace::new(alpha, stem, vec![opb])?)
}

/// Every correct addition and multiplication triple with all three
/// numbers below `bound`, as marked traces.
pub fn plus_times(bound: u64) -> Result<TraceSet, ReductionError> {
    if bound == 0 || bound > 32 {
        return Err(ReductionError::InvalidParams(format!(
            "bound {bound} outside 1..=32"
        )));
    }
    let mut traces = Vec::new();
    for n1 in 0..bound {
        for n2 in 0..bound {
            if n1 + n2 < bound {
                traces.push(triple_trace("add", n1, n2, n1 + n2)?);
            }
            if n1 * n2 < bound {
                traces.push(triple_trace("mult", n1, n2, n1 * n2)?);
            }
        }
    }
    Ok(TraceSet::from_traces(ap_arith(), traces)?)
}

// G op & G !other & one arg1 & one arg2 & one res: a well-formed
// arithmetic triple trace, silent about non-arithmetic propositions.
fn triple_shape(op: &str, other: &str, v: &str) -> LtlBody {
    LtlBody::atom(op, v)
        .globally()
        .and(LtlBody::atom(other, v).not().globally())
        .and(unique_pos("arg1", v))
        .and(unique_pos("arg2", v))
        .and(unique_pos("res", v))
}

/// Least-fixed-point guard growing `set_var` from the two zero-triple
/// seeds into all correct triples present in the model: rules derive
/// `(n1+1) + n2` and `n1 + (n2+1)` from `n1 + n2`, derive
/// `n1 · (n2+1)` from `n1 · n2` by looking up the addition
/// `n3 + n1`, and derive `(n1+1) · 0` from `n1 · 0`.
pub fn arith_closure_guard(set_var: &str, seed_add: &str, seed_mult: &str) -> LfpFixpoint {
    let mut used: BTreeSet<String> =
        [set_var, seed_add, seed_mult].map(str::to_string).into();
    let q1 = fresh_name("q1", &mut used);
    let q2 = fresh_name("q2", &mut used);
    let q3 = fresh_name("q3", &mut used);
    let (q1, q2, q3) = (q1.as_str(), q2.as_str(), q3.as_str());
    let at = |p: &str, v: &str| LtlBody::atom(p, v);
    let same = |p: &str| at(p, q2).and(at(p, q1)).eventually();
    let shifted = |p: &str| at(p, q2).and(at(p, q1).next()).eventually();
    let add_left = triple_shape("add", "mult", q1)
        .and(at("add", q2).globally())
        .and(shifted("arg1"))
        .and(same("arg2"))
        .and(shifted("res"));
    let add_right = triple_shape("add", "mult", q1)
        .and(at("add", q2).globally())
        .and(same("arg1"))
        .and(shifted("arg2"))
        .and(shifted("res"));
    // q2 = n1 · n2, q3 = n3 + n1: the candidate is n1 · (n2+1) = n3+n1.
    let mult_step = triple_shape("mult", "add", q1)
        .and(at("mult", q2).globally())
        .and(at("add", q3).globally())
        .and(same("arg1"))
        .and(shifted("arg2"))
        .and(at("res", q2).and(at("arg1", q3)).eventually())
        .and(at("arg1", q2).and(at("arg2", q3)).eventually())
        .and(at("res", q3).and(at("res", q1)).eventually());
    // q2 = n1 · 0 = 0: the candidate is (n1+1) · 0 = 0.
    let mult_base = triple_shape("mult", "add", q1)
        .and(at("mult", q2).globally())
        .and(at("arg2", q2))
        .and(at("arg2", q1))
        .and(at("res", q2))
        .and(at("res", q1))
        .and(shifted("arg1"));
    LfpFixpoint {
        exists: true,
        var: set_var.to_string(),
        seeds: vec![seed_add.to_string(), seed_mult.to_string()],
        step_quants: vec![
            (q1.to_string(), VAR_D.to_string()),
            (q2.to_string(), set_var.to_string()),
            (q3.to_string(), set_var.to_string()),
        ],
        step_body: add_left.or(add_right).or(mult_step).or(mult_base),
        target: 0,
    }
}

/// Pins the two seed traces to the exact zero triples: `seed_add`
/// carries `add` everywhere with `arg1`, `arg2`, `res` exactly at the
/// origin, `seed_mult` the same with `mult`, and both are silent on
/// every other proposition of `alphabet`.
pub fn psi_seed(
    seed_add: &str,
    seed_mult: &str,
    alphabet: &Alphabet,
) -> Result<LtlBody, ReductionError> {
    if !ap_arith().is_subset_of(alphabet) {
        return Err(ReductionError::Alphabet(
            "seed formula needs the arithmetic propositions".into(),
        ));
    }
    let zero = |v: &str, op: &str, other: &str| {
        let origin = |p: &str| {
            LtlBody::atom(p, v).and(LtlBody::atom(p, v).not().globally().next())
        };
        let mut f = LtlBody::atom(op, v)
            .globally()
            .and(LtlBody::atom(other, v).not().globally())
            .and(origin("arg1"))
            .and(origin("arg2"))
            .and(origin("res"));
        for p in alphabet.props() {
            if !ap_arith().contains(p) {
                f = f.and(LtlBody::atom(p, v).not().globally());
            }
        }
        f
    };
    Ok(zero(seed_add, "add", "mult").and(zero(seed_mult, "mult", "add")))
}

/// A named artifact.
#[derive(Debug, Clone)]
pub enum LibraryItem {
    Formula(Formula),
    System(TransitionSystem),
    Traces(TraceSet),
}

/// Looks up a named artifact. `ts_full` takes proposition names,
/// `plus_times` takes a bound, `phi_ck` takes a goal proposition
/// followed by one comma-separated observation set per agent; the
/// remaining artifacts take no parameters.
pub fn library(name: &str, params: &[String]) -> Result<LibraryItem, ReductionError> {
    let bare = |item: LibraryItem| {
        if params.is_empty() {
            Ok(item)
        } else {
            Err(ReductionError::InvalidParams(format!("{name} takes no parameters")))
        }
    };
    match name {
        "psi_example31" => bare(LibraryItem::Formula(psi_example31())),
        "phi_allSets" => bare(LibraryItem::Formula(phi_all_sets())),
        "phi_allSets_max" => bare(LibraryItem::Formula(phi_all_sets_max())),
        "phi_allSets_min" => bare(LibraryItem::Formula(phi_all_sets_min())),
        "phi_Prefs" => bare(LibraryItem::Formula(phi_prefs())),
        "ts_allSets" => bare(LibraryItem::System(ts_all_sets())),
        "ts_full" => {
            if params.is_empty() {
                return Err(ReductionError::InvalidParams(
                    "ts_full needs proposition names".into(),
                ));
            }
            let alpha = Alphabet::new(params.iter().map(String::as_str))?;
            Ok(LibraryItem::System(ts_full(&alpha)?))
        }
        "plus_times" => {
            let [bound] = params else {
                return Err(ReductionError::InvalidParams(
                    "plus_times needs exactly one bound".into(),
                ));
            };
            let bound = bound.parse::<u64>().map_err(|e| {
                ReductionError::InvalidParams(format!("bad bound {bound}: {e}"))
            })?;
            Ok(LibraryItem::Traces(plus_times(bound)?))
        }
        "phi_ck" => {
            let Some((goal, groups)) = params.split_first() else {
                return Err(ReductionError::InvalidParams(
                    "phi_ck needs a goal and observation sets".into(),
                ));
            };
            let observations: Vec<Vec<String>> = groups
                .iter()
                .map(|g| g.split(',').map(str::to_string).collect())
                .collect();
            Ok(LibraryItem::Formula(phi_ck(&observations, goal)?))
        }
        other => Err(ReductionError::InvalidParams(format!("unknown artifact {other}"))),
    }
}
