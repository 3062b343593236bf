//! Shape validation for least-fixed-point sentences.
//!
//! The fragment consists of sentences
//!
//! ```text
//! γ_1. Q_1(Y_1, min, con_1). γ_2. ... Q_k(Y_k, min, con_k). γ_{k+1}. ψ
//! ```
//!
//! where each `γ_j` is a (possibly empty) block of trace quantifiers, each
//! `Q_j` is `exists` or `forall`, and each guard `con_j` has the shape
//!
//! ```text
//! p_1 |> Y_j & ... & p_n |> Y_j &
//! forall q_1 in Z_1. ... forall q_n' in Z_n'. step -> q_m |> Y_j
//! ```
//!
//! with `n >= 0` seed atoms over previously quantified trace variables,
//! `n' >= 1`, ranges `Z_i` among the ambient set, the model set, and the
//! fixpoint variables `Y_1..Y_j` (the guarded variable itself included),
//! and a quantifier-free temporal step condition. Such a guard pins the
//! set down to a least fixed point, so the guarded quantifier has exactly
//! one candidate set and `exists`/`forall` agree.

use serde::{Deserialize, Serialize};

use crate::traces::{Alphabet, VAR_ALL, VAR_D};

use super::{Formula, FormulaNode, LogicError, LtlBody, Polarity, Quantifier};

/// One trace quantifier of a `γ` block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceQuant {
    pub exists: bool,
    pub var: String,
    pub range: String,
}

/// One guarded fixpoint quantifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LfpFixpoint {
    /// Whether `Q_j` is existential; both readings pick the same set.
    pub exists: bool,
    /// The fixpoint variable `Y_j`.
    pub var: String,
    /// Trace variables seeded into the set, in guard order.
    pub seeds: Vec<String>,
    /// The step rule's universal quantifiers `(q_i, Z_i)`, in order.
    pub step_quants: Vec<(String, String)>,
    /// The step condition.
    pub step_body: LtlBody,
    /// Index into `step_quants` of the variable added by the rule.
    pub target: usize,
}

/// Decomposed least-fixed-point sentence. `blocks` has one more entry
/// than `fixpoints`; block `j` precedes fixpoint `j`, the final block
/// precedes the matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LfpSentence {
    alphabet: Alphabet,
    blocks: Vec<Vec<TraceQuant>>,
    fixpoints: Vec<LfpFixpoint>,
    matrix: LtlBody,
}

impl LfpSentence {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Trace-quantifier blocks `γ_1 .. γ_{k+1}`.
    pub fn blocks(&self) -> &[Vec<TraceQuant>] {
        &self.blocks
    }

    /// Fixpoint quantifiers `Q_1(Y_1, ...) .. Q_k(Y_k, ...)`.
    pub fn fixpoints(&self) -> &[LfpFixpoint] {
        &self.fixpoints
    }

    pub fn matrix(&self) -> &LtlBody {
        &self.matrix
    }

    /// Number of fixpoint quantifiers.
    pub fn k(&self) -> usize {
        self.fixpoints.len()
    }

    /// Rebuilds the formula; inverse of [`validate_lfp_shape`].
    pub fn to_formula(&self) -> Formula {
        let mut node = FormulaNode::Body(self.matrix.clone());
        for j in (0..self.blocks.len()).rev() {
            if j < self.fixpoints.len() {
                let fp = &self.fixpoints[j];
                node = FormulaNode::Quant(
                    Quantifier::SetMM {
                        exists: fp.exists,
                        var: fp.var.clone(),
                        polarity: Polarity::Min,
                        guard: Box::new(guard_node(fp)),
                    },
                    Box::new(node),
                );
            }
            for tq in self.blocks[j].iter().rev() {
                node = FormulaNode::Quant(
                    Quantifier::Trace {
                        exists: tq.exists,
                        var: tq.var.clone(),
                        range: tq.range.clone(),
                    },
                    Box::new(node),
                );
            }
        }
        Formula { alphabet: self.alphabet.clone(), node }
    }
}

fn guard_node(fp: &LfpFixpoint) -> FormulaNode {
    let step_body = FormulaNode::Body(
        fp.step_body
            .clone()
            .implies(LtlBody::in_set(&fp.step_quants[fp.target].0, &fp.var)),
    );
    let step = FormulaNode::quantify(
        fp.step_quants.iter().map(|(v, z)| Quantifier::Trace {
            exists: false,
            var: v.clone(),
            range: z.clone(),
        }),
        step_body,
    );
    match LtlBody::and_all(fp.seeds.iter().map(|s| LtlBody::in_set(s, &fp.var))) {
        Some(seeds) => FormulaNode::Body(seeds).and(step),
        None => step,
    }
}

fn shape_err(msg: impl Into<String>) -> LogicError {
    LogicError::LfpShape(msg.into())
}

// Flattens an LtlBody conjunction chain.
fn body_conjuncts(b: &LtlBody) -> Vec<&LtlBody> {
    match b {
        LtlBody::And(a, b2) => {
            let mut v = body_conjuncts(a);
            v.extend(body_conjuncts(b2));
            v
        }
        other => vec![other],
    }
}

fn body_has_in_set(b: &LtlBody) -> bool {
    let mut sets = std::collections::BTreeSet::new();
    b.set_vars(&mut sets);
    !sets.is_empty()
}

fn parse_guard(
    guard: &FormulaNode,
    y_var: &str,
    trace_scope: &[String],
    set_scope: &[String],
) -> Result<LfpFixpoint, LogicError> {
    let conjs = guard.conjuncts();
    let (step_conj, seed_conjs) = conjs.split_last().expect("conjuncts is nonempty");

    let mut seeds = Vec::new();
    for c in seed_conjs {
        let FormulaNode::Body(b) = c else {
            return Err(shape_err(format!(
                "guard of {y_var} may hold quantifiers only in its final conjunct (the step rule)"
            )));
        };
        for leaf in body_conjuncts(b) {
            match leaf {
                LtlBody::InSet { var, set } if set == y_var => {
                    if !trace_scope.contains(var) {
                        return Err(shape_err(format!(
                            "seed variable {var} of {y_var} is not quantified earlier"
                        )));
                    }
                    seeds.push(var.clone());
                }
                other => {
                    return Err(shape_err(format!(
                        "guard conjunct of {y_var} must be a seed membership atom over {y_var}, found {other:?}"
                    )))
                }
            }
        }
    }

    // The final conjunct is the step rule: a nonempty chain of universal
    // trace quantifiers over `step -> q_m |> Y_j`.
    let mut step_quants: Vec<(String, String)> = Vec::new();
    let mut cur = *step_conj;
    loop {
        match cur {
            FormulaNode::Quant(Quantifier::Trace { exists, var, range }, scope) => {
                if *exists {
                    return Err(shape_err(format!(
                        "step rule of {y_var} must quantify universally, found exists {var}"
                    )));
                }
                let range_ok = range == VAR_ALL
                    || range == VAR_D
                    || set_scope.contains(range)
                    || range == y_var;
                if !range_ok {
                    return Err(shape_err(format!(
                        "step range {range} of {y_var} is not the ambient set, the model set, or an earlier fixpoint variable"
                    )));
                }
                if step_quants.iter().any(|(v, _)| v == var) {
                    return Err(shape_err(format!(
                        "step rule of {y_var} binds {var} twice"
                    )));
                }
                step_quants.push((var.clone(), range.clone()));
                cur = scope;
            }
            FormulaNode::Body(b) => {
                if step_quants.is_empty() {
                    return Err(shape_err(format!(
                        "guard of {y_var} has no step rule (a universally quantified implication)"
                    )));
                }
                let LtlBody::Implies(step_body, consequent) = b else {
                    return Err(shape_err(format!(
                        "step rule of {y_var} must end in an implication into a membership atom"
                    )));
                };
                let LtlBody::InSet { var, set } = &**consequent else {
                    return Err(shape_err(format!(
                        "step rule of {y_var} must conclude with a membership atom"
                    )));
                };
                if set != y_var {
                    return Err(shape_err(format!(
                        "step rule of {y_var} concludes into {set}, expected {y_var}"
                    )));
                }
                let Some(target) = step_quants.iter().position(|(v, _)| v == var) else {
                    return Err(shape_err(format!(
                        "step rule of {y_var} adds {var}, which the rule does not quantify"
                    )));
                };
                if body_has_in_set(step_body) {
                    return Err(shape_err(format!(
                        "step condition of {y_var} must be a temporal formula over trace variables, without membership atoms"
                    )));
                }
                let mut vars = std::collections::BTreeSet::new();
                step_body.trace_vars(&mut vars);
                for v in vars {
                    let known =
                        trace_scope.contains(&v) || step_quants.iter().any(|(q, _)| *q == v);
                    if !known {
                        return Err(shape_err(format!(
                            "step condition of {y_var} uses unquantified trace variable {v}"
                        )));
                    }
                }
                return Ok(LfpFixpoint {
                    exists: true,
                    var: y_var.to_string(),
                    seeds,
                    step_quants,
                    step_body: (**step_body).clone(),
                    target,
                });
            }
            other => {
                return Err(shape_err(format!(
                    "step rule of {y_var} must be a quantifier chain over an implication, found {other:?}"
                )))
            }
        }
    }
}

/// Checks that a formula lies in the least-fixed-point fragment and
/// decomposes it. Reports the first violated constraint otherwise.
pub fn validate_lfp_shape(f: &Formula) -> Result<LfpSentence, LogicError> {
    let mut blocks: Vec<Vec<TraceQuant>> = vec![Vec::new()];
    let mut fixpoints: Vec<LfpFixpoint> = Vec::new();
    let mut trace_scope: Vec<String> = Vec::new();
    let mut set_scope: Vec<String> = Vec::new();
    let mut cur = f.node();
    loop {
        match cur {
            FormulaNode::Quant(q, scope) => {
                match q {
                    Quantifier::Trace { exists, var, range } => {
                        let range_ok =
                            range == VAR_ALL || range == VAR_D || set_scope.contains(range);
                        if !range_ok {
                            return Err(shape_err(format!(
                                "trace quantifier over {var} ranges over {range}, which is not in scope"
                            )));
                        }
                        blocks.last_mut().expect("nonempty").push(TraceQuant {
                            exists: *exists,
                            var: var.clone(),
                            range: range.clone(),
                        });
                        trace_scope.push(var.clone());
                    }
                    Quantifier::SetMM { exists, var, polarity, guard } => {
                        if *polarity != Polarity::Min {
                            return Err(shape_err(format!(
                                "fixpoint quantifier {var} must use min polarity"
                            )));
                        }
                        let mut fp = parse_guard(guard, var, &trace_scope, &set_scope)?;
                        fp.exists = *exists;
                        fixpoints.push(fp);
                        set_scope.push(var.clone());
                        blocks.push(Vec::new());
                    }
                    Quantifier::Set { var, .. } => {
                        return Err(shape_err(format!(
                            "unguarded set quantifier over {var} is outside the fragment"
                        )));
                    }
                }
                cur = scope;
            }
            FormulaNode::Body(matrix) => {
                let mut vars = std::collections::BTreeSet::new();
                matrix.trace_vars(&mut vars);
                for v in vars {
                    if !trace_scope.contains(&v) {
                        return Err(shape_err(format!(
                            "matrix uses unquantified trace variable {v}"
                        )));
                    }
                }
                let mut sets = std::collections::BTreeSet::new();
                matrix.set_vars(&mut sets);
                for s in sets {
                    if s != VAR_ALL && s != VAR_D && !set_scope.contains(&s) {
                        return Err(shape_err(format!("matrix uses unknown set variable {s}")));
                    }
                }
                return Ok(LfpSentence {
                    alphabet: f.alphabet().clone(),
                    blocks,
                    fixpoints,
                    matrix: matrix.clone(),
                });
            }
            other => {
                return Err(shape_err(format!(
                    "sentence must be a quantifier chain over a quantifier-free matrix, found {other:?}"
                )))
            }
        }
    }
}
