//! Brute-force truth evaluation over finite lasso-trace universes.
//!
//! Truth of the infinitary semantics is approximated by substituting a
//! finite trace set for the space of all traces: under
//! [`EvalMode::Standard`] the ambient variable is bound to an explicit
//! finite universe and plain set quantifiers range over its subsets, while
//! under [`EvalMode::ClosedWorld`] the ambient variable is forbidden and
//! set quantifiers range over subsets of the model set. Everything else is
//! exact: trace quantifiers enumerate members of the bound range (empty
//! ranges make `exists` false and `forall` true), and quantifier-free
//! bodies are decided by joint-lasso evaluation.
//!
//! Guarded min/max quantifiers are solved by [`Evaluator::compute_sol`]:
//! candidates are the subsets of the quantification pool that satisfy the
//! guard, filtered to the minimal (or maximal) ones under inclusion. The
//! result is an antichain, possibly empty, in sorted order.
//!
//! Work is bounded by [`EvalLimits`]; exceeding a limit reports
//! [`EvalError::CapExceeded`] instead of a truth value.

use std::cell::{Cell, RefCell};
use std::collections::BTreeMap;

use thiserror::Error;

use crate::logic::{Formula, FormulaNode, LtlBody, Polarity, Quantifier};
use crate::traces::{Assignment, LassoTrace, TraceSet, TransitionSystem, VAR_ALL, VAR_D};

mod body;

pub use body::eval_body;

/// Resource caps for set quantification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalLimits {
    /// Largest pool a set quantifier may take subsets of.
    pub max_set_universe: usize,
    /// Total quantifier instantiations across one evaluation.
    pub max_combos: u64,
}

impl Default for EvalLimits {
    fn default() -> Self {
        EvalLimits { max_set_universe: 20, max_combos: 1 << 20 }
    }
}

/// Which pool set quantifiers draw from, and whether the ambient set
/// variable is available.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Ambient variable bound to an explicit finite universe; set
    /// quantifiers range over subsets of that universe.
    Standard,
    /// Ambient variable forbidden; set quantifiers range over subsets of
    /// the model set.
    ClosedWorld,
}

/// Errors distinct from a `false` verdict.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("trace bound to {var} lacks proposition {prop}")]
    MissingProposition { var: String, prop: String },
    #[error("{0}")]
    Unsupported(String),
    #[error("resource cap exceeded: {0}")]
    CapExceeded(String),
}

type BodyKey = (usize, Vec<(String, LassoTrace)>, Vec<(String, TraceSet)>);

struct Ctx<'a> {
    /// Base set for plain and guarded set quantifiers.
    pool: &'a TraceSet,
    allow_mm: bool,
    limits: EvalLimits,
    budget: Cell<u64>,
    cache: RefCell<BTreeMap<BodyKey, bool>>,
    // Mentioned variables per body, keyed by node address (stable while
    // the formula is borrowed).
    body_vars: RefCell<BTreeMap<usize, (Vec<String>, Vec<String>)>>,
}

impl Ctx<'_> {
    fn charge(&self, what: &str) -> Result<(), EvalError> {
        let left = self.budget.get();
        if left == 0 {
            return Err(EvalError::CapExceeded(format!(
                "more than {} quantifier instantiations ({what})",
                self.limits.max_combos
            )));
        }
        self.budget.set(left - 1);
        Ok(())
    }
}

/// Brute-force evaluator with resource caps.
#[derive(Debug, Clone, Default)]
pub struct Evaluator {
    limits: EvalLimits,
}

impl Evaluator {
    pub fn new(limits: EvalLimits) -> Evaluator {
        Evaluator { limits }
    }

    pub fn limits(&self) -> EvalLimits {
        self.limits
    }

    /// Truth under standard semantics with the ambient variable bound to
    /// `universe`. Guarded min/max quantifiers are rejected here; use
    /// [`Evaluator::eval_mm`].
    pub fn eval_standard(
        &self,
        f: &Formula,
        universe: &TraceSet,
        model: &TraceSet,
    ) -> Result<bool, EvalError> {
        self.eval_entry(f, Some(universe), model, EvalMode::Standard, false)
    }

    /// Truth under closed-world semantics: the ambient variable is
    /// rejected and set quantifiers range over subsets of the model.
    /// Guarded min/max quantifiers are rejected here.
    pub fn eval_closed_world(&self, f: &Formula, model: &TraceSet) -> Result<bool, EvalError> {
        self.eval_entry(f, None, model, EvalMode::ClosedWorld, false)
    }

    /// Truth with guarded min/max quantifiers allowed, under either mode.
    /// In standard mode `universe` is the ambient binding; in closed-world
    /// mode it is ignored and may equal the model.
    pub fn eval_mm(
        &self,
        f: &Formula,
        universe: &TraceSet,
        model: &TraceSet,
        mode: EvalMode,
    ) -> Result<bool, EvalError> {
        let uni = match mode {
            EvalMode::Standard => Some(universe),
            EvalMode::ClosedWorld => None,
        };
        self.eval_entry(f, uni, model, mode, true)
    }

    /// Truth of a formula whose free variables are pre-bound by `asg`,
    /// including the distinguished and ambient variables when used.
    /// Set quantifiers draw subsets from `pool`; guarded min/max
    /// quantifiers are allowed.
    pub fn eval_with_assignment(
        &self,
        f: &Formula,
        asg: &Assignment,
        pool: &TraceSet,
    ) -> Result<bool, EvalError> {
        let report = f.check_sentence(true);
        for v in report
            .free_trace_vars
            .iter()
            .filter(|v| asg.trace(v).is_none())
        {
            return Err(EvalError::UnboundVariable(v.clone()));
        }
        for v in report.free_set_vars.iter().filter(|v| asg.set(v).is_none()) {
            return Err(EvalError::UnboundVariable(v.clone()));
        }
        if report.uses_all && asg.set(VAR_ALL).is_none() {
            return Err(EvalError::UnboundVariable(VAR_ALL.into()));
        }
        if report.uses_d && asg.set(VAR_D).is_none() {
            return Err(EvalError::UnboundVariable(VAR_D.into()));
        }
        let ctx = Ctx {
            pool,
            allow_mm: true,
            limits: self.limits,
            budget: Cell::new(self.limits.max_combos),
            cache: RefCell::new(BTreeMap::new()),
            body_vars: RefCell::new(BTreeMap::new()),
        };
        self.eval_node(f.node(), asg, &ctx)
    }

    /// The solution antichain of the outermost quantifier of `f`, which
    /// must be a guarded min/max quantifier: all pool subsets satisfying
    /// the guard, restricted to the minimal (respectively maximal) ones,
    /// in ascending order.
    pub fn compute_sol(
        &self,
        f: &Formula,
        universe: &TraceSet,
        model: &TraceSet,
        mode: EvalMode,
    ) -> Result<Vec<TraceSet>, EvalError> {
        let FormulaNode::Quant(Quantifier::SetMM { var, polarity, guard, .. }, _) = f.node()
        else {
            return Err(EvalError::Unsupported(
                "compute_sol needs a formula starting with a guarded min/max quantifier".into(),
            ));
        };
        let (asg, ctx) = self.root(f, universe, model, mode, true)?;
        self.solve_mm(var, *polarity, guard, &asg, &ctx)
    }

    /// Bounded model check: the model is the lasso enumeration of `ts` up
    /// to the given stem and loop bounds. In standard mode the enumeration
    /// also serves as the ambient universe, which is exact for sentences
    /// that do not mention the ambient variable and an approximation
    /// otherwise.
    pub fn model_check_bounded(
        &self,
        f: &Formula,
        ts: &TransitionSystem,
        stem_bound: usize,
        loop_bound: usize,
        mode: EvalMode,
    ) -> Result<bool, EvalError> {
        let model = ts.enumerate_lassos(stem_bound, loop_bound);
        let uni = match mode {
            EvalMode::Standard => Some(&model),
            EvalMode::ClosedWorld => None,
        };
        self.eval_entry(f, uni, &model, mode, true)
    }

    fn root<'a>(
        &self,
        f: &Formula,
        universe: &'a TraceSet,
        model: &'a TraceSet,
        mode: EvalMode,
        allow_mm: bool,
    ) -> Result<(Assignment, Ctx<'a>), EvalError> {
        let report = f.check_sentence(true);
        if let Some(v) = report.free_trace_vars.first() {
            return Err(EvalError::UnboundVariable(v.clone()));
        }
        if let Some(v) = report.free_set_vars.first() {
            return Err(EvalError::UnboundVariable(v.clone()));
        }
        if report.uses_all && mode == EvalMode::ClosedWorld {
            return Err(EvalError::Unsupported(format!(
                "{VAR_ALL} is not available under closed-world semantics"
            )));
        }
        let mut asg = Assignment::new().with_set(VAR_D, model.clone());
        if mode == EvalMode::Standard {
            asg.bind_set(VAR_ALL, universe.clone());
        }
        let pool = match mode {
            EvalMode::Standard => universe,
            EvalMode::ClosedWorld => model,
        };
        let ctx = Ctx {
            pool,
            allow_mm,
            limits: self.limits,
            budget: Cell::new(self.limits.max_combos),
            cache: RefCell::new(BTreeMap::new()),
            body_vars: RefCell::new(BTreeMap::new()),
        };
        Ok((asg, ctx))
    }

    fn eval_entry(
        &self,
        f: &Formula,
        universe: Option<&TraceSet>,
        model: &TraceSet,
        mode: EvalMode,
        allow_mm: bool,
    ) -> Result<bool, EvalError> {
        let fallback;
        let uni = match universe {
            Some(u) => u,
            None => {
                fallback = model.clone();
                &fallback
            }
        };
        let (asg, ctx) = self.root(f, uni, model, mode, allow_mm)?;
        self.eval_node(f.node(), &asg, &ctx)
    }

    fn eval_node(&self, n: &FormulaNode, asg: &Assignment, ctx: &Ctx) -> Result<bool, EvalError> {
        match n {
            FormulaNode::Body(b) => self.eval_cached(b, asg, ctx),
            FormulaNode::Not(a) => Ok(!self.eval_node(a, asg, ctx)?),
            FormulaNode::And(a, b) => {
                Ok(self.eval_node(a, asg, ctx)? && self.eval_node(b, asg, ctx)?)
            }
            FormulaNode::Or(a, b) => {
                Ok(self.eval_node(a, asg, ctx)? || self.eval_node(b, asg, ctx)?)
            }
            FormulaNode::Implies(a, b) => {
                Ok(!self.eval_node(a, asg, ctx)? || self.eval_node(b, asg, ctx)?)
            }
            FormulaNode::Iff(a, b) => {
                Ok(self.eval_node(a, asg, ctx)? == self.eval_node(b, asg, ctx)?)
            }
            FormulaNode::Xor(a, b) => {
                Ok(self.eval_node(a, asg, ctx)? != self.eval_node(b, asg, ctx)?)
            }
            FormulaNode::Quant(Quantifier::Trace { exists, var, range }, scope) => {
                let pool = asg
                    .set(range)
                    .ok_or_else(|| EvalError::UnboundVariable(range.clone()))?
                    .clone();
                for t in pool.iter() {
                    ctx.charge(var)?;
                    let mut inner = asg.clone();
                    inner.bind_trace(var, t.clone());
                    let v = self.eval_node(scope, &inner, ctx)?;
                    if v == *exists {
                        return Ok(*exists);
                    }
                }
                Ok(!exists)
            }
            FormulaNode::Quant(Quantifier::Set { exists, var }, scope) => {
                self.check_pool(ctx)?;
                for subset in ctx.pool.subsets() {
                    ctx.charge(var)?;
                    let mut inner = asg.clone();
                    inner.bind_set(var, subset);
                    let v = self.eval_node(scope, &inner, ctx)?;
                    if v == *exists {
                        return Ok(*exists);
                    }
                }
                Ok(!exists)
            }
            FormulaNode::Quant(Quantifier::SetMM { exists, var, polarity, guard }, scope) => {
                if !ctx.allow_mm {
                    return Err(EvalError::Unsupported(format!(
                        "guarded min/max quantifier over {var} needs min/max evaluation"
                    )));
                }
                let sol = self.solve_mm(var, *polarity, guard, asg, ctx)?;
                for t in sol {
                    ctx.charge(var)?;
                    let mut inner = asg.clone();
                    inner.bind_set(var, t);
                    let v = self.eval_node(scope, &inner, ctx)?;
                    if v == *exists {
                        return Ok(*exists);
                    }
                }
                Ok(!exists)
            }
        }
    }

    fn check_pool(&self, ctx: &Ctx) -> Result<(), EvalError> {
        if ctx.pool.len() > self.limits.max_set_universe {
            return Err(EvalError::CapExceeded(format!(
                "set quantification over {} traces (cap {})",
                ctx.pool.len(),
                self.limits.max_set_universe
            )));
        }
        Ok(())
    }

    fn solve_mm(
        &self,
        var: &str,
        polarity: Polarity,
        guard: &FormulaNode,
        asg: &Assignment,
        ctx: &Ctx,
    ) -> Result<Vec<TraceSet>, EvalError> {
        self.check_pool(ctx)?;
        let mut candidates = Vec::new();
        for subset in ctx.pool.subsets() {
            ctx.charge(var)?;
            let mut inner = asg.clone();
            inner.bind_set(var, subset.clone());
            if self.eval_node(guard, &inner, ctx)? {
                candidates.push(subset);
            }
        }
        let keep = |t: &TraceSet, other: &TraceSet| match polarity {
            // Minimal: drop T when some candidate is strictly below it.
            Polarity::Min => !(other.is_subset_of(t) && other != t),
            Polarity::Max => !(t.is_subset_of(other) && other != t),
        };
        let mut sol: Vec<TraceSet> = candidates
            .iter()
            .filter(|t| candidates.iter().all(|o| keep(t, o)))
            .cloned()
            .collect();
        sol.sort();
        Ok(sol)
    }

    fn eval_cached(&self, b: &LtlBody, asg: &Assignment, ctx: &Ctx) -> Result<bool, EvalError> {
        let id = b as *const LtlBody as usize;
        let (tvars, svars) = {
            let mut map = ctx.body_vars.borrow_mut();
            map.entry(id)
                .or_insert_with(|| {
                    let mut t = std::collections::BTreeSet::new();
                    let mut s = std::collections::BTreeSet::new();
                    b.trace_vars(&mut t);
                    b.set_vars(&mut s);
                    (t.into_iter().collect(), s.into_iter().collect())
                })
                .clone()
        };
        // Key on the restriction of the assignment to mentioned variables,
        // so unrelated rebindings share cache entries.
        let mut key: BodyKey = (id, Vec::new(), Vec::new());
        for v in &tvars {
            let t = asg
                .trace(v)
                .ok_or_else(|| EvalError::UnboundVariable(v.clone()))?;
            key.1.push((v.clone(), t.clone()));
        }
        for v in &svars {
            let s = asg
                .set(v)
                .ok_or_else(|| EvalError::UnboundVariable(v.clone()))?;
            key.2.push((v.clone(), s.clone()));
        }
        if let Some(&v) = ctx.cache.borrow().get(&key) {
            return Ok(v);
        }
        let v = eval_body(b, asg)?;
        ctx.cache.borrow_mut().insert(key, v);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use crate::traces::Alphabet;
    use proptest::prelude::*;

    fn alpha() -> Alphabet {
        Alphabet::new(["x"]).unwrap()
    }

    // {} {} ... {} {x} {}^w with x at position n.
    fn spike(n: usize) -> LassoTrace {
        let mut stem = vec![0u64; n];
        stem.push(1);
        LassoTrace::new(alpha(), stem, vec![0]).unwrap()
    }

    fn spikes(n: usize) -> TraceSet {
        TraceSet::from_traces(alpha(), (0..n).map(spike)).unwrap()
    }

    fn parse(text: &str) -> Formula {
        parse_formula(text, &alpha()).unwrap()
    }

    fn ev() -> Evaluator {
        Evaluator::default()
    }

    #[test]
    fn spike_family_example_verdicts() {
        // Every trace carries exactly one x; some trace carries an x; some
        // trace's spike has no successor spike within the finite family.
        let psi1 = parse("forall p in D. !x[p] U (x[p] & X G !x[p])");
        let psi2 = parse("exists p in D. x[p]");
        let psi3 = parse("forall p in D. exists p' in D. F (x[p] & X x[p'])");
        let model = spikes(3);
        assert!(ev().eval_closed_world(&psi1, &model).unwrap());
        assert!(ev().eval_closed_world(&psi2, &model).unwrap());
        assert!(!ev().eval_closed_world(&psi3, &model).unwrap());
        // psi3 becomes true when the universe supplies the missing spikes.
        let uni = spikes(9);
        assert!(ev()
            .eval_standard(&parse("forall p in D. exists p' in ALL. F (x[p] & X x[p'])"), &uni, &spikes(3))
            .unwrap());
    }

    #[test]
    fn empty_range_vacuity() {
        let none = TraceSet::new(alpha());
        assert!(!ev().eval_closed_world(&parse("exists p in D. x[p]"), &none).unwrap());
        assert!(ev().eval_closed_world(&parse("forall p in D. x[p]"), &none).unwrap());
    }

    #[test]
    fn set_quantifier_ranges_over_subsets() {
        let model = spikes(2);
        // Some subset holds exactly the traces whose x is at position 0;
        // the empty subset makes the universal part vacuous, so the
        // existential conjunct is what bites.
        let f = parse("exists X. (forall p in X. x[p]) & exists p in X. x[p]");
        assert!(ev().eval_closed_world(&f, &model).unwrap());
        let g = parse("forall X. exists p in X. x[p]");
        // Fails on the empty subset.
        assert!(!ev().eval_closed_world(&g, &model).unwrap());
    }

    #[test]
    fn closed_world_rejects_ambient() {
        let f = parse("forall p in ALL. x[p]");
        let err = ev().eval_closed_world(&f, &spikes(1)).unwrap_err();
        assert!(matches!(err, EvalError::Unsupported(_)));
    }

    #[test]
    fn plain_eval_rejects_guarded_quantifiers() {
        let f = parse("exists (X, min, exists p in X. x[p]). exists q in X. x[q]");
        let err = ev().eval_closed_world(&f, &spikes(2)).unwrap_err();
        assert!(matches!(err, EvalError::Unsupported(_)));
        let err = ev().eval_standard(&f, &spikes(2), &spikes(2)).unwrap_err();
        assert!(matches!(err, EvalError::Unsupported(_)));
    }

    #[test]
    fn sol_is_a_sorted_antichain_of_minimal_models() {
        // Guard: X holds a trace with x at 0. Minimal candidates are the
        // singletons of such traces.
        let f = parse("exists (X, min, exists p in X. x[p]). exists q in X. x[q]");
        let model = spikes(3);
        let sol = ev().compute_sol(&f, &model, &model, EvalMode::ClosedWorld).unwrap();
        // Every spike satisfies "x somewhere" ... but the guard tests x at
        // position 0, which only spike(0) satisfies.
        assert_eq!(sol.len(), 1);
        assert_eq!(sol[0].len(), 1);
        assert!(sol[0].contains(&spike(0)));
        assert!(ev().eval_mm(&f, &model, &model, EvalMode::ClosedWorld).unwrap());
    }

    #[test]
    fn sol_max_picks_maximal_candidates() {
        // Guard satisfied by any subset (vacuous universal), so the unique
        // maximal candidate is the whole pool.
        let f = parse("exists (X, max, forall p in X. F x[p]). forall q in X. F x[q]");
        let model = spikes(3);
        let sol = ev().compute_sol(&f, &model, &model, EvalMode::ClosedWorld).unwrap();
        assert_eq!(sol.len(), 1);
        assert_eq!(sol[0], model);
    }

    #[test]
    fn sol_can_be_empty_and_guarded_quantifiers_are_then_vacuous() {
        // Unsatisfiable guard: a trace both with and without x at 0.
        let f = parse("exists (X, min, exists p in X. x[p] & !x[p]). exists q in X. x[q]");
        let model = spikes(2);
        let sol = ev().compute_sol(&f, &model, &model, EvalMode::ClosedWorld).unwrap();
        assert!(sol.is_empty());
        assert!(!ev().eval_mm(&f, &model, &model, EvalMode::ClosedWorld).unwrap());
        let g = parse("forall (X, min, exists p in X. x[p] & !x[p]). exists q in X. x[q]");
        assert!(ev().eval_mm(&g, &model, &model, EvalMode::ClosedWorld).unwrap());
    }

    #[test]
    fn sol_antichain_with_multiple_members() {
        // Guard: X holds some trace whose x is at position 0 or 1; minimal
        // models are the two singletons.
        let f = parse("exists (X, min, exists p in X. x[p] | X x[p]). exists q in X. F x[q]");
        let model = spikes(3);
        let sol = ev().compute_sol(&f, &model, &model, EvalMode::ClosedWorld).unwrap();
        assert_eq!(sol.len(), 2);
        assert!(sol.iter().all(|s| s.len() == 1));
        for (a, b) in sol.iter().zip(sol.iter().skip(1)) {
            assert!(a < b, "sol must be sorted");
        }
    }

    #[test]
    fn mm_under_standard_mode_uses_universe_pool() {
        let f = parse("exists (X, min, exists p in X. x[p]). exists q in X. q |> D");
        let model = spikes(1);
        // spike(0) is in the model, so the minimal witness set lies inside D.
        assert!(ev().eval_mm(&f, &spikes(3), &model, EvalMode::Standard).unwrap());
        // With a universe whose only x-at-0 trace is outside the model, the
        // witness trace is not in D.
        let uni = TraceSet::from_traces(alpha(), [spike(0), spike(1)]).unwrap();
        let small_model = spikes(0).union(&TraceSet::from_traces(alpha(), [spike(1)]).unwrap()).unwrap();
        assert!(!ev().eval_mm(&f, &uni, &small_model, EvalMode::Standard).unwrap());
    }

    #[test]
    fn cap_on_pool_size_is_reported() {
        let limits = EvalLimits { max_set_universe: 2, max_combos: 1 << 20 };
        let f = parse("exists X. exists p in X. x[p]");
        let model = spikes(3);
        let err = Evaluator::new(limits).eval_closed_world(&f, &model).unwrap_err();
        assert!(matches!(err, EvalError::CapExceeded(_)));
    }

    #[test]
    fn combo_budget_is_reported() {
        let limits = EvalLimits { max_set_universe: 20, max_combos: 10 };
        let f = parse("forall X. forall Y. forall p in D. x[p] | !x[p]");
        let model = spikes(2);
        let err = Evaluator::new(limits).eval_closed_world(&f, &model).unwrap_err();
        assert!(matches!(err, EvalError::CapExceeded(_)));
    }

    #[test]
    fn unbound_free_variable_is_reported_up_front() {
        let f = parse("exists p in W. x[p]");
        let err = ev().eval_closed_world(&f, &spikes(1)).unwrap_err();
        assert!(matches!(err, EvalError::UnboundVariable(v) if v == "W"));
    }

    #[test]
    fn assignment_entry_accepts_open_formulas() {
        // Some trace in W spikes right before q does.
        let f = parse("exists p in W. F (x[p] & X x[q])");
        let asg = Assignment::new()
            .with_set("W", spikes(3))
            .with_trace("q", spike(1));
        assert!(ev().eval_with_assignment(&f, &asg, &spikes(1)).unwrap());
        let asg2 = Assignment::new().with_set("W", spikes(3)).with_trace("q", spike(5));
        assert!(!ev().eval_with_assignment(&f, &asg2, &spikes(1)).unwrap());
        let missing = Assignment::new().with_set("W", spikes(3));
        let err = ev().eval_with_assignment(&f, &missing, &spikes(1)).unwrap_err();
        assert!(matches!(err, EvalError::UnboundVariable(v) if v == "q"));
    }

    #[test]
    fn prenexing_is_unsound_on_empty_ranges() {
        use crate::logic::normalize_prenex;
        // Tautology: every subset either holds an x-at-0 trace or does not.
        let f = parse("forall X. (exists p in X. x[p]) | !(exists q in X. x[q])");
        let model = spikes(2);
        assert!(ev().eval_closed_world(&f, &model).unwrap());
        // Prenexing pulls `exists p in X` leftmost; the empty subset then
        // falsifies the sentence. This is the documented precondition.
        let g = normalize_prenex(&f);
        assert!(!ev().eval_closed_world(&g, &model).unwrap());
    }

    #[test]
    fn model_check_bounded_enumerates_the_system() {
        use crate::traces::text::parse_transition_system;
        // Two vertices: one with x looping to one without, both initial.
        let ts = parse_transition_system(
            "aps: x\nvertex 0 init {x}\nvertex 1 init {}\nedge 0 1\nedge 1 1\n",
        )
        .unwrap();
        let f = parse("exists p in D. x[p] & X G !x[p]");
        assert!(ev().model_check_bounded(&f, &ts, 2, 2, EvalMode::ClosedWorld).unwrap());
        let g = parse("forall p in D. F x[p]");
        assert!(!ev().model_check_bounded(&g, &ts, 2, 2, EvalMode::ClosedWorld).unwrap());
    }

    // Random sentence generator over the ambient-free fragment: trace
    // quantifiers over D or set variables, one optional set quantifier.
    fn arb_cw_sentence() -> impl Strategy<Value = Formula> {
        let body = |vars: Vec<String>| {
            // Small LTL bodies over the quantified variables.
            let atom = (0..vars.len(), prop_oneof![Just(0u8), Just(1), Just(2)]).prop_map(
                move |(vi, shape)| {
                    let a = LtlBody::atom("x", &vars[vi]);
                    match shape {
                        0 => a,
                        1 => a.next(),
                        _ => a.eventually(),
                    }
                },
            );
            atom.prop_recursive(2, 8, 2, |inner| {
                prop_oneof![
                    inner.clone().prop_map(|a| a.not()),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
                    (inner.clone(), inner).prop_map(|(a, b)| a.or(b)),
                ]
            })
        };
        (proptest::bool::ANY, proptest::bool::ANY, proptest::bool::ANY).prop_flat_map(
            move |(use_set, e1, e2)| {
                let vars = vec!["p".to_string(), "q".to_string()];
                body(vars).prop_map(move |b| {
                    let inner = FormulaNode::quantify(
                        [
                            Quantifier::Trace {
                                exists: e1,
                                var: "p".into(),
                                range: if use_set { "X".into() } else { VAR_D.to_string() },
                            },
                            Quantifier::Trace { exists: e2, var: "q".into(), range: VAR_D.into() },
                        ],
                        FormulaNode::Body(b.clone()),
                    );
                    let node = if use_set {
                        FormulaNode::Quant(
                            Quantifier::Set { exists: true, var: "X".into() },
                            Box::new(inner),
                        )
                    } else {
                        inner
                    };
                    Formula::new(Alphabet::new(["x"]).unwrap(), node).unwrap()
                })
            },
        )
    }

    fn arb_small_model() -> impl Strategy<Value = TraceSet> {
        proptest::collection::vec(
            (
                proptest::collection::vec(0u64..2, 0..=2),
                proptest::collection::vec(0u64..2, 1..=2),
            ),
            0..=3,
        )
        .prop_map(|traces| {
            TraceSet::from_traces(
                Alphabet::new(["x"]).unwrap(),
                traces
                    .into_iter()
                    .map(|(s, l)| LassoTrace::new(Alphabet::new(["x"]).unwrap(), s, l).unwrap()),
            )
            .unwrap()
        })
    }

    proptest! {
        // For ambient-free sentences, standard semantics with the model as
        // universe coincides with closed-world semantics.
        #[test]
        fn ambient_free_standard_equals_closed_world(
            f in arb_cw_sentence(),
            model in arb_small_model(),
        ) {
            let std = ev().eval_standard(&f, &model, &model).unwrap();
            let cw = ev().eval_closed_world(&f, &model).unwrap();
            prop_assert_eq!(std, cw);
        }
    }
}
