//! Quantifier-free evaluation over bound lasso traces.
//!
//! All trace variables mentioned by the body are bound to lasso traces; a
//! joint lasso with stem `S` (the longest stem) and period `P` (the least
//! common multiple of the loop lengths) covers every distinct tuple of
//! positions, so truth values are computed on `0..S+P` with the successor
//! of the last position wrapping to `S`. `U` is solved by two backward
//! sweeps over the loop (values start false and grow monotonically toward
//! the least solution, and a witness never needs more than one wrap),
//! then one backward pass over the stem. Membership atoms are constant in
//! the position.

use crate::traces::{lcm, Assignment, LassoTrace};

use crate::logic::LtlBody;

use super::EvalError;

struct BodyCtx<'a> {
    asg: &'a Assignment,
    /// Total positions `S + P`.
    n: usize,
    /// Stem length; position `n - 1` wraps to here.
    s: usize,
}

impl<'a> BodyCtx<'a> {
    fn trace(&self, var: &str) -> Result<&'a LassoTrace, EvalError> {
        self.asg
            .trace(var)
            .ok_or_else(|| EvalError::UnboundVariable(var.to_string()))
    }

    fn constant(&self, v: bool) -> Vec<bool> {
        vec![v; self.n]
    }

    // Least solution of val[i] = b[i] | (a[i] & val[succ i]).
    fn solve_until(&self, a: &[bool], b: &[bool]) -> Vec<bool> {
        let (n, s) = (self.n, self.s);
        let mut val = vec![false; n];
        for _ in 0..2 {
            for i in (s..n).rev() {
                let nx = if i + 1 < n { i + 1 } else { s };
                val[i] = b[i] || (a[i] && val[nx]);
            }
        }
        for i in (0..s).rev() {
            val[i] = b[i] || (a[i] && val[i + 1]);
        }
        val
    }

    fn eval(&self, body: &LtlBody) -> Result<Vec<bool>, EvalError> {
        Ok(match body {
            LtlBody::Atom { prop, var } => {
                let t = self.trace(var)?;
                let idx = t.alphabet().index_of(prop).ok_or_else(|| {
                    EvalError::MissingProposition { var: var.clone(), prop: prop.clone() }
                })?;
                (0..self.n).map(|i| t.holds_at(idx, i)).collect()
            }
            LtlBody::InSet { var, set } => {
                let t = self.trace(var)?;
                let s = self
                    .asg
                    .set(set)
                    .ok_or_else(|| EvalError::UnboundVariable(set.to_string()))?;
                self.constant(s.contains(t))
            }
            LtlBody::Not(a) => {
                let mut v = self.eval(a)?;
                v.iter_mut().for_each(|x| *x = !*x);
                v
            }
            LtlBody::And(a, b) => zip(self.eval(a)?, self.eval(b)?, |x, y| x && y),
            LtlBody::Or(a, b) => zip(self.eval(a)?, self.eval(b)?, |x, y| x || y),
            LtlBody::Implies(a, b) => zip(self.eval(a)?, self.eval(b)?, |x, y| !x || y),
            LtlBody::Iff(a, b) => zip(self.eval(a)?, self.eval(b)?, |x, y| x == y),
            LtlBody::Xor(a, b) => zip(self.eval(a)?, self.eval(b)?, |x, y| x != y),
            LtlBody::Next(a) => {
                let v = self.eval(a)?;
                (0..self.n)
                    .map(|i| if i + 1 < self.n { v[i + 1] } else { v[self.s] })
                    .collect()
            }
            LtlBody::Until(a, b) => self.solve_until(&self.eval(a)?, &self.eval(b)?),
            LtlBody::Eventually(a) => {
                let v = self.eval(a)?;
                self.solve_until(&self.constant(true), &v)
            }
            LtlBody::Globally(a) => {
                let mut v = self.eval(a)?;
                v.iter_mut().for_each(|x| *x = !*x);
                let mut f = self.solve_until(&self.constant(true), &v);
                f.iter_mut().for_each(|x| *x = !*x);
                f
            }
        })
    }
}

/// Evaluates a quantifier-free body at position 0 under the assignment.
pub fn eval_body(body: &LtlBody, asg: &Assignment) -> Result<bool, EvalError> {
    let mut vars = std::collections::BTreeSet::new();
    body.trace_vars(&mut vars);
    let mut s = 0usize;
    let mut p = 1usize;
    for v in &vars {
        let t = asg
            .trace(v)
            .ok_or_else(|| EvalError::UnboundVariable(v.clone()))?;
        s = s.max(t.stem_len());
        p = lcm(p, t.loop_len());
    }
    let ctx = BodyCtx { asg, n: s + p, s };
    Ok(ctx.eval(body)?[0])
}

fn zip(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}
