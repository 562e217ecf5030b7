//! The Orlicz-type transport distance `ell_u` between discrete measures.
//!
//! `ell_u(mu, nu)` is the largest `lambda > 0` for which some coupling has
//! `int u(ell / lambda) >= u(1)`, or 0 when no such `lambda` exists, or
//! `-inf` when the measures admit no causal coupling at all. The inner
//! supremum over couplings is an exact transportation LP, so the outer
//! search is a bisection on a monotone predicate followed by a root solve
//! on the active coupling.

use serde::Serialize;

use crate::admissible::AdmissibleFunction;
use crate::error::{LotError, Result};
use crate::extended::{ExtendedReal, NegInf};
use crate::lp::{self, LpOutcome};
use crate::measure::{Coupling, DiscreteMeasure};
use crate::spacetime::Spacetime;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Halvings tried below the largest separation before declaring `ell_u = 0`.
const MAX_HALVINGS: usize = 80;

/// Row-major matrix of time separations between the supports.
pub fn separations(st: &Spacetime, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Vec<ExtendedReal>> {
    let mut out = Vec::with_capacity(mu.len() * nu.len());
    for x in mu.points() {
        for y in nu.points() {
            out.push(st.time_separation(x, y)?);
        }
    }
    Ok(out)
}

/// `u(ell)` entrywise; non-causal pairs and `u(0) = -inf` both give `-inf`.
pub fn gains(sep: &[ExtendedReal], u: &AdmissibleFunction) -> Vec<ExtendedReal> {
    sep.iter()
        .map(|s| match s {
            ExtendedReal::Finite(l) => u.eval_closed(*l),
            _ => NegInf,
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CostMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<ExtendedReal>,
}

pub fn cost_matrix(st: &Spacetime, mu: &DiscreteMeasure, nu: &DiscreteMeasure, u: &AdmissibleFunction) -> Result<CostMatrix> {
    let sep = separations(st, mu, nu)?;
    Ok(CostMatrix { rows: mu.len(), cols: nu.len(), entries: gains(&sep, u) })
}

fn solve_at(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    sep: &[ExtendedReal],
    u: &AdmissibleFunction,
    lambda: f64,
) -> Result<Option<LpOutcome>> {
    let g = gains(sep, &u.rescale(lambda)?);
    lp::maximize(mu.weights(), nu.weights(), &g)
}

/// `sup_pi int u(ell / lambda) dpi`, or `-inf` when every causal coupling
/// charges a pair where the integrand is `-inf`.
pub fn inner_value(
    st: &Spacetime,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    u: &AdmissibleFunction,
    lambda: f64,
) -> Result<ExtendedReal> {
    let sep = separations(st, mu, nu)?;
    Ok(match solve_at(mu, nu, &sep, u, lambda)? {
        Some(out) => ExtendedReal::from_f64(out.value),
        None => NegInf,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BracketStep {
    pub lambda: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransportSolution {
    pub lambda: ExtendedReal,
    pub coupling: Option<Coupling>,
    pub inner_value: ExtendedReal,
    pub saturated: bool,
    pub iterations: usize,
    pub bracket: Vec<BracketStep>,
    #[serde(skip)]
    pub potentials: Option<(Vec<f64>, Vec<f64>)>,
}

impl TransportSolution {
    pub fn lambda_value(&self) -> f64 {
        self.lambda.to_f64()
    }
}

struct Search<'a> {
    mu: &'a DiscreteMeasure,
    nu: &'a DiscreteMeasure,
    sep: &'a [ExtendedReal],
    u: &'a AdmissibleFunction,
    target: f64,
    bracket: Vec<BracketStep>,
}

impl Search<'_> {
    fn probe(&mut self, lambda: f64) -> Result<(bool, Option<LpOutcome>)> {
        let out = solve_at(self.mu, self.nu, self.sep, self.u, lambda)?;
        let ok = match &out {
            Some(o) => o.value >= self.target,
            None => false,
        };
        self.bracket.push(BracketStep { lambda, feasible: ok });
        Ok((ok, out))
    }

    /// `sum pi_ij u(ell_ij / lambda)` for a fixed plan.
    fn plan_value(&self, plan: &[f64], lambda: f64) -> f64 {
        let mut total = 0.0;
        for (m, s) in plan.iter().zip(self.sep) {
            if *m > 0.0 {
                if let ExtendedReal::Finite(l) = s {
                    total += m * self.u.eval_closed(l / lambda).to_f64();
                }
            }
        }
        total
    }

    /// Largest `lambda` in `[lo, hi]` with `plan_value >= target`, to machine precision.
    fn plan_root(&self, plan: &[f64], mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.plan_value(plan, mid) >= self.target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Computes `ell_u(mu, nu)`. The bisection stops once the bracket is
/// narrower than `tol * max(1, largest separation)`; the active coupling then
/// pins the root down to rounding.
pub fn ell_u(st: &Spacetime, mu: &DiscreteMeasure, nu: &DiscreteMeasure, u: &AdmissibleFunction, tol: f64) -> Result<TransportSolution> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(LotError::domain(format!("tolerance must be positive (got {tol})")));
    }
    let sep = separations(st, mu, nu)?;
    let allowed: Vec<bool> = sep.iter().map(|s| !s.is_neg_inf()).collect();
    let Some(causal_plan) = lp::feasible_plan(mu.weights(), nu.weights(), &allowed) else {
        return Ok(TransportSolution {
            lambda: NegInf,
            coupling: None,
            inner_value: NegInf,
            saturated: false,
            iterations: 0,
            bracket: Vec::new(),
            potentials: None,
        });
    };
    let causal = Coupling::from_dense(mu.len(), nu.len(), causal_plan)?;
    let zero = |bracket, inner| TransportSolution {
        lambda: ExtendedReal::Finite(0.0),
        coupling: Some(causal.clone()),
        inner_value: inner,
        saturated: false,
        iterations: 0,
        bracket,
        potentials: None,
    };
    let lam_hi = sep.iter().filter_map(|s| s.finite()).fold(0.0, f64::max);
    if lam_hi == 0.0 {
        return Ok(zero(Vec::new(), u.value_at_zero()));
    }
    let mut search = Search { mu, nu, sep: &sep, u, target: u.eval(1.0), bracket: Vec::new() };
    let scale = 1.0f64.max(search.target.abs());
    let finish = |search: Search, lambda: f64, out: LpOutcome, iterations: usize| -> Result<TransportSolution> {
        let saturated = (out.value - search.target).abs() <= 1e-9 * scale;
        Ok(TransportSolution {
            lambda: ExtendedReal::Finite(lambda),
            coupling: Some(Coupling::from_dense(mu.len(), nu.len(), out.plan.clone())?),
            inner_value: ExtendedReal::from_f64(out.value),
            saturated,
            iterations,
            bracket: search.bracket,
            potentials: Some((out.row_potential, out.col_potential)),
        })
    };

    let (ok, out) = search.probe(lam_hi)?;
    if ok {
        return finish(search, lam_hi, out.expect("feasible probe has a plan"), 1);
    }
    let mut hi = lam_hi;
    let mut lo = lam_hi;
    let mut lo_out = None;
    for _ in 0..MAX_HALVINGS {
        lo *= 0.5;
        let (ok, out) = search.probe(lo)?;
        if ok {
            lo_out = out;
            break;
        }
        hi = lo;
    }
    let Some(mut best) = lo_out else {
        let bracket = search.bracket;
        return Ok(zero(bracket, NegInf));
    };
    let width = tol * lam_hi.max(1.0);
    let mut iterations = search.bracket.len();
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        let (ok, out) = search.probe(mid)?;
        iterations += 1;
        if ok {
            lo = mid;
            best = out.expect("feasible probe has a plan");
        } else {
            hi = mid;
        }
    }
    // the optimal plan is locally constant in lambda, so the crossing of its
    // own value curve is the answer once the plan stays optimal there
    for _ in 0..8 {
        if (best.value - search.target).abs() <= 1e-13 * scale {
            break;
        }
        let root = search.plan_root(&best.plan, lo, hi);
        if root <= lo {
            break;
        }
        let (ok, out) = search.probe(root)?;
        if !ok {
            break;
        }
        lo = root;
        best = out.expect("feasible probe has a plan");
    }
    finish(search, lo, best, iterations)
}

/// Closed form of `ell_u` for the power and log profiles, which are
/// homogeneous up to an additive constant.
pub fn ell_p_closed_form(st: &Spacetime, mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<ExtendedReal> {
    let u = AdmissibleFunction::builtin(p)?;
    let sep = separations(st, mu, nu)?;
    let allowed: Vec<bool> = sep.iter().map(|s| !s.is_neg_inf()).collect();
    if lp::feasible_plan(mu.weights(), nu.weights(), &allowed).is_none() {
        return Ok(NegInf);
    }
    let Some(out) = lp::maximize(mu.weights(), nu.weights(), &gains(&sep, &u))? else {
        return Ok(ExtendedReal::Finite(0.0));
    };
    let v = out.value;
    Ok(ExtendedReal::Finite(if p == 0.0 { (v - 0.5).exp() } else { (p * v).max(0.0).powf(1.0 / p) }))
}

/// Composes `pi12` and `pi23` through their shared middle marginal.
pub fn glue(pi12: &Coupling, pi23: &Coupling, mu2: &DiscreteMeasure) -> Result<Coupling> {
    if pi12.cols() != mu2.len() || pi23.rows() != mu2.len() {
        return Err(LotError::InvalidMeasure("couplings do not share the middle marginal".into()));
    }
    let (m, n) = (pi12.rows(), pi23.cols());
    let mut mass = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..mu2.len() {
            let a = pi12.get(i, j);
            if a == 0.0 {
                continue;
            }
            let w = a / mu2.weight(j);
            for k in 0..n {
                mass[i * n + k] += w * pi23.get(j, k);
            }
        }
    }
    Coupling::from_dense(m, n, mass)
}

/// `ell_u(mu1, mu3) - ell_u(mu1, mu2) - ell_u(mu2, mu3)`, which the reverse
/// triangle inequality keeps nonnegative; `-inf` when a leg is infeasible.
pub fn triangle_defect(
    st: &Spacetime,
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    mu3: &DiscreteMeasure,
    u: &AdmissibleFunction,
    tol: f64,
) -> Result<ExtendedReal> {
    let a = ell_u(st, mu1, mu2, u, tol)?.lambda;
    let b = ell_u(st, mu2, mu3, u, tol)?.lambda;
    let (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) = (a, b) else {
        return Ok(NegInf);
    };
    let c = ell_u(st, mu1, mu3, u, tol)?.lambda;
    Ok(match c {
        ExtendedReal::Finite(c) => ExtendedReal::Finite(c - a - b),
        other => other,
    })
}
