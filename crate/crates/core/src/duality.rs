//! Kantorovich duality for the costs `u_lambda(ell)`: c-transforms,
//! separation certificates, cyclical monotonicity and the dual value.

use serde::Serialize;

use crate::admissible::AdmissibleFunction;
use crate::error::{LotError, Result};
use crate::extended::{ExtendedReal, NegInf};
use crate::lp;
use crate::measure::{Coupling, DiscreteMeasure};
use crate::spacetime::Spacetime;
use crate::transport::{self, separations, CostMatrix};

/// Slack below which a pair counts as touching in the contact set.
pub const CONTACT_TOLERANCE: f64 = 1e-8;

/// `phi^c(y_j) = sup_i cost_ij - phi_i`, skipping `-inf` costs.
pub fn c_transform(cost: &CostMatrix, phi: &[f64]) -> Vec<ExtendedReal> {
    (0..cost.cols)
        .map(|j| {
            (0..cost.rows).fold(NegInf, |best, i| match cost.entries[i * cost.cols + j] {
                ExtendedReal::Finite(c) => best.max(ExtendedReal::Finite(c - phi[i])),
                _ => best,
            })
        })
        .collect()
}

/// The transform in the other slot: `psi^c(x_i) = sup_j cost_ij - psi_j`.
pub fn c_transform_rows(cost: &CostMatrix, psi: &[f64]) -> Vec<ExtendedReal> {
    (0..cost.rows)
        .map(|i| {
            (0..cost.cols).fold(NegInf, |best, j| match cost.entries[i * cost.cols + j] {
                ExtendedReal::Finite(c) => best.max(ExtendedReal::Finite(c - psi[j])),
                _ => best,
            })
        })
        .collect()
}

fn finite_all(xs: Vec<ExtendedReal>, what: &str) -> Result<Vec<f64>> {
    xs.into_iter().map(|x| x.finite().ok_or_else(|| LotError::Solver(format!("{what} is not finite")))).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationCertificate {
    pub lambda: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    /// Pairs `(i, j)` where `phi_i + psi_j` touches the cost.
    pub contact: Vec<(usize, usize)>,
    pub coupling: Coupling,
    pub cost: CostMatrix,
    pub target: f64,
}

impl SeparationCertificate {
    pub fn dual_sum(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        dot(&self.phi, mu.weights()) + dot(&self.psi, nu.weights())
    }

    /// Moves the additive gauge `(phi + c, psi - c)` so that `phi` has zero mean.
    pub fn normalize_gauge(&mut self, mu: &DiscreteMeasure) {
        let c = dot(&self.phi, mu.weights());
        self.phi.iter_mut().for_each(|p| *p -= c);
        self.psi.iter_mut().for_each(|p| *p += c);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    /// Largest `cost - phi - psi`; nonpositive up to rounding when dominance holds.
    pub dominance_violation: f64,
    pub support_in_contact: bool,
    pub contact_timelike: bool,
    pub dual_sum: f64,
    pub target: f64,
    pub valid: bool,
}

/// Produces potentials witnessing that the optimal coupling at
/// `lambda = ell_u` is separated. Needs every pair of support points to be
/// timelike related.
pub fn find_u_separation(
    st: &Spacetime,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    u: &AdmissibleFunction,
    tol: f64,
) -> Result<SeparationCertificate> {
    let sep = separations(st, mu, nu)?;
    if let Some(k) = sep.iter().position(|s| !matches!(s, ExtendedReal::Finite(l) if *l > 0.0)) {
        return Err(LotError::precondition(format!("pair ({}, {}) is not timelike related", k / nu.len(), k % nu.len())));
    }
    let sol = transport::ell_u(st, mu, nu, u, tol)?;
    let lambda = sol.lambda.finite().filter(|l| *l > 0.0).ok_or_else(|| LotError::Solver("ell_u is not positive".into()))?;
    let (phi0, _) = sol.potentials.clone().ok_or_else(|| LotError::Solver("no dual potentials".into()))?;
    let coupling = sol.coupling.clone().expect("positive ell_u has a coupling");
    let cost = CostMatrix { rows: mu.len(), cols: nu.len(), entries: transport::gains(&sep, &u.rescale(lambda)?) };
    // double transform: tight on the optimal plan, and phi = psi^c exactly
    let psi = finite_all(c_transform(&cost, &phi0), "psi")?;
    let phi = finite_all(c_transform_rows(&cost, &psi), "phi")?;
    let psi = finite_all(c_transform(&cost, &phi), "psi")?;
    let scale = cost.entries.iter().filter_map(|c| c.finite()).fold(1.0f64, |m, c| m.max(c.abs()));
    let mut contact = Vec::new();
    for (i, p) in phi.iter().enumerate() {
        for (j, q) in psi.iter().enumerate() {
            if p + q - cost.entries[i * nu.len() + j].to_f64() <= CONTACT_TOLERANCE * scale {
                contact.push((i, j));
            }
        }
    }
    let mut cert = SeparationCertificate { lambda, phi, psi, contact, coupling, cost, target: u.eval(1.0) };
    cert.normalize_gauge(mu);
    Ok(cert)
}

/// Re-derives every condition of a certificate from the raw data.
pub fn verify_certificate(
    cert: &SeparationCertificate,
    st: &Spacetime,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    u: &AdmissibleFunction,
) -> Result<CertificateReport> {
    let sep = separations(st, mu, nu)?;
    let cost = transport::gains(&sep, &u.rescale(cert.lambda)?);
    let n = nu.len();
    let mut violation = f64::NEG_INFINITY;
    for i in 0..mu.len() {
        for j in 0..n {
            if let ExtendedReal::Finite(c) = cost[i * n + j] {
                violation = violation.max(c - cert.phi[i] - cert.psi[j]);
            }
        }
    }
    let scale = cost.iter().filter_map(|c| c.finite()).fold(1.0f64, |m, c| m.max(c.abs()));
    let support_in_contact = cert.coupling.support(1e-12).iter().all(|&(i, j, _)| cert.contact.contains(&(i, j)));
    let contact_timelike = cert.contact.iter().all(|&(i, j)| matches!(sep[i * n + j], ExtendedReal::Finite(l) if l > 0.0));
    let contact_tight =
        cert.contact.iter().all(|&(i, j)| (cert.phi[i] + cert.psi[j] - cost[i * n + j].to_f64()).abs() <= CONTACT_TOLERANCE * scale);
    let dual_sum = cert.dual_sum(mu, nu);
    let target = u.eval(1.0);
    let valid = violation <= 1e-10 * scale
        && support_in_contact
        && contact_timelike
        && contact_tight
        && (dual_sum - target).abs() <= 1e-8 * target.abs().max(1.0);
    Ok(CertificateReport { dominance_violation: violation, support_in_contact, contact_timelike, dual_sum, target, valid })
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    /// Smallest `sum c(x_k, y_k) - sum c(x_{k+1}, y_k)` over the enumerated
    /// cycles; `+inf` when no cycle has finite shifted cost.
    pub min_margin: f64,
    pub worst_cycle: Vec<(usize, usize)>,
    pub cycles_checked: usize,
}

/// Checks cyclical monotonicity of the support of `coupling` over cycles of
/// up to `max_len` distinct support pairs. A `-inf` shifted cost makes the
/// cycle harmless.
pub fn cyclical_monotonicity_margin(cost: &CostMatrix, coupling: &Coupling, max_len: usize) -> Result<MonotonicityReport> {
    if coupling.rows() != cost.rows || coupling.cols() != cost.cols {
        return Err(LotError::InvalidMeasure("coupling and cost shapes differ".into()));
    }
    let support: Vec<(usize, usize)> = coupling.support(1e-12).into_iter().map(|(i, j, _)| (i, j)).collect();
    let c = |i: usize, j: usize| cost.entries[i * cost.cols + j];
    let mut report = MonotonicityReport { min_margin: f64::INFINITY, worst_cycle: Vec::new(), cycles_checked: 0 };
    let mut stack: Vec<usize> = Vec::new();
    fn walk(
        support: &[(usize, usize)],
        stack: &mut Vec<usize>,
        max_len: usize,
        c: &dyn Fn(usize, usize) -> ExtendedReal,
        report: &mut MonotonicityReport,
    ) {
        if stack.len() >= 2 {
            let k = stack.len();
            let mut on = 0.0;
            let mut off = 0.0;
            let mut harmless = false;
            for a in 0..k {
                let (xi, yi) = support[stack[a]];
                let (xn, _) = support[stack[(a + 1) % k]];
                on += c(xi, yi).to_f64();
                match c(xn, yi) {
                    ExtendedReal::Finite(v) => off += v,
                    _ => harmless = true,
                }
            }
            report.cycles_checked += 1;
            if !harmless && on - off < report.min_margin {
                report.min_margin = on - off;
                report.worst_cycle = stack.iter().map(|&s| support[s]).collect();
            }
        }
        if stack.len() == max_len {
            return;
        }
        // the first entry is the smallest index, which fixes the rotation
        let start = stack.first().map_or(0, |f| f + 1);
        for next in start..support.len() {
            if stack.contains(&next) {
                continue;
            }
            if stack.is_empty() && next + 1 >= support.len() {
                break;
            }
            stack.push(next);
            walk(support, stack, max_len, c, report);
            stack.pop();
        }
    }
    walk(&support, &mut stack, max_len, &c, &mut report);
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct StarshapeReport {
    pub t: Vec<f64>,
    /// `max |(t^-1 phi)^{cc} - t^-1 phi|` for each `t`.
    pub residual: Vec<f64>,
}

/// Checks that `phi / t` is its own double transform for the cost
/// `u_t(ell)` between the source support and the intermediate points
/// `z_t(x, y)`. `u` is the cost profile already rescaled to the transport
/// distance, and `phi` must be a c-convex potential on the source support.
pub fn starshape_check(
    st: &Spacetime,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    phi: &[f64],
    u: &AdmissibleFunction,
    t_grid: &[f64],
) -> Result<StarshapeReport> {
    if phi.len() != mu.len() {
        return Err(LotError::DimensionMismatch { expected: mu.len(), found: phi.len() });
    }
    let sep = separations(st, mu, nu)?;
    let cost = CostMatrix { rows: mu.len(), cols: nu.len(), entries: transport::gains(&sep, u) };
    let psi = c_transform(&cost, phi);
    let psi_f: Vec<f64> = psi.iter().map(|p| p.to_f64()).collect();
    let back = c_transform_rows(&cost, &psi_f);
    for (i, b) in back.iter().enumerate() {
        if !b.is_finite() || (b.to_f64() - phi[i]).abs() > 1e-9 * phi[i].abs().max(1.0) {
            return Err(LotError::precondition(format!("potential is not c-convex at source atom {i}")));
        }
    }
    let mut report = StarshapeReport { t: Vec::new(), residual: Vec::new() };
    for &t in t_grid {
        if !(t > 0.0 && t <= 1.0) {
            return Err(LotError::domain(format!("star-shape parameter {t} outside (0, 1]")));
        }
        let mut mids = Vec::new();
        for x in mu.points() {
            for y in nu.points() {
                if st.causal(x, y)? {
                    mids.push((st.midpoint(x, y, t)?, 1.0));
                }
            }
        }
        let z = DiscreteMeasure::from_atoms(mids)?;
        let ut = u.rescale(t)?;
        let zsep = separations(st, mu, &z)?;
        let zcost = CostMatrix { rows: mu.len(), cols: z.len(), entries: transport::gains(&zsep, &ut) };
        let scaled: Vec<f64> = phi.iter().map(|p| p / t).collect();
        let psi_t: Vec<f64> = c_transform(&zcost, &scaled).iter().map(|p| p.to_f64()).collect();
        let again = c_transform_rows(&zcost, &psi_t);
        let worst = again.iter().zip(&scaled).map(|(a, s)| (a.to_f64() - s).abs()).fold(0.0, f64::max);
        report.t.push(t);
        report.residual.push(worst);
    }
    Ok(report)
}

/// Dual objective at scale `eta`: LP potentials pushed through the c-transform.
fn dual_objective(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    sep: &[ExtendedReal],
    u: &AdmissibleFunction,
    eta: f64,
) -> Result<(ExtendedReal, Option<Vec<f64>>)> {
    let cost = CostMatrix { rows: mu.len(), cols: nu.len(), entries: transport::gains(sep, &u.rescale(eta)?) };
    let Some(out) = lp::maximize(mu.weights(), nu.weights(), &cost.entries)? else {
        return Ok((NegInf, None));
    };
    let psi = c_transform(&cost, &out.row_potential);
    let mut total = ExtendedReal::Finite(dot(&out.row_potential, mu.weights()));
    for (p, w) in psi.iter().zip(nu.weights()) {
        total = total.add_pessimistic(match p {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(v * w),
            other => *other,
        });
    }
    Ok((total, Some(out.plan)))
}

/// `inf { eta > 0 : inf_phi [int phi dmu + int phi^c dnu] <= u(1) }` for the
/// cost `u_eta(ell)`, with the inner infimum evaluated through LP potentials.
pub fn dual_value(st: &Spacetime, mu: &DiscreteMeasure, nu: &DiscreteMeasure, u: &AdmissibleFunction, tol: f64) -> Result<ExtendedReal> {
    let sep = separations(st, mu, nu)?;
    let allowed: Vec<bool> = sep.iter().map(|s| !s.is_neg_inf()).collect();
    if lp::feasible_plan(mu.weights(), nu.weights(), &allowed).is_none() {
        return Ok(NegInf);
    }
    let target = u.eval(1.0);
    let eta_hi = sep.iter().filter_map(|s| s.finite()).fold(0.0, f64::max);
    if eta_hi == 0.0 {
        return Ok(ExtendedReal::Finite(0.0));
    }
    let above = |eta: f64| -> Result<(bool, Option<Vec<f64>>)> {
        let (v, plan) = dual_objective(mu, nu, &sep, u, eta)?;
        Ok((v > ExtendedReal::Finite(target), plan))
    };
    let mut hi = eta_hi;
    let mut hi_plan = above(hi)?.1;
    let mut lo = eta_hi;
    let mut found = false;
    for _ in 0..80 {
        lo *= 0.5;
        let (a, plan) = above(lo)?;
        if a {
            found = true;
            break;
        }
        hi = lo;
        hi_plan = plan;
    }
    if !found {
        return Ok(ExtendedReal::Finite(0.0));
    }
    let width = tol * eta_hi.max(1.0);
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        let (a, plan) = above(mid)?;
        if a {
            lo = mid;
        } else {
            hi = mid;
            hi_plan = plan;
        }
    }
    // pin the crossing on the active plan, as the primal search does
    let value_of = |plan: &[f64], eta: f64| -> f64 {
        plan.iter().zip(&sep).filter(|(m, _)| **m > 0.0).map(|(m, s)| m * u.eval_closed(s.to_f64() / eta).to_f64()).sum()
    };
    let mut probe = hi_plan;
    for _ in 0..16 {
        let Some(plan) = probe.take() else { break };
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if value_of(&plan, mid) > target {
                a = mid;
            } else {
                b = mid;
            }
        }
        if b <= lo || b >= hi {
            break;
        }
        let (above_b, plan_b) = above(b)?;
        if above_b {
            lo = b;
        } else {
            hi = b;
        }
        probe = plan_b;
    }
    Ok(ExtendedReal::Finite(hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::{ell_u, DEFAULT_TOLERANCE};

    fn instance() -> (Spacetime, DiscreteMeasure, DiscreteMeasure) {
        let st = Spacetime::minkowski(2).unwrap();
        let mu = DiscreteMeasure::new(vec![vec![0.0, 0.0], vec![0.1, 0.3]], vec![0.4, 0.6]).unwrap();
        let nu = DiscreteMeasure::new(vec![vec![2.0, 0.2], vec![2.5, -0.3], vec![3.0, 0.5]], vec![0.3, 0.3, 0.4]).unwrap();
        (st, mu, nu)
    }

    #[test]
    fn c_transform_skips_forbidden_pairs() {
        let cost = CostMatrix { rows: 2, cols: 2, entries: vec![ExtendedReal::Finite(1.0), NegInf, ExtendedReal::Finite(3.0), NegInf] };
        let t = c_transform(&cost, &[0.0, 1.0]);
        assert_eq!(t, vec![ExtendedReal::Finite(2.0), NegInf]);
    }

    #[test]
    fn certificate_validates() {
        let (st, mu, nu) = instance();
        for u in [AdmissibleFunction::log(), AdmissibleFunction::power(0.5).unwrap(), AdmissibleFunction::power(-1.0).unwrap()] {
            let cert = find_u_separation(&st, &mu, &nu, &u, DEFAULT_TOLERANCE).unwrap();
            let rep = verify_certificate(&cert, &st, &mu, &nu, &u).unwrap();
            assert!(rep.valid, "{rep:?}");
        }
    }

    #[test]
    fn gauge_shift_round_trips() {
        let (st, mu, nu) = instance();
        let u = AdmissibleFunction::log();
        let cert = find_u_separation(&st, &mu, &nu, &u, DEFAULT_TOLERANCE).unwrap();
        let mut moved = cert.clone();
        moved.phi.iter_mut().for_each(|p| *p += 2.5);
        moved.psi.iter_mut().for_each(|p| *p -= 2.5);
        assert!(verify_certificate(&moved, &st, &mu, &nu, &u).unwrap().valid);
        moved.normalize_gauge(&mu);
        for (a, b) in moved.phi.iter().zip(&cert.phi).chain(moved.psi.iter().zip(&cert.psi)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn separation_needs_timelike_pairs() {
        let st = Spacetime::minkowski(2).unwrap();
        let mu = DiscreteMeasure::dirac(vec![0.0, 0.0]).unwrap();
        let nu = DiscreteMeasure::new(vec![vec![1.0, 1.0], vec![2.0, 0.0]], vec![0.5, 0.5]).unwrap();
        assert!(matches!(find_u_separation(&st, &mu, &nu, &AdmissibleFunction::log(), DEFAULT_TOLERANCE), Err(LotError::Precondition(_))));
    }

    #[test]
    fn dual_matches_primal() {
        let (st, mu, nu) = instance();
        for u in [AdmissibleFunction::log(), AdmissibleFunction::power(0.5).unwrap()] {
            let p = ell_u(&st, &mu, &nu, &u, DEFAULT_TOLERANCE).unwrap().lambda_value();
            let d = dual_value(&st, &mu, &nu, &u, DEFAULT_TOLERANCE).unwrap().to_f64();
            assert!((p - d).abs() <= 2e-8, "primal {p} dual {d}");
        }
    }

    #[test]
    fn swapped_plan_breaks_monotonicity() {
        let st = Spacetime::minkowski(2).unwrap();
        let mu = DiscreteMeasure::uniform(vec![vec![0.0, 0.0], vec![0.0, 0.5]]).unwrap();
        let nu = DiscreteMeasure::uniform(vec![vec![2.0, 0.0], vec![2.0, 0.5]]).unwrap();
        let u = AdmissibleFunction::power(0.5).unwrap();
        let sol = ell_u(&st, &mu, &nu, &u, DEFAULT_TOLERANCE).unwrap();
        let cost = transport::cost_matrix(&st, &mu, &nu, &u.rescale(sol.lambda_value()).unwrap()).unwrap();
        let good = cyclical_monotonicity_margin(&cost, sol.coupling.as_ref().unwrap(), 4).unwrap();
        assert!(good.min_margin >= -1e-12);
        let swapped = Coupling::from_dense(2, 2, vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        let bad = cyclical_monotonicity_margin(&cost, &swapped, 4).unwrap();
        assert!(bad.min_margin < -1e-3);
        assert_eq!(bad.worst_cycle.len(), 2);
    }

    #[test]
    fn starshape_holds_for_certified_potential() {
        let (st, mu, nu) = instance();
        let u = AdmissibleFunction::power(-0.5).unwrap();
        let cert = find_u_separation(&st, &mu, &nu, &u, DEFAULT_TOLERANCE).unwrap();
        let ul = u.rescale(cert.lambda).unwrap();
        let rep = starshape_check(&st, &mu, &nu, &cert.phi, &ul, &[0.25, 0.5, 0.75, 1.0]).unwrap();
        assert!(rep.residual.iter().all(|r| *r <= 1e-9), "{rep:?}");
    }
}
