//! Relative entropy along potential-driven transport maps, computed per
//! particle through `log rho0 - log det DF_s + V(F_s)`, and the two
//! curvature experiments built on it.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::admissible::{hamiltonian_hessian, lagrangian_gradient, AdmissibleFunction};
use crate::error::{LotError, Result};
use crate::geodesic::{transport_map, Density, PotentialField, TransportMap, TransportMapSample};
use crate::sampling::{gauss_box, halton_ball, pairwise_sum};
use crate::spacetime::{lorentz_square, Spacetime};

/// Weighted particles representing an absolutely continuous source measure.
#[derive(Debug, Clone, Serialize)]
pub struct DensityCloud {
    pub points: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
    /// Source density at each particle.
    pub rho0: Vec<f64>,
}

impl DensityCloud {
    pub fn new(points: Vec<Vec<f64>>, masses: Vec<f64>, rho0: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != masses.len() || points.len() != rho0.len() {
            return Err(LotError::InvalidMeasure("cloud arrays are empty or differ in length".into()));
        }
        if masses.iter().any(|m| !(*m > 0.0)) || rho0.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(LotError::InvalidMeasure("cloud needs positive masses and densities".into()));
        }
        let total = pairwise_sum(&masses);
        if (total - 1.0).abs() > 1e-10 {
            return Err(LotError::InvalidMeasure(format!("cloud masses sum to {total}")));
        }
        Ok(DensityCloud { points, masses, rho0 })
    }

    /// Tensor Gauss rule on a box, or a point-symmetric Halton cloud of
    /// `count` particles on a ball.
    pub fn from_density(density: &Density, per_axis: usize, count: usize) -> Result<Self> {
        match density {
            Density::Box { lo, hi } => {
                let (points, weights) = gauss_box(lo, hi, per_axis);
                let rho0: Vec<f64> = points.iter().map(|x| density.value(x)).collect();
                let raw: Vec<f64> = weights.iter().zip(&rho0).map(|(w, r)| w * r).collect();
                let total = pairwise_sum(&raw);
                Self::new(points, raw.into_iter().map(|m| m / total).collect(), rho0)
            }
            Density::Ball { center, radius } => {
                if count < 2 {
                    return Err(LotError::domain("ball cloud needs at least two particles"));
                }
                let half = halton_ball(&vec![0.0; center.len()], *radius, count / 2);
                let mut points = Vec::with_capacity(2 * half.len());
                for p in &half {
                    points.push(p.iter().zip(center).map(|(p, c)| c + p).collect());
                    points.push(p.iter().zip(center).map(|(p, c)| c - p).collect());
                }
                let rho = 1.0 / density.volume();
                let n = points.len();
                Self::new(points, vec![1.0 / n as f64; n], vec![rho; n])
            }
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `E_V(mu_s) = sum m (log rho0 - log J_s + V(F_s))`.
pub fn relative_entropy(st: &Spacetime, map: &TransportMap, cloud: &DensityCloud, s: f64) -> Result<f64> {
    let sample = transport_map(map, s, &cloud.points, &cloud.masses)?;
    entropy_of_sample(st, cloud, &sample)
}

fn entropy_of_sample(st: &Spacetime, cloud: &DensityCloud, sample: &TransportMapSample) -> Result<f64> {
    let mut terms = Vec::with_capacity(cloud.len());
    for k in 0..cloud.len() {
        let det = sample.determinants[k];
        if !(det > 0.0) {
            return Err(LotError::precondition(format!("nonpositive Jacobian {det:e} at particle {k}")));
        }
        terms.push(cloud.masses[k] * (cloud.rho0[k].ln() - det.ln() + st.weight().value(&sample.images[k])));
    }
    Ok(pairwise_sum(&terms))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobianLogDerivative {
    /// `d/ds log det A_s = Tr B_s`, reported with the entropy sign `-Tr B_s`.
    pub first: f64,
    /// `Tr B_s^2` (flat metric, no curvature term).
    pub second: f64,
    /// `Tr B_s^2 - (Tr B_s)^2 / n`.
    pub trace_margin: f64,
}

/// Per-particle derivatives of `-log det A_s` with `A_s = I + s Dv` and
/// `B_s = Dv A_s^{-1}`.
pub fn jacobian_log_derivatives(sample: &TransportMapSample) -> Result<Vec<JacobianLogDerivative>> {
    sample
        .velocity_jacobians
        .iter()
        .enumerate()
        .map(|(k, dv)| {
            log_derivative(dv, sample.s).map_err(|e| match e {
                LotError::Precondition(m) => LotError::precondition(format!("particle {k}: {m}")),
                other => other,
            })
        })
        .collect()
}

pub fn log_derivative(dv: &DMatrix<f64>, s: f64) -> Result<JacobianLogDerivative> {
    let n = dv.nrows();
    let a = DMatrix::identity(n, n) + dv * s;
    let inv = a.try_inverse().ok_or_else(|| LotError::precondition("singular map Jacobian"))?;
    let b = dv * inv;
    let tr = b.trace();
    let tr2 = (&b * &b).trace();
    Ok(JacobianLogDerivative { first: -tr, second: tr2, trace_margin: tr2 - tr * tr / n as f64 })
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyCurve {
    pub s_grid: Vec<f64>,
    pub e: Vec<f64>,
    pub e1_analytic: Vec<f64>,
    pub e2_analytic: Vec<f64>,
    pub e1_fd: Vec<f64>,
    pub e2_fd: Vec<f64>,
    pub step: f64,
    pub k: f64,
    pub synthetic_dim: f64,
    /// Normalising constant of the map coupling.
    pub lambda: f64,
    /// `(sum m l^2)^(1/2)` over the map coupling.
    pub l2_norm: f64,
    /// Smallest trace-inequality margin seen over all particles and grid points.
    pub min_trace_margin: f64,
}

/// Evaluates `e`, its analytic derivatives, and centred differences with
/// step `h` at each grid point.
pub fn entropy_curve(st: &Spacetime, map: &TransportMap, cloud: &DensityCloud, k: f64, s_grid: &[f64], h: f64) -> Result<EntropyCurve> {
    if map.dim() != st.dim() {
        return Err(LotError::DimensionMismatch { expected: st.dim(), found: map.dim() });
    }
    if !(h > 0.0) {
        return Err(LotError::domain("finite-difference step must be positive"));
    }
    let (lambda, l2_norm) = map_coupling_scale(map, cloud)?;
    let weight = st.weight();
    let mut curve = EntropyCurve {
        s_grid: s_grid.to_vec(),
        e: Vec::new(),
        e1_analytic: Vec::new(),
        e2_analytic: Vec::new(),
        e1_fd: Vec::new(),
        e2_fd: Vec::new(),
        step: h,
        k,
        synthetic_dim: st.synthetic_dim(),
        lambda,
        l2_norm,
        min_trace_margin: f64::INFINITY,
    };
    for &s in s_grid {
        let sample = transport_map(map, s, &cloud.points, &cloud.masses)?;
        let e = entropy_of_sample(st, cloud, &sample)?;
        let logs = jacobian_log_derivatives(&sample)?;
        let mut d1 = Vec::with_capacity(cloud.len());
        let mut d2 = Vec::with_capacity(cloud.len());
        for (j, ld) in logs.iter().enumerate() {
            let v = DVector::from_column_slice(&sample.velocities[j]);
            let y = &sample.images[j];
            let m = cloud.masses[j];
            d1.push(m * (weight.gradient(y).dot(&v) + ld.first));
            d2.push(m * (ld.second + (v.transpose() * weight.hessian(y) * &v)[(0, 0)]));
            curve.min_trace_margin = curve.min_trace_margin.min(ld.trace_margin);
        }
        let ep = relative_entropy(st, map, cloud, s + h)?;
        let em = relative_entropy(st, map, cloud, s - h)?;
        curve.e.push(e);
        curve.e1_analytic.push(pairwise_sum(&d1));
        curve.e2_analytic.push(pairwise_sum(&d2));
        curve.e1_fd.push((ep - em) / (2.0 * h));
        curve.e2_fd.push((ep - 2.0 * e + em) / (h * h));
    }
    Ok(curve)
}

/// The map's own normalising constant and `(sum m |v|^2)^(1/2)`; the map
/// coupling pairs `x` with `F_1(x)`, so its separations are `|v(x)|`.
fn map_coupling_scale(map: &TransportMap, cloud: &DensityCloud) -> Result<(f64, f64)> {
    let mut sq = Vec::with_capacity(cloud.len());
    for (k, x) in cloud.points.iter().enumerate() {
        let v = map.velocity(x)?;
        let l2 = lorentz_square(&v);
        if !(l2 > 0.0 && v[0] > 0.0) {
            return Err(LotError::precondition(format!("velocity at particle {k} is not future timelike")));
        }
        sq.push(cloud.masses[k] * l2);
    }
    Ok((map.lambda(), pairwise_sum(&sq).sqrt()))
}

/// The `lambda` with `sum m u(l_k / lambda) = u(1)` for the coupling
/// `x -> F_1(x)`; exact when all separations agree.
pub fn map_coupling_lambda(map: &TransportMap, cloud: &DensityCloud, u: &AdmissibleFunction) -> Result<f64> {
    let mut ls = Vec::with_capacity(cloud.len());
    for (k, x) in cloud.points.iter().enumerate() {
        let v = map.velocity(x)?;
        let l2 = lorentz_square(&v);
        if !(l2 > 0.0 && v[0] > 0.0) {
            return Err(LotError::precondition(format!("velocity at particle {k} is not future timelike")));
        }
        ls.push(l2.sqrt());
    }
    let lo0 = ls.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi0 = ls.iter().cloned().fold(0.0, f64::max);
    if hi0 - lo0 <= 1e-15 * hi0 {
        return Ok(lo0);
    }
    let target = u.eval(1.0);
    let excess = |lambda: f64| {
        let terms: Vec<f64> = ls.iter().zip(&cloud.masses).map(|(l, m)| m * u.eval(l / lambda)).collect();
        pairwise_sum(&terms) - target
    };
    // excess is decreasing, >= 0 at the smallest separation, <= 0 at the largest
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Builds an entropy curve whose reported `lambda` is the map coupling's.
pub fn entropy_curve_for(
    st: &Spacetime,
    map: &TransportMap,
    cloud: &DensityCloud,
    u: &AdmissibleFunction,
    k: f64,
    s_grid: &[f64],
    h: f64,
) -> Result<EntropyCurve> {
    let mut curve = entropy_curve(st, map, cloud, k, s_grid, h)?;
    curve.lambda = map_coupling_lambda(map, cloud, u)?;
    Ok(curve)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    /// `e'' - e'^2/N - K lambda^2` per grid point.
    pub margin_lambda2: Vec<f64>,
    /// `e'' - e'^2/N - K ||l||_{L2}`, the norm unsquared.
    pub margin_l2pi: Vec<f64>,
    /// `e'' - e'^2/N - K int l^2`.
    pub margin_body: Vec<f64>,
    pub min_margin_lambda2: f64,
    pub min_margin_l2pi: f64,
    pub min_margin_body: f64,
    pub convex: bool,
}

/// Margins from the analytic derivatives. Minima run over interior grid
/// points only.
pub fn convexity_report(curve: &EntropyCurve, tolerance: f64) -> ConvexityReport {
    let inv_n = if curve.synthetic_dim.is_infinite() { 0.0 } else { 1.0 / curve.synthetic_dim };
    let base: Vec<f64> = curve.e1_analytic.iter().zip(&curve.e2_analytic).map(|(e1, e2)| e2 - inv_n * e1 * e1).collect();
    let shift = |c: f64| -> Vec<f64> { base.iter().map(|b| b - c).collect() };
    let margin_lambda2 = shift(curve.k * curve.lambda * curve.lambda);
    let margin_l2pi = shift(curve.k * curve.l2_norm);
    let margin_body = shift(curve.k * curve.l2_norm * curve.l2_norm);
    let interior_min = |m: &[f64]| -> f64 {
        let len = m.len();
        let range = if len > 2 { &m[1..len - 1] } else { m };
        range.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let min_margin_lambda2 = interior_min(&margin_lambda2);
    ConvexityReport {
        min_margin_l2pi: interior_min(&margin_l2pi),
        min_margin_body: interior_min(&margin_body),
        convex: min_margin_lambda2 >= -tolerance,
        margin_lambda2,
        margin_l2pi,
        margin_body,
        min_margin_lambda2,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusRow {
    pub radius: f64,
    pub lambda: f64,
    /// Margin from the analytic derivatives at `s = 0`.
    pub margin_at_start: f64,
    pub min_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RicciFailureReport {
    pub ricci: f64,
    pub k: f64,
    /// `t^2 (Ric(v,v) - K)`, the small-radius value of the starting margin.
    pub limit: f64,
    /// Diagonal factor of the prescribed velocity Jacobian at the base point.
    pub prescribed_rate: f64,
    pub rows: Vec<RadiusRow>,
}

#[derive(Debug, Clone)]
pub struct RicciFailureSetup<'a> {
    pub st: &'a Spacetime,
    pub u: &'a AdmissibleFunction,
    pub base: Vec<f64>,
    /// Future timelike direction; normalised internally.
    pub direction: Vec<f64>,
    /// Lorentz length of the velocity at the base point.
    pub speed: f64,
    pub k: f64,
    pub radii: Vec<f64>,
    pub particles: usize,
    pub s_grid: Vec<f64>,
    pub step: f64,
}

/// The potential whose velocity at `base` is `speed * direction` and whose
/// velocity Jacobian there is `c0 I`, `c0 = -(dV(v)) / (N - n)`.
pub fn prescribed_potential(
    st: &Spacetime,
    u: &AdmissibleFunction,
    base: &[f64],
    velocity: &[f64],
    lambda: f64,
) -> Result<(PotentialField, f64)> {
    let n = st.dim();
    let ul = u.rescale(lambda)?;
    let w = lagrangian_gradient(velocity, &ul)?;
    let gap = st.synthetic_dim() - n as f64;
    let rate = if st.synthetic_dim().is_infinite() || st.weight().is_none() || gap == 0.0 {
        0.0
    } else {
        -st.weight().gradient(base).dot(&DVector::from_column_slice(velocity)) / gap
    };
    if rate <= -1.0 {
        return Err(LotError::precondition(format!("prescribed rate {rate} collapses the map before s = 1")));
    }
    if rate == 0.0 {
        let a = w.clone();
        let b = -a.iter().zip(base).map(|(a, x)| a * x).sum::<f64>();
        return Ok((PotentialField::affine(a, b), 0.0));
    }
    let d2h = hamiltonian_hessian(&w, &ul.conjugate())?;
    let inv = d2h.try_inverse().ok_or_else(|| LotError::Solver("Hamiltonian Hessian is singular".into()))?;
    let mut q = inv * rate;
    q = (&q + q.transpose()) * 0.5;
    // phi(x) = w.(x - base) + 1/2 (x - base)^T Q (x - base)
    let xb = DVector::from_column_slice(base);
    let qx = &q * &xb;
    let a: Vec<f64> = w.iter().zip(qx.iter()).map(|(w, q)| w - q).collect();
    let b = 0.5 * xb.dot(&qx) - w.iter().zip(base).map(|(w, x)| w * x).sum::<f64>();
    Ok((PotentialField::quadratic(q, a, b)?, rate))
}

/// Runs the converse construction over a decreasing list of ball radii.
pub fn ricci_failure_experiment(setup: &RicciFailureSetup) -> Result<RicciFailureReport> {
    let st = setup.st;
    let n = st.dim();
    if setup.base.len() != n || setup.direction.len() != n {
        return Err(LotError::DimensionMismatch { expected: n, found: setup.direction.len() });
    }
    let sq = lorentz_square(&setup.direction);
    if !(sq > 0.0 && setup.direction[0] > 0.0) {
        return Err(LotError::domain("direction must be future timelike"));
    }
    if !(setup.speed > 0.0) {
        return Err(LotError::domain("speed must be positive"));
    }
    let unit: Vec<f64> = setup.direction.iter().map(|c| c / sq.sqrt()).collect();
    let ricci = st.bakry_emery_ricci(&setup.base, &unit)?;
    if !(ricci < setup.k) {
        return Err(LotError::precondition(format!(
            "weighted Ricci {ricci} is not below K = {} at the base point; no violation to exhibit",
            setup.k
        )));
    }
    let velocity: Vec<f64> = unit.iter().map(|c| c * setup.speed).collect();
    let (phi, rate) = prescribed_potential(st, setup.u, &setup.base, &velocity, setup.speed)?;
    let map = TransportMap::new(phi, setup.u, setup.speed)?;
    let mut rows = Vec::with_capacity(setup.radii.len());
    for &r in &setup.radii {
        let cloud = DensityCloud::from_density(&Density::ball(setup.base.clone(), r)?, 0, setup.particles)?;
        let mut grid = vec![0.0];
        grid.extend(setup.s_grid.iter().filter(|s| **s != 0.0));
        let curve = entropy_curve_for(st, &map, &cloud, setup.u, setup.k, &grid, setup.step)?;
        let report = convexity_report(&curve, 0.0);
        rows.push(RadiusRow {
            radius: r,
            lambda: curve.lambda,
            margin_at_start: report.margin_lambda2[0],
            min_margin: report.margin_lambda2.iter().cloned().fold(f64::INFINITY, f64::min),
        });
    }
    Ok(RicciFailureReport { ricci, k: setup.k, limit: setup.speed * setup.speed * (ricci - setup.k), prescribed_rate: rate, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::Weight;
    use approx::assert_relative_eq;

    fn translation(a: Vec<f64>) -> TransportMap {
        TransportMap::new(PotentialField::affine(a, 0.0), &AdmissibleFunction::power(0.5).unwrap(), 1.0).unwrap()
    }

    fn unit_box() -> Density {
        Density::boxed(vec![-0.5, -0.5], vec![1.5, 0.5]).unwrap()
    }

    #[test]
    fn uniform_box_entropy_is_minus_log_volume() {
        let st = Spacetime::minkowski(2).unwrap();
        let cloud = DensityCloud::from_density(&unit_box(), 6, 0).unwrap();
        let e = relative_entropy(&st, &translation(vec![-1.0, 0.0]), &cloud, 0.0).unwrap();
        assert_relative_eq!(e, -(2.0f64).ln(), epsilon = 1e-14);
        let e1 = relative_entropy(&st, &translation(vec![-1.0, 0.0]), &cloud, 0.7).unwrap();
        assert_relative_eq!(e1, e, epsilon = 1e-14);
    }

    #[test]
    fn quadratic_weight_translation_has_constant_second_derivative() {
        let alpha = 0.3;
        let st = Spacetime::weighted(2, Weight::Quadratic { alpha }, f64::INFINITY).unwrap();
        let cloud = DensityCloud::from_density(&unit_box(), 6, 0).unwrap();
        let map = translation(vec![-1.25, 0.75]);
        let v = map.velocity(&[0.0, 0.0]).unwrap();
        let grid: Vec<f64> = (0..5).map(|k| k as f64 / 4.0).collect();
        let curve = entropy_curve(&st, &map, &cloud, alpha, &grid, 1e-2).unwrap();
        let want = alpha * (v[0] * v[0] + v[1] * v[1]);
        for (a, f) in curve.e2_analytic.iter().zip(&curve.e2_fd) {
            assert_relative_eq!(*a, want, epsilon = 1e-12);
            assert!((a - f).abs() < 1e-8);
        }
        let report = convexity_report(&curve, 1e-6);
        let g = lorentz_square(&v);
        assert_relative_eq!(report.min_margin_lambda2, alpha * (v[0] * v[0] + v[1] * v[1] - g), epsilon = 1e-10);
        assert!(report.convex);
    }

    #[test]
    fn flat_translation_fails_positive_k() {
        let st = Spacetime::minkowski(2).unwrap();
        let cloud = DensityCloud::from_density(&unit_box(), 4, 0).unwrap();
        let grid = [0.0, 0.5, 1.0];
        let u = AdmissibleFunction::power(0.5).unwrap();
        let curve = entropy_curve_for(&st, &translation(vec![-1.0, 0.0]), &cloud, &u, 1.0, &grid, 1e-2).unwrap();
        assert_eq!(curve.lambda, 1.0);
        let rep = convexity_report(&curve, 1e-6);
        assert_relative_eq!(rep.min_margin_lambda2, -1.0, epsilon = 1e-12);
        assert!(!rep.convex);
    }

    #[test]
    fn isotropic_log_derivatives() {
        let beta = 0.4;
        let n = 3;
        let dv = DMatrix::identity(n, n) * beta;
        for s in [0.0, 0.3, 0.9] {
            let d = log_derivative(&dv, s).unwrap();
            assert_relative_eq!(d.first, -(n as f64) * beta / (1.0 + s * beta), epsilon = 1e-14);
            assert_relative_eq!(d.second, n as f64 * beta * beta / (1.0 + s * beta).powi(2), epsilon = 1e-14);
            assert!(d.trace_margin.abs() < 1e-14);
        }
    }

    #[test]
    fn converse_flat_margins_equal_minus_k() {
        let st = Spacetime::minkowski(2).unwrap();
        let u = AdmissibleFunction::power(0.5).unwrap();
        let setup = RicciFailureSetup {
            st: &st,
            u: &u,
            base: vec![0.0, 0.0],
            direction: vec![1.0, 0.0],
            speed: 1.0,
            k: 1.0,
            radii: vec![0.2, 0.1],
            particles: 256,
            s_grid: vec![0.5],
            step: 1e-2,
        };
        let rep = ricci_failure_experiment(&setup).unwrap();
        for row in &rep.rows {
            assert_relative_eq!(row.margin_at_start, -1.0, epsilon = 1e-12);
        }
        assert_eq!(rep.limit, -1.0);
    }

    #[test]
    fn converse_linear_weight_approaches_the_limit() {
        let st = Spacetime::weighted(2, Weight::Linear { c: 0.5 }, 3.0).unwrap();
        let u = AdmissibleFunction::log();
        let setup = RicciFailureSetup {
            st: &st,
            u: &u,
            base: vec![0.0, 0.0],
            direction: vec![1.0, 0.0],
            speed: 1.0,
            k: 0.0,
            radii: vec![0.2, 0.1, 0.05],
            particles: 1024,
            s_grid: vec![],
            step: 1e-3,
        };
        let rep = ricci_failure_experiment(&setup).unwrap();
        assert_relative_eq!(rep.limit, -0.25, epsilon = 1e-15);
        assert_relative_eq!(rep.prescribed_rate, -0.5, epsilon = 1e-15);
        let gaps: Vec<f64> = rep.rows.iter().map(|r| (r.margin_at_start - rep.limit).abs()).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        assert!(gaps[2] < 1e-2);
    }

    #[test]
    fn converse_refuses_without_violation() {
        let st = Spacetime::weighted(2, Weight::Quadratic { alpha: 0.3 }, f64::INFINITY).unwrap();
        let u = AdmissibleFunction::log();
        let setup = RicciFailureSetup {
            st: &st,
            u: &u,
            base: vec![0.0, 0.0],
            direction: vec![1.0, 0.0],
            speed: 1.0,
            k: 0.3,
            radii: vec![0.1],
            particles: 64,
            s_grid: vec![],
            step: 1e-3,
        };
        assert!(matches!(ricci_failure_experiment(&setup), Err(LotError::Precondition(_))));
    }
}
