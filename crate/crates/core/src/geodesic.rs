//! Displacement interpolation of discrete couplings, and the continuous
//! transport maps `F_s(x) = x + s DH(Dphi(x))` driven by closed-form potentials.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::admissible::{hamiltonian_gradient, hamiltonian_hessian, AdmissibleFunction};
use crate::error::{LotError, Result};
use crate::extended::ExtendedReal;
use crate::measure::{Coupling, DiscreteMeasure};
use crate::sampling::gauss_box;
use crate::spacetime::{euclidean_distance, lorentz_square, Spacetime};
use crate::transport::{ell_u, gains, separations};

/// Pushes each atom of the coupling to the point at parameter `s` on its
/// segment, merging atoms that land together.
pub fn interpolate(st: &Spacetime, mu: &DiscreteMeasure, nu: &DiscreteMeasure, pi: &Coupling, s: f64) -> Result<DiscreteMeasure> {
    if pi.rows() != mu.len() || pi.cols() != nu.len() {
        return Err(LotError::InvalidMeasure("coupling does not match the measures".into()));
    }
    let mut atoms = Vec::new();
    for (i, j, m) in pi.support(0.0) {
        match st.time_separation(mu.point(i), nu.point(j))? {
            ExtendedReal::Finite(l) if l > 0.0 => {}
            _ => {
                return Err(LotError::precondition(format!("coupling charges the non-timelike pair ({i}, {j})")));
            }
        }
        atoms.push((st.midpoint(mu.point(i), nu.point(j), s)?, m));
    }
    DiscreteMeasure::from_atoms(atoms)
}

#[derive(Debug, Clone, Serialize)]
pub struct GeodesicPath {
    pub s_grid: Vec<f64>,
    pub measures: Vec<DiscreteMeasure>,
    pub coupling: Coupling,
    pub lambda: f64,
}

/// Solves for an optimal coupling and interpolates it on `points` equally
/// spaced parameters in `[0, 1]`.
pub fn geodesic_path(
    st: &Spacetime,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    u: &AdmissibleFunction,
    points: usize,
    tol: f64,
) -> Result<GeodesicPath> {
    if points < 2 {
        return Err(LotError::domain("a path needs at least two grid points"));
    }
    let sol = ell_u(st, mu, nu, u, tol)?;
    let lambda = match sol.lambda {
        ExtendedReal::Finite(l) if l > 0.0 => l,
        other => return Err(LotError::precondition(format!("ell_u = {other}; a geodesic needs a positive value"))),
    };
    let coupling = sol.coupling.expect("positive ell_u has a coupling");
    path_from_coupling(st, mu, nu, coupling, lambda, points)
}

/// Interpolates a given coupling; the endpoints are the input measures.
pub fn path_from_coupling(
    st: &Spacetime,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    coupling: Coupling,
    lambda: f64,
    points: usize,
) -> Result<GeodesicPath> {
    let s_grid: Vec<f64> = (0..points).map(|k| k as f64 / (points - 1) as f64).collect();
    let mut measures = Vec::with_capacity(points);
    for &s in &s_grid {
        measures.push(if s == 0.0 {
            mu.clone()
        } else if s == 1.0 {
            nu.clone()
        } else {
            interpolate(st, mu, nu, &coupling, s)?
        });
    }
    Ok(GeodesicPath { s_grid, measures, coupling, lambda })
}

/// `max_{s < t} |ell_u(mu_s, mu_t) - (t - s) lambda|` over the path grid.
pub fn geodesy_defect(st: &Spacetime, path: &GeodesicPath, u: &AdmissibleFunction, tol: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in 0..path.s_grid.len() {
        for b in a + 1..path.s_grid.len() {
            let got = ell_u(st, &path.measures[a], &path.measures[b], u, tol)?.lambda;
            let want = (path.s_grid[b] - path.s_grid[a]) * path.lambda;
            worst = worst.max(match got {
                ExtendedReal::Finite(l) => (l - want).abs(),
                _ => f64::INFINITY,
            });
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct Collision {
    pub first: usize,
    pub second: usize,
    /// Two-cycle margin `c(x,y) + c(x',y') - c(x,y') - c(x',y)`.
    pub margin: f64,
    /// True when the pair satisfies the two-cycle inequality, so a collision
    /// contradicts the theory.
    pub hypothesis_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossingReport {
    pub collisions: Vec<Collision>,
    pub ok: bool,
}

/// Looks for distinct pairs whose segments meet at parameter `s`. Meeting is
/// only a failure when the pairs pass the two-cycle test for `u(ell)`.
pub fn non_crossing_check(st: &Spacetime, pairs: &[(Vec<f64>, Vec<f64>)], u: &AdmissibleFunction, s: f64) -> Result<CrossingReport> {
    let mut mids = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        match st.time_separation(x, y)? {
            ExtendedReal::Finite(l) if l > 0.0 => {}
            _ => return Err(LotError::precondition("non-crossing needs timelike pairs")),
        }
        mids.push(st.midpoint(x, y, s)?);
    }
    let cost = |x: &[f64], y: &[f64]| -> Result<ExtendedReal> {
        Ok(match st.time_separation(x, y)? {
            ExtendedReal::Finite(l) => u.eval_closed(l),
            other => other,
        })
    };
    let scale = pairs.iter().flat_map(|(x, y)| x.iter().chain(y)).fold(1.0f64, |m, c| m.max(c.abs()));
    let mut collisions = Vec::new();
    for a in 0..pairs.len() {
        for b in a + 1..pairs.len() {
            if pairs[a] == pairs[b] || euclidean_distance(&mids[a], &mids[b]) > 1e-12 * scale {
                continue;
            }
            let (x, y) = &pairs[a];
            let (xp, yp) = &pairs[b];
            let on = cost(x, y)?.add_pessimistic(cost(xp, yp)?);
            let off = cost(x, yp)?.add_pessimistic(cost(xp, y)?);
            let margin = match (on, off) {
                (_, ExtendedReal::NegInf) => f64::INFINITY,
                (on, off) => on.to_f64() - off.to_f64(),
            };
            collisions.push(Collision { first: a, second: b, margin, hypothesis_holds: margin >= -1e-12 });
        }
    }
    let ok = collisions.iter().all(|c| !c.hypothesis_holds);
    Ok(CrossingReport { collisions, ok })
}

/// Closed-form potentials with exact gradients and Hessians.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PotentialField {
    /// `<a, x> + b`
    Affine { a: Vec<f64>, b: f64 },
    /// `1/2 <x, Q x> + <a, x> + b`, `Q` symmetric, row-major
    Quadratic { q: Vec<f64>, a: Vec<f64>, b: f64 },
}

impl PotentialField {
    pub fn affine(a: Vec<f64>, b: f64) -> Self {
        PotentialField::Affine { a, b }
    }

    pub fn quadratic(q: DMatrix<f64>, a: Vec<f64>, b: f64) -> Result<Self> {
        let n = a.len();
        if q.nrows() != n || q.ncols() != n {
            return Err(LotError::DimensionMismatch { expected: n, found: q.nrows() });
        }
        if (&q - q.transpose()).amax() > 1e-12 * q.amax().max(1.0) {
            return Err(LotError::domain("quadratic potential needs a symmetric matrix"));
        }
        Ok(PotentialField::Quadratic { q: q.transpose().as_slice().to_vec(), a, b })
    }

    pub fn dim(&self) -> usize {
        match self {
            PotentialField::Affine { a, .. } | PotentialField::Quadratic { a, .. } => a.len(),
        }
    }

    fn q_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        match self {
            PotentialField::Affine { .. } => DMatrix::zeros(n, n),
            PotentialField::Quadratic { q, .. } => DMatrix::from_row_slice(n, n, q),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            PotentialField::Affine { a, b } => a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() + b,
            PotentialField::Quadratic { a, b, .. } => {
                let xv = DVector::from_column_slice(x);
                0.5 * xv.dot(&(self.q_matrix() * &xv)) + a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() + b
            }
        }
    }

    /// Coordinate gradient, a covector.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            PotentialField::Affine { a, .. } => a.clone(),
            PotentialField::Quadratic { a, .. } => {
                let g = self.q_matrix() * DVector::from_column_slice(x);
                g.iter().zip(a).map(|(g, a)| g + a).collect()
            }
        }
    }

    pub fn hessian(&self) -> DMatrix<f64> {
        self.q_matrix()
    }

    pub fn label(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("|");
        match self {
            PotentialField::Affine { a, b } => format!("affine:a={},b={b}", join(a)),
            PotentialField::Quadratic { q, a, b } => format!("quad:q={},a={},b={b}", join(q), join(a)),
        }
    }
}

/// Uniform densities on simple regions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Density {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Density {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(LotError::DimensionMismatch { expected: lo.len(), found: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(LotError::domain("box needs lo < hi in every coordinate"));
        }
        Ok(Density::Box { lo, hi })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(LotError::domain("ball needs a finite centre and positive radius"));
        }
        Ok(Density::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            Density::Box { lo, .. } => lo.len(),
            Density::Ball { center, .. } => center.len(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Density::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            Density::Ball { center, radius } => crate::sampling::ball_volume(center.len(), *radius),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Density::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(x, (a, b))| *a <= *x && *x <= *b),
            Density::Ball { center, radius } => euclidean_distance(x, center) <= *radius,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        if self.contains(x) {
            1.0 / self.volume()
        } else {
            0.0
        }
    }

    pub fn label(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("|");
        match self {
            Density::Box { lo, hi } => format!("box:lo={},hi={}", join(lo), join(hi)),
            Density::Ball { center, radius } => format!("ball:center={},r={radius}", join(center)),
        }
    }
}

/// `v = DH(w)` for the Hamiltonian of `u_lambda`.
pub fn transport_velocity(grad: &[f64], u: &AdmissibleFunction, lambda: f64) -> Result<Vec<f64>> {
    hamiltonian_gradient(grad, &u.rescale(lambda)?.conjugate())
}

/// The map family `F_s(x) = x + s v(x)` generated by a potential.
#[derive(Debug, Clone)]
pub struct TransportMap {
    phi: PotentialField,
    u_star: AdmissibleFunction,
    lambda: f64,
}

impl TransportMap {
    pub fn new(phi: PotentialField, u: &AdmissibleFunction, lambda: f64) -> Result<Self> {
        let u_star = u.rescale(lambda)?.conjugate();
        Ok(TransportMap { phi, u_star, lambda })
    }

    pub fn potential(&self) -> &PotentialField {
        &self.phi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn velocity(&self, x: &[f64]) -> Result<Vec<f64>> {
        hamiltonian_gradient(&self.phi.gradient(x), &self.u_star)
    }

    /// `Dv = D^2H(Dphi(x)) Hess phi`.
    pub fn velocity_jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(hamiltonian_hessian(&self.phi.gradient(x), &self.u_star)? * self.phi.hessian())
    }

    pub fn image(&self, x: &[f64], s: f64) -> Result<Vec<f64>> {
        let v = self.velocity(x)?;
        Ok(x.iter().zip(&v).map(|(x, v)| x + s * v).collect())
    }

    pub fn jacobian(&self, x: &[f64], s: f64) -> Result<DMatrix<f64>> {
        let n = self.dim();
        Ok(DMatrix::identity(n, n) + self.velocity_jacobian(x)? * s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransportMapSample {
    pub s: f64,
    pub points: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
    pub velocities: Vec<Vec<f64>>,
    pub images: Vec<Vec<f64>>,
    #[serde(skip)]
    pub velocity_jacobians: Vec<DMatrix<f64>>,
    pub determinants: Vec<f64>,
}

pub fn transport_map(map: &TransportMap, s: f64, points: &[Vec<f64>], masses: &[f64]) -> Result<TransportMapSample> {
    if points.len() != masses.len() {
        return Err(LotError::InvalidMeasure("points and masses differ in length".into()));
    }
    let n = map.dim();
    let mut sample = TransportMapSample {
        s,
        points: points.to_vec(),
        masses: masses.to_vec(),
        velocities: Vec::with_capacity(points.len()),
        images: Vec::with_capacity(points.len()),
        velocity_jacobians: Vec::with_capacity(points.len()),
        determinants: Vec::with_capacity(points.len()),
    };
    for (k, x) in points.iter().enumerate() {
        if x.len() != n {
            return Err(LotError::DimensionMismatch { expected: n, found: x.len() });
        }
        let v = map.velocity(x)?;
        let dv = map.velocity_jacobian(x)?;
        let det = (DMatrix::identity(n, n) + &dv * s).determinant();
        if s < 1.0 && !(det > 0.0) {
            return Err(LotError::precondition(format!("map Jacobian degenerates at particle {k} (det {det:e})")));
        }
        sample.images.push(x.iter().zip(&v).map(|(x, v)| x + s * v).collect());
        sample.velocities.push(v);
        sample.velocity_jacobians.push(dv);
        sample.determinants.push(det);
    }
    Ok(sample)
}

fn finite_difference_jacobian(map: &TransportMap, x: &[f64], s: f64, h: f64) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    for c in 0..n {
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[c] += h;
        minus[c] -= h;
        let fp = map.image(&plus, s)?;
        let fm = map.image(&minus, s)?;
        for r in 0..n {
            jac[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Splits the box of a uniform density into `cells^n` sub-boxes and, on each,
/// compares `int_B rho_s(F_s(x)) |det DF_s(x)| dx` against the source mass of
/// `B`. Here `rho_s(F_s(x)) = rho0(x) / det A_s(x)` uses the analytic
/// Jacobian while `DF_s` comes from central differences of the map itself.
/// Returns the largest relative mismatch.
pub fn monge_ampere_residual(map: &TransportMap, rho0: &Density, s: f64, per_axis: usize, cells: usize) -> Result<f64> {
    let Density::Box { lo, hi } = rho0 else {
        return Err(LotError::domain("mapped-mass check needs a box density"));
    };
    let n = lo.len();
    if n != map.dim() {
        return Err(LotError::DimensionMismatch { expected: map.dim(), found: n });
    }
    let h = 1e-5 * lo.iter().chain(hi).fold(1.0f64, |m, c| m.max(c.abs()));
    let mut worst: f64 = 0.0;
    for cell in 0..cells.pow(n as u32) {
        let mut rest = cell;
        let mut clo = Vec::with_capacity(n);
        let mut chi = Vec::with_capacity(n);
        for d in 0..n {
            let k = rest % cells;
            rest /= cells;
            let w = (hi[d] - lo[d]) / cells as f64;
            clo.push(lo[d] + k as f64 * w);
            chi.push(lo[d] + (k + 1) as f64 * w);
        }
        let (pts, wts) = gauss_box(&clo, &chi, per_axis);
        let mut source = 0.0;
        let mut mapped = 0.0;
        for (x, w) in pts.iter().zip(&wts) {
            let r0 = rho0.value(x);
            let analytic = map.jacobian(x, s)?.determinant();
            if !(analytic > 0.0) {
                return Err(LotError::precondition("map Jacobian degenerates inside the box"));
            }
            let geometric = finite_difference_jacobian(map, x, s, h)?.determinant().abs();
            source += w * r0;
            mapped += w * (r0 / analytic) * geometric;
        }
        if !(source > 0.0) {
            return Err(LotError::Solver("quadrature cell carries no mass".into()));
        }
        worst = worst.max((mapped - source).abs() / source);
    }
    Ok(worst)
}

/// Timelike check for the raw covector used by a potential at `x`.
pub fn gradient_is_past_timelike(phi: &PotentialField, x: &[f64]) -> bool {
    let g = phi.gradient(x);
    g[0] < 0.0 && lorentz_square(&g) > 0.0
}

/// Cost matrix of `u(ell)` between two measures, exposed for path checks.
pub fn path_cost(st: &Spacetime, mu: &DiscreteMeasure, nu: &DiscreteMeasure, u: &AdmissibleFunction) -> Result<Vec<ExtendedReal>> {
    Ok(gains(&separations(st, mu, nu)?, u))
}
