//! Minkowski space with signature (+,-,...,-), optionally weighted by a
//! potential `V` and a synthetic dimension `N`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{LotError, Result};
use crate::extended::{ExtendedReal, NegInf};
use crate::sampling::halton_box;

/// Relative width of the band around the light cone treated as null.
pub const LIGHT_CONE_TOLERANCE: f64 = 1e-12;

pub fn lorentz_square(v: &[f64]) -> f64 {
    v[0] * v[0] - v[1..].iter().map(|c| c * c).sum::<f64>()
}

pub fn lorentz_pairing(v: &[f64], w: &[f64]) -> f64 {
    v[0] * w[0] - v[1..].iter().zip(&w[1..]).map(|(a, b)| a * b).sum::<f64>()
}

/// Index lowering (equivalently raising) by the diagonal Minkowski metric.
pub fn lower_index(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    for c in &mut out[1..] {
        *c = -*c;
    }
    out
}

pub fn euclidean_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Weight {
    None,
    /// `c * t`
    Linear {
        c: f64,
    },
    /// `alpha/2 * (t^2 + |x|^2)`
    Quadratic {
        alpha: f64,
    },
    /// `amp * exp(-|z|^2 / (2 width^2))`, Euclidean norm of the full coordinate vector
    Gaussian {
        amp: f64,
        width: f64,
    },
}

impl Weight {
    pub fn is_none(&self) -> bool {
        matches!(self, Weight::None)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Weight::None => 0.0,
            Weight::Linear { c } => c * x[0],
            Weight::Quadratic { alpha } => 0.5 * alpha * x.iter().map(|c| c * c).sum::<f64>(),
            Weight::Gaussian { amp, width } => amp * (-x.iter().map(|c| c * c).sum::<f64>() / (2.0 * width * width)).exp(),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let n = x.len();
        match *self {
            Weight::None => DVector::zeros(n),
            Weight::Linear { c } => {
                let mut g = DVector::zeros(n);
                g[0] = c;
                g
            }
            Weight::Quadratic { alpha } => DVector::from_iterator(n, x.iter().map(|c| alpha * c)),
            Weight::Gaussian { width, .. } => {
                let v = self.value(x);
                DVector::from_iterator(n, x.iter().map(|c| -v * c / (width * width)))
            }
        }
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        match *self {
            Weight::None | Weight::Linear { .. } => DMatrix::zeros(n, n),
            Weight::Quadratic { alpha } => DMatrix::identity(n, n) * alpha,
            Weight::Gaussian { width, .. } => {
                let v = self.value(x);
                let z = DVector::from_column_slice(x);
                let w2 = width * width;
                (&z * z.transpose()) * (v / (w2 * w2)) - DMatrix::identity(n, n) * (v / w2)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Weight::None => "none".into(),
            Weight::Linear { c } => format!("linear:c={c}"),
            Weight::Quadratic { alpha } => format!("quad:alpha={alpha}"),
            Weight::Gaussian { amp, width } => format!("gauss:amp={amp},width={width}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spacetime {
    dim: usize,
    weight: Weight,
    synthetic_dim: f64,
}

impl Spacetime {
    /// Flat Minkowski space of total dimension `dim` (time plus `dim - 1` space).
    pub fn minkowski(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(LotError::domain(format!("spacetime dimension must be at least 2 (got {dim})")));
        }
        Ok(Spacetime { dim, weight: Weight::None, synthetic_dim: f64::INFINITY })
    }

    pub fn weighted(dim: usize, weight: Weight, synthetic_dim: f64) -> Result<Self> {
        Self::minkowski(dim)?;
        if synthetic_dim.is_nan() || synthetic_dim < dim as f64 {
            return Err(LotError::domain(format!("synthetic dimension {synthetic_dim} is below the manifold dimension {dim}")));
        }
        if synthetic_dim == dim as f64 && !weight.is_none() {
            return Err(LotError::domain("synthetic dimension equal to the manifold dimension needs V = 0"));
        }
        if let Weight::Gaussian { width, .. } = weight {
            if !(width > 0.0) {
                return Err(LotError::domain("gaussian weight needs a positive width"));
            }
        }
        Ok(Spacetime { dim, weight, synthetic_dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn synthetic_dim(&self) -> f64 {
        self.synthetic_dim
    }

    pub fn label(&self) -> String {
        let n = if self.synthetic_dim.is_infinite() { "inf".to_string() } else { self.synthetic_dim.to_string() };
        format!("minkowski:{} V={} N={}", self.dim, self.weight.label(), n)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(LotError::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        Ok(())
    }

    /// Lorentzian time separation: the proper time from `x` to `y` when
    /// `y` lies in the causal future of `x`, and `-inf` otherwise.
    pub fn time_separation(&self, x: &[f64], y: &[f64]) -> Result<ExtendedReal> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(separation(x, y))
    }

    pub fn ell_plus(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.time_separation(x, y)?.finite().unwrap_or(0.0))
    }

    pub fn causal(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        Ok(!self.time_separation(x, y)?.is_neg_inf())
    }

    /// Point at parameter `s` on the straight causal segment from `x` to `y`.
    pub fn midpoint(&self, x: &[f64], y: &[f64], s: f64) -> Result<Vec<f64>> {
        if self.time_separation(x, y)?.is_neg_inf() {
            return Err(LotError::domain("midpoint requested between causally unrelated events"));
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(LotError::domain(format!("interpolation parameter {s} outside [0, 1]")));
        }
        Ok(lerp(x, y, s))
    }

    pub fn exp_map(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        self.check_dim(v)?;
        Ok(x.iter().zip(v).map(|(a, b)| a + b).collect())
    }

    /// Weighted Ricci curvature `Hess V(v,v) - (dV(v))^2 / (N - n)` of the
    /// flat metric; the last term drops when `N` is infinite.
    pub fn bakry_emery_ricci(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(v)?;
        let vv = DVector::from_column_slice(v);
        let hess = (vv.transpose() * self.weight.hessian(x) * &vv)[(0, 0)];
        if self.synthetic_dim.is_infinite() {
            return Ok(hess);
        }
        let gap = self.synthetic_dim - self.dim as f64;
        if gap == 0.0 {
            return Ok(hess);
        }
        let dv = self.weight.gradient(x).dot(&vv);
        Ok(hess - dv * dv / gap)
    }

    /// Sampled infimum of `Ric(v,v) / g(v,v)` over unit timelike `v` at
    /// `samples` Halton points of the box and a fixed rapidity grid.
    pub fn timelike_ricci_lower_bound(&self, lo: &[f64], hi: &[f64], samples: usize) -> Result<f64> {
        self.check_dim(lo)?;
        self.check_dim(hi)?;
        if samples == 0 {
            return Err(LotError::domain("need at least one sample point"));
        }
        let directions = spatial_directions(self.dim - 1);
        let mut best = f64::INFINITY;
        for x in halton_box(lo, hi, samples).iter().chain([lo.to_vec(), hi.to_vec()].iter()) {
            for k in 0..=RAPIDITY_STEPS {
                let eta = RAPIDITY_MAX * k as f64 / RAPIDITY_STEPS as f64;
                for dir in &directions {
                    let mut v = vec![eta.cosh()];
                    v.extend(dir.iter().map(|c| c * eta.sinh()));
                    best = best.min(self.bakry_emery_ricci(x, &v)?);
                }
            }
        }
        Ok(best)
    }
}

const RAPIDITY_MAX: f64 = 3.0;
const RAPIDITY_STEPS: usize = 60;

fn spatial_directions(d: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for a in 0..d {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[a] = sign;
            dirs.push(e);
        }
    }
    if d > 1 {
        let norm = (d as f64).sqrt();
        for mask in 0..(1u32 << d) {
            dirs.push((0..d).map(|a| if mask >> a & 1 == 1 { -1.0 / norm } else { 1.0 / norm }).collect());
        }
    }
    dirs
}

pub(crate) fn lerp(x: &[f64], y: &[f64], s: f64) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| (1.0 - s) * a + s * b).collect()
}

/// Time separation without dimension checks; shared with the cost builders.
pub(crate) fn separation(x: &[f64], y: &[f64]) -> ExtendedReal {
    let dt = y[0] - x[0];
    let dx = x[1..].iter().zip(&y[1..]).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
    let scale = dt.abs().max(dx).max(1.0);
    if dt >= dx {
        ExtendedReal::Finite(((dt - dx) * (dt + dx)).sqrt())
    } else if dt >= 0.0 && dx - dt <= LIGHT_CONE_TOLERANCE * scale {
        ExtendedReal::Finite(0.0)
    } else {
        NegInf
    }
}

/// A chain `x_1 <= x_2 <= ... <= bound` in the causal order.
#[derive(Debug, Clone)]
pub struct CausalChain {
    points: Vec<Vec<f64>>,
    bound: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletenessVerdict {
    pub cauchy: bool,
    /// Euclidean diameter of the trailing half of the chain.
    pub tail_diameter: f64,
}

impl CausalChain {
    pub fn new(st: &Spacetime, points: Vec<Vec<f64>>, bound: Vec<f64>) -> Result<Self> {
        for (i, w) in points.windows(2).enumerate() {
            if !st.causal(&w[0], &w[1])? {
                return Err(LotError::precondition(format!("chain order fails between entries {i} and {}", i + 1)));
            }
        }
        if let Some(last) = points.last() {
            if !st.causal(last, &bound)? {
                return Err(LotError::precondition(format!("entry {} is not below the bound", points.len() - 1)));
            }
        }
        Ok(CausalChain { points, bound })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn bound(&self) -> &[f64] {
        &self.bound
    }
}

/// Cauchy test for a sampled sequence: the trailing half must have
/// Euclidean diameter at most `modulus`.
pub fn tail_verdict(points: &[Vec<f64>], modulus: f64) -> CompletenessVerdict {
    let start = points.len() / 2;
    let tail = &points[start..];
    let mut diam: f64 = 0.0;
    for (i, p) in tail.iter().enumerate() {
        for q in &tail[i + 1..] {
            diam = diam.max(euclidean_distance(p, q));
        }
    }
    CompletenessVerdict { cauchy: diam <= modulus, tail_diameter: diam }
}

pub fn check_forward_completeness(chain: &CausalChain, modulus: f64) -> CompletenessVerdict {
    tail_verdict(&chain.points, modulus)
}

/// The causal diamond `J(p, q)` of events between `p` and `q`.
#[derive(Debug, Clone)]
pub struct CausalDiamond {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl CausalDiamond {
    pub fn new(st: &Spacetime, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if !st.causal(&lower, &upper)? {
            return Err(LotError::precondition("diamond corners are not causally related"));
        }
        Ok(CausalDiamond { lower, upper })
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        !separation(&self.lower, z).is_neg_inf() && !separation(z, &self.upper).is_neg_inf()
    }

    /// Up to `count` diamond points from the Halton sequence on its bounding box.
    pub fn sample(&self, count: usize) -> Vec<Vec<f64>> {
        let half = 0.5 * (self.upper[0] - self.lower[0]);
        let centre: Vec<f64> = lerp(&self.lower, &self.upper, 0.5);
        let lo: Vec<f64> = centre.iter().map(|c| c - half).collect();
        let hi: Vec<f64> = centre.iter().map(|c| c + half).collect();
        let mut out = Vec::with_capacity(count);
        let mut k = 0u64;
        while out.len() < count && k < 64 * count as u64 + 64 {
            let p: Vec<f64> =
                crate::sampling::halton(k, lo.len()).into_iter().enumerate().map(|(d, t)| lo[d] + t * (hi[d] - lo[d])).collect();
            k += 1;
            if self.contains(&p) {
                out.push(p);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat() -> Spacetime {
        Spacetime::minkowski(2).unwrap()
    }

    #[test]
    fn time_separation_examples() {
        let st = flat();
        assert_eq!(st.time_separation(&[0.0, 0.0], &[2.0, 0.0]).unwrap(), ExtendedReal::Finite(2.0));
        assert_eq!(st.time_separation(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), ExtendedReal::Finite(0.0));
        assert_eq!(st.time_separation(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), NegInf);
        assert_eq!(st.time_separation(&[0.0, 0.0], &[-1.0, 0.0]).unwrap(), NegInf);
        assert!(st.time_separation(&[0.0, 0.0], &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn light_cone_band() {
        let st = flat();
        let y = [1.0, 1.0 + 1e-14];
        assert_eq!(st.time_separation(&[0.0, 0.0], &y).unwrap(), ExtendedReal::Finite(0.0));
        let y = [1.0, 1.0 + 1e-9];
        assert_eq!(st.time_separation(&[0.0, 0.0], &y).unwrap(), NegInf);
    }

    #[test]
    fn midpoint_needs_causal_pair() {
        let st = flat();
        assert_eq!(st.midpoint(&[0.0, 0.0], &[2.0, 1.0], 0.5).unwrap(), vec![1.0, 0.5]);
        assert!(st.midpoint(&[0.0, 0.0], &[1.0, 3.0], 0.5).is_err());
    }

    #[test]
    fn ricci_of_quadratic_weight() {
        let st = Spacetime::weighted(2, Weight::Quadratic { alpha: 0.3 }, f64::INFINITY).unwrap();
        assert!((st.bakry_emery_ricci(&[0.0, 0.0], &[1.0, 0.0]).unwrap() - 0.3).abs() < 1e-15);
        let bound = st.timelike_ricci_lower_bound(&[-1.0, -1.0], &[1.0, 1.0], 64).unwrap();
        assert!((bound - 0.3).abs() < 1e-12);
    }

    #[test]
    fn ricci_of_linear_weight_with_finite_dimension() {
        let st = Spacetime::weighted(2, Weight::Linear { c: 0.5 }, 3.0).unwrap();
        assert!((st.bakry_emery_ricci(&[0.3, 0.1], &[1.0, 0.0]).unwrap() + 0.25).abs() < 1e-15);
    }

    #[test]
    fn synthetic_dimension_rules() {
        assert!(Spacetime::weighted(2, Weight::Linear { c: 1.0 }, 2.0).is_err());
        assert!(Spacetime::weighted(2, Weight::None, 2.0).is_ok());
        assert!(Spacetime::weighted(3, Weight::None, 2.5).is_err());
    }

    #[test]
    fn geometric_chain_is_cauchy() {
        let st = flat();
        let pts: Vec<Vec<f64>> = (1..=40).map(|k| vec![1.0 - 0.5f64.powi(k), 0.0]).collect();
        let chain = CausalChain::new(&st, pts, vec![1.0, 0.0]).unwrap();
        let v = check_forward_completeness(&chain, 1e-3);
        assert!(v.cauchy);
        assert!(v.tail_diameter < 1e-5);
    }

    #[test]
    fn alternating_sequence_is_rejected() {
        let st = flat();
        let a = vec![0.0, 0.0];
        let b = vec![1.0, 0.0];
        let pts: Vec<Vec<f64>> = (0..10).map(|k| if k % 2 == 0 { a.clone() } else { b.clone() }).collect();
        match CausalChain::new(&st, pts.clone(), vec![2.0, 0.0]) {
            Err(LotError::Precondition(msg)) => assert!(msg.contains("entries 1 and 2")),
            other => panic!("expected an ordering violation, got {other:?}"),
        }
        assert!(!tail_verdict(&pts, 1e-3).cauchy);
    }

    #[test]
    fn diamond_points_are_bounded() {
        let st = flat();
        let d = CausalDiamond::new(&st, vec![0.0, 0.0], vec![2.0, 0.0]).unwrap();
        let pts = d.sample(2000);
        assert_eq!(pts.len(), 2000);
        assert!(pts.iter().all(|p| euclidean_distance(p, &[0.0, 0.0]) <= 2.0 + 1e-12));
        assert!(!d.contains(&[1.0, 1.5]));
    }
}
