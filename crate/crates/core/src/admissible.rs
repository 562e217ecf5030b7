//! Concave profiles `u` and the Lagrangian/Hamiltonian pair they generate.
//!
//! A profile is C^2 on (0, inf) with `u' > 0`, `u'' < 0` and `u'` mapping onto
//! (0, inf). Everything here is closed form: the conjugate is evaluated through
//! `(u')^{-1}`, never by numerical infimization.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{LotError, Result};
use crate::extended::{ExtendedReal, NegInf, PosInf};
use crate::spacetime::{lorentz_square, lower_index};

type Map = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct AdmissibleFunction {
    kind: Arc<Kind>,
}

enum Kind {
    Power(f64),
    Log,
    Shift(AdmissibleFunction, f64),
    Rescale(AdmissibleFunction, f64),
    Conjugate(AdmissibleFunction),
    Custom(CustomParts),
}

/// Hand-supplied profile. The five maps are trusted after a grid check.
pub struct CustomParts {
    pub label: String,
    pub eval: Map,
    pub d1: Map,
    pub d2: Map,
    pub d1_inverse: Map,
    pub at_zero: ExtendedReal,
    pub at_inf: ExtendedReal,
}

impl AdmissibleFunction {
    fn wrap(kind: Kind) -> Self {
        AdmissibleFunction { kind: Arc::new(kind) }
    }

    /// `x^p / p` for `p < 1`, `p != 0`.
    pub fn power(p: f64) -> Result<Self> {
        if !p.is_finite() || p >= 1.0 || p == 0.0 {
            return Err(LotError::domain(format!("power exponent must satisfy p < 1, p != 0 (got {p})")));
        }
        Ok(Self::wrap(Kind::Power(p)))
    }

    /// `1/2 + log x`, the `p = 0` member of the family.
    pub fn log() -> Self {
        Self::wrap(Kind::Log)
    }

    /// `u_p` for any `p < 1`, dispatching `p = 0` to the logarithm.
    pub fn builtin(p: f64) -> Result<Self> {
        if p == 0.0 {
            Ok(Self::log())
        } else {
            Self::power(p)
        }
    }

    /// The normalisation with `u(1) = 0`: `(x^p - 1)/p`, or `log x` at `p = 0`.
    pub fn shifted_builtin(p: f64) -> Result<Self> {
        if p == 0.0 {
            Self::log().shift(-0.5)
        } else {
            let u = Self::power(p)?;
            u.shift(-1.0 / p)
        }
    }

    pub fn shift(&self, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(LotError::domain(format!("shift must be finite (got {c})")));
        }
        Ok(Self::wrap(Kind::Shift(self.clone(), c)))
    }

    /// `x -> u(x / lambda)`.
    pub fn rescale(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(LotError::domain(format!("rescale factor must be positive and finite (got {lambda})")));
        }
        Ok(Self::wrap(Kind::Rescale(self.clone(), lambda)))
    }

    /// Concave conjugate `x y - u(y)` minimised over `y`, via `y = (u')^{-1}(x)`.
    pub fn conjugate(&self) -> Self {
        Self::wrap(Kind::Conjugate(self.clone()))
    }

    pub fn custom(parts: CustomParts) -> Result<Self> {
        let u = Self::wrap(Kind::Custom(parts));
        u.validate_on_grid(1000)?;
        Ok(u)
    }

    /// Spot-check the structural axioms on `n` log-spaced points in `[1e-6, 1e6]`.
    pub fn validate_on_grid(&self, n: usize) -> Result<()> {
        let mut last_d1 = f64::INFINITY;
        for k in 0..n {
            let x = 10f64.powf(-6.0 + 12.0 * k as f64 / (n - 1).max(1) as f64);
            let (v, g, h) = (self.eval(x), self.d1(x), self.d2(x));
            if !v.is_finite() || !(g > 0.0 && g.is_finite()) || !(h < 0.0) {
                return Err(LotError::domain(format!("{}: axioms fail at x = {x:e} (u = {v}, u' = {g}, u'' = {h})", self.label())));
            }
            if g > last_d1 {
                return Err(LotError::domain(format!("{}: u' increases near x = {x:e}", self.label())));
            }
            last_d1 = g;
            let back = self.d1_inverse(g);
            if !((back - x).abs() <= 1e-6 * x.max(1.0)) {
                return Err(LotError::domain(format!("{}: (u')^-1 does not invert u' at x = {x:e} (got {back:e})", self.label())));
            }
            // grid points double as slopes: u' must reach each of them
            let inv = self.d1_inverse(x);
            if !(inv.is_finite() && inv > 0.0) {
                return Err(LotError::domain(format!("{}: u' does not reach {x:e}", self.label())));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &*self.kind {
            Kind::Power(p) => x.powf(*p) / p,
            Kind::Log => 0.5 + x.ln(),
            Kind::Shift(u, c) => u.eval(x) + c,
            Kind::Rescale(u, l) => u.eval(x / l),
            Kind::Conjugate(u) => {
                let y = u.d1_inverse(x);
                x * y - u.eval(y)
            }
            Kind::Custom(c) => (c.eval)(x),
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match &*self.kind {
            Kind::Power(p) => x.powf(p - 1.0),
            Kind::Log => 1.0 / x,
            Kind::Shift(u, _) => u.d1(x),
            Kind::Rescale(u, l) => u.d1(x / l) / l,
            Kind::Conjugate(u) => u.d1_inverse(x),
            Kind::Custom(c) => (c.d1)(x),
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match &*self.kind {
            Kind::Power(p) => (p - 1.0) * x.powf(p - 2.0),
            Kind::Log => -1.0 / (x * x),
            Kind::Shift(u, _) => u.d2(x),
            Kind::Rescale(u, l) => u.d2(x / l) / (l * l),
            // derivative of an inverse function
            Kind::Conjugate(u) => 1.0 / u.d2(u.d1_inverse(x)),
            Kind::Custom(c) => (c.d2)(x),
        }
    }

    pub fn d1_inverse(&self, y: f64) -> f64 {
        match &*self.kind {
            Kind::Power(p) => y.powf(1.0 / (p - 1.0)),
            Kind::Log => 1.0 / y,
            Kind::Shift(u, _) => u.d1_inverse(y),
            Kind::Rescale(u, l) => l * u.d1_inverse(l * y),
            Kind::Conjugate(u) => u.d1(y),
            Kind::Custom(c) => (c.d1_inverse)(y),
        }
    }

    /// Limit of `u(x)` as `x -> 0+`.
    pub fn value_at_zero(&self) -> ExtendedReal {
        match &*self.kind {
            Kind::Power(p) => {
                if *p > 0.0 {
                    ExtendedReal::Finite(0.0)
                } else {
                    NegInf
                }
            }
            Kind::Log => NegInf,
            Kind::Shift(u, c) => u.value_at_zero().add_pessimistic(ExtendedReal::Finite(*c)),
            Kind::Rescale(u, _) => u.value_at_zero(),
            Kind::Conjugate(u) => -u.value_at_inf(),
            Kind::Custom(c) => c.at_zero,
        }
    }

    /// Limit of `u(x)` as `x -> inf`.
    pub fn value_at_inf(&self) -> ExtendedReal {
        match &*self.kind {
            Kind::Power(p) => {
                if *p > 0.0 {
                    PosInf
                } else {
                    ExtendedReal::Finite(0.0)
                }
            }
            Kind::Log => PosInf,
            Kind::Shift(u, c) => match u.value_at_inf() {
                PosInf => PosInf,
                other => other.add_pessimistic(ExtendedReal::Finite(*c)),
            },
            Kind::Rescale(u, _) => u.value_at_inf(),
            Kind::Conjugate(u) => -u.value_at_zero(),
            Kind::Custom(c) => c.at_inf,
        }
    }

    /// `u` on the closed half-line, with `u(0)` read as the limit from the right.
    pub fn eval_closed(&self, x: f64) -> ExtendedReal {
        if x == 0.0 {
            self.value_at_zero()
        } else {
            ExtendedReal::from_f64(self.eval(x))
        }
    }

    pub fn checked_eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || x.is_infinite() {
            return Err(LotError::domain(format!("{} evaluated at x = {x}, outside (0, inf)", self.label())));
        }
        Ok(self.eval(x))
    }

    /// Canonical text form; parsing it gives back an equal function.
    pub fn label(&self) -> String {
        match &*self.kind {
            Kind::Power(p) => format!("u_p:{p}"),
            Kind::Log => "u_0".to_string(),
            Kind::Shift(u, c) => format!("shift({},{c})", u.label()),
            Kind::Rescale(u, l) => format!("rescale({},{l})", u.label()),
            Kind::Conjugate(u) => format!("conjugate({})", u.label()),
            Kind::Custom(c) => c.label.clone(),
        }
    }

    /// The exponent when this is a bare member of the power/log family.
    pub fn family_exponent(&self) -> Option<f64> {
        match &*self.kind {
            Kind::Power(p) => Some(*p),
            Kind::Log => Some(0.0),
            _ => None,
        }
    }
}

impl fmt::Debug for AdmissibleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AdmissibleFunction({})", self.label())
    }
}

/// Conjugate exponent `q` with `1/p + 1/q = 1`; the log profile is its own partner.
pub fn dual_exponent(p: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p / (p - 1.0)
    }
}

fn lorentz_norm(v: &[f64]) -> f64 {
    lorentz_square(v).max(0.0).sqrt()
}

/// `L(v) = -u(|v|)` on the closed future cone, `+inf` elsewhere.
pub fn lagrangian(v: &[f64], u: &AdmissibleFunction) -> ExtendedReal {
    let spatial = v[1..].iter().map(|c| c * c).sum::<f64>().sqrt();
    let scale = v.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    if v[0] + 1e-12 * scale < spatial {
        return PosInf;
    }
    -u.eval_closed(lorentz_norm(v))
}

fn future_timelike(v: &[f64]) -> bool {
    v[0] > 0.0 && lorentz_square(v) > 0.0
}

/// `DL(v) = -u'(|v|) v_flat / |v|` for future timelike `v`.
pub fn lagrangian_gradient(v: &[f64], u: &AdmissibleFunction) -> Result<Vec<f64>> {
    if !future_timelike(v) {
        return Err(LotError::domain("Lagrangian gradient needs a future timelike vector"));
    }
    let norm = lorentz_norm(v);
    let k = -u.d1(norm) / norm;
    Ok(lower_index(v).into_iter().map(|c| k * c).collect())
}

fn check_past_timelike(w: &[f64]) -> Result<f64> {
    let sq = lorentz_square(w);
    if !(w[0] < 0.0) || !(sq > 0.0) {
        return Err(LotError::domain(format!("Hamiltonian needs a past timelike covector (time component {}, square {sq})", w[0])));
    }
    Ok(sq.sqrt())
}

/// `DH(w) = -(u*)'(|w|) w_sharp / |w|`, where `u_star` is the conjugate profile.
pub fn hamiltonian_gradient(w: &[f64], u_star: &AdmissibleFunction) -> Result<Vec<f64>> {
    let norm = check_past_timelike(w)?;
    let k = -u_star.d1(norm) / norm;
    // raising and lowering coincide for the diagonal Minkowski metric
    Ok(lower_index(w).into_iter().map(|c| k * c).collect())
}

/// Second derivative of the Hamiltonian at a past timelike covector.
pub fn hamiltonian_hessian(w: &[f64], u_star: &AdmissibleFunction) -> Result<DMatrix<f64>> {
    let norm = check_past_timelike(w)?;
    let n = w.len();
    let f = u_star.d1(norm);
    let fp = u_star.d2(norm);
    let sharp = DVector::from_vec(lower_index(w));
    let mut h = (&sharp * sharp.transpose()) * ((f - norm * fp) / norm.powi(3));
    for a in 0..n {
        let eta = if a == 0 { 1.0 } else { -1.0 };
        h[(a, a)] -= f / norm * eta;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_exponents_outside_the_family() {
        assert!(AdmissibleFunction::power(1.0).is_err());
        assert!(AdmissibleFunction::power(0.0).is_err());
        assert!(AdmissibleFunction::power(f64::NAN).is_err());
        assert!(AdmissibleFunction::builtin(0.0).is_ok());
    }

    #[test]
    fn conjugate_of_half_power_is_minus_one_power() {
        let u = AdmissibleFunction::power(0.5).unwrap().conjugate();
        let q = AdmissibleFunction::power(-1.0).unwrap();
        for &x in &[1e-3, 0.2, 1.0, 7.5, 1e3] {
            assert_relative_eq!(u.eval(x), q.eval(x), max_relative = 1e-13);
            assert_relative_eq!(u.d1(x), q.d1(x), max_relative = 1e-13);
            assert_relative_eq!(u.d2(x), q.d2(x), max_relative = 1e-12);
        }
        assert_eq!(u.value_at_zero(), q.value_at_zero());
        assert_eq!(u.value_at_inf(), q.value_at_inf());
    }

    #[test]
    fn log_profile_is_self_dual() {
        let u = AdmissibleFunction::log();
        let c = u.conjugate();
        for &x in &[1e-2, 0.5, 1.0, 3.0, 40.0] {
            assert_relative_eq!(c.eval(x), u.eval(x), epsilon = 1e-13);
        }
    }

    #[test]
    fn rescale_derivatives() {
        let u = AdmissibleFunction::power(0.5).unwrap().rescale(2.0).unwrap();
        // u(x) = 2 sqrt(x/2)
        assert_relative_eq!(u.eval(8.0), 4.0, epsilon = 1e-14);
        assert_relative_eq!(u.d1(8.0), 0.25, epsilon = 1e-14);
        assert_relative_eq!(u.d1_inverse(0.25), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn shifted_profiles_vanish_at_one() {
        for p in [-2.0, -0.5, 0.0, 0.5] {
            let u = AdmissibleFunction::shifted_builtin(p).unwrap();
            assert!(u.eval(1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn custom_profile_is_grid_checked() {
        let good = CustomParts {
            label: "atan-ish".into(),
            eval: Arc::new(|x: f64| x.ln()),
            d1: Arc::new(|x: f64| 1.0 / x),
            d2: Arc::new(|x: f64| -1.0 / (x * x)),
            d1_inverse: Arc::new(|y: f64| 1.0 / y),
            at_zero: NegInf,
            at_inf: PosInf,
        };
        assert!(AdmissibleFunction::custom(good).is_ok());
        let convex = CustomParts {
            label: "square".into(),
            eval: Arc::new(|x: f64| x * x),
            d1: Arc::new(|x: f64| 2.0 * x),
            d2: Arc::new(|_| 2.0),
            d1_inverse: Arc::new(|y: f64| y / 2.0),
            at_zero: ExtendedReal::Finite(0.0),
            at_inf: PosInf,
        };
        assert!(AdmissibleFunction::custom(convex).is_err());
    }

    #[test]
    fn lagrangian_outside_cone_is_plus_infinity() {
        let u = AdmissibleFunction::log();
        assert_eq!(lagrangian(&[1.0, 2.0], &u), PosInf);
        assert_eq!(lagrangian(&[-1.0, 0.0], &u), PosInf);
        assert_eq!(lagrangian(&[1.0, 1.0], &u), PosInf);
        assert_relative_eq!(lagrangian(&[1.0, 0.0], &u).to_f64(), -0.5);
    }

    #[test]
    fn hamiltonian_rejects_null_and_future_covectors() {
        let us = AdmissibleFunction::log().conjugate();
        assert!(hamiltonian_gradient(&[-1.0, 1.0], &us).is_err());
        assert!(hamiltonian_gradient(&[1.0, 0.0], &us).is_err());
        assert!(hamiltonian_gradient(&[-1.0, 0.5], &us).is_ok());
    }

    #[test]
    fn gradient_maps_invert_each_other() {
        let u = AdmissibleFunction::power(-0.5).unwrap();
        let us = u.conjugate();
        let w = [-1.3, 0.4, -0.2];
        let v = hamiltonian_gradient(&w, &us).unwrap();
        let back = lagrangian_gradient(&v, &u).unwrap();
        for (a, b) in w.iter().zip(&back) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn hamiltonian_hessian_matches_central_differences() {
        let us = AdmissibleFunction::power(0.5).unwrap().rescale(1.7).unwrap().conjugate();
        let w = [-0.9, 0.3];
        let h = hamiltonian_hessian(&w, &us).unwrap();
        let step = 1e-6;
        for b in 0..2 {
            let mut plus = w;
            let mut minus = w;
            plus[b] += step;
            minus[b] -= step;
            let gp = hamiltonian_gradient(&plus, &us).unwrap();
            let gm = hamiltonian_gradient(&minus, &us).unwrap();
            for a in 0..2 {
                assert_relative_eq!(h[(a, b)], (gp[a] - gm[a]) / (2.0 * step), epsilon = 1e-7);
            }
        }
    }
}
