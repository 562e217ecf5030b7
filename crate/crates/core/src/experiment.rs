//! JSON experiment descriptions for the entropy runs.

use serde::{Deserialize, Serialize};

use crate::entropy::{
    convexity_report, entropy_curve_for, ricci_failure_experiment, ConvexityReport, DensityCloud, EntropyCurve, RicciFailureReport,
    RicciFailureSetup,
};
use crate::error::{LotError, Result};
use crate::geodesic::{transport_map, Density, TransportMap};
use crate::grammar::{parse_density, parse_function, parse_potential, parse_spacetime};
use crate::io::json_error;

fn default_lambda() -> f64 {
    1.0
}
fn default_grid() -> usize {
    11
}
fn default_step() -> f64 {
    1e-2
}
fn default_quadrature() -> usize {
    8
}
fn default_particles() -> usize {
    4096
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Curve(CurveConfig),
    RicciFailure(RicciFailureConfig),
}

/// Entropy along the map of a closed-form potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub name: String,
    pub spacetime: String,
    pub u: String,
    pub phi: String,
    pub rho0: String,
    /// Curvature constant; certified from the weight over the swept region when absent.
    #[serde(default)]
    pub k: Option<f64>,
    /// Normalising constant the map is built with.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_step")]
    pub step: f64,
    /// Gauss points per axis for box densities.
    #[serde(default = "default_quadrature")]
    pub quadrature: usize,
    /// Particle count for ball densities.
    #[serde(default = "default_particles")]
    pub particles: usize,
}

/// Margin-versus-radius sweep for a point where the weighted Ricci curvature
/// drops below `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RicciFailureConfig {
    pub name: String,
    pub spacetime: String,
    pub u: String,
    pub k: f64,
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
    #[serde(default = "default_lambda")]
    pub speed: f64,
    pub radii: Vec<f64>,
    #[serde(default = "default_particles")]
    pub particles: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_step")]
    pub step: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum ExperimentOutcome {
    Curve { name: String, certified_k: Option<f64>, curve: EntropyCurve, report: ConvexityReport },
    RicciFailure { name: String, report: RicciFailureReport },
}

const MAX_GRID: usize = 10_001;
const MAX_PARTICLES: usize = 1 << 20;

fn check(field: &str, ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(LotError::parse(field, message))
    }
}

impl ExperimentConfig {
    /// Parses and validates every embedded spec string.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| json_error("config", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn name(&self) -> &str {
        match self {
            ExperimentConfig::Curve(c) => &c.name,
            ExperimentConfig::RicciFailure(c) => &c.name,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::Curve(c) => {
                let st = parse_spacetime(&c.spacetime)?;
                parse_function(&c.u)?;
                let phi = parse_potential(&c.phi)?;
                let rho = parse_density(&c.rho0)?;
                check("phi", phi.dim() == st.dim(), "potential dimension differs from the spacetime")?;
                check("rho0", rho.dim() == st.dim(), "density dimension differs from the spacetime")?;
                check("lambda", c.lambda > 0.0 && c.lambda.is_finite(), "must be positive")?;
                check("k", c.k.is_none_or(f64::is_finite), "must be finite")?;
                check("grid", (2..=MAX_GRID).contains(&c.grid), "must be between 2 and 10001")?;
                check("step", c.step > 0.0 && c.step < 0.5, "must lie in (0, 0.5)")?;
                check("quadrature", (1..=64).contains(&c.quadrature), "must be between 1 and 64")?;
                check("particles", (2..=MAX_PARTICLES).contains(&c.particles), "must be between 2 and 2^20")
            }
            ExperimentConfig::RicciFailure(c) => {
                let st = parse_spacetime(&c.spacetime)?;
                parse_function(&c.u)?;
                check("k", c.k.is_finite(), "must be finite")?;
                check("base", c.base.len() == st.dim() && c.base.iter().all(|x| x.is_finite()), "needs one finite entry per dimension")?;
                check(
                    "direction",
                    c.direction.len() == st.dim() && c.direction.iter().all(|x| x.is_finite()),
                    "needs one finite entry per dimension",
                )?;
                check("speed", c.speed > 0.0 && c.speed.is_finite(), "must be positive")?;
                check("radii", !c.radii.is_empty() && c.radii.iter().all(|r| *r > 0.0 && r.is_finite()), "needs positive radii")?;
                check("particles", (2..=MAX_PARTICLES).contains(&c.particles), "must be between 2 and 2^20")?;
                check("grid", (2..=MAX_GRID).contains(&c.grid), "must be between 2 and 10001")?;
                check("step", c.step > 0.0 && c.step < 0.5, "must lie in (0, 0.5)")
            }
        }
    }

    pub fn run(&self) -> Result<ExperimentOutcome> {
        self.validate()?;
        match self {
            ExperimentConfig::Curve(c) => run_curve(c),
            ExperimentConfig::RicciFailure(c) => {
                let st = parse_spacetime(&c.spacetime)?;
                let u = parse_function(&c.u)?;
                let setup = RicciFailureSetup {
                    st: &st,
                    u: &u,
                    base: c.base.clone(),
                    direction: c.direction.clone(),
                    speed: c.speed,
                    k: c.k,
                    radii: c.radii.clone(),
                    particles: c.particles,
                    s_grid: unit_grid(c.grid),
                    step: c.step,
                };
                Ok(ExperimentOutcome::RicciFailure { name: c.name.clone(), report: ricci_failure_experiment(&setup)? })
            }
        }
    }
}

fn unit_grid(points: usize) -> Vec<f64> {
    (0..points).map(|k| k as f64 / (points - 1) as f64).collect()
}

fn run_curve(c: &CurveConfig) -> Result<ExperimentOutcome> {
    let st = parse_spacetime(&c.spacetime)?;
    let u = parse_function(&c.u)?;
    let map = TransportMap::new(parse_potential(&c.phi)?, &u, c.lambda)?;
    let rho = parse_density(&c.rho0)?;
    let cloud = DensityCloud::from_density(&rho, c.quadrature, c.particles)?;
    let (k, certified) = match c.k {
        Some(k) => (k, None),
        None => {
            let k = certified_bound(&st, &map, &cloud, &rho)?;
            (k, Some(k))
        }
    };
    let curve = entropy_curve_for(&st, &map, &cloud, &u, k, &unit_grid(c.grid), c.step)?;
    let report = convexity_report(&curve, 1e-6);
    Ok(ExperimentOutcome::Curve { name: c.name.clone(), certified_k: certified, curve, report })
}

/// Sampled weighted-Ricci lower bound over the box holding the source and
/// its image at `s = 1`; straight paths stay inside it.
fn certified_bound(st: &crate::spacetime::Spacetime, map: &TransportMap, cloud: &DensityCloud, rho: &Density) -> Result<f64> {
    let end = transport_map(map, 1.0, &cloud.points, &cloud.masses)?;
    let n = st.dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in cloud.points.iter().chain(&end.images) {
        for d in 0..n {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    if let Density::Ball { center, radius } = rho {
        for d in 0..n {
            lo[d] = lo[d].min(center[d] - radius);
            hi[d] = hi[d].max(center[d] + radius);
        }
    }
    st.timelike_ricci_lower_bound(&lo, &hi, 256)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FORWARD: &str = r#"{
        "kind": "curve",
        "name": "forward",
        "spacetime": "minkowski:2 V=quad:alpha=0.3 N=inf",
        "u": "u_p:0.5",
        "phi": "affine:a=-1|0",
        "rho0": "box:lo=-0.5|-0.5,hi=0.5|0.5"
    }"#;

    #[test]
    fn forward_translation_certifies_alpha() {
        let cfg = ExperimentConfig::parse(FORWARD).unwrap();
        let ExperimentOutcome::Curve { certified_k, report, curve, .. } = cfg.run().unwrap() else { panic!() };
        assert!((certified_k.unwrap() - 0.3).abs() < 1e-12);
        assert!(report.convex);
        assert!((curve.e2_analytic[3] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let err = ExperimentConfig::parse(&FORWARD.replace("\"u\"", "\"uu\"")).unwrap_err();
        assert!(err.to_string().contains("uu"), "{err}");
        let err = ExperimentConfig::parse(&FORWARD.replace("u_p:0.5", "u_p:3")).unwrap_err();
        assert!(matches!(err, LotError::Parse { ref field, .. } if field == "u"), "{err}");
        let err = ExperimentConfig::parse(&FORWARD.replace("curve", "line")).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
