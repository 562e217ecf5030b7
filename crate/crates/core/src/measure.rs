use serde::{Deserialize, Serialize};

use crate::error::{LotError, Result};
use crate::spacetime::euclidean_distance;

/// Atoms closer than this (relative to the coordinate scale) are merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Finitely supported probability measure on spacetime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct DiscreteMeasure {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<RawMeasure> for DiscreteMeasure {
    type Error = LotError;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        DiscreteMeasure::new(raw.points, raw.weights)
    }
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(LotError::InvalidMeasure("no atoms".into()));
        }
        if points.len() != weights.len() {
            return Err(LotError::InvalidMeasure(format!("{} points but {} weights", points.len(), weights.len())));
        }
        let dim = points[0].len();
        if dim < 2 {
            return Err(LotError::InvalidMeasure(format!("points need time and space coordinates (got dimension {dim})")));
        }
        for (k, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(LotError::DimensionMismatch { expected: dim, found: p.len() });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(LotError::InvalidMeasure(format!("point {k} has a non-finite coordinate")));
            }
        }
        for (k, w) in weights.iter().enumerate() {
            if !(*w > 0.0 && w.is_finite()) {
                return Err(LotError::InvalidMeasure(format!("weight {k} is {w}, not positive")));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(LotError::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return Err(LotError::InvalidMeasure(format!("points {j} and {i} coincide")));
                }
            }
        }
        Ok(DiscreteMeasure { points, weights })
    }

    /// Like `new`, after dividing the weights by their sum.
    pub fn normalized(points: Vec<Vec<f64>>, raw: Vec<f64>) -> Result<Self> {
        let total: f64 = raw.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(LotError::InvalidMeasure(format!("weights sum to {total}")));
        }
        Self::new(points, raw.into_iter().map(|w| w / total).collect())
    }

    pub fn dirac(point: Vec<f64>) -> Result<Self> {
        Self::new(vec![point], vec![1.0])
    }

    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        Self::normalized(points, vec![1.0; n])
    }

    /// Builds a measure from weighted atoms, merging coincident locations.
    pub fn from_atoms(atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let scale = atoms.iter().flat_map(|(p, _)| p.iter()).fold(1.0f64, |m, c| m.max(c.abs()));
        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (p, w) in atoms {
            if w <= 0.0 {
                continue;
            }
            match points.iter().position(|q| euclidean_distance(q, &p) <= MERGE_TOLERANCE * scale) {
                Some(k) => weights[k] += w,
                None => {
                    points.push(p);
                    weights.push(w);
                }
            }
        }
        Self::normalized(points, weights)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k]
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }
}

/// Dense transport plan between two discrete measures, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coupling {
    rows: usize,
    cols: usize,
    mass: Vec<f64>,
}

impl Coupling {
    pub fn from_dense(rows: usize, cols: usize, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != rows * cols {
            return Err(LotError::InvalidMeasure(format!("coupling has {} entries, expected {rows} x {cols}", mass.len())));
        }
        if mass.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(LotError::InvalidMeasure("coupling entries must be nonnegative".into()));
        }
        Ok(Coupling { rows, cols, mass })
    }

    /// The product coupling.
    pub fn independent(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Self {
        let mut mass = Vec::with_capacity(mu.len() * nu.len());
        for &a in mu.weights() {
            for &b in nu.weights() {
                mass.push(a * b);
            }
        }
        Coupling { rows: mu.len(), cols: nu.len(), mass }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.cols + j]
    }

    pub fn dense(&self) -> &[f64] {
        &self.mass
    }

    pub fn as_rows(&self) -> Vec<Vec<f64>> {
        self.mass.chunks(self.cols).map(|r| r.to_vec()).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.mass.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in self.mass.chunks(self.cols) {
            for (o, m) in out.iter_mut().zip(r) {
                *o += m;
            }
        }
        out
    }

    /// Pairs carrying more than `threshold` mass, with their mass.
    pub fn support(&self, threshold: f64) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let m = self.get(i, j);
                if m > threshold {
                    out.push((i, j, m));
                }
            }
        }
        out
    }

    pub fn marginal_error(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        if mu.len() != self.rows || nu.len() != self.cols {
            return f64::INFINITY;
        }
        let r = self.row_sums().iter().zip(mu.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let c = self.col_sums().iter().zip(nu.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.max(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_measures() {
        assert!(DiscreteMeasure::new(vec![], vec![]).is_err());
        assert!(DiscreteMeasure::new(vec![vec![0.0, 0.0]], vec![0.9]).is_err());
        assert!(DiscreteMeasure::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMeasure::new(vec![vec![0.0, 0.0], vec![0.0]], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMeasure::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn merges_coincident_atoms() {
        let m = DiscreteMeasure::from_atoms(vec![(vec![0.0, 0.0], 0.25), (vec![1.0, 0.0], 0.5), (vec![0.0, 1e-15], 0.25)]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn product_coupling_has_the_right_marginals() {
        let mu = DiscreteMeasure::uniform(vec![vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let nu = DiscreteMeasure::new(vec![vec![2.0, 0.0], vec![3.0, 0.0], vec![4.0, 0.0]], vec![0.2, 0.3, 0.5]).unwrap();
        let pi = Coupling::independent(&mu, &nu);
        assert!(pi.marginal_error(&mu, &nu) < 1e-15);
        assert_eq!(pi.support(0.0).len(), 6);
    }
}
