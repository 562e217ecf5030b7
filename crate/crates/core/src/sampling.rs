//! Deterministic low-discrepancy points and Gauss-Legendre rules.

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// The `index`-th Halton point in `[0,1)^dim`, skipping the origin.
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "Halton sequence supports at most {} dimensions", PRIMES.len());
    (0..dim).map(|d| radical_inverse(index + 1, PRIMES[d])).collect()
}

/// `count` Halton points mapped affinely onto the box `[lo, hi]`.
pub fn halton_box(lo: &[f64], hi: &[f64], count: usize) -> Vec<Vec<f64>> {
    (0..count as u64).map(|k| halton(k, lo.len()).into_iter().enumerate().map(|(d, t)| lo[d] + t * (hi[d] - lo[d])).collect()).collect()
}

/// `count` Halton points inside the Euclidean ball, by rejection from the cube.
pub fn halton_ball(center: &[f64], radius: f64, count: usize) -> Vec<Vec<f64>> {
    let dim = center.len();
    let mut out = Vec::with_capacity(count);
    let mut k = 0u64;
    while out.len() < count {
        let p: Vec<f64> = halton(k, dim).into_iter().map(|t| 2.0 * t - 1.0).collect();
        k += 1;
        if p.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            out.push(p.iter().zip(center).map(|(c, x)| x + radius * c).collect());
        }
    }
    out
}

pub fn ball_volume(dim: usize, radius: f64) -> f64 {
    // V_n = 2 pi / n * V_{n-2}
    let mut v = if dim.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if dim.is_multiple_of(2) { 2 } else { 3 };
    while k <= dim {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v * radius.powi(dim as i32)
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Tensor Gauss rule on the box `[lo, hi]`: points with their weights.
pub fn gauss_box(lo: &[f64], hi: &[f64], per_axis: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (t, w) = gauss_legendre(per_axis);
    let dim = lo.len();
    let total = per_axis.pow(dim as u32);
    let mut points = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rest = flat;
        let mut p = Vec::with_capacity(dim);
        let mut wt = 1.0;
        for d in 0..dim {
            let k = rest % per_axis;
            rest /= per_axis;
            let half = 0.5 * (hi[d] - lo[d]);
            p.push(lo[d] + half * (t[k] + 1.0));
            wt *= half * w[k];
        }
        points.push(p);
        weights.push(wt);
    }
    (points, weights)
}

/// Pairwise summation, fixed order regardless of thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(32);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // degree 62 is the last exact one
        let m62: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(62)).sum();
        assert!((m62 - 2.0 / 63.0).abs() < 1e-14);
        let odd: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(7)).sum();
        assert!(odd.abs() < 1e-15);
    }

    #[test]
    fn small_rules() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (x, _) = gauss_legendre(3);
        assert!(x[1].abs() < 1e-15);
    }

    #[test]
    fn box_rule_volume() {
        let (_, w) = gauss_box(&[0.0, -1.0], &[2.0, 2.0], 5);
        assert!((w.iter().sum::<f64>() - 6.0).abs() < 1e-13);
    }

    #[test]
    fn ball_volumes() {
        assert!((ball_volume(2, 1.0) - std::f64::consts::PI).abs() < 1e-15);
        assert!((ball_volume(3, 2.0) - 4.0 / 3.0 * std::f64::consts::PI * 8.0).abs() < 1e-12);
        assert!((ball_volume(1, 0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn halton_ball_points_stay_inside() {
        let pts = halton_ball(&[1.0, -1.0], 0.1, 500);
        assert_eq!(pts.len(), 500);
        for p in pts {
            let r2 = (p[0] - 1.0).powi(2) + (p[1] + 1.0).powi(2);
            assert!(r2 <= 0.01 + 1e-15);
        }
    }
}
