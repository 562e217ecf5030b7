//! Reference computations that share no code with the library solvers.

use lot_core::{AdmissibleFunction, DiscreteMeasure, ExtendedReal};

/// Time separation in 1+n Minkowski space, written out directly.
pub fn separation(x: &[f64], y: &[f64]) -> Option<f64> {
    let dt = y[0] - x[0];
    let dx = x[1..].iter().zip(&y[1..]).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
    let slack = 1e-12 * dt.abs().max(dx).max(1.0);
    if dt >= dx {
        Some(((dt - dx) * (dt + dx)).sqrt())
    } else if dt >= 0.0 && dx - dt <= slack {
        Some(0.0)
    } else {
        None
    }
}

/// Dense two-phase tableau simplex with Bland's rule for
/// `max sum g_ij p_ij` over couplings, `None` entries forbidden.
/// Returns `None` when no coupling avoids the forbidden entries.
pub fn dense_simplex(supply: &[f64], demand: &[f64], gain: &[Option<f64>]) -> Option<f64> {
    let (m, n) = (supply.len(), demand.len());
    let vars: Vec<usize> = (0..m * n).filter(|&k| gain[k].is_some()).collect();
    let rows = m + n;
    let cols = vars.len() + rows;
    // tableau rows: constraints; last column holds the right-hand side
    let mut t = vec![vec![0.0f64; cols + 1]; rows];
    for (c, &k) in vars.iter().enumerate() {
        t[k / n][c] = 1.0;
        t[m + k % n][c] = 1.0;
    }
    for r in 0..rows {
        t[r][vars.len() + r] = 1.0;
        t[r][cols] = if r < m { supply[r] } else { demand[r - m] };
    }
    let mut basis: Vec<usize> = (0..rows).map(|r| vars.len() + r).collect();
    let eps = 1e-12;

    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], allowed: usize| {
        for _ in 0..100_000 {
            // reduced cost for maximisation: c_j - c_B B^-1 A_j
            let mut enter = None;
            for j in 0..allowed {
                if basis.contains(&j) {
                    continue;
                }
                let rc = cost[j] - (0..t.len()).map(|r| cost[basis[r]] * t[r][j]).sum::<f64>();
                if rc > eps {
                    enter = Some(j);
                    break;
                }
            }
            let Some(j) = enter else { return };
            let mut leave: Option<usize> = None;
            for r in 0..t.len() {
                if t[r][j] > eps {
                    let ratio = t[r][cols] / t[r][j];
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            let cur = t[l][cols] / t[l][j];
                            ratio < cur - eps || (ratio <= cur + eps && basis[r] < basis[l])
                        }
                    };
                    if better {
                        leave = Some(r);
                    }
                }
            }
            let Some(r) = leave else { return };
            let piv = t[r][j];
            for x in t[r].iter_mut() {
                *x /= piv;
            }
            for q in 0..t.len() {
                if q != r && t[q][j] != 0.0 {
                    let f = t[q][j];
                    let src = t[r].clone();
                    for (a, b) in t[q].iter_mut().zip(&src) {
                        *a -= f * b;
                    }
                }
            }
            basis[r] = j;
        }
        panic!("dense simplex did not terminate");
    };

    // phase one: drive the artificials out
    let mut phase1 = vec![0.0; cols];
    phase1[vars.len()..cols].iter_mut().for_each(|w| *w = -1.0);
    run(&mut t, &mut basis, &phase1, cols);
    let infeasibility: f64 = (0..rows).filter(|&r| basis[r] >= vars.len()).map(|r| t[r][cols]).sum();
    if infeasibility > 1e-9 {
        return None;
    }
    // pivot zero-level artificials out, dropping rows that are redundant
    let mut r = 0;
    while r < t.len() {
        if basis[r] < vars.len() {
            r += 1;
            continue;
        }
        match (0..vars.len()).find(|&j| t[r][j].abs() > 1e-9) {
            Some(j) => {
                let piv = t[r][j];
                for x in t[r].iter_mut() {
                    *x /= piv;
                }
                let src = t[r].clone();
                for (q, row) in t.iter_mut().enumerate() {
                    if q != r && row[j] != 0.0 {
                        let f = row[j];
                        for (a, b) in row.iter_mut().zip(&src) {
                            *a -= f * b;
                        }
                    }
                }
                basis[r] = j;
                r += 1;
            }
            None => {
                t.remove(r);
                basis.remove(r);
            }
        }
    }
    // phase two on the real variables
    let mut cost = vec![0.0; cols];
    for (c, &k) in vars.iter().enumerate() {
        cost[c] = gain[k].unwrap();
    }
    run(&mut t, &mut basis, &cost, vars.len());
    Some((0..t.len()).map(|r| cost[basis[r]] * t[r][cols]).sum())
}

/// Best objective over all vertices of the transportation polytope, found by
/// trying every acyclic set of allowed arcs and solving it by leaf peeling.
pub fn vertex_enumeration(supply: &[f64], demand: &[f64], gain: &[Option<f64>]) -> Option<f64> {
    let (m, n) = (supply.len(), demand.len());
    let arcs: Vec<usize> = (0..m * n).filter(|&k| gain[k].is_some()).collect();
    let max_size = (m + n - 1).min(arcs.len());
    let mut best: Option<f64> = None;
    let mut chosen = Vec::new();
    fn recurse(start: usize, arcs: &[usize], chosen: &mut Vec<usize>, max_size: usize, visit: &mut dyn FnMut(&[usize])) {
        visit(chosen);
        if chosen.len() == max_size {
            return;
        }
        for k in start..arcs.len() {
            chosen.push(arcs[k]);
            recurse(k + 1, arcs, chosen, max_size, visit);
            chosen.pop();
        }
    }
    let mut visit = |set: &[usize]| {
        if let Some(v) = peel(supply, demand, gain, set) {
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    };
    recurse(0, &arcs, &mut chosen, max_size, &mut visit);
    best
}

fn peel(supply: &[f64], demand: &[f64], gain: &[Option<f64>], set: &[usize]) -> Option<f64> {
    let (m, n) = (supply.len(), demand.len());
    let mut residual: Vec<f64> = supply.iter().cloned().chain(demand.iter().map(|d| -d)).collect();
    let mut alive = set.to_vec();
    let mut value = 0.0;
    let tol = 1e-12;
    while !alive.is_empty() {
        let mut degree = vec![0usize; m + n];
        for &k in &alive {
            degree[k / n] += 1;
            degree[m + k % n] += 1;
        }
        let Some(pos) = alive.iter().position(|&k| degree[k / n] == 1 || degree[m + k % n] == 1) else {
            return None; // contains a cycle
        };
        let k = alive.swap_remove(pos);
        let (row, col) = (k / n, m + k % n);
        let flow = if degree[row] == 1 { residual[row] } else { -residual[col] };
        if flow < -tol {
            return None;
        }
        residual[row] -= flow;
        residual[col] += flow;
        value += flow * gain[k].unwrap();
    }
    residual.iter().all(|r| r.abs() <= 1e-10).then_some(value)
}

/// Gains `u(l / lambda)` with forbidden entries as `None`.
pub fn gains(mu: &DiscreteMeasure, nu: &DiscreteMeasure, u: &AdmissibleFunction, lambda: f64) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(mu.len() * nu.len());
    for x in mu.points() {
        for y in nu.points() {
            out.push(separation(x, y).and_then(|l| match u.eval_closed(l / lambda) {
                ExtendedReal::Finite(v) => Some(v),
                _ => None,
            }));
        }
    }
    out
}

/// `ell_u` by scanning a geometric lambda grid down from the largest
/// separation, then bisecting on the dense-simplex inner value.
pub fn lambda_grid(mu: &DiscreteMeasure, nu: &DiscreteMeasure, u: &AdmissibleFunction) -> ExtendedReal {
    let causal: Vec<Option<f64>> = mu.points().iter().flat_map(|x| nu.points().iter().map(move |y| separation(x, y))).collect();
    if dense_simplex(mu.weights(), nu.weights(), &causal.iter().map(|l| l.map(|_| 0.0)).collect::<Vec<_>>()).is_none() {
        return ExtendedReal::NegInf;
    }
    let hi_l = causal.iter().flatten().cloned().fold(0.0, f64::max);
    if hi_l == 0.0 {
        return ExtendedReal::Finite(0.0);
    }
    let target = u.eval(1.0);
    let feasible = |lambda: f64| dense_simplex(mu.weights(), nu.weights(), &gains(mu, nu, u, lambda)).is_some_and(|v| v >= target);
    if feasible(hi_l) {
        return ExtendedReal::Finite(hi_l);
    }
    let mut hi = hi_l;
    let mut lo = None;
    for k in 1..=400 {
        let lambda = hi_l * 2f64.powf(-k as f64 / 4.0);
        if feasible(lambda) {
            lo = Some(lambda);
            break;
        }
        hi = lambda;
    }
    let Some(mut lo) = lo else { return ExtendedReal::Finite(0.0) };
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ExtendedReal::Finite(0.5 * (lo + hi))
}

/// `inf_y (x y - u(y))` by golden-section search in `log y` over
/// `[-80, 80]`; the objective is unimodal there.
pub fn golden_conjugate(u: &AdmissibleFunction, x: f64) -> f64 {
    let f = |t: f64| {
        let y = t.exp();
        x * y - u.eval(y)
    };
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (-80.0f64, 80.0f64);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-13 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    f(0.5 * (a + b)).min(fc).min(fd)
}

/// Composite Simpson rule on a box with `cells` (even) panels per axis.
pub fn simpson_box(lo: &[f64], hi: &[f64], cells: usize, f: &dyn Fn(&[f64]) -> f64) -> f64 {
    assert!(cells.is_multiple_of(2));
    let dim = lo.len();
    let weight = |k: usize| {
        if k == 0 || k == cells {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut total = 0.0;
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    loop {
        let mut w = 1.0;
        for d in 0..dim {
            let h = (hi[d] - lo[d]) / cells as f64;
            x[d] = lo[d] + idx[d] as f64 * h;
            w *= weight(idx[d]) * h / 3.0;
        }
        total += w * f(&x);
        let mut d = 0;
        loop {
            if d == dim {
                return total;
            }
            idx[d] += 1;
            if idx[d] <= cells {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Centred second difference.
pub fn second_difference(f: &dyn Fn(f64) -> f64, s: f64, h: f64) -> f64 {
    (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h)
}

/// Centred first difference.
pub fn first_difference(f: &dyn Fn(f64) -> f64, s: f64, h: f64) -> f64 {
    (f(s + h) - f(s - h)) / (2.0 * h)
}

/// `log det` of a small matrix by Gaussian elimination with partial pivoting.
pub fn log_det(mut a: Vec<Vec<f64>>) -> Option<f64> {
    let n = a.len();
    let mut acc = 0.0;
    let mut sign = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c] == 0.0 {
            return None;
        }
        if p != c {
            a.swap(p, c);
            sign = -sign;
        }
        let piv = a[c][c];
        sign *= piv.signum();
        acc += piv.abs().ln();
        for r in c + 1..n {
            let f = a[r][c] / piv;
            let (top, bottom) = a.split_at_mut(r);
            for (x, y) in bottom[0][c..n].iter_mut().zip(&top[c][c..n]) {
                *x -= f * y;
            }
        }
    }
    (sign > 0.0).then_some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_and_enumeration_agree_on_a_small_case() {
        let g = vec![Some(3.0), Some(-1.0), None, Some(0.5), Some(4.0), Some(1.0)];
        let a = dense_simplex(&[0.4, 0.6], &[0.2, 0.5, 0.3], &g).unwrap();
        let b = vertex_enumeration(&[0.4, 0.6], &[0.2, 0.5, 0.3], &g).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} {b}");
        assert!(dense_simplex(&[0.5, 0.5], &[0.5, 0.5], &[None, Some(1.0), None, Some(1.0)]).is_none());
        assert!(vertex_enumeration(&[0.5, 0.5], &[0.5, 0.5], &[None, Some(1.0), None, Some(1.0)]).is_none());
    }

    #[test]
    fn golden_conjugate_of_log() {
        // u = 1/2 + log y has conjugate 1/2 + log x
        let u = AdmissibleFunction::log();
        for x in [0.01, 1.0, 30.0] {
            assert!((golden_conjugate(&u, x) - (0.5 + f64::ln(x))).abs() < 1e-12);
        }
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson_box(&[0.0, -1.0], &[2.0, 1.0], 4, &|x| x[0].powi(3) + x[1] * x[1]);
        assert!((v - (8.0 + 4.0 / 3.0)).abs() < 1e-12);
    }
}
