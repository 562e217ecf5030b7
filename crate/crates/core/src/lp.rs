//! Exact transportation LP: maximise `sum gain_ij pi_ij` over couplings of
//! two probability vectors, with `-inf` gains marking forbidden pairs.
//!
//! Forbidden pairs are dropped from the graph. Feasibility is settled first
//! by a max-flow; the optimum then comes from a primal network simplex on a
//! spanning tree rooted at an artificial hub.

use std::collections::VecDeque;

use crate::error::{LotError, Result};
use crate::extended::ExtendedReal;

#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub value: f64,
    /// Row-major optimal plan.
    pub plan: Vec<f64>,
    /// Dual potentials with `row[i] + col[j] >= gain_ij`, tight on the plan.
    pub row_potential: Vec<f64>,
    pub col_potential: Vec<f64>,
    pub pivots: usize,
}

/// A feasible plan supported on allowed pairs, if one exists.
pub fn feasible_plan(supply: &[f64], demand: &[f64], allowed: &[bool]) -> Option<Vec<f64>> {
    let (m, n) = (supply.len(), demand.len());
    let total: f64 = supply.iter().sum();
    // residual graph on source, rows, cols, sink
    let source = m + n;
    let sink = m + n + 1;
    let nodes = m + n + 2;
    let mut cap = vec![vec![0.0f64; nodes]; nodes];
    for i in 0..m {
        cap[source][i] = supply[i];
        for j in 0..n {
            if allowed[i * n + j] {
                cap[i][m + j] = f64::INFINITY;
            }
        }
    }
    for j in 0..n {
        cap[m + j][sink] = demand[j];
    }
    let eps = 1e-15 * total.max(1.0);
    let mut flow_value = 0.0;
    let mut flow = vec![vec![0.0f64; nodes]; nodes];
    loop {
        let mut prev = vec![usize::MAX; nodes];
        prev[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(a) = queue.pop_front() {
            for b in 0..nodes {
                if prev[b] == usize::MAX && cap[a][b] - flow[a][b] > eps {
                    prev[b] = a;
                    queue.push_back(b);
                }
            }
        }
        if prev[sink] == usize::MAX {
            break;
        }
        let mut push = f64::INFINITY;
        let mut b = sink;
        while b != source {
            let a = prev[b];
            push = push.min(cap[a][b] - flow[a][b]);
            b = a;
        }
        let mut b = sink;
        while b != source {
            let a = prev[b];
            flow[a][b] += push;
            flow[b][a] -= push;
            b = a;
        }
        flow_value += push;
    }
    if flow_value < total - 1e-12 * total.max(1.0) {
        return None;
    }
    let mut plan = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            plan[i * n + j] = flow[i][m + j].max(0.0);
        }
    }
    Some(plan)
}

struct Edge {
    from: usize,
    to: usize,
    cost: f64,
    flow: f64,
}

/// Solves the transportation problem. `Ok(None)` means no plan avoids the
/// forbidden pairs.
pub fn maximize(supply: &[f64], demand: &[f64], gain: &[ExtendedReal]) -> Result<Option<LpOutcome>> {
    let (m, n) = (supply.len(), demand.len());
    if gain.len() != m * n {
        return Err(LotError::Solver(format!("gain matrix has {} entries, expected {}", gain.len(), m * n)));
    }
    if gain.iter().any(|g| matches!(g, ExtendedReal::PosInf)) || gain.iter().any(|g| g.to_f64().is_nan()) {
        return Err(LotError::Solver("gain matrix contains +inf or NaN".into()));
    }
    let allowed: Vec<bool> = gain.iter().map(|g| g.is_finite()).collect();
    if feasible_plan(supply, demand, &allowed).is_none() {
        return Ok(None);
    }

    let root = m + n;
    let nodes = m + n + 1;
    let max_gain = gain.iter().filter_map(|g| g.finite()).fold(0.0f64, |a, g| a.max(g.abs()));
    // big enough that routing through the hub never beats a real path
    let big = (nodes as f64 + 1.0) * (2.0 * max_gain + 1.0);
    let mut edges = Vec::new();
    let mut real_index = vec![usize::MAX; m * n];
    for i in 0..m {
        for j in 0..n {
            if let ExtendedReal::Finite(g) = gain[i * n + j] {
                real_index[i * n + j] = edges.len();
                edges.push(Edge { from: i, to: m + j, cost: -g, flow: 0.0 });
            }
        }
    }
    let real = edges.len();
    for (i, &a) in supply.iter().enumerate() {
        edges.push(Edge { from: i, to: root, cost: big, flow: a });
    }
    for (j, &b) in demand.iter().enumerate() {
        edges.push(Edge { from: root, to: m + j, cost: big, flow: b });
    }
    let mut in_tree: Vec<bool> = (0..edges.len()).map(|k| k >= real).collect();

    let eps = 1e-13 * (1.0 + max_gain) * nodes as f64;
    let max_pivots = 200 * (edges.len() + nodes) + 1000;
    let mut pivots = 0;
    let mut degenerate_run = 0;
    let mut bland = false;
    let mut potential = vec![0.0f64; nodes];
    let mut parent = vec![usize::MAX; nodes];
    let mut parent_edge = vec![usize::MAX; nodes];
    let mut depth = vec![0usize; nodes];

    loop {
        // rebuild the tree structure from the root
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
        for (k, e) in edges.iter().enumerate() {
            if in_tree[k] {
                adj[e.from].push(k);
                adj[e.to].push(k);
            }
        }
        parent.iter_mut().for_each(|p| *p = usize::MAX);
        parent[root] = root;
        potential[root] = 0.0;
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            for &k in &adj[a] {
                let e = &edges[k];
                let b = if e.from == a { e.to } else { e.from };
                if parent[b] != usize::MAX {
                    continue;
                }
                parent[b] = a;
                parent_edge[b] = k;
                depth[b] = depth[a] + 1;
                potential[b] = if e.from == a { potential[a] - e.cost } else { potential[a] + e.cost };
                queue.push_back(b);
            }
        }
        if parent.contains(&usize::MAX) {
            return Err(LotError::Solver("basis lost its spanning tree".into()));
        }

        let mut entering = None;
        let mut best = -eps;
        for (k, e) in edges.iter().enumerate().take(real) {
            if in_tree[k] {
                continue;
            }
            let rc = e.cost - potential[e.from] + potential[e.to];
            if rc < best {
                best = rc;
                entering = Some(k);
                if bland {
                    break;
                }
            }
        }
        let Some(enter) = entering else { break };
        pivots += 1;
        if pivots > max_pivots {
            return Err(LotError::Solver(format!("network simplex exceeded {max_pivots} pivots")));
        }

        // cycle: enter goes u -> v, then v climbs to the apex, then down to u
        let (u, v) = (edges[enter].from, edges[enter].to);
        let mut up_v = Vec::new();
        let mut up_u = Vec::new();
        let (mut a, mut b) = (v, u);
        while a != b {
            if depth[a] >= depth[b] {
                up_v.push(a);
                a = parent[a];
            } else {
                up_u.push(b);
                b = parent[b];
            }
        }
        let mut cycle: Vec<(usize, bool)> = Vec::new();
        for &w in &up_v {
            let k = parent_edge[w];
            cycle.push((k, edges[k].from == w));
        }
        for &w in up_u.iter().rev() {
            let k = parent_edge[w];
            cycle.push((k, edges[k].to == w));
        }
        let mut theta = f64::INFINITY;
        let mut leaving = usize::MAX;
        for &(k, forward) in &cycle {
            if !forward && (edges[k].flow < theta || (edges[k].flow == theta && k < leaving)) {
                theta = edges[k].flow;
                leaving = k;
            }
        }
        if leaving == usize::MAX {
            return Err(LotError::Solver("unbounded pivot in a bounded transportation problem".into()));
        }
        for &(k, forward) in &cycle {
            if forward {
                edges[k].flow += theta;
            } else {
                edges[k].flow = (edges[k].flow - theta).max(0.0);
            }
        }
        edges[leaving].flow = 0.0;
        edges[enter].flow += theta;
        in_tree[enter] = true;
        in_tree[leaving] = false;
        if theta == 0.0 {
            degenerate_run += 1;
            if degenerate_run > 2 * nodes {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
    }

    let hub_flow: f64 = edges[real..].iter().map(|e| e.flow.abs()).sum();
    if hub_flow > 1e-9 {
        return Err(LotError::Solver(format!("artificial flow {hub_flow:e} left after optimisation")));
    }
    let mut plan = vec![0.0; m * n];
    let mut value = 0.0;
    for (idx, &k) in real_index.iter().enumerate() {
        if k != usize::MAX {
            let f = edges[k].flow.max(0.0);
            plan[idx] = f;
            if f > 0.0 {
                value += f * -edges[k].cost;
            }
        }
    }
    // reduced cost cost - p_from + p_to >= 0 with cost = -gain gives
    // gain_ij <= -p_i + p_j
    let row_potential = (0..m).map(|i| -potential[i]).collect();
    let col_potential = (0..n).map(|j| potential[m + j]).collect();
    Ok(Some(LpOutcome { value, plan, row_potential, col_potential, pivots }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extended::NegInf;

    fn fin(xs: &[f64]) -> Vec<ExtendedReal> {
        xs.iter().map(|&x| ExtendedReal::Finite(x)).collect()
    }

    #[test]
    fn two_by_two_assignment() {
        let out = maximize(&[0.5, 0.5], &[0.5, 0.5], &fin(&[1.0, 0.0, 0.0, 1.0])).unwrap().unwrap();
        assert!((out.value - 1.0).abs() < 1e-15);
        assert_eq!(out.plan, vec![0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn forbidden_pairs_are_avoided() {
        let gain = vec![NegInf, ExtendedReal::Finite(3.0), ExtendedReal::Finite(1.0), ExtendedReal::Finite(5.0)];
        let out = maximize(&[0.5, 0.5], &[0.5, 0.5], &gain).unwrap().unwrap();
        assert_eq!(out.plan[0], 0.0);
        assert!((out.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn infeasible_is_reported() {
        let gain = vec![NegInf, ExtendedReal::Finite(1.0), NegInf, ExtendedReal::Finite(1.0)];
        assert!(maximize(&[0.5, 0.5], &[0.5, 0.5], &gain).unwrap().is_none());
    }

    #[test]
    fn potentials_certify_the_optimum() {
        let a = [0.2, 0.3, 0.5];
        let b = [0.1, 0.6, 0.3];
        let g = fin(&[3.0, -1.0, 2.0, 0.5, 4.0, 1.0, 2.5, 2.5, -3.0]);
        let out = maximize(&a, &b, &g).unwrap().unwrap();
        let dual: f64 = out.row_potential.iter().zip(&a).map(|(p, w)| p * w).sum::<f64>()
            + out.col_potential.iter().zip(&b).map(|(p, w)| p * w).sum::<f64>();
        assert!((dual - out.value).abs() < 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                let slack = out.row_potential[i] + out.col_potential[j] - g[i * 3 + j].to_f64();
                assert!(slack >= -1e-12);
                if out.plan[i * 3 + j] > 0.0 {
                    assert!(slack.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn degenerate_uniform_instance_terminates() {
        let n = 6;
        let w = vec![1.0 / n as f64; n];
        let g = fin(&vec![1.0; n * n]);
        let out = maximize(&w, &w, &g).unwrap().unwrap();
        assert!((out.value - 1.0).abs() < 1e-14);
    }
}
