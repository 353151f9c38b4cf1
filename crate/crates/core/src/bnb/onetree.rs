use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::heuristics::EdgeConstraints;
use crate::instance::Instance;
use crate::tour::Edge;

pub const DEFAULT_ITERS: usize = 100;
/// The step multiplier is halved after this many iterations without a new best.
pub const HALVING_PATIENCE: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneTree {
    /// Best Lagrangian value; `+∞` when no 1-tree honors the constraints.
    pub bound: f64,
    /// How often each edge appeared in the 1-trees of the ascent, as a
    /// fraction of the iterations: a primal estimate for fractional branching.
    pub frequency: BTreeMap<Edge, f64>,
    /// A 1-tree that is a Hamiltonian cycle, as a vertex order.
    pub tour: Option<Vec<usize>>,
    pub iterations: usize,
}

/// Minimum 1-tree under penalties `pi`: a spanning tree on `1..n` holding all
/// forced edges there, plus the two cheapest allowed edges at vertex 0
/// (forced ones first). Returns the edges and the penalized cost.
fn min_one_tree(cons: &EdgeConstraints, pi: &[f64], dist: &[Vec<f64>]) -> Option<(Vec<Edge>, f64)> {
    let n = dist.len();
    // Prim on 1..n with keys (not forced, penalized cost)
    let key_of = |a: usize, b: usize| -> Option<(bool, f64)> {
        if !cons.allows(a, b) {
            return None;
        }
        Some((!cons.is_forced(a, b), dist[a][b] + pi[a] + pi[b]))
    };
    let better = |x: (bool, f64), y: (bool, f64)| x.0 < y.0 || (x.0 == y.0 && x.1 < y.1);
    let mut in_tree = vec![false; n];
    let mut best: Vec<Option<((bool, f64), usize)>> = vec![None; n];
    in_tree[0] = true;
    in_tree[1] = true;
    for v in 2..n {
        best[v] = key_of(1, v).map(|k| (k, 1));
    }
    let mut edges = Vec::with_capacity(n);
    let mut cost = 0.0;
    for _ in 2..n {
        let mut pick: Option<(usize, (bool, f64), usize)> = None;
        for v in 2..n {
            if in_tree[v] {
                continue;
            }
            if let Some((k, from)) = best[v] {
                if pick.is_none_or(|(_, pk, _)| better(k, pk)) {
                    pick = Some((v, k, from));
                }
            }
        }
        let (v, k, from) = pick?;
        in_tree[v] = true;
        edges.push(Edge::new(v, from));
        cost += k.1;
        for w in 2..n {
            if in_tree[w] {
                continue;
            }
            if let Some(kw) = key_of(v, w) {
                if best[w].is_none_or(|(bk, _)| better(kw, bk)) {
                    best[w] = Some((kw, v));
                }
            }
        }
    }
    // a forced edge left out of the tree means the forced edges close a cycle
    let tree_forced = edges.iter().filter(|e| cons.is_forced(e.0, e.1)).count();
    let forced_inside = cons.forced.iter().filter(|e| e.0 != 0).count();
    if tree_forced != forced_inside {
        return None;
    }
    let mut at0: Vec<((bool, f64), usize)> = (1..n).filter_map(|v| key_of(0, v).map(|k| (k, v))).collect();
    at0.sort_by(|x, y| x.0 .0.cmp(&y.0 .0).then(x.0 .1.total_cmp(&y.0 .1)).then(x.1.cmp(&y.1)));
    if at0.len() < 2 || at0[2..].iter().any(|(k, _)| !k.0) {
        return None;
    }
    for &(k, v) in &at0[..2] {
        edges.push(Edge::new(0, v));
        cost += k.1;
    }
    Some((edges, cost))
}

/// Vertex order of a 1-tree in which every degree is 2, if it is one cycle.
fn as_cycle(n: usize, edges: &[Edge]) -> Option<Vec<usize>> {
    let mut adj = vec![Vec::with_capacity(2); n];
    for e in edges {
        adj[e.0].push(e.1);
        adj[e.1].push(e.0);
    }
    if adj.iter().any(|a| a.len() != 2) {
        return None;
    }
    let mut order = vec![0];
    let (mut prev, mut cur) = (0, adj[0][0]);
    while cur != 0 {
        order.push(cur);
        let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
        prev = cur;
        cur = next;
    }
    (order.len() == n).then_some(order)
}

/// Held-Karp Lagrangian 1-tree bound by subgradient ascent. The step is
/// `μ·(ub − L)/‖g‖²` with `μ = 2` halved after [`HALVING_PATIENCE`]
/// non-improving iterations; `ub` defaults to 1.1 times the first value.
pub fn hk_one_tree_bound(inst: &Instance, cons: &EdgeConstraints, iters: usize, ub: Option<f64>) -> OneTree {
    one_tree_bound_matrix(&inst.distance_matrix(), cons, iters, ub)
}

pub fn one_tree_bound_matrix(dist: &[Vec<f64>], cons: &EdgeConstraints, iters: usize, ub: Option<f64>) -> OneTree {
    let n = dist.len();
    let infeasible = OneTree { bound: f64::INFINITY, frequency: BTreeMap::new(), tour: None, iterations: 0 };
    if n < 3 || cons.validate(n).is_err() {
        return infeasible;
    }
    let mut pi = vec![0.0; n];
    let mut best = f64::NEG_INFINITY;
    let mut mu = 2.0;
    let mut stale = 0;
    let mut counts: BTreeMap<Edge, usize> = BTreeMap::new();
    let mut done = 0;
    let mut tour = None;
    for it in 0..iters.max(1) {
        let Some((edges, cost)) = min_one_tree(cons, &pi, dist) else {
            return infeasible;
        };
        done = it + 1;
        let value = cost - 2.0 * pi.iter().sum::<f64>();
        for e in &edges {
            *counts.entry(*e).or_default() += 1;
        }
        let mut deg = vec![0i64; n];
        for e in &edges {
            deg[e.0] += 1;
            deg[e.1] += 1;
        }
        if value > best + 1e-12 {
            best = value;
            stale = 0;
        } else {
            stale += 1;
            if stale >= HALVING_PATIENCE {
                mu /= 2.0;
                stale = 0;
            }
        }
        let norm2: f64 = deg.iter().map(|&d| ((d - 2) * (d - 2)) as f64).sum();
        if norm2 == 0.0 {
            tour = as_cycle(n, &edges);
            if tour.is_some() {
                // a tour honoring the constraints: the bound is its length
                best = value;
                break;
            }
        }
        let target = ub.filter(|u| u.is_finite() && *u > best).unwrap_or(best.abs() * 1.1 + 1e-9);
        let step = mu * (target - value).max(0.0) / norm2.max(1.0);
        if step == 0.0 {
            break;
        }
        for v in 0..n {
            pi[v] += step * (deg[v] - 2) as f64;
        }
    }
    let frequency = counts.into_iter().map(|(e, c)| (e, c as f64 / done as f64)).collect();
    OneTree { bound: best, frequency, tour, iterations: done }
}
