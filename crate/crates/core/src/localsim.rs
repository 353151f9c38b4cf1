//! Local path predictors.
//!
//! Each simulator replays one heuristic on the points of a single protected
//! ball and returns every path it could take there. Whenever several choices
//! are within `eps` of the best one the run forks; a path may spend at most
//! `cap` bits of forking (`⌈log₂ arity⌉` per fork), after which it follows the
//! best choice by index order and the result is flagged `cap_exceeded`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::heuristics::InsertionMode;
use crate::instance::Instance;
use crate::tour::{normalize_path, PathSeq};

pub const DEFAULT_CAP: u32 = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidatePaths {
    /// Distinct paths over local indices, normalized up to reversal and sorted.
    pub paths: Vec<PathSeq>,
    /// Largest fork cost spent along any single path.
    pub branch_count: u32,
    pub cap_exceeded: bool,
}

impl CandidatePaths {
    /// Whether `order` is in the list, up to reversal.
    pub fn contains(&self, order: &[usize]) -> bool {
        let key = normalize_path(order);
        self.paths.binary_search_by(|p| p.order.cmp(&key)).is_ok()
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Forks happened somewhere.
    pub fn forked(&self) -> bool {
        self.branch_count > 0 || self.cap_exceeded
    }

    fn collect(inst: &Instance, raw: Vec<Vec<usize>>, branch_count: u32, cap_exceeded: bool) -> Self {
        let mut orders: Vec<Vec<usize>> = raw.iter().map(|o| normalize_path(o)).collect();
        orders.sort();
        orders.dedup();
        let paths = orders.into_iter().map(|o| PathSeq::from_order(inst, o)).collect();
        CandidatePaths { paths, branch_count, cap_exceeded }
    }
}

fn fork_cost(arity: usize) -> u32 {
    (arity as f64).log2().ceil() as u32
}

/// Splits on `choices` (best first). Returns the choices to follow and the
/// new cost, or only the best choice when the budget would be exceeded.
fn fork<T: Clone>(choices: &[T], cost: u32, cap: u32, exceeded: &mut bool) -> (Vec<T>, u32) {
    if choices.len() <= 1 {
        return (choices.to_vec(), cost);
    }
    let c = cost + fork_cost(choices.len());
    if c > cap {
        *exceeded = true;
        (vec![choices[0].clone()], cost)
    } else {
        (choices.to_vec(), c)
    }
}

fn local_instance(points: &[Point]) -> Result<Instance> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no local points".into()));
    }
    Ok(Instance::planar(points.to_vec()))
}

/// Nearest neighbor from each entry point through all local points.
pub fn simulate_nn(points: &[Point], entries: &[usize], eps: f64, cap: u32) -> Result<CandidatePaths> {
    let inst = local_instance(points)?;
    let n = inst.len();
    if let Some(&e) = entries.iter().find(|&&e| e >= n) {
        return Err(Error::InvalidArgument(format!("entry {e} outside the {n} local points")));
    }
    let mut out = Vec::new();
    let (mut branch, mut exceeded) = (0, false);
    struct State {
        order: Vec<usize>,
        visited: Vec<bool>,
        cost: u32,
    }
    let mut stack: Vec<State> = entries
        .iter()
        .map(|&e| {
            let mut visited = vec![false; n];
            visited[e] = true;
            State { order: vec![e], visited, cost: 0 }
        })
        .collect();
    while let Some(st) = stack.pop() {
        if st.order.len() == n {
            branch = branch.max(st.cost);
            out.push(st.order);
            continue;
        }
        let cur = *st.order.last().expect("nonempty");
        let mut cands: Vec<(f64, usize)> =
            (0..n).filter(|&v| !st.visited[v]).map(|v| (inst.dist(cur, v), v)).collect();
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let best = cands[0].0;
        let tied: Vec<usize> = cands.iter().take_while(|c| c.0 <= best + eps).map(|c| c.1).collect();
        let (follow, cost) = fork(&tied, st.cost, cap, &mut exceeded);
        for v in follow.into_iter().rev() {
            let mut order = st.order.clone();
            order.push(v);
            let mut visited = st.visited.clone();
            visited[v] = true;
            stack.push(State { order, visited, cost });
        }
    }
    Ok(CandidatePaths::collect(&inst, out, branch, exceeded))
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

#[derive(Clone)]
struct GreedyState {
    deg: Vec<u8>,
    parent: Vec<usize>,
    edges: Vec<(usize, usize)>,
    cost: u32,
}

impl GreedyState {
    fn admissible(&mut self, a: usize, b: usize) -> bool {
        self.deg[a] < 2 && self.deg[b] < 2 && find(&mut self.parent, a) != find(&mut self.parent, b)
    }

    fn add(&mut self, a: usize, b: usize) {
        self.deg[a] += 1;
        self.deg[b] += 1;
        let (ra, rb) = (find(&mut self.parent, a), find(&mut self.parent, b));
        self.parent[ra] = rb;
        self.edges.push((a, b));
    }

    /// Adds all of `set` if the outcome cannot depend on their order: no
    /// vertex would exceed degree 2 and together they close no cycle.
    fn add_independent(&mut self, set: &[(usize, usize)]) -> bool {
        let mut extra = vec![0u8; self.deg.len()];
        for &(a, b) in set {
            extra[a] += 1;
            extra[b] += 1;
        }
        if (0..self.deg.len()).any(|v| self.deg[v] + extra[v] > 2) {
            return false;
        }
        let mut trial = self.clone();
        for &(a, b) in set {
            if !trial.admissible(a, b) {
                return false;
            }
            trial.add(a, b);
        }
        *self = trial;
        true
    }
}

/// Greedy matching on the local points until they form one path.
pub fn simulate_greedy(points: &[Point], eps: f64, cap: u32) -> Result<CandidatePaths> {
    let inst = local_instance(points)?;
    let n = inst.len();
    let mut all: Vec<(f64, usize, usize)> =
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).map(|(a, b)| (inst.dist(a, b), a, b)).collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));

    let mut out = Vec::new();
    let (mut branch, mut exceeded) = (0, false);
    let mut stack =
        vec![GreedyState { deg: vec![0; n], parent: (0..n).collect(), edges: Vec::with_capacity(n), cost: 0 }];
    while let Some(mut st) = stack.pop() {
        if st.edges.len() + 1 >= n {
            branch = branch.max(st.cost);
            out.push(path_from_edges(n, &st.edges));
            continue;
        }
        let mut cands: Vec<(f64, usize, usize)> = Vec::new();
        for &(d, a, b) in &all {
            if let Some(first) = cands.first() {
                if d > first.0 + eps {
                    break;
                }
            }
            if st.admissible(a, b) {
                cands.push((d, a, b));
            }
        }
        let tied: Vec<(usize, usize)> = cands.iter().map(|c| (c.1, c.2)).collect();
        if tied.len() > 1 && st.add_independent(&tied) {
            stack.push(st);
            continue;
        }
        let (follow, cost) = fork(&tied, st.cost, cap, &mut exceeded);
        for (a, b) in follow.into_iter().rev() {
            let mut next = st.clone();
            next.add(a, b);
            next.cost = cost;
            stack.push(next);
        }
    }
    Ok(CandidatePaths::collect(&inst, out, branch, exceeded))
}

/// Walks a Hamilton path given by its edges, from its smaller endpoint.
fn path_from_edges(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    if n == 1 {
        return vec![0];
    }
    let mut adj = vec![Vec::with_capacity(2); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let start = (0..n).find(|&v| adj[v].len() < 2).expect("path has an endpoint");
    let mut order = vec![start];
    let (mut prev, mut cur) = (usize::MAX, start);
    while let Some(&next) = adj[cur].iter().find(|&&w| w != prev) {
        order.push(next);
        prev = cur;
        cur = next;
    }
    order
}

/// Indices of `y` in angular order about their centroid.
pub fn ring_order(points: &[Point], y: &[usize]) -> Vec<usize> {
    let cx = y.iter().map(|&i| points[i].x()).sum::<f64>() / y.len() as f64;
    let cy = y.iter().map(|&i| points[i].y()).sum::<f64>() / y.len() as f64;
    let mut ring = y.to_vec();
    ring.sort_by(|&a, &b| {
        let ta = (points[a].y() - cy).atan2(points[a].x() - cx);
        let tb = (points[b].y() - cy).atan2(points[b].x() - cx);
        ta.total_cmp(&tb).then(a.cmp(&b))
    });
    ring
}

#[derive(Clone)]
struct InsState {
    next: Vec<usize>,
    in_tour: Vec<bool>,
    cost: u32,
}

/// Nearest or farthest insertion of the non-`y` local points into the `y`
/// ring, which is taken as already built.
///
/// The ring is the angular order of `y`. The two ring vertices joined to the
/// outside are unknown locally, so every opening of the ring is tried; the
/// opened edge is never used for insertions. In farthest mode every point is
/// also tried as the first one inserted.
pub fn simulate_insertion(
    points: &[Point],
    y: &[usize],
    eps: f64,
    cap: u32,
    mode: InsertionMode,
) -> Result<CandidatePaths> {
    let inst = local_instance(points)?;
    let n = inst.len();
    if y.len() < 2 || y.iter().any(|&i| i >= n) {
        return Err(Error::InvalidArgument("insertion needs at least two valid ring indices".into()));
    }
    let ring = ring_order(points, y);
    let mut is_y = vec![false; n];
    for &i in y {
        is_y[i] = true;
    }
    let s: Vec<usize> = (0..n).filter(|&i| !is_y[i]).collect();
    let m = ring.len();

    let mut out = Vec::new();
    let (mut branch, mut exceeded) = (0, false);
    for open in 0..m {
        let mut next = vec![usize::MAX; n];
        let path: Vec<usize> = (1..=m).map(|k| ring[(open + k) % m]).collect();
        for w in path.windows(2) {
            next[w[0]] = w[1];
        }
        let in_tour = is_y.clone();
        let start = path[0];
        let base = InsState { next, in_tour, cost: 0 };

        let mut stack: Vec<(InsState, Option<usize>)> = match mode {
            InsertionMode::Farthest if s.len() > 1 => s.iter().map(|&v| (base.clone(), Some(v))).collect(),
            _ => vec![(base, None)],
        };
        while let Some((st, forced)) = stack.pop() {
            if st.in_tour.iter().all(|&b| b) {
                branch = branch.max(st.cost);
                let mut order = vec![start];
                let mut cur = start;
                while st.next[cur] != usize::MAX {
                    cur = st.next[cur];
                    order.push(cur);
                }
                out.push(order);
                continue;
            }
            let outside: Vec<usize> = s.iter().copied().filter(|&v| !st.in_tour[v]).collect();
            let chosen: Vec<usize> = match forced {
                Some(v) => vec![v],
                None => {
                    let md: Vec<(f64, usize)> = outside
                        .iter()
                        .map(|&v| {
                            let d = (0..n).filter(|&u| st.in_tour[u]).map(|u| inst.dist(u, v)).fold(f64::INFINITY, f64::min);
                            (d, v)
                        })
                        .collect();
                    let key = |d: f64| if mode == InsertionMode::Nearest { d } else { -d };
                    let best = md.iter().map(|c| key(c.0)).fold(f64::INFINITY, f64::min);
                    md.iter().filter(|c| key(c.0) <= best + eps).map(|c| c.1).collect()
                }
            };
            let mut options: Vec<(f64, usize, usize)> = Vec::new();
            for &z in &chosen {
                let mut edges: Vec<(f64, usize)> = (0..n)
                    .filter(|&u| st.in_tour[u] && st.next[u] != usize::MAX)
                    .map(|u| {
                        let w = st.next[u];
                        (inst.dist(u, z) + inst.dist(z, w) - inst.dist(u, w), u)
                    })
                    .collect();
                edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let best = edges[0].0;
                options.extend(edges.iter().take_while(|e| e.0 <= best + eps).map(|e| (e.0, z, e.1)));
            }
            options.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
            let choices: Vec<(usize, usize)> = options.iter().map(|o| (o.1, o.2)).collect();
            let (follow, cost) = fork(&choices, st.cost, cap, &mut exceeded);
            for (z, u) in follow.into_iter().rev() {
                let mut nx = st.clone();
                nx.next[z] = nx.next[u];
                nx.next[u] = z;
                nx.in_tour[z] = true;
                nx.cost = cost;
                stack.push((nx, None));
            }
        }
    }
    Ok(CandidatePaths::collect(&inst, out, branch, exceeded))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::xy(x, y)).collect()
    }

    #[test]
    fn nn_without_ties() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.1), (2.3, 0.0), (3.7, 0.4)]);
        let c = simulate_nn(&p, &[0, 2], 1e-9, DEFAULT_CAP).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.branch_count, 0);
        assert!(c.contains(&[0, 1, 2, 3]));
        assert!(c.contains(&[3, 0, 1, 2]));
    }

    #[test]
    fn nn_exact_tie_forks() {
        let p = pts(&[(0.0, 0.0), (-1.0, 0.0), (1.0, 0.0)]);
        let c = simulate_nn(&p, &[0], 1e-9, DEFAULT_CAP).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.branch_count, 1);
        assert!(!c.cap_exceeded);
    }

    #[test]
    fn cap_limits_output() {
        // many equidistant candidates
        let mut v = vec![(0.0, 0.0)];
        for j in 0..8 {
            let th = j as f64 * std::f64::consts::PI / 4.0;
            v.push((th.cos(), th.sin()));
        }
        let p = pts(&v);
        let c = simulate_nn(&p, &[0], 1e-6, 2).unwrap();
        assert!(c.cap_exceeded);
        assert!(c.len() <= 4);
        assert!(c.branch_count <= 2);
    }

    #[test]
    fn greedy_generic_single_path() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.2), (2.5, -0.1), (2.9, 1.7), (0.3, 2.2)]);
        let c = simulate_greedy(&p, 1e-9, DEFAULT_CAP).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.branch_count, 0);
    }

    #[test]
    fn greedy_conflicting_tie_forks() {
        // edges 0-1 and 1-2 tie; 0-2 is longer; a far point hangs off vertex 2
        let p = pts(&[(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (1.0, 5.0)]);
        let c = simulate_greedy(&p, 1e-9, DEFAULT_CAP).unwrap();
        // the two tied edges share vertex 1 but both fit; order is irrelevant
        assert_eq!(c.len(), 1);
        assert_eq!(c.branch_count, 0);
        // a three-way tie at a vertex must fork: only two of three can be taken,
        // and the leftover point then ties between the two path ends
        let q = pts(&[(0.0, 0.0), (1.0, 0.0), (-0.5, 3f64.sqrt() / 2.0), (-0.5, -3f64.sqrt() / 2.0)]);
        let c = simulate_greedy(&q, 1e-9, DEFAULT_CAP).unwrap();
        assert_eq!(c.len(), 6);
        assert!(c.branch_count >= 1);
    }

    #[test]
    fn greedy_disjoint_ties_do_not_fork() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 3.0), (1.0, 3.5)]);
        let c = simulate_greedy(&p, 1e-9, DEFAULT_CAP).unwrap();
        assert_eq!(c.branch_count, 0);
        assert!(c.contains(&[1, 0, 2, 3]));
    }

    fn square_ring() -> Vec<Point> {
        pts(&[(0.0, 4.0), (-4.0, 0.0), (0.0, -4.0), (4.0, 0.0)])
    }

    #[test]
    fn insertion_single_inner_point() {
        let mut p = square_ring();
        p.push(Point::xy(0.3, -3.0));
        let c = simulate_insertion(&p, &[0, 1, 2, 3], 1e-9, DEFAULT_CAP, InsertionMode::Nearest).unwrap();
        // one path per ring opening; the inner point always sits next to vertex 2
        assert_eq!(c.len(), 4);
        for path in &c.paths {
            let pos = path.order.iter().position(|&v| v == 4).unwrap();
            let nb: Vec<usize> =
                [pos.wrapping_sub(1), pos + 1].iter().filter_map(|&i| path.order.get(i).copied()).collect();
            assert!(nb.contains(&2));
        }
    }

    #[test]
    fn insertion_symmetric_pair_forks() {
        let mut p = square_ring();
        p.push(Point::xy(-1.0, 0.0));
        p.push(Point::xy(1.0, 0.0));
        let c = simulate_insertion(&p, &[0, 1, 2, 3], 1e-9, DEFAULT_CAP, InsertionMode::Nearest).unwrap();
        assert!(c.branch_count >= 1);
    }

    #[test]
    fn farthest_mode_tries_each_first_point() {
        let mut p = square_ring();
        p.push(Point::xy(0.5, 0.5));
        p.push(Point::xy(-0.2, -1.0));
        let c = simulate_insertion(&p, &[0, 1, 2, 3], 1e-9, DEFAULT_CAP, InsertionMode::Farthest).unwrap();
        assert!(!c.is_empty());
        for path in &c.paths {
            assert_eq!(path.order.len(), 6);
        }
    }

    #[test]
    fn ring_order_is_angular() {
        let p = square_ring();
        assert_eq!(ring_order(&p, &[0, 1, 2, 3]), vec![2, 3, 0, 1]);
    }

    #[test]
    fn paths_are_normalized_and_distinct() {
        let p = pts(&[(0.0, 0.0), (-1.0, 0.0), (1.0, 0.0), (0.0, 1.5)]);
        let c = simulate_nn(&p, &[0, 1, 2, 3], 1e-9, DEFAULT_CAP).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for path in &c.paths {
            assert_eq!(path.order, normalize_path(&path.order));
            assert!(seen.insert(path.order.clone()));
        }
    }
}
