use super::{completable, rotate_to_zero, trivial_tour, DistKeys, EdgeConstraints, Segments};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::tour::{Edge, Tour};

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Greedy edge matching: repeatedly take the shortest admissible edge that
/// keeps every degree ≤ 2, closes no cycle and leaves the forbidden edges a
/// way to finish, then close the Hamiltonian path.
/// Forced edges are taken first.
pub fn greedy_constrained(inst: &Instance, cons: &EdgeConstraints) -> Result<Tour> {
    if let Some(t) = trivial_tour(inst, cons) {
        return t;
    }
    let n = inst.len();
    let segs = Segments::build(n, cons)?;
    if let Some(cycle) = segs.full_cycle {
        return Ok(Tour::from_order(inst, rotate_to_zero(cycle)));
    }
    let keys = DistKeys::for_instance(inst);
    let mut deg = vec![0u8; n];
    let mut uf = UnionFind::new(n);
    let mut chosen: Vec<Edge> = Vec::with_capacity(n);
    for e in &cons.forced {
        deg[e.0] += 1;
        deg[e.1] += 1;
        uf.union(e.0, e.1);
        chosen.push(*e);
    }

    // only segment ends can take new edges
    let open: Vec<usize> = (0..n).filter(|&v| deg[v] < 2).collect();
    let mut cand: Vec<(i64, usize, usize)> = Vec::with_capacity(open.len() * open.len().saturating_sub(1) / 2);
    for (i, &a) in open.iter().enumerate() {
        for &b in &open[i + 1..] {
            if segs.seg_of[a] != segs.seg_of[b] && cons.allows(a, b) {
                cand.push((keys.key(inst.dist(a, b)), a, b));
            }
        }
    }
    cand.sort_unstable();
    for (_, a, b) in cand {
        if chosen.len() == n - 1 {
            break;
        }
        if deg[a] >= 2 || deg[b] >= 2 || uf.find(a) == uf.find(b) {
            continue;
        }
        if !cons.forbidden.is_empty() && !completable(&fragments_after(n, &deg, &mut uf, a, b), cons) {
            continue;
        }
        uf.union(a, b);
        deg[a] += 1;
        deg[b] += 1;
        chosen.push(Edge::new(a, b));
    }
    if chosen.len() < n - 1 {
        return Err(Error::Infeasible("forbidden edges block a Hamiltonian path".into()));
    }
    let ends: Vec<usize> = (0..n).filter(|&v| deg[v] < 2).collect();
    let (a, b) = (ends[0], ends[1]);
    if !cons.allows(a, b) {
        return Err(Error::Infeasible("closing edge is forbidden".into()));
    }
    chosen.push(Edge::new(a, b));
    Ok(Tour::from_order(inst, cycle_from_edges(n, &chosen)))
}

/// End pairs of the paths formed by the chosen edges once `a`–`b` joins the
/// path ending at `a` to the one ending at `b`.
fn fragments_after(n: usize, deg: &[u8], uf: &mut UnionFind, a: usize, b: usize) -> Vec<(usize, usize)> {
    let mut ends: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for v in 0..n {
        if deg[v] < 2 {
            ends.entry(uf.find(v)).or_default().push(v);
        }
    }
    let (ra, rb) = (uf.find(a), uf.find(b));
    let other = |list: &[usize], x: usize| list.iter().copied().find(|&v| v != x).unwrap_or(x);
    let mut frags = vec![(other(&ends[&ra], a), other(&ends[&rb], b))];
    frags.extend(ends.iter().filter(|(r, _)| **r != ra && **r != rb).map(|(_, l)| (l[0], l[l.len() - 1])));
    frags
}

/// Walks a 2-regular edge set from vertex 0, towards its smaller neighbor first.
pub(crate) fn cycle_from_edges(n: usize, edges: &[Edge]) -> Vec<usize> {
    let mut adj = vec![[usize::MAX; 2]; n];
    for e in edges {
        for (u, v) in [(e.0, e.1), (e.1, e.0)] {
            let slot = if adj[u][0] == usize::MAX { 0 } else { 1 };
            adj[u][slot] = v;
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut prev = 0;
    let mut cur = adj[0][0].min(adj[0][1]);
    order.push(0);
    while cur != 0 {
        order.push(cur);
        let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
        prev = cur;
        cur = next;
    }
    order
}
