use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tour::Edge;

/// Forced edges `I` and forbidden edges `O`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeConstraints {
    pub forced: BTreeSet<Edge>,
    pub forbidden: BTreeSet<Edge>,
}

impl EdgeConstraints {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.forced.is_empty() && self.forbidden.is_empty()
    }

    pub fn allows(&self, a: usize, b: usize) -> bool {
        self.forbidden.is_empty() || !self.forbidden.contains(&Edge::new(a, b))
    }

    pub fn is_forced(&self, a: usize, b: usize) -> bool {
        !self.forced.is_empty() && self.forced.contains(&Edge::new(a, b))
    }

    pub fn is_decided(&self, e: &Edge) -> bool {
        self.forced.contains(e) || self.forbidden.contains(e)
    }

    pub fn with_forced(&self, e: Edge) -> Self {
        let mut c = self.clone();
        c.forced.insert(e);
        c
    }

    pub fn with_forbidden(&self, e: Edge) -> Self {
        let mut c = self.clone();
        c.forbidden.insert(e);
        c
    }

    pub fn forced_degrees(&self, n: usize) -> Vec<usize> {
        let mut deg = vec![0; n];
        for e in &self.forced {
            deg[e.0] += 1;
            deg[e.1] += 1;
        }
        deg
    }

    /// Structural consistency: `I ∩ O = ∅`, forced degree ≤ 2, no forced cycle
    /// shorter than `n`, and every vertex keeps enough allowed edges.
    pub fn validate(&self, n: usize) -> Result<()> {
        for e in &self.forced {
            if e.1 >= n {
                return Err(Error::InvalidArgument(format!("edge {e:?} outside 0..{n}")));
            }
        }
        if let Some(e) = self.forced.intersection(&self.forbidden).next() {
            return Err(Error::Infeasible(format!("edge {e:?} both forced and forbidden")));
        }
        Segments::build(n, self).map(|_| ())?;
        if n >= 3 {
            let mut allowed = vec![n - 1; n];
            for e in &self.forbidden {
                allowed[e.0] -= 1;
                allowed[e.1] -= 1;
            }
            if let Some(v) = allowed.iter().position(|&a| a < 2) {
                return Err(Error::Infeasible(format!("vertex {v} has fewer than two allowed edges")));
            }
        }
        Ok(())
    }
}

/// Vertex-disjoint paths obtained by contracting the forced edges.
#[derive(Clone, Debug)]
pub struct Segments {
    pub segs: Vec<Vec<usize>>,
    pub seg_of: Vec<usize>,
    /// Set when the forced edges already form a Hamiltonian cycle.
    pub full_cycle: Option<Vec<usize>>,
}

impl Segments {
    pub fn build(n: usize, cons: &EdgeConstraints) -> Result<Segments> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &cons.forced {
            if e.1 >= n {
                return Err(Error::InvalidArgument(format!("edge {e:?} outside 0..{n}")));
            }
            adj[e.0].push(e.1);
            adj[e.1].push(e.0);
        }
        if let Some(v) = adj.iter().position(|a| a.len() > 2) {
            return Err(Error::Infeasible(format!("vertex {v} has three forced edges")));
        }
        let mut seg_of = vec![usize::MAX; n];
        let mut segs = Vec::new();
        for s in 0..n {
            if seg_of[s] != usize::MAX || adj[s].len() == 2 {
                continue;
            }
            let id = segs.len();
            let mut path = vec![s];
            seg_of[s] = id;
            let mut prev = usize::MAX;
            let mut cur = s;
            loop {
                let next = adj[cur].iter().copied().find(|&w| w != prev && seg_of[w] == usize::MAX);
                match next {
                    Some(w) => {
                        seg_of[w] = id;
                        path.push(w);
                        prev = cur;
                        cur = w;
                    }
                    None => break,
                }
            }
            segs.push(path);
        }
        if seg_of.iter().any(|&s| s == usize::MAX) {
            // the leftovers all have forced degree 2, so they form cycles
            let start = seg_of.iter().position(|&s| s == usize::MAX).expect("leftover");
            let mut cycle = vec![start];
            let mut prev = start;
            let mut cur = adj[start][0];
            while cur != start {
                cycle.push(cur);
                let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
                prev = cur;
                cur = next;
            }
            if cycle.len() == n {
                return Ok(Segments { segs: vec![cycle.clone()], seg_of: vec![0; n], full_cycle: Some(cycle) });
            }
            return Err(Error::Infeasible(format!("forced edges close a cycle of length {}", cycle.len())));
        }
        Ok(Segments { segs, seg_of, full_cycle: None })
    }

    pub fn len(&self) -> usize {
        self.segs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segs.is_empty()
    }

    pub fn ends(&self, s: usize) -> (usize, usize) {
        let p = &self.segs[s];
        (p[0], p[p.len() - 1])
    }

    /// Smallest vertex index in the segment; used as its tie-breaking label.
    pub fn label(&self, s: usize) -> usize {
        *self.segs[s].iter().min().expect("nonempty segment")
    }

    /// Vertices of segment `s` traversed starting from end `entry`.
    pub fn oriented(&self, s: usize, entry: usize) -> impl Iterator<Item = &usize> {
        let p = &self.segs[s];
        let forward = p[0] == entry;
        let (a, b) = if forward { (Some(p.iter()), None) } else { (None, Some(p.iter().rev())) };
        a.into_iter().flatten().chain(b.into_iter().flatten())
    }
}

/// DFS steps [`completable`] may spend before it gives the benefit of the doubt.
pub(crate) const COMPLETION_BUDGET: usize = 50_000;

/// Whether vertex-disjoint paths, given by their end pairs (`a == b` for a
/// single vertex), can be joined into one Hamiltonian cycle through allowed
/// edges. Answers `true` when the search budget runs out.
pub(crate) fn completable(frags: &[(usize, usize)], cons: &EdgeConstraints) -> bool {
    if cons.forbidden.is_empty() || frags.is_empty() {
        return true;
    }
    let (first, last) = frags[0];
    if frags.len() == 1 {
        return first == last || cons.allows(first, last);
    }
    let mut used = vec![false; frags.len()];
    used[0] = true;
    let mut budget = COMPLETION_BUDGET;
    join_rest(frags, cons, first, last, 1, &mut used, &mut budget).unwrap_or(true)
}

fn join_rest(
    frags: &[(usize, usize)],
    cons: &EdgeConstraints,
    start: usize,
    cur: usize,
    placed: usize,
    used: &mut [bool],
    budget: &mut usize,
) -> Option<bool> {
    if placed == frags.len() {
        return Some(cons.allows(cur, start));
    }
    *budget = budget.checked_sub(1)?;
    for j in 0..frags.len() {
        if used[j] {
            continue;
        }
        let (a, b) = frags[j];
        let ways: &[(usize, usize)] = if a == b { &[(a, a)] } else { &[(a, b), (b, a)] };
        for &(entry, exit) in ways {
            if !cons.allows(cur, entry) {
                continue;
            }
            used[j] = true;
            let found = join_rest(frags, cons, start, exit, placed + 1, used, budget);
            used[j] = false;
            if found != Some(false) {
                return found;
            }
        }
    }
    Some(false)
}
