//! Breadth-first branch and bound over edge constraints.

mod exact;
mod onetree;

pub use exact::{constrained_optimum, EXACT_SEGMENTS_MAX};
pub use onetree::{hk_one_tree_bound, one_tree_bound_matrix, OneTree, DEFAULT_ITERS, HALVING_PATIENCE};

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::held_karp_tour;
use crate::heuristics::{run, run_constrained, EdgeConstraints, Heuristic, Segments};
use crate::instance::Instance;
use crate::tour::{Edge, Tour};

/// Nodes with `bound ≥ B − PRUNE_TOL` are pruned.
pub const PRUNE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    OneTree,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncumbentKind {
    /// `run_constrained` at every node.
    Heuristic(Heuristic),
    /// The optimum from the start.
    Exact,
    /// A fixed value that is never lowered.
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchRule {
    /// Undecided edge whose 1-tree frequency is closest to one half.
    MostFractional,
    /// Longest undecided edge of the reference tour.
    LongestIncumbent,
    /// Lexicographically first undecided edge.
    Lexicographic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnBConfig {
    pub bound: BoundKind,
    pub incumbent: IncumbentKind,
    pub rule: BranchRule,
    pub node_cap: usize,
    /// Deepest level that may be bounded.
    pub level_cap: usize,
    pub one_tree_iters: usize,
    /// Add the constraints implied by degree counts and segment ends.
    pub propagate: bool,
    pub record_trace: bool,
}

impl Default for BnBConfig {
    fn default() -> Self {
        BnBConfig {
            bound: BoundKind::OneTree,
            incumbent: IncumbentKind::Heuristic(Heuristic::NearestNeighbor),
            rule: BranchRule::MostFractional,
            node_cap: 1_000_000,
            level_cap: 64,
            one_tree_iters: DEFAULT_ITERS,
            propagate: true,
            record_trace: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Certified,
    NodeCap,
    LevelCap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeAction {
    Expanded,
    Pruned,
    /// The constraints admit no tour.
    Infeasible,
    /// The forced edges form a tour, which is evaluated directly.
    Leaf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub node: usize,
    pub parent: Option<usize>,
    pub level: usize,
    pub bound: f64,
    pub action: NodeAction,
    pub branch_edge: Option<Edge>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: usize,
    pub open: usize,
    pub expanded: usize,
    /// Includes infeasible nodes.
    pub pruned: usize,
    pub leaves: usize,
    /// Incumbent after the level.
    pub incumbent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncumbentUpdate {
    /// Nodes bounded so far; the search's clock.
    pub nodes: usize,
    pub level: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnBResult {
    pub termination: Termination,
    pub levels: Vec<LevelStats>,
    pub incumbent: f64,
    pub best: Option<Tour>,
    pub history: Vec<IncumbentUpdate>,
    pub nodes: usize,
    pub trace: Vec<TraceEvent>,
}

impl BnBResult {
    pub fn expanded(&self) -> usize {
        self.levels.iter().map(|l| l.expanded).sum()
    }
}

#[derive(Clone, Debug)]
struct Node {
    id: usize,
    parent: Option<usize>,
    /// `None` when propagation found the constraints infeasible.
    cons: Option<EdgeConstraints>,
}

struct Evaluation {
    bound: f64,
    /// A tour honoring the node's constraints, if one came out of bounding.
    tour: Option<Vec<usize>>,
    heuristic: Option<Tour>,
    frequency: BTreeMap<Edge, f64>,
    leaf: bool,
}

/// Adds the constraints every tour in `Ω(I, O)` satisfies anyway: a vertex
/// with two forced edges loses its other edges, a vertex with two allowed
/// edges gets both forced, segment ends may not close a short cycle, and a
/// Hamiltonian forced path gets its closing edge. `None` when infeasible.
pub fn propagate(n: usize, cons: &EdgeConstraints) -> Option<EdgeConstraints> {
    let mut c = cons.clone();
    loop {
        if c.validate(n).is_err() {
            return None;
        }
        let before = (c.forced.len(), c.forbidden.len());
        let deg = c.forced_degrees(n);
        for v in 0..n {
            if deg[v] == 2 {
                for w in 0..n {
                    if w != v && !c.is_forced(v, w) {
                        c.forbidden.insert(Edge::new(v, w));
                    }
                }
            }
        }
        for v in 0..n {
            let allowed: Vec<usize> = (0..n).filter(|&w| w != v && c.allows(v, w)).collect();
            if allowed.len() == 2 {
                for w in allowed {
                    c.forced.insert(Edge::new(v, w));
                }
            }
        }
        if c.validate(n).is_err() {
            return None;
        }
        let segs = Segments::build(n, &c).ok()?;
        if segs.full_cycle.is_none() {
            for s in 0..segs.len() {
                if segs.segs[s].len() < 3 {
                    continue;
                }
                let (a, b) = segs.ends(s);
                if segs.len() > 1 {
                    c.forbidden.insert(Edge::new(a, b));
                } else {
                    c.forced.insert(Edge::new(a, b));
                }
            }
        }
        if (c.forced.len(), c.forbidden.len()) == before {
            return Some(c);
        }
    }
}

/// Tours honoring `cons`, by enumeration; for checking small cases.
pub fn enumerate_tours(n: usize, cons: &EdgeConstraints) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    let mut rest: Vec<usize> = (1..n).collect();
    loop {
        // each cycle once: fix 0 first and rest[0] < rest[last]
        if rest[0] < rest[rest.len() - 1] {
            let mut order = vec![0];
            order.extend(&rest);
            let ok = (0..n).all(|i| {
                let e = Edge::new(order[i], order[(i + 1) % n]);
                !cons.forbidden.contains(&e)
            }) && cons.forced.iter().all(|e| {
                let i = order.iter().position(|&v| v == e.0).expect("vertex");
                order[(i + 1) % n] == e.1 || order[(i + n - 1) % n] == e.1
            });
            if ok {
                out.push(order);
            }
        }
        if !crate::exact::next_permutation(&mut rest) {
            return out;
        }
    }
}

fn undecided(n: usize, cons: &EdgeConstraints) -> impl Iterator<Item = Edge> + '_ {
    (0..n).flat_map(move |a| (a + 1..n).map(move |b| Edge(a, b))).filter(move |e| !cons.is_decided(e))
}

fn choose_edge(n: usize, rule: BranchRule, cons: &EdgeConstraints, ev: &Evaluation, reference: Option<&Tour>, dist: &[Vec<f64>]) -> Option<Edge> {
    let first = || undecided(n, cons).next();
    match rule {
        BranchRule::Lexicographic => first(),
        BranchRule::MostFractional => {
            let mut pick: Option<(f64, Edge)> = None;
            for e in undecided(n, cons) {
                let score = (ev.frequency.get(&e).copied().unwrap_or(0.0) - 0.5).abs();
                if pick.is_none_or(|(s, _)| score < s) {
                    pick = Some((score, e));
                }
            }
            pick.map(|p| p.1)
        }
        BranchRule::LongestIncumbent => {
            let mut pick: Option<(f64, Edge)> = None;
            if let Some(t) = reference.or(ev.heuristic.as_ref()) {
                let mut edges = t.edges();
                edges.sort();
                for e in edges {
                    if cons.is_decided(&e) {
                        continue;
                    }
                    let len = dist[e.0][e.1];
                    if pick.is_none_or(|(l, _)| len > l) {
                        pick = Some((len, e));
                    }
                }
            }
            pick.map(|p| p.1).or_else(first)
        }
    }
}

/// Breadth-first branch and bound with a barrier between levels. Every node
/// of a level is bounded (in parallel) before any is pruned or branched, and
/// children are ordered forced-before-forbidden, so the search is
/// deterministic. Child `(I ∪ {e}, O)` and `(I, O ∪ {e})` partition the
/// parent's tours.
pub fn run_bfs_bnb(inst: &Instance, cfg: &BnBConfig) -> Result<BnBResult> {
    let n = inst.len();
    if n < 3 {
        return Err(Error::InvalidArgument("branch and bound needs n >= 3".into()));
    }
    let dist = inst.distance_matrix();
    let root_ref = run(Heuristic::NearestNeighbor, inst)?;
    let ub = root_ref.length;

    let (mut incumbent, mut best) = match cfg.incumbent {
        IncumbentKind::Exact => {
            let t = held_karp_tour(inst)?;
            (t.length, Some(t))
        }
        IncumbentKind::Fixed(b) => (b, None),
        IncumbentKind::Heuristic(_) => (f64::INFINITY, None),
    };
    let fixed = matches!(cfg.incumbent, IncumbentKind::Fixed(_));
    let mut history = Vec::new();
    if incumbent.is_finite() {
        history.push(IncumbentUpdate { nodes: 0, level: 0, value: incumbent });
    }

    let root = if cfg.propagate { propagate(n, &EdgeConstraints::new()) } else { Some(EdgeConstraints::new()) };
    let mut frontier = vec![Node { id: 0, parent: None, cons: root }];
    let mut next_id = 1;
    let mut levels = Vec::new();
    let mut trace = Vec::new();
    let mut nodes = 0;
    let mut termination = Termination::Certified;

    for level in 0.. {
        if frontier.is_empty() {
            break;
        }
        if level > cfg.level_cap {
            termination = Termination::LevelCap;
            break;
        }
        if nodes + frontier.len() > cfg.node_cap {
            termination = Termination::NodeCap;
            break;
        }
        let want_freq = cfg.rule == BranchRule::MostFractional;
        let evals: Vec<Result<Evaluation>> = frontier
            .par_iter()
            .map(|node| evaluate(node, &dist, inst, cfg, ub, want_freq))
            .collect();
        let evals: Vec<Evaluation> = evals.into_iter().collect::<Result<_>>()?;
        nodes += frontier.len();

        // incumbent updates first, in node order
        for ev in &evals {
            let found = ev
                .tour
                .as_ref()
                .map(|o| Tour::from_order(inst, o.clone()))
                .into_iter()
                .chain(ev.heuristic.clone());
            for t in found {
                if best.as_ref().is_none_or(|b| t.length < b.length) {
                    if !fixed && t.length < incumbent {
                        incumbent = t.length;
                        history.push(IncumbentUpdate { nodes, level, value: incumbent });
                    }
                    best = Some(t);
                }
            }
        }

        let reference = if fixed { Some(&root_ref) } else { best.as_ref().or(Some(&root_ref)) };
        let mut stats = LevelStats { level, open: frontier.len(), ..LevelStats::default() };
        let mut children = Vec::new();
        for (node, ev) in frontier.iter().zip(&evals) {
            let mut event =
                TraceEvent { node: node.id, parent: node.parent, level, bound: ev.bound, action: NodeAction::Pruned, branch_edge: None };
            match &node.cons {
                None => {
                    event.action = NodeAction::Infeasible;
                    stats.pruned += 1;
                }
                Some(_) if ev.leaf => {
                    event.action = NodeAction::Leaf;
                    stats.leaves += 1;
                }
                Some(_) if !ev.bound.is_finite() => {
                    event.action = NodeAction::Infeasible;
                    stats.pruned += 1;
                }
                Some(_) if ev.bound >= incumbent - PRUNE_TOL => {
                    stats.pruned += 1;
                }
                Some(cons) => match choose_edge(n, cfg.rule, cons, ev, reference, &dist) {
                    None => {
                        event.action = NodeAction::Infeasible;
                        stats.pruned += 1;
                    }
                    Some(e) => {
                        event.action = NodeAction::Expanded;
                        event.branch_edge = Some(e);
                        stats.expanded += 1;
                        for child in [cons.with_forced(e), cons.with_forbidden(e)] {
                            let child = if cfg.propagate { propagate(n, &child) } else { child.validate(n).ok().map(|_| child) };
                            children.push(Node { id: next_id, parent: Some(node.id), cons: child });
                            next_id += 1;
                        }
                    }
                },
            }
            if cfg.record_trace {
                trace.push(event);
            }
        }
        stats.incumbent = incumbent;
        levels.push(stats);
        frontier = children;
    }
    Ok(BnBResult { termination, levels, incumbent, best, history, nodes, trace })
}

fn evaluate(node: &Node, dist: &[Vec<f64>], inst: &Instance, cfg: &BnBConfig, ub: f64, want_freq: bool) -> Result<Evaluation> {
    let n = dist.len();
    let Some(cons) = &node.cons else {
        return Ok(Evaluation { bound: f64::INFINITY, tour: None, heuristic: None, frequency: BTreeMap::new(), leaf: false });
    };
    let segs = Segments::build(n, cons)?;
    if let Some(cycle) = segs.full_cycle {
        let len = Tour::from_order(inst, cycle.clone()).length;
        return Ok(Evaluation { bound: len, tour: Some(cycle), heuristic: None, frequency: BTreeMap::new(), leaf: true });
    }
    let heuristic = match cfg.incumbent {
        IncumbentKind::Heuristic(h) => {
            if node.parent.is_none() {
                run(h, inst).ok()
            } else {
                run_constrained(h, inst, cons).ok()
            }
        }
        _ => None,
    };
    let (bound, tour, frequency) = match cfg.bound {
        BoundKind::OneTree => {
            let t = one_tree_bound_matrix(dist, cons, cfg.one_tree_iters, Some(ub));
            (t.bound, t.tour, t.frequency)
        }
        BoundKind::Exact => {
            let (bound, tour) = match constrained_optimum(dist, cons)? {
                Some((c, order)) => (c, Some(order)),
                None => (f64::INFINITY, None),
            };
            let frequency = if want_freq && bound.is_finite() {
                one_tree_bound_matrix(dist, cons, cfg.one_tree_iters, Some(ub)).frequency
            } else {
                BTreeMap::new()
            };
            (bound, tour, frequency)
        }
    };
    Ok(Evaluation { bound, tour, heuristic, frequency, leaf: false })
}

/// One row per level: `level,open,expanded,pruned,leaves,incumbent`.
pub fn write_levels_csv<W: Write>(result: &BnBResult, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for l in &result.levels {
        out.serialize(l)?;
    }
    out.flush()?;
    Ok(())
}
