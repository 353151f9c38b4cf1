//! Karp's dissection: cut the box into about `n / ln n` congruent cells, solve
//! every cell exactly, and patch the cell tours into one tour.
//!
//! Patching visits the nonempty cells in boustrophedon order. Each cell tour
//! loses exactly one edge and becomes a path; consecutive paths are joined end
//! to start. Which edge to delete and which way to traverse each path is
//! chosen by a dynamic program over the cell chain, so the patching cost is
//! the cheapest among all such reconnections.

use serde::{Deserialize, Serialize};

use super::rotate_to_zero;
use crate::error::{Error, Result};
use crate::exact::held_karp_tour_with_limit;
use crate::instance::Instance;
use crate::tour::Tour;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    Natural,
    Binary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KarpConfig {
    /// Cells holding more points are split into `2^d` children.
    pub cell_cap: usize,
    /// Logarithm in the cell-count formula.
    pub log_base: LogBase,
}

impl Default for KarpConfig {
    fn default() -> Self {
        KarpConfig { cell_cap: 16, log_base: LogBase::Natural }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KarpReport {
    pub cells_per_side: usize,
    pub log_base: LogBase,
    pub leaf_cells: usize,
    pub nonempty_cells: usize,
    pub splits: usize,
    pub cell_tour_total: f64,
    pub deleted_total: f64,
    pub connector_total: f64,
}

/// `⌊(n / ln n)^{1/d}⌋`, at least 1.
pub fn cells_per_side(n: usize, d: usize) -> usize {
    cells_per_side_with(n, d, LogBase::Natural)
}

pub fn cells_per_side_with(n: usize, d: usize, base: LogBase) -> usize {
    if n < 3 {
        return 1;
    }
    let log = match base {
        LogBase::Natural => (n as f64).ln(),
        LogBase::Binary => (n as f64).log2(),
    };
    let r = (n as f64 / log).powf(1.0 / d as f64);
    // guard against r landing a hair below an integer
    let f = (r + 1e-12).floor() as usize;
    f.max(1)
}

pub fn karp_dissection(inst: &Instance) -> Result<Tour> {
    karp_dissection_report(inst, &KarpConfig::default()).map(|(t, _)| t)
}

struct Cell {
    lo: Vec<f64>,
    side: f64,
    members: Vec<usize>,
}

/// Boustrophedon enumeration of an `m^d` grid: each coordinate sweeps back and
/// forth depending on the parity of the slower coordinates.
fn snake_order(m: usize, d: usize) -> Vec<Vec<usize>> {
    let total = m.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        // digits, most significant = last coordinate
        let mut digits = vec![0; d];
        let mut c = code;
        for k in 0..d {
            digits[k] = c % m;
            c /= m;
        }
        let mut idx = vec![0; d];
        let mut parity = 0;
        for k in (0..d).rev() {
            idx[k] = if parity % 2 == 0 { digits[k] } else { m - 1 - digits[k] };
            parity += idx[k];
        }
        out.push(idx);
    }
    out
}

fn leaf_cells(inst: &Instance, cell: Cell, cap: usize, out: &mut Vec<Cell>, splits: &mut usize) {
    if cell.members.len() <= cap || cell.side < 1e-9 * inst.domain.t {
        out.push(cell);
        return;
    }
    *splits += 1;
    let d = inst.domain.d;
    let half = cell.side / 2.0;
    let mut children: Vec<Cell> = snake_order(2, d)
        .into_iter()
        .map(|idx| Cell {
            lo: cell.lo.iter().zip(&idx).map(|(l, &i)| l + i as f64 * half).collect(),
            side: half,
            members: Vec::new(),
        })
        .collect();
    let order = snake_order(2, d);
    for &v in &cell.members {
        let p = &inst.points[v].coords;
        let idx: Vec<usize> = (0..d).map(|k| usize::from(p[k] >= cell.lo[k] + half)).collect();
        let pos = order.iter().position(|o| *o == idx).expect("child");
        children[pos].members.push(v);
    }
    for child in children {
        leaf_cells(inst, child, cap, out, splits);
    }
}

pub fn karp_dissection_report(inst: &Instance, cfg: &KarpConfig) -> Result<(Tour, KarpReport)> {
    let n = inst.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty instance".into()));
    }
    if cfg.cell_cap < 1 || cfg.cell_cap > crate::exact::DEFAULT_N_MAX {
        return Err(Error::InvalidArgument(format!("cell cap {} outside 1..=24", cfg.cell_cap)));
    }
    let d = inst.domain.d;
    let t = inst.domain.t;
    let m = cells_per_side_with(n, d, cfg.log_base);
    let side = t / m as f64;

    let grid = snake_order(m, d);
    let mut rank = vec![0usize; grid.len()];
    let flat = |idx: &[usize]| idx.iter().rev().fold(0usize, |acc, &i| acc * m + i);
    for (r, idx) in grid.iter().enumerate() {
        rank[flat(idx)] = r;
    }
    let mut top: Vec<Cell> = grid
        .iter()
        .map(|idx| Cell { lo: idx.iter().map(|&i| i as f64 * side).collect(), side, members: Vec::new() })
        .collect();
    for (v, p) in inst.points.iter().enumerate() {
        let idx: Vec<usize> = p.coords.iter().map(|&c| ((c / side) as usize).min(m - 1)).collect();
        top[rank[flat(&idx)]].members.push(v);
    }
    let mut leaves = Vec::new();
    let mut splits = 0;
    for cell in top {
        leaf_cells(inst, cell, cfg.cell_cap, &mut leaves, &mut splits);
    }
    let leaf_count = leaves.len();
    let cells: Vec<Vec<usize>> = leaves.into_iter().map(|c| c.members).filter(|m| !m.is_empty()).collect();

    // exact tour per cell, in global indices
    let mut tours: Vec<Vec<usize>> = Vec::with_capacity(cells.len());
    let mut cell_total = 0.0;
    for members in &cells {
        let sub = inst.subset(members);
        let local = held_karp_tour_with_limit(&sub, cfg.cell_cap.max(members.len()))?;
        cell_total += local.length;
        tours.push(local.order.iter().map(|&i| members[i]).collect());
    }

    let (order, deleted, connectors) = patch(inst, &tours);
    let tour = Tour::from_order(inst, rotate_to_zero(order));
    let report = KarpReport {
        cells_per_side: m,
        log_base: cfg.log_base,
        leaf_cells: leaf_count,
        nonempty_cells: cells.len(),
        splits,
        cell_tour_total: cell_total,
        deleted_total: deleted,
        connector_total: connectors,
    };
    Ok((tour, report))
}

/// Ways to open a cell tour: (first vertex, last vertex, deleted edge length, path).
fn openings(inst: &Instance, tour: &[usize]) -> Vec<(usize, usize, f64)> {
    let k = tour.len();
    if k == 1 {
        return vec![(tour[0], tour[0], 0.0)];
    }
    let mut out = Vec::with_capacity(2 * k);
    for i in 0..k {
        // delete edge (tour[i], tour[i+1]); the path runs tour[i+1] ... tour[i]
        let a = tour[i];
        let b = tour[(i + 1) % k];
        let len = inst.dist(a, b);
        out.push((b, a, len));
        out.push((a, b, len));
        if k == 2 {
            break;
        }
    }
    out
}

fn materialize(tour: &[usize], first: usize, last: usize) -> Vec<usize> {
    let k = tour.len();
    if k == 1 {
        return vec![tour[0]];
    }
    let pf = tour.iter().position(|&v| v == first).expect("first");
    let forward = tour[(pf + k - 1) % k] == last;
    (0..k).map(|s| if forward { tour[(pf + s) % k] } else { tour[(pf + k - s) % k] }).collect()
}

/// Chain DP over cell openings; returns (order, total deleted, total connectors).
fn patch(inst: &Instance, tours: &[Vec<usize>]) -> (Vec<usize>, f64, f64) {
    let c = tours.len();
    if c == 1 {
        return (tours[0].clone(), 0.0, 0.0);
    }
    let opts: Vec<Vec<(usize, usize, f64)>> = tours.iter().map(|t| openings(inst, t)).collect();
    let mut best_total = f64::INFINITY;
    let mut best_choice: Vec<usize> = Vec::new();
    for (f, &(first0, _, del0)) in opts[0].iter().enumerate() {
        // cost[k][o]: cheapest cost of cells 0..=k with cell k opened by option o
        let mut cost: Vec<f64> = opts[0].iter().enumerate().map(|(o, _)| if o == f { -del0 } else { f64::INFINITY }).collect();
        let mut back: Vec<Vec<usize>> = Vec::with_capacity(c);
        for k in 1..c {
            let mut next = vec![f64::INFINITY; opts[k].len()];
            let mut arg = vec![0; opts[k].len()];
            for (o, &(fi, _, del)) in opts[k].iter().enumerate() {
                for (p, &(_, la, _)) in opts[k - 1].iter().enumerate() {
                    if cost[p].is_infinite() {
                        continue;
                    }
                    let v = cost[p] + inst.dist(la, fi) - del;
                    if v < next[o] {
                        next[o] = v;
                        arg[o] = p;
                    }
                }
            }
            back.push(arg);
            cost = next;
        }
        for (o, &(_, last, _)) in opts[c - 1].iter().enumerate() {
            let total = cost[o] + inst.dist(last, first0);
            if total < best_total {
                best_total = total;
                let mut choice = vec![0; c];
                choice[c - 1] = o;
                for k in (1..c).rev() {
                    choice[k - 1] = back[k - 1][choice[k]];
                }
                best_choice = choice;
            }
        }
    }
    let mut order = Vec::new();
    let mut deleted = 0.0;
    let mut connectors = 0.0;
    for k in 0..c {
        let (first, last, del) = opts[k][best_choice[k]];
        deleted += del;
        let prev_last = opts[(k + c - 1) % c][best_choice[(k + c - 1) % c]].1;
        connectors += inst.dist(prev_last, first);
        order.extend(materialize(&tours[k], first, last));
    }
    (order, deleted, connectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::held_karp_tour;
    use crate::instance::gen_uniform;
    use crate::Topology;

    #[test]
    fn cell_counts() {
        assert_eq!(cells_per_side(1024, 2), 12);
        assert_eq!(cells_per_side(5, 2), 1);
    }

    #[test]
    fn snake_is_a_hamiltonian_grid_path() {
        for (m, d) in [(3, 2), (4, 2), (2, 3), (3, 3)] {
            let s = snake_order(m, d);
            assert_eq!(s.len(), m.pow(d as u32));
            for w in s.windows(2) {
                let steps: usize = w[0].iter().zip(&w[1]).map(|(a, b)| a.abs_diff(*b)).sum();
                assert_eq!(steps, 1);
            }
        }
    }

    #[test]
    fn single_cell_equals_exact() {
        for seed in 0..10 {
            let inst = gen_uniform(8, 2, seed, Topology::Torus).unwrap();
            assert_eq!(cells_per_side(8, 2), 1);
            let k = karp_dissection(&inst).unwrap();
            let hk = held_karp_tour(&inst).unwrap();
            assert!((k.length - hk.length).abs() < 1e-9);
        }
    }

    #[test]
    fn patch_accounting_identity() {
        for seed in 0..5 {
            let inst = gen_uniform(1024, 2, seed, Topology::Torus).unwrap();
            let (tour, rep) = karp_dissection_report(&inst, &KarpConfig::default()).unwrap();
            tour.validate(&inst).unwrap();
            assert_eq!(rep.cells_per_side, 12);
            let rebuilt = rep.cell_tour_total - rep.deleted_total + rep.connector_total;
            assert!((rebuilt - tour.length).abs() < 1e-6 * tour.length);
        }
    }

    #[test]
    fn overfull_cells_are_split() {
        let mut inst = gen_uniform(200, 2, 1, Topology::Cube).unwrap();
        // pile 40 points into one corner cell
        for v in 0..40 {
            inst.points[v] = crate::Point::xy(0.01 + 0.01 * v as f64, 0.02 + 0.003 * v as f64);
        }
        let (tour, rep) = karp_dissection_report(&inst, &KarpConfig::default()).unwrap();
        tour.validate(&inst).unwrap();
        assert!(rep.splits > 0);
    }
}
