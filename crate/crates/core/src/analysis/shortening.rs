use serde::{Deserialize, Serialize};

use super::restrict_tour;
use crate::error::Result;
use crate::exact::{solve_path_matrix, solve_tour_matrix, PathEnds};
use crate::instance::Instance;
use crate::tour::Tour;

/// Largest run re-solved exactly; longer runs fall back to 2-opt.
pub const EXACT_RUN_MAX: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShortenMode {
    Exact,
    /// At least one run was too long for the exact re-solve.
    Heuristic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortenOutcome {
    pub gain: f64,
    pub mode: ShortenMode,
    /// Present iff `gain ≥ delta1`.
    pub improved: Option<Tour>,
}

impl ShortenOutcome {
    pub fn succeeded(&self) -> bool {
        self.improved.is_some()
    }
}

fn matrix(inst: &Instance, seq: &[usize]) -> Vec<Vec<f64>> {
    seq.iter().map(|&a| seq.iter().map(|&b| inst.dist(a, b)).collect()).collect()
}

/// 2-opt on a path with both ends fixed, to a local optimum.
fn two_opt_fixed(c: &[Vec<f64>], order: &mut [usize]) {
    let n = order.len();
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n.saturating_sub(3) {
            for j in i + 2..n - 1 {
                let (a, b, x, y) = (order[i], order[i + 1], order[j], order[j + 1]);
                let delta = c[a][x] + c[b][y] - c[a][b] - c[x][y];
                if delta < -1e-12 {
                    order[i + 1..=j].reverse();
                    improved = true;
                }
            }
        }
    }
}

/// Re-optimizes every run of `tour` through `z` with its outside neighbors
/// fixed: exactly for runs of at most [`EXACT_RUN_MAX`] vertices, by 2-opt
/// otherwise.
pub fn shortenable(inst: &Instance, tour: &Tour, z: &[usize], delta1: f64) -> Result<ShortenOutcome> {
    let restriction = restrict_tour(inst, tour, z)?;
    let n = tour.len();
    let mut mode = ShortenMode::Exact;

    if restriction.full || restriction.runs.first().is_some_and(|r| r.order.len() + 1 == n) {
        let order = tour.order.clone();
        let c = matrix(inst, &order);
        let new_local = if n <= EXACT_RUN_MAX + 2 {
            solve_tour_matrix(&c, n)?.1
        } else {
            mode = ShortenMode::Heuristic;
            let mut o: Vec<usize> = (0..n).collect();
            o.push(0);
            two_opt_fixed(&c, &mut o);
            o.pop();
            o
        };
        let new = Tour::from_order(inst, new_local.iter().map(|&i| order[i]).collect());
        let gain = tour.length - new.length;
        return Ok(ShortenOutcome { gain, mode, improved: (gain >= delta1).then_some(new) });
    }

    let pos = super::position_index(tour, inst.len());
    let mut replacement: Vec<Option<Vec<usize>>> = vec![None; n];
    for run in &restriction.runs {
        let (first, last) = run.endpoints();
        let pred = tour.order[(pos[first] + n - 1) % n];
        let succ = tour.order[(pos[last] + 1) % n];
        let mut seq = vec![pred];
        seq.extend(&run.order);
        seq.push(succ);
        let c = matrix(inst, &seq);
        let m = seq.len();
        let local = if run.order.len() <= EXACT_RUN_MAX {
            solve_path_matrix(&c, PathEnds::Fixed(0, m - 1), m)?.1
        } else {
            mode = ShortenMode::Heuristic;
            let mut o: Vec<usize> = (0..m).collect();
            two_opt_fixed(&c, &mut o);
            o
        };
        replacement[pos[first]] = Some(local[1..m - 1].iter().map(|&i| seq[i]).collect());
    }

    let start = tour.order.iter().position(|v| !z.contains(v)).expect("not full");
    let mut order = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        let at = (start + k) % n;
        if let Some(rep) = &replacement[at] {
            k += rep.len();
            order.extend(rep);
        } else {
            order.push(tour.order[at]);
            k += 1;
        }
    }
    let new = Tour::from_order(inst, order);
    let gain = tour.length - new.length;
    Ok(ShortenOutcome { gain, mode, improved: (gain >= delta1).then_some(new) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    /// Unit square corners plus a far point; the crossing tour visits the
    /// square as 0-2-1-3.
    fn crossing() -> (Instance, Tour) {
        let pts = vec![
            Point::xy(0.0, 0.0),
            Point::xy(1.0, 0.0),
            Point::xy(1.0, 1.0),
            Point::xy(0.0, 1.0),
            Point::xy(-5.0, 0.5),
            Point::xy(-6.0, 0.5),
        ];
        let inst = Instance::planar(pts);
        let tour = Tour::from_order(&inst, vec![4, 0, 2, 1, 3, 5]);
        (inst, tour)
    }

    #[test]
    fn crossing_gain_matches_hand_value() {
        let (inst, tour) = crossing();
        let out = shortenable(&inst, &tour, &[0, 1, 2, 3], 1e-6).unwrap();
        // 0-2-1-3 costs 2√2 + 1 inside; the best fixed-end route 0-1-2-3 costs 3
        let expect = 2.0 * 2f64.sqrt() + 1.0 - 3.0;
        assert!((out.gain - expect).abs() < 1e-12, "{}", out.gain);
        assert_eq!(out.mode, ShortenMode::Exact);
        let better = out.improved.unwrap();
        better.validate(&inst).unwrap();
        assert!((tour.length - better.length - expect).abs() < 1e-12);
    }

    #[test]
    fn optimal_run_is_not_shortened() {
        let (inst, _) = crossing();
        let tour = Tour::from_order(&inst, vec![4, 0, 1, 2, 3, 5]);
        let out = shortenable(&inst, &tour, &[0, 1, 2, 3], 1e-9).unwrap();
        assert!(out.improved.is_none());
        assert!(out.gain.abs() < 1e-12);
    }

    #[test]
    fn small_gain_is_reported_without_tour() {
        let (inst, tour) = crossing();
        let out = shortenable(&inst, &tour, &[0, 1, 2, 3], 10.0).unwrap();
        assert!(out.improved.is_none() && out.gain > 0.8);
    }

    #[test]
    fn long_runs_use_two_opt() {
        let n = 30;
        let pts: Vec<Point> = (0..n).map(|i| Point::xy(i as f64, if i % 2 == 0 { 0.0 } else { 0.1 })).collect();
        let inst = Instance::planar(pts);
        let mut order: Vec<usize> = (0..n).collect();
        order[5..25].reverse();
        order.swap(10, 12);
        let tour = Tour::from_order(&inst, order);
        let z: Vec<usize> = (3..27).collect();
        let out = shortenable(&inst, &tour, &z, 1e-9).unwrap();
        assert_eq!(out.mode, ShortenMode::Heuristic);
        assert!(out.gain > 0.0);
        out.improved.unwrap().validate(&inst).unwrap();
    }
}
