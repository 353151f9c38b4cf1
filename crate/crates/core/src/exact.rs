//! Exact solvers: Held-Karp subset dynamic programming and permutation brute force.
//!
//! The DP stores, for every visited set and current vertex, the cheapest cost
//! of completing the route. Keeping the completion cost rather than the prefix
//! cost lets the reconstruction walk forwards and always take the smallest
//! admissible next vertex, which yields the lexicographically smallest optimal
//! sequence. Brute force enumerates permutations in lexicographic order and
//! keeps the first optimal one, so both routes agree on ties.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::tour::{PathSeq, Tour};

pub const DEFAULT_N_MAX: usize = 24;
pub const BRUTE_FORCE_MAX: usize = 10;

/// Slack under which two solution values count as tied.
pub fn tie_tolerance(opt: f64) -> f64 {
    1e-9 * opt.abs().max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathEnds {
    Free,
    Fixed(usize, usize),
}

/// Shortest route `start → interior (all, any order) → end` over a cost matrix.
/// `start_cost[v]` and `end_cost[v]` price the first and last interior vertex.
fn solve_open(c: &[Vec<f64>], interior: &[usize], start_cost: &[f64], end_cost: &[f64]) -> (f64, Vec<usize>) {
    let m = interior.len();
    if m == 0 {
        return (0.0, Vec::new());
    }
    let full = (1usize << m) - 1;
    let mut rem = vec![f64::INFINITY; (full + 1) * m];
    for j in 0..m {
        rem[full * m + j] = end_cost[j];
    }
    let local: Vec<Vec<f64>> = interior.iter().map(|&a| interior.iter().map(|&b| c[a][b]).collect()).collect();
    for mask in (1..full).rev() {
        for j in 0..m {
            if mask & (1 << j) == 0 {
                continue;
            }
            let row = &local[j];
            let mut best = f64::INFINITY;
            let mut free = full & !mask;
            while free != 0 {
                let v = free.trailing_zeros() as usize;
                free &= free - 1;
                let val = row[v] + rem[(mask | (1 << v)) * m + v];
                if val < best {
                    best = val;
                }
            }
            rem[mask * m + j] = best;
        }
    }
    let opt = (0..m).map(|v| start_cost[v] + rem[(1 << v) * m + v]).fold(f64::INFINITY, f64::min);
    let budget = opt + tie_tolerance(opt);

    let mut order = Vec::with_capacity(m);
    let first = (0..m).find(|&v| start_cost[v] + rem[(1 << v) * m + v] <= budget).expect("optimum attained");
    let mut acc = start_cost[first];
    let mut mask = 1usize << first;
    let mut cur = first;
    order.push(first);
    while mask != full {
        let next = (0..m)
            .filter(|&v| mask & (1 << v) == 0)
            .find(|&v| acc + local[cur][v] + rem[(mask | (1 << v)) * m + v] <= budget)
            .expect("optimal continuation exists");
        acc += local[cur][next];
        mask |= 1 << next;
        cur = next;
        order.push(next);
    }
    (opt, order.into_iter().map(|i| interior[i]).collect())
}

/// Optimal closed tour over a cost matrix; the sequence starts at vertex 0.
pub fn solve_tour_matrix(c: &[Vec<f64>], n_max: usize) -> Result<(f64, Vec<usize>)> {
    let n = c.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty instance".into()));
    }
    if n > n_max {
        return Err(Error::TooLarge { n, limit: n_max });
    }
    if n == 1 {
        return Ok((0.0, vec![0]));
    }
    let interior: Vec<usize> = (1..n).collect();
    let start: Vec<f64> = interior.iter().map(|&v| c[0][v]).collect();
    let end: Vec<f64> = interior.iter().map(|&v| c[v][0]).collect();
    let (opt, rest) = solve_open(c, &interior, &start, &end);
    let mut order = vec![0];
    order.extend(rest);
    Ok((opt, order))
}

/// Optimal Hamiltonian path over a cost matrix, free or with fixed ends.
pub fn solve_path_matrix(c: &[Vec<f64>], ends: PathEnds, n_max: usize) -> Result<(f64, Vec<usize>)> {
    let n = c.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty instance".into()));
    }
    if n > n_max {
        return Err(Error::TooLarge { n, limit: n_max });
    }
    match ends {
        PathEnds::Free => {
            let interior: Vec<usize> = (0..n).collect();
            let zeros = vec![0.0; n];
            Ok(solve_open(c, &interior, &zeros, &zeros))
        }
        PathEnds::Fixed(w, z) => {
            if w == z || w >= n || z >= n {
                return Err(Error::InvalidArgument(format!("bad endpoints ({w}, {z})")));
            }
            let interior: Vec<usize> = (0..n).filter(|&v| v != w && v != z).collect();
            let start: Vec<f64> = interior.iter().map(|&v| c[w][v]).collect();
            let end: Vec<f64> = interior.iter().map(|&v| c[v][z]).collect();
            let (mid, rest) = solve_open(c, &interior, &start, &end);
            let opt = if interior.is_empty() { c[w][z] } else { mid };
            let mut order = vec![w];
            order.extend(rest);
            order.push(z);
            Ok((opt, order))
        }
    }
}

pub fn held_karp_tour(inst: &Instance) -> Result<Tour> {
    held_karp_tour_with_limit(inst, DEFAULT_N_MAX)
}

pub fn held_karp_tour_with_limit(inst: &Instance, n_max: usize) -> Result<Tour> {
    let (_, order) = solve_tour_matrix(&inst.distance_matrix(), n_max)?;
    Ok(Tour::from_order(inst, order))
}

pub fn held_karp_path(inst: &Instance, ends: PathEnds) -> Result<PathSeq> {
    held_karp_path_with_limit(inst, ends, DEFAULT_N_MAX)
}

pub fn held_karp_path_with_limit(inst: &Instance, ends: PathEnds, n_max: usize) -> Result<PathSeq> {
    let (_, order) = solve_path_matrix(&inst.distance_matrix(), ends, n_max)?;
    Ok(PathSeq::from_order(inst, order))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BruteMode {
    Tour,
    Path(PathEnds),
}

/// Lexicographic successor; false once `v` is the last permutation.
pub fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Exhaustive optimum and lexicographically first optimal sequence.
pub fn brute_force(inst: &Instance, mode: BruteMode) -> Result<(f64, Vec<usize>)> {
    brute_force_matrix(&inst.distance_matrix(), mode)
}

pub fn brute_force_matrix(c: &[Vec<f64>], mode: BruteMode) -> Result<(f64, Vec<usize>)> {
    let n = c.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty instance".into()));
    }
    if n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge { n, limit: BRUTE_FORCE_MAX });
    }
    let (prefix, mut middle, suffix): (Vec<usize>, Vec<usize>, Vec<usize>) = match mode {
        BruteMode::Tour => (vec![0], (1..n).collect(), vec![]),
        BruteMode::Path(PathEnds::Free) => (vec![], (0..n).collect(), vec![]),
        BruteMode::Path(PathEnds::Fixed(w, z)) => {
            if w == z || w >= n || z >= n {
                return Err(Error::InvalidArgument(format!("bad endpoints ({w}, {z})")));
            }
            (vec![w], (0..n).filter(|&v| v != w && v != z).collect(), vec![z])
        }
    };
    let closed = mode == BruteMode::Tour;
    let eval = |seq: &[usize]| -> f64 {
        let mut s: f64 = seq.windows(2).map(|w| c[w[0]][w[1]]).sum();
        if closed && seq.len() > 1 {
            s += c[seq[seq.len() - 1]][seq[0]];
        }
        s
    };
    let assemble = |mid: &[usize]| -> Vec<usize> { prefix.iter().chain(mid).chain(&suffix).copied().collect() };

    let start = middle.clone();
    let mut best = f64::INFINITY;
    loop {
        best = best.min(eval(&assemble(&middle)));
        if !next_permutation(&mut middle) {
            break;
        }
    }
    // second pass: first sequence in lexicographic order within the tie slack
    let budget = best + tie_tolerance(best);
    middle = start;
    let seq = loop {
        let seq = assemble(&middle);
        if eval(&seq) <= budget {
            break seq;
        }
        next_permutation(&mut middle);
    };
    Ok((best, seq))
}
