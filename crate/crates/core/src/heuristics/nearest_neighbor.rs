use super::{completable, rotate_to_zero, trivial_tour, DistKeys, EdgeConstraints, Segments};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::tour::Tour;

/// Nearest neighbor from `x₁`, moving between forced segments end to end.
/// A successor is skipped when forbidden edges would leave no way to finish.
pub fn nearest_neighbor_constrained(inst: &Instance, cons: &EdgeConstraints) -> Result<Tour> {
    if let Some(t) = trivial_tour(inst, cons) {
        return t;
    }
    let n = inst.len();
    let segs = Segments::build(n, cons)?;
    if let Some(cycle) = segs.full_cycle {
        return Ok(Tour::from_order(inst, rotate_to_zero(cycle)));
    }
    let keys = DistKeys::for_instance(inst);

    let s0 = segs.seg_of[0];
    let (a, b) = segs.ends(s0);
    let entry = if b == 0 { b } else { a };
    let mut order: Vec<usize> = segs.oriented(s0, entry).copied().collect();
    let mut visited = vec![false; segs.len()];
    visited[s0] = true;
    let mut cur = *order.last().expect("nonempty");

    for _ in 1..segs.len() {
        let mut cands: Vec<(i64, usize, usize)> = Vec::new();
        for s in 0..segs.len() {
            if visited[s] {
                continue;
            }
            let (a, b) = segs.ends(s);
            let ends = [a, b];
            for &e in &ends[..if a == b { 1 } else { 2 }] {
                if cons.allows(cur, e) {
                    cands.push((keys.key(inst.dist(cur, e)), e, s));
                }
            }
        }
        cands.sort_unstable();
        // nearest successor after which the forbidden edges still leave a way back
        let pick = cands.into_iter().find(|&(_, e, s)| {
            let (a, b) = segs.ends(s);
            let exit = if e == a { b } else { a };
            let mut frags = vec![(order[0], exit)];
            frags.extend((0..segs.len()).filter(|&t| !visited[t] && t != s).map(|t| segs.ends(t)));
            completable(&frags, cons)
        });
        let (_, e, s) = pick.ok_or_else(|| Error::Infeasible(format!("no admissible successor of {cur}")))?;
        visited[s] = true;
        order.extend(segs.oriented(s, e));
        cur = *order.last().expect("nonempty");
    }
    if !cons.allows(cur, order[0]) {
        return Err(Error::Infeasible("closing edge is forbidden".into()));
    }
    Ok(Tour::from_order(inst, rotate_to_zero(order)))
}
