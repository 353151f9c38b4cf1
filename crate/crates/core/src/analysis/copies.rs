use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{approx_match, Domain, Matching, Point};
use crate::instance::Instance;

/// An `(eps, R)`-copy of a gadget found in an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignedCopy {
    /// Where the gadget origin lands.
    pub center: Point,
    /// Instance index matched to each gadget point, in gadget order.
    pub members: Vec<usize>,
    pub matching: Matching,
    /// Subcube coordinates.
    pub cell: Vec<usize>,
}

/// Uniform bucket grid with cells of side at least `reach`, so a ball of
/// radius `reach` meets only the `3^d` cells around its center.
struct Buckets<'a> {
    dom: &'a Domain,
    per_side: usize,
    side: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl<'a> Buckets<'a> {
    fn new(points: &[Point], dom: &'a Domain, reach: f64) -> Self {
        let per_side = ((dom.t / reach).floor() as usize).max(1);
        let side = dom.t / per_side as f64;
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(p, side, per_side)).or_default().push(i);
        }
        Buckets { dom, per_side, side, cells }
    }

    fn key(p: &Point, side: f64, per_side: usize) -> Vec<i64> {
        p.coords.iter().map(|c| ((c / side).floor() as i64).clamp(0, per_side as i64 - 1)).collect()
    }

    /// Indices within distance `< r` of `q`, `r` at most the bucket side.
    fn within(&self, points: &[Point], q: &Point, r: f64) -> Vec<usize> {
        let base = Self::key(q, self.side, self.per_side);
        let d = base.len();
        let m = self.per_side as i64;
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for code in 0..3usize.pow(d as u32) {
            let mut c = code;
            let mut key = Vec::with_capacity(d);
            let mut skip = false;
            for b in &base {
                let k = b + (c % 3) as i64 - 1;
                c /= 3;
                if self.dom.is_torus() {
                    key.push(k.rem_euclid(m));
                } else if k < 0 || k >= m {
                    skip = true;
                    break;
                } else {
                    key.push(k);
                }
            }
            if skip || !seen.insert(key.clone()) {
                continue;
            }
            if let Some(list) = self.cells.get(&key) {
                out.extend(list.iter().copied().filter(|&i| self.dom.dist(&points[i], q) < r));
            }
        }
        out.sort_unstable();
        out
    }
}

/// Aligned copies of `s` (local coordinates, first point the anchor) in the
/// first color class of the `≈10dR` subcube partition. A copy must match
/// `s + v` within `eps`, lie inside one subcube, and keep every other point
/// at distance `≥ r`. At most one copy per subcube, the lexicographically
/// smallest matched index set.
pub fn find_aligned_copies(inst: &Instance, s: &[Point], eps: f64, r: f64) -> Result<Vec<AlignedCopy>> {
    let dom = &inst.domain;
    let d = dom.d;
    if s.is_empty() {
        return Err(Error::InvalidArgument("empty gadget".into()));
    }
    if !(eps > 0.0) || !(r > 2.0 * eps) {
        return Err(Error::InvalidArgument(format!("need 0 < 2·eps < R, got eps = {eps}, R = {r}")));
    }
    if !(10.0 * d as f64 * r < dom.t) {
        return Err(Error::InvalidArgument(format!("10dR = {} must be below t = {}", 10.0 * d as f64 * r, dom.t)));
    }
    let cells_per_side = (dom.t / (10.0 * d as f64 * r)).floor() as usize;
    let cell_side = dom.t / cells_per_side as f64;
    // on the torus the last index wraps next to index 0
    let colored = |k: usize| k % 3 == 0 && !(dom.is_torus() && cells_per_side > 1 && k == cells_per_side - 1);
    let cell_of = |p: &Point| -> Vec<usize> {
        p.coords.iter().map(|c| ((c / cell_side).floor() as usize).min(cells_per_side - 1)).collect()
    };
    let buckets = Buckets::new(&inst.points, dom, r);
    let pts = &inst.points;

    let mut best: HashMap<Vec<usize>, AlignedCopy> = HashMap::new();
    for (a, anchor) in pts.iter().enumerate() {
        let cell = cell_of(anchor);
        if !cell.iter().all(|&k| colored(k)) {
            continue;
        }
        let shift: Vec<f64> = anchor.coords.iter().zip(&s[0].coords).map(|(x, y)| x - y).collect();
        let placed: Vec<Point> = s.iter().map(|q| dom.wrap(q.add(&shift))).collect();
        let mut union: Vec<usize> = placed.iter().flat_map(|q| buckets.within(pts, q, 2.0 * eps)).collect();
        union.sort_unstable();
        union.dedup();
        if union.len() != s.len() || !union.contains(&a) {
            continue;
        }
        let Some(first) = approx_match(&union.iter().map(|&i| pts[i].clone()).collect::<Vec<_>>(), &placed, 2.0 * eps, dom)
        else {
            continue;
        };
        // recenter on the mean displacement, then apply the real tolerance
        let mut mean = vec![0.0; d];
        for &(u, j) in &first.pairs {
            for (m, c) in mean.iter_mut().zip(dom.displacement(&placed[j], &pts[union[u]])) {
                *m += c / s.len() as f64;
            }
        }
        let center_shift: Vec<f64> = shift.iter().zip(&mean).map(|(x, m)| x + m).collect();
        let placed: Vec<Point> = s.iter().map(|q| dom.wrap(q.add(&center_shift))).collect();
        let members_pts: Vec<Point> = union.iter().map(|&i| pts[i].clone()).collect();
        let Some(matching) = approx_match(&members_pts, &placed, eps, dom) else {
            continue;
        };
        if union.iter().any(|&i| cell_of(&pts[i]) != cell) {
            continue;
        }
        let isolated = union.iter().all(|&i| buckets.within(pts, &pts[i], r).iter().all(|j| union.binary_search(j).is_ok()));
        if !isolated {
            continue;
        }
        let mut members = vec![0; s.len()];
        for &(u, j) in &matching.pairs {
            members[j] = union[u];
        }
        let copy = AlignedCopy {
            center: dom.wrap(Point::new(center_shift)),
            members,
            matching,
            cell: cell.clone(),
        };
        let replace = match best.get(&cell) {
            None => true,
            Some(old) => {
                let mut a = copy.members.clone();
                let mut b = old.members.clone();
                a.sort_unstable();
                b.sort_unstable();
                a < b
            }
        };
        if replace {
            best.insert(cell, copy);
        }
    }
    let mut out: Vec<AlignedCopy> = best.into_values().collect();
    out.sort_by(|x, y| x.cell.cmp(&y.cell));
    Ok(out)
}

/// Centers of the first-color-class subcubes, for planting copies that the
/// search can see.
pub fn colored_cell_centers(dom: &Domain, r: f64) -> Vec<Point> {
    let d = dom.d;
    let cells_per_side = (dom.t / (10.0 * d as f64 * r)).floor() as usize;
    if cells_per_side == 0 {
        return Vec::new();
    }
    let side = dom.t / cells_per_side as f64;
    let idx: Vec<usize> = (0..cells_per_side)
        .filter(|&k| k % 3 == 0 && !(dom.is_torus() && cells_per_side > 1 && k == cells_per_side - 1))
        .collect();
    let mut out = Vec::new();
    let total = idx.len().pow(d as u32);
    for code in 0..total {
        let mut c = code;
        let coords = (0..d)
            .map(|_| {
                let k = idx[c % idx.len()];
                c /= idx.len();
                (k as f64 + 0.5) * side
            })
            .collect();
        out.push(Point::new(coords));
    }
    out
}
