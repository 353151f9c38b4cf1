use super::{rotate_to_zero, trivial_tour, DistKeys, EdgeConstraints, Segments};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::tour::{Edge, Tour};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertionMode {
    Nearest,
    Farthest,
}

const BLOCKED: i64 = i64::MAX / 4;

struct Ctx<'a> {
    inst: &'a Instance,
    cons: &'a EdgeConstraints,
    segs: Segments,
    keys: DistKeys,
}

impl Ctx<'_> {
    fn link(&self, a: usize, b: usize) -> i64 {
        if self.cons.allows(a, b) {
            self.keys.key(self.inst.dist(a, b))
        } else {
            BLOCKED
        }
    }

    fn ends(&self, s: usize) -> Vec<(usize, usize)> {
        let (a, b) = self.segs.ends(s);
        if a == b {
            vec![(a, a)]
        } else {
            vec![(a, b), (b, a)]
        }
    }

    fn seg_dist(&self, s: usize, t: usize) -> i64 {
        let (a, b) = self.segs.ends(s);
        let (c, d) = self.segs.ends(t);
        [(a, c), (a, d), (b, c), (b, d)].iter().map(|&(x, y)| self.link(x, y)).min().expect("four pairs")
    }
}

/// Nearest or farthest insertion starting from the triangle `x₁, x_i, x_j`,
/// where `x_i` is nearest to `x₁` and `x_j` minimizes `d(x₁,x_j) + d(x_i,x_j)`.
pub fn insertion_constrained(inst: &Instance, cons: &EdgeConstraints, mode: InsertionMode) -> Result<Tour> {
    if let Some(t) = trivial_tour(inst, cons) {
        return t;
    }
    let n = inst.len();
    let segs = Segments::build(n, cons)?;
    if let Some(cycle) = segs.full_cycle {
        return Ok(Tour::from_order(inst, rotate_to_zero(cycle)));
    }
    let ctx = Ctx { inst, cons, segs, keys: DistKeys::for_instance(inst) };
    let m = ctx.segs.len();
    let s0 = ctx.segs.seg_of[0];

    let mut initial = vec![s0];
    if m >= 2 {
        let si = (0..m)
            .filter(|&s| s != s0)
            .min_by_key(|&s| (ctx.seg_dist(s0, s), ctx.segs.label(s)))
            .expect("second segment");
        initial.push(si);
        if m >= 3 {
            let sj = (0..m)
                .filter(|&s| s != s0 && s != si)
                .min_by_key(|&s| (ctx.seg_dist(s0, s).saturating_add(ctx.seg_dist(si, s)), ctx.segs.label(s)))
                .expect("third segment");
            initial.push(sj);
        }
    }
    let mut next = initial_cycle(&ctx, &initial)?;
    let mut in_tour = vec![false; m];
    let mut tour_vertices: Vec<usize> = Vec::with_capacity(n);
    for &s in &initial {
        in_tour[s] = true;
        tour_vertices.extend(ctx.segs.segs[s].iter().copied());
    }

    // distance of every outside segment to the current vertex set
    let mut md = vec![i64::MAX; m];
    for s in (0..m).filter(|&s| !in_tour[s]) {
        let (a, b) = ctx.segs.ends(s);
        md[s] = tour_vertices
            .iter()
            .map(|&v| ctx.keys.key(inst.dist(a, v)).min(ctx.keys.key(inst.dist(b, v))))
            .min()
            .expect("nonempty tour");
    }

    for _ in initial.len()..m {
        let z = match mode {
            InsertionMode::Nearest => {
                (0..m).filter(|&s| !in_tour[s]).min_by_key(|&s| (md[s], ctx.segs.label(s)))
            }
            InsertionMode::Farthest => {
                (0..m).filter(|&s| !in_tour[s]).min_by_key(|&s| (-md[s], ctx.segs.label(s)))
            }
        }
        .expect("outside segment");

        let mut best: Option<(i64, Edge, usize, usize, usize)> = None;
        for &x in &tour_vertices {
            let y = next[x];
            if cons.is_forced(x, y) {
                continue;
            }
            let dxy = ctx.link(x, y);
            for (entry, exit) in ctx.ends(z) {
                let (l1, l2) = (ctx.link(x, entry), ctx.link(exit, y));
                if l1 >= BLOCKED || l2 >= BLOCKED {
                    continue;
                }
                let cost = l1 + l2 - dxy;
                let cand = (cost, Edge::new(x, y), entry, x, y);
                if best.map_or(true, |b| (cand.0, cand.1, cand.2) < (b.0, b.1, b.2)) {
                    best = Some(cand);
                }
            }
        }
        let (_, _, entry, x, y) =
            best.ok_or_else(|| Error::Infeasible(format!("no admissible insertion for segment {z}")))?;
        let path: Vec<usize> = ctx.segs.oriented(z, entry).copied().collect();
        let mut prev = x;
        for &v in &path {
            next[prev] = v;
            prev = v;
        }
        next[prev] = y;
        in_tour[z] = true;
        tour_vertices.extend(path.iter().copied());
        for s in (0..m).filter(|&s| !in_tour[s]) {
            let (a, b) = ctx.segs.ends(s);
            for &v in &path {
                md[s] = md[s].min(ctx.keys.key(inst.dist(a, v))).min(ctx.keys.key(inst.dist(b, v)));
            }
        }
    }

    let mut order = Vec::with_capacity(n);
    let mut cur = 0;
    loop {
        order.push(cur);
        cur = next[cur];
        if cur == 0 {
            break;
        }
    }
    Ok(Tour::from_order(inst, order))
}

/// Cheapest closed arrangement of up to three segments, as a successor map.
fn initial_cycle(ctx: &Ctx<'_>, initial: &[usize]) -> Result<Vec<usize>> {
    let n = ctx.inst.len();
    let s0 = initial[0];
    let (a0, _) = ctx.segs.ends(s0);
    let rest: Vec<usize> = initial[1..].to_vec();
    let mut orders: Vec<Vec<usize>> = vec![rest.clone()];
    if rest.len() == 2 {
        orders.push(vec![rest[1], rest[0]]);
    }
    let mut best: Option<(i64, Vec<(usize, usize)>)> = None;
    for ord in orders {
        let combos = 1usize << ord.len();
        for mask in 0..combos {
            let mut pieces = vec![(s0, a0)];
            for (k, &s) in ord.iter().enumerate() {
                let opts = ctx.ends(s);
                let (entry, _) = opts[if mask & (1 << k) != 0 { opts.len() - 1 } else { 0 }];
                pieces.push((s, entry));
            }
            let exits: Vec<usize> = pieces
                .iter()
                .map(|&(s, entry)| {
                    let (a, b) = ctx.segs.ends(s);
                    if entry == a {
                        b
                    } else {
                        a
                    }
                })
                .collect();
            let mut cost = 0i64;
            for k in 0..pieces.len() {
                let nxt = pieces[(k + 1) % pieces.len()].1;
                let l = ctx.link(exits[k], nxt);
                cost = cost.saturating_add(l);
                if l >= BLOCKED {
                    cost = BLOCKED;
                }
            }
            if cost < BLOCKED && best.as_ref().map_or(true, |b| cost < b.0) {
                best = Some((cost, pieces));
            }
        }
    }
    let (_, pieces) = best.ok_or_else(|| Error::Infeasible("no admissible initial subtour".into()))?;
    let mut seq = Vec::new();
    for (s, entry) in pieces {
        seq.extend(ctx.segs.oriented(s, entry).copied());
    }
    let mut next = vec![usize::MAX; n];
    for k in 0..seq.len() {
        next[seq[k]] = seq[(k + 1) % seq.len()];
    }
    Ok(next)
}
