use crate::error::{Error, Result};
use crate::heuristics::{EdgeConstraints, Segments};

/// Largest number of contracted segments the bound DP accepts.
pub const EXACT_SEGMENTS_MAX: usize = 18;

/// Constrained optimum by Held-Karp over the segments obtained by contracting
/// the forced edges; every segment is entered from either end. `None` when no
/// tour honors the constraints.
pub fn constrained_optimum(dist: &[Vec<f64>], cons: &EdgeConstraints) -> Result<Option<(f64, Vec<usize>)>> {
    let n = dist.len();
    if n < 3 {
        return Err(Error::InvalidArgument("constrained optimum needs n >= 3".into()));
    }
    if cons.validate(n).is_err() {
        return Ok(None);
    }
    let segs = Segments::build(n, cons)?;
    let internal: f64 = cons.forced.iter().map(|e| dist[e.0][e.1]).sum();
    if let Some(cycle) = segs.full_cycle {
        return Ok(Some((internal, cycle)));
    }
    let m = segs.len();
    if m > EXACT_SEGMENTS_MAX {
        return Err(Error::TooLarge { n: m, limit: EXACT_SEGMENTS_MAX });
    }
    // (entry, exit) per orientation; singletons have one
    let orient: Vec<Vec<(usize, usize)>> = (0..m)
        .map(|s| {
            let (a, b) = segs.ends(s);
            if a == b {
                vec![(a, a)]
            } else {
                vec![(a, b), (b, a)]
            }
        })
        .collect();
    let ok = |u: usize, v: usize| cons.allows(u, v);
    let (start, first_exit) = orient[0][0];
    if m == 1 {
        // a Hamiltonian path closed by its end edge
        return Ok(ok(first_exit, start).then(|| (internal + dist[first_exit][start], segs.segs[0].clone())));
    }
    let k = m - 1;
    let states = 1usize << k;
    let idx = |mask: usize, j: usize, o: usize| (mask * k + j) * 2 + o;
    let mut dp = vec![f64::INFINITY; states * k * 2];
    let mut parent = vec![u16::MAX; states * k * 2];
    for j in 0..k {
        for (o, &(entry, _)) in orient[j + 1].iter().enumerate() {
            if ok(first_exit, entry) {
                dp[idx(1 << j, j, o)] = dist[first_exit][entry];
            }
        }
    }
    for mask in 1..states {
        for j in 0..k {
            if mask & (1 << j) == 0 {
                continue;
            }
            for o in 0..orient[j + 1].len() {
                let cur = dp[idx(mask, j, o)];
                if !cur.is_finite() {
                    continue;
                }
                let exit = orient[j + 1][o].1;
                for jj in 0..k {
                    if mask & (1 << jj) != 0 {
                        continue;
                    }
                    for (oo, &(entry, _)) in orient[jj + 1].iter().enumerate() {
                        if !ok(exit, entry) {
                            continue;
                        }
                        let next = mask | (1 << jj);
                        let c = cur + dist[exit][entry];
                        let t = idx(next, jj, oo);
                        if c < dp[t] {
                            dp[t] = c;
                            parent[t] = ((j << 1) | o) as u16;
                        }
                    }
                }
            }
        }
    }
    let full = states - 1;
    let mut best: Option<(f64, usize, usize)> = None;
    for j in 0..k {
        for o in 0..orient[j + 1].len() {
            let cur = dp[idx(full, j, o)];
            let exit = orient[j + 1][o].1;
            if cur.is_finite() && ok(exit, start) {
                let c = cur + dist[exit][start];
                if best.is_none_or(|(b, _, _)| c < b) {
                    best = Some((c, j, o));
                }
            }
        }
    }
    let Some((cost, mut j, mut o)) = best else {
        return Ok(None);
    };
    let mut chain = Vec::with_capacity(k);
    let mut mask = full;
    loop {
        chain.push((j + 1, o));
        let p = parent[idx(mask, j, o)];
        mask &= !(1 << j);
        if p == u16::MAX {
            break;
        }
        j = (p >> 1) as usize;
        o = (p & 1) as usize;
    }
    chain.reverse();
    let mut order: Vec<usize> = segs.segs[0].clone();
    for (s, o) in chain {
        order.extend(segs.oriented(s, orient[s][o].0).copied());
    }
    Ok(Some((cost + internal, order)))
}
