//! Hard-core providers: small point sets whose shortest Hamilton path runs
//! from `p` to `q` and whose length sits on one side of a threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{held_karp_path, PathEnds};
use crate::geometry::Point;
use crate::instance::Instance;
use crate::tour::PathSeq;

/// `ε₀ = (√(a²+1) − a) / (100(4a² + 2a))`.
pub fn papadimitriou_eps0(a: f64) -> f64 {
    ((a * a + 1.0).sqrt() - a) / (100.0 * (4.0 * a * a + 2.0 * a))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToyVariant {
    Yes,
    No,
}

/// A certified hard core: points with apexes `p`, `q`, a rhombus with those
/// apexes, a threshold `L` and a tolerance `ε₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardCoreProvider {
    pub name: String,
    pub points: Vec<Point>,
    pub p: usize,
    pub q: usize,
    /// Rhombus vertices in order `p`, upper, `q`, lower.
    pub rhombus: [Point; 4],
    pub threshold: f64,
    pub eps0: f64,
    /// Certified shortest Hamilton path.
    pub shortest: PathSeq,
    /// Length margin of the best path whose endpoint pair is not `{p, q}`.
    pub endpoint_margin: f64,
    /// Minimum depth of a non-apex point inside the rhombus.
    pub min_depth: f64,
}

impl HardCoreProvider {
    /// Certifies a user-supplied configuration.
    ///
    /// Checks that the shortest Hamilton path has endpoints `{p, q}` with a
    /// margin surviving any `ε₀` displacement, that all other points lie at depth
    /// `≥ ε₀` inside the rhombus, and that the shortest length avoids
    /// `[L, L + ε₀]` by the same displacement slack.
    pub fn certify(
        name: &str,
        points: Vec<Point>,
        p: usize,
        q: usize,
        half_width: f64,
        threshold: f64,
        eps0: f64,
    ) -> Result<Self> {
        let k = points.len();
        if k < 3 || p >= k || q >= k || p == q {
            return Err(Error::InvalidArgument("provider needs at least 3 points and distinct apexes".into()));
        }
        if !(eps0 > 0.0 && half_width > 0.0) {
            return Err(Error::InvalidArgument("eps0 and half_width must be positive".into()));
        }
        let rhombus = rhombus_for(&points[p], &points[q], half_width);
        let min_depth = (0..k)
            .filter(|&i| i != p && i != q)
            .map(|i| rhombus_depth(&rhombus, &points[i]))
            .fold(f64::INFINITY, f64::min);
        if min_depth < eps0 {
            return Err(Error::Construction(format!("{name}: depth {min_depth} inside rhombus is below eps0 {eps0}")));
        }

        let inst = Instance::planar(points.clone());
        let shortest = held_karp_path(&inst, PathEnds::Fixed(p, q))?;
        let mut runner_up = f64::INFINITY;
        for a in 0..k {
            for b in a + 1..k {
                if (a, b) == (p.min(q), p.max(q)) {
                    continue;
                }
                runner_up = runner_up.min(held_karp_path(&inst, PathEnds::Fixed(a, b))?.length);
            }
        }
        let endpoint_margin = runner_up - shortest.length;
        let slack = displacement_slack(k, eps0);
        if endpoint_margin <= 2.0 * slack {
            return Err(Error::Construction(format!(
                "{name}: endpoint margin {endpoint_margin} does not survive eps0 displacements"
            )));
        }
        let len = shortest.length;
        if !(len + slack < threshold || len - slack > threshold + eps0) {
            return Err(Error::Construction(format!(
                "{name}: shortest path {len} is within the displacement slack of [L, L + eps0]"
            )));
        }
        Ok(HardCoreProvider {
            name: name.to_string(),
            points,
            p,
            q,
            rhombus,
            threshold,
            eps0,
            shortest,
            endpoint_margin,
            min_depth,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Whether the shortest path falls below the threshold.
    pub fn answer(&self) -> bool {
        self.shortest.length < self.threshold
    }

    pub fn variant(&self) -> ToyVariant {
        if self.answer() {
            ToyVariant::Yes
        } else {
            ToyVariant::No
        }
    }
}

/// Bound on the change of a Hamilton path length on `k` points when every
/// point moves by less than `eps0`.
pub fn displacement_slack(k: usize, eps0: f64) -> f64 {
    2.0 * (k as f64 - 1.0) * eps0
}

/// Rhombus with apexes `p`, `q` and half-width `w` across the `pq` diagonal.
pub fn rhombus_for(p: &Point, q: &Point, w: f64) -> [Point; 4] {
    let (mx, my) = ((p.x() + q.x()) / 2.0, (p.y() + q.y()) / 2.0);
    let (dx, dy) = (q.x() - p.x(), q.y() - p.y());
    let len = dx.hypot(dy);
    let (nx, ny) = (-dy / len * w, dx / len * w);
    [p.clone(), Point::xy(mx + nx, my + ny), q.clone(), Point::xy(mx - nx, my - ny)]
}

/// Signed distance from `a` to the rhombus boundary, positive inside.
pub fn rhombus_depth(r: &[Point; 4], a: &Point) -> f64 {
    let cx = r.iter().map(|v| v.x()).sum::<f64>() / 4.0;
    let cy = r.iter().map(|v| v.y()).sum::<f64>() / 4.0;
    (0..4)
        .map(|i| {
            let (u, v) = (&r[i], &r[(i + 1) % 4]);
            let (ex, ey) = (v.x() - u.x(), v.y() - u.y());
            let len = ex.hypot(ey);
            let side = |x: f64, y: f64| (ex * (y - u.y()) - ey * (x - u.x())) / len;
            // orient so the center is on the positive side
            side(a.x(), a.y()) * side(cx, cy).signum()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Closest point of the (filled) rhombus to `a`.
pub fn rhombus_closest(r: &[Point; 4], a: &Point) -> Point {
    if rhombus_depth(r, a) >= 0.0 {
        return a.clone();
    }
    let mut best = (f64::INFINITY, a.clone());
    for i in 0..4 {
        let (u, v) = (&r[i], &r[(i + 1) % 4]);
        let (ex, ey) = (v.x() - u.x(), v.y() - u.y());
        let s = (((a.x() - u.x()) * ex + (a.y() - u.y()) * ey) / (ex * ex + ey * ey)).clamp(0.0, 1.0);
        let c = Point::xy(u.x() + s * ex, u.y() + s * ey);
        let d = (c.x() - a.x()).hypot(c.y() - a.y());
        if d < best.0 {
            best = (d, c);
        }
    }
    best.1
}

pub const TOY_INNER: usize = 5;
pub const TOY_EPS0: f64 = 0.01;

const TOY_AMPLITUDE_YES: f64 = 0.2;
const TOY_AMPLITUDE_NO: f64 = 0.6;

/// Zigzag of `inner` points between apexes on a horizontal diagonal of length
/// `√k` inside `[0, √k]²`, `k = inner + 2`. Offsets are a fixed fraction of the
/// local rhombus half-width with alternating sign.
fn toy_points(inner: usize, amplitude: f64) -> (Vec<Point>, f64) {
    let k = inner + 2;
    let s = (k as f64).sqrt();
    let w = s / 4.0;
    let mut pts = vec![Point::xy(0.0, s / 2.0)];
    for i in 0..inner {
        let x = s * (i + 1) as f64 / (inner + 1) as f64;
        let h = w * (1.0 - (x - s / 2.0).abs() / (s / 2.0));
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        pts.push(Point::xy(x, s / 2.0 + sign * amplitude * h));
    }
    pts.push(Point::xy(s, s / 2.0));
    (pts, w)
}

/// Toy provider with [`TOY_INNER`] inner points.
pub fn toy_provider(variant: ToyVariant) -> Result<HardCoreProvider> {
    toy_provider_with(variant, TOY_INNER)
}

/// Toy provider with `inner` points between the apexes. Both variants share
/// the threshold `L = ℓ_yes + 2(k−1)ε₀ + ε₀/4`, where `ℓ_yes` is the certified
/// shortest path of the YES configuration; the middle term absorbs any `ε₀`
/// displacement of the points.
pub fn toy_provider_with(variant: ToyVariant, inner: usize) -> Result<HardCoreProvider> {
    // a single inner point only separates from the NO geometry on the YES side
    if !((2..=6).contains(&inner) || (inner == 1 && variant == ToyVariant::Yes)) {
        return Err(Error::InvalidArgument(format!("toy provider takes 2..=6 inner points, got {inner}")));
    }
    let (yes_pts, w) = toy_points(inner, TOY_AMPLITUDE_YES);
    let yes_inst = Instance::planar(yes_pts.clone());
    let yes_len = held_karp_path(&yes_inst, PathEnds::Fixed(0, inner + 1))?.length;
    let threshold = yes_len + displacement_slack(inner + 2, TOY_EPS0) + TOY_EPS0 / 4.0;
    let (pts, name) = match variant {
        ToyVariant::Yes => (yes_pts, "toy-yes"),
        ToyVariant::No => (toy_points(inner, TOY_AMPLITUDE_NO).0, "toy-no"),
    };
    let prov = HardCoreProvider::certify(name, pts, 0, inner + 1, w, threshold, TOY_EPS0)?;
    if prov.variant() != variant {
        return Err(Error::Construction(format!("{name}: certified answer disagrees with the variant")));
    }
    Ok(prov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{brute_force, BruteMode};

    #[test]
    fn eps0_example_value() {
        let a: f64 = 20.0;
        let direct = (401f64.sqrt() - 20.0) / (100.0 * 1640.0);
        assert!((papadimitriou_eps0(a) - direct).abs() < 1e-20);
        assert!(papadimitriou_eps0(a) > 1.5e-7 && papadimitriou_eps0(a) < 1.6e-7);
    }

    #[test]
    fn toy_variants_certified_by_brute_force() {
        for variant in [ToyVariant::Yes, ToyVariant::No] {
            let prov = toy_provider(variant).unwrap();
            let inst = Instance::planar(prov.points.clone());
            let (len, order) = brute_force(&inst, BruteMode::Path(PathEnds::Free)).unwrap();
            let ends = (order[0].min(order[order.len() - 1]), order[0].max(order[order.len() - 1]));
            assert_eq!(ends, (prov.p, prov.q));
            assert!((len - prov.shortest.length).abs() < 1e-12);
        }
        let yes = toy_provider(ToyVariant::Yes).unwrap();
        let no = toy_provider(ToyVariant::No).unwrap();
        assert_eq!(yes.threshold, no.threshold);
        assert!(yes.shortest.length < yes.threshold + yes.eps0 / 2.0);
        assert!(no.shortest.length > no.threshold + no.eps0);
    }

    #[test]
    fn depth_matches_hand_computation() {
        let r = rhombus_for(&Point::xy(0.0, 0.0), &Point::xy(4.0, 0.0), 1.0);
        // edge from (0,0) to (2,1) has unit normal (−1,2)/√5
        let d = rhombus_depth(&r, &Point::xy(2.0, 0.0));
        assert!((d - 2.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!(rhombus_depth(&r, &Point::xy(5.0, 0.0)) < 0.0);
        assert!(rhombus_depth(&r, &Point::xy(0.0, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn toy_depth_at_least_eps0() {
        for inner in 2..=6 {
            for v in [ToyVariant::Yes, ToyVariant::No] {
                let prov = toy_provider_with(v, inner).unwrap();
                for (i, pt) in prov.points.iter().enumerate() {
                    if i != prov.p && i != prov.q {
                        assert!(rhombus_depth(&prov.rhombus, pt) >= prov.eps0);
                    }
                }
            }
        }
    }

    #[test]
    fn closest_point_of_rhombus() {
        let r = rhombus_for(&Point::xy(-1.0, 0.0), &Point::xy(1.0, 0.0), 0.5);
        let c = rhombus_closest(&r, &Point::xy(-3.0, -0.1));
        assert_eq!((c.x(), c.y()), (-1.0, 0.0));
        let c = rhombus_closest(&r, &Point::xy(0.0, 2.0));
        assert!((c.x() - 0.0).abs() < 1e-12 && (c.y() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn certify_rejects_interior_apex() {
        let pts = vec![Point::xy(0.0, 0.0), Point::xy(1.0, 0.0), Point::xy(2.0, 0.0), Point::xy(3.0, 0.0)];
        assert!(HardCoreProvider::certify("bad", pts, 0, 1, 0.5, 10.0, 0.01).is_err());
    }
}
