//! Metric-space primitives on the cube `[0,t)^d` or the flat torus of side `t`.
//!
//! Everything here is a pure function of its inputs. Random perturbations take
//! the generator explicitly so that concurrent trials can use independent
//! streams.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Torus,
    Cube,
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "torus" => Ok(Topology::Torus),
            "cube" => Ok(Topology::Cube),
            other => Err(Error::InvalidArgument(format!("unknown topology `{other}`"))),
        }
    }
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Topology::Torus => f.write_str("torus"),
            Topology::Cube => f.write_str("cube"),
        }
    }
}

/// The ambient box `[0,t)^d` with its topology.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub d: usize,
    pub t: f64,
    pub topology: Topology,
}

impl Domain {
    pub fn new(d: usize, t: f64, topology: Topology) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("side length must be positive, got {t}")));
        }
        Ok(Domain { d, t, topology })
    }

    pub fn torus(d: usize, t: f64) -> Self {
        Domain::new(d, t, Topology::Torus).expect("valid torus")
    }

    pub fn cube(d: usize, t: f64) -> Self {
        Domain::new(d, t, Topology::Cube).expect("valid cube")
    }

    /// A cube large enough that local gadget coordinates never wrap.
    pub fn plane() -> Self {
        Domain::cube(2, f64::MAX / 4.0)
    }

    pub fn is_torus(&self) -> bool {
        self.topology == Topology::Torus
    }

    /// Euclidean distance; under the torus the minimum over all periodic images.
    #[inline]
    pub fn dist(&self, a: &Point, b: &Point) -> f64 {
        self.dist_coords(&a.coords, &b.coords)
    }

    #[inline]
    pub fn dist_coords(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let mut s = 0.0;
        match self.topology {
            Topology::Cube => {
                for (x, y) in a.iter().zip(b) {
                    let dx = x - y;
                    s += dx * dx;
                }
            }
            Topology::Torus => {
                for (x, y) in a.iter().zip(b) {
                    let mut dx = (x - y).abs();
                    if dx > self.t - dx {
                        dx = self.t - dx;
                    }
                    s += dx * dx;
                }
            }
        }
        s.sqrt()
    }

    /// Distance with dimension checks.
    pub fn try_dist(&self, a: &Point, b: &Point) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.dist(a, b))
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if p.dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: p.dim() });
        }
        Ok(())
    }

    /// Displacement vector from `a` to `b`, using the shortest periodic image.
    pub fn displacement(&self, a: &Point, b: &Point) -> Vec<f64> {
        a.coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| {
                let mut dx = y - x;
                if self.is_torus() {
                    if dx > self.t / 2.0 {
                        dx -= self.t;
                    } else if dx < -self.t / 2.0 {
                        dx += self.t;
                    }
                }
                dx
            })
            .collect()
    }

    /// Reduces coordinates modulo `t` under the torus; identity on the cube.
    pub fn wrap(&self, mut p: Point) -> Point {
        if self.is_torus() {
            for c in p.coords.iter_mut() {
                *c = c.rem_euclid(self.t);
                if *c >= self.t {
                    *c = 0.0;
                }
            }
        }
        p
    }

    /// Membership in `[0,t)^d` for the torus, the closed cube otherwise.
    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.d
            && p.coords.iter().all(|&c| match self.topology {
                Topology::Torus => (0.0..self.t).contains(&c),
                Topology::Cube => (0.0..=self.t).contains(&c),
            })
    }

    /// `p + v`, wrapped.
    pub fn translate(&self, p: &Point, v: &[f64]) -> Point {
        self.wrap(Point::new(p.coords.iter().zip(v).map(|(a, b)| a + b).collect()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Point { coords: vec![x, y] }
    }

    pub fn origin(d: usize) -> Self {
        Point { coords: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    pub fn y(&self) -> f64 {
        self.coords[1]
    }

    pub fn add(&self, v: &[f64]) -> Point {
        Point::new(self.coords.iter().zip(v).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Vec<f64> {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect()
    }

    pub fn scale(&self, s: f64) -> Point {
        Point::new(self.coords.iter().map(|c| c * s).collect())
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// A bijection between two equal-size index sets, as `(a_index, b_index)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub max_displacement: f64,
}

/// Decides `A ≈_eps B`: a bijection moving every point by strictly less than
/// `eps`. Uses maximum bipartite matching on the `< eps` displacement graph.
pub fn approx_match(a: &[Point], b: &[Point], eps: f64, dom: &Domain) -> Option<Matching> {
    if a.len() != b.len() {
        return None;
    }
    let n = a.len();
    let adj: Vec<Vec<(usize, f64)>> = a
        .iter()
        .map(|pa| {
            b.iter()
                .enumerate()
                .filter_map(|(j, pb)| {
                    let d = dom.dist(pa, pb);
                    (d < eps).then_some((j, d))
                })
                .collect()
        })
        .collect();
    if adj.iter().any(|l| l.is_empty()) {
        return None;
    }
    let mut match_b: Vec<Option<usize>> = vec![None; n];
    for u in 0..n {
        let mut seen = vec![false; n];
        if !augment(u, &adj, &mut match_b, &mut seen) {
            return None;
        }
    }
    let mut pairs: Vec<(usize, usize)> =
        match_b.iter().enumerate().map(|(j, i)| (i.expect("perfect matching"), j)).collect();
    pairs.sort_unstable();
    let max_displacement = pairs.iter().map(|&(i, j)| dom.dist(&a[i], &b[j])).fold(0.0, f64::max);
    Some(Matching { pairs, max_displacement })
}

fn augment(u: usize, adj: &[Vec<(usize, f64)>], match_b: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &(v, _) in &adj[u] {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        let free = match match_b[v] {
            None => true,
            Some(w) => augment(w, adj, match_b, seen),
        };
        if free {
            match_b[v] = Some(u);
            return true;
        }
    }
    false
}

/// Uniform point in the radius-`delta` ball about the origin (rejection in the bounding cube).
pub fn uniform_in_ball<R: Rng + ?Sized>(d: usize, delta: f64, rng: &mut R) -> Vec<f64> {
    if delta == 0.0 {
        return vec![0.0; d];
    }
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2: f64 = v.iter().map(|c| c * c).sum();
        if r2 <= 1.0 {
            return v.into_iter().map(|c| c * delta).collect();
        }
    }
}

/// Independent `delta`-perturbation of every point.
pub fn perturb<R: Rng + ?Sized>(points: &[Point], delta: f64, rng: &mut R, dom: &Domain) -> Vec<Point> {
    if delta == 0.0 {
        return points.to_vec();
    }
    points
        .iter()
        .map(|p| {
            let v = uniform_in_ball(p.dim(), delta, rng);
            dom.translate(p, &v)
        })
        .collect()
}

/// Number of binary digits used by an efficient `eps`-rounding in a box of side `t`.
pub fn rounding_bits(t: f64, eps: f64) -> i32 {
    (t / eps).log2().ceil().max(0.0) as i32
}

/// Snaps every coordinate to the grid `t·j/2^m`, `m = ⌈log₂(t/eps)⌉`.
pub fn round_point(p: &Point, eps: f64, dom: &Domain) -> Point {
    let m = rounding_bits(dom.t, eps);
    let g = dom.t / 2f64.powi(m);
    let snapped = Point::new(p.coords.iter().map(|c| (c / g).round() * g).collect());
    dom.wrap(snapped)
}

/// Angle at `p` between the rays towards `x` and `q`, in `[0, π]`.
pub fn angle(x: &Point, p: &Point, q: &Point, dom: &Domain) -> Result<f64> {
    let u = dom.displacement(p, x);
    let v = dom.displacement(p, q);
    let nu = u.iter().map(|c| c * c).sum::<f64>().sqrt();
    let nv = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Degenerate("angle vertex coincides with an arm point".into()));
    }
    let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0).acos())
}

#[derive(Clone, Debug)]
pub struct Protection {
    pub protected: bool,
    /// Indices into `X` of the annulus points `Y'`.
    pub annulus: Vec<usize>,
    /// Matching from `Y'` (positions in `annulus`) to the gadget points.
    pub matching: Option<Matching>,
}

/// `(R, eps)`-protectedness of `X` by the gadget `Y` at `p`.
pub fn is_protected(x: &[Point], y: &[Point], p: &Point, r: f64, eps: f64, dom: &Domain) -> Protection {
    is_protected_at_scale(x, y, p, r, eps, 1.0, dom)
}

/// Same predicate evaluated in a frame scaled by `scale`: the balls have radii
/// `scale`, `scale·√R`, `scale·R`, the gadget is `p + scale·Y` and the
/// matching tolerance is `scale·eps`.
pub fn is_protected_at_scale(
    x: &[Point],
    y: &[Point],
    p: &Point,
    r: f64,
    eps: f64,
    scale: f64,
    dom: &Domain,
) -> Protection {
    let inner = scale;
    let outer = scale * r;
    let shell = scale * r.sqrt();
    let annulus: Vec<usize> = x
        .iter()
        .enumerate()
        .filter(|(_, q)| {
            let d = dom.dist(q, p);
            d > inner && d <= outer
        })
        .map(|(i, _)| i)
        .collect();
    let inside_shell = annulus.iter().all(|&i| dom.dist(&x[i], p) <= shell);
    let placed: Vec<Point> = y.iter().map(|q| dom.translate(p, &q.scale(scale).coords)).collect();
    let pts: Vec<Point> = annulus.iter().map(|&i| x[i].clone()).collect();
    let matching = approx_match(&pts, &placed, eps * scale, dom);
    Protection { protected: inside_shell && matching.is_some(), annulus, matching }
}

/// A planar similarity `v ↦ origin + scale·R(angle)·F^mirrored·v`, with
/// `F(x, y) = (−x, y)`, plus a unit direction `axis` carried along as a vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub origin: [f64; 2],
    pub scale: f64,
    pub angle: f64,
    pub mirrored: bool,
    pub axis: [f64; 2],
}

impl Default for Frame {
    fn default() -> Self {
        Frame { origin: [0.0, 0.0], scale: 1.0, angle: 0.0, mirrored: false, axis: [0.0, 1.0] }
    }
}

impl Frame {
    pub fn translation(x: f64, y: f64) -> Self {
        Frame { origin: [x, y], ..Frame::default() }
    }

    /// The linear part applied to a vector.
    pub fn apply_vector(&self, v: [f64; 2]) -> [f64; 2] {
        let x = if self.mirrored { -v[0] } else { v[0] };
        let (s, c) = self.angle.sin_cos();
        [self.scale * (c * x - s * v[1]), self.scale * (s * x + c * v[1])]
    }

    pub fn apply(&self, p: &Point) -> Point {
        let v = self.apply_vector([p.x(), p.y()]);
        Point::xy(self.origin[0] + v[0], self.origin[1] + v[1])
    }

    /// Inverse of [`Frame::apply`].
    pub fn unapply(&self, p: &Point) -> Point {
        let (dx, dy) = ((p.x() - self.origin[0]) / self.scale, (p.y() - self.origin[1]) / self.scale);
        let (s, c) = self.angle.sin_cos();
        let (x, y) = (c * dx + s * dy, -s * dx + c * dy);
        Point::xy(if self.mirrored { -x } else { x }, y)
    }

    /// `self ∘ inner`; the axis of `inner` is mapped into this frame.
    pub fn compose(&self, inner: &Frame) -> Frame {
        let o = self.apply(&Point::xy(inner.origin[0], inner.origin[1]));
        let sign = if self.mirrored { -1.0 } else { 1.0 };
        let a = self.apply_vector(inner.axis);
        let na = a[0].hypot(a[1]);
        Frame {
            origin: [o.x(), o.y()],
            scale: self.scale * inner.scale,
            angle: self.angle + sign * inner.angle,
            mirrored: self.mirrored != inner.mirrored,
            axis: [a[0] / na, a[1] / na],
        }
    }

    /// Direction of `axis` as an angle in radians.
    pub fn axis_angle(&self) -> f64 {
        self.axis[1].atan2(self.axis[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_torus(a: &Point, b: &Point, t: f64) -> f64 {
        // minimum over all 3^d shifts of b
        let d = a.dim();
        let mut best = f64::INFINITY;
        for code in 0..3usize.pow(d as u32) {
            let mut c = code;
            let mut s = 0.0;
            for k in 0..d {
                let shift = (c % 3) as f64 - 1.0;
                c /= 3;
                let dx = a.coords[k] - (b.coords[k] + shift * t);
                s += dx * dx;
            }
            best = best.min(s.sqrt());
        }
        best
    }

    #[test]
    fn cube_distance_345() {
        let dom = Domain::cube(2, 10.0);
        assert_eq!(dom.dist(&Point::xy(0.0, 0.0), &Point::xy(3.0, 4.0)), 5.0);
    }

    #[test]
    fn torus_wraparound() {
        let dom = Domain::torus(2, 10.0);
        assert!((dom.dist(&Point::xy(0.5, 0.0), &Point::xy(9.5, 0.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn torus_matches_shift_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..=3 {
            let dom = Domain::torus(d, 7.0);
            for _ in 0..500 {
                let a = Point::new((0..d).map(|_| rng.gen_range(0.0..7.0)).collect());
                let b = Point::new((0..d).map(|_| rng.gen_range(0.0..7.0)).collect());
                assert!((dom.dist(&a, &b) - brute_torus(&a, &b, 7.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let dom = Domain::cube(2, 1.0);
        assert!(matches!(
            dom.try_dist(&Point::xy(0.0, 0.0), &Point::new(vec![0.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn approx_match_identity_and_failure() {
        let dom = Domain::cube(2, 10.0);
        let a = vec![Point::xy(1.0, 1.0), Point::xy(2.0, 3.0), Point::xy(5.0, 5.0)];
        let m = approx_match(&a, &a, 1e-9, &dom).unwrap();
        assert_eq!(m.pairs, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(m.max_displacement, 0.0);

        let eps = 0.1;
        let far = approx_match(&[Point::xy(0.0, 0.0)], &[Point::xy(0.0, 2.0 * eps)], eps, &dom);
        assert!(far.is_none());
        assert!(approx_match(&a, &a[..2], 1.0, &dom).is_none());
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn approx_match_agrees_with_bijection_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dom = Domain::cube(2, 10.0);
        let perms = permutations(6);
        for trial in 0..40 {
            let eps = 0.6;
            let a: Vec<Point> =
                (0..6).map(|_| Point::xy(rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0))).collect();
            let b: Vec<Point> = if trial % 2 == 0 {
                // every point shifted by eps/2
                a.iter().map(|p| p.add(&[eps / 2.0, 0.0])).collect()
            } else {
                (0..6).map(|_| Point::xy(rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0))).collect()
            };
            let brute = perms.iter().any(|perm| (0..6).all(|i| dom.dist(&a[i], &b[perm[i]]) < eps));
            let fast = approx_match(&a, &b, eps, &dom);
            assert_eq!(brute, fast.is_some(), "trial {trial}");
            if trial % 2 == 0 {
                assert!(brute);
            }
            if let Some(m) = fast {
                assert!(m.max_displacement < eps);
            }
        }
    }

    #[test]
    fn perturb_zero_is_identity_and_wraps() {
        let dom = Domain::torus(2, 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = vec![Point::xy(0.01, 9.99), Point::xy(5.0, 5.0)];
        assert_eq!(perturb(&s, 0.0, &mut rng, &dom), s);
        for _ in 0..200 {
            let out = perturb(&s, 3.0, &mut rng, &dom);
            assert!(out.iter().all(|p| dom.contains(p)));
        }
    }

    #[test]
    fn perturb_mean_radius_matches_ball_law() {
        // E|U| for U uniform in the d-ball of radius δ is d/(d+1)·δ.
        let dom = Domain::plane();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = vec![Point::xy(0.0, 0.0)];
        let n = 100_000;
        let mean = (0..n).map(|_| perturb(&p, 1.0, &mut rng, &dom)[0].norm()).sum::<f64>() / n as f64;
        assert!((mean - 2.0 / 3.0).abs() / (2.0 / 3.0) < 0.01, "mean {mean}");
    }

    #[test]
    fn rounding_grid() {
        let dom = Domain::cube(2, 1.0);
        let r = round_point(&Point::xy(0.3, 0.62), 0.25, &dom);
        for c in &r.coords {
            assert!([0.0, 0.25, 0.5, 0.75, 1.0].contains(c));
        }
        let on_grid = Point::xy(0.25, 0.5);
        assert_eq!(round_point(&on_grid, 0.25, &dom), on_grid);
    }

    #[test]
    fn rounding_stays_within_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dom = Domain::torus(2, 13.0);
        for _ in 0..10_000 {
            let eps = rng.gen_range(1e-6..1.0);
            let p = Point::xy(rng.gen_range(0.0..13.0), rng.gen_range(0.0..13.0));
            let r = round_point(&p, eps, &dom);
            assert!(dom.dist(&p, &r) <= eps);
            assert_eq!(round_point(&r, eps, &dom), r);
        }
    }

    #[test]
    fn angles() {
        let dom = Domain::plane();
        let p = Point::xy(3.0, 4.0);
        let q = p.add(&[0.0, 1.0]);
        assert!(angle(&p.add(&[0.0, 2.0]), &p, &q, &dom).unwrap().abs() < 1e-12);
        assert!((angle(&p.add(&[1.0, 0.0]), &p, &q, &dom).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((angle(&p.add(&[1.0, 1.0]), &p, &q, &dom).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!(matches!(angle(&p, &p, &q, &dom), Err(Error::Degenerate(_))));
    }

    fn triangle() -> Vec<Point> {
        let r = 2.0 / 3f64.sqrt();
        (0..3)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_2 + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
                Point::xy(r * a.cos(), r * a.sin())
            })
            .collect()
    }

    #[test]
    fn protected_exact_copy_and_stray_point() {
        let dom = Domain::torus(2, 100.0);
        let p = Point::xy(50.0, 50.0);
        let y = triangle();
        let mut x: Vec<Point> = y.iter().map(|q| p.add(&q.coords)).collect();
        x.push(p.add(&[0.1, 0.2]));
        x.push(Point::xy(5.0, 5.0));
        let prot = is_protected(&x, &y, &p, 16.0, 1e-6, &dom);
        assert!(prot.protected);
        assert_eq!(prot.annulus, vec![0, 1, 2]);

        let mut bad = x.clone();
        bad.push(p.add(&[16.0 - 0.1, 0.0]));
        assert!(!is_protected(&bad, &y, &p, 16.0, 1e-6, &dom).protected);
    }

    #[test]
    fn protected_under_half_eps_perturbation_agrees_with_brute_force() {
        let dom = Domain::torus(2, 100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = Point::xy(30.0, 70.0);
        let y = triangle();
        let eps = 0.05;
        let placed: Vec<Point> = y.iter().map(|q| p.add(&q.coords)).collect();
        let x = perturb(&placed, eps / 2.0, &mut rng, &dom);
        let prot = is_protected(&x, &y, &p, 16.0, eps, &dom);
        let brute = permutations(3).iter().any(|perm| (0..3).all(|i| dom.dist(&x[i], &placed[perm[i]]) < eps));
        assert!(brute);
        assert_eq!(prot.protected, brute);
    }

    #[test]
    fn frame_compose_matches_nested_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let mut f = || Frame {
                origin: [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)],
                scale: rng.gen_range(0.1..3.0),
                angle: rng.gen_range(-3.0..3.0),
                mirrored: rng.gen_bool(0.5),
                axis: [1.0, 0.0],
            };
            let (a, b) = (f(), f());
            let p = Point::xy(0.3, -1.7);
            let direct = a.apply(&b.apply(&p));
            let composed = a.compose(&b).apply(&p);
            let back = a.unapply(&a.apply(&p));
            assert!((back.x() - p.x()).abs() < 1e-9 && (back.y() - p.y()).abs() < 1e-9);
            assert!((direct.x() - composed.x()).abs() < 1e-9 && (direct.y() - composed.y()).abs() < 1e-9);
            let ax = a.apply_vector(b.axis);
            let c = a.compose(&b).axis;
            assert!((ax[1].atan2(ax[0]) - c[1].atan2(c[0])).abs() < 1e-9);
        }
    }
}
