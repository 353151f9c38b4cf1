//! Point configurations: the per-heuristic gadgets `Y`, `Π(k)`, `Q`, `M_H`,
//! `Π_H` and `Π³_H`.
//!
//! Gadgets live in local coordinates with their anchor at the origin. Marked
//! points and sub-gadget index ranges are named; nesting prefixes the inner
//! names with the outer block name, e.g. `Pi2.M3.Q.x`.

mod provider;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Frame, Point};
use crate::heuristics::Heuristic;
use crate::instance::{GadgetHeader, Instance};

pub use provider::{
    displacement_slack, papadimitriou_eps0, rhombus_closest, rhombus_depth, rhombus_for, toy_provider, toy_provider_with, HardCoreProvider,
    ToyVariant, TOY_EPS0, TOY_INNER,
};

pub const DEFAULT_R: f64 = 100.0;
pub const DEFAULT_K: usize = 1;
pub const DEFAULT_EPS1: f64 = 0.01;
pub const DEFAULT_LAMBDA: f64 = 0.05;
pub const DEFAULT_C0: f64 = 1.5;
pub const MAX_BETA: f64 = 0.01;
/// `α` is the largest value with `α·diam(Q) ≤` this.
pub const ALPHA_DIAMETER: f64 = 1.9;
pub const DEFAULT_EPS_PI: f64 = 0.1;
pub const DEFAULT_D1: f64 = 10.0;
pub const NI_POINTS: usize = 18;
/// Grid for the reflected copies in `Π_H`, fine enough to be invisible and
/// coarse enough that `1 − a` is exact.
pub const SYMMETRY_GRID: f64 = 1.0 / (1u64 << 40) as f64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gadget {
    pub kind: String,
    pub points: Vec<Point>,
    pub params: BTreeMap<String, f64>,
    pub marked: BTreeMap<String, usize>,
    /// Half-open index ranges of named sub-blocks.
    pub ranges: BTreeMap<String, (usize, usize)>,
    /// Placement of each named sub-block relative to its own local coordinates.
    /// The axis is the approach direction used by hypothesis (d).
    #[serde(default)]
    pub frames: BTreeMap<String, Frame>,
}

impl Gadget {
    pub fn new(kind: &str, points: Vec<Point>) -> Self {
        Gadget {
            kind: kind.to_string(),
            points,
            params: BTreeMap::new(),
            marked: BTreeMap::new(),
            ranges: BTreeMap::new(),
            frames: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn mark(&self, name: &str) -> Result<usize> {
        self.marked.get(name).copied().ok_or_else(|| Error::InvalidArgument(format!("gadget has no mark `{name}`")))
    }

    pub fn range(&self, name: &str) -> Result<(usize, usize)> {
        self.ranges.get(name).copied().ok_or_else(|| Error::InvalidArgument(format!("gadget has no range `{name}`")))
    }

    pub fn range_points(&self, name: &str) -> Result<&[Point]> {
        let (a, b) = self.range(name)?;
        Ok(&self.points[a..b])
    }

    /// Largest distance of a point from the origin.
    pub fn radius(&self) -> f64 {
        self.points.iter().map(Point::norm).fold(0.0, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.points)
    }

    /// Outer radius of the protected annulus: `R` unless the gadget reaches
    /// beyond `√R`, in which case the smallest `R'` with `Y ⊆ B(0, √R')`.
    pub fn protection_radius(&self) -> Option<f64> {
        self.param("R_protect").or_else(|| self.param("R"))
    }

    /// Frame of a named block; the whole gadget has the identity frame.
    pub fn frame(&self, name: &str) -> Frame {
        self.frames.get(name).copied().unwrap_or_default()
    }

    /// All `M_H` sub-copies, as `(name, range)` in index order.
    pub fn m_copies(&self) -> Vec<(String, (usize, usize))> {
        let mut out: Vec<(String, (usize, usize))> = self
            .ranges
            .iter()
            .filter(|(name, _)| {
                let last = name.rsplit('.').next().unwrap_or(name);
                matches!(last, "M1" | "M2" | "M3" | "M4")
            })
            .map(|(n, &r)| (n.clone(), r))
            .collect();
        if self.kind == "m" {
            out.push(("M".to_string(), (0, self.len())));
        }
        out.sort_by_key(|(_, r)| r.0);
        out
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        for (name, &i) in &self.marked {
            if i >= n {
                return Err(Error::Construction(format!("mark `{name}` = {i} outside 0..{n}")));
            }
        }
        for (name, &(a, b)) in &self.ranges {
            if a > b || b > n {
                return Err(Error::Construction(format!("range `{name}` = {a}..{b} outside 0..{n}")));
            }
        }
        if self.points.iter().any(|p| p.dim() != 2 || p.coords.iter().any(|c| !c.is_finite())) {
            return Err(Error::Construction("gadget points must be finite and planar".into()));
        }
        Ok(())
    }

    /// Applies `f` to every point, keeping all metadata.
    pub fn map_points(&self, f: impl Fn(&Point) -> Point) -> Gadget {
        Gadget { points: self.points.iter().map(f).collect(), ..self.clone() }
    }

    /// Applies the similarity `f` to the points and all block frames.
    pub fn transformed(&self, f: &Frame) -> Gadget {
        let mut g = self.map_points(|p| f.apply(p));
        for fr in g.frames.values_mut() {
            *fr = f.compose(fr);
        }
        g
    }

    pub fn scaled(&self, s: f64) -> Gadget {
        self.transformed(&Frame { scale: s, ..Frame::default() })
    }

    pub fn translated(&self, v: &[f64]) -> Gadget {
        self.transformed(&Frame::translation(v[0], v[1]))
    }

    /// Rotation about the origin by `theta` radians.
    pub fn rotated(&self, theta: f64) -> Gadget {
        self.transformed(&Frame { angle: theta, ..Frame::default() })
    }

    /// Mirror image under `x ↦ −x`.
    pub fn reflected(&self) -> Gadget {
        self.transformed(&Frame { mirrored: true, ..Frame::default() })
    }

    /// Appends `other` as block `prefix` placed by `frame`, carrying its
    /// marks, ranges and frames.
    fn embed(&mut self, prefix: &str, other: &Gadget, points: Vec<Point>, frame: Frame) {
        let off = self.len();
        self.points.extend(points);
        self.ranges.insert(prefix.to_string(), (off, self.len()));
        for (k, &i) in &other.marked {
            self.marked.insert(format!("{prefix}.{k}"), off + i);
        }
        for (k, &(a, b)) in &other.ranges {
            self.ranges.insert(format!("{prefix}.{k}"), (off + a, off + b));
        }
        self.frames.insert(prefix.to_string(), frame);
        for (k, f) in &other.frames {
            self.frames.insert(format!("{prefix}.{k}"), frame.compose(f));
        }
    }

    pub fn header(&self) -> GadgetHeader {
        GadgetHeader {
            kind: self.kind.clone(),
            params: self.params.clone(),
            marked: self.marked.clone(),
            ranges: self.ranges.clone(),
            frames: self.frames.clone(),
        }
    }

    /// A planar instance holding exactly the gadget.
    pub fn to_instance(&self) -> Instance {
        let mut inst = Instance::planar(self.points.clone());
        inst.gadget = Some(self.header());
        inst
    }

    pub fn from_instance(inst: &Instance) -> Result<Gadget> {
        let h = inst.gadget.clone().ok_or_else(|| Error::InvalidArgument("instance carries no gadget header".into()))?;
        let g = Gadget {
            kind: h.kind,
            points: inst.points.clone(),
            params: h.params,
            marked: h.marked,
            ranges: h.ranges,
            frames: h.frames,
        };
        g.validate()?;
        Ok(g)
    }
}

pub fn diameter(points: &[Point]) -> f64 {
    let dom = Domain::plane();
    let mut best: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(dom.dist(a, b));
        }
    }
    best
}

pub fn min_pairwise_distance(points: &[Point]) -> f64 {
    let dom = Domain::plane();
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.min(dom.dist(a, b));
        }
    }
    best
}

fn scalefree_params(g: &mut Gadget, r: f64) {
    g.params.insert("R".into(), r);
    g.params.insert("K".into(), DEFAULT_K as f64);
    g.params.insert("eps1".into(), DEFAULT_EPS1);
    g.params.insert("s".into(), g.len() as f64);
    let reach = g.radius();
    g.params.insert("R_protect".into(), r.max(reach * reach));
    for i in 0..g.len() {
        g.marked.insert(format!("y{}", i + 1), i);
    }
}

/// Equilateral triangle with side 2, centroid at the origin, one vertex on
/// the positive `y`-axis.
pub fn nn_gadget() -> Gadget {
    let h = 1.0 / 3f64.sqrt();
    let mut g =
        Gadget::new("nn", vec![Point::xy(0.0, 2.0 * h), Point::xy(-1.0, -h), Point::xy(1.0, -h)]);
    scalefree_params(&mut g, DEFAULT_R);
    g
}

/// 18 points at angles `90° + 20°·j` on the circle of radius `√R` centered at
/// `(0, √R/2)`. The left half mirrors the right half exactly.
pub fn ni_gadget(r: f64) -> Result<Gadget> {
    if !(r > 4.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("ni gadget needs R > 4 so that B(0,1) stays empty, got {r}")));
    }
    let rho = r.sqrt();
    let at = |j: usize| {
        let th = (90.0 + 20.0 * j as f64).to_radians();
        Point::xy(rho * th.cos(), rho / 2.0 + rho * th.sin())
    };
    let mut pts: Vec<Point> = (0..NI_POINTS).map(at).collect();
    pts[0] = Point::xy(0.0, rho / 2.0 + rho);
    pts[9] = Point::xy(0.0, rho / 2.0 - rho);
    for j in 1..9 {
        let m = &pts[NI_POINTS - j];
        pts[j] = Point::xy(-m.x(), m.y());
    }
    let mut g = Gadget::new("ni", pts);
    if g.points.iter().any(|p| p.norm() <= 1.0) {
        return Err(Error::Construction("ni gadget point inside B(0,1)".into()));
    }
    scalefree_params(&mut g, r);
    g.params.insert("phase_deg".into(), 90.0);
    Ok(g)
}

/// The gadget `Y` used by the local simulator of `h`.
pub fn heuristic_gadget(h: Heuristic) -> Result<Gadget> {
    match h {
        Heuristic::NearestNeighbor | Heuristic::Greedy => {
            let mut g = nn_gadget();
            g.kind = h.name().to_string();
            Ok(g)
        }
        Heuristic::NearestInsertion | Heuristic::FarthestInsertion => {
            let mut g = ni_gadget(DEFAULT_R)?;
            g.kind = h.name().to_string();
            Ok(g)
        }
        Heuristic::Karp => Err(Error::Unsupported("karp dissection has no local gadget".into())),
    }
}

/// `π₁=(0,5), π₂=(0,0), π₃=(1,0), π₄=(1,5)` followed by `(½, 5j/k)`, `0 ≤ j ≤ k`.
pub fn pi_set(k: usize) -> Result<Gadget> {
    if k == 0 {
        return Err(Error::InvalidArgument("pi set needs k >= 1".into()));
    }
    let mut pts = vec![Point::xy(0.0, 5.0), Point::xy(0.0, 0.0), Point::xy(1.0, 0.0), Point::xy(1.0, 5.0)];
    pts.extend((0..=k).map(|j| Point::xy(0.5, 5.0 * j as f64 / k as f64)));
    let mut g = Gadget::new("pi", pts);
    for i in 0..4 {
        g.marked.insert(format!("pi{}", i + 1), i);
    }
    g.ranges.insert("midline".into(), (4, k + 5));
    g.params.insert("k".into(), k as f64);
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QConfig {
    pub lambda: f64,
    /// `None` searches for the largest admissible value `≤ MAX_BETA`.
    pub beta: Option<f64>,
    pub c0: f64,
}

impl Default for QConfig {
    fn default() -> Self {
        QConfig { lambda: DEFAULT_LAMBDA, beta: None, c0: DEFAULT_C0 }
    }
}

struct Rescaled {
    points: Vec<Point>,
    rhombus: [Point; 4],
    p: usize,
    q: usize,
    eps0: f64,
}

impl Rescaled {
    /// `p`, `q` are the closest points of the rhombus to `x`, `y`, and `x`, `y`
    /// are `ε₀′` closer to `p`, `q` than to any other point.
    fn admits(&self, beta: f64) -> bool {
        let dom = Domain::plane();
        let (x, y) = (Point::xy(-1.0, -beta), Point::xy(1.0, -beta));
        let tight = |a: &Point, b: &Point| dom.dist(a, b) <= 1e-12;
        for (end, apex) in [(&x, self.p), (&y, self.q)] {
            if !tight(&rhombus_closest(&self.rhombus, end), &self.points[apex]) {
                return false;
            }
            let d_apex = dom.dist(end, &self.points[apex]);
            let nearest_other = (0..self.points.len())
                .filter(|&i| i != apex)
                .map(|i| dom.dist(end, &self.points[i]))
                .fold(f64::INFINITY, f64::min);
            if nearest_other < d_apex + self.eps0 {
                return false;
            }
        }
        true
    }
}

/// `Q`: the provider rescaled by `λ/(C₀k)` with its `pq` diagonal horizontal
/// and centered at the origin, plus `x = (−1, −β)` and `y = (1, −β)`.
pub fn q_set(provider: &HardCoreProvider, cfg: &QConfig) -> Result<Gadget> {
    let k = provider.len();
    if !(cfg.lambda > 0.0 && cfg.lambda <= 1.0) {
        return Err(Error::InvalidArgument(format!("lambda must lie in (0, 1], got {}", cfg.lambda)));
    }
    if cfg.c0 <= 1.0 {
        return Err(Error::InvalidArgument("C0 must exceed 1".into()));
    }
    if provider.shortest.length >= cfg.c0 * k as f64 {
        return Err(Error::Construction(format!(
            "provider path {} is not below C0·k = {}",
            provider.shortest.length,
            cfg.c0 * k as f64
        )));
    }
    let scale = cfg.lambda / (cfg.c0 * k as f64);
    let (pp, pq) = (&provider.points[provider.p], &provider.points[provider.q]);
    let (cx, cy) = ((pp.x() + pq.x()) / 2.0, (pp.y() + pq.y()) / 2.0);
    let (s, c) = (-(pq.y() - pp.y()).atan2(pq.x() - pp.x())).sin_cos();
    let place = |a: &Point| {
        let (dx, dy) = (a.x() - cx, a.y() - cy);
        Point::xy(scale * (c * dx - s * dy), scale * (s * dx + c * dy))
    };
    let rescaled = Rescaled {
        points: provider.points.iter().map(place).collect(),
        rhombus: [
            place(&provider.rhombus[0]),
            place(&provider.rhombus[1]),
            place(&provider.rhombus[2]),
            place(&provider.rhombus[3]),
        ],
        p: provider.p,
        q: provider.q,
        eps0: scale * provider.eps0,
    };
    let beta = match cfg.beta {
        Some(b) => {
            if !(b > 0.0) || !rescaled.admits(b) {
                return Err(Error::InvalidArgument(format!("beta = {b} violates the closest-point condition")));
            }
            b
        }
        None => search_beta(&rescaled)?,
    };

    let mut pts = rescaled.points.clone();
    pts.push(Point::xy(-1.0, -beta));
    pts.push(Point::xy(1.0, -beta));
    let mut g = Gadget::new("q", pts);
    g.marked.insert("p".into(), provider.p);
    g.marked.insert("q".into(), provider.q);
    g.marked.insert("x".into(), k);
    g.marked.insert("y".into(), k + 1);
    g.ranges.insert("P".into(), (0, k));
    for (name, v) in [
        ("lambda", cfg.lambda),
        ("beta", beta),
        ("C0", cfg.c0),
        ("k", k as f64),
        ("scale", scale),
        ("eps0", provider.eps0),
        ("eps0_prime", scale * provider.eps0),
        ("threshold", scale * provider.threshold),
        ("provider_threshold", provider.threshold),
    ] {
        g.params.insert(name.into(), v);
    }
    Ok(g)
}

/// Largest `β ≤ MAX_BETA` admitted, by bisection.
fn search_beta(r: &Rescaled) -> Result<f64> {
    if r.admits(MAX_BETA) {
        return Ok(MAX_BETA);
    }
    let (mut lo, mut hi) = (0.0, MAX_BETA);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if r.admits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo > 0.0 && r.admits(lo) {
        Ok(lo)
    } else {
        Err(Error::SearchExhausted("no beta in (0, 0.01] satisfies the closest-point condition".into()))
    }
}

/// `M_H`: `Q` scaled by `α` into `B(0,1)` followed by the heuristic gadget.
/// `alpha = None` takes the largest `α` with `α·diam(Q) ≤ 1.9`.
pub fn m_set(y: &Gadget, alpha: Option<f64>, q: &Gadget) -> Result<Gadget> {
    let dq = q.diameter();
    let alpha = alpha.unwrap_or(ALPHA_DIAMETER / dq);
    if !(alpha > 0.0) || alpha * dq >= 2.0 {
        return Err(Error::InvalidArgument(format!("alpha·diam(Q) = {} must be below 2", alpha * dq)));
    }
    let sq = q.scaled(alpha);
    if sq.radius() >= 1.0 {
        return Err(Error::GadgetOverflow(format!("scaled Q reaches radius {} >= 1", sq.radius())));
    }
    let outer = y.protection_radius().unwrap_or(f64::INFINITY).sqrt();
    if y.points.iter().any(|p| p.norm() <= 1.0 || p.norm() > outer) {
        return Err(Error::GadgetOverflow("gadget Y leaves the annulus B(0, √R) \\ B(0, 1)".into()));
    }
    let mut g = Gadget::new("m", Vec::with_capacity(q.len() + y.len()));
    g.embed("Q", q, sq.points.clone(), Frame { scale: alpha, ..Frame::default() });
    g.embed("Y", y, y.points.clone(), Frame::default());
    for (k, v) in q.params.iter().chain(y.params.iter()) {
        g.params.insert(k.clone(), *v);
    }
    g.params.insert("alpha".into(), alpha);
    g.params.insert("heuristic".into(), heuristic_code(&y.kind));
    Ok(g)
}

/// Numeric code of the heuristic a gadget `Y` was built for; params are numeric.
pub fn heuristic_code(kind: &str) -> f64 {
    match kind {
        "nn" => 0.0,
        "greedy" => 1.0,
        "ni" => 2.0,
        "fi" => 3.0,
        _ => -1.0,
    }
}

pub fn heuristic_from_code(code: f64) -> Option<Heuristic> {
    match code as i64 {
        0 => Some(Heuristic::NearestNeighbor),
        1 => Some(Heuristic::Greedy),
        2 => Some(Heuristic::NearestInsertion),
        3 => Some(Heuristic::FarthestInsertion),
        _ => None,
    }
}

fn snap(v: f64) -> f64 {
    (v / SYMMETRY_GRID).round() * SYMMETRY_GRID
}

/// `Π_H`: `Π(k)` with each `πᵢ` replaced by a copy of `m` scaled into a ball of
/// radius `ε_Π`; the copies at `π₃`, `π₄` are mirror images. Copy offsets are
/// snapped to a `2^-40` grid so that `x ↦ 1 − x` maps the set onto itself
/// bit for bit.
pub fn pi_h(k: usize, eps_pi: f64, m: &Gadget) -> Result<Gadget> {
    if !(eps_pi > 0.0 && eps_pi < 0.25) {
        return Err(Error::InvalidArgument(format!("eps_Pi must lie in (0, 1/4), got {eps_pi}")));
    }
    let base = pi_set(k)?;
    let copy_scale = eps_pi / m.radius();
    let local: Vec<(f64, f64)> = m.points.iter().map(|p| (snap(copy_scale * p.x()), snap(copy_scale * p.y()))).collect();
    let mut g = Gadget::new("piH", Vec::with_capacity(4 * m.len() + k + 1));
    for (i, (cx, cy)) in [(0.0, 5.0), (0.0, 0.0), (1.0, 0.0), (1.0, 5.0)].into_iter().enumerate() {
        let mirrored = i >= 2;
        let pts = local
            .iter()
            .map(|&(a, b)| if mirrored { Point::xy(cx - a, cy + b) } else { Point::xy(cx + a, cy + b) })
            .collect();
        // Copies face the midline: +x on the left, -x on the mirrored right.
        let frame = Frame {
            origin: [cx, cy],
            scale: copy_scale,
            angle: 0.0,
            mirrored,
            axis: if mirrored { [-1.0, 0.0] } else { [1.0, 0.0] },
        };
        g.embed(&format!("M{}", i + 1), m, pts, frame);
    }
    let off = g.len();
    g.points.extend(base.points[4..].iter().cloned());
    g.ranges.insert("midline".into(), (off, g.len()));
    for (key, v) in &m.params {
        g.params.insert(key.clone(), *v);
    }
    g.params.insert("k".into(), k as f64);
    g.params.insert("eps_Pi".into(), eps_pi);
    g.params.insert("copy_scale".into(), copy_scale);

    let copies = &g.points[..off];
    let midline = &g.points[off..];
    let gap = copies
        .iter()
        .flat_map(|a| midline.iter().map(move |b| (a.x() - b.x()).hypot(a.y() - b.y())))
        .fold(f64::INFINITY, f64::min);
    if !(gap > 0.0) || !(min_pairwise_distance(&g.points) > 0.0) {
        return Err(Error::Construction("pi_H copies overlap".into()));
    }
    if !is_mirror_symmetric(&g.points, 1.0) {
        return Err(Error::Construction("pi_H lost its reflection symmetry".into()));
    }
    Ok(g)
}

/// Whether `x ↦ axis2 − x` maps the point set onto itself exactly.
pub fn is_mirror_symmetric(points: &[Point], axis2: f64) -> bool {
    let key = |p: &Point| (p.x().to_bits(), p.y().to_bits());
    let mut a: Vec<(u64, u64)> = points.iter().map(key).collect();
    let mut b: Vec<(u64, u64)> = points.iter().map(|p| key(&Point::xy(axis2 - p.x(), p.y()))).collect();
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pi3Orientation {
    /// Each copy's midline points at the triangle center.
    Inward,
    /// Every copy turned by 90°, as drawn.
    Parallel,
}

/// `Π³_H`: three copies of `Π_H` centered at the vertices of an equilateral
/// triangle with side `2·D₁` centered at the origin.
pub fn pi_h_3(pi: &Gadget, d1: f64, orientation: Pi3Orientation) -> Result<Gadget> {
    let diam = pi.diameter();
    if !(d1 > diam) {
        return Err(Error::InvalidArgument(format!("D1 = {d1} must exceed diam(pi_H) = {diam}")));
    }
    let (cx, cy) = (0.5, 2.5);
    let centered = pi.translated(&[-cx, -cy]);
    let reach = centered.radius();
    let circum = 2.0 * d1 / 3f64.sqrt();
    let mut g = Gadget::new("pi3", Vec::with_capacity(3 * pi.len()));
    for (i, phi_deg) in [90.0f64, 210.0, 330.0].into_iter().enumerate() {
        let phi = phi_deg.to_radians();
        let theta = match orientation {
            Pi3Orientation::Inward => phi - std::f64::consts::FRAC_PI_2,
            Pi3Orientation::Parallel => std::f64::consts::FRAC_PI_2,
        };
        let (s, c) = theta.sin_cos();
        let frame = Frame {
            origin: [circum * phi.cos() - (c * cx - s * cy), circum * phi.sin() - (s * cx + c * cy)],
            angle: theta,
            axis: [-s, c],
            ..Frame::default()
        };
        let copy = centered.rotated(theta).translated(&[circum * phi.cos(), circum * phi.sin()]);
        g.embed(&format!("Pi{}", i + 1), pi, copy.points, frame);
    }
    for (key, v) in &pi.params {
        g.params.insert(key.clone(), *v);
    }
    g.params.insert("D1".into(), d1);
    g.params.insert("inward".into(), if orientation == Pi3Orientation::Inward { 1.0 } else { 0.0 });

    let blocks: Vec<&[Point]> = (1..=3).map(|i| g.range_points(&format!("Pi{i}")).expect("block")).collect();
    let dom = Domain::plane();
    for i in 0..3 {
        for j in i + 1..3 {
            let gap = blocks[i]
                .iter()
                .flat_map(|a| blocks[j].iter().map(|b| dom.dist(a, b)))
                .fold(f64::INFINITY, f64::min);
            if gap < 2.0 * d1 - 2.0 * reach - 1e-9 || gap <= 0.0 {
                return Err(Error::Construction(format!("pi_H copies {i} and {j} too close: {gap}")));
            }
        }
    }
    Ok(g)
}

/// Default `M_H` for a heuristic and provider.
pub fn default_m(h: Heuristic, provider: &HardCoreProvider) -> Result<Gadget> {
    let q = q_set(provider, &QConfig::default())?;
    m_set(&heuristic_gadget(h)?, None, &q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{held_karp_path, PathEnds};
    use crate::geometry::is_protected;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn nn_triangle() {
        let g = nn_gadget();
        let dom = Domain::plane();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(close(dom.dist(&g.points[i], &g.points[j]), 2.0));
            }
            assert!(close(g.points[i].norm(), 2.0 / 3f64.sqrt()));
        }
        let cx: f64 = g.points.iter().map(|p| p.x()).sum();
        let cy: f64 = g.points.iter().map(|p| p.y()).sum();
        assert!(close(cx, 0.0) && close(cy, 0.0));
        assert!(g.points[0].x() == 0.0 && g.points[0].y() > 0.0);
    }

    #[test]
    fn ni_arc() {
        let g = ni_gadget(100.0).unwrap();
        assert_eq!(g.len(), 18);
        let c = Point::xy(0.0, 5.0);
        let dom = Domain::plane();
        for p in &g.points {
            assert!(close(dom.dist(p, &c), 10.0));
        }
        assert!(is_mirror_symmetric(&g.points, 0.0));
        // |(10cosθ, 5 + 10 sinθ)|² = 125 + 100 sinθ, smallest at θ = 270°
        let min_norm = g.points.iter().map(Point::norm).fold(f64::INFINITY, f64::min);
        assert!(close(min_norm, 5.0));
        assert!(close(g.protection_radius().unwrap(), 225.0));
        assert!(ni_gadget(4.0).is_err());
        assert!(ni_gadget(4.5).is_ok());
    }

    #[test]
    fn pi_set_shape() {
        assert_eq!(pi_set(10).unwrap().len(), 15);
        assert_eq!(pi_set(1).unwrap().len(), 6);
        let g = pi_set(10).unwrap();
        let (a, b) = g.range("midline").unwrap();
        assert!(g.points[a..b].iter().all(|p| p.x() == 0.5));
        assert!(pi_set(0).is_err());
    }

    #[test]
    fn q_set_coordinates_and_margins() {
        let prov = toy_provider(ToyVariant::Yes).unwrap();
        let q = q_set(&prov, &QConfig::default()).unwrap();
        let beta = q.param("beta").unwrap();
        let (x, y) = (&q.points[q.mark("x").unwrap()], &q.points[q.mark("y").unwrap()]);
        assert_eq!((x.x(), x.y()), (-1.0, -beta));
        assert_eq!((y.x(), y.y()), (1.0, -beta));
        let eps = q.param("eps0_prime").unwrap();
        let dom = Domain::plane();
        let (p, qq) = (q.mark("p").unwrap(), q.mark("q").unwrap());
        for i in 0..prov.len() {
            if i != p {
                assert!(dom.dist(x, &q.points[p]) < dom.dist(x, &q.points[i]) - eps);
            }
            if i != qq {
                assert!(dom.dist(y, &q.points[qq]) < dom.dist(y, &q.points[i]) - eps);
            }
        }
        assert!(close(eps, 0.05 * prov.eps0 / (1.5 * prov.len() as f64)));
        assert!(beta > 0.0 && beta <= MAX_BETA);
    }

    #[test]
    fn q_set_endpoint_pair_by_exact_paths() {
        for variant in [ToyVariant::Yes, ToyVariant::No] {
            let prov = toy_provider(variant).unwrap();
            let q = q_set(&prov, &QConfig::default()).unwrap();
            let inst = q.to_instance();
            let (x, y) = (q.mark("x").unwrap(), q.mark("y").unwrap());
            let best_xy = held_karp_path(&inst, PathEnds::Fixed(x, y)).unwrap().length;
            let (lambda, beta) = (q.param("lambda").unwrap(), q.param("beta").unwrap());
            assert!(best_xy < 2.0 + lambda + 2.0 * beta);
            for a in 0..q.len() {
                for b in a + 1..q.len() {
                    if (a, b) != (x, y) {
                        let l = held_karp_path(&inst, PathEnds::Fixed(a, b)).unwrap().length;
                        assert!(l - best_xy >= 1.0 - 2.0 * lambda - 2.0 * beta, "pair {a},{b}");
                    }
                }
            }
        }
    }

    #[test]
    fn q_set_rejects_bad_beta() {
        let prov = toy_provider(ToyVariant::Yes).unwrap();
        let cfg = QConfig { beta: Some(5.0), ..QConfig::default() };
        assert!(q_set(&prov, &cfg).is_err());
    }

    #[test]
    fn m_set_is_protected_at_origin() {
        let prov = toy_provider(ToyVariant::Yes).unwrap();
        for h in Heuristic::SCALEFREE {
            let y = heuristic_gadget(h).unwrap();
            let q = q_set(&prov, &QConfig::default()).unwrap();
            let m = m_set(&y, None, &q).unwrap();
            assert_eq!(m.len(), q.len() + y.len());
            let (a, b) = m.range("Q").unwrap();
            assert!(m.points[a..b].iter().all(|p| p.norm() < 1.0));
            let r = m.protection_radius().unwrap();
            let prot = is_protected(&m.points, &y.points, &Point::origin(2), r, 1e-9, &Domain::plane());
            assert!(prot.protected, "{h}");
        }
    }

    fn toy_m() -> Gadget {
        default_m(Heuristic::NearestNeighbor, &toy_provider(ToyVariant::Yes).unwrap()).unwrap()
    }

    #[test]
    fn pi_h_symmetry_and_count() {
        let m = toy_m();
        let g = pi_h(10, DEFAULT_EPS_PI, &m).unwrap();
        assert_eq!(g.len(), 11 + 4 * m.len());
        assert!(is_mirror_symmetric(&g.points, 1.0));
        assert!(min_pairwise_distance(&g.points) > 0.0);
        assert_eq!(g.m_copies().len(), 4);
        assert!(pi_h(10, 0.3, &m).is_err());
    }

    #[test]
    fn pi_h_3_layout() {
        let pi = pi_h(10, DEFAULT_EPS_PI, &toy_m()).unwrap();
        let g = pi_h_3(&pi, DEFAULT_D1, Pi3Orientation::Inward).unwrap();
        assert_eq!(g.len(), 3 * pi.len());
        let copies = g.m_copies();
        assert_eq!(copies.len(), 12);
        assert!(copies.iter().all(|(_, (a, b))| b - a == toy_m().len()));
        assert!(pi_h_3(&pi, 3.0, Pi3Orientation::Inward).is_err());
        let par = pi_h_3(&pi, DEFAULT_D1, Pi3Orientation::Parallel).unwrap();
        assert_eq!(par.len(), g.len());
    }

    #[test]
    fn m_copy_frames_locate_points() {
        let m = toy_m();
        let pi = pi_h(10, DEFAULT_EPS_PI, &m).unwrap();
        for orientation in [Pi3Orientation::Inward, Pi3Orientation::Parallel] {
            let g = pi_h_3(&pi, DEFAULT_D1, orientation).unwrap();
            for (name, (a, _)) in g.m_copies() {
                let f = g.frame(&name);
                for (j, local) in m.points.iter().enumerate() {
                    let placed = f.apply(local);
                    let d = (placed.x() - g.points[a + j].x()).hypot(placed.y() - g.points[a + j].y());
                    assert!(d < 1e-9, "{name} point {j} off by {d}");
                }
                // the approach axis points from the copy towards the midline
                let mid = g.range_points(&format!("{}.midline", name.split('.').next().unwrap())).unwrap();
                let c = &mid[mid.len() / 2];
                let (dx, dy) = (c.x() - f.origin[0], c.y() - f.origin[1]);
                assert!(dx * f.axis[0] + dy * f.axis[1] > 0.0);
            }
        }
    }

    #[test]
    fn inward_copies_point_at_center() {
        let pi = pi_h(10, DEFAULT_EPS_PI, &toy_m()).unwrap();
        let g = pi_h_3(&pi, DEFAULT_D1, Pi3Orientation::Inward).unwrap();
        for i in 1..=3 {
            let (a, b) = g.range(&format!("Pi{i}.midline")).unwrap();
            let (first, last) = (&g.points[a], &g.points[b - 1]);
            // the midline runs radially: its endpoints are collinear with the center
            let cross = first.x() * last.y() - first.y() * last.x();
            assert!(cross.abs() < 1e-9);
        }
    }

    #[test]
    fn header_round_trip_through_file() {
        let g = q_set(&toy_provider(ToyVariant::No).unwrap(), &QConfig::default()).unwrap();
        let inst = g.to_instance();
        let back = crate::instance::parse(&crate::instance::to_text(&inst).unwrap()).unwrap();
        assert_eq!(Gadget::from_instance(&back).unwrap(), g);
    }

    #[test]
    fn karp_has_no_gadget() {
        assert!(heuristic_gadget(Heuristic::Karp).is_err());
    }
}
