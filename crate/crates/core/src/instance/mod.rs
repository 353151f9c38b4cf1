//! Point-set instances: generation, discretization, planting and persistence.
//!
//! Indices are 0-based in memory and 1-based in files and command-line output.
//! Index order is the tie-breaking order used by every heuristic.

mod format;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Frame, Point, Topology};

pub use format::{load, parse, save, to_text};

/// Default precision for generated instances: a full double mantissa.
pub const DEFAULT_PRECISION_BITS: u32 = 52;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantRecord {
    pub gadget_name: String,
    pub center: Point,
    pub member_indices: Vec<usize>,
    pub clearance: f64,
}

/// Gadget metadata carried in an instance header.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GadgetHeader {
    pub kind: String,
    pub params: BTreeMap<String, f64>,
    pub marked: BTreeMap<String, usize>,
    /// Named half-open index ranges of sub-gadgets.
    #[serde(default)]
    pub ranges: BTreeMap<String, (usize, usize)>,
    #[serde(default)]
    pub frames: BTreeMap<String, Frame>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub points: Vec<Point>,
    pub domain: Domain,
    pub precision_bits: u32,
    pub seed: Option<u64>,
    pub plants: Vec<PlantRecord>,
    pub gadget: Option<GadgetHeader>,
}

impl Instance {
    pub fn new(points: Vec<Point>, domain: Domain) -> Self {
        Instance { points, domain, precision_bits: DEFAULT_PRECISION_BITS, seed: None, plants: Vec::new(), gadget: None }
    }

    /// Instance in an unbounded-looking plane; convenient for hand-built configurations.
    pub fn planar(points: Vec<Point>) -> Self {
        let extent = points.iter().flat_map(|p| p.coords.iter().map(|c| c.abs())).fold(1.0, f64::max);
        Instance::new(points, Domain::cube(2, 4.0 * extent))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.domain.dist(&self.points[i], &self.points[j])
    }

    /// Dense distance matrix.
    pub fn distance_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let d = self.dist(i, j);
                m[i][j] = d;
                m[j][i] = d;
            }
        }
        m
    }

    /// Sub-instance on the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Instance {
        let mut out = Instance::new(indices.iter().map(|&i| self.points[i].clone()).collect(), self.domain);
        out.precision_bits = self.precision_bits;
        out
    }

    /// Copy of `self` with the listed points replaced.
    pub fn with_points_replaced(&self, replaced: &[(usize, Point)]) -> Instance {
        let mut out = self.clone();
        for (i, p) in replaced {
            out.points[*i] = p.clone();
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        for p in &self.points {
            self.domain.check(p)?;
            if !self.domain.contains(p) {
                return Err(Error::InvalidArgument(format!("point {:?} outside the box", p.coords)));
            }
        }
        for rec in &self.plants {
            if let Some(&bad) = rec.member_indices.iter().find(|&&i| i >= self.len()) {
                return Err(Error::InvalidArgument(format!("plant member {bad} out of range")));
            }
        }
        Ok(())
    }
}

/// `n` i.i.d. uniform points in `[0,t)^d`, `t = n^{1/d}`.
pub fn gen_uniform(n: usize, d: usize, seed: u64, topology: Topology) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let t = side_for(n, d);
    let domain = Domain::new(d, t, topology)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n).map(|_| Point::new((0..d).map(|_| rng.gen_range(0.0..t)).collect())).collect();
    let mut inst = Instance::new(points, domain);
    inst.seed = Some(seed);
    Ok(inst)
}

/// Box side making unit point density: `n^{1/d}`, exact for perfect powers.
pub fn side_for(n: usize, d: usize) -> f64 {
    let r = (n as f64).powf(1.0 / d as f64);
    let rounded = r.round();
    if (rounded.powi(d as i32) - n as f64).abs() < 0.5 {
        rounded
    } else {
        r
    }
}

/// Result of snapping an instance to a coarser grid.
#[derive(Clone, Debug)]
pub struct Discretized {
    pub instance: Instance,
    /// Pairs of indices that landed on the same grid point.
    pub duplicates: Vec<(usize, usize)>,
}

/// Snaps every coordinate to the grid `t·j/2^bits`.
pub fn discretize(inst: &Instance, bits: u32) -> Result<Discretized> {
    if bits == 0 {
        return Err(Error::InvalidArgument("bits must be at least 1".into()));
    }
    let g = inst.domain.t / 2f64.powi(bits as i32);
    let mut out = inst.clone();
    for p in out.points.iter_mut() {
        for c in p.coords.iter_mut() {
            *c = (*c / g).round() * g;
        }
        *p = inst.domain.wrap(p.clone());
    }
    out.precision_bits = bits.min(inst.precision_bits);
    let mut seen: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut duplicates = Vec::new();
    for (i, p) in out.points.iter().enumerate() {
        let key: Vec<u64> = p.coords.iter().map(|c| c.to_bits()).collect();
        if let Some(&j) = seen.get(&key) {
            duplicates.push((j, i));
        } else {
            seen.insert(key, i);
        }
    }
    Ok(Discretized { instance: out, duplicates })
}

#[derive(Clone, Debug)]
pub struct PlantOptions {
    pub name: String,
    /// Original points closer than this to any gadget point are removed.
    pub clearance: f64,
    /// Rotation of the gadget about its anchor (planar gadgets only).
    pub rotation: Option<f64>,
    /// Minimum number of non-gadget points that must precede the gadget.
    pub min_survivors: usize,
}

impl PlantOptions {
    pub fn new(name: &str, clearance: f64) -> Self {
        PlantOptions { name: name.to_string(), clearance, rotation: None, min_survivors: 0 }
    }
}

/// Plants `gadget` (local coordinates, anchor at the origin) at `center`.
///
/// Background points within the clearance of any gadget point are removed and
/// the gadget is appended after all existing points, so its indices are the
/// largest in the instance.
pub fn plant(inst: &Instance, gadget: &[Point], center: &Point, opts: &PlantOptions) -> Result<(Instance, PlantRecord)> {
    if !(opts.clearance > 0.0) {
        return Err(Error::InvalidArgument("clearance must be positive".into()));
    }
    inst.domain.check(center)?;
    let dom = inst.domain;
    let local: Vec<Point> = match opts.rotation {
        None => gadget.to_vec(),
        Some(theta) => {
            if dom.d != 2 {
                return Err(Error::Unsupported("rotated planting needs d = 2".into()));
            }
            let (s, c) = theta.sin_cos();
            gadget.iter().map(|p| Point::xy(c * p.x() - s * p.y(), s * p.x() + c * p.y())).collect()
        }
    };
    let mut placed = Vec::with_capacity(local.len());
    for q in &local {
        dom.check(q)?;
        let abs = center.add(&q.coords);
        if dom.is_torus() {
            if q.norm() >= dom.t / 2.0 {
                return Err(Error::GadgetOverflow("gadget radius exceeds half the torus side".into()));
            }
        } else if !dom.contains(&abs) {
            return Err(Error::GadgetOverflow(format!("gadget point {:?} leaves the cube", abs.coords)));
        }
        placed.push(dom.wrap(abs));
    }

    let in_plant: Vec<bool> = {
        let mut v = vec![false; inst.len()];
        for rec in &inst.plants {
            for &i in &rec.member_indices {
                v[i] = true;
            }
        }
        v
    };
    let mut keep = Vec::with_capacity(inst.len());
    for (i, p) in inst.points.iter().enumerate() {
        let close = placed.iter().any(|g| dom.dist(p, g) < opts.clearance);
        if close && in_plant[i] {
            return Err(Error::GadgetOverflow(format!("clearance of `{}` overlaps an earlier plant", opts.name)));
        }
        if !close {
            keep.push(i);
        }
    }
    let survivors = keep.iter().filter(|&&i| !in_plant[i]).count();
    if survivors < opts.min_survivors {
        return Err(Error::GadgetOverflow(format!(
            "only {survivors} background points survive, {} required",
            opts.min_survivors
        )));
    }

    let mut remap = vec![usize::MAX; inst.len()];
    for (new, &old) in keep.iter().enumerate() {
        remap[old] = new;
    }
    let mut out = inst.clone();
    out.points = keep.iter().map(|&i| inst.points[i].clone()).collect();
    for rec in out.plants.iter_mut() {
        for i in rec.member_indices.iter_mut() {
            *i = remap[*i];
        }
    }
    let start = out.points.len();
    out.points.extend(placed);
    let record = PlantRecord {
        gadget_name: opts.name.clone(),
        center: dom.wrap(center.clone()),
        member_indices: (start..start + local.len()).collect(),
        clearance: opts.clearance,
    };
    out.plants.push(record.clone());
    Ok((out, record))
}

/// Minimum distance between a plant's members and every other point.
pub fn plant_isolation(inst: &Instance, rec: &PlantRecord) -> f64 {
    let members: std::collections::HashSet<usize> = rec.member_indices.iter().copied().collect();
    let mut best = f64::INFINITY;
    for &m in &rec.member_indices {
        for j in 0..inst.len() {
            if !members.contains(&j) {
                best = best.min(inst.dist(m, j));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::is_protected;
    use crate::stats::{chi_square_uniform_p, grid_counts};

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
    fn single_point_instance() {
        let inst = gen_uniform(1, 2, 0, Topology::Torus).unwrap();
        assert_eq!(inst.len(), 1);
        assert_eq!(inst.domain.t, 1.0);
    }

    #[test]
    fn generation_is_uniform_and_deterministic() {
        let a = gen_uniform(10_000, 2, 42, Topology::Torus).unwrap();
        assert_eq!(a.domain.t, 100.0);
        let p = chi_square_uniform_p(&grid_counts(&a.points, 100.0, 10));
        assert!(p > 0.01, "p = {p}");
        let b = gen_uniform(10_000, 2, 42, Topology::Torus).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn side_has_unit_density() {
        for (n, d) in [(7, 2), (1000, 3), (4096, 2), (12345, 2)] {
            let t = side_for(n, d);
            assert!((t.powi(d as i32) / n as f64 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn discretize_grid() {
        let inst = Instance::new(vec![Point::xy(0.1, 0.3), Point::xy(0.2, 0.6)], Domain::torus(2, 1.0));
        let out = discretize(&inst, 1).unwrap();
        for p in &out.instance.points {
            for c in &p.coords {
                assert!(*c == 0.0 || *c == 0.5);
            }
        }
        assert_eq!(out.duplicates, vec![(0, 1)]);
    }

    #[test]
    fn discretize_fine_grid_is_identity() {
        let inst = Instance::new(vec![Point::xy(0.25, 0.5), Point::xy(0.125, 0.75)], Domain::torus(2, 1.0));
        assert_eq!(discretize(&inst, 60).unwrap().instance.points, inst.points);
    }

    #[test]
    fn discretize_displacement_bound() {
        let inst = gen_uniform(2000, 2, 3, Topology::Cube).unwrap();
        for bits in [1, 4, 10, 20] {
            let out = discretize(&inst, bits).unwrap();
            let bound = inst.domain.t * 2f64.powi(-(bits as i32) - 1);
            for (a, b) in inst.points.iter().zip(&out.instance.points) {
                for (x, y) in a.coords.iter().zip(&b.coords) {
                    assert!((x - y).abs() <= bound * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn plant_into_empty_box() {
        let empty = Instance::new(vec![], Domain::torus(2, 20.0));
        let (out, rec) = plant(&empty, &triangle(), &Point::xy(10.0, 10.0), &PlantOptions::new("nn", 4.0)).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(rec.member_indices, vec![0, 1, 2]);
    }

    #[test]
    fn planted_gadget_is_protected() {
        let inst = gen_uniform(1600, 2, 5, Topology::Torus).unwrap();
        let center = Point::xy(20.0, 20.0);
        let (out, rec) = plant(&inst, &triangle(), &center, &PlantOptions::new("nn", 16.0)).unwrap();
        assert!(plant_isolation(&out, &rec) >= 16.0);
        // the annulus up to radius R is empty apart from the gadget once R ≤ clearance
        assert!(is_protected(&out.points, &triangle(), &center, 9.0, 1e-9, &out.domain).protected);
    }

    #[test]
    fn five_disjoint_plants_stay_isolated() {
        let mut inst = gen_uniform(2500, 2, 9, Topology::Torus).unwrap();
        let centers = [(5.0, 5.0), (25.0, 5.0), (5.0, 25.0), (25.0, 25.0), (40.0, 40.0)];
        for (k, (x, y)) in centers.iter().enumerate() {
            inst = plant(&inst, &triangle(), &Point::xy(*x, *y), &PlantOptions::new(&format!("c{k}"), 3.0)).unwrap().0;
        }
        assert_eq!(inst.plants.len(), 5);
        for rec in &inst.plants {
            assert!(plant_isolation(&inst, rec) >= 3.0);
            for (j, q) in rec.member_indices.iter().zip(triangle()) {
                let expect = inst.domain.wrap(rec.center.add(&q.coords));
                assert_eq!(inst.points[*j], expect);
            }
        }
    }

    #[test]
    fn overlapping_plant_is_rejected() {
        let inst = Instance::new(vec![], Domain::torus(2, 50.0));
        let (inst, _) = plant(&inst, &triangle(), &Point::xy(10.0, 10.0), &PlantOptions::new("a", 3.0)).unwrap();
        let err = plant(&inst, &triangle(), &Point::xy(12.0, 10.0), &PlantOptions::new("b", 3.0));
        assert!(matches!(err, Err(Error::GadgetOverflow(_))));
    }

    #[test]
    fn survivor_requirement() {
        let inst = gen_uniform(100, 2, 1, Topology::Torus).unwrap();
        let mut opts = PlantOptions::new("nn", 1.0);
        opts.min_survivors = 101;
        assert!(plant(&inst, &triangle(), &Point::xy(5.0, 5.0), &opts).is_err());
    }

    #[test]
    fn cube_overflow() {
        let inst = Instance::new(vec![], Domain::cube(2, 10.0));
        assert!(matches!(
            plant(&inst, &triangle(), &Point::xy(0.1, 5.0), &PlantOptions::new("nn", 1.0)),
            Err(Error::GadgetOverflow(_))
        ));
    }
}
