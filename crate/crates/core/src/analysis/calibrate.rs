use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, restrict_tour};
use crate::error::{Error, Result};
use crate::exact::{held_karp_path, PathEnds};
use crate::gadgets::{pi_set, pi_h_3, Gadget, Pi3Orientation, QConfig};
use crate::gadgets::{q_set, HardCoreProvider};
use crate::geometry::{perturb, Point};
use crate::instance::Instance;
use crate::tour::{sequence_length, Tour};

const TOL: f64 = 1e-9;

/// Outcome of one Lemma 1 placement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Trial {
    /// `W ∖ {w, z}` has endpoint pair `{x, y}`.
    pub endpoints_xy: bool,
    /// `W` visits the provider points in one optimal stretch from `p` to `q`.
    pub transits_optimally: bool,
}

/// The point `r·(cos θ, sin θ)` with the smallest `r ≥ 0` such that every
/// point further out on the ray stays at distance `≥ d` from `pts`.
fn ray_at_distance(pts: &[Point], theta: f64, d: f64) -> Point {
    let (uy, ux) = theta.sin_cos();
    let mut r: f64 = 0.0;
    for p in pts {
        let along = ux * p.x() + uy * p.y();
        let across2 = p.x() * p.x() + p.y() * p.y() - along * along;
        let disc = d * d - across2;
        if disc >= 0.0 {
            r = r.max(along + disc.sqrt());
        }
    }
    Point::xy(r * ux, r * uy)
}

/// Shortest `w → z` path through `Q ∪ {w, z}`, with `Q` perturbed by
/// `δ = λε₀/(10C₀k)` and `w`, `z` on rays in the directions `theta_w`,
/// `theta_z` at distance `d` from `Q`.
pub fn lemma1_trial(q: &Gadget, d: f64, theta_w: f64, theta_z: f64, rng: &mut impl Rng) -> Result<Lemma1Trial> {
    let lambda = q.param("lambda").unwrap_or(QConfig::default().lambda);
    let c0 = q.param("C0").unwrap_or(QConfig::default().c0);
    let eps0 = q.param("eps0").ok_or_else(|| Error::InvalidArgument("Q lacks eps0".into()))?;
    let k = q.param("k").ok_or_else(|| Error::InvalidArgument("Q lacks k".into()))?;
    let delta = lambda * eps0 / (10.0 * c0 * k) * q.param("scale").unwrap_or(1.0);
    let plane = crate::geometry::Domain::plane();
    let mut pts = perturb(&q.points, delta, rng, &plane);
    let (w, z) = (ray_at_distance(&pts, theta_w, d), ray_at_distance(&pts, theta_z, d));
    let (wi, zi) = (pts.len(), pts.len() + 1);
    pts.push(w);
    pts.push(z);
    let inst = Instance::planar(pts);
    let path = held_karp_path(&inst, PathEnds::Fixed(wi, zi))?;
    let inner = &path.order[1..path.order.len() - 1];
    let (x, y) = (q.mark("x")?, q.mark("y")?);
    let ends = (inner[0].min(inner[inner.len() - 1]), inner[0].max(inner[inner.len() - 1]));
    let endpoints_xy = ends == (x.min(y), x.max(y));

    let (pa, pb) = q.range("P")?;
    let p_idx: Vec<usize> = (pa..pb).collect();
    let closed = Tour::from_order(&inst, path.order.clone());
    let runs = restrict_tour(&inst, &closed, &p_idx)?;
    let transits_optimally = runs.is_single_path() && {
        let run = &runs.runs[0];
        let sub = inst.subset(&p_idx);
        let (p, qq) = (q.mark("p")? - pa, q.mark("q")? - pa);
        let best = held_karp_path(&sub, PathEnds::Fixed(p, qq))?.length;
        let (a, b) = run.endpoints();
        let ends_pq = (a.min(b), a.max(b)) == (p.min(qq) + pa, p.max(qq) + pa);
        ends_pq && (sequence_length(&inst, &run.order, false) - best).abs() <= TOL * best.max(1.0)
    };
    Ok(Lemma1Trial { endpoints_xy, transits_optimally })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct D0Config {
    pub trials: usize,
    pub required: usize,
    pub grid: Vec<f64>,
    pub bisection_steps: usize,
    pub seed: u64,
}

impl Default for D0Config {
    fn default() -> Self {
        D0Config {
            trials: 100,
            required: 99,
            grid: vec![1e-4, 3e-4, 1e-3, 3e-3, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0],
            bisection_steps: 6,
            seed: 0,
        }
    }
}

/// Pass counts at one distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassCount {
    pub distance: f64,
    pub endpoints_xy: usize,
    pub transits_optimally: usize,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    /// Smallest distance found with at least `required` endpoint passes at it
    /// and at every larger grid distance.
    pub d0_emp: Option<f64>,
    pub counts: Vec<PassCount>,
    pub required: usize,
}

/// Placements share random streams across distances: trial `i` uses the same
/// directions and the same perturbation of `Q` at every distance.
pub fn lemma1_counts(q: &Gadget, d: f64, trials: usize, seed: u64) -> Result<PassCount> {
    let out: Vec<Result<Lemma1Trial>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let tw = rng.gen_range(0.0..std::f64::consts::TAU);
            let tz = rng.gen_range(0.0..std::f64::consts::TAU);
            lemma1_trial(q, d, tw, tz, &mut rng)
        })
        .collect();
    let mut c = PassCount { distance: d, endpoints_xy: 0, transits_optimally: 0, trials };
    for t in out {
        let t = t?;
        c.endpoints_xy += t.endpoints_xy as usize;
        c.transits_optimally += t.transits_optimally as usize;
    }
    Ok(c)
}

/// Empirical `D₀` in the units of `Q` (`x`, `y` at distance 2): a grid scan,
/// then bisection below the first grid value from which every larger grid
/// value passes.
pub fn calibrate_d0(provider: &HardCoreProvider, cfg: &D0Config) -> Result<CalibrationReport> {
    let q = q_set(provider, &QConfig::default())?;
    let mut counts = Vec::new();
    for &d in &cfg.grid {
        counts.push(lemma1_counts(&q, d, cfg.trials, cfg.seed)?);
    }
    let ok = |c: &PassCount| c.endpoints_xy >= cfg.required;
    let first = (0..counts.len()).find(|&i| counts[i..].iter().all(ok));
    let Some(i) = first else {
        return Ok(CalibrationReport { d0_emp: None, counts, required: cfg.required });
    };
    let mut hi = counts[i].distance;
    if i > 0 {
        let mut lo = counts[i - 1].distance;
        for _ in 0..cfg.bisection_steps {
            let mid = 0.5 * (lo + hi);
            let c = lemma1_counts(&q, mid, cfg.trials, cfg.seed)?;
            if ok(&c) {
                hi = mid;
            } else {
                lo = mid;
            }
            counts.push(c);
        }
    }
    counts.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    Ok(CalibrationReport { d0_emp: Some(hi), counts, required: cfg.required })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pi3Calibration {
    /// `(D₁, passes)`: optimal `w → z` paths through `Π³` of `Π(k)` that
    /// transit some `Π(k)` block in one run.
    pub counts: Vec<(f64, usize)>,
    pub trials: usize,
    /// Smallest tested `D₁` from which every larger one passes in all trials.
    pub d1_emp: Option<f64>,
    /// Distance of `w`, `z` from the set, as a multiple of `D₁`.
    pub d2_factor: f64,
}

/// Lemma 4 analogue on `Π³` of the bare `Π(k)` (each `πᵢ` a single point):
/// random `w`, `z` at distance `d2_factor·D₁`, optimal path between them,
/// and a check that some block is transited in one run.
pub fn calibrate_pi3(k: usize, d1_grid: &[f64], d2_factor: f64, trials: usize, seed: u64) -> Result<Pi3Calibration> {
    let pi = pi_set(k)?;
    let mut counts = Vec::new();
    for &d1 in d1_grid {
        let g = pi_h_3(&pi, d1, Pi3Orientation::Inward)?;
        if g.len() + 2 > crate::exact::DEFAULT_N_MAX {
            return Err(Error::TooLarge { n: g.len() + 2, limit: crate::exact::DEFAULT_N_MAX });
        }
        let reach = g.radius();
        let passes: Vec<Result<bool>> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
                let mut pts = g.points.clone();
                for _ in 0..2 {
                    let th = rng.gen_range(0.0..std::f64::consts::TAU);
                    let r = reach + d2_factor * d1;
                    pts.push(Point::xy(r * th.cos(), r * th.sin()));
                }
                let n = pts.len();
                let inst = Instance::planar(pts);
                let path = held_karp_path(&inst, PathEnds::Fixed(n - 2, n - 1))?;
                let closed = Tour::from_order(&inst, path.order);
                for b in 1..=3 {
                    let (lo, hi) = g.range(&format!("Pi{b}"))?;
                    let idx: Vec<usize> = (lo..hi).collect();
                    if restrict_tour(&inst, &closed, &idx)?.is_single_path() {
                        return Ok(true);
                    }
                }
                Ok(false)
            })
            .collect();
        let mut c = 0;
        for p in passes {
            c += p? as usize;
        }
        counts.push((d1, c));
    }
    let first = (0..counts.len()).find(|&i| counts[i..].iter().all(|&(_, c)| c == trials));
    Ok(Pi3Calibration { d1_emp: first.map(|i| counts[i].0), counts, trials, d2_factor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{toy_provider, ToyVariant};

    #[test]
    fn ray_point_sits_at_the_distance() {
        let pts = vec![Point::xy(0.0, 0.0), Point::xy(1.0, 0.0), Point::xy(0.5, 0.2)];
        for th in [0.0, 0.7, 1.6, 3.0, 4.5] {
            let w = ray_at_distance(&pts, th, 0.3);
            let dmin = pts.iter().map(|p| (p.x() - w.x()).hypot(p.y() - w.y())).fold(f64::INFINITY, f64::min);
            assert!((dmin - 0.3).abs() < 1e-12, "{th}: {dmin}");
        }
    }

    #[test]
    fn opposite_far_points_give_xy() {
        let q = q_set(&toy_provider(ToyVariant::Yes).unwrap(), &QConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = lemma1_trial(&q, 20.0, std::f64::consts::PI, 0.0, &mut rng).unwrap();
        assert!(t.endpoints_xy && t.transits_optimally);
    }

    #[test]
    fn pass_rate_grows_with_distance() {
        let q = q_set(&toy_provider(ToyVariant::Yes).unwrap(), &QConfig::default()).unwrap();
        let near = lemma1_counts(&q, 1e-4, 60, 2).unwrap();
        let far = lemma1_counts(&q, 1.0, 60, 2).unwrap();
        assert!(near.endpoints_xy < 60);
        assert!(far.transits_optimally >= near.transits_optimally);
        assert!(far.endpoints_xy >= near.endpoints_xy);
    }

    #[test]
    fn pi3_small_grid_runs() {
        let c = calibrate_pi3(1, &[6.0], 1.0, 4, 3).unwrap();
        assert_eq!(c.counts.len(), 1);
        assert!(c.counts[0].1 <= 4);
    }
}
