//! Experiments on heuristic tours: restriction to point sets, the hypotheses
//! of the scalefree implication, aligned-copy search, copy classification,
//! stability estimates, the perturbation chain and the set-cover decider.

mod calibrate;
mod chain;
mod classify;
mod copies;
mod decide;
mod records;
mod shortening;
mod stability;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angle, is_protected_at_scale, Frame, Point};
use crate::heuristics::{Heuristic, InsertionMode};
use crate::instance::Instance;
use crate::localsim::{simulate_greedy, simulate_insertion, simulate_nn, CandidatePaths};
use crate::tour::{normalize_path, PathSeq, Tour};

pub use calibrate::{
    calibrate_d0, calibrate_pi3, lemma1_counts, lemma1_trial, CalibrationReport, D0Config, Lemma1Trial, PassCount, Pi3Calibration,
};
pub use chain::{chain_radii, perturbation_chain, PerturbationChain, CHAIN_LEVELS};
pub use classify::{classify_copy, Classification, ClassifyConfig, CopyReport, STABILITY_THRESHOLD, STABILITY_TRIALS};
pub use copies::{colored_cell_centers, find_aligned_copies, AlignedCopy};
pub use decide::{decide_set_cover, delta0, DecideConfig, DecisionTranscript};
pub use records::{write_csv_summary, ExperimentRecord};
pub use shortening::{shortenable, ShortenMode, ShortenOutcome, EXACT_RUN_MAX};
pub use stability::{stability_trial, StabilityEstimate};

/// Maximal runs of a tour inside an index set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Restriction {
    pub runs: Vec<PathSeq>,
    /// The set covers the whole tour; the single run is the tour opened at
    /// its first position.
    pub full: bool,
}

impl Restriction {
    pub fn is_single_path(&self) -> bool {
        self.runs.len() == 1
    }

    /// Normalized runs, sorted; equal for tours that agree on the set up to
    /// reversal of each run.
    pub fn signature(&self) -> Vec<Vec<usize>> {
        let mut v: Vec<Vec<usize>> = self.runs.iter().map(PathSeq::normalized).collect();
        v.sort();
        v
    }
}

/// Splits the cyclic order of `tour` into maximal runs inside `s`.
pub fn restrict_tour(inst: &Instance, tour: &Tour, s: &[usize]) -> Result<Restriction> {
    let n = tour.len();
    let mut in_s = vec![false; inst.len()];
    for &i in s {
        if i >= inst.len() {
            return Err(Error::InvalidArgument(format!("index {i} outside the instance")));
        }
        in_s[i] = true;
    }
    let Some(start) = tour.order.iter().position(|&v| !in_s[v]) else {
        return Ok(Restriction { runs: vec![PathSeq::from_order(inst, tour.order.clone())], full: true });
    };
    let mut runs = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    for k in 1..=n {
        let v = tour.order[(start + k) % n];
        if in_s[v] {
            cur.push(v);
        } else if !cur.is_empty() {
            runs.push(PathSeq::from_order(inst, std::mem::take(&mut cur)));
        }
    }
    Ok(Restriction { runs, full: false })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    A,
    B,
    C,
    D,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Hypothesis::A => "a",
            Hypothesis::B => "b",
            Hypothesis::C => "c",
            Hypothesis::D => "d",
        };
        f.write_str(s)
    }
}

/// Scalefree hypothesis parameters, in the units of the gadget frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisParams {
    pub k: usize,
    pub r: f64,
    pub eps: f64,
    pub eps1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub failed: Option<Hypothesis>,
    /// `S = X ∩ B(p, scale)`.
    pub s: Vec<usize>,
    /// Annulus points `Y'`.
    pub y: Vec<usize>,
    /// The path `P_H` through `S ∪ Y'` when (c) was reached and holds.
    pub path: Option<PathSeq>,
    /// Outside tour neighbors of the endpoints of `P_H`.
    pub neighbors: Option<(usize, usize)>,
    pub angles: Option<(f64, f64)>,
}

impl HypothesisCheck {
    pub fn holds(&self) -> bool {
        self.failed.is_none()
    }

    /// `S ∪ Y'` in that order.
    pub fn members(&self) -> Vec<usize> {
        self.s.iter().chain(&self.y).copied().collect()
    }
}

/// Evaluates (a)–(d) in order for the copy of `y` placed by `frame`. Radii
/// are multiples of `frame.scale`; the reference direction of (d) is
/// `frame.axis`.
pub fn check_hypotheses(inst: &Instance, tour: &Tour, y: &[Point], frame: &Frame, hp: &HypothesisParams) -> HypothesisCheck {
    let dom = &inst.domain;
    let p = Point::xy(frame.origin[0], frame.origin[1]);
    let s: Vec<usize> = (0..inst.len()).filter(|&i| dom.dist(&inst.points[i], &p) <= frame.scale).collect();
    let mut out = HypothesisCheck { failed: None, s, y: Vec::new(), path: None, neighbors: None, angles: None };
    if out.s.is_empty() || out.s.iter().any(|&i| i < hp.k) {
        out.failed = Some(Hypothesis::A);
        return out;
    }

    // the gadget is matched in its own orientation, so rotate and mirror it first
    let local = Frame { origin: [0.0, 0.0], scale: 1.0, ..*frame };
    let oriented: Vec<Point> = y.iter().map(|q| local.apply(q)).collect();
    let prot = is_protected_at_scale(&inst.points, &oriented, &p, hp.r, hp.eps, frame.scale, dom);
    out.y = prot.annulus.clone();
    if !prot.protected {
        out.failed = Some(Hypothesis::B);
        return out;
    }

    let members = out.members();
    let restriction = match restrict_tour(inst, tour, &members) {
        Ok(r) => r,
        Err(_) => {
            out.failed = Some(Hypothesis::C);
            return out;
        }
    };
    if !restriction.is_single_path() || restriction.full {
        out.failed = Some(Hypothesis::C);
        return out;
    }
    let path = restriction.runs[0].clone();

    let n = tour.len();
    let pos = position_index(tour, inst.len());
    let (first, last) = path.endpoints();
    let before = |v: usize| tour.order[(pos[v] + n - 1) % n];
    let after = |v: usize| tour.order[(pos[v] + 1) % n];
    let in_path = |v: usize| members.contains(&v);
    let x = if in_path(before(first)) { after(first) } else { before(first) };
    let w = if in_path(after(last)) { before(last) } else { after(last) };
    let q = Point::xy(p.x() + frame.axis[0], p.y() + frame.axis[1]);
    let ax = angle(&inst.points[x], &p, &q, dom).unwrap_or(f64::INFINITY);
    let aw = angle(&inst.points[w], &p, &q, dom).unwrap_or(f64::INFINITY);
    out.path = Some(path);
    out.neighbors = Some((x, w));
    out.angles = Some((ax, aw));
    if !(ax < hp.eps1 && aw < hp.eps1) {
        out.failed = Some(Hypothesis::D);
    }
    out
}

/// Position of every vertex in the tour order.
pub(crate) fn position_index(tour: &Tour, n: usize) -> Vec<usize> {
    let mut pos = vec![usize::MAX; n];
    for (k, &v) in tour.order.iter().enumerate() {
        pos[v] = k;
    }
    pos
}

/// Local simulator output mapped back to instance indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub candidates: CandidatePaths,
    /// Instance index of every local point.
    pub members: Vec<usize>,
}

impl Prediction {
    /// Whether `path` (instance indices) is on the list, up to reversal.
    pub fn contains(&self, path: &[usize]) -> bool {
        let local: Option<Vec<usize>> =
            path.iter().map(|v| self.members.iter().position(|m| m == v)).collect();
        local.is_some_and(|l| self.candidates.contains(&normalize_path(&l)))
    }

    /// Candidate paths in instance indices.
    pub fn global_paths(&self) -> Vec<Vec<usize>> {
        self.candidates.paths.iter().map(|p| p.order.iter().map(|&i| self.members[i]).collect()).collect()
    }
}

/// Runs the local simulator of `h` on `s ∪ y` seen from `frame`: points are
/// moved to the unit frame and snapped to an efficient `eps/4`-rounding, and
/// choices within `eps` of the best fork.
pub fn predict_local(
    h: Heuristic,
    inst: &Instance,
    s: &[usize],
    y: &[usize],
    frame: &Frame,
    eps: f64,
    cap: u32,
) -> Result<Prediction> {
    let members: Vec<usize> = s.iter().chain(y).copied().collect();
    let p = Point::xy(frame.origin[0], frame.origin[1]);
    let grid = 2f64.powi((eps / 4.0).log2().floor() as i32);
    let local: Vec<Point> = members
        .iter()
        .map(|&i| {
            let v = inst.domain.displacement(&p, &inst.points[i]);
            let snap = |c: f64| (c / frame.scale / grid).round() * grid;
            Point::xy(snap(v[0]), snap(v[1]))
        })
        .collect();
    let y_local: Vec<usize> = (s.len()..members.len()).collect();
    let candidates = match h {
        Heuristic::NearestNeighbor => simulate_nn(&local, &y_local, eps, cap)?,
        Heuristic::Greedy => simulate_greedy(&local, eps, cap)?,
        Heuristic::NearestInsertion => simulate_insertion(&local, &y_local, eps, cap, InsertionMode::Nearest)?,
        Heuristic::FarthestInsertion => simulate_insertion(&local, &y_local, eps, cap, InsertionMode::Farthest)?,
        Heuristic::Karp => return Err(Error::Unsupported("karp dissection has no local simulator".into())),
    };
    Ok(Prediction { candidates, members })
}

/// Seed for an independent stream derived from a master seed and a tag.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = master ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
