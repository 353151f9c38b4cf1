use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gadgets::{heuristic_gadget, m_set, q_set, HardCoreProvider, QConfig};
use crate::geometry::Point;
use crate::heuristics::{Heuristic, InsertionMode};
use crate::localsim::{simulate_greedy, simulate_insertion, simulate_nn, DEFAULT_CAP};
use crate::tour::sequence_length;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecideConfig {
    pub q: QConfig,
    /// `D₀` entering the rounding precision `δ₀`.
    pub d0: f64,
    /// Fork tolerance of the simulator, in `M_H` units.
    pub sim_eps: f64,
    pub cap: u32,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig { q: QConfig::default(), d0: 10.0, sim_eps: 1e-9, cap: DEFAULT_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTranscript {
    pub heuristic: Heuristic,
    pub delta0: f64,
    /// Grid spacing of the rounded `M_H`.
    pub grid: f64,
    pub m_points: Vec<Point>,
    /// Candidate paths over `M_H` indices.
    pub candidates: Vec<Vec<usize>>,
    pub cap_exceeded: bool,
    /// Per candidate, the shortest contiguous stretch covering the provider
    /// points, in provider units.
    pub windows: Vec<f64>,
    pub l_prime: Option<f64>,
    pub threshold: f64,
    pub eps0: f64,
    /// `TRUE` iff `L′ < cut = L + ε₀/2`.
    pub cut: f64,
    pub answer: bool,
    pub empty_list: bool,
}

/// `δ₀ = α·ε₀/(10⁴·C₀·D₀·k)`.
pub fn delta0(alpha: f64, eps0: f64, c0: f64, d0: f64, k: usize) -> f64 {
    alpha * eps0 / (1e4 * c0 * d0 * k as f64)
}

/// Runs the four-step reduction: round `M_H`, list the heuristic's local
/// paths, measure the cheapest stretch through the provider points, compare
/// with the threshold.
pub fn decide_set_cover(provider: &HardCoreProvider, h: Heuristic, cfg: &DecideConfig) -> Result<DecisionTranscript> {
    let q = q_set(provider, &cfg.q)?;
    let m = m_set(&heuristic_gadget(h)?, None, &q)?;
    let k = provider.len();
    let alpha = m.param("alpha").expect("m_set records alpha");
    let d0 = delta0(alpha, provider.eps0, cfg.q.c0, cfg.d0, k);
    let grid = 2f64.powi((d0 / 4.0).log2().floor() as i32);
    let snap = |c: f64| (c / grid).round() * grid;
    let pts: Vec<Point> = m.points.iter().map(|p| Point::xy(snap(p.x()), snap(p.y()))).collect();

    let (ya, yb) = m.range("Y")?;
    let y: Vec<usize> = (ya..yb).collect();
    let list = match h {
        Heuristic::NearestNeighbor => simulate_nn(&pts, &y, cfg.sim_eps, cfg.cap)?,
        Heuristic::Greedy => simulate_greedy(&pts, cfg.sim_eps, cfg.cap)?,
        Heuristic::NearestInsertion => simulate_insertion(&pts, &y, cfg.sim_eps, cfg.cap, InsertionMode::Nearest)?,
        Heuristic::FarthestInsertion => simulate_insertion(&pts, &y, cfg.sim_eps, cfg.cap, InsertionMode::Farthest)?,
        Heuristic::Karp => return Err(Error::Unsupported("karp dissection has no local simulator".into())),
    };

    let (pa, pb) = m.range("Q.P")?;
    let p_scale = alpha * q.param("scale").expect("q_set records scale");
    let inst = crate::instance::Instance::planar(pts.clone());
    let mut windows = Vec::with_capacity(list.len());
    for path in &list.paths {
        let pos: Vec<usize> =
            path.order.iter().enumerate().filter(|(_, &v)| v >= pa && v < pb).map(|(i, _)| i).collect();
        let (lo, hi) = (pos[0], *pos.last().expect("provider points on every path"));
        windows.push(sequence_length(&inst, &path.order[lo..=hi], false) / p_scale);
    }
    let l_prime = windows.iter().copied().reduce(f64::min);
    let cut = provider.threshold + provider.eps0 / 2.0;
    Ok(DecisionTranscript {
        heuristic: h,
        delta0: d0,
        grid,
        m_points: pts,
        candidates: list.paths.iter().map(|p| p.order.clone()).collect(),
        cap_exceeded: list.cap_exceeded,
        windows,
        l_prime,
        threshold: provider.threshold,
        eps0: provider.eps0,
        cut,
        answer: l_prime.is_some_and(|l| l < cut),
        empty_list: list.is_empty(),
    })
}
