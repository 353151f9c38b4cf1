use serde::{Deserialize, Serialize};

use super::{check_hypotheses, derive_seed, predict_local, restrict_tour, shortenable, stability_trial, Hypothesis, HypothesisCheck, HypothesisParams};
use crate::error::{Error, Result};
use crate::gadgets::{diameter, Gadget, DEFAULT_EPS1, DEFAULT_K, DEFAULT_R};
use crate::geometry::{Frame, Matching, Point};
use crate::heuristics::Heuristic;
use crate::instance::Instance;
use crate::localsim::DEFAULT_CAP;
use crate::tour::Tour;

/// Verdict threshold for (ii).
pub const STABILITY_THRESHOLD: f64 = 0.9;
pub const STABILITY_TRIALS: usize = 400;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "detail")]
pub enum Classification {
    /// (i): the path is on the local simulator's list.
    Predicted,
    /// (ii): perturbing the copy changes the path with frequency at least
    /// [`STABILITY_THRESHOLD`].
    Unstable,
    /// (iii): the path can be shortened by `δ₁`.
    Shortened,
    /// No `Π_H` block is transited in one path, or no `M_H` copy meets the
    /// hypotheses; names the furthest hypothesis reached.
    HypothesisFailed(String),
    /// The hypotheses hold but none of (i)–(iii) was observed.
    Unexplained,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopyReport {
    pub center: Point,
    pub matching: Option<Matching>,
    pub classification: Classification,
    /// Present iff the classification is `Shortened`.
    pub shortening_gain: Option<f64>,
    pub stability_freq: Option<f64>,
    /// Name of the `Π_H` block transited in one path.
    pub pi_block: Option<String>,
    /// Name of the primal `M_H` copy.
    pub primal: Option<String>,
    pub hypotheses: Option<HypothesisCheck>,
    pub candidate_count: usize,
    pub cap_exceeded: bool,
    pub delta1: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub k: usize,
    /// `R`; `None` reads `R_protect` (or `R`) from the gadget.
    pub r: Option<f64>,
    /// Matching tolerance of (b), in gadget units.
    pub eps: f64,
    pub eps1: f64,
    /// `None` takes 1% of the primal copy's diameter.
    pub delta1: Option<f64>,
    /// Fork tolerance of the local simulator, in gadget units.
    pub sim_eps: f64,
    pub cap: u32,
    pub trials: usize,
    /// Perturbation radius in gadget units; `None` takes `K·d·eps`.
    pub stability_delta: Option<f64>,
    pub seed: u64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            k: DEFAULT_K,
            r: None,
            eps: 1e-6,
            eps1: DEFAULT_EPS1,
            delta1: None,
            sim_eps: 1e-9,
            cap: DEFAULT_CAP,
            trials: STABILITY_TRIALS,
            stability_delta: None,
            seed: 0,
        }
    }
}

fn stage(h: Hypothesis) -> u8 {
    match h {
        Hypothesis::A => 0,
        Hypothesis::B => 1,
        Hypothesis::C => 2,
        Hypothesis::D => 3,
    }
}

/// Classifies one planted `Π³_H` (or `Π_H`) copy. `members[j]` is the
/// instance index of gadget point `j`; `placement` maps gadget coordinates
/// to the instance.
pub fn classify_copy(
    inst: &Instance,
    tour: &Tour,
    h: Heuristic,
    gadget: &Gadget,
    members: &[usize],
    placement: &Frame,
    cfg: &ClassifyConfig,
) -> Result<CopyReport> {
    if members.len() != gadget.len() {
        return Err(Error::InvalidArgument(format!("{} members for a {}-point gadget", members.len(), gadget.len())));
    }
    let center = Point::xy(placement.origin[0], placement.origin[1]);
    let tag = center.coords.iter().fold(0u64, |acc, c| acc.rotate_left(17) ^ c.to_bits());
    let seed = derive_seed(cfg.seed, tag);
    let mut report = CopyReport {
        center,
        matching: None,
        classification: Classification::Unexplained,
        shortening_gain: None,
        stability_freq: None,
        pi_block: None,
        primal: None,
        hypotheses: None,
        candidate_count: 0,
        cap_exceeded: false,
        delta1: None,
    };
    let idx = |a: usize, b: usize| members[a..b].to_vec();

    let mut blocks: Vec<String> = gadget.ranges.keys().filter(|k| k.starts_with("Pi") && !k.contains('.')).cloned().collect();
    if blocks.is_empty() && gadget.kind == "piH" {
        blocks.push(String::new());
    }
    let mut transited = None;
    for b in &blocks {
        let (lo, hi) = if b.is_empty() { (0, gadget.len()) } else { gadget.range(b)? };
        if restrict_tour(inst, tour, &idx(lo, hi))?.is_single_path() {
            transited = Some(b.clone());
            break;
        }
    }
    let z: Vec<usize> = members.to_vec();
    let whole_delta1 = 0.01 * diameter(&z.iter().map(|&i| inst.points[i].clone()).collect::<Vec<_>>());
    let fallback = |report: &mut CopyReport, why: String| -> Result<()> {
        let d1 = cfg.delta1.unwrap_or(whole_delta1);
        report.delta1 = Some(d1);
        let out = shortenable(inst, tour, &z, d1)?;
        if out.succeeded() {
            report.classification = Classification::Shortened;
            report.shortening_gain = Some(out.gain);
        } else {
            report.classification = Classification::HypothesisFailed(why);
        }
        Ok(())
    };
    let Some(block) = transited else {
        fallback(&mut report, "single_pass".into())?;
        return Ok(report);
    };
    report.pi_block = Some(if block.is_empty() { "piH".into() } else { block.clone() });

    let prefix = if block.is_empty() { String::new() } else { format!("{block}.") };
    let r = match cfg.r {
        Some(r) => r,
        None => gadget.protection_radius().unwrap_or(DEFAULT_R),
    };
    let hp = HypothesisParams { k: cfg.k, r, eps: cfg.eps, eps1: cfg.eps1 };
    let mut furthest: Option<Hypothesis> = None;
    let mut primal = None;
    for j in 1..=4 {
        let name = format!("{prefix}M{j}");
        let frame = placement.compose(&gadget.frame(&name));
        let (ya, yb) = gadget.range(&format!("{name}.Y"))?;
        let y_local: Vec<Point> = gadget.points[ya..yb].iter().map(|p| gadget.frame(&name).unapply(p)).collect();
        let check = check_hypotheses(inst, tour, &y_local, &frame, &hp);
        match check.failed {
            None => {
                primal = Some((name, frame, check));
                break;
            }
            Some(f) => {
                if furthest.is_none_or(|g| stage(f) > stage(g)) {
                    furthest = Some(f);
                }
            }
        }
    }
    let Some((name, frame, check)) = primal else {
        let which = furthest.map(|f| f.to_string()).unwrap_or_else(|| "a".into());
        fallback(&mut report, which)?;
        return Ok(report);
    };
    report.primal = Some(name);

    let primal_members = check.members();
    let path = check.path.clone().expect("path present when hypotheses hold");
    let primal_pts: Vec<Point> = primal_members.iter().map(|&i| inst.points[i].clone()).collect();
    let d1 = cfg.delta1.unwrap_or(0.01 * diameter(&primal_pts));
    report.delta1 = Some(d1);

    let short = shortenable(inst, tour, &primal_members, d1)?;
    let prediction = predict_local(h, inst, &check.s, &check.y, &frame, cfg.sim_eps, cfg.cap)?;
    report.candidate_count = prediction.candidates.len();
    report.cap_exceeded = prediction.candidates.cap_exceeded;
    let predicted = prediction.contains(&path.order);
    report.hypotheses = Some(check.clone());

    if short.succeeded() {
        report.classification = Classification::Shortened;
        report.shortening_gain = Some(short.gain);
        return Ok(report);
    }
    if predicted {
        report.classification = Classification::Predicted;
        return Ok(report);
    }
    let delta = cfg.stability_delta.unwrap_or(cfg.k as f64 * inst.domain.d as f64 * cfg.eps) * frame.scale;
    let est = stability_trial(inst, h, &check.s, &check.y, delta, cfg.trials, seed)?;
    report.stability_freq = Some(est.frequency);
    report.classification =
        if est.frequency >= STABILITY_THRESHOLD { Classification::Unstable } else { Classification::Unexplained };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{default_m, pi_h, toy_provider, ToyVariant, DEFAULT_EPS_PI};
    use crate::heuristics::run;

    #[test]
    fn planted_pi_h_gets_exactly_one_class() {
        let provider = toy_provider(ToyVariant::Yes).unwrap();
        for h in [Heuristic::NearestNeighbor, Heuristic::Greedy] {
            let m = default_m(h, &provider).unwrap();
            let g = pi_h(6, DEFAULT_EPS_PI, &m).unwrap();
            let shift = Frame::translation(10.0, 10.0);
            let placed = g.transformed(&shift);
            let inst = Instance::planar(placed.points.clone());
            let tour = run(h, &inst).unwrap();
            let members: Vec<usize> = (0..g.len()).collect();
            let cfg = ClassifyConfig { trials: 20, ..ClassifyConfig::default() };
            let rep = classify_copy(&inst, &tour, h, &g, &members, &shift, &cfg).unwrap();
            assert_eq!(rep.shortening_gain.is_some(), rep.classification == Classification::Shortened);
            assert_eq!(rep.center, Point::xy(10.0, 10.0));
        }
    }

    #[test]
    fn member_count_must_match() {
        let provider = toy_provider(ToyVariant::Yes).unwrap();
        let m = default_m(Heuristic::Greedy, &provider).unwrap();
        let g = pi_h(6, DEFAULT_EPS_PI, &m).unwrap();
        let inst = Instance::planar(g.points.clone());
        let tour = run(Heuristic::Greedy, &inst).unwrap();
        let r = classify_copy(&inst, &tour, Heuristic::Greedy, &g, &[0, 1], &Frame::default(), &ClassifyConfig::default());
        assert!(r.is_err());
    }
}
