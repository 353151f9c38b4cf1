//! Tour-construction heuristics.
//!
//! All selection steps compare distances after cutting them off at the
//! instance precision (see [`DistKeys`]), and break ties by index order.
//! Edge constraints are handled uniformly: forced edges are contracted into
//! segments, forbidden edges are never selected, and a heuristic that runs out
//! of admissible choices reports [`Error::Infeasible`].

mod constraints;
mod greedy;
mod insertion;
pub mod karp;
mod nearest_neighbor;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::tour::Tour;

pub use constraints::{EdgeConstraints, Segments};
pub(crate) use constraints::completable;
pub use greedy::greedy_constrained;
pub use insertion::{insertion_constrained, InsertionMode};
pub use karp::{karp_dissection, karp_dissection_report, KarpConfig, KarpReport, LogBase};
pub use nearest_neighbor::nearest_neighbor_constrained;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    #[serde(rename = "nn")]
    NearestNeighbor,
    Greedy,
    #[serde(rename = "ni")]
    NearestInsertion,
    #[serde(rename = "fi")]
    FarthestInsertion,
    Karp,
}

impl Heuristic {
    pub const ALL: [Heuristic; 5] = [
        Heuristic::NearestNeighbor,
        Heuristic::Greedy,
        Heuristic::NearestInsertion,
        Heuristic::FarthestInsertion,
        Heuristic::Karp,
    ];

    /// The heuristics with a local simulator.
    pub const SCALEFREE: [Heuristic; 4] = [
        Heuristic::NearestNeighbor,
        Heuristic::Greedy,
        Heuristic::NearestInsertion,
        Heuristic::FarthestInsertion,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Heuristic::NearestNeighbor => "nn",
            Heuristic::Greedy => "greedy",
            Heuristic::NearestInsertion => "ni",
            Heuristic::FarthestInsertion => "fi",
            Heuristic::Karp => "karp",
        }
    }
}

impl std::fmt::Display for Heuristic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Heuristic::ALL
            .iter()
            .copied()
            .find(|h| h.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown heuristic `{s}`")))
    }
}

/// Distances cut off at the instance precision: `round(d / (t·2^-bits))`.
#[derive(Clone, Copy, Debug)]
pub struct DistKeys {
    unit: f64,
}

impl DistKeys {
    pub fn for_instance(inst: &Instance) -> Self {
        let bits = inst.precision_bits.min(52) as i32;
        DistKeys { unit: inst.domain.t * 2f64.powi(-bits) }
    }

    #[inline]
    pub fn key(&self, d: f64) -> i64 {
        (d / self.unit).round() as i64
    }
}

/// Runs `h` without constraints.
pub fn run(h: Heuristic, inst: &Instance) -> Result<Tour> {
    if h == Heuristic::Karp {
        return karp_dissection(inst);
    }
    run_constrained(h, inst, &EdgeConstraints::new())
}

/// Runs `h` honoring forced and forbidden edges.
pub fn run_constrained(h: Heuristic, inst: &Instance, cons: &EdgeConstraints) -> Result<Tour> {
    if inst.is_empty() {
        return Err(Error::InvalidArgument("empty instance".into()));
    }
    let tour = match h {
        Heuristic::NearestNeighbor => nearest_neighbor_constrained(inst, cons)?,
        Heuristic::Greedy => greedy_constrained(inst, cons)?,
        Heuristic::NearestInsertion => insertion_constrained(inst, cons, InsertionMode::Nearest)?,
        Heuristic::FarthestInsertion => insertion_constrained(inst, cons, InsertionMode::Farthest)?,
        Heuristic::Karp => {
            if !cons.is_empty() {
                return Err(Error::Unsupported("karp dissection does not take edge constraints".into()));
            }
            karp_dissection(inst)?
        }
    };
    debug_assert!(cons.forced.iter().all(|e| tour.edges().contains(e)));
    Ok(tour)
}

pub fn nearest_neighbor(inst: &Instance) -> Result<Tour> {
    run(Heuristic::NearestNeighbor, inst)
}

pub fn greedy(inst: &Instance) -> Result<Tour> {
    run(Heuristic::Greedy, inst)
}

pub fn nearest_insertion(inst: &Instance) -> Result<Tour> {
    run(Heuristic::NearestInsertion, inst)
}

pub fn farthest_insertion(inst: &Instance) -> Result<Tour> {
    run(Heuristic::FarthestInsertion, inst)
}

/// Tours on at most two points, which every heuristic shares.
fn trivial_tour(inst: &Instance, cons: &EdgeConstraints) -> Option<Result<Tour>> {
    match inst.len() {
        1 => Some(Ok(Tour::from_order(inst, vec![0]))),
        2 if !cons.allows(0, 1) => Some(Err(Error::Infeasible("the only edge is forbidden".into()))),
        2 => Some(Ok(Tour::from_order(inst, vec![0, 1]))),
        _ => None,
    }
}

/// Rotates a cycle so it starts at vertex 0.
fn rotate_to_zero(mut order: Vec<usize>) -> Vec<usize> {
    if let Some(p) = order.iter().position(|&v| v == 0) {
        order.rotate_left(p);
    }
    order
}
