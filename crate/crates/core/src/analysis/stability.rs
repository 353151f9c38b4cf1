use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, restrict_tour};
use crate::error::{Error, Result};
use crate::geometry::uniform_in_ball;
use crate::heuristics::{run, Heuristic};
use crate::instance::Instance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    pub trials: usize,
    /// Trials whose restriction to `S ∪ Y` differs from the unperturbed one.
    pub changed: usize,
    pub frequency: f64,
}

/// Monte Carlo frequency with which perturbing the points of `s ∪ y`
/// independently in balls of radius `delta` changes the path the heuristic
/// takes through them. Trial `i` draws from its own stream, so the result
/// does not depend on scheduling.
pub fn stability_trial(
    inst: &Instance,
    h: Heuristic,
    s: &[usize],
    y: &[usize],
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<StabilityEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let members: Vec<usize> = s.iter().chain(y).copied().collect();
    let base = restrict_tour(inst, &run(h, inst)?, &members)?.signature();
    if delta == 0.0 {
        return Ok(StabilityEstimate { trials, changed: 0, frequency: 0.0 });
    }
    let outcomes: Vec<Result<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
            let moved: Vec<_> = members
                .iter()
                .map(|&i| {
                    let v = uniform_in_ball(inst.domain.d, delta, &mut rng);
                    (i, inst.domain.translate(&inst.points[i], &v))
                })
                .collect();
            let pert = inst.with_points_replaced(&moved);
            let sig = restrict_tour(&pert, &run(h, &pert)?, &members)?.signature();
            Ok(sig != base)
        })
        .collect();
    let mut changed = 0;
    for o in outcomes {
        if o? {
            changed += 1;
        }
    }
    Ok(StabilityEstimate { trials, changed, frequency: changed as f64 / trials as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn far_pair() -> Instance {
        let mut pts: Vec<Point> = (0..6).map(|i| Point::xy(10.0 * i as f64, 0.0)).collect();
        pts.extend([Point::xy(20.0, 3.0), Point::xy(21.0, 3.0)]);
        Instance::planar(pts)
    }

    #[test]
    fn zero_delta_never_changes() {
        let inst = far_pair();
        let e = stability_trial(&inst, Heuristic::Greedy, &[6], &[7], 0.0, 10, 1).unwrap();
        assert_eq!(e.frequency, 0.0);
    }

    #[test]
    fn well_separated_is_stable() {
        let inst = far_pair();
        let e = stability_trial(&inst, Heuristic::NearestNeighbor, &[6], &[7], 1e-4, 50, 2).unwrap();
        assert_eq!(e.changed, 0);
    }

    #[test]
    fn exact_tie_splits_evenly() {
        // NN from the origin sees (1, 1) and (1, −1) at the same distance, and
        // the first one visited decides the order of the pair
        let pts = vec![Point::xy(0.0, 0.0), Point::xy(1.0, 1.0), Point::xy(1.0, -1.0), Point::xy(-3.0, 0.0)];
        let inst = Instance::planar(pts);
        let e = stability_trial(&inst, Heuristic::NearestNeighbor, &[0, 1, 2], &[], 1e-3, 400, 3).unwrap();
        let sigma = (0.25f64 / 400.0).sqrt();
        assert!((e.frequency - 0.5).abs() < 3.0 * sigma, "{}", e.frequency);
    }

    #[test]
    fn schedule_independent() {
        let pts = vec![Point::xy(0.0, 0.0), Point::xy(1.0, 1.0), Point::xy(1.0, -1.0), Point::xy(-3.0, 0.0)];
        let inst = Instance::planar(pts);
        let a = stability_trial(&inst, Heuristic::NearestNeighbor, &[0, 1, 2], &[], 1e-3, 64, 9).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| stability_trial(&inst, Heuristic::NearestNeighbor, &[0, 1, 2], &[], 1e-3, 64, 9).unwrap());
        assert_eq!(a, b);
    }
}
