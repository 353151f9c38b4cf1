use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::perturb;
use crate::instance::Instance;

pub const CHAIN_LEVELS: usize = 13;

/// `ε^(k) = eps2/(Kd+1)^{k−1}` for `k = 1..=13`, index `k − 1`.
pub fn chain_radii(eps2: f64, k: usize, d: usize) -> [f64; CHAIN_LEVELS] {
    let base = (k * d + 1) as f64;
    let mut out = [0.0; CHAIN_LEVELS];
    for (j, r) in out.iter_mut().enumerate() {
        *r = eps2 / base.powi(j as i32);
    }
    out
}

#[derive(Clone, Debug)]
pub struct PerturbationChain {
    pub radii: [f64; CHAIN_LEVELS],
    /// `levels[k − 1]` is `X^k`; `levels[12]` is the input.
    pub levels: Vec<Instance>,
}

impl PerturbationChain {
    pub fn level(&self, k: usize) -> &Instance {
        &self.levels[k - 1]
    }
}

/// `X^13 = X`, and `X^{k−1}` moves every point of `X^k` to a uniform point of
/// the ball of radius `ε^(k−1) − ε^(k)` about it.
pub fn perturbation_chain(inst: &Instance, eps2: f64, k: usize, seed: u64) -> Result<PerturbationChain> {
    if !(eps2 > 0.0) {
        return Err(Error::InvalidArgument("eps2 must be positive".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let radii = chain_radii(eps2, k, inst.domain.d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut levels = vec![inst.clone(); CHAIN_LEVELS];
    for lvl in (1..CHAIN_LEVELS).rev() {
        let step = radii[lvl - 1] - radii[lvl];
        let mut next = levels[lvl].clone();
        next.points = perturb(&levels[lvl].points, step, &mut rng, &inst.domain);
        levels[lvl - 1] = next;
    }
    Ok(PerturbationChain { radii, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Topology;
    use crate::instance::gen_uniform;

    #[test]
    fn radii_definition() {
        let r = chain_radii(0.1, 2, 2);
        assert_eq!(r[0], 0.1);
        assert!((r[1] - 0.1 / 5.0).abs() < 1e-18);
        for k in 1..CHAIN_LEVELS {
            assert!((r[k] + 4.0 * r[k] - r[k - 1]).abs() < 1e-12 * r[k - 1]);
        }
    }

    #[test]
    fn telescoping_displacement_bound() {
        let inst = gen_uniform(500, 2, 4, Topology::Torus).unwrap();
        let ch = perturbation_chain(&inst, 0.05, 1, 5).unwrap();
        assert_eq!(ch.levels.len(), CHAIN_LEVELS);
        assert_eq!(ch.level(13).points, inst.points);
        for k in 1..=CHAIN_LEVELS {
            let bound = ch.radii[k - 1] - ch.radii[CHAIN_LEVELS - 1];
            for (a, b) in ch.level(k).points.iter().zip(&inst.points) {
                assert!(inst.domain.dist(a, b) <= bound + 1e-12);
            }
        }
    }
}
