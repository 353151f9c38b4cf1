//! Small statistical helpers shared by tests and experiment drivers.

/// Upper-tail p-value of Pearson's chi-square test against equal cell probabilities.
pub fn chi_square_uniform_p(counts: &[u64]) -> f64 {
    let k = counts.len();
    assert!(k >= 2, "need at least two cells");
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / k as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    gamma_q((k - 1) as f64 / 2.0, stat / 2.0)
}

/// Regularized upper incomplete gamma function `Q(a, x)`.
///
/// Series expansion below `x < a + 1`, Lentz continued fraction above.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..10_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        (1.0 - sum * log_prefactor.exp()).clamp(0.0, 1.0)
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (h * log_prefactor.exp()).clamp(0.0, 1.0)
    }
}

/// Lanczos approximation (g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Bins the first two coordinates of points in `[0,t)^2` into a `side × side` grid.
pub fn grid_counts(points: &[crate::Point], t: f64, side: usize) -> Vec<u64> {
    let mut counts = vec![0u64; side * side];
    for p in points {
        let cx = ((p.coords[0] / t * side as f64) as usize).min(side - 1);
        let cy = ((p.coords[1] / t * side as f64) as usize).min(side - 1);
        counts[cy * side + cx] += 1;
    }
    counts
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfectly_flat_counts_have_p_one() {
        assert!((chi_square_uniform_p(&[10; 100]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_gamma_values() {
        // ln Γ(n) = ln((n-1)!)
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
        // Q(1, x) = e^{-x}
        for x in [0.1, 1.0, 3.0, 20.0] {
            assert!((gamma_q(1.0, x) - (-x as f64).exp()).abs() < 1e-12);
        }
        // chi-square with 2 dof: survival = e^{-x/2}
        assert!((gamma_q(1.0, 5.991 / 2.0) - 0.05).abs() < 1e-4);
        // chi-square 99 dof, 95th percentile is 123.225
        assert!((gamma_q(49.5, 123.225 / 2.0) - 0.05).abs() < 1e-4);
    }

    #[test]
    fn concentrated_counts_reject() {
        let mut c = vec![0u64; 100];
        c[0] = 1000;
        assert!(chi_square_uniform_p(&c) < 1e-10);
    }
}
