//! Small statistical helpers shared by the experiments and the acceptance suite.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::factorial::ln_binomial;

/// `E[Z_s]`, the expected number of tree components of order `s` in `G(ℓ, p)`:
/// `C(ℓ,s) s^{s-2} p^{s-1} (1-p)^{s(ℓ-s) + C(s,2) - (s-1)}`.
pub fn er_tree_expectation(ell: u64, p: f64, s: u64) -> f64 {
    assert!(s >= 1 && s <= ell, "need 1 ≤ s ≤ ℓ");
    assert!((0.0..=1.0).contains(&p), "p must be a probability");
    let sf = s as f64;
    let outside = (s * (ell - s) + s * (s - 1) / 2 - (s - 1)) as f64;
    if p == 0.0 {
        return if s == 1 { ell as f64 } else { 0.0 };
    }
    if p == 1.0 {
        return if outside == 0.0 {
            (ln_binomial(ell, s) + (sf - 2.0) * sf.ln()).exp()
        } else {
            0.0
        };
    }
    (ln_binomial(ell, s) + (sf - 2.0) * sf.ln() + (sf - 1.0) * p.ln() + outside * (1.0 - p).ln()).exp()
}

/// Poisson large-deviation rate `I(λ) = λ - 1 - ln λ`.
pub fn poisson_rate(lambda: f64) -> f64 {
    lambda - 1.0 - lambda.ln()
}

/// `s0 = ⌊a log ℓ⌋ ∨ 1` with `a = a_frac / I(1-ε)`.
pub fn s0_target(ell: u64, eps: f64, a_frac: f64) -> Result<u64, String> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(format!("ε must be in (0, 1), got {eps}"));
    }
    if !(a_frac > 0.0 && a_frac < 1.0) {
        return Err(format!("a_frac must be in (0, 1), got {a_frac}"));
    }
    if ell < 3 {
        return Err(format!("ℓ must be at least 3, got {ell}"));
    }
    let rate = poisson_rate(1.0 - eps);
    if !rate.is_finite() {
        return Ok(1);
    }
    let a = a_frac / rate;
    Ok(((a * (ell as f64).ln()).floor() as u64).max(1))
}

/// Pearson goodness-of-fit statistic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

pub fn chi_square(counts: &[u64], probs: &[f64]) -> ChiSquare {
    assert_eq!(counts.len(), probs.len());
    assert!(counts.len() >= 2, "need at least two cells");
    let total: u64 = counts.iter().sum();
    let statistic = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * total as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let df = counts.len() - 1;
    let p_value = 1.0 - ChiSquared::new(df as f64).expect("df ≥ 1").cdf(statistic);
    ChiSquare { statistic, df, p_value }
}

/// Two-sample Pearson test of homogeneity for count vectors on the same cells.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> ChiSquare {
    assert_eq!(a.len(), b.len());
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let mut statistic = 0.0;
    let mut cells = 0;
    for (&x, &y) in a.iter().zip(b) {
        let tot = (x + y) as f64;
        if tot == 0.0 {
            continue;
        }
        cells += 1;
        let ea = tot * na / (na + nb);
        let eb = tot * nb / (na + nb);
        statistic += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    let df = cells.max(2) - 1;
    let p_value = 1.0 - ChiSquared::new(df as f64).expect("df ≥ 1").cdf(statistic);
    ChiSquare { statistic, df, p_value }
}

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MultiGraph;
    use crate::rng::trial_rng;
    use rand::Rng;

    #[test]
    fn tree_expectation_examples() {
        let (ell, p) = (10, 0.2);
        assert!((er_tree_expectation(ell, p, 1) - 10.0 * 0.8f64.powi(9)).abs() < 1e-12);
        assert!((er_tree_expectation(3, 0.5, 2) - 0.375).abs() < 1e-12);
    }

    #[test]
    fn tree_expectation_matches_simulation() {
        let (ell, p) = (30u64, 0.02);
        let trials = 20_000;
        let mut sums = [0.0f64; 3];
        let mut sq = [0.0f64; 3];
        for i in 0..trials {
            let mut rng = trial_rng(21, i);
            let mut g = MultiGraph::new(ell as usize);
            for u in 0..ell as usize {
                for v in u + 1..ell as usize {
                    if rng.gen::<f64>() < p {
                        g.add_edge(u, v).unwrap();
                    }
                }
            }
            for s in 1..=3 {
                let z = g.count_isolated_trees(s).unwrap() as f64;
                sums[s - 1] += z;
                sq[s - 1] += z * z;
            }
        }
        for s in 1..=3u64 {
            let i = s as usize - 1;
            let mean = sums[i] / trials as f64;
            let var = sq[i] / trials as f64 - mean * mean;
            let se = (var / trials as f64).sqrt();
            let expected = er_tree_expectation(ell, p, s);
            assert!((mean - expected).abs() <= 3.0 * se, "s={s}: {mean} vs {expected}");
        }
    }

    #[test]
    fn s0_examples() {
        assert!((poisson_rate(0.5) - 0.193_147).abs() < 1e-6);
        assert_eq!(s0_target(200, 0.5, 0.9).unwrap(), 24);
        assert_eq!(s0_target(200, 1.0, 0.9).unwrap(), 1);
        assert!(s0_target(200, 0.5, 0.0).is_err());
    }

    #[test]
    fn chi_square_examples() {
        let c = chi_square(&[50, 50], &[0.5, 0.5]);
        assert_eq!(c.statistic, 0.0);
        assert!((c.p_value - 1.0).abs() < 1e-12);
        let c = chi_square(&[90, 10], &[0.5, 0.5]);
        assert!(c.p_value < 1e-10);
        let h = chi_square_homogeneity(&[30, 30, 40], &[300, 300, 400]);
        assert!(h.statistic.abs() < 1e-12);
    }
}
