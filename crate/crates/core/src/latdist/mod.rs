//! Finite distributions on integer lattices: moment generating functions,
//! the tilting root `θ0`, the threshold `T_n`, the `β` law, exponential
//! tilting and exact convolution.

pub mod exact;
pub mod llt;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::degseq::DegreeSequence;

pub use llt::{
    d_param, h_d_param, h_d_param_grid, h_lower_bound, h_param, llt_bound_check, nearest_int_distance,
    w_of_atoms, Infimum, LltCheck,
};

/// Largest possible output support of a convolution.
pub const MAX_SUPPORT: usize = 10_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum LatDistError {
    #[error("distribution has no atoms")]
    Empty,
    #[error("invalid probability {0}")]
    BadProbability(f64),
    #[error("probabilities sum to {0}, not 1")]
    BadMass(f64),
    #[error("φ'(θ) = 0 has no positive root: {0}")]
    NoRoot(String),
    #[error("mass at -1 would be {0}")]
    InvalidMass(f64),
    #[error("support of {0} atoms exceeds the limit")]
    SupportTooLarge(usize),
    #[error("distribution mean {0} is not zero")]
    NotMeanZero(f64),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("cannot parse `{0}`")]
    Parse(String),
}

/// The lattice `{offset + step·k}` generated by a set of integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeStep {
    /// A single value; the step is unbounded.
    Degenerate { value: i64 },
    /// `offset` is the smallest value reduced modulo `step`.
    Proper { offset: i64, step: u64 },
}

impl LatticeStep {
    pub fn of_values<I: IntoIterator<Item = i64>>(values: I) -> Self {
        let mut iter = values.into_iter();
        let first = iter.next().expect("at least one value");
        let mut min = first;
        let mut g = 0u64;
        for v in iter {
            g = gcd(g, v.abs_diff(first));
            min = min.min(v);
        }
        if g == 0 {
            LatticeStep::Degenerate { value: first }
        } else {
            LatticeStep::Proper {
                offset: min.rem_euclid(g as i64),
                step: g,
            }
        }
    }

    pub fn step(&self) -> Option<u64> {
        match *self {
            LatticeStep::Degenerate { .. } => None,
            LatticeStep::Proper { step, .. } => Some(step),
        }
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Distribution of an integer random variable with finitely many atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeDistribution {
    atoms: Vec<(i64, f64)>,
    lattice: LatticeStep,
}

impl LatticeDistribution {
    /// Merges repeated values, drops zero masses and renormalizes. The input
    /// masses must be nonnegative and sum to 1 within `1e-9`.
    pub fn new(atoms: Vec<(i64, f64)>) -> Result<Self, LatDistError> {
        let mut merged: BTreeMap<i64, f64> = BTreeMap::new();
        for (v, p) in atoms {
            if !p.is_finite() || p < 0.0 {
                return Err(LatDistError::BadProbability(p));
            }
            *merged.entry(v).or_insert(0.0) += p;
        }
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(LatDistError::BadMass(total));
        }
        Self::from_weights(merged.into_iter().collect())
    }

    /// Normalizes arbitrary nonnegative weights (sorted by value, no repeats).
    fn from_weights(weights: Vec<(i64, f64)>) -> Result<Self, LatDistError> {
        let total: f64 = weights.iter().map(|a| a.1).sum();
        if !(total > 0.0) {
            return Err(LatDistError::Empty);
        }
        let atoms: Vec<(i64, f64)> = weights
            .into_iter()
            .filter(|a| a.1 > 0.0)
            .map(|(v, w)| (v, w / total))
            .collect();
        let lattice = LatticeStep::of_values(atoms.iter().map(|a| a.0));
        Ok(Self { atoms, lattice })
    }

    pub fn point_mass(value: i64) -> Self {
        Self {
            atoms: vec![(value, 1.0)],
            lattice: LatticeStep::Degenerate { value },
        }
    }

    /// Parses `value:prob` pairs separated by commas or whitespace, e.g. `-1:0.7, 1:0.3`.
    pub fn parse(text: &str) -> Result<Self, LatDistError> {
        let mut atoms = Vec::new();
        for token in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let (v, p) = token
                .split_once(':')
                .ok_or_else(|| LatDistError::Parse(token.to_string()))?;
            let v: i64 = v.trim().parse().map_err(|_| LatDistError::Parse(token.to_string()))?;
            let p: f64 = p.trim().parse().map_err(|_| LatDistError::Parse(token.to_string()))?;
            atoms.push((v, p));
        }
        if atoms.is_empty() {
            return Err(LatDistError::Empty);
        }
        Self::new(atoms)
    }

    /// Sorted `(value, probability)` pairs with positive probabilities.
    pub fn atoms(&self) -> &[(i64, f64)] {
        &self.atoms
    }

    pub fn lattice(&self) -> LatticeStep {
        self.lattice
    }

    /// Lattice step `h`, or 1 for a point mass.
    pub fn step(&self) -> u64 {
        self.lattice.step().unwrap_or(1)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min_value(&self) -> i64 {
        self.atoms[0].0
    }

    pub fn max_value(&self) -> i64 {
        self.atoms[self.atoms.len() - 1].0
    }

    pub fn prob(&self, value: i64) -> f64 {
        self.atoms
            .binary_search_by_key(&value, |a| a.0)
            .map_or(0.0, |i| self.atoms[i].1)
    }

    pub fn cdf(&self, value: i64) -> f64 {
        self.atoms.iter().take_while(|a| a.0 <= value).map(|a| a.1).sum()
    }

    pub fn shift(&self, by: i64) -> Self {
        let atoms: Vec<_> = self.atoms.iter().map(|&(v, p)| (v + by, p)).collect();
        let lattice = LatticeStep::of_values(atoms.iter().map(|a| a.0));
        Self { atoms, lattice }
    }

    pub fn mean(&self) -> f64 {
        self.mgf_derivative(1, 0.0)
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.atoms.iter().map(|&(v, p)| p * (v as f64 - mu).powi(2)).sum()
    }

    /// `E|X|^k`.
    pub fn abs_moment(&self, k: i32) -> f64 {
        self.atoms.iter().map(|&(v, p)| p * (v as f64).abs().powi(k)).sum()
    }

    /// `φ^{(k)}(θ) = E[X^k e^{θX}]`.
    pub fn mgf_derivative(&self, k: u32, theta: f64) -> f64 {
        self.atoms
            .iter()
            .map(|&(v, p)| {
                let x = v as f64;
                p * x.powi(k as i32) * (theta * x).exp()
            })
            .sum()
    }

    pub fn mgf(&self, theta: f64) -> f64 {
        self.mgf_derivative(0, theta)
    }

    /// `|E e^{itX}|`.
    pub fn char_abs(&self, t: f64) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for &(v, p) in &self.atoms {
            let (s, c) = (t * v as f64).sin_cos();
            re += p * c;
            im += p * s;
        }
        re.hypot(im)
    }

    /// The root of `φ'(θ) = 0` on `θ > 0`, by bisection.
    ///
    /// Needs `φ'(0) < 0` and an atom at 1 or above; then `φ'` is increasing
    /// and eventually positive, so the root is unique.
    pub fn theta0_solve(&self) -> Result<ThetaSolution, LatDistError> {
        let d0 = self.mgf_derivative(1, 0.0);
        if d0 >= 0.0 {
            return Err(LatDistError::NoRoot(format!("φ'(0) = {d0} ≥ 0")));
        }
        if self.max_value() < 1 {
            return Err(LatDistError::NoRoot("no atom ≥ 1".into()));
        }
        let mut hi = 1.0;
        while self.mgf_derivative(1, hi) <= 0.0 {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(LatDistError::NoRoot("bracket search diverged".into()));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.mgf_derivative(1, mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let theta0 = if self.mgf_derivative(1, lo).abs() <= self.mgf_derivative(1, hi).abs() {
            lo
        } else {
            hi
        };
        Ok(ThetaSolution {
            theta0,
            phi_at: self.mgf(theta0),
            phi2_at: self.mgf_derivative(2, theta0),
        })
    }

    /// `T_n` for the exploration increment of `d`, with this distribution as `η`.
    pub fn t_bound(&self, d: &DegreeSequence) -> Result<f64, LatDistError> {
        let sol = self.theta0_solve()?;
        Ok(sol.t_value(d.mean_degree_exp(sol.theta0), d.n() as f64))
    }

    /// The law `β` obtained from `η` by moving mass `2T/(m-2T)` out of the atom at -1.
    pub fn beta_from(&self, t: f64, m: f64) -> Result<Self, LatDistError> {
        if !(t >= 0.0) || 2.0 * t >= m {
            return Err(LatDistError::InvalidArgument(format!("need 0 ≤ T < m/2, got T={t}, m={m}")));
        }
        let scale = m / (m - 2.0 * t);
        let minus_one = scale * self.prob(-1) - 2.0 * t / (m - 2.0 * t);
        if minus_one < -1e-15 {
            return Err(LatDistError::InvalidMass(minus_one));
        }
        let mut atoms: Vec<(i64, f64)> = self
            .atoms
            .iter()
            .filter(|a| a.0 >= 0)
            .map(|&(v, p)| (v, scale * p))
            .collect();
        if minus_one > 0.0 {
            atoms.insert(0, (-1, minus_one));
        }
        if self.min_value() < -1 {
            return Err(LatDistError::InvalidArgument("η has atoms below -1".into()));
        }
        Self::from_weights(atoms)
    }

    /// Exponential tilt: `P(X_θ = ℓ) ∝ e^{θℓ} P(X = ℓ)`.
    pub fn tilt(&self, theta: f64) -> Self {
        let logs: Vec<f64> = self
            .atoms
            .iter()
            .map(|&(v, p)| p.ln() + theta * v as f64)
            .collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights = self
            .atoms
            .iter()
            .zip(&logs)
            .map(|(&(v, _), &l)| (v, (l - top).exp()))
            .collect();
        Self::from_weights(weights).expect("tilt keeps positive mass")
    }

    /// The `θ` whose tilt has mean zero, with that tilted law.
    pub fn zero_mean_tilt(&self) -> Result<(f64, Self), LatDistError> {
        let mean_at = |th: f64| self.tilt(th).mean();
        let m0 = self.mean();
        if m0 == 0.0 {
            return Ok((0.0, self.clone()));
        }
        if self.min_value() >= 0 || self.max_value() <= 0 {
            return Err(LatDistError::NoRoot("support lies on one side of 0".into()));
        }
        let dir = if m0 < 0.0 { 1.0 } else { -1.0 };
        let mut far = dir;
        while mean_at(far) * dir < 0.0 {
            far *= 2.0;
            if far.abs() > 1e6 {
                return Err(LatDistError::NoRoot("bracket search diverged".into()));
            }
        }
        let (mut a, mut b) = (0.0, far);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid == a || mid == b {
                break;
            }
            if mean_at(mid) * dir < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        let theta = if mean_at(a).abs() <= mean_at(b).abs() { a } else { b };
        Ok((theta, self.tilt(theta)))
    }

    /// Exact `n`-fold convolution as a dense vector over the lattice.
    pub fn convolve_dense(&self, n: usize) -> Result<DensePmf, LatDistError> {
        let h = self.step();
        let base = self.min_value();
        let idx: Vec<(usize, f64)> = self
            .atoms
            .iter()
            .map(|&(v, p)| (((v - base) as u64 / h) as usize, p))
            .collect();
        let width = idx.last().map_or(0, |a| a.0);
        let len = width
            .checked_mul(n)
            .and_then(|x| x.checked_add(1))
            .filter(|&l| l <= MAX_SUPPORT)
            .ok_or(LatDistError::SupportTooLarge(width.saturating_mul(n).saturating_add(1)))?;
        let mut cur = vec![0.0; len];
        cur[0] = 1.0;
        let mut filled = 1;
        for _ in 0..n {
            let mut next = vec![0.0; filled + width];
            for (i, &c) in cur[..filled].iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for &(j, p) in &idx {
                    next[i + j] += c * p;
                }
            }
            filled += width;
            cur[..filled].copy_from_slice(&next);
        }
        Ok(DensePmf {
            min: base * n as i64,
            step: h,
            probs: cur,
        })
    }

    /// Exact `n`-fold convolution.
    pub fn convolve_pmf(&self, n: usize) -> Result<Self, LatDistError> {
        if n == 0 {
            return Ok(Self::point_mass(0));
        }
        let dense = self.convolve_dense(n)?;
        let weights = dense
            .probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (dense.value(i), p))
            .collect();
        Self::from_weights(weights)
    }
}

impl fmt::Display for LatticeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.atoms.iter().map(|(v, p)| format!("{v}:{p}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Probabilities on `min, min+step, …` (zeros included).
#[derive(Clone, Debug, PartialEq)]
pub struct DensePmf {
    pub min: i64,
    pub step: u64,
    pub probs: Vec<f64>,
}

impl DensePmf {
    pub fn value(&self, i: usize) -> i64 {
        self.min + (i as u64 * self.step) as i64
    }

    /// Probability of `value` (zero off the lattice or outside the range).
    pub fn prob(&self, value: i64) -> f64 {
        let off = value - self.min;
        if off < 0 || off as u64 % self.step != 0 {
            return 0.0;
        }
        self.probs.get((off as u64 / self.step) as usize).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// `θ0` together with `φ(θ0)` and `φ''(θ0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaSolution {
    pub theta0: f64,
    pub phi_at: f64,
    pub phi2_at: f64,
}

impl ThetaSolution {
    /// `log(1/φ(θ0))`.
    pub fn log_inv_phi(&self) -> f64 {
        -self.phi_at.ln()
    }

    /// `T_n = log( L^{3/2} φ''(θ0)^{-1/2} E[D e^{θ0 D}] n ) / L` with `L = log(1/φ(θ0))`.
    pub fn t_value(&self, mean_degree_exp: f64, n: f64) -> f64 {
        let l = self.log_inv_phi();
        (l.powf(1.5) / self.phi2_at.sqrt() * mean_degree_exp * n).ln() / l
    }
}

/// `(2R/Q²) log(|Q|³ n / R²)`, the small-`|Q|` form of `T_n`.
pub fn closed_form_t(q: f64, r: f64, n: f64) -> f64 {
    2.0 * r / (q * q) * (q.abs().powi(3) * n / (r * r)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist(a: &[(i64, f64)]) -> LatticeDistribution {
        LatticeDistribution::new(a.to_vec()).unwrap()
    }

    fn running_eta() -> LatticeDistribution {
        dist(&[(-1, 0.7), (1, 0.3)])
    }

    #[test]
    fn construction_and_parse() {
        let d = LatticeDistribution::parse("-1:0.7, 1:0.3").unwrap();
        assert_eq!(d, running_eta());
        assert_eq!(d.lattice(), LatticeStep::Proper { offset: 1, step: 2 });
        assert!(LatticeDistribution::new(vec![(0, 0.5)]).is_err());
        assert!(LatticeDistribution::new(vec![(0, 1.5), (1, -0.5)]).is_err());
        assert!(LatticeDistribution::parse("1-0.5").is_err());
        let d = dist(&[(0, 0.5), (0, 0.5), (3, 0.0)]);
        assert_eq!(d.atoms(), &[(0, 1.0)]);
    }

    #[test]
    fn mgf_examples() {
        let eta = running_eta();
        assert!((eta.mgf_derivative(1, 0.0) + 0.4).abs() < 1e-15);
        assert!((eta.mgf_derivative(2, 0.0) - 1.0).abs() < 1e-15);
        let zero = LatticeDistribution::point_mass(0);
        for k in 1..4 {
            assert_eq!(zero.mgf_derivative(k, 0.7), 0.0);
        }
    }

    #[test]
    fn theta0_examples() {
        let s = running_eta().theta0_solve().unwrap();
        assert!((s.theta0 - 0.5 * (7.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((s.phi_at - 2.0 * 0.21f64.sqrt()).abs() < 1e-12);
        assert!(running_eta().mgf_derivative(1, s.theta0).abs() <= 1e-10);
        let s = dist(&[(-1, 0.8), (1, 0.2)]).theta0_solve().unwrap();
        assert!((s.theta0 - 2f64.ln()).abs() < 1e-12);
        assert!(matches!(
            dist(&[(-1, 0.5), (1, 0.5)]).theta0_solve(),
            Err(LatDistError::NoRoot(_))
        ));
        assert!(dist(&[(-1, 0.5), (0, 0.5)]).theta0_solve().is_err());
    }

    #[test]
    fn t_bound_running_example() {
        let d = DegreeSequence::from_counts([(1, 875_000), (3, 125_000)]).unwrap();
        let eta = d.eta();
        let s = eta.theta0_solve().unwrap();
        assert!((s.log_inv_phi() - 0.08718).abs() < 1e-4);
        assert!((s.phi2_at - s.phi_at).abs() < 1e-12);
        assert!((d.mean_degree_exp(s.theta0) - 2.673).abs() < 1e-3);
        let t = eta.t_bound(&d).unwrap();
        assert!((t - 128.3).abs() < 0.1, "{t}");
        let d2 = DegreeSequence::from_counts([(1, 1_750_000), (3, 250_000)]).unwrap();
        let t2 = d2.eta().t_bound(&d2).unwrap();
        assert!((t2 - t - 2f64.ln() / s.log_inv_phi()).abs() < 1e-9);
    }

    #[test]
    fn t_bound_matches_closed_form_for_small_q() {
        let n = 1e12;
        let d = DegreeSequence::mix_1_3(n as u64, -0.01).unwrap();
        let (q, r) = (d.q_value(), d.r_value());
        assert!(q.abs() <= 0.05);
        let t = d.eta().t_bound(&d).unwrap();
        let closed = closed_form_t(q, r, n);
        assert!((t / closed - 1.0).abs() < 0.1, "{t} vs {closed}");
    }

    #[test]
    fn theta0_can_exceed_q_over_r() {
        // for η ∈ {-1, 1}, θ0 = atanh|Q| and R = 1, so θ0 > |Q|/R for every Q < 0;
        // the ratio still tends to 1 as Q → 0
        for q in [0.4, 0.1, 0.01] {
            let p = (1.0 - q) / 2.0;
            let eta = dist(&[(-1, 1.0 - p), (1, p)]);
            let s = eta.theta0_solve().unwrap();
            assert!((s.theta0 - f64::atanh(q)).abs() < 1e-12);
            assert!(s.theta0 > q);
            assert!(s.theta0 / q - 1.0 < q * q);
        }
    }

    #[test]
    fn beta_examples() {
        let eta = running_eta();
        assert_eq!(eta.beta_from(0.0, 1000.0).unwrap(), eta);
        let b = eta.beta_from(10.0, 1000.0).unwrap();
        assert!((b.prob(-1) - 680.0 / 980.0).abs() < 1e-12);
        assert!((b.prob(1) - 300.0 / 980.0).abs() < 1e-12);
        for k in -1..3 {
            assert!(b.cdf(k) <= eta.cdf(k) + 1e-15);
        }
        assert!(matches!(eta.beta_from(400.0, 1000.0), Err(LatDistError::InvalidMass(_))));
        assert!(eta.beta_from(600.0, 1000.0).is_err());
    }

    #[test]
    fn tilt_examples() {
        let eta = running_eta();
        assert_eq!(eta.tilt(0.0).atoms().len(), 2);
        assert!((eta.tilt(0.0).prob(1) - 0.3).abs() < 1e-15);
        let t = eta.tilt(0.5 * (7.0f64 / 3.0).ln());
        assert!((t.prob(-1) - 0.5).abs() < 1e-12 && (t.prob(1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn convolution_examples() {
        let x = dist(&[(-1, 0.5), (1, 0.5)]);
        assert_eq!(x.convolve_pmf(1).unwrap(), x);
        let c = x.convolve_pmf(2).unwrap();
        assert_eq!(c.atoms(), &[(-2, 0.25), (0, 0.5), (2, 0.25)]);
        let big = dist(&[(0, 0.4), (1, 0.2), (5_000_000, 0.4)]);
        assert!(matches!(big.convolve_pmf(3), Err(LatDistError::SupportTooLarge(_))));
    }

    #[test]
    fn zero_mean_tilt_recovers_root() {
        let (theta, t) = running_eta().zero_mean_tilt().unwrap();
        assert!((theta - 0.5 * (7.0f64 / 3.0).ln()).abs() < 1e-9);
        assert!(t.mean().abs() < 1e-12);
        let up = dist(&[(-2, 0.2), (1, 0.5), (3, 0.3)]);
        let (theta, t) = up.zero_mean_tilt().unwrap();
        assert!(theta < 0.0 && t.mean().abs() < 1e-10);
    }

    fn arb_eta() -> impl Strategy<Value = LatticeDistribution> {
        (prop::collection::vec(0.01f64..1.0, 2..6), 0.3f64..0.9).prop_map(|(w, pm)| {
            let total: f64 = w.iter().sum();
            let mut atoms = vec![(-1i64, pm)];
            for (i, x) in w.iter().enumerate() {
                atoms.push((i as i64, (1.0 - pm) * x / total));
            }
            LatticeDistribution::new(atoms).unwrap()
        })
    }

    proptest! {
        #[test]
        fn derivative_at_zero_matches_degree_functionals(counts in prop::collection::vec(0u64..50, 1..8)) {
            let pairs: Vec<(u64, u64)> = counts.iter().enumerate().map(|(i, &c)| (i as u64 + 1, c)).collect();
            let mut pairs = pairs;
            pairs[0].1 += 1;
            if pairs.iter().map(|p| p.0 * p.1).sum::<u64>() % 2 == 1 { pairs[0].1 += 1; }
            let d = DegreeSequence::from_counts(pairs).unwrap();
            let eta = d.eta();
            prop_assert!((eta.mgf_derivative(1, 0.0) - d.q_value()).abs() < 1e-12);
            prop_assert!((eta.mgf_derivative(2, 0.0) - d.r_value()).abs() < 1e-9 * d.r_value().max(1.0));
        }

        #[test]
        fn tilt_at_root_is_centered(eta in arb_eta()) {
            prop_assume!(eta.mean() < -1e-6 && eta.max_value() >= 1);
            let s = eta.theta0_solve().unwrap();
            prop_assert!(eta.mgf_derivative(1, s.theta0).abs() <= 1e-10);
            prop_assert!(eta.tilt(s.theta0).mean().abs() <= 1e-10);
            prop_assert!(s.phi_at > 0.0 && s.phi_at < 1.0);
            // θ0 ≤ |Q|/R follows once φ' is convex, i.e. E[η³] ≥ 0 (φ''' is increasing)
            if eta.mgf_derivative(3, 0.0) >= 0.0 {
                let q = eta.mgf_derivative(1, 0.0);
                let r = eta.mgf_derivative(2, 0.0);
                prop_assert!(s.theta0 <= q.abs() / r + 1e-12);
            }
        }

        #[test]
        fn tilt_mean_is_log_derivative(eta in arb_eta(), theta in -1.0f64..1.0) {
            let t = eta.tilt(theta);
            let expect = eta.mgf_derivative(1, theta) / eta.mgf(theta);
            prop_assert!((t.mean() - expect).abs() < 1e-12);
        }

        #[test]
        fn convolution_conserves_mass_and_lattice(eta in arb_eta(), n in 1usize..40) {
            let c = eta.convolve_pmf(n).unwrap();
            let dense = eta.convolve_dense(n).unwrap();
            prop_assert!((dense.total() - 1.0).abs() < 1e-9);
            let h = eta.step() as i64;
            for &(v, _) in c.atoms() {
                prop_assert_eq!((v - n as i64 * eta.min_value()).rem_euclid(h), 0);
            }
        }
    }
}
