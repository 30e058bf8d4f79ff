//! Degree sequences and their scalar functionals.
//!
//! A sequence is stored as sorted runs `(degree, count)`, which keeps huge
//! sequences cheap for closed-form checks. Vertex `i` (0-based) is the `i`-th
//! vertex in nondecreasing degree order, so the largest degrees sit at the end.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::latdist::{LatticeDistribution, LatticeStep};

#[derive(Debug, Error, PartialEq)]
pub enum DegSeqError {
    #[error("degree sequence is empty")]
    Empty,
    #[error("degrees must be at least 1")]
    ZeroDegree,
    #[error("degree sum {0} is odd")]
    OddSum(u128),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeSequence {
    runs: Vec<(u64, u64)>,
    n: u64,
    m: u64,
}

impl DegreeSequence {
    /// Builds a sequence from explicit degrees (any order; they are sorted).
    pub fn new(degrees: Vec<u64>) -> Result<Self, DegSeqError> {
        let mut counts = BTreeMap::new();
        for d in degrees {
            *counts.entry(d).or_insert(0u64) += 1;
        }
        Self::from_counts(counts)
    }

    /// Builds a sequence from `(degree, count)` pairs; zero counts are skipped.
    pub fn from_counts<I: IntoIterator<Item = (u64, u64)>>(pairs: I) -> Result<Self, DegSeqError> {
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for (d, c) in pairs {
            if c > 0 {
                *counts.entry(d).or_insert(0) += c;
            }
        }
        if counts.is_empty() {
            return Err(DegSeqError::Empty);
        }
        if counts.contains_key(&0) {
            return Err(DegSeqError::ZeroDegree);
        }
        let sum: u128 = counts.iter().map(|(&d, &c)| d as u128 * c as u128).sum();
        if sum % 2 == 1 {
            return Err(DegSeqError::OddSum(sum));
        }
        let m = u64::try_from(sum)
            .map_err(|_| DegSeqError::InvalidParameter("degree sum exceeds u64".into()))?;
        let n = counts.values().sum();
        Ok(Self {
            runs: counts.into_iter().collect(),
            n,
            m,
        })
    }

    /// Parses either one degree per line or `count degree` pairs per line.
    /// Blank lines and `#` comments are ignored; the two forms cannot be mixed.
    pub fn parse(text: &str) -> Result<Self, DegSeqError> {
        let mut singles = Vec::new();
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums: Result<Vec<u64>, _> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(str::parse::<u64>)
                .collect();
            let nums = nums.map_err(|e| DegSeqError::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
            match nums.as_slice() {
                [d] => singles.push(*d),
                [c, d] => pairs.push((*d, *c)),
                _ => {
                    return Err(DegSeqError::Parse {
                        line: i + 1,
                        msg: "expected `degree` or `count degree`".into(),
                    })
                }
            }
            if !singles.is_empty() && !pairs.is_empty() {
                return Err(DegSeqError::Parse {
                    line: i + 1,
                    msg: "mixes explicit degrees with `count degree` pairs".into(),
                });
            }
        }
        if pairs.is_empty() {
            Self::new(singles)
        } else {
            Self::from_counts(pairs)
        }
    }

    /// Run-length text form, one `count degree` pair per line.
    pub fn to_counts_text(&self) -> String {
        self.runs.iter().map(|(d, c)| format!("{c} {d}\n")).collect()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn max_degree(&self) -> u64 {
        self.runs.last().map_or(0, |r| r.0)
    }

    pub fn min_degree(&self) -> u64 {
        self.runs[0].0
    }

    pub fn count_of(&self, degree: u64) -> u64 {
        self.runs
            .binary_search_by_key(&degree, |r| r.0)
            .map_or(0, |i| self.runs[i].1)
    }

    pub fn n1(&self) -> u64 {
        self.count_of(1)
    }

    pub fn n2(&self) -> u64 {
        self.count_of(2)
    }

    /// Sorted `(degree, count)` runs.
    pub fn runs(&self) -> &[(u64, u64)] {
        &self.runs
    }

    /// Expanded nondecreasing degree list; vertex `i` has degree `degrees()[i]`.
    pub fn degrees(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n as usize);
        for &(d, c) in &self.runs {
            out.extend(std::iter::repeat(d as usize).take(c as usize));
        }
        out
    }

    /// Exact `Σ d_i^k`.
    pub fn power_sum(&self, k: u32) -> u128 {
        self.runs
            .iter()
            .map(|&(d, c)| (d as u128).pow(k) * c as u128)
            .sum()
    }

    /// Exact `Σ d_i (d_i - 2)`, equal to `Σ d_i² - 2m`.
    pub fn q_numerator(&self) -> i128 {
        self.runs
            .iter()
            .map(|&(d, c)| d as i128 * (d as i128 - 2) * c as i128)
            .sum()
    }

    /// Exact `Σ d_i (d_i - 2)²`.
    pub fn r_numerator(&self) -> i128 {
        self.runs
            .iter()
            .map(|&(d, c)| d as i128 * (d as i128 - 2).pow(2) * c as i128)
            .sum()
    }

    /// `Q = (1/m) Σ d_i (d_i - 2)`.
    pub fn q_value(&self) -> f64 {
        self.q_numerator() as f64 / self.m as f64
    }

    /// `R = (1/m) Σ d_i (d_i - 2)²`.
    pub fn r_value(&self) -> f64 {
        self.r_numerator() as f64 / self.m as f64
    }

    /// `E[D^k]` for the degree of a uniform vertex.
    pub fn moment(&self, k: i32) -> f64 {
        self.runs
            .iter()
            .map(|&(d, c)| (d as f64).powi(k) * c as f64)
            .sum::<f64>()
            / self.n as f64
    }

    /// `E[D e^{θD}]` for the degree of a uniform vertex.
    pub fn mean_degree_exp(&self, theta: f64) -> f64 {
        self.runs
            .iter()
            .map(|&(d, c)| c as f64 * d as f64 * (theta * d as f64).exp())
            .sum::<f64>()
            / self.n as f64
    }

    /// Largest lattice containing every degree.
    pub fn lattice_step(&self) -> LatticeStep {
        LatticeStep::of_values(self.runs.iter().map(|r| r.0 as i64))
    }

    /// Size-biased degree law, `P(D̂ = k) = k n_k / m`.
    pub fn size_biased_pmf(&self) -> LatticeDistribution {
        let m = self.m as f64;
        LatticeDistribution::new(
            self.runs
                .iter()
                .map(|&(d, c)| (d as i64, d as f64 * c as f64 / m))
                .collect(),
        )
        .expect("size-biased masses sum to one")
    }

    /// Law of `η = D̂ - 2`, the exploration increment.
    pub fn eta(&self) -> LatticeDistribution {
        self.size_biased_pmf().shift(-2)
    }

    /// The smallest set of largest-degree vertices whose removal leaves
    /// `Σ d(d-2) ≤ 0`.
    pub fn star_set(&self) -> StarSet {
        let total = self.q_numerator();
        let (size, degree_sum, residual) = self.greedy_prefix(|residual| residual <= 0);
        debug_assert!(total > 0 || size == 0);
        StarSet {
            size,
            m_star: degree_sum,
            residual,
        }
    }

    /// Removes vertices of degree ≥ 3 from the top until `done(residual)` holds.
    /// Returns (vertices removed, their degree sum, residual Σ d(d-2)).
    fn greedy_prefix(&self, done: impl Fn(i128) -> bool) -> (u64, u64, i128) {
        let mut residual = self.q_numerator();
        let (mut size, mut sum) = (0u64, 0u64);
        for &(d, c) in self.runs.iter().rev() {
            if done(residual) || d < 3 {
                break;
            }
            let gain = d as i128 * (d as i128 - 2);
            for _ in 0..c {
                if done(residual) {
                    break;
                }
                residual -= gain;
                size += 1;
                sum += d;
            }
        }
        (size, sum, residual)
    }

    /// Checks `(m0, Q0)`-subcriticality with the greedy largest-degree set and
    /// evaluates the side conditions and derived quantities `T` and `λ`.
    pub fn subcritical_certificate(&self, m0: f64, q0: f64) -> Result<SubcritCertificate, DegSeqError> {
        if !(q0 <= 0.0) || !q0.is_finite() {
            return Err(DegSeqError::InvalidParameter(format!("Q0 must be ≤ 0, got {q0}")));
        }
        if !(m0 >= 0.0) {
            return Err(DegSeqError::InvalidParameter(format!("m0 must be ≥ 0, got {m0}")));
        }
        let m = self.m as f64;
        let target = q0 * m;
        let slack = 1e-9 * m.max(1.0);
        let (set_size, set_degree_sum, residual) =
            self.greedy_prefix(|res| res as f64 <= target + slack);
        let reached = residual as f64 <= target + slack;
        let star = self.star_set();
        let r = self.r_value();
        let delta = self.max_degree() as f64;
        let denom = delta * q0.abs() + r;
        let lambda = self.n as f64 * q0 * q0 / denom;
        let t = if q0 == 0.0 { f64::INFINITY } else { m0 / q0.abs() };
        Ok(SubcritCertificate {
            star_set_size: star.size,
            m_star: star.m_star,
            m0,
            q0,
            valid: reached && set_degree_sum as f64 <= m0,
            set_size,
            set_degree_sum,
            residual_q: residual as f64 / m,
            t,
            lambda,
            m0_covers_star: m0 >= 3.0 * star.m_star as f64,
            log_condition: m0 * q0.abs() >= denom * lambda.ln(),
            q0_sq_n_over_m0: q0 * q0 * self.n as f64 / m0,
        })
    }

    /// A certificate built from the sequence alone.
    ///
    /// With `Q ≤ 0`: `Q0 = Q` and `m0 = max(Δ, (Δ + R/|Q|) log λ)`. Otherwise the
    /// greedy set is allowed total degree `3m*`, `Q0` is the residual it leaves,
    /// and `m0` is raised if needed to satisfy the logarithmic side condition.
    pub fn auto_certificate(&self) -> Result<SubcritCertificate, DegSeqError> {
        let delta = self.max_degree() as f64;
        let r = self.r_value();
        let n = self.n as f64;
        let q = self.q_value();
        if q < 0.0 {
            let lambda = n * q * q / (delta * q.abs() + r);
            let m0 = ((delta + r / q.abs()) * lambda.ln().max(0.0)).max(delta);
            return self.subcritical_certificate(m0, q);
        }
        let star = self.star_set();
        let mut m0 = 3.0 * star.m_star as f64;
        if m0 == 0.0 {
            return Err(DegSeqError::InvalidParameter(
                "sequence has Q = 0 and no hub set; no negative Q0 available".into(),
            ));
        }
        // residual after removing largest-degree vertices with total degree ≤ m0
        let mut residual = self.q_numerator();
        let mut sum = 0u64;
        'outer: for &(d, c) in self.runs.iter().rev() {
            if d < 3 {
                break;
            }
            for _ in 0..c {
                if (sum + d) as f64 > m0 {
                    break 'outer;
                }
                sum += d;
                residual -= d as i128 * (d as i128 - 2);
            }
        }
        let q0 = residual as f64 / self.m as f64;
        if q0 >= 0.0 {
            return Err(DegSeqError::InvalidParameter(
                "hub removal does not make the residual subcritical".into(),
            ));
        }
        let denom = delta * q0.abs() + r;
        let lambda = n * q0 * q0 / denom;
        m0 = m0.max(denom * lambda.ln().max(0.0) / q0.abs());
        self.subcritical_certificate(m0, q0)
    }

    /// Finite-n report on the checkable items of the standing assumptions.
    pub fn check_assumptions(&self) -> AssumptionReport {
        let not_0_2: u64 = self
            .runs
            .iter()
            .filter(|r| r.0 != 2)
            .map(|r| r.1)
            .sum();
        let fraction = not_0_2 as f64 / self.n as f64;
        let fourth = self.moment(4);
        let sqrt_delta = (self.max_degree() as f64).sqrt();
        AssumptionReport {
            q: self.q_value(),
            fraction_not_0_or_2: fraction,
            has_non_2_degrees: fraction > 0.0,
            lattice: self.lattice_step(),
            fourth_moment: fourth,
            sqrt_max_degree: sqrt_delta,
            fourth_moment_ok: fourth <= sqrt_delta * (1.0 + 1e-12),
            note: "convergence of D_n and Q_n → 0 and a constant lattice step are \
                   properties of a sequence of degree sequences, not checkable at one n",
        }
    }

    /// Mix of degree-1 and degree-3 vertices with `Q` as close as possible to `q`.
    ///
    /// A fraction `(1+q)/(4-2q)` of the vertices gets degree 3. If the degree sum
    /// is odd, one extra degree-1 vertex is appended.
    pub fn mix_1_3(n: u64, q: f64) -> Result<Self, DegSeqError> {
        if !(-1.0..=1.0).contains(&q) || n < 2 {
            return Err(DegSeqError::InvalidParameter(format!(
                "need n ≥ 2 and q in [-1, 1], got n={n}, q={q}"
            )));
        }
        let n3 = (n as f64 * (1.0 + q) / (4.0 - 2.0 * q)).round() as u64;
        let mut n1 = n - n3;
        if (n1 + 3 * n3) % 2 == 1 {
            n1 += 1;
        }
        Self::from_counts([(1, n1), (3, n3)])
    }

    /// Heavy-tailed test sequence: `hubs` vertices of degree `⌊n^exponent⌋`, a
    /// fraction `frac_one` of degree-1 vertices and the rest of degree 2.
    /// Parity is fixed by turning one degree-1 vertex into a degree-2 vertex.
    pub fn heavy_tailed(n: u64, hubs: u64, exponent: f64, frac_one: f64) -> Result<Self, DegSeqError> {
        let hub_degree = (n as f64).powf(exponent).floor() as u64;
        let n1 = (n as f64 * frac_one).round() as u64;
        if hub_degree < 3 || hubs + n1 > n {
            return Err(DegSeqError::InvalidParameter(format!(
                "heavy_tailed: hub degree {hub_degree}, hubs {hubs}, n1 {n1}, n {n}"
            )));
        }
        let mut n2 = n - hubs - n1;
        let mut n1 = n1;
        if (hubs * hub_degree + n1) % 2 == 1 {
            n1 -= 1;
            n2 += 1;
        }
        Self::from_counts([(1, n1), (2, n2), (hub_degree, hubs)])
    }
}

impl fmt::Display for DegreeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DegreeSequence(n={}, m={}, Δ={}", self.n, self.m, self.max_degree())?;
        for (d, c) in self.runs.iter().take(6) {
            write!(f, ", {c}×{d}")?;
        }
        if self.runs.len() > 6 {
            write!(f, ", …")?;
        }
        write!(f, ")")
    }
}

/// The hub set `S*` (as a count of top vertices) and its degree sum `m*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StarSet {
    pub size: u64,
    pub m_star: u64,
    /// `Σ_{u∉S*} d_u (d_u - 2)`.
    pub residual: i128,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubcritCertificate {
    pub star_set_size: u64,
    pub m_star: u64,
    pub m0: f64,
    pub q0: f64,
    pub valid: bool,
    /// Number of top-degree vertices in the certifying set `S`.
    pub set_size: u64,
    pub set_degree_sum: u64,
    /// `(1/m) Σ_{w∉S} d_w (d_w - 2)`.
    pub residual_q: f64,
    /// `T = m0 / |Q0|` (infinite when `Q0 = 0`).
    pub t: f64,
    /// `λ = n Q0² / (Δ|Q0| + R)`.
    pub lambda: f64,
    /// `m0 ≥ 3 m*`.
    pub m0_covers_star: bool,
    /// `m0 |Q0| ≥ (Δ|Q0| + R) log λ`.
    pub log_condition: bool,
    /// `Q0² n / m0`, which should be large.
    pub q0_sq_n_over_m0: f64,
}

impl SubcritCertificate {
    /// Vertices of `S` under the sorted labelling (the top `set_size` indices).
    pub fn set_vertices(&self, n: u64) -> std::ops::Range<usize> {
        (n - self.set_size) as usize..n as usize
    }

    /// `T` rounded up, as used by the uniform-model exploration.
    pub fn t_ceil(&self) -> u64 {
        self.t.ceil() as u64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport {
    pub q: f64,
    pub fraction_not_0_or_2: f64,
    pub has_non_2_degrees: bool,
    pub lattice: LatticeStep,
    pub fourth_moment: f64,
    pub sqrt_max_degree: f64,
    pub fourth_moment_ok: bool,
    pub note: &'static str,
}

/// Sequence with `ℓ` vertices of degree `Δ` and the rest of degree 1.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundSequence {
    pub sequence: DegreeSequence,
    pub ell: u64,
    /// `p* = Δ² / n`.
    pub p_star: f64,
    /// True if a degree-1 vertex was added to make the degree sum even.
    pub parity_fixed: bool,
}

/// `ℓ = ⌊(1-ε) n / Δ²⌋` vertices of degree `Δ` and `n - ℓ` of degree 1, plus
/// one extra degree-1 vertex when the sum would be odd.
pub fn lower_bound_sequence(n: u64, delta: u64, eps: f64) -> Result<LowerBoundSequence, DegSeqError> {
    if delta < 2 || delta * delta >= n {
        return Err(DegSeqError::InvalidParameter(format!(
            "need Δ ≥ 2 and Δ² < n, got Δ={delta}, n={n}"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(DegSeqError::InvalidParameter(format!("ε must lie in (0,1), got {eps}")));
    }
    let ell = ((1.0 - eps) * n as f64 / (delta * delta) as f64).floor() as u64;
    if ell < 1 {
        return Err(DegSeqError::InvalidParameter(format!("ℓ = {ell} < 1")));
    }
    let mut ones = n - ell;
    let parity_fixed = (ones + ell * delta) % 2 == 1;
    if parity_fixed {
        ones += 1;
    }
    Ok(LowerBoundSequence {
        sequence: DegreeSequence::from_counts([(1, ones), (delta, ell)])?,
        ell,
        p_star: (delta * delta) as f64 / n as f64,
        parity_fixed,
    })
}
