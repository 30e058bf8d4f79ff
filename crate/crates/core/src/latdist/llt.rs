//! Local limit theorem parameters: the symmetrized concentration measure
//! `H(X,d)`, its window infimum `H_D(X)`, `D(X,d)`, and the explicit bound on
//! the gap between `P(S_n = w)` and the Gaussian lattice density.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{gcd, LatDistError, LatticeDistribution};

/// Distance from `alpha` to the nearest integer, in `[0, 1/2]`.
pub fn nearest_int_distance(alpha: f64) -> f64 {
    (alpha - alpha.round()).abs()
}

/// Law of `|X - X'|` for an independent copy `X'`, without the atom at 0.
/// The symmetrized law is symmetric, so `⟨X* d⟩` only depends on `|X*|`.
fn symmetrized_abs(x: &LatticeDistribution) -> Vec<(u64, f64)> {
    let mut map: BTreeMap<u64, f64> = BTreeMap::new();
    for &(a, p) in x.atoms() {
        for &(b, q) in x.atoms() {
            if a != b {
                *map.entry(a.abs_diff(b)).or_insert(0.0) += p * q;
            }
        }
    }
    map.into_iter().collect()
}

fn h_from_sym(sym: &[(u64, f64)], d: f64) -> f64 {
    sym.iter()
        .map(|&(y, q)| q * nearest_int_distance(y as f64 * d).powi(2))
        .sum()
}

/// `H(X, d) = E⟨X* d⟩²` with `X* = X - X'` computed exactly.
pub fn h_param(x: &LatticeDistribution, d: f64) -> f64 {
    h_from_sym(&symmetrized_abs(x), d)
}

/// An infimum over an interval together with a point attaining it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Infimum {
    pub value: f64,
    pub argmin: f64,
}

/// `H_D(X) = inf_{1/(4D) ≤ d ≤ 1/(2D)} H(X, d)`.
///
/// `H(X, ·)` is a sum of quadratics `q (|y| d - r)²` whose nearest integer `r`
/// changes only where `|y| d` crosses a half-integer. Sweeping those points
/// in order and minimizing each quadratic piece gives the exact infimum.
pub fn h_d_param(x: &LatticeDistribution, big_d: u64) -> Infimum {
    assert!(big_d >= 1, "D must be positive");
    let sym = symmetrized_abs(x);
    let lo = 1.0 / (4.0 * big_d as f64);
    let hi = 1.0 / (2.0 * big_d as f64);
    if sym.is_empty() {
        return Infimum { value: 0.0, argmin: lo };
    }
    let mut rs: Vec<f64> = sym.iter().map(|&(y, _)| (y as f64 * lo + 0.5).floor()).collect();
    let mut events: Vec<(f64, usize)> = Vec::new();
    for (j, &(y, _)) in sym.iter().enumerate() {
        let mut k = rs[j];
        loop {
            let bp = (k + 0.5) / y as f64;
            if bp >= hi {
                break;
            }
            if bp > lo {
                events.push((bp, j));
            }
            k += 1.0;
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for (j, &(y, q)) in sym.iter().enumerate() {
        let y = y as f64;
        a += q * y * y;
        b += q * y * rs[j];
        c += q * rs[j] * rs[j];
    }
    let mut best = Infimum {
        value: f64::INFINITY,
        argmin: lo,
    };
    let consider = |d: f64, best: &mut Infimum| {
        let v = h_from_sym(&sym, d);
        if v < best.value {
            *best = Infimum { value: v, argmin: d };
        }
    };
    let mut start = lo;
    let mut idx = 0;
    loop {
        let end = if idx < events.len() { events[idx].0 } else { hi };
        let d_star = (b / a).clamp(start, end);
        consider(d_star, &mut best);
        consider(start, &mut best);
        if idx >= events.len() {
            consider(hi, &mut best);
            break;
        }
        // all breakpoints at this location
        while idx < events.len() && events[idx].0 == end {
            let j = events[idx].1;
            let (y, q) = (sym[j].0 as f64, sym[j].1);
            b += q * y;
            c += q * (2.0 * rs[j] + 1.0);
            rs[j] += 1.0;
            idx += 1;
        }
        start = end;
    }
    let _ = c;
    best
}

/// Grid search with golden-section refinement for `H_D(X)`; kept as an
/// independent cross-check of [`h_d_param`].
pub fn h_d_param_grid(x: &LatticeDistribution, big_d: u64, points: usize) -> Infimum {
    let sym = symmetrized_abs(x);
    let lo = 1.0 / (4.0 * big_d as f64);
    let hi = 1.0 / (2.0 * big_d as f64);
    let step = (hi - lo) / points as f64;
    let mut best = Infimum {
        value: f64::INFINITY,
        argmin: lo,
    };
    for i in 0..=points {
        let d = lo + step * i as f64;
        let v = h_from_sym(&sym, d);
        if v < best.value {
            best = Infimum { value: v, argmin: d };
        }
    }
    let (mut a, mut b) = ((best.argmin - step).max(lo), (best.argmin + step).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if h_from_sym(&sym, c) < h_from_sym(&sym, d) {
            b = d;
        } else {
            a = c;
        }
    }
    let mid = 0.5 * (a + b);
    let v = h_from_sym(&sym, mid);
    if v < best.value {
        best = Infimum { value: v, argmin: mid };
    }
    best
}

/// `D(X, d) = inf_α E⟨(X - α) d⟩²`, minimized exactly over one period of `α d`.
pub fn d_param(x: &LatticeDistribution, d: f64) -> f64 {
    let shifts: Vec<(f64, f64)> = x
        .atoms()
        .iter()
        .map(|&(v, p)| ((v as f64 * d).rem_euclid(1.0), p))
        .collect();
    let eval = |beta: f64| -> f64 {
        shifts
            .iter()
            .map(|&(c, p)| p * nearest_int_distance(beta + c).powi(2))
            .sum()
    };
    let mut cuts: Vec<f64> = shifts.iter().map(|&(c, _)| (0.5 - c).rem_euclid(1.0)).collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    let mut best = f64::INFINITY;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        best = best.min(eval(a));
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let star: f64 = shifts
            .iter()
            .map(|&(c, p)| p * ((mid + c).round() - c))
            .sum();
        best = best.min(eval(star.clamp(a, b)));
    }
    best
}

/// `w(x) = max |x_i - x_ℓ| / gcd(|x_i - x_ℓ|, |x_j - x_ℓ|)` over distinct indices.
pub fn w_of_atoms(values: &[i64]) -> Result<u64, LatDistError> {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.len() < 3 {
        return Err(LatDistError::InvalidArgument(format!(
            "w needs at least 3 distinct values, got {}",
            v.len()
        )));
    }
    let mut best = 0;
    for (l, &xl) in v.iter().enumerate() {
        for (i, &xi) in v.iter().enumerate() {
            if i == l {
                continue;
            }
            let a = xi.abs_diff(xl);
            for (j, &xj) in v.iter().enumerate() {
                if j == l || j == i {
                    continue;
                }
                best = best.max(a / gcd(a, xj.abs_diff(xl)));
            }
        }
    }
    Ok(best)
}

/// `min_i P(X = x_i) / (16 k (w(x) h)²)`, the explicit lower bound for `H_h(X)`.
pub fn h_lower_bound(x: &LatticeDistribution) -> Result<f64, LatDistError> {
    let values: Vec<i64> = x.atoms().iter().map(|a| a.0).collect();
    let w = w_of_atoms(&values)? as f64;
    let h = x.step() as f64;
    let k = x.len() as f64;
    let pmin = x.atoms().iter().map(|a| a.1).fold(f64::INFINITY, f64::min);
    Ok(pmin / (16.0 * k * (w * h).powi(2)))
}

/// Result of comparing an exact convolution with the Gaussian lattice density.
#[derive(Clone, Debug, PartialEq)]
pub struct LltCheck {
    pub n: usize,
    /// `sup_w |P(S_n = w) - h/√(2πnσ²) e^{-w²/(2nσ²)}|` over the lattice of `S_n`.
    pub lhs_sup: f64,
    pub argsup: i64,
    /// `32hγ/(σ⁴n) + 6γ/(hσ²n H_h)`.
    pub rhs_corollary: f64,
    /// `32hγ/(σ⁴n) + (h/π) ∫_{σ²/4γ}^{π/h} |φ(t)|^n dt`.
    pub rhs_theorem: f64,
    pub integral: f64,
    pub sigma2: f64,
    pub gamma: f64,
    pub h: u64,
    pub h_h: f64,
    pub holds: bool,
    pub holds_theorem: bool,
}

/// Compares `P(S_n = ·)` for `n` iid copies of the mean-zero `x` with the
/// Gaussian lattice density and evaluates both explicit error bounds.
pub fn llt_bound_check(x: &LatticeDistribution, n: usize) -> Result<LltCheck, LatDistError> {
    let mean = x.mean();
    if mean.abs() > 1e-10 {
        return Err(LatDistError::NotMeanZero(mean));
    }
    if x.len() < 2 {
        return Err(LatDistError::InvalidArgument("need at least two atoms".into()));
    }
    if n == 0 {
        return Err(LatDistError::InvalidArgument("n must be positive".into()));
    }
    let dense = x.convolve_dense(n)?;
    let h = x.step();
    let hf = h as f64;
    let sigma2 = x.variance();
    let gamma = x.abs_moment(3);
    let nf = n as f64;
    let normal = |w: i64| hf / (2.0 * PI * nf * sigma2).sqrt() * (-(w as f64).powi(2) / (2.0 * nf * sigma2)).exp();

    let mut lhs_sup = 0.0;
    let mut argsup = dense.min;
    let mut consider = |w: i64, p: f64| {
        let gap = (p - normal(w)).abs();
        if gap > lhs_sup {
            lhs_sup = gap;
            argsup = w;
        }
    };
    for (i, &p) in dense.probs.iter().enumerate() {
        consider(dense.value(i), p);
    }
    // beyond the support the density decreases outward, so the first lattice
    // point on each side dominates the rest
    consider(dense.min - h as i64, 0.0);
    consider(dense.value(dense.probs.len() - 1) + h as i64, 0.0);

    let h_h = h_d_param(x, h).value;
    let first = 32.0 * hf * gamma / (sigma2 * sigma2 * nf);
    let rhs_corollary = first + 6.0 * gamma / (hf * sigma2 * nf * h_h);
    let (a, b) = (sigma2 / (4.0 * gamma), PI / hf);
    let integral = if a < b {
        integrate(|t| x.char_abs(t).powi(n as i32), a, b)
    } else {
        0.0
    };
    let rhs_theorem = first + hf / PI * integral;
    Ok(LltCheck {
        n,
        lhs_sup,
        argsup,
        rhs_corollary,
        rhs_theorem,
        integral,
        sigma2,
        gamma,
        h,
        h_h,
        holds: lhs_sup <= rhs_corollary,
        holds_theorem: lhs_sup <= rhs_theorem,
    })
}

/// Adaptive Simpson quadrature over 256 panels.
fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    const PANELS: usize = 256;
    let width = (b - a) / PANELS as f64;
    let tol = 1e-13;
    (0..PANELS)
        .map(|i| {
            let (l, r) = (a + width * i as f64, a + width * (i + 1) as f64);
            let (fl, fm, fr) = (f(l), f(0.5 * (l + r)), f(r));
            let whole = (r - l) / 6.0 * (fl + 4.0 * fm + fr);
            simpson(&f, l, r, fl, fm, fr, whole, tol / PANELS as f64, 40)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist(a: &[(i64, f64)]) -> LatticeDistribution {
        LatticeDistribution::new(a.to_vec()).unwrap()
    }

    #[test]
    fn nearest_int_examples() {
        assert!((nearest_int_distance(0.3) - 0.3).abs() < 1e-15);
        assert!((nearest_int_distance(1.5) - 0.5).abs() < 1e-15);
        assert!((nearest_int_distance(-0.7) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn h_examples() {
        let point = LatticeDistribution::point_mass(4);
        assert_eq!(h_param(&point, 0.37), 0.0);
        let pm = dist(&[(-1, 0.5), (1, 0.5)]);
        assert!(h_param(&pm, 0.5).abs() < 1e-15);
        assert!((h_param(&pm, 0.25) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn h_d_examples() {
        assert_eq!(h_d_param(&LatticeDistribution::point_mass(0), 3).value, 0.0);
        let b = dist(&[(0, 0.5), (1, 0.5)]);
        let inf = h_d_param(&b, 1);
        assert!((inf.value - 0.03125).abs() < 1e-15);
        assert!((inf.argmin - 0.25).abs() < 1e-15);
        // a copy of `b` stretched onto 2ℤ has the same window infimum at D = 2
        let b2 = dist(&[(0, 0.5), (2, 0.5)]);
        let inf2 = h_d_param(&b2, 2);
        assert!((inf2.value - inf.value).abs() < 1e-15);
        assert!((inf2.argmin - inf.argmin / 2.0).abs() < 1e-15);
    }

    #[test]
    fn d_param_matches_brute_force() {
        let x = dist(&[(-1, 0.2), (0, 0.1), (2, 0.4), (5, 0.3)]);
        for &d in &[0.05, 0.13, 0.25, 0.4] {
            let exact = d_param(&x, d);
            let brute = (0..20_000)
                .map(|i| {
                    let beta = i as f64 / 20_000.0;
                    x.atoms()
                        .iter()
                        .map(|&(v, p)| p * nearest_int_distance(beta + v as f64 * d).powi(2))
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(exact <= brute + 1e-12);
            assert!(brute - exact < 1e-6, "{exact} vs {brute}");
        }
    }

    #[test]
    fn w_examples() {
        assert_eq!(w_of_atoms(&[0, 1, 2]).unwrap(), 2);
        assert_eq!(w_of_atoms(&[0, 1, 3]).unwrap(), 3);
        assert_eq!(w_of_atoms(&[0, 7, 14]).unwrap(), 2);
        assert!(w_of_atoms(&[0, 1, 1]).is_err());
    }

    #[test]
    fn llt_symmetric_walk() {
        let pm = dist(&[(-1, 0.5), (1, 0.5)]);
        let c = llt_bound_check(&pm, 100).unwrap();
        assert!(c.holds && c.holds_theorem);
        assert_eq!(c.h, 2);
        assert!(llt_bound_check(&dist(&[(-1, 0.7), (1, 0.3)]), 10).is_err());
    }

    #[test]
    fn symmetric_gap_decays_faster_than_one_over_n() {
        // the 1/n term of the expansion carries the third cumulant, which
        // vanishes for a symmetric step, leaving an n^{-3/2} gap
        let pm = dist(&[(-1, 0.5), (1, 0.5)]);
        let a = llt_bound_check(&pm, 1000).unwrap().lhs_sup;
        let b = llt_bound_check(&pm, 2000).unwrap().lhs_sup;
        assert!((a / b - 2f64.powf(1.5)).abs() < 0.1, "{}", a / b);
    }

    fn arb_dist(min_atoms: usize) -> impl Strategy<Value = LatticeDistribution> {
        prop::collection::btree_map(-6i64..10, 0.05f64..1.0, min_atoms..6).prop_map(|m| {
            let total: f64 = m.values().sum();
            LatticeDistribution::new(m.into_iter().map(|(v, w)| (v, w / total)).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn exact_window_infimum_agrees_with_grid(x in arb_dist(2), big_d in 1u64..4) {
            let exact = h_d_param(&x, big_d);
            let grid = h_d_param_grid(&x, big_d, 10_000);
            prop_assert!(exact.value <= grid.value + 1e-12);
            prop_assert!(grid.value - exact.value < 1e-6);
            prop_assert!((h_param(&x, exact.argmin) - exact.value).abs() < 1e-15);
        }

        #[test]
        fn d_sandwiches_h(x in arb_dist(2), d in 0.01f64..0.5) {
            let dv = d_param(&x, d);
            let hv = h_param(&x, d);
            prop_assert!(dv <= hv + 1e-12);
            prop_assert!(hv <= 4.0 * dv + 1e-12);
        }
    }
}
