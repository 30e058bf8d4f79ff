//! The random walk `W_t = s + β_1 + … + β_t` with iid lattice steps, its
//! first hitting time of 0, and exact dynamic programs for the identities
//! that bound that hitting time.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use thiserror::Error;

use crate::latdist::{LatDistError, LatticeDistribution, ThetaSolution, MAX_SUPPORT};

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("step law has no atom at -1")]
    NoDownStep,
    #[error("step law has an atom at {0} < -1")]
    BelowMinusOne(i64),
    #[error("time must be positive")]
    ZeroTime,
    #[error(transparent)]
    LatDist(#[from] LatDistError),
}

/// A walk started at `s` with iid steps drawn from `step`.
///
/// Steps are at least -1, so the walk cannot jump over 0 and the hitting
/// time is also the first time the walk leaves the positive half-line.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkSpec {
    step: LatticeDistribution,
    start: u64,
}

impl WalkSpec {
    pub fn new(step: LatticeDistribution, start: u64) -> Result<Self, WalkError> {
        if step.min_value() < -1 {
            return Err(WalkError::BelowMinusOne(step.min_value()));
        }
        if step.prob(-1) <= 0.0 {
            return Err(WalkError::NoDownStep);
        }
        Ok(Self { step, start })
    }

    pub fn step(&self) -> &LatticeDistribution {
        &self.step
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    /// The same walk with the step law tilted by `θ`.
    pub fn tilted(&self, theta: f64) -> Self {
        Self {
            step: self.step.tilt(theta),
            start: self.start,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopOutcome {
    Hit(u64),
    Censored(u64),
}

impl StopOutcome {
    pub fn hit(self) -> Option<u64> {
        match self {
            StopOutcome::Hit(t) => Some(t),
            StopOutcome::Censored(_) => None,
        }
    }
}

/// Runs the walk until it hits 0 or `cap` steps have been taken.
pub fn simulate_stop<R: Rng + ?Sized>(spec: &WalkSpec, cap: u64, rng: &mut R) -> StopOutcome {
    let atoms = spec.step.atoms();
    let sampler = WeightedIndex::new(atoms.iter().map(|a| a.1)).expect("positive masses");
    let mut w = spec.start as i64;
    if w == 0 {
        return StopOutcome::Hit(0);
    }
    for t in 1..=cap {
        w += atoms[sampler.sample(rng)].0;
        if w == 0 {
            return StopOutcome::Hit(t);
        }
    }
    StopOutcome::Censored(cap)
}

/// `P(W_t = 0)` by exact convolution.
pub fn exact_hit_prob(spec: &WalkSpec, t: u64) -> Result<f64, WalkError> {
    if t == 0 {
        return Ok(if spec.start == 0 { 1.0 } else { 0.0 });
    }
    let dense = spec.step.convolve_dense(t as usize)?;
    Ok(dense.prob(-(spec.start as i64)))
}

/// `P(τ = t)` for `t = 0..=horizon`, by a dynamic program over positive levels.
///
/// A walk at level `ℓ` needs at least `ℓ` more steps to reach 0, so levels
/// above the remaining horizon are dropped without changing any entry.
pub fn exact_stop_series(spec: &WalkSpec, horizon: u64) -> Result<Vec<f64>, WalkError> {
    let mut out = vec![0.0; horizon as usize + 1];
    let s = spec.start as usize;
    if s == 0 {
        out[0] = 1.0;
        return Ok(out);
    }
    if s as u64 > horizon {
        return Ok(out);
    }
    let top = horizon as usize;
    if top + 1 > MAX_SUPPORT {
        return Err(LatDistError::SupportTooLarge(top + 1).into());
    }
    let atoms = spec.step.atoms();
    let mut cur = vec![0.0; top + 1];
    cur[s] = 1.0;
    for (t, slot) in out.iter_mut().enumerate().skip(1) {
        let cap = top - t;
        let mut next = vec![0.0; cap + 1];
        for (level, &c) in cur.iter().enumerate().skip(1) {
            if c == 0.0 {
                continue;
            }
            for &(b, p) in atoms {
                let to = level as i64 + b;
                if to as usize <= cap {
                    next[to as usize] += c * p;
                }
            }
        }
        *slot = next[0];
        next[0] = 0.0;
        cur = next;
    }
    Ok(out)
}

/// `P(τ = t)`.
pub fn exact_stop_prob(spec: &WalkSpec, t: u64) -> Result<f64, WalkError> {
    Ok(exact_stop_series(spec, t)?[t as usize])
}

/// `P(τ ≥ t)`: the mass still positive after `t - 1` steps, from an unpruned
/// dynamic program (it includes the event that the walk never hits 0).
pub fn survival(spec: &WalkSpec, t: u64) -> Result<f64, WalkError> {
    if t == 0 || spec.start == 0 {
        return Ok(if t == 0 { 1.0 } else { 0.0 });
    }
    let steps = (t - 1) as usize;
    let max_up = spec.step.max_value().max(0) as usize;
    let top = steps
        .checked_mul(max_up)
        .and_then(|x| x.checked_add(spec.start as usize))
        .filter(|&x| x < MAX_SUPPORT)
        .ok_or(LatDistError::SupportTooLarge(usize::MAX))?;
    let atoms = spec.step.atoms();
    let mut cur = vec![0.0; top + 1];
    cur[spec.start as usize] = 1.0;
    let mut reach = spec.start as usize;
    for _ in 0..steps {
        let mut next = vec![0.0; top + 1];
        for (level, &c) in cur.iter().enumerate().take(reach + 1).skip(1) {
            if c == 0.0 {
                continue;
            }
            for &(b, p) in atoms {
                next[(level as i64 + b) as usize] += c * p;
            }
        }
        next[0] = 0.0;
        reach += max_up;
        cur = next;
    }
    Ok(cur.iter().sum())
}

/// Both sides of `P(τ = t) ≤ (s/t) P(W_t = 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpitzerCheck {
    pub stop: f64,
    pub hit: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn spitzer_check(spec: &WalkSpec, t: u64) -> Result<SpitzerCheck, WalkError> {
    if t == 0 {
        return Err(WalkError::ZeroTime);
    }
    let stop = exact_stop_prob(spec, t)?;
    let hit = exact_hit_prob(spec, t)?;
    let bound = spec.start as f64 / t as f64 * hit;
    Ok(SpitzerCheck {
        stop,
        hit,
        bound,
        holds: stop <= bound + 1e-12,
    })
}

/// Both sides of `P(W_t = 0) = φ(θ)^t e^{θs} P(W_{θ,t} = 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltCheck {
    pub direct: f64,
    pub tilted: f64,
    pub rel_error: f64,
    pub holds: bool,
}

pub fn tilting_identity_check(spec: &WalkSpec, theta: f64, t: u64) -> Result<TiltCheck, WalkError> {
    let direct = exact_hit_prob(spec, t)?;
    let phi = spec.step.mgf(theta);
    let tilted = phi.powi(t as i32) * (theta * spec.start as f64).exp() * exact_hit_prob(&spec.tilted(theta), t)?;
    let scale = direct.abs().max(tilted.abs());
    let rel_error = if scale == 0.0 { 0.0 } else { (direct - tilted).abs() / scale };
    Ok(TiltCheck {
        direct,
        tilted,
        rel_error,
        holds: rel_error <= 1e-12,
    })
}

fn prefactor(spec: &WalkSpec, sol: &ThetaSolution) -> f64 {
    let s = spec.start as f64;
    2.0 * s * (sol.theta0 * s).exp() / sol.phi2_at.sqrt()
}

/// `2h s e^{θ0 s} φ''(θ0)^{-1/2} φ(θ0)^t / t^{3/2}`, the pointwise bound on `P(τ = t)`
/// valid for `t ≥ T_β`.
pub fn ub_up_bound(spec: &WalkSpec, t: f64) -> Result<f64, WalkError> {
    let sol = spec.step.theta0_solve()?;
    let h = spec.step.step() as f64;
    Ok(h * prefactor(spec, &sol) * sol.phi_at.powf(t) / t.powf(1.5))
}

/// `2s e^{θ0 s} φ''(θ0)^{-1/2} φ(θ0)^{(1+ε)T} / (T^{3/2} (1 - φ(θ0)))`, the bound on
/// `P(τ ≥ (1+ε)T)` for `T = T_β`.
pub fn tail_bound(spec: &WalkSpec, t_beta: f64, eps: f64) -> Result<f64, WalkError> {
    let sol = spec.step.theta0_solve()?;
    Ok(prefactor(spec, &sol) * sol.phi_at.powf((1.0 + eps) * t_beta)
        / (t_beta.powf(1.5) * (1.0 - sol.phi_at)))
}

/// Exact tail against [`tail_bound`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailCheck {
    pub from: u64,
    /// `Σ_{from ≤ t ≤ cutoff} P(τ = t)` plus the certified remainder beyond `cutoff`.
    pub tail: f64,
    pub cutoff: u64,
    pub remainder: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Sums `P(τ = t)` over `t ≥ ⌈(1+ε)T⌉` up to the first cutoff at which the
/// geometric tail bound certifies a remainder below `1e-14`.
pub fn tail_check(spec: &WalkSpec, t_beta: f64, eps: f64) -> Result<TailCheck, WalkError> {
    let sol = spec.step.theta0_solve()?;
    let bound = tail_bound(spec, t_beta, eps)?;
    let from = ((1.0 + eps) * t_beta).ceil().max(1.0) as u64;
    let pre = prefactor(spec, &sol);
    let remainder_after = |c: u64| pre * sol.phi_at.powf(c as f64) / ((c as f64).powf(1.5) * (1.0 - sol.phi_at));
    let mut cutoff = from.max(t_beta.ceil() as u64);
    while remainder_after(cutoff) >= 1e-14 {
        cutoff += cutoff.max(16) / 4;
    }
    let series = exact_stop_series(spec, cutoff)?;
    let remainder = remainder_after(cutoff);
    let tail = series[from as usize..].iter().sum::<f64>() + remainder;
    Ok(TailCheck {
        from,
        tail,
        cutoff,
        remainder,
        bound,
        holds: tail <= bound,
    })
}
