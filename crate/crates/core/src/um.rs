//! Uniform simple graphs with a given degree sequence: a rejection sampler on
//! top of the configuration model, a switching Markov chain, and the
//! vertex-by-vertex exploration with its dominating walk `Z_t`.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cm::{is_simple_fast, janson_asymptotic, sample_cm};
use crate::degseq::{DegreeSequence, SubcritCertificate};
use crate::graph::MultiGraph;
use crate::rng::trial_rng;

#[derive(Debug, Error, PartialEq)]
pub enum UmError {
    #[error("degree sequence is not graphical")]
    NotGraphical,
    #[error("no simple sample in {0} attempts")]
    AttemptsExhausted(usize),
    #[error("simple configuration models are too rare (estimate {0:.3e}); use the switching sampler")]
    TooRare(f64),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("graph degrees do not match the sequence")]
    DegreeMismatch,
}

/// Lowest acceptance estimate the rejection sampler will attempt.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

/// Resamples the configuration model until it is simple.
pub fn sample_um_rejection<R: Rng + ?Sized>(
    d: &DegreeSequence,
    max_attempts: usize,
    rng: &mut R,
) -> Result<(MultiGraph, usize), UmError> {
    let estimate = janson_asymptotic(d);
    if estimate < MIN_ACCEPTANCE {
        return Err(UmError::TooRare(estimate));
    }
    for attempt in 1..=max_attempts {
        let g = sample_cm(d, rng);
        if is_simple_fast(&g) {
            return Ok((g, attempt));
        }
    }
    Err(UmError::AttemptsExhausted(max_attempts))
}

/// A simple realization built greedily: the vertex of largest remaining degree
/// is joined to the vertices of next largest remaining degrees.
pub fn havel_hakimi(d: &DegreeSequence) -> Result<MultiGraph, UmError> {
    let degrees = d.degrees();
    let n = degrees.len();
    let mut heap: std::collections::BinaryHeap<(usize, usize)> =
        degrees.iter().enumerate().map(|(v, &k)| (k, v)).collect();
    let mut edges = Vec::with_capacity(d.m() as usize / 2);
    let mut taken = Vec::new();
    while let Some((k, v)) = heap.pop() {
        if k == 0 {
            break;
        }
        taken.clear();
        for _ in 0..k {
            match heap.pop() {
                Some((r, u)) if r > 0 => taken.push((r, u)),
                _ => return Err(UmError::NotGraphical),
            }
        }
        for &(r, u) in &taken {
            edges.push((v, u));
            heap.push((r - 1, u));
        }
    }
    Ok(MultiGraph::from_edges_unchecked(n, edges))
}

/// A switching: oriented edges `(a,b)` and `(c,d)` become `ac` and `bd`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SwitchMove {
    pub first: usize,
    pub second: usize,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl SwitchMove {
    /// The move that undoes this one once it has been applied.
    pub fn reverse(&self) -> Self {
        Self {
            first: self.first,
            second: self.second,
            a: self.a,
            b: self.c,
            c: self.b,
            d: self.d,
        }
    }
}

/// Switching chain on simple graphs with a fixed degree sequence.
///
/// A proposal picks an ordered pair of distinct edges and an orientation of
/// each, uniformly. The number of proposals is the same from every state and
/// a legal switching is undone by exactly one proposal, so the transition
/// matrix is symmetric and the stationary law is uniform.
#[derive(Clone, Debug)]
pub struct SwitchChain {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl SwitchChain {
    pub fn new(g: &MultiGraph) -> Result<Self, UmError> {
        if !g.is_simple() {
            return Err(UmError::NotGraphical);
        }
        Ok(Self {
            n: g.vertex_count(),
            edges: g.edges().to_vec(),
            adj: g.adjacency(),
        })
    }

    pub fn from_sequence(d: &DegreeSequence) -> Result<Self, UmError> {
        Self::new(&havel_hakimi(d)?)
    }

    pub fn graph(&self) -> MultiGraph {
        MultiGraph::from_edges_unchecked(self.n, self.edges.clone())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let (x, y) = if self.adj[u].len() <= self.adj[v].len() { (u, v) } else { (v, u) };
        self.adj[x].contains(&y)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// The move for proposal `(i, j, orientation bits)`, if legal.
    pub fn proposal(&self, i: usize, j: usize, flip_i: bool, flip_j: bool) -> Option<SwitchMove> {
        if i == j {
            return None;
        }
        let (mut a, mut b) = self.edges[i];
        let (mut c, mut d) = self.edges[j];
        if flip_i {
            std::mem::swap(&mut a, &mut b);
        }
        if flip_j {
            std::mem::swap(&mut c, &mut d);
        }
        if a == c || b == d || self.has_edge(a, c) || self.has_edge(b, d) {
            return None;
        }
        Some(SwitchMove {
            first: i,
            second: j,
            a,
            b,
            c,
            d,
        })
    }

    fn unlink(&mut self, u: usize, v: usize) {
        let p = self.adj[u].iter().position(|&x| x == v).expect("edge present");
        self.adj[u].swap_remove(p);
        let p = self.adj[v].iter().position(|&x| x == u).expect("edge present");
        self.adj[v].swap_remove(p);
    }

    pub fn apply(&mut self, mv: &SwitchMove) {
        self.unlink(mv.a, mv.b);
        self.unlink(mv.c, mv.d);
        self.adj[mv.a].push(mv.c);
        self.adj[mv.c].push(mv.a);
        self.adj[mv.b].push(mv.d);
        self.adj[mv.d].push(mv.b);
        self.edges[mv.first] = (mv.a, mv.c);
        self.edges[mv.second] = (mv.b, mv.d);
    }

    /// One proposed switching; returns whether it was applied.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let m = self.edges.len();
        if m < 2 {
            return false;
        }
        let i = rng.gen_range(0..m);
        let j = rng.gen_range(0..m);
        let (fi, fj) = (rng.gen::<bool>(), rng.gen::<bool>());
        match self.proposal(i, j, fi, fj) {
            Some(mv) => {
                self.apply(&mv);
                true
            }
            None => false,
        }
    }

    pub fn run<R: Rng + ?Sized>(&mut self, steps: u64, rng: &mut R) -> u64 {
        (0..steps).filter(|_| self.step(rng)).count() as u64
    }
}

/// Default burn-in: `20 m` proposals.
pub fn default_burn_in(d: &DegreeSequence) -> u64 {
    20 * d.m()
}

/// State of the switching chain after `burn_in` proposals from the greedy realization.
pub fn sample_um_switching<R: Rng + ?Sized>(
    d: &DegreeSequence,
    burn_in: u64,
    rng: &mut R,
) -> Result<MultiGraph, UmError> {
    let mut chain = SwitchChain::from_sequence(d)?;
    chain.run(burn_in, rng);
    Ok(chain.graph())
}

/// Canonical key of a simple graph: its sorted normalized edge list.
pub fn edge_key(g: &MultiGraph) -> Vec<(usize, usize)> {
    let mut e: Vec<(usize, usize)> = g.edges().iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    e.sort_unstable();
    e
}

/// Exact transition probabilities of the switching chain on the states
/// reachable from `start`, keyed by edge set.
pub fn transition_matrix(start: &MultiGraph) -> Result<HashMap<Vec<(usize, usize)>, HashMap<Vec<(usize, usize)>, f64>>, UmError> {
    let mut out = HashMap::new();
    let mut queue = VecDeque::new();
    let mut seen = HashSet::new();
    seen.insert(edge_key(start));
    queue.push_back(SwitchChain::new(start)?);
    while let Some(chain) = queue.pop_front() {
        let key = edge_key(&chain.graph());
        let m = chain.edge_count();
        let total = (4 * m * m).max(1) as f64;
        let mut row: HashMap<Vec<(usize, usize)>, f64> = HashMap::new();
        let mut moved = 0usize;
        for i in 0..m {
            for j in 0..m {
                for fi in [false, true] {
                    for fj in [false, true] {
                        if let Some(mv) = chain.proposal(i, j, fi, fj) {
                            let mut next = chain.clone();
                            next.apply(&mv);
                            let nk = edge_key(&next.graph());
                            *row.entry(nk.clone()).or_insert(0.0) += 1.0 / total;
                            moved += 1;
                            if seen.insert(nk) {
                                queue.push_back(next);
                            }
                        }
                    }
                }
            }
        }
        *row.entry(key.clone()).or_insert(0.0) += 1.0 - moved as f64 / total;
        out.insert(key, row);
    }
    Ok(out)
}

/// All simple graphs on `[n]` with the given degree vector (indexed by vertex), by brute force.
pub fn enumerate_simple_graphs(degrees: &[usize]) -> Vec<Vec<(usize, usize)>> {
    let n = degrees.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let m2: usize = degrees.iter().sum();
    assert!(pairs.len() <= 28, "enumeration only for n ≤ 8");
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        if mask.count_ones() as usize * 2 != m2 {
            continue;
        }
        let mut deg = vec![0usize; n];
        let mut edges = Vec::new();
        for (b, &(u, v)) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                deg[u] += 1;
                deg[v] += 1;
                edges.push((u, v));
            }
        }
        if deg == degrees {
            out.push(edges);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UmEvent {
    Start,
    /// A new vertex joined through an edge from the explored set, with `k`
    /// edges into the explored set in total.
    Vertex { w: usize, k: usize },
    Restart { w: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UmRow {
    pub t: usize,
    /// `|V_t|`.
    pub v_size: usize,
    /// `X_t = |E(V_t, [n] \ V_t)|`.
    pub x: usize,
    /// `M_t`: degree sum outside `V_t`.
    pub m: u64,
    /// `L_t`: degree-1 vertices outside `V_t`.
    pub l: usize,
    /// `η_t = d_{w_t} - 2` (0 at `t = 0`).
    pub eta: i64,
    pub z: f64,
    pub event: UmEvent,
}

/// A recorded run of the exploration from `V_0 = S ∪ {v}`.
#[derive(Clone, Debug, PartialEq)]
pub struct UmTrace {
    pub rows: Vec<UmRow>,
    /// `T = ⌈m0 / |Q0|⌉`.
    pub t_value: u64,
    pub gamma: u64,
    /// `Z_0 = 2 |Q0| T`.
    pub z0: f64,
    /// Degree sum of `V_0`.
    pub v0_degree_sum: u64,
    /// First `t ≥ 1` with `X_t = 0`, if reached.
    pub first_x_zero: Option<usize>,
    /// First `t` with `Z_t ≤ 0`, if reached.
    pub first_z_zero: Option<usize>,
    /// Vertex counts of the epochs between restarts (only complete when the run covers `[n]`).
    pub epoch_sizes: Vec<usize>,
    pub n1: usize,
    pub m_total: u64,
}

impl UmTrace {
    /// `τ_X = inf{t : X_t = 0} ∧ (γT + 1)`.
    pub fn tau_x(&self) -> usize {
        self.capped(self.first_x_zero, self.gamma)
    }

    /// `τ_Z = inf{t : Z_t ≤ 0} ∧ (γT + 1)`.
    pub fn tau_z(&self) -> usize {
        self.tau_z_with(self.gamma)
    }

    /// `τ_Z` capped with another `γ`, for nested comparisons on one run.
    pub fn tau_z_with(&self, gamma: u64) -> usize {
        self.capped(self.first_z_zero, gamma)
    }

    fn capped(&self, first: Option<usize>, gamma: u64) -> usize {
        let cap = (gamma * self.t_value + 1) as usize;
        first.map_or(cap, |t| t.min(cap))
    }

    /// Steps `t < τ_X` at which `X_{t+1} > Z_{t+1}`.
    pub fn domination_violations(&self) -> usize {
        let tau = self.tau_x();
        self.rows
            .iter()
            .filter(|r| r.t <= tau && (r.x as f64) > r.z + 1e-9)
            .count()
    }

    /// Checks the deterministic items of the exploration lemma up to
    /// `min(τ_X, γT)`: `Σ_{V_0} d ≤ 2|Q0|T`, `L_t ≥ n1/2` and `M_t ≥ m/3`.
    pub fn lemma_violations(&self) -> LemmaViolations {
        let horizon = self.tau_x().min((self.gamma * self.t_value) as usize);
        let rows = self.rows.iter().filter(|r| r.t <= horizon);
        let mut v = LemmaViolations {
            start_degree: (self.v0_degree_sum as f64 > self.z0 + 1e-9) as usize,
            ..Default::default()
        };
        for r in rows {
            if 2 * r.l < self.n1 {
                v.degree_one_supply += 1;
            }
            if 3 * r.m < self.m_total {
                v.remaining_mass += 1;
            }
        }
        v
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LemmaViolations {
    pub start_degree: usize,
    pub degree_one_supply: usize,
    pub remaining_mass: usize,
}

impl LemmaViolations {
    pub fn total(&self) -> usize {
        self.start_degree + self.degree_one_supply + self.remaining_mass
    }
}

/// Fenwick tree over vertex weights, for sampling proportional to degree.
#[derive(Clone, Debug)]
struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn new(weights: &[u64]) -> Self {
        let n = weights.len();
        let mut tree = vec![0; n + 1];
        for (i, &w) in weights.iter().enumerate() {
            let mut j = i + 1;
            while j <= n {
                tree[j] += w;
                j += j & j.wrapping_neg();
            }
        }
        Self { tree }
    }

    fn sub(&mut self, i: usize, w: u64) {
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] -= w;
            j += j & j.wrapping_neg();
        }
    }

    /// Smallest index whose prefix sum exceeds `target`.
    fn find(&self, mut target: u64) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            if pos + step <= n && self.tree[pos + step] <= target {
                pos += step;
                target -= self.tree[pos];
            }
            step >>= 1;
        }
        pos
    }
}

/// Options for [`explore_um`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UmExploreOptions {
    pub gamma: u64,
    /// Keep going until every vertex is explored.
    pub to_completion: bool,
}

impl Default for UmExploreOptions {
    fn default() -> Self {
        Self {
            gamma: 80,
            to_completion: false,
        }
    }
}

/// Explores the fixed simple graph `g` from `V_0 = S ∪ {v}`, with `S` the
/// certificate's hub set, and advances `Z_t` alongside.
///
/// Adjacency lists are shuffled once, which plays the role of the uniform
/// edge orders. Unless `to_completion` is set, the run stops once both `X`
/// and `Z` have been resolved up to the cap `γT + 1`.
pub fn explore_um<R: Rng + ?Sized>(
    g: &MultiGraph,
    d: &DegreeSequence,
    cert: &SubcritCertificate,
    v: usize,
    opts: UmExploreOptions,
    rng: &mut R,
) -> Result<UmTrace, UmError> {
    if !cert.valid || cert.q0 >= 0.0 {
        return Err(UmError::InvalidCertificate(format!(
            "valid={}, Q0={}",
            cert.valid, cert.q0
        )));
    }
    let degrees = d.degrees();
    if g.degrees() != degrees {
        return Err(UmError::DegreeMismatch);
    }
    let n = degrees.len();
    let mut adj = g.adjacency();
    for list in adj.iter_mut() {
        list.shuffle(rng);
    }
    let t_value = cert.t_ceil();
    let z0 = 2.0 * cert.q0.abs() * t_value as f64;
    let cap = (opts.gamma * t_value + 1) as usize;

    let mut in_v = vec![false; n];
    let mut fen = Fenwick::new(&degrees.iter().map(|&k| k as u64).collect::<Vec<_>>());
    let n1 = degrees.iter().filter(|&&k| k == 1).count();
    let m_total = d.m();
    let mut m_out = m_total;
    let mut l_out = n1;
    let mut ptr = vec![0usize; n];
    let mut active: BTreeSet<usize> = BTreeSet::new();
    let mut x = 0usize;
    let mut v_size = 0usize;

    // adds w to V and returns the number of its edges into V before the addition
    let add = |w: usize,
                   in_v: &mut Vec<bool>,
                   active: &mut BTreeSet<usize>,
                   fen: &mut Fenwick,
                   m_out: &mut u64,
                   l_out: &mut usize,
                   x: &mut usize,
                   v_size: &mut usize| {
        let k = adj[w].iter().filter(|&&u| in_v[u]).count();
        in_v[w] = true;
        *v_size += 1;
        fen.sub(w, degrees[w] as u64);
        *m_out -= degrees[w] as u64;
        if degrees[w] == 1 {
            *l_out -= 1;
        }
        *x = *x + degrees[w] - 2 * k;
        if degrees[w] > k {
            active.insert(w);
        }
        k
    };

    let mut v0: Vec<usize> = cert.set_vertices(d.n()).collect();
    if !v0.contains(&v) {
        v0.push(v);
    }
    let v0_degree_sum = v0.iter().map(|&u| degrees[u] as u64).sum();
    for &u in &v0 {
        add(u, &mut in_v, &mut active, &mut fen, &mut m_out, &mut l_out, &mut x, &mut v_size);
    }
    let mut rows = vec![UmRow {
        t: 0,
        v_size,
        x,
        m: m_out,
        l: l_out,
        eta: 0,
        z: z0,
        event: UmEvent::Start,
    }];
    let mut z = z0;
    let mut first_x_zero = None;
    let mut first_z_zero = None;
    let mut epoch_sizes = vec![v_size];
    let mut t = 0usize;
    while v_size < n {
        if !opts.to_completion && t >= cap && first_x_zero.is_some() {
            break;
        }
        t += 1;
        let event = if x == 0 {
            let w = fen.find(rng.gen_range(0..m_out));
            add(w, &mut in_v, &mut active, &mut fen, &mut m_out, &mut l_out, &mut x, &mut v_size);
            epoch_sizes.push(1);
            UmEvent::Restart { w }
        } else {
            let w = loop {
                let &u = active.first().expect("X > 0 means some explored vertex has an outside edge");
                while ptr[u] < adj[u].len() && in_v[adj[u][ptr[u]]] {
                    ptr[u] += 1;
                }
                if ptr[u] < adj[u].len() {
                    break adj[u][ptr[u]];
                }
                active.remove(&u);
            };
            let k = add(w, &mut in_v, &mut active, &mut fen, &mut m_out, &mut l_out, &mut x, &mut v_size);
            *epoch_sizes.last_mut().expect("non-empty") += 1;
            UmEvent::Vertex { w, k }
        };
        let w = match event {
            UmEvent::Vertex { w, .. } | UmEvent::Restart { w } => w,
            UmEvent::Start => unreachable!(),
        };
        let eta = degrees[w] as i64 - 2;
        z += eta as f64;
        if x == 0 && first_x_zero.is_none() {
            first_x_zero = Some(t);
        }
        if z <= 0.0 && first_z_zero.is_none() {
            first_z_zero = Some(t);
        }
        rows.push(UmRow {
            t,
            v_size,
            x,
            m: m_out,
            l: l_out,
            eta,
            z,
            event,
        });
    }
    if x == 0 && first_x_zero.is_none() && t > 0 {
        first_x_zero = Some(t);
    }
    Ok(UmTrace {
        rows,
        t_value,
        gamma: opts.gamma,
        z0,
        v0_degree_sum,
        first_x_zero,
        first_z_zero,
        epoch_sizes,
        n1,
        m_total,
    })
}

/// Empirical moments of `η_{t+1}` at fixed times, pooled over fresh samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentRow {
    pub t: usize,
    pub samples: usize,
    pub mean: f64,
    pub second: f64,
    pub mean_se: f64,
    pub second_se: f64,
    /// `Q0 / 2`.
    pub mean_bound: f64,
    /// `4R`.
    pub second_bound: f64,
    pub mean_violation: bool,
    pub second_violation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    pub violations: usize,
    /// `Σ 1{d_{w_{t+1}} = 1}` over all recorded non-restart steps.
    pub degree_one_hits: f64,
    /// `Σ L_t / M_t` over the same steps.
    pub degree_one_expected: f64,
}

impl MomentReport {
    /// Observed over predicted degree-1 choices; the switching lemma puts this near 1.
    pub fn degree_one_ratio(&self) -> f64 {
        self.degree_one_hits / self.degree_one_expected
    }
}

/// Samples `trials` graphs with `sampler`, explores each from a uniform start
/// and compares the moments of `η_{t+1}` at the times `times` with `Q0/2` and `4R`.
pub fn increment_moment_check<F>(
    d: &DegreeSequence,
    cert: &SubcritCertificate,
    times: &[usize],
    trials: usize,
    seed: u64,
    sampler: F,
) -> Result<MomentReport, UmError>
where
    F: Fn(&DegreeSequence, &mut crate::rng::TrialRng) -> Result<MultiGraph, UmError> + Sync,
{
    let n = d.n() as usize;
    let horizon = times.iter().copied().max().unwrap_or(0) + 1;
    let traces: Vec<Result<UmTrace, UmError>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            let g = sampler(d, &mut rng)?;
            let v = rng.gen_range(0..n);
            let opts = UmExploreOptions {
                gamma: 80,
                to_completion: false,
            };
            let mut tr = explore_um(&g, d, cert, v, opts, &mut rng)?;
            tr.rows.truncate(horizon + 1);
            Ok(tr)
        })
        .collect();
    let traces: Vec<UmTrace> = traces.into_iter().collect::<Result<_, _>>()?;
    let r4 = 4.0 * d.r_value();
    let mut rows = Vec::new();
    for &t in times {
        let etas: Vec<f64> = traces
            .iter()
            .filter(|tr| tr.rows.len() > t + 1 && tr.rows[t].x > 0)
            .map(|tr| tr.rows[t + 1].eta as f64)
            .collect();
        let k = etas.len();
        if k < 2 {
            continue;
        }
        let mean = etas.iter().sum::<f64>() / k as f64;
        let second = etas.iter().map(|e| e * e).sum::<f64>() / k as f64;
        let var1 = etas.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
        let var2 = etas.iter().map(|e| (e * e - second).powi(2)).sum::<f64>() / (k - 1) as f64;
        let mean_se = (var1 / k as f64).sqrt();
        let second_se = (var2 / k as f64).sqrt();
        rows.push(MomentRow {
            t,
            samples: k,
            mean,
            second,
            mean_se,
            second_se,
            mean_bound: cert.q0 / 2.0,
            second_bound: r4,
            mean_violation: mean > cert.q0 / 2.0 + 3.0 * mean_se,
            second_violation: second > r4 + 3.0 * second_se,
        });
    }
    let (mut hits, mut expected) = (0.0, 0.0);
    let degrees = d.degrees();
    for tr in &traces {
        for w in tr.rows.windows(2) {
            if w[0].x > 0 {
                if let UmEvent::Vertex { w: u, .. } = w[1].event {
                    hits += (degrees[u] == 1) as u8 as f64;
                    expected += w[0].l as f64 / w[0].m as f64;
                }
            }
        }
    }
    let violations = rows
        .iter()
        .filter(|r| r.mean_violation || r.second_violation)
        .count();
    Ok(MomentReport {
        rows,
        violations,
        degree_one_hits: hits,
        degree_one_expected: expected,
    })
}

/// Fractions of runs with `τ_Z > γT` for each `γ`, from the same runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauZTail {
    pub gammas: Vec<u64>,
    pub fractions: Vec<f64>,
    pub lambda: f64,
    pub one_over_lambda: f64,
    pub trials: usize,
}

impl TauZTail {
    /// `fraction · λ` at each `γ`, the constant an `O(1/λ)` bound would need.
    pub fn scaled(&self) -> Vec<f64> {
        self.fractions.iter().map(|f| f * self.lambda).collect()
    }
}

pub fn tau_z_tail<F>(
    d: &DegreeSequence,
    cert: &SubcritCertificate,
    gammas: &[u64],
    trials: usize,
    seed: u64,
    sampler: F,
) -> Result<TauZTail, UmError>
where
    F: Fn(&DegreeSequence, &mut crate::rng::TrialRng) -> Result<MultiGraph, UmError> + Sync,
{
    let top = gammas.iter().copied().max().unwrap_or(80);
    let n = d.n() as usize;
    let runs: Vec<Result<UmTrace, UmError>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            let g = sampler(d, &mut rng)?;
            let v = rng.gen_range(0..n);
            let opts = UmExploreOptions {
                gamma: top,
                to_completion: false,
            };
            explore_um(&g, d, cert, v, opts, &mut rng)
        })
        .collect();
    let runs: Vec<UmTrace> = runs.into_iter().collect::<Result<_, _>>()?;
    let fractions = gammas
        .iter()
        .map(|&gm| {
            let cut = (gm * cert.t_ceil()) as usize;
            runs.iter().filter(|r| r.tau_z_with(gm) > cut).count() as f64 / trials as f64
        })
        .collect();
    Ok(TauZTail {
        gammas: gammas.to_vec(),
        fractions,
        lambda: cert.lambda,
        one_over_lambda: 1.0 / cert.lambda,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn seq(v: &[u64]) -> DegreeSequence {
        DegreeSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejection_examples() {
        let mut rng = trial_rng(0, 0);
        let (g, tries) = sample_um_rejection(&seq(&[1, 1]), 10, &mut rng).unwrap();
        assert_eq!((edge_key(&g), tries), (vec![(0, 1)], 1));
        let (g, _) = sample_um_rejection(&seq(&[2, 2, 2]), 1000, &mut rng).unwrap();
        assert_eq!(edge_key(&g), vec![(0, 1), (0, 2), (1, 2)]);
        assert!(matches!(
            sample_um_rejection(&seq(&[2, 2]), 50, &mut rng),
            Err(UmError::AttemptsExhausted(50))
        ));
        let dense = DegreeSequence::from_counts([(40, 50)]).unwrap();
        assert!(matches!(sample_um_rejection(&dense, 5, &mut rng), Err(UmError::TooRare(_))));
    }

    #[test]
    fn three_regular_rejection_is_fast() {
        let d = DegreeSequence::from_counts([(3, 100)]).unwrap();
        let limit = (10.0 * 2f64.exp()) as usize;
        let fails = (0..200)
            .filter(|&i| sample_um_rejection(&d, limit, &mut trial_rng(4, i)).is_err())
            .count();
        assert!(fails <= 2);
    }

    #[test]
    fn havel_hakimi_examples() {
        let g = havel_hakimi(&seq(&[3, 3, 2, 2, 1, 1])).unwrap();
        assert!(g.is_simple());
        assert_eq!(g.degrees(), vec![1, 1, 2, 2, 3, 3]);
        assert_eq!(havel_hakimi(&seq(&[3, 3, 1, 1])), Err(UmError::NotGraphical));
        assert_eq!(havel_hakimi(&seq(&[2, 2])), Err(UmError::NotGraphical));
    }

    #[test]
    fn switch_move_round_trip() {
        let g = havel_hakimi(&seq(&[2, 2, 2, 2, 2, 2])).unwrap();
        let mut chain = SwitchChain::new(&g).unwrap();
        let before = edge_key(&chain.graph());
        let mut rng = trial_rng(1, 1);
        loop {
            let m = chain.edge_count();
            let (i, j) = (rng.gen_range(0..m), rng.gen_range(0..m));
            if let Some(mv) = chain.proposal(i, j, rng.gen(), rng.gen()) {
                chain.apply(&mv);
                assert_eq!(chain.graph().degrees(), g.degrees());
                assert!(chain.graph().is_simple());
                chain.apply(&mv.reverse());
                break;
            }
        }
        assert_eq!(edge_key(&chain.graph()), before);
    }

    #[test]
    fn single_state_chain() {
        let g = sample_um_switching(&seq(&[1, 1]), 100, &mut trial_rng(0, 0)).unwrap();
        assert_eq!(edge_key(&g), vec![(0, 1)]);
    }

    #[test]
    fn transition_matrix_is_symmetric_on_tiny_instances() {
        for degs in [vec![1u64, 1, 1, 1], vec![2, 2, 2, 2], vec![1, 1, 2, 2, 2], vec![1, 2, 2, 3, 3, 1], vec![2; 7]] {
            let d = seq(&degs);
            let p = transition_matrix(&havel_hakimi(&d).unwrap()).unwrap();
            for (a, row) in &p {
                let total: f64 = row.values().sum();
                assert!((total - 1.0).abs() < 1e-12);
                for (b, &pab) in row {
                    assert!((pab - p[b][a]).abs() < 1e-15);
                }
            }
            let enumerated = enumerate_simple_graphs(&d.degrees());
            assert_eq!(p.len(), enumerated.len(), "{degs:?}");
        }
    }

    #[test]
    fn exploration_single_edge() {
        let d = seq(&[1, 1]);
        let cert = d.subcritical_certificate(1.0, d.q_value()).unwrap();
        let g = MultiGraph::from_edges(2, vec![(0, 1)]).unwrap();
        let tr = explore_um(&g, &d, &cert, 0, UmExploreOptions::default(), &mut trial_rng(0, 0)).unwrap();
        assert_eq!(tr.first_x_zero, Some(1));
        assert_eq!(tr.rows[1].v_size, 2);
        assert_eq!(tr.z0, 2.0 * cert.q0.abs() * cert.t_ceil() as f64);
    }

    #[test]
    fn moments_all_leaves() {
        let d = seq(&[1; 40]);
        let cert = d.subcritical_certificate(1.0, -1.0).unwrap();
        let rep = increment_moment_check(&d, &cert, &[0], 50, 3, |d, rng| {
            sample_um_rejection(d, 100, rng).map(|x| x.0)
        })
        .unwrap();
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn tau_z_all_leaves() {
        let d = seq(&[1; 40]);
        let cert = d.subcritical_certificate(1.0, -1.0).unwrap();
        let tail = tau_z_tail(&d, &cert, &[20, 40, 80], 30, 3, |d, rng| sample_um_switching(d, 100, rng)).unwrap();
        assert!(tail.fractions.iter().all(|&f| f == 0.0));
    }

    fn arb_graphical() -> impl Strategy<Value = DegreeSequence> {
        prop::collection::vec(1u64..4, 4..30).prop_filter_map("graphical", |mut v| {
            if v.iter().sum::<u64>() % 2 == 1 {
                v.push(1);
            }
            let d = DegreeSequence::new(v).ok()?;
            havel_hakimi(&d).ok().map(|_| d)
        })
    }

    proptest! {
        #[test]
        fn switching_preserves_degrees(d in arb_graphical(), seed in 0u64..500) {
            let mut chain = SwitchChain::from_sequence(&d).unwrap();
            let mut rng = trial_rng(seed, 0);
            for _ in 0..200 {
                chain.step(&mut rng);
                prop_assert_eq!(chain.graph().degrees(), d.degrees());
            }
            prop_assert!(chain.graph().is_simple());
        }

        #[test]
        fn exploration_invariants(seed in 0u64..500) {
            let d = DegreeSequence::mix_1_3(200, -0.3).unwrap();
            let cert = d.auto_certificate().unwrap();
            let mut rng = trial_rng(seed, 0);
            let g = sample_um_switching(&d, default_burn_in(&d), &mut rng).unwrap();
            let v = rng.gen_range(0..d.n() as usize);
            let opts = UmExploreOptions { gamma: 80, to_completion: true };
            let tr = explore_um(&g, &d, &cert, v, opts, &mut rng).unwrap();
            prop_assert_eq!(tr.epoch_sizes.iter().sum::<usize>(), d.n() as usize);
            prop_assert_eq!(tr.domination_violations(), 0);
            let degrees = d.degrees();
            for w in tr.rows.windows(2) {
                prop_assert_eq!(w[1].v_size, w[0].v_size + 1);
                match w[1].event {
                    UmEvent::Vertex { w: u, k } => {
                        prop_assert!(k >= 1);
                        prop_assert_eq!(w[1].x as i64, w[0].x as i64 + degrees[u] as i64 - 2 * k as i64);
                        if k == 1 {
                            // the one-edge case of X_t - 1 + d_w - |E(w, V_t)|
                            prop_assert_eq!(w[1].x as i64, w[0].x as i64 - 1 + degrees[u] as i64 - 1);
                        }
                    }
                    UmEvent::Restart { w: u } => {
                        prop_assert_eq!(w[0].x, 0);
                        prop_assert_eq!(w[1].x, degrees[u]);
                    }
                    UmEvent::Start => prop_assert!(false),
                }
            }
            // epochs of the full run are components of g
            let mut sizes = tr.epoch_sizes.clone();
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            let mut comp = g.components().component_sizes;
            // the first epoch holds the components meeting V_0
            let first = tr.epoch_sizes[0];
            let labels = g.component_labels();
            let v0_labels: BTreeSet<usize> = cert.set_vertices(d.n()).chain([v]).map(|u| labels[u]).collect();
            let v0_total: usize = (0..degrees.len()).filter(|&u| v0_labels.contains(&labels[u])).count();
            prop_assert_eq!(first, v0_total);
            comp.sort_unstable_by(|a, b| b.cmp(a));
            prop_assert!(sizes.len() <= comp.len());
        }
    }
}
