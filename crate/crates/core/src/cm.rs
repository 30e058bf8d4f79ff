//! Configuration model: uniform pairing of half-edges, and the edge-by-edge
//! exploration process that reveals the pairing lazily.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::degseq::DegreeSequence;
use crate::graph::MultiGraph;
use crate::rng::trial_rng;

/// Owner vertex of every half-edge, grouped by vertex in index order.
pub(crate) fn stub_owners(degrees: &[usize]) -> Vec<usize> {
    let mut owners = Vec::with_capacity(degrees.iter().sum());
    for (v, &d) in degrees.iter().enumerate() {
        owners.extend(std::iter::repeat(v).take(d));
    }
    owners
}

/// A uniformly random perfect matching of the half-edges.
pub fn sample_cm<R: Rng + ?Sized>(d: &DegreeSequence, rng: &mut R) -> MultiGraph {
    let degrees = d.degrees();
    let mut stubs = stub_owners(&degrees);
    stubs.shuffle(rng);
    let edges = stubs.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    MultiGraph::from_edges_unchecked(degrees.len(), edges)
}

/// Loop- and multi-edge-free test in `O(n + m)` using a timestamped mark array.
pub(crate) fn is_simple_fast(g: &MultiGraph) -> bool {
    let n = g.vertex_count();
    let mut start = vec![0usize; n + 1];
    for &(u, v) in g.edges() {
        if u == v {
            return false;
        }
        start[u.min(v) + 1] += 1;
    }
    for i in 0..n {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut nbrs = vec![0usize; g.edge_count()];
    for &(u, v) in g.edges() {
        let (a, b) = (u.min(v), u.max(v));
        nbrs[fill[a]] = b;
        fill[a] += 1;
    }
    let mut mark = vec![usize::MAX; n];
    for a in 0..n {
        for &b in &nbrs[start[a]..start[a + 1]] {
            if mark[b] == a {
                return false;
            }
            mark[b] = a;
        }
    }
    true
}

/// Empirical probability that the configuration model is simple, next to two
/// closed forms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimpleProbability {
    pub trials: usize,
    pub simple: usize,
    pub empirical: f64,
    /// `exp(-Σd²/m)`.
    pub paper_formula: f64,
    /// `exp(-ν/2 - ν²/4)` with `ν = Σd(d-1)/m`.
    pub janson_asymptotic: f64,
}

impl SimpleProbability {
    pub fn std_error(&self) -> f64 {
        (self.janson_asymptotic * (1.0 - self.janson_asymptotic) / self.trials as f64).sqrt()
    }
}

/// `ν = Σd(d-1)/m`.
pub fn nu(d: &DegreeSequence) -> f64 {
    (d.power_sum(2) - d.power_sum(1)) as f64 / d.m() as f64
}

pub fn janson_asymptotic(d: &DegreeSequence) -> f64 {
    let nu = nu(d);
    (-nu / 2.0 - nu * nu / 4.0).exp()
}

pub fn simple_probability(d: &DegreeSequence, trials: usize, seed: u64) -> SimpleProbability {
    let simple = (0..trials)
        .into_par_iter()
        .filter(|&i| is_simple_fast(&sample_cm(d, &mut trial_rng(seed, i as u64))))
        .count();
    SimpleProbability {
        trials,
        simple,
        empirical: simple as f64 / trials as f64,
        paper_formula: (-(d.power_sum(2) as f64) / d.m() as f64).exp(),
        janson_asymptotic: janson_asymptotic(d),
    }
}

/// Largest component of one configuration-model sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct L1Sample {
    pub l1: usize,
    pub simple: bool,
}

/// `L₁` and simplicity over independent samples, trial `i` seeded by `(seed, i)`.
pub fn l1_statistics(d: &DegreeSequence, trials: usize, seed: u64) -> Vec<L1Sample> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let g = sample_cm(d, &mut trial_rng(seed, i as u64));
            L1Sample {
                l1: g.components().largest,
                simple: is_simple_fast(&g),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CmEvent {
    Start(usize),
    NewVertex(usize),
    BackEdge(usize),
    Restart(usize),
}

impl CmEvent {
    pub fn label(&self) -> &'static str {
        match self {
            CmEvent::Start(_) => "start",
            CmEvent::NewVertex(_) => "new",
            CmEvent::BackEdge(_) => "back",
            CmEvent::Restart(_) => "restart",
        }
    }

    pub fn vertex(&self) -> usize {
        match *self {
            CmEvent::Start(v) | CmEvent::NewVertex(v) | CmEvent::BackEdge(v) | CmEvent::Restart(v) => v,
        }
    }
}

/// State of the exploration of a configuration model that is paired lazily.
///
/// Half-edges are numbered by vertex and then by position, and the explored
/// half-edge to be paired next is always the smallest unmatched one.
#[derive(Clone, Debug)]
pub struct CmExplorer {
    degrees: Vec<usize>,
    offsets: Vec<usize>,
    owner: Vec<usize>,
    /// Unmatched half-edges, with `pos` locating each one for swap removal.
    pool: Vec<usize>,
    pos: Vec<usize>,
    frontier: BTreeSet<usize>,
    explored: Vec<bool>,
    x: usize,
    out_q: i128,
    out_r: i128,
    t: usize,
}

impl CmExplorer {
    pub fn new(d: &DegreeSequence, start: usize) -> Self {
        let degrees = d.degrees();
        assert!(start < degrees.len(), "start vertex out of range");
        let owner = stub_owners(&degrees);
        let pool: Vec<usize> = (0..owner.len()).collect();
        let pos = pool.clone();
        let (mut out_q, mut out_r) = (0i128, 0i128);
        for &k in &degrees {
            let k = k as i128;
            out_q += k * (k - 2);
            out_r += k * (k - 2) * (k - 2);
        }
        let offsets = degrees
            .iter()
            .scan(0, |acc, &k| {
                let first = *acc;
                *acc += k;
                Some(first)
            })
            .collect();
        let mut ex = Self {
            degrees,
            offsets,
            owner,
            pool,
            pos,
            frontier: BTreeSet::new(),
            explored: Vec::new(),
            x: 0,
            out_q,
            out_r,
            t: 0,
        };
        ex.explored = vec![false; ex.degrees.len()];
        ex.explore(start);
        ex
    }

    fn first_stub(&self, v: usize) -> usize {
        self.offsets[v]
    }

    fn explore(&mut self, v: usize) {
        self.explored[v] = true;
        let first = self.first_stub(v);
        self.frontier.extend(first..first + self.degrees[v]);
        self.x += self.degrees[v];
        let k = self.degrees[v] as i128;
        self.out_q -= k * (k - 2);
        self.out_r -= k * (k - 2) * (k - 2);
    }

    fn take(&mut self, stub: usize) {
        let i = self.pos[stub];
        let last = *self.pool.last().expect("non-empty pool");
        self.pool.swap_remove(i);
        if last != stub {
            self.pos[last] = i;
        }
        self.frontier.remove(&stub);
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn x(&self) -> usize {
        self.x
    }

    /// `M_t`: unmatched half-edges in total.
    pub fn m(&self) -> usize {
        self.pool.len()
    }

    pub fn is_done(&self) -> bool {
        self.pool.is_empty()
    }

    pub fn is_explored(&self, v: usize) -> bool {
        self.explored[v]
    }

    /// `Q_t = Σ_{u unexplored} d_u(d_u-2) / (M_t - 1)`.
    pub fn q(&self) -> f64 {
        self.out_q as f64 / (self.m() as f64 - 1.0)
    }

    /// `R_t = Σ_{u unexplored} d_u(d_u-2)² / (M_t - 1)`.
    pub fn r(&self) -> f64 {
        self.out_r as f64 / (self.m() as f64 - 1.0)
    }

    /// Exact `E[η_{t+1} | F_t]` when `X_t > 0`. The partner is uniform among
    /// the other `M_t - 1` unmatched half-edges, `X_t - 1` of which are
    /// explored and give `η = -2`, so this is `Q_t - 2(X_t - 1)/(M_t - 1)`.
    pub fn conditional_mean(&self) -> f64 {
        self.q() - 2.0 * (self.x as f64 - 1.0) / (self.m() as f64 - 1.0)
    }

    /// Exact `E[η²_{t+1} | F_t]` when `X_t > 0`: `R_t + 4(X_t - 1)/(M_t - 1)`.
    pub fn conditional_second_moment(&self) -> f64 {
        self.r() + 4.0 * (self.x as f64 - 1.0) / (self.m() as f64 - 1.0)
    }

    /// One step of the process; returns the event and the edge it created, if any.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<(CmEvent, Option<(usize, usize)>)> {
        if self.is_done() {
            return None;
        }
        self.t += 1;
        if self.x == 0 {
            let stub = self.pool[rng.gen_range(0..self.pool.len())];
            let u = self.owner[stub];
            self.explore(u);
            return Some((CmEvent::Restart(u), None));
        }
        let e = *self.frontier.first().expect("X > 0 means an explored stub is unmatched");
        self.take(e);
        let f = self.pool[rng.gen_range(0..self.pool.len())];
        self.take(f);
        let (a, u) = (self.owner[e], self.owner[f]);
        if self.explored[u] {
            self.x -= 2;
            Some((CmEvent::BackEdge(u), Some((a, u))))
        } else {
            self.explore(u);
            self.frontier.remove(&f);
            self.x -= 2;
            Some((CmEvent::NewVertex(u), Some((a, u))))
        }
    }
}

/// One row of an exploration trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CmRow {
    pub t: usize,
    pub x: usize,
    pub m: usize,
    pub q: f64,
    pub r: f64,
    pub event: CmEvent,
}

/// Full record of an exploration run until every half-edge is paired.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplorationTrace {
    pub rows: Vec<CmRow>,
    /// First `t ≥ 1` with `X_t = 0`.
    pub tau_x: Option<usize>,
    /// Exploration epoch (number of restarts before discovery) of each vertex.
    pub epoch: Vec<usize>,
    /// Time at which each vertex was explored.
    pub explored_at: Vec<usize>,
    /// Pairings in the order they were made, with their time step.
    pub edges: Vec<(usize, (usize, usize))>,
    degrees: Vec<usize>,
}

impl ExplorationTrace {
    /// The paired multigraph.
    pub fn graph(&self) -> MultiGraph {
        MultiGraph::from_edges_unchecked(self.degrees.len(), self.edges.iter().map(|e| e.1).collect())
    }

    /// `X_t` from scratch: degrees of explored vertices minus paired half-edges.
    pub fn recompute_x(&self, t: usize) -> usize {
        let explored: usize = self
            .explored_at
            .iter()
            .zip(&self.degrees)
            .filter(|(&at, _)| at <= t)
            .map(|(_, &d)| d)
            .sum();
        let paired = self.edges.iter().take_while(|e| e.0 <= t).count();
        explored - 2 * paired
    }

    /// Vertex counts of the epochs, in order.
    pub fn epoch_sizes(&self) -> Vec<usize> {
        let k = self.epoch.iter().max().map_or(0, |&e| e + 1);
        let mut sizes = vec![0; k];
        for &e in &self.epoch {
            sizes[e] += 1;
        }
        sizes
    }
}

/// Runs the exploration from `start` until all half-edges are paired, so that
/// the trace also determines the whole multigraph.
pub fn explore_cm<R: Rng + ?Sized>(d: &DegreeSequence, start: usize, rng: &mut R) -> ExplorationTrace {
    let mut ex = CmExplorer::new(d, start);
    let n = ex.degrees.len();
    let mut epoch = vec![usize::MAX; n];
    let mut explored_at = vec![usize::MAX; n];
    epoch[start] = 0;
    explored_at[start] = 0;
    let mut rows = vec![CmRow {
        t: 0,
        x: ex.x(),
        m: ex.m(),
        q: ex.q(),
        r: ex.r(),
        event: CmEvent::Start(start),
    }];
    let mut edges = Vec::new();
    let mut tau_x = None;
    let mut current = 0;
    while let Some((event, edge)) = ex.step(rng) {
        let t = ex.t();
        match event {
            CmEvent::Restart(u) => {
                current += 1;
                epoch[u] = current;
                explored_at[u] = t;
            }
            CmEvent::NewVertex(u) => {
                epoch[u] = current;
                explored_at[u] = t;
            }
            _ => {}
        }
        if let Some(e) = edge {
            edges.push((t, e));
        }
        if ex.x() == 0 && tau_x.is_none() {
            tau_x = Some(t);
        }
        rows.push(CmRow {
            t,
            x: ex.x(),
            m: ex.m(),
            q: if ex.m() > 1 { ex.q() } else { f64::NAN },
            r: if ex.m() > 1 { ex.r() } else { f64::NAN },
            event,
        });
    }
    ExplorationTrace {
        rows,
        tau_x,
        epoch,
        explored_at,
        edges,
        degrees: ex.degrees,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(v: &[u64]) -> DegreeSequence {
        DegreeSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn trivial_samples() {
        let mut rng = trial_rng(0, 0);
        assert_eq!(sample_cm(&seq(&[1, 1]), &mut rng).edges().len(), 1);
        let g = sample_cm(&seq(&[2]), &mut rng);
        assert_eq!(g.edges(), &[(0, 0)]);
    }

    #[test]
    fn four_leaves_matchings_are_uniform() {
        let d = seq(&[1, 1, 1, 1]);
        let n = 100_000;
        let mut hits = 0usize;
        for i in 0..n {
            let g = sample_cm(&d, &mut trial_rng(3, i));
            let e = g.edges()[0];
            if (e.0.min(e.1), e.0.max(e.1)) == (0, 1) || (e.0.min(e.1), e.0.max(e.1)) == (2, 3) {
                hits += 1;
            }
        }
        let p = 1.0 / 3.0;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((hits as f64 - n as f64 * p).abs() <= 3.0 * sd);
    }

    #[test]
    fn simple_probability_examples() {
        let s = simple_probability(&seq(&[1, 1, 1, 1]), 1000, 1);
        assert_eq!(s.empirical, 1.0);
        assert_eq!(s.janson_asymptotic, 1.0);
        assert!((s.paper_formula - (-1f64).exp()).abs() < 1e-15);
        // pairings of 4 stubs on two vertices: {01,23} two loops, and the two
        // crossing pairings both give a double edge
        assert_eq!(simple_probability(&seq(&[2, 2]), 1000, 1).simple, 0);
    }

    #[test]
    fn fast_simplicity_matches_hash_check() {
        for i in 0..300 {
            let g = sample_cm(&seq(&[1, 2, 2, 3, 3, 1, 4]), &mut trial_rng(5, i));
            assert_eq!(is_simple_fast(&g), g.is_simple());
        }
    }

    #[test]
    fn l1_examples() {
        let d = seq(&[1; 10]);
        assert!(l1_statistics(&d, 50, 2).iter().all(|s| s.l1 == 2 && s.simple));
        assert!(l1_statistics(&seq(&[2; 10]), 50, 2).iter().all(|s| s.l1 <= 10));
    }

    #[test]
    fn exploration_examples() {
        let mut rng = trial_rng(0, 0);
        let tr = explore_cm(&seq(&[1, 1]), 0, &mut rng);
        assert_eq!(tr.rows.iter().map(|r| r.x).collect::<Vec<_>>(), vec![1, 0]);
        assert_eq!(tr.tau_x, Some(1));
        assert_eq!(tr.epoch_sizes(), vec![2]);
        let tr = explore_cm(&seq(&[2]), 0, &mut rng);
        assert_eq!(tr.rows[1].x, 0);
        assert_eq!(tr.rows[1].event, CmEvent::BackEdge(0));
    }

    #[test]
    fn one_step_mean_matches_exact_conditional_law() {
        let d = DegreeSequence::mix_1_3(400, -0.2).unwrap();
        let mut rng = trial_rng(9, 0);
        let mut ex = CmExplorer::new(&d, 399);
        for _ in 0..5 {
            ex.step(&mut rng);
        }
        assert!(ex.x() > 1);
        let trials = 100_000;
        let x0 = ex.x() as f64;
        let (mut s1, mut s2) = (0.0, 0.0);
        for i in 0..trials {
            let mut c = ex.clone();
            c.step(&mut trial_rng(10, i));
            let eta = c.x() as f64 - x0;
            s1 += eta;
            s2 += eta * eta;
        }
        let mean = s1 / trials as f64;
        let second = s2 / trials as f64;
        let sd = ((ex.conditional_second_moment() - ex.conditional_mean().powi(2)) / trials as f64).sqrt();
        assert!((mean - ex.conditional_mean()).abs() <= 3.0 * sd, "{mean} vs {}", ex.conditional_mean());
        assert!((second - ex.conditional_second_moment()).abs() < 0.05);
        // the paper's Q_t is the mean only when a single explored stub is open
        assert!(ex.q() - ex.conditional_mean() > 0.0);
    }

    proptest! {
        #[test]
        fn trace_invariants(degs in prop::collection::vec(1u64..5, 2..40), start_raw in 0usize..40, seed in 0u64..1000) {
            let mut degs = degs;
            if degs.iter().sum::<u64>() % 2 == 1 {
                degs.push(1);
            }
            let d = DegreeSequence::new(degs).unwrap();
            let start = start_raw % d.n() as usize;
            let tr = explore_cm(&d, start, &mut trial_rng(seed, 0));
            let degrees = d.degrees();
            prop_assert_eq!(tr.graph().degrees(), degrees.clone());
            for w in tr.rows.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                let dx = b.x as i64 - a.x as i64;
                match b.event {
                    CmEvent::NewVertex(u) => prop_assert_eq!(dx, degrees[u] as i64 - 2),
                    CmEvent::BackEdge(_) => prop_assert_eq!(dx, -2),
                    CmEvent::Restart(u) => {
                        prop_assert_eq!(a.x, 0);
                        prop_assert_eq!(b.x, degrees[u]);
                    }
                    CmEvent::Start(_) => prop_assert!(false),
                }
                let consumed = if matches!(b.event, CmEvent::Restart(_)) { 0 } else { 2 };
                prop_assert_eq!(a.m - b.m, consumed);
            }
            for r in &tr.rows {
                prop_assert_eq!(tr.recompute_x(r.t), r.x);
            }
            // epochs are exactly the components
            let labels = tr.graph().component_labels();
            for u in 0..degrees.len() {
                for v in 0..degrees.len() {
                    prop_assert_eq!(labels[u] == labels[v], tr.epoch[u] == tr.epoch[v]);
                }
            }
            prop_assert_eq!(tr.epoch_sizes().iter().sum::<usize>(), degrees.len());
        }
    }
}
