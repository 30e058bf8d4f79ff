//! Multigraphs, connected components and isolated-tree counts.
//!
//! Vertices are `0..vertex_count`. A loop `(v, v)` is stored as one edge and
//! contributes 2 to the degree of `v`, which matches half-edge accounting in
//! the configuration model.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge ({0}, {1}) references a vertex outside 0..{2}")]
    VertexOutOfRange(usize, usize, usize),
    #[error("graph is not simple")]
    NotSimple,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Undirected multigraph with loops and parallel edges allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl MultiGraph {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            vertex_count,
            edges: Vec::new(),
        }
    }

    pub fn from_edges(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        if let Some(&(u, v)) = edges
            .iter()
            .find(|&&(u, v)| u >= vertex_count || v >= vertex_count)
        {
            return Err(GraphError::VertexOutOfRange(u, v, vertex_count));
        }
        Ok(Self {
            vertex_count,
            edges,
        })
    }

    /// Builds without range checks; callers guarantee every endpoint is `< vertex_count`.
    pub(crate) fn from_edges_unchecked(vertex_count: usize, edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(edges.iter().all(|&(u, v)| u < vertex_count && v < vertex_count));
        Self {
            vertex_count,
            edges,
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        if u >= self.vertex_count || v >= self.vertex_count {
            return Err(GraphError::VertexOutOfRange(u, v, self.vertex_count));
        }
        self.edges.push((u, v));
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// True iff there are no loops and no parallel edges.
    pub fn is_simple(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.edges.len());
        self.edges.iter().all(|&(u, v)| {
            if u == v {
                return false;
            }
            seen.insert((u.min(v), u.max(v)))
        })
    }

    /// Adjacency lists; a loop at `v` lists `v` twice.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Subgraph induced on `vertices`, relabelled to `0..vertices.len()` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> MultiGraph {
        let mut index = vec![usize::MAX; self.vertex_count];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|&(u, v)| {
                let (a, b) = (index[u], index[v]);
                (a != usize::MAX && b != usize::MAX).then_some((a, b))
            })
            .collect();
        MultiGraph::from_edges_unchecked(vertices.len(), edges)
    }

    pub fn components(&self) -> ComponentSummary {
        let uf = self.union_find();
        ComponentSummary::from_labels(&uf.into_labels())
    }

    /// Component label for every vertex (labels are component roots).
    pub fn component_labels(&self) -> Vec<usize> {
        self.union_find().into_labels()
    }

    fn union_find(&self) -> UnionFind {
        let mut uf = UnionFind::new(self.vertex_count);
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        uf
    }

    /// Per component: (vertex count, edge count). Loops and parallel edges count as edges.
    pub fn component_orders_and_sizes(&self) -> Vec<(usize, usize)> {
        let mut uf = self.union_find();
        let mut vertices = vec![0usize; self.vertex_count];
        let mut edges = vec![0usize; self.vertex_count];
        for v in 0..self.vertex_count {
            vertices[uf.find(v)] += 1;
        }
        for &(u, _) in &self.edges {
            edges[uf.find(u)] += 1;
        }
        (0..self.vertex_count)
            .filter(|&v| vertices[v] > 0)
            .map(|v| (vertices[v], edges[v]))
            .collect()
    }

    /// Number of components with exactly `s` vertices and `s - 1` edges.
    ///
    /// Requires a simple graph. On multigraphs use [`MultiGraph::count_tree_components`],
    /// which applies the same vertex/edge count rule.
    pub fn count_isolated_trees(&self, s: usize) -> Result<usize, GraphError> {
        if !self.is_simple() {
            return Err(GraphError::NotSimple);
        }
        Ok(self.count_tree_components(s))
    }

    /// Tree components of order `s` in a possibly non-simple graph. A connected
    /// component with `s` vertices and `s - 1` edges cannot contain a loop or a
    /// parallel edge, so the count agrees with the simple-graph definition.
    pub fn count_tree_components(&self, s: usize) -> usize {
        if s == 0 {
            return 0;
        }
        self.component_orders_and_sizes()
            .into_iter()
            .filter(|&(order, size)| order == s && size + 1 == s)
            .count()
    }

    /// Reads the edge-list format: one `u v` pair per line, 0-based ids, loops as `u u`.
    /// Blank lines and `#` comments are ignored. The vertex count is one more than the
    /// largest id unless `vertex_count` is given.
    pub fn read_edge_list<R: BufRead>(reader: R, vertex_count: Option<usize>) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        let mut max_id = None;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut parts = body.split_whitespace();
            let mut next = || -> Result<usize, GraphError> {
                parts
                    .next()
                    .ok_or_else(|| GraphError::Parse {
                        line: i + 1,
                        msg: "expected two vertex ids".into(),
                    })?
                    .parse()
                    .map_err(|e| GraphError::Parse {
                        line: i + 1,
                        msg: format!("{e}"),
                    })
            };
            let (u, v) = (next()?, next()?);
            if parts.next().is_some() {
                return Err(GraphError::Parse {
                    line: i + 1,
                    msg: "trailing tokens".into(),
                });
            }
            max_id = Some(max_id.unwrap_or(0).max(u).max(v));
            edges.push((u, v));
        }
        let n = vertex_count.unwrap_or(max_id.map_or(0, |m| m + 1));
        MultiGraph::from_edges(n, edges)
    }

    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for &(u, v) in &self.edges {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }
}

impl fmt::Display for MultiGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiGraph(n={}, edges={})", self.vertex_count, self.edges.len())
    }
}

/// Component sizes (in vertices) and the order of a largest component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentSummary {
    /// Sorted in decreasing order.
    pub component_sizes: Vec<usize>,
    pub largest: usize,
}

impl ComponentSummary {
    fn from_labels(labels: &[usize]) -> Self {
        let mut counts = vec![0usize; labels.len()];
        for &l in labels {
            counts[l] += 1;
        }
        let mut component_sizes: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
        component_sizes.sort_unstable_by(|a, b| b.cmp(a));
        let largest = component_sizes.first().copied().unwrap_or(0);
        Self {
            component_sizes,
            largest,
        }
    }

    pub fn count(&self) -> usize {
        self.component_sizes.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.component_sizes.iter().sum()
    }
}

/// Disjoint-set forest with union by size and path compression.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Returns true if `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }

    pub fn into_labels(mut self) -> Vec<usize> {
        (0..self.parent.len()).map(|v| self.find(v)).collect()
    }
}
