//! Random network topologies used as concentration graphs.
//!
//! Three generators are provided: Erdos-Renyi coin-flip graphs,
//! Barabasi-Albert preferential attachment, and a soft geometric graph on
//! the unit square. All graphs are simple and undirected; generation is
//! driven entirely by the caller's generator, so a fixed seed reproduces the
//! exact edge set.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};

/// A simple undirected graph on vertices `0..p`.
///
/// Edges are stored as sorted `(i, j)` pairs with `i < j`. Geometric graphs
/// additionally carry the sampled vertex positions so an instance can be
/// exported and re-imported exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    p: usize,
    edges: Vec<(usize, usize)>,
    positions: Option<Vec<[f64; 2]>>,
}

impl Graph {
    /// Build a graph from a vertex count and edge pairs.
    ///
    /// Pairs may appear in any order and orientation; self-loops, duplicate
    /// edges and out-of-range endpoints are rejected.
    pub fn new(p: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {a}")));
            }
            if a >= p || b >= p {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a}, {b}) out of range for p = {p}"
                )));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate edge ({}, {})",
                    e.0, e.1
                )));
            }
        }
        Ok(Graph {
            p,
            edges: set.into_iter().collect(),
            positions: None,
        })
    }

    /// Attach unit-square positions (used by the geometric generator).
    pub fn with_positions(mut self, positions: Vec<[f64; 2]>) -> Result<Self> {
        if positions.len() != self.p {
            return Err(Error::DimensionMismatch(format!(
                "{} positions for p = {}",
                positions.len(),
                self.p
            )));
        }
        self.positions = Some(positions);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.p
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted edge list, each pair `(i, j)` with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let e = (a.min(b), a.max(b));
        self.edges.binary_search(&e).is_ok()
    }

    /// Dense 0/1 adjacency matrix (symmetric, zero diagonal).
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.p, self.p);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    /// Neighbor lists, sorted ascending per vertex.
    pub fn neighbor_lists(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.p];
        for &(i, j) in &self.edges {
            nb[i].push(j);
            nb[j].push(i);
        }
        for list in &mut nb {
            list.sort_unstable();
        }
        nb
    }

    pub fn degrees(&self) -> DegreeSequence {
        let mut d = vec![0usize; self.p];
        for &(i, j) in &self.edges {
            d[i] += 1;
            d[j] += 1;
        }
        DegreeSequence { degrees: d }
    }

    /// Serialize to the plain-text edge-list format:
    /// a `# p=<int>` header, one `i j` pair per line (0-based, sorted), and
    /// for geometric graphs trailing `# pos i x y` comment lines.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# p={}", self.p).unwrap();
        for &(i, j) in &self.edges {
            writeln!(out, "{i} {j}").unwrap();
        }
        if let Some(pos) = &self.positions {
            for (i, xy) in pos.iter().enumerate() {
                writeln!(out, "# pos {i} {:.16e} {:.16e}", xy[0], xy[1]).unwrap();
            }
        }
        out
    }

    /// Parse the edge-list format produced by [`Graph::to_edge_list_string`].
    pub fn from_edge_list_string(text: &str) -> Result<Self> {
        let mut p: Option<usize> = None;
        let mut edges = Vec::new();
        let mut positions: Vec<(usize, [f64; 2])> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("p=") {
                    p = Some(
                        v.trim()
                            .parse()
                            .map_err(|_| bad("invalid vertex count"))?,
                    );
                } else if let Some(v) = rest.strip_prefix("pos ") {
                    let mut it = v.split_whitespace();
                    let i: usize = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad("invalid position index"))?;
                    let x: f64 = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad("invalid position x"))?;
                    let y: f64 = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad("invalid position y"))?;
                    positions.push((i, [x, y]));
                }
                // other comment lines are ignored
                continue;
            }
            let mut it = line.split_whitespace();
            let i: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("invalid edge endpoint"))?;
            let j: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("invalid edge endpoint"))?;
            if it.next().is_some() {
                return Err(bad("trailing tokens on edge line"));
            }
            edges.push((i, j));
        }
        let p = p.ok_or_else(|| Error::Parse("missing '# p=<int>' header".into()))?;
        let g = Graph::new(p, edges)?;
        if positions.is_empty() {
            return Ok(g);
        }
        if positions.len() != p {
            return Err(Error::Parse(format!(
                "{} position lines for p = {p}",
                positions.len()
            )));
        }
        positions.sort_by_key(|&(i, _)| i);
        if positions.iter().enumerate().any(|(k, &(i, _))| k != i) {
            return Err(Error::Parse("position indices are not 0..p".into()));
        }
        g.with_positions(positions.into_iter().map(|(_, xy)| xy).collect())
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_edge_list_string())?;
        Ok(())
    }

    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_edge_list_string(&std::fs::read_to_string(path)?)
    }
}

/// Vertex degrees of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    degrees: Vec<usize>,
}

impl DegreeSequence {
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Maximum degree; this is also the largest number of nonzero entries in
    /// any row of an interaction matrix whose pattern equals the graph.
    pub fn max(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        if self.degrees.is_empty() {
            return 0.0;
        }
        self.degrees.iter().sum::<usize>() as f64 / self.degrees.len() as f64
    }
}

/// Erdos-Renyi graph: each unordered pair is an edge independently with
/// probability `d_bar / (p - 1)`, so the expected average degree is `d_bar`.
pub fn erdos_renyi<R: Rng + ?Sized>(p: usize, d_bar: f64, rng: &mut R) -> Result<Graph> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("p = {p}, need p >= 2")));
    }
    if !d_bar.is_finite() || d_bar < 0.0 || d_bar > (p - 1) as f64 {
        return Err(Error::InvalidParameter(format!(
            "d_bar = {d_bar} outside [0, p-1]"
        )));
    }
    let prob = d_bar / (p - 1) as f64;
    let mut edges = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            if rng.random::<f64>() < prob {
                edges.push((i, j));
            }
        }
    }
    Graph::new(p, edges)
}

/// Barabasi-Albert preferential attachment.
///
/// Starts from a clique on `m + 1` vertices; every later vertex attaches `m`
/// edges to distinct existing vertices chosen with probability proportional
/// to their current degree (targets are resampled until distinct, keeping the
/// graph simple). With `m = 2` the average degree approaches 4 for large `p`.
pub fn barabasi_albert<R: Rng + ?Sized>(p: usize, m: usize, rng: &mut R) -> Result<Graph> {
    if m < 1 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    if m >= p {
        return Err(Error::InvalidParameter(format!("m = {m} >= p = {p}")));
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    // Sampling an endpoint uniformly from this list is degree-proportional.
    let mut endpoints: Vec<usize> = Vec::new();
    for i in 0..=m {
        for j in (i + 1)..=m {
            edges.push((i, j));
            endpoints.push(i);
            endpoints.push(j);
        }
    }
    for v in (m + 1)..p {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            targets.insert(t);
        }
        for &t in &targets {
            edges.push((t, v));
            endpoints.push(t);
            endpoints.push(v);
        }
    }
    Graph::new(p, edges)
}

/// Connection probability of the geometric graph for two vertices at
/// Euclidean distance `dist` when `p` points occupy the unit square: the
/// standard normal density evaluated at `dist * sqrt(p)`.
pub fn geometric_edge_probability(dist: f64, p: usize) -> f64 {
    let x = dist * (p as f64).sqrt();
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Soft geometric graph: `p` points i.i.d. uniform in the unit square, each
/// pair connected with probability [`geometric_edge_probability`]. Positions
/// are retained on the returned graph.
pub fn geometric<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Result<Graph> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("p = {p}, need p >= 2")));
    }
    let positions: Vec<[f64; 2]> = (0..p)
        .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
        .collect();
    geometric_from_positions(positions, rng)
}

/// Geometric graph on caller-supplied positions (all in the unit square).
pub fn geometric_from_positions<R: Rng + ?Sized>(
    positions: Vec<[f64; 2]>,
    rng: &mut R,
) -> Result<Graph> {
    let p = positions.len();
    if p < 2 {
        return Err(Error::InvalidParameter(format!("p = {p}, need p >= 2")));
    }
    if positions
        .iter()
        .any(|xy| !(0.0..=1.0).contains(&xy[0]) || !(0.0..=1.0).contains(&xy[1]))
    {
        return Err(Error::InvalidParameter(
            "positions must lie in the unit square".into(),
        ));
    }
    let mut edges = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            let dx = positions[i][0] - positions[j][0];
            let dy = positions[i][1] - positions[j][1];
            let dist = (dx * dx + dy * dy).sqrt();
            if rng.random::<f64>() < geometric_edge_probability(dist, p) {
                edges.push((i, j));
            }
        }
    }
    Graph::new(p, edges)?.with_positions(positions)
}
