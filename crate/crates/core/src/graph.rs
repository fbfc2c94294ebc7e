//! Exact in-memory graphs and the ground-truth quantities the estimators are
//! checked against.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = u32;

/// Largest vertex count for which [`ground_truth`] will run the subset
/// enumeration, whatever limit the caller asks for.
pub const MAX_EXACT_ARBORICITY_N: usize = 24;

/// Default exact-arboricity cut-off.
pub const DEFAULT_EXACT_ARBORICITY_LIMIT: usize = 15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {index} ({u}, {v}): endpoint out of range for n = {n}")]
    EndpointOutOfRange {
        index: usize,
        u: u64,
        v: u64,
        n: usize,
    },
    #[error("edge {index}: self-loop on vertex {v}")]
    SelfLoop { index: usize, v: u64 },
    #[error("edge {index} ({u}, {v}) duplicates an earlier edge")]
    DuplicateEdge { index: usize, u: u64, v: u64 },
    #[error("vertex {v} out of range for n = {n}")]
    VertexOutOfRange { v: u64, n: usize },
    #[error("graph has no edges")]
    EmptyEdgeSet,
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("too many vertices: {0} (vertex ids are 32-bit)")]
    TooManyVertices(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// One degree value and the number of vertices that have it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeClass {
    pub degree: u32,
    pub count: u64,
}

/// Immutable simple undirected graph on vertices `0..n`.
///
/// Adjacency is stored in compressed form with each neighbour list sorted
/// ascending. The edge list keeps the orientation and order it was built
/// with, so a graph written to disk and read back is identical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    offsets: Vec<usize>,
    neighbors: Vec<Vertex>,
    degree_classes: Vec<DegreeClass>,
}

impl Graph {
    /// Builds a graph, rejecting out-of-range endpoints, self-loops and
    /// duplicate edges (in either orientation).
    pub fn new(n: usize, edge_list: &[(u64, u64)]) -> Result<Self, GraphError> {
        if n > u32::MAX as usize {
            return Err(GraphError::TooManyVertices(n));
        }
        let mut edges = Vec::with_capacity(edge_list.len());
        for (index, &(u, v)) in edge_list.iter().enumerate() {
            if u >= n as u64 || v >= n as u64 {
                return Err(GraphError::EndpointOutOfRange { index, u, v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop { index, v });
            }
            edges.push((u as Vertex, v as Vertex));
        }
        Self::from_checked_edges(n, edges)
    }

    fn from_checked_edges(n: usize, edges: Vec<(Vertex, Vertex)>) -> Result<Self, GraphError> {
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0 as Vertex; 2 * edges.len()];
        for &(u, v) in &edges {
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for v in 0..n {
            let list = &mut neighbors[offsets[v]..offsets[v + 1]];
            list.sort_unstable();
            if let Some(w) = list.windows(2).position(|w| w[0] == w[1]) {
                let dup = list[w];
                let index = edges
                    .iter()
                    .enumerate()
                    .filter(|(_, &(a, b))| {
                        (a as usize == v && b == dup) || (b as usize == v && a == dup)
                    })
                    .map(|(i, _)| i)
                    .nth(1)
                    .unwrap_or(0);
                let (a, b) = edges[index];
                return Err(GraphError::DuplicateEdge {
                    index,
                    u: a as u64,
                    v: b as u64,
                });
            }
        }

        let mut histogram = std::collections::BTreeMap::new();
        for d in degree {
            *histogram.entry(d as u32).or_insert(0u64) += 1;
        }
        let degree_classes = histogram
            .into_iter()
            .map(|(degree, count)| DegreeClass { degree, count })
            .collect();

        Ok(Graph {
            n,
            edges,
            offsets,
            neighbors,
            degree_classes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn degree(&self, v: Vertex) -> u32 {
        let v = v as usize;
        (self.offsets[v + 1] - self.offsets[v]) as u32
    }

    pub fn degrees(&self) -> impl Iterator<Item = u32> + '_ {
        self.offsets.windows(2).map(|w| (w[1] - w[0]) as u32)
    }

    pub fn max_degree(&self) -> u32 {
        self.degree_classes.last().map_or(0, |c| c.degree)
    }

    /// Neighbours of `v`, ascending.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Degree histogram, ascending by degree. Only degrees that occur are listed.
    pub fn degree_classes(&self) -> &[DegreeClass] {
        &self.degree_classes
    }

    /// Exact average degree `2m/n`.
    pub fn avg_degree(&self) -> Result<Ratio<u64>, GraphError> {
        if self.n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        Ok(Ratio::new(2 * self.m() as u64, self.n as u64))
    }

    /// Returns a copy with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[Vertex]) -> Graph {
        assert_eq!(perm.len(), self.n);
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u as usize], perm[v as usize]))
            .collect();
        Self::from_checked_edges(self.n, edges).expect("relabelling preserves simplicity")
    }

    /// Writes the edge-list format: `n m` then one `u v` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.n, self.m())?;
        for &(u, v) in &self.edges {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_edge_list(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii")
    }

    /// Parses the edge-list format. Errors carry 1-based line numbers.
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Graph, GraphError> {
        let mut lines = input.lines();
        let header = match lines.next() {
            Some(line) => line.map_err(|e| GraphError::Io(e.to_string()))?,
            None => {
                return Err(GraphError::Parse {
                    line: 1,
                    message: "missing header `n m`".into(),
                })
            }
        };
        let (n, m) = parse_pair(&header, 1, "header `n m`")?;
        let n = usize::try_from(n).map_err(|_| GraphError::TooManyVertices(usize::MAX))?;
        let mut edge_list = Vec::with_capacity(m.min(1 << 24) as usize);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            if edge_list.len() as u64 == m {
                return Err(GraphError::Parse {
                    line: lineno,
                    message: format!("more than the {m} edges announced in the header"),
                });
            }
            edge_list.push(parse_pair(&line, lineno, "edge `u v`")?);
        }
        if (edge_list.len() as u64) < m {
            return Err(GraphError::Parse {
                line: edge_list.len() + 2,
                message: format!("expected {m} edges, found {}", edge_list.len()),
            });
        }
        Graph::new(n, &edge_list).map_err(|e| match e {
            GraphError::EndpointOutOfRange { index, .. }
            | GraphError::SelfLoop { index, .. }
            | GraphError::DuplicateEdge { index, .. } => GraphError::Parse {
                line: index + 2,
                message: e.to_string(),
            },
            other => other,
        })
    }

    pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
        Self::read_edge_list(text.as_bytes())
    }
}

fn parse_pair(line: &str, lineno: usize, what: &str) -> Result<(u64, u64), GraphError> {
    let mut it = line.split_whitespace();
    let parse = |tok: Option<&str>| -> Result<u64, GraphError> {
        let tok = tok.ok_or_else(|| GraphError::Parse {
            line: lineno,
            message: format!("expected {what}, got {line:?}"),
        })?;
        tok.parse::<u64>().map_err(|_| GraphError::Parse {
            line: lineno,
            message: format!("expected {what}, `{tok}` is not a nonnegative integer"),
        })
    };
    let a = parse(it.next())?;
    let b = parse(it.next())?;
    if it.next().is_some() {
        return Err(GraphError::Parse {
            line: lineno,
            message: format!("expected {what}, got extra fields"),
        });
    }
    Ok((a, b))
}

/// Heavy/light split of the vertex set at threshold `τ` (heavy iff `d(v) > τ`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub threshold: u64,
    pub heavy: Vec<Vertex>,
    pub light: Vec<Vertex>,
    /// Sum of heavy degrees.
    pub m_heavy: u64,
    /// Sum of light degrees.
    pub m_light: u64,
    pub e_hh: u64,
    pub e_ll: u64,
    pub e_hl: u64,
}

impl Partition {
    /// `m_light / 2m`, or `None` when the graph has no edges.
    pub fn rho_light(&self) -> Option<Ratio<u64>> {
        let two_m = self.m_heavy + self.m_light;
        (two_m > 0).then(|| Ratio::new(self.m_light, two_m))
    }

    /// `m_light / n`, the mean of the truncated degree samples.
    pub fn light_mean(&self) -> Ratio<u64> {
        Ratio::new(
            self.m_light,
            (self.heavy.len() + self.light.len()).max(1) as u64,
        )
    }
}

pub fn partition_by_threshold(g: &Graph, tau: u64) -> Partition {
    let is_light = |v: Vertex| g.degree(v) as u64 <= tau;
    let (mut heavy, mut light) = (Vec::new(), Vec::new());
    let (mut m_heavy, mut m_light) = (0u64, 0u64);
    for v in 0..g.n() as Vertex {
        if is_light(v) {
            light.push(v);
            m_light += g.degree(v) as u64;
        } else {
            heavy.push(v);
            m_heavy += g.degree(v) as u64;
        }
    }
    let (mut e_hh, mut e_ll, mut e_hl) = (0u64, 0u64, 0u64);
    for &(u, v) in g.edges() {
        match (is_light(u), is_light(v)) {
            (true, true) => e_ll += 1,
            (false, false) => e_hh += 1,
            _ => e_hl += 1,
        }
    }
    debug_assert_eq!(m_light, 2 * e_ll + e_hl);
    debug_assert_eq!(m_heavy, 2 * e_hh + e_hl);
    Partition {
        threshold: tau,
        heavy,
        light,
        m_heavy,
        m_light,
        e_hh,
        e_ll,
        e_hl,
    }
}

/// `τ` is good iff `m_light ≥ m/2`, i.e. `ρ_L ≥ 1/4`.
pub fn is_good_threshold(g: &Graph, tau: u64) -> Result<bool, GraphError> {
    if g.m() == 0 {
        return Err(GraphError::EmptyEdgeSet);
    }
    let p = partition_by_threshold(g, tau);
    Ok(2 * p.m_light >= g.m() as u64)
}

/// k-core peeling number: the largest minimum degree over all subgraphs.
pub fn degeneracy(g: &Graph) -> u32 {
    let n = g.n();
    if n == 0 {
        return 0;
    }
    let mut deg: Vec<usize> = g.degrees().map(|d| d as usize).collect();
    let max_deg = *deg.iter().max().unwrap();
    // Bucket queue: vert holds vertices ordered by current degree, bin[d] is
    // the first slot of degree d, pos[v] is v's slot.
    let mut bin = vec![0usize; max_deg + 2];
    for &d in &deg {
        bin[d + 1] += 1;
    }
    for d in 1..bin.len() {
        bin[d] += bin[d - 1];
    }
    let mut pos = vec![0usize; n];
    let mut vert = vec![0usize; n];
    {
        let mut next = bin.clone();
        for v in 0..n {
            pos[v] = next[deg[v]];
            vert[pos[v]] = v;
            next[deg[v]] += 1;
        }
    }
    let mut core = 0usize;
    for i in 0..n {
        let v = vert[i];
        core = core.max(deg[v]);
        for &u in g.neighbors(v as Vertex) {
            let u = u as usize;
            if deg[u] > deg[v] {
                let du = deg[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = vert[pw];
                if u != w {
                    vert.swap(pu, pw);
                    pos[u] = pw;
                    pos[w] = pu;
                }
                bin[du] += 1;
                deg[u] -= 1;
            }
        }
    }
    core as u32
}

/// Exact arboricity by Nash–Williams: `max ⌈m_S / (|S| − 1)⌉` over vertex
/// subsets `S` with `|S| ≥ 2` (induced subgraphs dominate all others).
///
/// Returns `None` when `n` exceeds [`MAX_EXACT_ARBORICITY_N`].
pub fn arboricity_exact(g: &Graph) -> Option<u32> {
    let n = g.n();
    if n > MAX_EXACT_ARBORICITY_N {
        return None;
    }
    if g.m() == 0 {
        return Some(0);
    }
    let adj: Vec<u32> = (0..n as Vertex)
        .map(|v| g.neighbors(v).iter().fold(0u32, |mask, &u| mask | (1 << u)))
        .collect();
    let full = 1usize << n;
    let mut edges_in = vec![0u16; full];
    let mut best = 0u32;
    for s in 1..full {
        let v = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        edges_in[s] = edges_in[rest] + (adj[v] & rest as u32).count_ones() as u16;
        let size = s.count_ones();
        if size >= 2 {
            let m_s = edges_in[s] as u32;
            best = best.max(m_s.div_ceil(size - 1));
        }
    }
    Some(best)
}

/// Exact quantities the test suite and the experiment reports compare
/// estimates against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub n: u64,
    pub m: u64,
    /// `2m/n`, as `[numerator, denominator]`.
    pub avg_degree: Ratio<u64>,
    /// Threshold at which `rho_light` is evaluated: `8 · arboricity_upper`.
    pub rho_threshold: u64,
    /// `m_light / 2m` at `rho_threshold` (1 when the graph has no edges).
    pub rho_light: Ratio<u64>,
    pub arboricity_lower: u32,
    pub arboricity_upper: u32,
    pub degeneracy: u32,
    pub max_degree: u32,
}

impl GroundTruth {
    pub fn arboricity(&self) -> Option<u32> {
        (self.arboricity_lower == self.arboricity_upper).then_some(self.arboricity_lower)
    }
}

/// Ground truth with the arboricity computed by subset enumeration when
/// `n ≤ exact_arboricity_limit` (capped at [`MAX_EXACT_ARBORICITY_N`]), and
/// bracketed by `[⌈m/(n'−1)⌉, degeneracy]` otherwise, with `n'` the number of
/// non-isolated vertices.
pub fn ground_truth(g: &Graph, exact_arboricity_limit: usize) -> Result<GroundTruth, GraphError> {
    let degen = degeneracy(g);
    let (lower, upper) = match (g.n() <= exact_arboricity_limit)
        .then(|| arboricity_exact(g))
        .flatten()
    {
        Some(a) => (a, a),
        None => {
            // Isolated vertices do not help the bound, so divide by the rest.
            let active = g.degrees().filter(|&d| d > 0).count() as u64;
            let lower = if active >= 2 {
                (g.m() as u64).div_ceil(active - 1) as u32
            } else {
                0
            };
            (lower, degen)
        }
    };
    build_truth(g, lower, upper, degen)
}

/// Ground truth for a graph whose arboricity is known from its construction.
pub fn ground_truth_with_arboricity(g: &Graph, alpha: u32) -> Result<GroundTruth, GraphError> {
    build_truth(g, alpha, alpha, degeneracy(g))
}

fn build_truth(g: &Graph, lower: u32, upper: u32, degen: u32) -> Result<GroundTruth, GraphError> {
    let avg_degree = g.avg_degree()?;
    let rho_threshold = 8 * upper as u64;
    let rho_light = partition_by_threshold(g, rho_threshold)
        .rho_light()
        .unwrap_or(Ratio::from_integer(1));
    Ok(GroundTruth {
        n: g.n() as u64,
        m: g.m() as u64,
        avg_degree,
        rho_threshold,
        rho_light,
        arboricity_lower: lower,
        arboricity_upper: upper,
        degeneracy: degen,
        max_degree: g.max_degree(),
    })
}

/// Builds a graph from edges already known to be simple, in range and
/// loop-free. Used by the generators.
pub(crate) fn from_simple_edges(n: usize, edges: Vec<(Vertex, Vertex)>) -> Graph {
    Graph::from_checked_edges(n, edges).expect("generator produced a simple graph")
}

/// Set of normalised edges, for generators that must avoid duplicates.
pub(crate) type EdgeSet = HashSet<(Vertex, Vertex)>;

pub(crate) fn norm(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}
