//! Directed graphs with eagerly computed all-pairs hop distances.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::ops::Add;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MapfError, Result};

/// A vertex index in `[0, node_count)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex(pub u32);

impl Vertex {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for Vertex {
    fn from(v: usize) -> Self {
        Vertex(v as u32)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A hop count, or the unreachable sentinel.
///
/// `Finite` orders before `Unreachable`, and any sum involving
/// `Unreachable` stays `Unreachable`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hops {
    Finite(u64),
    Unreachable,
}

impl Hops {
    pub const ZERO: Hops = Hops::Finite(0);

    pub fn finite(self) -> Option<u64> {
        match self {
            Hops::Finite(h) => Some(h),
            Hops::Unreachable => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Hops::Finite(_))
    }

    /// True when `self` is finite and at most `bound`.
    pub fn within(self, bound: u64) -> bool {
        matches!(self, Hops::Finite(h) if h <= bound)
    }
}

impl Add for Hops {
    type Output = Hops;

    fn add(self, rhs: Hops) -> Hops {
        match (self, rhs) {
            (Hops::Finite(a), Hops::Finite(b)) => Hops::Finite(a + b),
            _ => Hops::Unreachable,
        }
    }
}

impl std::iter::Sum for Hops {
    fn sum<I: Iterator<Item = Hops>>(iter: I) -> Hops {
        iter.fold(Hops::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Hops {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hops::Finite(h) => write!(f, "{h}"),
            Hops::Unreachable => write!(f, "inf"),
        }
    }
}

const UNREACHABLE: u32 = u32::MAX;

/// Immutable directed graph without self-loops.
///
/// `dist[v * n + u]` holds the length of the shortest path from `v` to `u`.
#[derive(Clone, Debug)]
pub struct DiGraph {
    node_count: usize,
    edges: BTreeSet<(Vertex, Vertex)>,
    adjacency: Vec<Vec<Vertex>>,
    dist: Vec<u32>,
}

impl DiGraph {
    /// Builds the graph and runs one BFS per source. Duplicate edges are merged.
    pub fn new(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if node_count == 0 {
            return Err(MapfError::EmptyGraph);
        }
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= node_count {
                    return Err(MapfError::VertexOutOfRange { vertex: w, node_count });
                }
            }
            if u == v {
                return Err(MapfError::SelfLoop(u));
            }
            set.insert((Vertex::from(u), Vertex::from(v)));
        }
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in &set {
            adjacency[u.index()].push(v);
        }
        let mut graph = DiGraph {
            node_count,
            edges: set,
            adjacency,
            dist: Vec::new(),
        };
        graph.dist = graph.all_pairs_bfs();
        Ok(graph)
    }

    fn all_pairs_bfs(&self) -> Vec<u32> {
        let n = self.node_count;
        let mut dist = vec![UNREACHABLE; n * n];
        let mut queue = VecDeque::with_capacity(n);
        for source in 0..n {
            let row = &mut dist[source * n..(source + 1) * n];
            row[source] = 0;
            queue.clear();
            queue.push_back(source);
            while let Some(v) = queue.pop_front() {
                let next = row[v] + 1;
                for &w in &self.adjacency[v] {
                    if row[w.index()] == UNREACHABLE {
                        row[w.index()] = next;
                        queue.push_back(w.index());
                    }
                }
            }
        }
        dist
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, from: Vertex, to: Vertex) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn out_neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adjacency[v.index()]
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.index() < self.node_count
    }

    /// Length of the shortest path from `from` to `to`.
    #[inline]
    pub fn hops(&self, from: Vertex, to: Vertex) -> Hops {
        match self.dist[from.index() * self.node_count + to.index()] {
            UNREACHABLE => Hops::Unreachable,
            h => Hops::Finite(h as u64),
        }
    }

    /// Distance of `u` from `v`: the shortest path from `v` to `u`.
    ///
    /// Note the argument order, which follows the configuration distance
    /// convention `d(new, reference)`.
    #[inline]
    pub fn vertex_distance(&self, u: Vertex, v: Vertex) -> Hops {
        self.hops(v, u)
    }

    /// Maximum out-degree over all vertices.
    pub fn max_out_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.dist.iter().all(|&d| d != UNREACHABLE)
    }

    /// Vertices `u` with `vertex_distance(u, v) <= r`.
    pub fn vertex_ball(&self, v: Vertex, r: u64) -> BTreeSet<Vertex> {
        (0..self.node_count)
            .map(Vertex::from)
            .filter(|&u| self.vertex_distance(u, v).within(r))
            .collect()
    }

    /// Vertices at distance exactly `r` from `v`.
    pub fn ball_border(&self, v: Vertex, r: u64) -> BTreeSet<Vertex> {
        (0..self.node_count)
            .map(Vertex::from)
            .filter(|&u| self.vertex_distance(u, v) == Hops::Finite(r))
            .collect()
    }

    /// Samples `edge_count` distinct non-loop ordered pairs uniformly.
    ///
    /// The result need not be strongly connected; callers filter.
    pub fn random(node_count: usize, edge_count: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(node_count, edge_count, &mut rng)
    }

    pub fn random_with<R: Rng>(node_count: usize, edge_count: usize, rng: &mut R) -> Result<Self> {
        if node_count < 2 {
            return Err(MapfError::Parameter(format!(
                "random graph needs at least 2 nodes, got {node_count}"
            )));
        }
        if edge_count < node_count {
            return Err(MapfError::Parameter(format!(
                "edge count {edge_count} below node count {node_count}; strong connectivity impossible"
            )));
        }
        let max_edges = node_count * (node_count - 1);
        if edge_count > max_edges {
            return Err(MapfError::Parameter(format!(
                "edge count {edge_count} exceeds {max_edges} possible ordered pairs"
            )));
        }
        let mut seen = HashSet::with_capacity(edge_count);
        let mut edges = Vec::with_capacity(edge_count);
        while edges.len() < edge_count {
            let u = rng.random_range(0..node_count);
            let v = rng.random_range(0..node_count);
            if u != v && seen.insert((u, v)) {
                edges.push((u, v));
            }
        }
        Self::new(node_count, &edges)
    }

    /// Parses the textual format: a header `n m` followed by `m` lines `u v`.
    ///
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (header_line, header) = lines.next().ok_or(MapfError::Parse {
            line: 1,
            message: "missing `n m` header".into(),
        })?;
        let (n, m) = parse_pair(header_line, header)?;
        let mut edges = Vec::with_capacity(m);
        for (line, content) in lines {
            let (u, v) = parse_pair(line, content)?;
            for w in [u, v] {
                if w >= n {
                    return Err(MapfError::Parse {
                        line,
                        message: format!("vertex {w} out of range for {n} nodes"),
                    });
                }
            }
            if u == v {
                return Err(MapfError::Parse {
                    line,
                    message: format!("self-loop on vertex {u}"),
                });
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(MapfError::Parse {
                line: text.lines().count(),
                message: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        Self::new(n, &edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.node_count, self.edges.len());
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|&(u, v)| (u.index(), v.index())).collect()
    }
}

fn parse_pair(line: usize, content: &str) -> Result<(usize, usize)> {
    let mut fields = content.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        let token = fields.next().ok_or_else(|| MapfError::Parse {
            line,
            message: format!("missing {what}"),
        })?;
        token.parse().map_err(|_| MapfError::Parse {
            line,
            message: format!("invalid {what} `{token}`"),
        })
    };
    let a = next("first integer")?;
    let b = next("second integer")?;
    if let Some(extra) = fields.next() {
        return Err(MapfError::Parse {
            line,
            message: format!("unexpected trailing token `{extra}`"),
        });
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle4() -> DiGraph {
        DiGraph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
    }

    fn v(i: u32) -> Vertex {
        Vertex(i)
    }

    #[test]
    fn cycle_distances() {
        let g = cycle4();
        assert_eq!(g.hops(v(0), v(2)), Hops::Finite(2));
        assert_eq!(g.vertex_distance(v(0), v(1)), Hops::Finite(3));
        assert_eq!(g.vertex_distance(v(3), v(3)), Hops::ZERO);
        assert!(g.is_strongly_connected());
        assert_eq!(g.max_out_degree(), 1);
    }

    #[test]
    fn unreachable_sentinel() {
        let g = DiGraph::new(2, &[(0, 1)]).unwrap();
        assert_eq!(g.hops(v(1), v(0)), Hops::Unreachable);
        assert_eq!(Hops::Finite(3) + Hops::Unreachable, Hops::Unreachable);
        assert!(Hops::Finite(u64::MAX) < Hops::Unreachable);
        assert!(!g.is_strongly_connected());
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(DiGraph::new(3, &[(1, 1)]), Err(MapfError::SelfLoop(1))));
        assert!(matches!(
            DiGraph::new(3, &[(0, 3)]),
            Err(MapfError::VertexOutOfRange { vertex: 3, .. })
        ));
        assert!(DiGraph::new(0, &[]).is_err());
    }

    #[test]
    fn connectivity_cases() {
        let two_cycles = DiGraph::new(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        assert!(!two_cycles.is_strongly_connected());
        let path = DiGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(!path.is_strongly_connected());
    }

    #[test]
    fn star_out_degree() {
        let edges: Vec<_> = (1..6).map(|i| (0, i)).collect();
        let g = DiGraph::new(6, &edges).unwrap();
        assert_eq!(g.max_out_degree(), 5);
    }

    #[test]
    fn balls_on_cycle() {
        let g = cycle4();
        assert_eq!(g.vertex_ball(v(0), 0), [v(0)].into_iter().collect());
        assert_eq!(g.vertex_ball(v(0), 2), [v(0), v(1), v(2)].into_iter().collect());
        assert_eq!(g.ball_border(v(0), 2), [v(2)].into_iter().collect());
    }

    #[test]
    fn random_graph_is_deterministic() {
        let a = DiGraph::random(20, 80, 11).unwrap();
        let b = DiGraph::random(20, 80, 11).unwrap();
        assert_eq!(a.edge_count(), 80);
        assert_eq!(a.edge_list(), b.edge_list());
        assert!(DiGraph::random(5, 4, 1).is_err());
    }

    #[test]
    fn text_roundtrip_and_errors() {
        let g = cycle4();
        let back = DiGraph::parse(&g.to_text()).unwrap();
        assert_eq!(back.edge_list(), g.edge_list());

        let err = DiGraph::parse("3 2\n0 1\n1 x\n").unwrap_err();
        assert!(matches!(err, MapfError::Parse { line: 3, .. }), "{err}");
        let err = DiGraph::parse("3 1\n0 5\n").unwrap_err();
        assert!(matches!(err, MapfError::Parse { line: 2, .. }), "{err}");
        let err = DiGraph::parse("3 2\n0 1\n").unwrap_err();
        assert!(matches!(err, MapfError::Parse { .. }));
        let err = DiGraph::parse("3 1\n2 2\n").unwrap_err();
        assert!(matches!(err, MapfError::Parse { line: 2, .. }));
    }
}
