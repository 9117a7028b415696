//! Rank-k hypergraphs with degree, codegree, neighborhood and triangle queries.
//!
//! Edges are stored canonically: each edge is a strictly increasing vertex
//! vector, and the edge list itself is sorted lexicographically. Every query
//! that enumerates edges therefore sees them in a fixed order, which is what
//! makes triangle search and the reduction rounds deterministic.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = usize;
pub type Edge = Vec<Vertex>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypergraphError {
    #[error("rank must be at least 2, got {0}")]
    RankTooSmall(usize),
    #[error("edge {edge:?} has {size} vertices; allowed sizes are 2..={rank}")]
    EdgeSize { edge: Edge, size: usize, rank: usize },
    #[error("edge {edge:?} references vertex {vertex} but the hypergraph has {num_vertices} vertices")]
    VertexOutOfRange {
        edge: Edge,
        vertex: Vertex,
        num_vertices: usize,
    },
    #[error("edge {0:?} repeats a vertex")]
    RepeatedVertex(Edge),
    #[error("duplicate edge {0:?}")]
    DuplicateEdge(Edge),
    #[error("vertex {vertex} out of range (num_vertices = {num_vertices})")]
    NoSuchVertex { vertex: Vertex, num_vertices: usize },
    #[error("edge size {size} out of range 2..={rank}")]
    NoSuchSize { size: usize, rank: usize },
    #[error("codegree needs 1 <= |S| < l <= rank, got |S| = {set_size}, l = {size}")]
    CodegreeShape { set_size: usize, size: usize },
}

/// On-disk instance format: `{"num_vertices": n, "rank": k, "edges": [[v, ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub num_vertices: usize,
    pub rank: usize,
    pub edges: Vec<Vec<Vertex>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depth {
    One,
    Two,
}

/// Maximum degrees and codegrees per edge size.
///
/// `max_degree[l]` is Δ_l, `max_codegree[(s, l)]` is δ_{s,l}. Entries are
/// absent when the hypergraph has no edge of size `l`; the accessors report
/// zero in that case.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub max_degree: BTreeMap<usize, usize>,
    pub max_codegree: BTreeMap<(usize, usize), usize>,
}

impl DegreeProfile {
    pub fn max_degree(&self, size: usize) -> usize {
        self.max_degree.get(&size).copied().unwrap_or(0)
    }

    pub fn max_codegree(&self, set_size: usize, size: usize) -> usize {
        self.max_codegree.get(&(set_size, size)).copied().unwrap_or(0)
    }
}

/// Three distinct edges e, f, g and three distinct vertices u, v, w with
/// {u,v} ⊆ e, {v,w} ⊆ f, {w,u} ⊆ g and {u,v,w} ∩ e ∩ f ∩ g = ∅.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TriangleWitness {
    pub edges: [Edge; 3],
    pub vertices: [Vertex; 3],
}

impl TriangleWitness {
    /// Checks the defining conditions directly.
    pub fn is_valid(&self) -> bool {
        let [e, f, g] = &self.edges;
        let [u, v, w] = self.vertices;
        if e == f || f == g || e == g || u == v || v == w || u == w {
            return false;
        }
        let has = |edge: &Edge, x: Vertex| edge.binary_search(&x).is_ok();
        if !(has(e, u) && has(e, v) && has(f, v) && has(f, w) && has(g, w) && has(g, u)) {
            return false;
        }
        [u, v, w].iter().all(|&x| !(has(e, x) && has(f, x) && has(g, x)))
    }
}

#[derive(Debug, Clone)]
pub struct Hypergraph {
    num_vertices: usize,
    rank: usize,
    edges: Vec<Edge>,
    index: HashMap<Edge, usize>,
    incidence: Vec<Vec<usize>>,
}

impl PartialEq for Hypergraph {
    fn eq(&self, other: &Self) -> bool {
        self.num_vertices == other.num_vertices && self.rank == other.rank && self.edges == other.edges
    }
}

impl Eq for Hypergraph {}

impl Hypergraph {
    /// Builds a hypergraph, rejecting duplicate edges.
    pub fn new<I>(num_vertices: usize, rank: usize, edges: I) -> Result<Self, HypergraphError>
    where
        I: IntoIterator<Item = Edge>,
    {
        Self::build(num_vertices, rank, edges, false)
    }

    /// Builds a hypergraph, silently merging duplicate edges.
    pub fn new_dedup<I>(num_vertices: usize, rank: usize, edges: I) -> Result<Self, HypergraphError>
    where
        I: IntoIterator<Item = Edge>,
    {
        Self::build(num_vertices, rank, edges, true)
    }

    pub fn empty(num_vertices: usize, rank: usize) -> Result<Self, HypergraphError> {
        Self::build(num_vertices, rank, std::iter::empty(), false)
    }

    fn build<I>(num_vertices: usize, rank: usize, edges: I, dedup: bool) -> Result<Self, HypergraphError>
    where
        I: IntoIterator<Item = Edge>,
    {
        if rank < 2 {
            return Err(HypergraphError::RankTooSmall(rank));
        }
        let mut canonical: Vec<Edge> = Vec::new();
        for mut edge in edges {
            edge.sort_unstable();
            if edge.len() < 2 || edge.len() > rank {
                return Err(HypergraphError::EdgeSize {
                    size: edge.len(),
                    edge,
                    rank,
                });
            }
            if edge.windows(2).any(|w| w[0] == w[1]) {
                return Err(HypergraphError::RepeatedVertex(edge));
            }
            if let Some(&vertex) = edge.iter().find(|&&v| v >= num_vertices) {
                return Err(HypergraphError::VertexOutOfRange {
                    edge,
                    vertex,
                    num_vertices,
                });
            }
            canonical.push(edge);
        }
        canonical.sort_unstable();
        if dedup {
            canonical.dedup();
        } else if let Some(w) = canonical.windows(2).find(|w| w[0] == w[1]) {
            return Err(HypergraphError::DuplicateEdge(w[0].clone()));
        }
        Ok(Self::from_canonical(num_vertices, rank, canonical))
    }

    /// `edges` must already be canonical: sorted, deduplicated, validated.
    fn from_canonical(num_vertices: usize, rank: usize, edges: Vec<Edge>) -> Self {
        let mut incidence = vec![Vec::new(); num_vertices];
        let mut index = HashMap::with_capacity(edges.len());
        for (i, edge) in edges.iter().enumerate() {
            for &v in edge {
                incidence[v].push(i);
            }
            index.insert(edge.clone(), i);
        }
        Self {
            num_vertices,
            rank,
            edges,
            index,
            incidence,
        }
    }

    pub fn from_instance(file: InstanceFile, allow_dup: bool) -> Result<Self, HypergraphError> {
        Self::build(file.num_vertices, file.rank, file.edges, allow_dup)
    }

    pub fn to_instance(&self) -> InstanceFile {
        InstanceFile {
            num_vertices: self.num_vertices,
            rank: self.rank,
            edges: self.edges.clone(),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edges in canonical (lexicographic) order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// Indices of the edges containing `v`, ascending.
    pub fn incident(&self, v: Vertex) -> &[usize] {
        &self.incidence[v]
    }

    pub fn edge_id(&self, edge: &[Vertex]) -> Option<usize> {
        self.index.get(edge).copied()
    }

    pub fn contains_edge(&self, edge: &[Vertex]) -> bool {
        self.index.contains_key(edge)
    }

    pub fn edges_of_size(&self, size: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.len() == size)
    }

    /// The largest edge size actually present (0 when empty).
    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Same edge set over a different vertex count or rank.
    pub fn with_edges<I>(&self, edges: I) -> Result<Self, HypergraphError>
    where
        I: IntoIterator<Item = Edge>,
    {
        Self::new_dedup(self.num_vertices, self.rank, edges)
    }

    fn check_vertex(&self, v: Vertex) -> Result<(), HypergraphError> {
        if v >= self.num_vertices {
            return Err(HypergraphError::NoSuchVertex {
                vertex: v,
                num_vertices: self.num_vertices,
            });
        }
        Ok(())
    }

    fn check_size(&self, size: usize) -> Result<(), HypergraphError> {
        if size < 2 || size > self.rank {
            return Err(HypergraphError::NoSuchSize { size, rank: self.rank });
        }
        Ok(())
    }

    /// Number of size-`size` edges containing `v`.
    pub fn degree(&self, v: Vertex, size: usize) -> Result<usize, HypergraphError> {
        self.check_vertex(v)?;
        self.check_size(size)?;
        Ok(self.incidence[v]
            .iter()
            .filter(|&&id| self.edges[id].len() == size)
            .count())
    }

    /// Number of size-`size` edges containing every vertex of `set`.
    pub fn codegree(&self, set: &[Vertex], size: usize) -> Result<usize, HypergraphError> {
        if set.is_empty() || set.len() >= size || size > self.rank {
            return Err(HypergraphError::CodegreeShape {
                set_size: set.len(),
                size,
            });
        }
        for &v in set {
            self.check_vertex(v)?;
        }
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != set.len() {
            return Err(HypergraphError::RepeatedVertex(set.to_vec()));
        }
        // Scan the incidence list of the rarest vertex only.
        let pivot = *sorted
            .iter()
            .min_by_key(|&&v| self.incidence[v].len())
            .expect("set is non-empty");
        Ok(self.incidence[pivot]
            .iter()
            .map(|&id| &self.edges[id])
            .filter(|e| e.len() == size && is_subset(&sorted, e))
            .count())
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        let mut profile = DegreeProfile::default();
        let sizes: BTreeSet<usize> = self.edges.iter().map(Vec::len).collect();
        for &size in &sizes {
            let max = (0..self.num_vertices)
                .map(|v| {
                    self.incidence[v]
                        .iter()
                        .filter(|&&id| self.edges[id].len() == size)
                        .count()
                })
                .max()
                .unwrap_or(0);
            profile.max_degree.insert(size, max);
            for set_size in 2..size {
                let mut counts: HashMap<Vec<Vertex>, usize> = HashMap::new();
                for edge in self.edges_of_size(size) {
                    for subset in edge.iter().copied().combinations(set_size) {
                        *counts.entry(subset).or_default() += 1;
                    }
                }
                let max = counts.values().copied().max().unwrap_or(0);
                profile.max_codegree.insert((set_size, size), max);
            }
        }
        profile
    }

    /// Vertices sharing an edge with `v` (depth one, `v` excluded), or the
    /// union of the depth-one neighborhoods of those vertices (depth two,
    /// which contains `v` itself whenever `v` lies on an edge).
    pub fn neighborhood(&self, v: Vertex, depth: Depth) -> Result<BTreeSet<Vertex>, HypergraphError> {
        self.check_vertex(v)?;
        let first = self.first_neighborhood(v);
        Ok(match depth {
            Depth::One => first,
            Depth::Two => first.iter().flat_map(|&x| self.first_neighborhood(x)).collect(),
        })
    }

    fn first_neighborhood(&self, v: Vertex) -> BTreeSet<Vertex> {
        self.incidence[v]
            .iter()
            .flat_map(|&id| self.edges[id].iter().copied())
            .filter(|&x| x != v)
            .collect()
    }

    /// Finds a triangle, or `None` if the hypergraph is triangle-free.
    ///
    /// For each pivot `v` and ordered pair of distinct edges (e, f) through
    /// it, every u ∈ e∖{v}, w ∈ f∖{v} is probed against an index of edges by
    /// contained vertex pair. The first witness in (v, e, f, u, w, g) order
    /// is returned.
    pub fn find_triangle(&self) -> Option<TriangleWitness> {
        let pairs = self.pair_index();
        for v in 0..self.num_vertices {
            let through = &self.incidence[v];
            for &ei in through {
                let e = &self.edges[ei];
                for &fi in through {
                    if fi == ei {
                        continue;
                    }
                    let f = &self.edges[fi];
                    for &u in e {
                        if u == v || f.binary_search(&u).is_ok() {
                            continue;
                        }
                        for &w in f {
                            if w == v || w == u || e.binary_search(&w).is_ok() {
                                continue;
                            }
                            let key = (u.min(w), u.max(w));
                            let Some(candidates) = pairs.get(&key) else {
                                continue;
                            };
                            for &gi in candidates {
                                if gi == ei || gi == fi {
                                    continue;
                                }
                                let g = &self.edges[gi];
                                if g.binary_search(&v).is_ok() {
                                    continue;
                                }
                                return Some(TriangleWitness {
                                    edges: [e.clone(), f.clone(), g.clone()],
                                    vertices: [u, v, w],
                                });
                            }
                        }
                    }
                }
            }
        }
        None
    }

    pub fn is_triangle_free(&self) -> bool {
        self.find_triangle().is_none()
    }

    fn pair_index(&self) -> HashMap<(Vertex, Vertex), Vec<usize>> {
        let mut pairs: HashMap<(Vertex, Vertex), Vec<usize>> = HashMap::new();
        for (id, edge) in self.edges.iter().enumerate() {
            for (i, &a) in edge.iter().enumerate() {
                for &b in &edge[i + 1..] {
                    pairs.entry((a, b)).or_default().push(id);
                }
            }
        }
        pairs
    }

    /// True when no edge strictly contains another edge.
    pub fn is_subsumption_free(&self) -> bool {
        self.edges.iter().all(|e| !self.has_proper_sub_edge(e))
    }

    /// Drops every edge that strictly contains another edge.
    pub fn prune_subsumed(&self) -> Self {
        let kept: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| !self.has_proper_sub_edge(e))
            .cloned()
            .collect();
        Self::from_canonical(self.num_vertices, self.rank, kept)
    }

    fn has_proper_sub_edge(&self, edge: &Edge) -> bool {
        (2..edge.len()).any(|size| {
            edge.iter()
                .copied()
                .combinations(size)
                .any(|sub| self.index.contains_key(&sub))
        })
    }

    /// Whether the edge with id `id` receives a single color under `color_of`.
    /// Uncolored vertices never make an edge monochromatic.
    pub fn is_monochromatic<C, F>(&self, id: usize, color_of: F) -> bool
    where
        C: PartialEq,
        F: Fn(Vertex) -> Option<C>,
    {
        let edge = &self.edges[id];
        let Some(first) = color_of(edge[0]) else {
            return false;
        };
        edge[1..].iter().all(|&v| color_of(v).is_some_and(|c| c == first))
    }
}

/// `small ⊆ big` for strictly increasing slices.
pub fn is_subset(small: &[Vertex], big: &[Vertex]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

impl Serialize for Hypergraph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_instance().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Hypergraph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = InstanceFile::deserialize(deserializer)?;
        Hypergraph::from_instance(file, false).map_err(serde::de::Error::custom)
    }
}
