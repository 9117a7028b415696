//! Naive reference checks. Nothing here calls into the indexed query code of
//! [`crate::hypergraph`]; each check rescans the raw edge list.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::coloring::{ColorId, Coloring, ListAssignment};
use crate::hypergraph::{Edge, Hypergraph, TriangleWitness, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProperReport {
    pub monochromatic: Vec<Edge>,
    pub uncolored: Vec<Vertex>,
    /// Some vertex is uncolored; edges touching it were not judged.
    pub partial: bool,
}

impl ProperReport {
    pub fn is_clean(&self) -> bool {
        self.monochromatic.is_empty() && !self.partial
    }
}

/// Lists every edge whose vertices are all colored alike.
pub fn verify_proper(h: &Hypergraph, coloring: &Coloring) -> ProperReport {
    let n = h.num_vertices().min(coloring.num_vertices());
    let uncolored: Vec<Vertex> = (0..h.num_vertices())
        .filter(|&v| v >= n || coloring.get(v).is_none())
        .collect();
    let color = |v: Vertex| if v < n { coloring.get(v) } else { None };
    let mut monochromatic = Vec::new();
    for e in h.edges() {
        let colors: Vec<Option<ColorId>> = e.iter().map(|&v| color(v)).collect();
        if colors.iter().any(Option::is_none) {
            continue;
        }
        if colors.iter().all(|c| *c == colors[0]) {
            monochromatic.push(e.clone());
        }
    }
    ProperReport {
        monochromatic,
        partial: !uncolored.is_empty(),
        uncolored,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffList {
    pub vertex: Vertex,
    pub color: ColorId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListReport {
    pub proper: ProperReport,
    pub off_list: Vec<OffList>,
}

impl ListReport {
    pub fn is_clean(&self) -> bool {
        self.proper.is_clean() && self.off_list.is_empty()
    }
}

/// Proper, and every vertex colored from its own list.
pub fn verify_list(h: &Hypergraph, lists: &ListAssignment, coloring: &Coloring) -> ListReport {
    let mut off_list = Vec::new();
    for v in 0..coloring.num_vertices() {
        if let Some(c) = coloring.get(v) {
            let allowed = v < lists.num_vertices() && lists.list(v).contains(&c);
            if !allowed {
                off_list.push(OffList { vertex: v, color: c });
            }
        }
    }
    ListReport {
        proper: verify_proper(h, coloring),
        off_list,
    }
}

/// Every ordered triangle configuration: all ordered triples of distinct
/// edges and all vertex triples satisfying the definition.
pub fn brute_triangles(h: &Hypergraph) -> BTreeSet<TriangleWitness> {
    let edges = h.edges();
    let has = |e: &Edge, x: Vertex| e.contains(&x);
    let mut out = BTreeSet::new();
    for (a, e) in edges.iter().enumerate() {
        for (b, f) in edges.iter().enumerate() {
            for (c, g) in edges.iter().enumerate() {
                if a == b || b == c || a == c {
                    continue;
                }
                for &u in e {
                    for &v in e {
                        for &w in f {
                            if u == v || v == w || u == w {
                                continue;
                            }
                            if !(has(f, v) && has(g, w) && has(g, u)) {
                                continue;
                            }
                            let shared = [u, v, w].iter().any(|&x| has(e, x) && has(f, x) && has(g, x));
                            if !shared {
                                out.insert(TriangleWitness {
                                    edges: [e.clone(), f.clone(), g.clone()],
                                    vertices: [u, v, w],
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Number of size-`size` edges containing `v`, by rescanning.
pub fn brute_degree(h: &Hypergraph, v: Vertex, size: usize) -> usize {
    h.edges().iter().filter(|e| e.len() == size && e.contains(&v)).count()
}

/// Number of size-`size` edges containing every vertex of `set`.
pub fn brute_codegree(h: &Hypergraph, set: &[Vertex], size: usize) -> usize {
    h.edges()
        .iter()
        .filter(|e| e.len() == size && set.iter().all(|x| e.contains(x)))
        .count()
}

/// δ_{s,l}: the maximum codegree over all s-subsets of size-l edges. Sets
/// outside every edge have codegree zero, so only edge subsets are tried.
pub fn brute_max_codegree(h: &Hypergraph, s: usize, size: usize) -> usize {
    let mut best = 0;
    for e in h.edges().iter().filter(|e| e.len() == size) {
        for_each_subset(e, s, &mut |set| best = best.max(brute_codegree(h, set, size)));
    }
    best
}

fn for_each_subset<F: FnMut(&[Vertex])>(items: &[Vertex], s: usize, f: &mut F) {
    fn go<F: FnMut(&[Vertex])>(items: &[Vertex], s: usize, from: usize, acc: &mut Vec<Vertex>, f: &mut F) {
        if acc.len() == s {
            f(acc);
            return;
        }
        for i in from..items.len() {
            acc.push(items[i]);
            go(items, s, i + 1, acc, f);
            acc.pop();
        }
    }
    go(items, s, 0, &mut Vec::with_capacity(s), f);
}

/// Whether some edge strictly contains another, by pairwise comparison.
pub fn brute_has_subsumption(h: &Hypergraph) -> bool {
    let edges = h.edges();
    edges.iter().any(|a| {
        edges
            .iter()
            .any(|b| a.len() < b.len() && a.iter().all(|x| b.contains(x)))
    })
}
