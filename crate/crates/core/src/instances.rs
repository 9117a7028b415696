//! Seeded generators for test hypergraphs and color lists.

use std::collections::{BTreeSet, HashSet};

use itertools::Itertools;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{ColorId, ColorNames, ListAssignment};
use crate::hypergraph::{Edge, Hypergraph, HypergraphError};
use crate::rng::{self, Purpose};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("cannot place {m} distinct {k}-sets on {n} vertices")]
    TooManyEdges { n: usize, k: usize, m: usize },
    #[error("list size {size} exceeds the color pool of {pool}")]
    ListTooLarge { size: usize, pool: usize },
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
}

/// C(n, k), saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(x) => x / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn generator(seed: u64, tag: u64) -> ChaCha8Rng {
    rng::stream(seed, Purpose::Generate, &[tag])
}

/// Enumerating every k-set is cheaper than rejection below this many.
const ENUMERATE_LIMIT: u128 = 200_000;

fn sample_sets(n: usize, k: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Edge>, InstanceError> {
    let total = binomial(n, k);
    if m as u128 > total || (m > 0 && k < 2) {
        return Err(InstanceError::TooManyEdges { n, k, m });
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    if total <= ENUMERATE_LIMIT && (m as u128) * 2 > total {
        let mut all: Vec<Edge> = (0..n).combinations(k).collect();
        all.shuffle(rng);
        all.truncate(m);
        return Ok(all);
    }
    let mut seen: HashSet<Edge> = HashSet::with_capacity(m);
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let mut e: Edge = index::sample(rng, n, k).into_vec();
        e.sort_unstable();
        if seen.insert(e.clone()) {
            out.push(e);
        }
    }
    Ok(out)
}

/// `m` distinct uniformly random `k`-sets on `n` vertices.
pub fn gen_uniform(n: usize, k: usize, m: usize, seed: u64) -> Result<Hypergraph, InstanceError> {
    let edges = sample_sets(n, k, m, &mut generator(seed, k as u64))?;
    Ok(Hypergraph::new(n, k.max(2), edges)?)
}

/// Union of independent uniform layers; `sizes` pairs an edge size with its
/// edge count.
pub fn gen_mixed(n: usize, sizes: &[(usize, usize)], rank: usize, seed: u64) -> Result<Hypergraph, InstanceError> {
    let mut edges = Vec::new();
    for &(k, m) in sizes {
        edges.extend(sample_sets(n, k, m, &mut generator(seed, k as u64))?);
    }
    Ok(Hypergraph::new(n, rank, edges)?)
}

/// Deletes a uniformly chosen edge of the first triangle found until none is
/// left.
pub fn make_triangle_free(h: &Hypergraph, seed: u64) -> Hypergraph {
    let mut rng = generator(seed, 0x7472_6961);
    let mut current = h.clone();
    while let Some(w) = current.find_triangle() {
        let victim = &w.edges[rng.random_range(0..3)];
        let kept: Vec<Edge> = current.edges().iter().filter(|e| *e != victim).cloned().collect();
        current = current.with_edges(kept).expect("subset of a valid edge set");
    }
    current
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearOutcome {
    pub hypergraph: Hypergraph,
    /// Whether all `m` edges were packed.
    pub reached: bool,
    pub attempts: usize,
}

const LINEAR_RESTARTS: usize = 200;

/// Randomized greedy packing of `k`-sets pairwise meeting in at most one
/// vertex, restarted until `m` edges fit or the attempt budget runs out.
/// The best packing found is returned either way.
pub fn gen_linear(n: usize, k: usize, m: usize, seed: u64) -> Result<LinearOutcome, InstanceError> {
    if k < 2 || (m > 0 && k > n) {
        return Err(InstanceError::TooManyEdges { n, k, m });
    }
    let total = binomial(n, k);
    let mut best: Vec<Edge> = Vec::new();
    let mut attempts = 0;
    for attempt in 0..LINEAR_RESTARTS {
        attempts = attempt + 1;
        let mut rng = generator(seed, 0x6c69_6e00 + attempt as u64);
        let mut pairs: HashSet<(usize, usize)> = HashSet::new();
        let mut edges: BTreeSet<Edge> = BTreeSet::new();
        let fits = |e: &Edge, pairs: &mut HashSet<(usize, usize)>| {
            let ps: Vec<(usize, usize)> = e.iter().copied().tuple_combinations().collect();
            if ps.iter().any(|p| pairs.contains(p)) {
                return false;
            }
            pairs.extend(ps);
            true
        };
        if total <= ENUMERATE_LIMIT {
            let mut all: Vec<Edge> = (0..n).combinations(k).collect();
            all.shuffle(&mut rng);
            for e in all {
                if edges.len() == m {
                    break;
                }
                if fits(&e, &mut pairs) {
                    edges.insert(e);
                }
            }
        } else {
            let mut misses = 0;
            while edges.len() < m && misses < 50 * m.max(1) {
                let mut e: Edge = index::sample(&mut rng, n, k).into_vec();
                e.sort_unstable();
                if fits(&e, &mut pairs) {
                    edges.insert(e);
                } else {
                    misses += 1;
                }
            }
        }
        if edges.len() > best.len() {
            best = edges.into_iter().collect();
        }
        if best.len() == m {
            break;
        }
    }
    let reached = best.len() == m;
    Ok(LinearOutcome {
        hypergraph: Hypergraph::new(n, k, best)?,
        reached,
        attempts,
    })
}

/// Each vertex gets `size` distinct colors drawn uniformly from a pool of
/// `pool` colors named `c0..`.
pub fn gen_lists(n: usize, size: usize, pool: usize, seed: u64) -> Result<ListAssignment, InstanceError> {
    if size > pool {
        return Err(InstanceError::ListTooLarge { size, pool });
    }
    let mut rng = generator(seed, 0x6c69_7374);
    let lists = (0..n)
        .map(|_| {
            index::sample(&mut rng, pool, size)
                .into_iter()
                .map(|c| ColorId(c as u32))
                .collect()
        })
        .collect();
    Ok(ListAssignment::new(lists, ColorNames::numbered(pool)))
}
