//! Probability that a color survives activation of its neighbors.
//!
//! Given the residuals `e \ {u}` of the constraint edges through `u`, a color
//! is lost when some residual is fully activated. Each vertex is activated
//! independently with probability π.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::hypergraph::Vertex;

/// Largest number of residuals the exact method accepts.
pub const EXACT_LIMIT: usize = 20;

pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QMethod {
    Exact,
    MonteCarlo {
        samples: usize,
    },
    /// Exact up to [`EXACT_LIMIT`] residuals, sampling beyond.
    Auto {
        samples: usize,
    },
}

impl Default for QMethod {
    fn default() -> Self {
        QMethod::Auto {
            samples: DEFAULT_SAMPLES,
        }
    }
}

/// Exact survival probability by inclusion–exclusion.
///
/// Residuals that share no vertex fail independently, so the sum runs
/// separately inside each connected component and the results multiply.
/// Returns `None` above [`EXACT_LIMIT`] residuals.
pub fn exact(residuals: &[Vec<Vertex>], pi: f64) -> Option<f64> {
    if residuals.len() > EXACT_LIMIT {
        return None;
    }
    let mut q = 1.0;
    for component in components(residuals) {
        let local = relabel(&component);
        let width = local.iter().flatten().max().map_or(0, |m| m + 1);
        let mut cover = vec![0u32; width];
        let mut sum = 0.0;
        subsets(&local, 0, false, 0, &mut cover, pi, &mut sum);
        q *= sum;
    }
    Some(q.clamp(0.0, 1.0))
}

/// Σ over subsets S of (−1)^{|S|} π^{|∪S|}, by depth-first enumeration.
fn subsets(edges: &[Vec<usize>], next: usize, odd: bool, covered: usize, cover: &mut [u32], pi: f64, sum: &mut f64) {
    if next == edges.len() {
        let term = pi.powi(covered as i32);
        *sum += if odd { -term } else { term };
        return;
    }
    subsets(edges, next + 1, odd, covered, cover, pi, sum);
    let mut grown = covered;
    for &v in &edges[next] {
        if cover[v] == 0 {
            grown += 1;
        }
        cover[v] += 1;
    }
    subsets(edges, next + 1, !odd, grown, cover, pi, sum);
    for &v in &edges[next] {
        cover[v] -= 1;
    }
}

fn components(residuals: &[Vec<Vertex>]) -> Vec<Vec<&Vec<Vertex>>> {
    let mut parent: Vec<usize> = (0..residuals.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut owner: HashMap<Vertex, usize> = HashMap::new();
    for (i, r) in residuals.iter().enumerate() {
        for &v in r {
            if let Some(&j) = owner.get(&v) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            } else {
                owner.insert(v, i);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<&Vec<Vertex>>> = HashMap::new();
    for (i, r) in residuals.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(r);
    }
    let mut out: Vec<_> = groups.into_values().collect();
    out.sort();
    out
}

fn relabel(edges: &[&Vec<Vertex>]) -> Vec<Vec<usize>> {
    let mut ids: HashMap<Vertex, usize> = HashMap::new();
    edges
        .iter()
        .map(|e| {
            e.iter()
                .map(|&v| {
                    let next = ids.len();
                    *ids.entry(v).or_insert(next)
                })
                .collect()
        })
        .collect()
}

/// Fraction of `samples` activation patterns in which no residual is fully
/// activated.
pub fn monte_carlo<R: Rng>(residuals: &[Vec<Vertex>], pi: f64, samples: usize, rng: &mut R) -> f64 {
    if residuals.is_empty() || samples == 0 {
        return 1.0;
    }
    let mut vertices: Vec<Vertex> = residuals.iter().flatten().copied().collect();
    vertices.sort_unstable();
    vertices.dedup();
    let local: Vec<Vec<usize>> = residuals
        .iter()
        .map(|r| r.iter().map(|v| vertices.binary_search(v).unwrap()).collect())
        .collect();
    let mut active = vec![false; vertices.len()];
    let mut survived = 0usize;
    for _ in 0..samples {
        for a in active.iter_mut() {
            *a = rng.random::<f64>() < pi;
        }
        if !local.iter().any(|r| r.iter().all(|&v| active[v])) {
            survived += 1;
        }
    }
    survived as f64 / samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn no_residuals() {
        assert_eq!(exact(&[], 0.3), Some(1.0));
    }

    #[test]
    fn single_pair_edge() {
        let q = exact(&[vec![5]], 0.3).unwrap();
        assert!((q - 0.7).abs() < 1e-15);
    }

    #[test]
    fn two_triples_sharing_a_vertex() {
        let pi: f64 = 0.35;
        let r = [vec![1, 2], vec![2, 3]];
        let q = exact(&r, pi).unwrap();
        let want = 1.0 - 2.0 * pi.powi(2) + pi.powi(3);
        assert!((q - want).abs() < 1e-14);

        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mc = monte_carlo(&r, pi, n, &mut rng);
        let se = (want * (1.0 - want) / n as f64).sqrt();
        assert!((mc - want).abs() < 3.0 * se, "mc {mc} want {want}");
    }

    #[test]
    fn disjoint_residuals_multiply() {
        let pi: f64 = 0.2;
        let r = [vec![1, 2], vec![3], vec![4, 5, 6]];
        let q = exact(&r, pi).unwrap();
        let want = (1.0 - pi * pi) * (1.0 - pi) * (1.0 - pi.powi(3));
        assert!((q - want).abs() < 1e-14);
    }

    #[test]
    fn refuses_large_inputs() {
        let r: Vec<Vec<usize>> = (0..21).map(|i| vec![i]).collect();
        assert_eq!(exact(&r, 0.1), None);
        assert!(exact(&r[..20], 0.1).is_some());
    }

    #[test]
    fn agrees_with_enumeration_over_activations() {
        let r = [vec![1, 2], vec![2, 3], vec![3, 4], vec![1, 4], vec![2, 4]];
        let pi: f64 = 0.4;
        let mut want = 0.0;
        for mask in 0u32..16 {
            let on = |v: usize| mask >> (v - 1) & 1 == 1;
            if r.iter().any(|e| e.iter().all(|&v| on(v))) {
                continue;
            }
            let k = mask.count_ones() as i32;
            want += pi.powi(k) * (1.0 - pi).powi(4 - k);
        }
        assert!((exact(&r, pi).unwrap() - want).abs() < 1e-14);
    }
}
