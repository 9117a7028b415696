//! Codegree reduction ("f-reduction") and the adaptive Λ-balanced variant.
//!
//! Round `i` (for `i = 1..=k-2`) looks at vertex sets `S` of size `s = k - i`.
//! Every `S` whose size-`l` codegree reaches the threshold `f(s, l)` for some
//! `l > s` is contracted: all size-`l` edges containing `S` are removed and
//! `S` itself becomes an edge. Any proper coloring of the output is proper for
//! the input, codegrees end up bounded by `f`, and triangle-freeness survives.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::Coloring;
use crate::hypergraph::{Edge, Hypergraph, HypergraphError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("policy is missing f({s}, {l})")]
    MissingThreshold { s: usize, l: usize },
    #[error("policy needs f({l}, {l}) = 1, got {value}")]
    DiagonalNotOne { l: usize, value: f64 },
    #[error("policy needs f({s1}, {l}) < f({s2}, {l}) for {s1} > {s2}, got {v1} >= {v2}")]
    NotDecreasing {
        s1: usize,
        s2: usize,
        l: usize,
        v1: f64,
        v2: f64,
    },
    #[error("policy value f({s}, {l}) = {value} is not finite and positive")]
    BadValue { s: usize, l: usize, value: f64 },
    #[error("policy is for rank {policy} but the hypergraph has rank {hypergraph}")]
    RankMismatch { policy: usize, hypergraph: usize },
    #[error("balanced reduction needs rank >= 3, got {0}")]
    RankTooSmall(usize),
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
}

/// Threshold function f(s, l) for `2 <= s <= l <= rank`.
///
/// Valid policies have f(l, l) = 1 and are strictly decreasing in `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionPolicy {
    rank: usize,
    thresholds: BTreeMap<(usize, usize), f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyEntry {
    pub s: usize,
    pub l: usize,
    pub f: f64,
}

/// `{"rank": k, "thresholds": [{"s": 2, "l": 3, "f": 2.0}, ...]}`; diagonal
/// entries may be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub rank: usize,
    pub thresholds: Vec<PolicyEntry>,
}

impl ReductionPolicy {
    pub fn from_fn<F: Fn(usize, usize) -> f64>(rank: usize, f: F) -> Result<Self, ReductionError> {
        let mut thresholds = BTreeMap::new();
        for l in 2..=rank {
            for s in 2..=l {
                thresholds.insert((s, l), f(s, l));
            }
        }
        Self::validated(rank, thresholds)
    }

    /// f(s, l) = base^(l - s); valid iff base > 1.
    pub fn geometric(rank: usize, base: f64) -> Result<Self, ReductionError> {
        Self::from_fn(rank, |s, l| base.powi((l - s) as i32))
    }

    pub fn from_file(file: &PolicyFile) -> Result<Self, ReductionError> {
        let mut thresholds = BTreeMap::new();
        for l in 2..=file.rank {
            thresholds.insert((l, l), 1.0);
        }
        for entry in &file.thresholds {
            thresholds.insert((entry.s, entry.l), entry.f);
        }
        Self::validated(file.rank, thresholds)
    }

    pub fn to_file(&self) -> PolicyFile {
        PolicyFile {
            rank: self.rank,
            thresholds: self
                .thresholds
                .iter()
                .filter(|((s, l), _)| s < l)
                .map(|(&(s, l), &f)| PolicyEntry { s, l, f })
                .collect(),
        }
    }

    fn validated(rank: usize, thresholds: BTreeMap<(usize, usize), f64>) -> Result<Self, ReductionError> {
        let get = |s: usize, l: usize| {
            thresholds
                .get(&(s, l))
                .copied()
                .ok_or(ReductionError::MissingThreshold { s, l })
        };
        for l in 2..=rank {
            let diag = get(l, l)?;
            if diag != 1.0 {
                return Err(ReductionError::DiagonalNotOne { l, value: diag });
            }
            for s in 2..l {
                let value = get(s, l)?;
                if !(value.is_finite() && value > 0.0) {
                    return Err(ReductionError::BadValue { s, l, value });
                }
                let above = get(s + 1, l)?;
                if above >= value {
                    return Err(ReductionError::NotDecreasing {
                        s1: s + 1,
                        s2: s,
                        l,
                        v1: above,
                        v2: value,
                    });
                }
            }
        }
        Ok(Self { rank, thresholds })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn threshold(&self, s: usize, l: usize) -> f64 {
        self.thresholds[&(s, l)]
    }
}

/// How contractions inside one round interact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContractionMode {
    /// Qualifying sets are all determined against the hypergraph as it was at
    /// the start of the round, then every removal and addition is applied.
    #[default]
    Snapshot,
    /// Qualifying sets are visited in lexicographic order and each one is
    /// re-checked against the edges still alive, so every contraction removes
    /// at least `f(s, l)` edges that were actually present. This keeps the
    /// weighted degree sum from ever increasing.
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contraction {
    pub set: Edge,
    /// Size of the removed superedges.
    pub size: usize,
    pub removed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionRound {
    pub round: usize,
    pub set_size: usize,
    pub contractions: Vec<Contraction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub rounds: Vec<ReductionRound>,
    #[serde(rename = "final")]
    pub result: Hypergraph,
}

impl ReductionTrace {
    pub fn contraction_count(&self) -> usize {
        self.rounds.iter().map(|r| r.contractions.len()).sum()
    }
}

/// f-reduction with snapshot semantics.
pub fn f_reduce(h: &Hypergraph, policy: &ReductionPolicy) -> Result<ReductionTrace, ReductionError> {
    f_reduce_with(h, policy, ContractionMode::Snapshot)
}

pub fn f_reduce_with(
    h: &Hypergraph,
    policy: &ReductionPolicy,
    mode: ContractionMode,
) -> Result<ReductionTrace, ReductionError> {
    if policy.rank() < h.rank() {
        return Err(ReductionError::RankMismatch {
            policy: policy.rank(),
            hypergraph: h.rank(),
        });
    }
    let k = h.rank();
    let mut current = h.clone();
    let mut rounds = Vec::with_capacity(k.saturating_sub(2));
    for i in 1..=k.saturating_sub(2) {
        let s = k - i;
        let (next, contractions) = contract_round(&current, s, |l| policy.threshold(s, l), mode)?;
        rounds.push(ReductionRound {
            round: i,
            set_size: s,
            contractions,
        });
        current = next;
    }
    Ok(ReductionTrace {
        rounds,
        result: current,
    })
}

/// One reduction round on sets of size `s`; `threshold(l)` is f(s, l).
pub(crate) fn contract_round<F>(
    h: &Hypergraph,
    s: usize,
    threshold: F,
    mode: ContractionMode,
) -> Result<(Hypergraph, Vec<Contraction>), HypergraphError>
where
    F: Fn(usize) -> f64,
{
    // (S, l) -> ids of the size-l edges containing S
    let mut supers: BTreeMap<(Edge, usize), Vec<usize>> = BTreeMap::new();
    {
        let mut counts: HashMap<(Edge, usize), Vec<usize>> = HashMap::new();
        for (id, edge) in h.edges().iter().enumerate() {
            if edge.len() <= s {
                continue;
            }
            for subset in edge.iter().copied().combinations(s) {
                counts.entry((subset, edge.len())).or_default().push(id);
            }
        }
        for (key, ids) in counts {
            if ids.len() as f64 >= threshold(key.1) {
                supers.insert(key, ids);
            }
        }
    }
    if supers.is_empty() {
        return Ok((h.clone(), Vec::new()));
    }

    let mut alive = vec![true; h.num_edges()];
    let mut added: BTreeSet<Edge> = BTreeSet::new();
    let mut contractions = Vec::new();
    for ((set, l), ids) in &supers {
        let removed = match mode {
            ContractionMode::Snapshot => ids.len(),
            ContractionMode::Sequential => {
                let live = ids.iter().filter(|&&id| alive[id]).count();
                if (live as f64) < threshold(*l) {
                    continue;
                }
                live
            }
        };
        for &id in ids {
            alive[id] = false;
        }
        added.insert(set.clone());
        contractions.push(Contraction {
            set: set.clone(),
            size: *l,
            removed,
        });
    }

    let edges = h
        .edges()
        .iter()
        .enumerate()
        .filter(|(id, _)| alive[*id])
        .map(|(_, e)| e.clone())
        .chain(added);
    Ok((h.with_edges(edges)?, contractions))
}

/// `coloring` proper on `reduced` implies proper on `original`.
pub fn check_soundness(original: &Hypergraph, reduced: &Hypergraph, coloring: &Coloring) -> bool {
    let proper = |g: &Hypergraph| (0..g.num_edges()).all(|id| !g.is_monochromatic(id, |v| coloring.get(v)));
    !proper(reduced) || proper(original)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSolution {
    pub lambda: f64,
    pub iterations: usize,
    /// The target lay at or below the bracket minimum `e` (including a zero
    /// degree); `lambda` is then `e`.
    pub clamped: bool,
}

/// Solves `degree = Λ^(1 - a) (ln Λ)^a / (k 2^k)^(k - i)` with `a = i/(k-1)`
/// for `Λ >= e`.
///
/// `i = 0` has the closed form `Λ = degree (k 2^k)^k`. Otherwise the map is
/// strictly increasing on `Λ > 1`; the root is bracketed by doubling from `e`
/// and bisected in log space.
pub fn solve_lambda(degree: f64, k: usize, i: usize) -> LambdaSolution {
    assert!(k >= 2 && i + 2 <= k.max(2), "need 0 <= i <= k - 2");
    let e = std::f64::consts::E;
    let scale_log = (k - i) as f64 * ((k as f64) * 2f64.powi(k as i32)).ln();
    if degree <= 0.0 || !degree.is_finite() {
        return LambdaSolution {
            lambda: e,
            iterations: 0,
            clamped: true,
        };
    }
    if i == 0 {
        let lambda = degree * ((k as f64) * 2f64.powi(k as i32)).powi(k as i32);
        if lambda <= e {
            return LambdaSolution {
                lambda: e,
                iterations: 0,
                clamped: true,
            };
        }
        return LambdaSolution {
            lambda,
            iterations: 0,
            clamped: false,
        };
    }
    let a = i as f64 / (k - 1) as f64;
    // log of the forward map at x = ln Λ, minus log of the target
    let target = degree.ln();
    let g = |x: f64| (1.0 - a) * x + a * x.ln() - scale_log - target;
    let mut lo = 1.0;
    if g(lo) >= 0.0 {
        return LambdaSolution {
            lambda: e,
            iterations: 0,
            clamped: true,
        };
    }
    let mut iterations = 0;
    let mut hi = lo + std::f64::consts::LN_2;
    while g(hi) < 0.0 {
        lo = hi;
        hi += std::f64::consts::LN_2;
        iterations += 1;
    }
    while hi - lo > 1e-14 * hi.max(1.0) && iterations < 400 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    LambdaSolution {
        lambda: (0.5 * (lo + hi)).exp(),
        iterations,
        clamped: false,
    }
}

/// Forward map of [`solve_lambda`].
pub fn lambda_to_degree(lambda: f64, k: usize, i: usize) -> f64 {
    let a = i as f64 / (k - 1) as f64;
    let scale = ((k as f64) * 2f64.powi(k as i32)).powi((k - i) as i32);
    lambda.powf(1.0 - a) * lambda.ln().powf(a) / scale
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancedReduction {
    pub result: Hypergraph,
    /// max over the computed Λ_l.
    pub delta: f64,
    /// Λ_l for every edge size `l` in `2..=k`.
    pub lambdas: BTreeMap<usize, f64>,
    pub rounds: Vec<ReductionRound>,
}

impl BalancedReduction {
    /// Codegree threshold (Λ_l / ln Λ_l)^((l - s)/(k - 1)) used for δ_{s,l}.
    pub fn threshold(&self, s: usize, l: usize) -> f64 {
        let k = self.result.rank();
        balanced_threshold(self.lambdas[&l], s, l, k)
    }

    /// The thresholds as a policy table, for checking the output later.
    pub fn policy(&self) -> Result<ReductionPolicy, ReductionError> {
        ReductionPolicy::from_fn(self.result.rank(), |s, l| self.threshold(s, l))
    }
}

fn balanced_threshold(lambda: f64, s: usize, l: usize, k: usize) -> f64 {
    (lambda / lambda.ln()).powf((l - s) as f64 / (k - 1) as f64)
}

/// Adaptive reduction: Λ_k = (k 2^k)^k Δ_k, then each round contracts with
/// thresholds derived from the already-fixed Λ_l and solves for Λ_{k-i}
/// from the observed maximum degree Δ_{k-i} of the new hypergraph.
pub fn balanced_reduce(h: &Hypergraph) -> Result<BalancedReduction, ReductionError> {
    let k = h.rank();
    if k < 3 {
        return Err(ReductionError::RankTooSmall(k));
    }
    let mut lambdas = BTreeMap::new();
    let top = h.degree_profile().max_degree(k) as f64;
    lambdas.insert(k, solve_lambda(top, k, 0).lambda);
    let mut current = h.clone();
    let mut rounds = Vec::new();
    for i in 1..=k - 2 {
        let s = k - i;
        let (next, contractions) = contract_round(
            &current,
            s,
            |l| balanced_threshold(lambdas[&l], s, l, k),
            ContractionMode::Snapshot,
        )?;
        let observed = next.degree_profile().max_degree(s) as f64;
        lambdas.insert(s, solve_lambda(observed, k, i).lambda);
        rounds.push(ReductionRound {
            round: i,
            set_size: s,
            contractions,
        });
        current = next;
    }
    let delta = lambdas.values().copied().fold(f64::MIN, f64::max);
    Ok(BalancedReduction {
        result: current,
        delta,
        lambdas,
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::ColorId;

    fn h(n: usize, k: usize, edges: &[&[usize]]) -> Hypergraph {
        Hypergraph::new(n, k, edges.iter().map(|e| e.to_vec())).unwrap()
    }

    #[test]
    fn policy_validation() {
        assert!(ReductionPolicy::geometric(4, 2.0).is_ok());
        assert!(matches!(
            ReductionPolicy::geometric(3, 1.0),
            Err(ReductionError::NotDecreasing { .. })
        ));
        assert!(matches!(
            ReductionPolicy::from_fn(3, |_, _| 2.0),
            Err(ReductionError::DiagonalNotOne { .. })
        ));
        let file = PolicyFile {
            rank: 4,
            thresholds: vec![PolicyEntry { s: 2, l: 3, f: 2.0 }],
        };
        assert!(matches!(
            ReductionPolicy::from_file(&file),
            Err(ReductionError::MissingThreshold { .. })
        ));
        let p = ReductionPolicy::geometric(4, 3.0).unwrap();
        assert_eq!(ReductionPolicy::from_file(&p.to_file()).unwrap(), p);
        assert_eq!(p.threshold(2, 4), 9.0);
    }

    #[test]
    fn already_bounded_is_identity() {
        let g = h(7, 3, &[&[0, 1, 2], &[2, 3, 4], &[4, 5, 6]]);
        let policy = ReductionPolicy::geometric(3, 2.0).unwrap();
        let trace = f_reduce(&g, &policy).unwrap();
        assert_eq!(trace.result, g);
        assert_eq!(trace.rounds.len(), 1);
        assert!(trace.rounds[0].contractions.is_empty());
    }

    #[test]
    fn heavy_pair_contracts() {
        let g = h(5, 3, &[&[1, 2, 3], &[1, 2, 4]]);
        let policy = ReductionPolicy::geometric(3, 2.0).unwrap();
        let trace = f_reduce(&g, &policy).unwrap();
        assert_eq!(trace.result.edges(), &[vec![1, 2]]);
        assert_eq!(
            trace.rounds[0].contractions,
            vec![Contraction {
                set: vec![1, 2],
                size: 3,
                removed: 2
            }]
        );
    }

    #[test]
    fn round_count_is_rank_minus_two() {
        let g = Hypergraph::empty(6, 5).unwrap();
        let trace = f_reduce(&g, &ReductionPolicy::geometric(5, 2.0).unwrap()).unwrap();
        assert_eq!(
            trace.rounds.iter().map(|r| r.set_size).collect::<Vec<_>>(),
            vec![4, 3, 2]
        );
        let g2 = Hypergraph::empty(3, 2).unwrap();
        assert!(f_reduce(&g2, &ReductionPolicy::geometric(2, 2.0).unwrap())
            .unwrap()
            .rounds
            .is_empty());
    }

    #[test]
    fn modes_differ_on_overlapping_sets() {
        // {u,a} and {u,b} both reach codegree 2; the edge {u,a,b} is shared.
        let (u, a, b, c, d) = (0, 1, 2, 3, 4);
        let g = h(5, 3, &[&[u, a, b], &[u, a, c], &[u, b, d]]);
        let policy = ReductionPolicy::geometric(3, 2.0).unwrap();
        let snap = f_reduce_with(&g, &policy, ContractionMode::Snapshot).unwrap();
        assert_eq!(snap.result.edges(), &[vec![u, a], vec![u, b]]);
        let seq = f_reduce_with(&g, &policy, ContractionMode::Sequential).unwrap();
        assert_eq!(seq.result.edges(), &[vec![u, a], vec![u, b, d]]);
        // weighted degree of u with weight 2 on 2-edges: 3 before, 4 vs 3 after
        let weight = |g: &Hypergraph| -> f64 {
            g.incident(u)
                .iter()
                .map(|&id| if g.edge(id).len() == 2 { 2.0 } else { 1.0 })
                .sum()
        };
        assert_eq!(weight(&g), 3.0);
        assert_eq!(weight(&snap.result), 4.0);
        assert_eq!(weight(&seq.result), 3.0);
    }

    #[test]
    fn soundness_predicate() {
        let original = h(5, 3, &[&[1, 2, 3], &[1, 2, 4]]);
        let reduced = h(5, 3, &[&[1, 2]]);
        let proper = Coloring::from_colors([0, 0, 1, 0, 0].map(ColorId));
        assert!(check_soundness(&original, &reduced, &proper));
        let mono = Coloring::from_colors([0; 5].map(ColorId));
        assert!(check_soundness(&original, &reduced, &mono));
        // a broken "reduction" that dropped a constraint
        let wrong = h(5, 3, &[&[3, 4]]);
        let c = Coloring::from_colors([0, 0, 0, 0, 1].map(ColorId));
        assert!(!check_soundness(&original, &wrong, &c));
    }

    #[test]
    fn lambda_closed_form_at_round_zero() {
        let sol = solve_lambda(5.0, 3, 0);
        assert_eq!(sol.lambda, 5.0 * 24f64.powi(3));
        assert_eq!(lambda_to_degree(sol.lambda, 3, 0), 5.0);
    }

    #[test]
    fn lambda_recovers_e_to_the_fourth() {
        let e = std::f64::consts::E;
        let degree = e * e * 2.0 / 576.0;
        assert!((lambda_to_degree(e.powi(4), 3, 1) - degree).abs() < 1e-15);
        let sol = solve_lambda(degree, 3, 1);
        assert!(!sol.clamped);
        assert!((sol.lambda / e.powi(4) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn lambda_large_degree_converges() {
        let sol = solve_lambda(1e9, 3, 1);
        let back = lambda_to_degree(sol.lambda, 3, 1);
        assert!(((back - 1e9) / 1e9).abs() <= 1e-9);
        assert!(sol.iterations <= 200);
    }

    #[test]
    fn lambda_zero_degree_is_flagged() {
        let sol = solve_lambda(0.0, 4, 2);
        assert!(sol.clamped);
        assert_eq!(sol.lambda, std::f64::consts::E);
    }

    #[test]
    fn balanced_rejects_rank_two() {
        let g = h(3, 2, &[&[0, 1]]);
        assert!(matches!(balanced_reduce(&g), Err(ReductionError::RankTooSmall(2))));
    }

    #[test]
    fn balanced_identity_when_sparse() {
        let g = h(7, 3, &[&[0, 1, 2], &[2, 3, 4], &[4, 5, 6]]);
        let out = balanced_reduce(&g).unwrap();
        assert_eq!(out.result, g);
        assert_eq!(out.lambdas[&3], 24f64.powi(3) * 2.0);
    }
}
