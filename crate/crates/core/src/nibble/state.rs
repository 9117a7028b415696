use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::params::{Params, RoundParams};
use super::q::QMethod;
use super::NibbleError;
use crate::coloring::{ColorId, Coloring, ListAssignment};
use crate::hypergraph::{Edge, Hypergraph, Vertex};

/// Per-color constraint hypergraphs H_c. Every edge of H_c must not end up
/// entirely colored c.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConstraintFamily {
    colors: Vec<Hypergraph>,
}

impl ConstraintFamily {
    pub fn new(colors: Vec<Hypergraph>) -> Self {
        Self { colors }
    }

    pub fn num_colors(&self) -> usize {
        self.colors.len()
    }

    pub fn color(&self, c: ColorId) -> &Hypergraph {
        &self.colors[c.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ColorId, &Hypergraph)> {
        self.colors.iter().enumerate().map(|(i, h)| (ColorId(i as u32), h))
    }

    pub fn total_edges(&self) -> usize {
        self.colors.iter().map(Hypergraph::num_edges).sum()
    }

    /// d^i_ℓ(u, c) summed with weight `weight^(k - ℓ)`.
    pub fn weighted_degree(&self, u: Vertex, c: ColorId, weight: f64, k: usize) -> f64 {
        let h = self.color(c);
        h.incident(u)
            .iter()
            .map(|&id| weight.powi((k - h.edge(id).len()) as i32))
            .sum()
    }

    /// `e \ {u}` for every constraint edge of color `c` through `u`.
    pub fn residuals(&self, u: Vertex, c: ColorId) -> Vec<Edge> {
        let h = self.color(c);
        h.incident(u)
            .iter()
            .map(|&id| h.edge(id).iter().copied().filter(|&v| v != u).collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NibbleConfig {
    pub q_method: QMethod,
    /// Color with the smallest eligible id instead of a uniform one.
    pub deterministic_tiebreak: bool,
}

/// Everything the iterative phase carries from one round to the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NibbleState {
    pub(crate) params: Params,
    pub(crate) current: RoundParams,
    pub(crate) config: NibbleConfig,
    pub(crate) seed: u64,
    pub(crate) original: Arc<Hypergraph>,
    pub(crate) lists: Arc<ListAssignment>,
    /// Sorted.
    pub(crate) uncolored: Vec<Vertex>,
    /// Empty for every vertex outside `uncolored`.
    pub(crate) palettes: Vec<Vec<ColorId>>,
    pub(crate) constraints: ConstraintFamily,
    pub(crate) partial: Coloring,
    /// Vertices whose palette ran empty; sorted.
    pub(crate) deferred: Vec<Vertex>,
}

/// Builds round 0: U_0 = V, P_0(u) = the `C` smallest colors of L(u), and
/// H^0_c = edges whose vertices all have c in P_0.
pub fn init_state(
    h: &Hypergraph,
    lists: &ListAssignment,
    params: &Params,
    config: NibbleConfig,
    seed: u64,
) -> Result<NibbleState, NibbleError> {
    let n = h.num_vertices();
    if lists.num_vertices() != n {
        return Err(NibbleError::ListCount {
            lists: lists.num_vertices(),
            vertices: n,
        });
    }
    if h.rank() > params.k {
        return Err(NibbleError::Rank {
            instance: h.rank(),
            params: params.k,
        });
    }
    if !params.relaxed {
        if let Some(v) = (0..n).find(|&v| lists.list(v).len() < params.colors) {
            return Err(NibbleError::ShortList {
                vertex: v,
                size: lists.list(v).len(),
                needed: params.colors,
            });
        }
    }

    let palettes: Vec<Vec<ColorId>> = (0..n)
        .map(|v| lists.list(v).iter().take(params.colors).copied().collect())
        .collect();

    let mut per_color: Vec<Vec<Edge>> = vec![Vec::new(); lists.num_colors()];
    for e in h.edges() {
        for c in common_colors(e, &palettes) {
            per_color[c.index()].push(e.clone());
        }
    }
    let colors = per_color
        .into_iter()
        .map(|edges| Hypergraph::new_dedup(n, params.k, edges))
        .collect::<Result<Vec<_>, _>>()?;

    let (uncolored, deferred): (Vec<Vertex>, Vec<Vertex>) = (0..n).partition(|&v| !palettes[v].is_empty());
    if !deferred.is_empty() {
        log::warn!("{} vertices start with an empty palette", deferred.len());
    }
    Ok(NibbleState {
        params: params.clone(),
        current: params.initial_round(),
        config,
        seed,
        original: Arc::new(h.clone()),
        lists: Arc::new(lists.clone()),
        uncolored,
        palettes,
        constraints: ConstraintFamily::new(colors),
        partial: Coloring::uncolored(n),
        deferred,
    })
}

/// Degree scale read off an instance: the largest initial c-degree over k-1,
/// so that t_0 = (k-1)Δ covers every d_0(u, c). Floored at e.
pub fn observed_delta(h: &Hypergraph, lists: &ListAssignment, k: usize, colors: usize, phi1: f64) -> f64 {
    let palettes: Vec<Vec<ColorId>> = (0..h.num_vertices())
        .map(|v| lists.list(v).iter().take(colors).copied().collect())
        .collect();
    let weight = phi1 * colors as f64;
    let mut degree: HashMap<(Vertex, ColorId), f64> = HashMap::new();
    for e in h.edges() {
        let w = weight.powi((k - e.len()) as i32);
        for c in common_colors(e, &palettes) {
            for &v in e {
                *degree.entry((v, c)).or_default() += w;
            }
        }
    }
    let top = degree.values().copied().fold(0.0, f64::max);
    (top / (k as f64 - 1.0)).max(std::f64::consts::E)
}

/// Colors present in the palette of every vertex of `edge`.
pub(crate) fn common_colors(edge: &[Vertex], palettes: &[Vec<ColorId>]) -> Vec<ColorId> {
    let mut common = palettes[edge[0]].clone();
    for &v in &edge[1..] {
        let p = &palettes[v];
        common.retain(|c| p.binary_search(c).is_ok());
        if common.is_empty() {
            break;
        }
    }
    common
}

impl NibbleState {
    pub fn round(&self) -> usize {
        self.current.i
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Schedule values p_i, t_i, ζ_i, ... for the current round.
    pub fn round_params(&self) -> &RoundParams {
        &self.current
    }

    pub fn config(&self) -> &NibbleConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn original(&self) -> &Hypergraph {
        &self.original
    }

    pub fn lists(&self) -> &ListAssignment {
        &self.lists
    }

    pub fn uncolored(&self) -> &[Vertex] {
        &self.uncolored
    }

    pub fn is_uncolored(&self, u: Vertex) -> bool {
        self.uncolored.binary_search(&u).is_ok()
    }

    pub fn palette(&self, u: Vertex) -> &[ColorId] {
        &self.palettes[u]
    }

    pub fn constraints(&self) -> &ConstraintFamily {
        &self.constraints
    }

    pub fn partial(&self) -> &Coloring {
        &self.partial
    }

    pub fn deferred(&self) -> &[Vertex] {
        &self.deferred
    }

    /// The weight base φ1 p_i.
    pub fn weight(&self) -> f64 {
        self.current.weight(&self.params)
    }

    /// d_i(u, c) = Σ_ℓ (φ1 p_i)^{k-ℓ} d^i_ℓ(u, c).
    pub fn weighted_cdegree(&self, u: Vertex, c: ColorId) -> f64 {
        self.constraints.weighted_degree(u, c, self.weight(), self.params.k)
    }

    /// Whether ζ_i has reached 1/(8k).
    pub fn is_terminal(&self) -> bool {
        self.current.zeta <= self.params.termination_threshold()
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::ColorNames;
    use crate::nibble::params::Relaxation;

    fn relaxed(k: usize, colors: usize) -> Params {
        let relax = Relaxation {
            phi1: Some(0.5),
            phi2: Some(0.1),
            colors: Some(colors),
            epsilon: Some(0.0),
        };
        Params::relaxed(k, 4.0, relax).unwrap()
    }

    #[test]
    fn shared_lists_put_the_edge_in_every_family() {
        let h = Hypergraph::new(4, 3, vec![vec![1, 2, 3]]).unwrap();
        let lists = ListAssignment::uniform(4, ColorNames::new(["a", "b"]));
        let s = init_state(&h, &lists, &relaxed(3, 2), NibbleConfig::default(), 0).unwrap();
        for c in [ColorId(0), ColorId(1)] {
            assert_eq!(s.constraints().color(c).edges(), &[vec![1, 2, 3]]);
        }
        assert_eq!(s.uncolored(), &[0, 1, 2, 3]);
        assert_eq!(s.round(), 0);
    }

    #[test]
    fn disjoint_lists_put_the_edge_nowhere() {
        let h = Hypergraph::new(2, 2, vec![vec![0, 1]]).unwrap();
        let names = ColorNames::new(["a", "b"]);
        let lists = ListAssignment::new(vec![vec![ColorId(0)], vec![ColorId(1)]], names);
        let s = init_state(&h, &lists, &relaxed(2, 1), NibbleConfig::default(), 0).unwrap();
        assert_eq!(s.constraints().total_edges(), 0);
    }

    #[test]
    fn short_lists_need_relaxed_mode() {
        let h = Hypergraph::empty(2, 3).unwrap();
        let lists = ListAssignment::uniform(2, ColorNames::numbered(3));
        let p = Params::theoretical(3, 10.0).unwrap();
        assert!(matches!(
            init_state(&h, &lists, &p, NibbleConfig::default(), 0),
            Err(NibbleError::ShortList { vertex: 0, .. })
        ));
    }

    #[test]
    fn palettes_truncate_to_the_smallest_colors() {
        let h = Hypergraph::empty(1, 3).unwrap();
        let lists = ListAssignment::uniform(1, ColorNames::numbered(5));
        let s = init_state(&h, &lists, &relaxed(3, 2), NibbleConfig::default(), 0).unwrap();
        assert_eq!(s.palette(0), &[ColorId(0), ColorId(1)]);
    }

    #[test]
    fn weighted_cdegree_unfolds() {
        let h = Hypergraph::new(4, 3, vec![vec![0, 1], vec![0, 2, 3]]).unwrap();
        let lists = ListAssignment::uniform(4, ColorNames::new(["a"]));
        let p = relaxed(3, 1);
        let s = init_state(&h, &lists, &p, NibbleConfig::default(), 0).unwrap();
        let w = p.phi1 * 1.0;
        assert_eq!(s.weighted_cdegree(0, ColorId(0)), w + 1.0);
        assert_eq!(s.weighted_cdegree(1, ColorId(0)), w);
        let lonely = init_state(
            &Hypergraph::empty(4, 3).unwrap(),
            &lists,
            &p,
            NibbleConfig::default(),
            0,
        )
        .unwrap();
        assert_eq!(lonely.weighted_cdegree(0, ColorId(0)), 0.0);
    }

    #[test]
    fn snapshot_round_trip() {
        let h = Hypergraph::new(4, 3, vec![vec![0, 1, 2], vec![1, 3]]).unwrap();
        let lists = ListAssignment::uniform(4, ColorNames::numbered(3));
        let s = init_state(&h, &lists, &relaxed(3, 3), NibbleConfig::default(), 9).unwrap();
        let back = NibbleState::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
