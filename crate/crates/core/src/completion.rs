//! Finishing the coloring after the iterative phase: uniform assignment from
//! the final palettes, resampling of violated constraint edges, and a greedy
//! fallback against the original hypergraph.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{ColorId, Coloring, Provenance};
use crate::hypergraph::{Edge, Vertex};
use crate::nibble::NibbleState;
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fallback {
    #[default]
    Greedy,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionConfig {
    pub max_resample_rounds: usize,
    pub fallback: Fallback,
}

impl Default for CompletionConfig {
    fn default() -> Self {
        Self {
            max_resample_rounds: 100_000,
            fallback: Fallback::Greedy,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompletionError {
    #[error("max_resample_rounds must be at least 1")]
    Budget,
    #[error("vertex {0} has an empty palette")]
    EmptyPalette(Vertex),
    #[error("resampling did not converge within {0} resamples")]
    Exhausted(usize),
    #[error("no color in the list of vertex {0} avoids a monochromatic edge")]
    Stuck(Vertex),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionOutcome {
    pub coloring: Coloring,
    pub resamples: usize,
    /// Vertices colored by the greedy fallback, in the order they were colored.
    pub greedy: Vec<Vertex>,
}

/// Colors every vertex the iterative phase left uncolored.
pub fn complete(state: &NibbleState, cfg: &CompletionConfig) -> Result<CompletionOutcome, CompletionError> {
    if cfg.max_resample_rounds == 0 {
        return Err(CompletionError::Budget);
    }
    if cfg.fallback == Fallback::Fail {
        if let Some(&v) = state.deferred().first() {
            return Err(CompletionError::EmptyPalette(v));
        }
    }
    let mut coloring = state.partial().clone();
    let mut rng = rng::stream(state.seed(), Purpose::Complete, &[state.round() as u64]);
    let mut draw = |v: Vertex, coloring: &mut Coloring| {
        let p = state.palette(v);
        coloring.set(v, p[rng.random_range(0..p.len())], Provenance::Completion);
    };
    for &v in state.uncolored() {
        draw(v, &mut coloring);
    }

    // (color, edge id) pairs through each vertex.
    let family = state.constraints();
    let n = coloring.num_vertices();
    let mut through: Vec<Vec<(ColorId, usize)>> = vec![Vec::new(); n];
    for (c, h) in family.iter() {
        for (id, e) in h.edges().iter().enumerate() {
            for &v in e {
                through[v].push((c, id));
            }
        }
    }
    let violated_now = |c: ColorId, e: &Edge, coloring: &Coloring| e.iter().all(|&v| coloring.get(v) == Some(c));
    let mut violated: BTreeSet<(Edge, ColorId, usize)> = BTreeSet::new();
    for (c, h) in family.iter() {
        for (id, e) in h.edges().iter().enumerate() {
            if violated_now(c, e, &coloring) {
                violated.insert((e.clone(), c, id));
            }
        }
    }

    let mut resamples = 0;
    let mut converged = true;
    while let Some((edge, _, _)) = violated.first().cloned() {
        if resamples == cfg.max_resample_rounds {
            converged = false;
            break;
        }
        resamples += 1;
        for &v in &edge {
            draw(v, &mut coloring);
        }
        for &v in &edge {
            for &(c, id) in &through[v] {
                let e = family.color(c).edge(id);
                let key = (e.clone(), c, id);
                if violated_now(c, e, &coloring) {
                    violated.insert(key);
                } else {
                    violated.remove(&key);
                }
            }
        }
    }

    let mut pending: Vec<Vertex> = state.deferred().to_vec();
    if !converged {
        if cfg.fallback == Fallback::Fail {
            return Err(CompletionError::Exhausted(resamples));
        }
        log::warn!("resampling gave up after {resamples} steps; coloring greedily");
        for &v in state.uncolored() {
            coloring.clear(v);
        }
        pending.extend(state.uncolored());
        pending.sort_unstable();
    }
    let greedy = greedy(state, &mut coloring, &pending)?;
    Ok(CompletionOutcome {
        coloring,
        resamples,
        greedy,
    })
}

/// Colors `pending` in id order against the original hypergraph, trying the
/// final palette first and then the rest of the list.
fn greedy(state: &NibbleState, coloring: &mut Coloring, pending: &[Vertex]) -> Result<Vec<Vertex>, CompletionError> {
    let h = state.original();
    for &v in pending {
        let palette = state.palette(v);
        let rest = state.lists().list(v).iter().filter(|c| !palette.contains(c));
        let safe = |c: ColorId| {
            h.incident(v)
                .iter()
                .all(|&id| h.edge(id).iter().any(|&x| x != v && coloring.get(x) != Some(c)))
        };
        let c = palette
            .iter()
            .chain(rest)
            .copied()
            .find(|&c| safe(c))
            .ok_or(CompletionError::Stuck(v))?;
        coloring.set(v, c, Provenance::Completion);
    }
    Ok(pending.to_vec())
}
