use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::q::{self, QMethod};
use super::state::NibbleState;
use super::trace::RoundTrace;
use super::NibbleError;
use crate::coloring::{ColorId, Provenance};
use crate::hypergraph::{Edge, Hypergraph, Vertex};
use crate::reduction::{f_reduce_with, ContractionMode, ReductionPolicy};
use crate::rng::{self, Purpose};

/// Estimate of q^i_{u,c}, the probability that c is not lost at u in the
/// coming round.
pub fn estimate_q(state: &NibbleState, u: Vertex, c: ColorId, method: QMethod) -> Result<f64, NibbleError> {
    if !state.is_uncolored(u) {
        return Err(NibbleError::NotUncolored(u));
    }
    if state.palette(u).binary_search(&c).is_err() {
        return Err(NibbleError::NotInPalette { vertex: u, color: c });
    }
    let pi = state.params().next_round(state.round_params()).activation;
    let round = state.round() as u64 + 1;
    estimate_with(state, u, c, pi, round, method)
}

fn estimate_with(
    state: &NibbleState,
    u: Vertex,
    c: ColorId,
    pi: f64,
    round: u64,
    method: QMethod,
) -> Result<f64, NibbleError> {
    let residuals = state.constraints().residuals(u, c);
    let sample = |samples: usize| {
        let mut r = rng::stream(state.seed(), Purpose::QEstimate, &[round, u as u64, c.0 as u64]);
        q::monte_carlo(&residuals, pi, samples, &mut r)
    };
    match method {
        QMethod::Exact => q::exact(&residuals, pi).ok_or(NibbleError::ExactRefused { edges: residuals.len() }),
        QMethod::MonteCarlo { samples } => Ok(sample(samples)),
        QMethod::Auto { samples } => Ok(q::exact(&residuals, pi).unwrap_or_else(|| sample(samples))),
    }
}

/// Intermediate quantities of one round, kept for auditing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundAudit {
    /// P̂_i(u) for every u ∈ U_{i-1}; empty elsewhere.
    pub temporary: Vec<Vec<ColorId>>,
    /// d̂_i(u, c) for every u ∈ U_i and c ∈ P_i(u).
    pub filtered: Vec<(Vertex, ColorId, f64)>,
    pub colored: Vec<(Vertex, ColorId)>,
}

#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub state: NibbleState,
    pub trace: RoundTrace,
    pub audit: RoundAudit,
}

pub fn run_round(state: &NibbleState) -> Result<(NibbleState, RoundTrace), NibbleError> {
    let out = run_round_audited(state)?;
    Ok((out.state, out.trace))
}

fn weighted(h: &Hypergraph, u: Vertex, weight: f64, k: usize) -> f64 {
    h.incident(u)
        .iter()
        .map(|&id| weight.powi((k - h.edge(id).len()) as i32))
        .sum()
}

/// One round i-1 → i. With no uncolored vertex left the state is returned
/// unchanged.
pub fn run_round_audited(state: &NibbleState) -> Result<RoundOutcome, NibbleError> {
    if state.uncolored.is_empty() {
        return Ok(RoundOutcome {
            state: state.clone(),
            trace: RoundTrace::record(state, 0, &[]),
            audit: RoundAudit::default(),
        });
    }
    if state.is_terminal() {
        return Err(NibbleError::Terminated(state.round()));
    }
    let params = &state.params;
    let k = params.k;
    let n = state.original.num_vertices();
    let next = params.next_round(&state.current);
    let weight = next.weight(params);
    if !(weight > 1.0 && next.cdegree > 0.0) {
        return Err(NibbleError::Degenerate {
            round: next.i,
            weight,
            cdegree: next.cdegree,
        });
    }
    let round = next.i as u64;
    let seed = state.seed;
    let pi = next.activation;
    let beta = params.beta;
    let active = |v: Vertex, c: ColorId| rng::uniform(seed, Purpose::Activate, &[round, v as u64, c.0 as u64]) < pi;

    // Activation, loss, selection, and the permanent color choice.
    let steps = state
        .uncolored
        .par_iter()
        .map(|&u| -> Result<(Vec<ColorId>, Option<ColorId>), NibbleError> {
            let mut temporary = Vec::new();
            let mut eligible = Vec::new();
            for &c in &state.palettes[u] {
                let h = state.constraints.color(c);
                let lost = h
                    .incident(u)
                    .iter()
                    .any(|&id| h.edge(id).iter().all(|&v| v == u || active(v, c)));
                if lost {
                    continue;
                }
                let eta = rng::uniform(seed, Purpose::Select, &[round, u as u64, c.0 as u64]);
                // β/q >= β, so draws below β are selected whatever q is.
                let selected = eta < beta || {
                    let q = estimate_with(state, u, c, pi, round, state.config.q_method)?;
                    eta < (beta / q).min(1.0)
                };
                if selected {
                    temporary.push(c);
                    if active(u, c) {
                        eligible.push(c);
                    }
                }
            }
            let chosen = match eligible.len() {
                0 => None,
                _ if state.config.deterministic_tiebreak => Some(eligible[0]),
                len => {
                    let x = rng::uniform(seed, Purpose::TieBreak, &[round, u as u64]);
                    Some(eligible[((x * len as f64) as usize).min(len - 1)])
                }
            };
            Ok((temporary, chosen))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut temporary = vec![Vec::new(); n];
    let mut now: Vec<Option<ColorId>> = vec![None; n];
    let mut colored = Vec::new();
    for (&u, (temp, chosen)) in state.uncolored.iter().zip(steps) {
        temporary[u] = temp;
        if let Some(c) = chosen {
            now[u] = Some(c);
            colored.push((u, c));
        }
    }
    let mut remaining = vec![false; n];
    for &u in &state.uncolored {
        remaining[u] = now[u].is_none();
    }
    let has_temp = |v: Vertex, c: ColorId| temporary[v].binary_search(&c).is_ok();

    // Ĥ: what is left of each constraint edge once this round's c-colored
    // vertices are removed. A single survivor simply loses c.
    let rebuilt = (0..state.constraints.num_colors())
        .into_par_iter()
        .map(|ci| -> Result<(Hypergraph, Vec<Vertex>), NibbleError> {
            let c = ColorId(ci as u32);
            let mut edges: Vec<Edge> = Vec::new();
            let mut forbid = Vec::new();
            for e in state.constraints.color(c).edges() {
                let rest: Edge = e.iter().copied().filter(|&v| now[v] != Some(c)).collect();
                if !rest.iter().all(|&v| remaining[v] && has_temp(v, c)) {
                    continue;
                }
                match rest.len() {
                    0 => {
                        return Err(NibbleError::Monochromatic {
                            edge: e.clone(),
                            color: c,
                        })
                    }
                    1 => forbid.push(rest[0]),
                    _ => edges.push(rest),
                }
            }
            Ok((Hypergraph::new_dedup(n, k, edges)?, forbid))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let forbidden: HashSet<(Vertex, ColorId)> = rebuilt
        .iter()
        .enumerate()
        .flat_map(|(ci, (_, f))| f.iter().map(move |&v| (v, ColorId(ci as u32))))
        .collect();
    let hat: Vec<Hypergraph> = rebuilt.into_iter().map(|(h, _)| h).collect();

    // Filter by d̂ <= 2 t_i and cut down to at most p_i colors.
    let cap = next.palette.floor().max(0.0) as usize;
    let limit = 2.0 * next.cdegree;
    let survivors: Vec<Vertex> = state.uncolored.iter().copied().filter(|&u| remaining[u]).collect();
    let kept: Vec<Vec<(ColorId, f64)>> = survivors
        .par_iter()
        .map(|&u| {
            let mut cands: Vec<(ColorId, f64)> = temporary[u]
                .iter()
                .filter(|&&c| !forbidden.contains(&(u, c)))
                .map(|&c| (c, weighted(&hat[c.index()], u, weight, k)))
                .filter(|&(_, d)| d <= limit)
                .collect();
            if cands.len() > cap {
                cands.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.0.cmp(&a.0)));
                cands.drain(..cands.len() - cap);
                cands.sort_by_key(|&(c, _)| c);
            }
            cands
        })
        .collect();

    let mut palettes = vec![Vec::new(); n];
    let mut uncolored = Vec::with_capacity(survivors.len());
    let mut deferred_now = Vec::new();
    let mut filtered = Vec::new();
    for (&u, cands) in survivors.iter().zip(kept) {
        if cands.is_empty() {
            deferred_now.push(u);
            continue;
        }
        uncolored.push(u);
        filtered.extend(cands.iter().map(|&(c, d)| (u, c, d)));
        palettes[u] = cands.into_iter().map(|(c, _)| c).collect();
    }
    if !deferred_now.is_empty() {
        log::info!("round {}: {} vertices deferred", next.i, deferred_now.len());
    }

    // Per-color reduction with f(s, l) = (φ1 p_i)^{l-s}, then subsumption.
    let policy = ReductionPolicy::geometric(k, weight)?;
    let has_new = |v: Vertex, c: ColorId| palettes[v].binary_search(&c).is_ok();
    let constraints = hat
        .par_iter()
        .enumerate()
        .map(|(ci, h)| -> Result<Hypergraph, NibbleError> {
            let c = ColorId(ci as u32);
            let f = h.with_edges(h.edges().iter().filter(|e| e.iter().all(|&v| has_new(v, c))).cloned())?;
            let reduced = f_reduce_with(&f, &policy, ContractionMode::Sequential)?.result;
            Ok(reduced.prune_subsumed())
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut partial = state.partial.clone();
    for &(u, c) in &colored {
        partial.set(u, c, Provenance::Nibble(next.i));
    }
    let mut deferred = state.deferred.clone();
    deferred.extend(&deferred_now);
    deferred.sort_unstable();

    let new_state = NibbleState {
        params: state.params.clone(),
        current: next,
        config: state.config,
        seed,
        original: state.original.clone(),
        lists: state.lists.clone(),
        uncolored,
        palettes,
        constraints: super::state::ConstraintFamily::new(constraints),
        partial,
        deferred,
    };
    let trace = RoundTrace::record(&new_state, colored.len(), &deferred_now);
    Ok(RoundOutcome {
        state: new_state,
        trace,
        audit: RoundAudit {
            temporary,
            filtered,
            colored,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    /// ζ reached 1/(8k).
    Terminated,
    /// Every vertex was colored or deferred before ζ reached 1/(8k).
    Exhausted,
    /// Stopped at the round limit with ζ still above 1/(8k).
    MaxRounds,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: NibbleState,
    /// Round 0 first, then one entry per executed round.
    pub traces: Vec<RoundTrace>,
    pub status: RunStatus,
}

/// Runs rounds until ζ_i <= 1/(8k), no vertex is left, or `max_rounds`
/// rounds have run. Fails if ζ drifts from its arithmetic progression.
pub fn run_to_termination(state: NibbleState, max_rounds: usize) -> Result<RunOutcome, NibbleError> {
    let zeta0 = state.round_params().zeta;
    let start = state.round();
    let step = state.params().zeta_step();
    let mut traces = vec![RoundTrace::record(&state, 0, &[])];
    let mut state = state;
    let status = loop {
        if state.is_terminal() {
            break RunStatus::Terminated;
        }
        if state.uncolored().is_empty() {
            break RunStatus::Exhausted;
        }
        if state.round() - start == max_rounds {
            log::warn!(
                "stopped after {max_rounds} rounds with zeta = {} above {}",
                state.round_params().zeta,
                state.params().termination_threshold()
            );
            break RunStatus::MaxRounds;
        }
        let (next, trace) = run_round(&state)?;
        let zeta = next.round_params().zeta;
        let expected = zeta0 - (next.round() - start) as f64 * step;
        if (zeta - expected).abs() > 1e-9 * zeta0.abs().max(step) {
            return Err(NibbleError::Drift {
                round: next.round(),
                expected,
                actual: zeta,
            });
        }
        log::debug!(
            "round {}: {} colored, {} uncolored, zeta {zeta}",
            next.round(),
            trace.globals.colored,
            trace.globals.uncolored
        );
        traces.push(trace);
        state = next;
    };
    Ok(RunOutcome { state, traces, status })
}
