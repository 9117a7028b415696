//! Per-round records of the average c-degree bookkeeping, plus the CSV and
//! JSON forms they are exported in.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::params::Params;
use super::state::NibbleState;
use crate::hypergraph::Vertex;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexTrace {
    pub vertex: Vertex,
    pub palette_size: usize,
    /// λ_i(u) = min(1, |P_i(u)| / p'_i)
    pub lambda: f64,
    /// Λ_i(u), the mean of d_i(u, c) over the palette.
    pub big_lambda: f64,
    /// 𝒟_i(u) = λ Λ + (1 - λ) 2 t_i
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundGlobals {
    pub round: usize,
    pub p: f64,
    pub p_approx: f64,
    pub t: f64,
    #[serde(with = "lenient")]
    pub t_approx: f64,
    pub zeta: f64,
    /// Vertices permanently colored in this round.
    pub colored: usize,
    /// Vertices whose palette ran empty in this round.
    pub deferred: usize,
    /// Vertices still in U_i afterwards.
    pub uncolored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub globals: RoundGlobals,
    /// Sorted by vertex; covers U_i and the vertices deferred this round.
    pub vertices: Vec<VertexTrace>,
}

/// (λ, 𝒟) for a palette of the given size and mean c-degree.
fn bookkeeping(size: usize, mean: f64, p_approx: f64, t: f64) -> (f64, f64) {
    let lambda = if size == 0 {
        0.0
    } else if p_approx > 0.0 {
        (size as f64 / p_approx).min(1.0)
    } else {
        1.0
    };
    (lambda, lambda * mean + (1.0 - lambda) * 2.0 * t)
}

impl RoundTrace {
    /// Records the state's current round. `deferred_now` lists the vertices
    /// that lost their last color in this round.
    pub fn record(state: &NibbleState, colored: usize, deferred_now: &[Vertex]) -> Self {
        let r = state.round_params();
        let mut vertices: Vec<VertexTrace> = state
            .uncolored()
            .iter()
            .map(|&u| {
                let palette = state.palette(u);
                let mean = if palette.is_empty() {
                    0.0
                } else {
                    palette.iter().map(|&c| state.weighted_cdegree(u, c)).sum::<f64>() / palette.len() as f64
                };
                let (lambda, d) = bookkeeping(palette.len(), mean, r.palette_approx, r.cdegree);
                VertexTrace {
                    vertex: u,
                    palette_size: palette.len(),
                    lambda,
                    big_lambda: mean,
                    d,
                }
            })
            .collect();
        vertices.extend(deferred_now.iter().map(|&u| VertexTrace {
            vertex: u,
            palette_size: 0,
            lambda: 0.0,
            big_lambda: 0.0,
            d: 2.0 * r.cdegree,
        }));
        vertices.sort_by_key(|v| v.vertex);
        RoundTrace {
            globals: RoundGlobals {
                round: r.i,
                p: r.palette,
                p_approx: r.palette_approx,
                t: r.cdegree,
                t_approx: r.cdegree_approx,
                zeta: r.zeta,
                colored,
                deferred: deferred_now.len(),
                uncolored: state.uncolored().len(),
            },
            vertices,
        }
    }
}

/// Fractions of traced vertices meeting the two trajectory bounds in one round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRound {
    pub round: usize,
    pub vertices: usize,
    /// t'_i
    pub d_bound: f64,
    /// (1 - (1 + ε)^i / 2) p'_i
    pub palette_bound: f64,
    pub d_within: usize,
    pub palette_within: usize,
    pub d_fraction: f64,
    pub palette_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub rounds: Vec<TrajectoryRound>,
}

/// Observational check of 𝒟_i(u) <= t'_i and |P_i(u)| >= (1 - (1+ε)^i/2) p'_i.
/// A round with no traced vertices reports fraction 1.
pub fn trajectory_check(traces: &[RoundTrace], params: &Params) -> TrajectoryReport {
    let rounds = traces
        .iter()
        .map(|t| {
            let g = &t.globals;
            let growth = (1.0 + params.epsilon).powi(g.round as i32);
            let palette_bound = (1.0 - growth / 2.0) * g.p_approx;
            let d_within = t.vertices.iter().filter(|v| v.d <= g.t_approx).count();
            let palette_within = t
                .vertices
                .iter()
                .filter(|v| v.palette_size as f64 >= palette_bound)
                .count();
            let frac = |x: usize| {
                if t.vertices.is_empty() {
                    1.0
                } else {
                    x as f64 / t.vertices.len() as f64
                }
            };
            TrajectoryRound {
                round: g.round,
                vertices: t.vertices.len(),
                d_bound: g.t_approx,
                palette_bound,
                d_within,
                palette_within,
                d_fraction: frac(d_within),
                palette_fraction: frac(palette_within),
            }
        })
        .collect();
    TrajectoryReport { rounds }
}

/// One CSV row. Vertices outside the traced set have empty value fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: usize,
    pub vertex: Vertex,
    pub palette_size: Option<usize>,
    pub lambda: Option<f64>,
    #[serde(rename = "Lambda")]
    pub big_lambda: Option<f64>,
    #[serde(rename = "D")]
    pub d: Option<f64>,
}

/// Writes `rounds × num_vertices` rows.
pub fn write_csv<W: Write>(traces: &[RoundTrace], num_vertices: usize, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in traces {
        let mut it = t.vertices.iter().peekable();
        for v in 0..num_vertices {
            let traced = it.next_if(|x| x.vertex == v);
            w.serialize(TraceRow {
                round: t.globals.round,
                vertex: v,
                palette_size: traced.map(|x| x.palette_size),
                lambda: traced.map(|x| x.lambda),
                big_lambda: traced.map(|x| x.big_lambda),
                d: traced.map(|x| x.d),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> csv::Result<Vec<TraceRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Per-round globals together with the constants that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalsFile {
    pub params: Params,
    pub rounds: Vec<RoundGlobals>,
}

impl GlobalsFile {
    pub fn new(params: &Params, traces: &[RoundTrace]) -> Self {
        Self {
            params: params.clone(),
            rounds: traces.iter().map(|t| t.globals).collect(),
        }
    }
}

/// Rebuilds round traces from exported rows and globals. Rows whose value
/// fields are empty are skipped; rounds without globals are dropped.
pub fn traces_from_parts(rows: &[TraceRow], globals: &[RoundGlobals]) -> Vec<RoundTrace> {
    let mut by_round: BTreeMap<usize, Vec<VertexTrace>> = BTreeMap::new();
    for r in rows {
        if let (Some(palette_size), Some(lambda), Some(big_lambda), Some(d)) =
            (r.palette_size, r.lambda, r.big_lambda, r.d)
        {
            by_round.entry(r.round).or_default().push(VertexTrace {
                vertex: r.vertex,
                palette_size,
                lambda,
                big_lambda,
                d,
            });
        }
    }
    globals
        .iter()
        .map(|g| {
            let mut vertices = by_round.remove(&g.round).unwrap_or_default();
            vertices.sort_by_key(|v| v.vertex);
            RoundTrace { globals: *g, vertices }
        })
        .collect()
}

/// Non-finite values are written as `null` and read back as +∞.
mod lenient {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
