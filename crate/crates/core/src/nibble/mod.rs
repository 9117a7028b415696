//! The iterative semi-random coloring procedure.
//!
//! Each round activates colors, discards colors lost to fully activated
//! constraint edges, keeps the rest with probability β/q, permanently colors
//! vertices holding an activated kept color, then rebuilds the per-color
//! constraint hypergraphs, filters palettes by weighted c-degree and reduces
//! codegrees. All randomness is keyed by (seed, round, vertex, color).

mod params;
pub mod q;
mod round;
mod state;
mod trace;

use thiserror::Error;

use crate::coloring::ColorId;
use crate::hypergraph::{Edge, HypergraphError, Vertex};
use crate::reduction::ReductionError;

pub use params::{Params, ParamsError, Relaxation, RoundParams, Schedule};
pub use q::QMethod;
pub use round::{
    estimate_q, run_round, run_round_audited, run_to_termination, RoundAudit, RoundOutcome, RunOutcome, RunStatus,
};
pub use state::{init_state, observed_delta, ConstraintFamily, NibbleConfig, NibbleState};
pub use trace::{
    read_csv, traces_from_parts, trajectory_check, write_csv, GlobalsFile, RoundGlobals, RoundTrace, TraceRow,
    TrajectoryReport, TrajectoryRound, VertexTrace,
};

#[derive(Debug, Error)]
pub enum NibbleError {
    #[error("list assignment covers {lists} vertices but the hypergraph has {vertices}")]
    ListCount { lists: usize, vertices: usize },
    #[error("instance rank {instance} exceeds parameter rank {params}")]
    Rank { instance: usize, params: usize },
    #[error("vertex {vertex} has {size} colors, fewer than C = {needed}; use relaxed mode")]
    ShortList { vertex: Vertex, size: usize, needed: usize },
    #[error("vertex {0} is not uncolored")]
    NotUncolored(Vertex),
    #[error("color {color} is not in the palette of vertex {vertex}")]
    NotInPalette { vertex: Vertex, color: ColorId },
    #[error("exact q refuses {edges} incident edges")]
    ExactRefused { edges: usize },
    #[error("round {0} already meets the termination condition")]
    Terminated(usize),
    #[error("schedule degenerates at round {round}: weight {weight}, t = {cdegree}")]
    Degenerate { round: usize, weight: f64, cdegree: f64 },
    #[error("zeta at round {round} is {actual}, expected {expected}")]
    Drift { round: usize, expected: f64, actual: f64 },
    #[error("constraint edge {edge:?} became monochromatic in color {color}")]
    Monochromatic { edge: Edge, color: ColorId },
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Params(#[from] ParamsError),
}
