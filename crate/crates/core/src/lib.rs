//! Semi-random list coloring of triangle-free rank-k hypergraphs.
//!
//! The pipeline is: load or [generate](instances) a [`Hypergraph`], optionally
//! [reduce](reduction) its codegrees, run the iterative [nibble] phase from
//! [`init_state`] to termination, [complete](completion) the remaining
//! vertices, and check the result with the naive oracles in [verify].

pub mod coloring;
pub mod completion;
pub mod hypergraph;
pub mod instances;
pub mod nibble;
pub mod reduction;
pub mod rng;
pub mod verify;

pub use coloring::{ColorId, ColorNames, Coloring, ColoringFile, ListAssignment, ListsFile, Provenance};
pub use completion::{complete, CompletionConfig, CompletionError, CompletionOutcome, Fallback};
pub use hypergraph::{DegreeProfile, Depth, Edge, Hypergraph, HypergraphError, InstanceFile, TriangleWitness, Vertex};
pub use nibble::{
    init_state, run_round, run_to_termination, trajectory_check, NibbleConfig, NibbleError, NibbleState, Params,
    QMethod, Relaxation, RoundTrace, RunStatus,
};
pub use reduction::{
    balanced_reduce, check_soundness, f_reduce, f_reduce_with, solve_lambda, ContractionMode, ReductionPolicy,
    ReductionTrace,
};
