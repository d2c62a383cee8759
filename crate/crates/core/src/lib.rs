//! Flooding on geometric Markovian evolving graphs.
//!
//! `n` nodes perform independent bounded random walks (move radius `ρ`) on a
//! grid over the square of side `√n`; at every step two nodes are linked iff
//! they are within transmission radius `r`. The crate simulates flooding of
//! one message over this evolving graph, instruments each step with the
//! supercell quantities used to bound the flooding time, and checks the
//! supporting combinatorial and probabilistic lemmas.
//!
//! * [`mobility`]: the grid, move offsets, stationary sampling, moves and the
//!   exact transition matrix.
//! * [`geometry`]: fixed-radius neighbor queries and snapshot components.
//! * [`flooding`]: the move-then-transmit protocol, supercell statistics and
//!   phase detection.
//! * [`lemmas`]: boundary-size, spreading-time and almost-increasing checks.
//! * [`experiments`]: seeded trials, sweeps, CSV output and scaling fits.
//! * [`cli`]: the `megflood` command line.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod flooding;
pub mod geometry;
pub mod lemmas;
pub mod mobility;
pub mod rng;

pub use error::{Error, Result};
pub use experiments::{
    fit_scaling, run_sweep, run_trial, RhoRule, SweepPoint, SweepSpec, TrialOptions, TrialResult,
};
pub use flooding::{build_analysis_grid, flood, AnalysisConfig, FloodOptions, FloodTrace, Source};
pub use geometry::{build_cell_index, connected_components, neighbors_within, ComponentReport};
pub use mobility::{move_offsets, GridPos, NodeState, OffsetSet, WorldConfig};
