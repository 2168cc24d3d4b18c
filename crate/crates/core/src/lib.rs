//! Node-weighted survivable network design on planar and general graphs.
//!
//! The solvers cover {0,1} biset functions with a primal-dual engine driven by
//! minimal-violated-biset oracles: `k` augmentation phases for element and
//! edge connectivity, and a two-stage scheme for {0,1,2} vertex connectivity.
//! The [`oracle`] module holds brute-force ground truth and audit checks.

pub mod biset;
pub mod cover;
pub mod bitset;
pub mod error;
pub mod flow;
pub mod generate;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod sndp;

pub use biset::{Biset, LaminarForest};
pub use bitset::{BitSet, EdgeSet, VertexSet};
pub use error::{Certificate, Error, Result};
pub use graph::{preprocess, Instance, Kind, NodeWeightedGraph, PreprocessReport};
pub use cover::{cover, CoverResult, DualState, IterationRecord, ViolatedBisets};
pub use generate::{generate, Family, GeneratorSpec};
pub use oracle::{AuditReport, Check};
pub use sndp::{solve, solve_ec_sndp, solve_elem_sndp, solve_vc012, PhaseReport, PhaseState, SolveReport};
