//! Random orientable surfaces with boundary, built by gluing polygon sides
//! along uniform random matchings.
//!
//! - [`perm`]: permutations, matchings, cycle statistics and samplers.
//! - [`gluing`]: the T, T′, S and S′ models and per-sample topology.
//! - [`oracle`]: exhaustive enumeration and exact reference laws.
//! - [`stats`]: normalizations, moments, KS, chi-square and TV distance.
//! - [`experiment`]: reproducible (parallel) sampling runs.
//! - [`verify`]: the verification suite.

pub mod dsu;
pub mod experiment;
pub mod gluing;
pub mod oracle;
pub mod perm;
pub mod report;
pub mod rng;
pub mod stats;
pub mod verify;

pub use gluing::{
    boundary_shortcut, build_instance, BoundaryTrace, GluingInstance, ModelError, ModelKind,
    ModelParams, SurfaceSummary,
};
pub use oracle::{exact_joint, stirling_first, ExactDistribution, StirlingRow};
pub use perm::{CycleDecomposition, Matching, PermError, Permutation};
pub use stats::{ExperimentPlan, MomentReport};
