//! Special functions and the benchmark problem registry.

pub mod problems;
pub mod special;

pub use problems::{
    instantiate, problem1_exact, problem1_source, problem4_exact, problem4_source, registry_defaults,
    CustomProblem, MeshRecipe, Probe, Problem, ProblemDefaults, RadialSeriesParams, PROBLEM_IDS,
};
pub use special::{bessel, find_roots, gamma_fn, mittag_leffler, BesselKind, RootEquation};
