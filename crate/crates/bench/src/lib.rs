//! Shared fixtures for the criterion benches: registry models paired with
//! their thinning bounds and the solver settings the benches run under.

use pdmp_core::{builtin_model, default_bound, PdmpModel, RateBound, SolverConfig};

/// Tolerances used across all benches.
pub fn bench_config() -> SolverConfig {
    SolverConfig::with_tolerances(1e-10, 1e-10)
}

/// A registry model plus its default thinning bound.
pub fn fixture(name: &str) -> (PdmpModel, Option<RateBound>) {
    let model = builtin_model(name).unwrap_or_else(|| panic!("unknown fixture '{name}'"));
    (model, default_bound(name))
}
