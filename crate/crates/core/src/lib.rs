//! Exact simulation of piecewise deterministic Markov processes (PDMPs).
//!
//! A PDMP follows a deterministic flow `dx/dt = F(x)` between random jump
//! times. The survivor function of the next jump is
//! `P(T_n - T_{n-1} > t) = exp(-int_0^t R_tot(phi_s(x)) ds)` and the state
//! after a jump is drawn from a kernel. This crate provides three exact
//! samplers for the jump times plus the shared machinery they need:
//!
//! - [`chv`]: time-change method. The integral equation for the next jump
//!   time is recast as an ODE in the accumulated-hazard variable, so one
//!   adaptive integration per jump lands exactly on the jump.
//! - [`fjm`]: fictitious jumps (thinning). Candidate times are drawn from a
//!   dominating Poisson process and accepted with probability
//!   `R_tot / bound`.
//! - [`tjm`]: baseline that integrates the hazard in physical time and
//!   locates the jump with dense-output root finding on steps sized only by
//!   the flow's error control.
//!
//! [`ode`] holds the shared Dormand-Prince 5(4) integrator, [`examples`] the
//! built-in models and their closed-form references, [`bench`] a Monte Carlo
//! timing harness, and [`stats`] the Kolmogorov-Smirnov helpers used to
//! check law equivalence between samplers.

pub mod bench;
pub mod chv;
pub mod examples;
pub mod fjm;
pub mod fmt;
pub mod model;
pub mod ode;
pub mod rng;
pub mod stats;
pub mod tjm;

pub use bench::{
    histogram, results_to_csv, run_bench, BenchError, BenchFailure, BenchReport, BenchResult, Histogram,
};
pub use chv::{chv_segment, chv_simulate, chv_simulate_timedep, ChvError, ChvOptions, ChvState, SegmentOutcome};
pub use examples::{
    builtin_model, compare_to_oracle, default_bound, example1, example1_jump, example1_oracle, example2,
    example2_jump, example2_oracle, example3, example3_rate, poisson, CompareError, ErrorRow, ErrorTable,
    OracleJump, OracleTrajectory, EXAMPLE3_RATE_SUP,
};
pub use fjm::{count_fictitious, fjm_simulate, FjmError, RateBound, ACCEPT_SLACK};
pub use model::{
    validate_model, JumpRecord, Method, ModelError, PdmpModel, RecordKind, State, Trajectory, UniformSource,
    ValidationIssue, ValidationReport,
};
pub use ode::{
    find_root, integrate, integrate_until, DenseSolution, IntegrationOutcome, OdeError, OdeProblem, SolverConfig,
};
pub use rng::ExpStream;
pub use stats::{ks_coefficient, ks_critical, ks_critical_one_sample, ks_one_sample, ks_two_sample};
pub use tjm::{tjm_event_simulate, TjmError};
