//! Time-change jump engine.
//!
//! Between jumps the process satisfies the integral equation
//! `int_{T_{n-1}}^{T_n} R_tot(X(t)) dt = S_n` with `S_n` unit exponential.
//! Substituting the accumulated hazard `s` for time turns flow and clock
//! into one augmented ODE,
//!
//! ```text
//! dy/ds  = F(y, tau) / R_tot(y, tau)
//! dtau/ds = 1 / R_tot(y, tau)
//! ```
//!
//! so integrating from 0 to `S_n` lands exactly on the next jump:
//! `(X(T_n^-), T_n) = (y(S_n), tau(S_n))`. Physical time `tau(s)` is passed
//! to `F` and `R_tot` as the time argument, which also covers
//! time-dependent coefficients.
//!
//! The transform needs `R_tot > 0` along the flow. When the rate decays
//! toward zero the jump time diverges; the integration is then abandoned
//! and the raw flow `dx/dt = F(x)` is integrated in physical time to the
//! horizon instead. Optionally a constant-rate Poisson clock of intensity
//! `sample_rate` is superposed on the jump rate, yielding `phantom_sample`
//! records that expose the flow between jumps without perturbing it.

use std::cell::Cell;

use thiserror::Error;

use crate::model::{JumpRecord, Method, ModelError, PdmpModel, RecordKind, State, Trajectory};
use crate::ode::{find_root, integrate, integrate_until, DenseSolution, IntegrationOutcome, OdeError, OdeProblem, SolverConfig};
use crate::rng::ExpStream;

/// A stalled segment whose endpoint rate has dropped below this fraction of
/// the rate at the segment start is classified as a vanished rate rather
/// than a plain solver failure.
const COLLAPSE_RATIO: f64 = 1e-9;

/// State of the augmented system: continuous coordinates `y`, physical time
/// `tau`, and the (piecewise constant) discrete component.
#[derive(Debug, Clone, PartialEq)]
pub struct ChvState {
    pub y: Vec<f64>,
    pub tau: f64,
    pub discrete: Vec<i64>,
}

impl ChvState {
    pub fn initial(model: &PdmpModel) -> Self {
        ChvState {
            y: model.initial_continuous.clone(),
            tau: model.initial_time,
            discrete: model.initial_discrete.clone(),
        }
    }
}

/// Options for the time-change engine.
#[derive(Debug, Clone)]
pub struct ChvOptions {
    /// Effective rates at or below this value are treated as zero: the next
    /// jump is unreachable and the segment falls back to flowing in physical
    /// time. Must sit below any physically meaningful rate.
    pub rate_floor: f64,
    /// Intensity of the superposed flow-sampling clock; 0 disables it.
    pub sample_rate: f64,
    /// Physical-time horizon for segment truncation.
    pub t_horizon: f64,
}

impl Default for ChvOptions {
    fn default() -> Self {
        ChvOptions {
            rate_floor: 1e-300,
            sample_rate: 0.0,
            t_horizon: f64::INFINITY,
        }
    }
}

impl ChvOptions {
    fn validate(&self) -> Result<(), ChvError> {
        if !(self.rate_floor >= 0.0 && self.rate_floor.is_finite()) {
            return Err(ChvError::InvalidOptions(format!(
                "rate_floor must be non-negative and finite, got {}",
                self.rate_floor
            )));
        }
        if !(self.sample_rate >= 0.0 && self.sample_rate.is_finite()) {
            return Err(ChvError::InvalidOptions(format!(
                "sample_rate must be non-negative and finite, got {}",
                self.sample_rate
            )));
        }
        if self.t_horizon.is_nan() {
            return Err(ChvError::InvalidOptions("t_horizon must not be NaN".into()));
        }
        Ok(())
    }
}

/// How a hazard segment ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentOutcome {
    /// The full hazard mass `s_target` was consumed; the end state is the
    /// next event point `(y(S_n), tau(S_n))`.
    JumpReached,
    /// Physical time crossed `t_horizon` first; the end state is the flow
    /// state at exactly the horizon.
    HorizonReached,
}

#[derive(Debug, Error)]
pub enum ChvError {
    #[error("solver: {0}")]
    Solver(#[from] OdeError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("RateFloorHit: effective rate {rate:e} at t = {t} cannot produce the next jump")]
    RateFloorHit { t: f64, rate: f64 },
    #[error("NegativeRate: R_tot = {rate} at t = {t}")]
    NegativeRate { t: f64, rate: f64 },
    #[error("HorizonUnbounded: rate vanished at t = {t} and no finite t_end exists to flow to")]
    HorizonUnbounded { t: f64 },
    #[error("InvalidOptions: {0}")]
    InvalidOptions(String),
    #[error("InvalidHorizon: t_end = {t_end} does not lie beyond the start time {t_start}")]
    InvalidHorizon { t_start: f64, t_end: f64 },
}

/// Integrates one hazard segment from `start` until either the hazard mass
/// `s_target` is consumed or physical time reaches `opts.t_horizon`.
///
/// Returns the end state, which of the two stops applied, and the dense
/// solution of the augmented system over the consumed hazard interval
/// (abscissa `s`, components `[y, tau]`).
pub fn chv_segment(
    model: &PdmpModel,
    start: &ChvState,
    s_target: f64,
    config: &SolverConfig,
    opts: &ChvOptions,
) -> Result<(ChvState, SegmentOutcome, DenseSolution), ChvError> {
    opts.validate()?;
    if !(s_target > 0.0 && s_target.is_finite()) {
        return Err(ChvError::InvalidOptions(format!(
            "s_target must be positive and finite, got {s_target}"
        )));
    }
    let d = model.dim_continuous;
    let lambda = opts.sample_rate;
    let horizon = opts.t_horizon;
    let disc = &start.discrete;

    let r_start = model.total_rate_raw(&start.y, disc, start.tau);
    if !r_start.is_finite() {
        return Err(ChvError::Model(ModelError::NonFiniteRate { t: start.tau }));
    }
    if r_start < 0.0 {
        return Err(ChvError::NegativeRate { t: start.tau, rate: r_start });
    }
    if r_start + lambda <= opts.rate_floor {
        return Err(ChvError::RateFloorHit { t: start.tau, rate: r_start });
    }

    // Poisoning: out-of-domain rate values seen by the right-hand side are
    // remembered and the derivative is set to NaN, so the step is rejected
    // and retried smaller. Only if the integration ultimately fails does the
    // poison matter for diagnosis.
    let saw_bad_rate = Cell::new(false);

    let mut z0 = Vec::with_capacity(d + 1);
    z0.extend_from_slice(&start.y);
    z0.push(start.tau);

    let rhs = |_s: f64, z: &[f64], dz: &mut [f64]| {
        let (y, tau) = (&z[..d], z[d]);
        let r = model.total_rate_raw(y, disc, tau);
        let r_eff = r + lambda;
        if !r_eff.is_finite() || r < 0.0 || r_eff <= opts.rate_floor {
            saw_bad_rate.set(true);
            dz.fill(f64::NAN);
            return;
        }
        model.vector_field(y, disc, tau, &mut dz[..d]);
        let inv = 1.0 / r_eff;
        for v in &mut dz[..d] {
            *v *= inv;
        }
        dz[d] = inv;
    };

    let problem = OdeProblem::new(z0, 0.0, s_target, rhs);
    let (sol, outcome) = integrate_until(&problem, config, |_s, z| z[d] >= horizon)?;

    match outcome {
        IntegrationOutcome::Halted => {
            // tau crossed the horizon inside the last accepted step; truncate
            // by root finding on the tau component of the dense output.
            let s_h = find_root(&sol, |z, _s| z[d] - horizon, sol.t_start(), sol.t_reached())?;
            let z = sol.interpolate(s_h)?;
            // A crossing at the very end of the full hazard interval is the
            // jump itself landing on the horizon.
            if s_h >= s_target {
                let end = ChvState { y: z[..d].to_vec(), tau: z[d], discrete: start.discrete.clone() };
                return Ok((end, SegmentOutcome::JumpReached, sol));
            }
            let end = ChvState { y: z[..d].to_vec(), tau: horizon, discrete: start.discrete.clone() };
            Ok((end, SegmentOutcome::HorizonReached, sol))
        }
        IntegrationOutcome::Completed => {
            let z = sol.endpoint_state();
            let end = ChvState { y: z[..d].to_vec(), tau: z[d], discrete: start.discrete.clone() };
            if end.tau >= horizon {
                let s_h = find_root(&sol, |z, _s| z[d] - horizon, sol.t_start(), sol.t_reached())?;
                let z = sol.interpolate(s_h)?;
                let end = ChvState { y: z[..d].to_vec(), tau: horizon, discrete: start.discrete.clone() };
                return Ok((end, SegmentOutcome::HorizonReached, sol));
            }
            Ok((end, SegmentOutcome::JumpReached, sol))
        }
        IntegrationOutcome::Failed(e) => {
            let z = sol.endpoint_state();
            let (y_end, tau_end) = (&z[..d], z[d]);
            let r_end = model.total_rate_raw(y_end, disc, tau_end);
            if r_end.is_finite() && r_end < 0.0 {
                return Err(ChvError::NegativeRate { t: tau_end, rate: r_end });
            }
            let r_eff = r_end + lambda;
            let s_remaining = s_target - sol.t_reached();
            // The integrator stalls where `1 / R_tot` develops a pole, which
            // is what exhausted hazard mass looks like in stretched time. The
            // failure is reported as a vanishing rate when the endpoint rate
            // is at the floor, when the remaining mass is out of reach before
            // the horizon even if the rate froze at its current value, or
            // when a step-underflow (or a rate poisoned out of its domain)
            // coincides with a rate that has collapsed by nine orders of
            // magnitude relative to the segment start.
            let stalled = matches!(e, OdeError::StepUnderflow { .. }) || saw_bad_rate.get();
            let collapsed = r_end.is_finite()
                && (r_eff <= opts.rate_floor
                    || (horizon.is_finite() && r_eff * (horizon - tau_end) < s_remaining)
                    || (stalled && r_eff < COLLAPSE_RATIO * (r_start + lambda)));
            if collapsed {
                return Err(ChvError::RateFloorHit { t: tau_end, rate: r_end });
            }
            Err(ChvError::Solver(e))
        }
    }
}

fn record_state(y: &[f64], discrete: &[i64]) -> State {
    State { continuous: y.to_vec(), discrete: discrete.to_vec() }
}

/// Simulates a trajectory with the time-change method until `t_end` or until
/// `max_jumps` true jumps, whichever comes first.
///
/// With `opts.sample_rate > 0` a constant-rate clock is superposed: the
/// segment is run with `R_tot + sample_rate` and each event is classified as
/// a true jump with probability `R_tot / (R_tot + sample_rate)`, otherwise
/// recorded as a `phantom_sample` with the state unchanged.
pub fn chv_simulate(
    model: &PdmpModel,
    t_end: f64,
    max_jumps: u64,
    stream: &mut ExpStream,
    config: &SolverConfig,
    opts: &ChvOptions,
) -> Result<Trajectory, ChvError> {
    opts.validate()?;
    let mut state = ChvState::initial(model);
    if t_end.is_nan() || t_end <= state.tau {
        return Err(ChvError::InvalidHorizon { t_start: state.tau, t_end });
    }
    let seg_opts = ChvOptions { t_horizon: t_end, ..opts.clone() };
    let lambda = opts.sample_rate;

    let mut records = Vec::new();
    let mut n_true = 0u64;
    let mut index = 0u64;

    while n_true < max_jumps {
        if state.tau >= t_end {
            index += 1;
            records.push(JumpRecord {
                index,
                kind: RecordKind::HorizonEnd,
                time: t_end,
                s_draw: None,
                state_before: record_state(&state.y, &state.discrete),
                state_after: record_state(&state.y, &state.discrete),
            });
            break;
        }
        let s_n = stream.draw();
        match chv_segment(model, &state, s_n, config, &seg_opts) {
            Ok((end, SegmentOutcome::JumpReached, _sol)) => {
                let is_true_jump = if lambda > 0.0 {
                    let r = model.total_rate(&end.y, &end.discrete, end.tau)?;
                    let u = crate::model::UniformSource::next_uniform(stream);
                    u < r / (r + lambda)
                } else {
                    true
                };
                index += 1;
                let before = record_state(&end.y, &end.discrete);
                if is_true_jump {
                    let after = model.apply_jump(&end.y, &end.discrete, end.tau, stream)?;
                    records.push(JumpRecord {
                        index,
                        kind: RecordKind::TrueJump,
                        time: end.tau,
                        s_draw: Some(s_n),
                        state_before: before,
                        state_after: after.clone(),
                    });
                    n_true += 1;
                    state = ChvState { y: after.continuous, tau: end.tau, discrete: after.discrete };
                } else {
                    records.push(JumpRecord {
                        index,
                        kind: RecordKind::PhantomSample,
                        time: end.tau,
                        s_draw: Some(s_n),
                        state_before: before.clone(),
                        state_after: before,
                    });
                    state = end;
                }
            }
            Ok((end, SegmentOutcome::HorizonReached, _sol)) => {
                index += 1;
                records.push(JumpRecord {
                    index,
                    kind: RecordKind::HorizonEnd,
                    time: t_end,
                    s_draw: None,
                    state_before: record_state(&end.y, &end.discrete),
                    state_after: record_state(&end.y, &end.discrete),
                });
                break;
            }
            Err(ChvError::RateFloorHit { t, .. }) => {
                if !t_end.is_finite() {
                    return Err(ChvError::HorizonUnbounded { t });
                }
                // The next jump is unreachable: integrate the raw flow in
                // physical time from the segment start to the horizon.
                let end = flow_to(model, &state, t_end, config)?;
                index += 1;
                records.push(JumpRecord {
                    index,
                    kind: RecordKind::HorizonEnd,
                    time: t_end,
                    s_draw: None,
                    state_before: record_state(&end, &state.discrete),
                    state_after: record_state(&end, &state.discrete),
                });
                break;
            }
            Err(e) => return Err(e),
        }
    }

    Ok(Trajectory {
        model_id: model.id.clone(),
        method: Method::Chv,
        seed: stream.seed(),
        t_end,
        records,
        warning_count: 0,
    })
}

/// Time-dependent entry point: `F` and `R_tot` receive the physical time
/// `tau(s)` as their time argument. [`chv_simulate`] already routes time
/// this way for every model, so both entry points share one implementation;
/// autonomous models simply ignore the argument.
pub fn chv_simulate_timedep(
    model: &PdmpModel,
    t_end: f64,
    max_jumps: u64,
    stream: &mut ExpStream,
    config: &SolverConfig,
    opts: &ChvOptions,
) -> Result<Trajectory, ChvError> {
    chv_simulate(model, t_end, max_jumps, stream, config, opts)
}

/// Integrates the raw flow `dx/dt = F(x, t)` from `start` to `t_end` in
/// physical time and returns the continuous state at `t_end`.
fn flow_to(model: &PdmpModel, start: &ChvState, t_end: f64, config: &SolverConfig) -> Result<Vec<f64>, ChvError> {
    let d = model.dim_continuous;
    let disc = &start.discrete;
    let rhs = |t: f64, x: &[f64], dx: &mut [f64]| model.vector_field(x, disc, t, dx);
    let problem = OdeProblem::new(start.y.clone(), start.tau, t_end, rhs);
    let sol = integrate(&problem, config)?;
    Ok(sol.endpoint_state()[..d].to_vec())
}
