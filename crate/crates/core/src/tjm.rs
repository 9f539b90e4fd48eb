//! Event-detection jump engine (true jump method).
//!
//! Works in physical time. The flow and the accumulated hazard are
//! integrated together,
//!
//! ```text
//! dx/dt = F(x, t)
//! dg/dt = R_tot(x, t)
//! ```
//!
//! and the next jump is the event `g(t) = S_n` with `S_n` unit exponential,
//! located by root finding on the dense output of the step that crossed the
//! level. After the jump `g` restarts at zero.
//!
//! Steps are sized by the flow components alone; `g` rides along outside the
//! error test, as an event function evaluated on whatever steps the flow
//! dictates. That is the point of this engine: it is the plain
//! event-detection baseline, with no step refinement near the crossing.
//!
//! Unlike the time-change engine the jump time is recovered by inverting
//! `g`, so its accuracy degrades wherever the crossing is flat or the flow
//! lets the solver take long steps: a hazard error `dg` maps to a time error
//! `dg / R_tot(t*)`. With an unbounded horizon the level crossing is hunted
//! over doubling windows; a hazard that provably cannot reach the level
//! stops the search with an error instead of looping forever.

use std::cell::Cell;

use thiserror::Error;

use crate::model::{JumpRecord, Method, ModelError, PdmpModel, RecordKind, State, Trajectory};
use crate::ode::{find_root, integrate_until, IntegrationOutcome, OdeError, OdeProblem, SolverConfig};
use crate::rng::ExpStream;

const INITIAL_WINDOW: f64 = 1.0;
const MAX_WINDOWS: u32 = 64;
const RATE_NEGLIGIBLE: f64 = 1e-300;

#[derive(Debug, Error)]
pub enum TjmError {
    #[error("solver: {0}")]
    Solver(#[from] OdeError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("NoEventBeforeHorizon: hazard reached {hazard:e} of target {s_target:e} by t = {t}; the next jump is unreachable")]
    NoEventBeforeHorizon { t: f64, hazard: f64, s_target: f64 },
    #[error("EventMissed: hazard level crossing near t = {t} could not be located: {source}")]
    EventMissed { t: f64, source: OdeError },
    #[error("InvalidHorizon: t_end = {t_end} does not lie beyond the start time {t_start}")]
    InvalidHorizon { t_start: f64, t_end: f64 },
}

/// Simulates a trajectory by hazard level crossing until `t_end` or until
/// `max_jumps` true jumps, whichever comes first.
///
/// Hazard decreases across accepted steps beyond `10 * atol` are counted in
/// the trajectory's `warning_count`; the hazard is nondecreasing for a
/// nonnegative rate, so such decreases flag integration noise on the event
/// function.
pub fn tjm_event_simulate(
    model: &PdmpModel,
    t_end: f64,
    max_jumps: u64,
    stream: &mut ExpStream,
    config: &SolverConfig,
) -> Result<Trajectory, TjmError> {
    let d = model.dim_continuous;
    let mut x = model.initial_continuous.clone();
    let mut disc = model.initial_discrete.clone();
    let mut t = model.initial_time;
    if t_end.is_nan() || t_end <= t {
        return Err(TjmError::InvalidHorizon { t_start: t, t_end });
    }

    let mut records = Vec::new();
    let mut warning_count = 0u64;
    let mut n_true = 0u64;
    let mut index = 0u64;

    'jumps: while n_true < max_jumps {
        if t >= t_end {
            index += 1;
            let state = State { continuous: x.clone(), discrete: disc.clone() };
            records.push(JumpRecord {
                index,
                kind: RecordKind::HorizonEnd,
                time: t_end,
                s_draw: None,
                state_before: state.clone(),
                state_after: state,
            });
            break;
        }
        let s_n = stream.draw();
        let mut g0 = 0.0;
        let mut window = INITIAL_WINDOW;
        let mut windows_used = 0u32;

        loop {
            let w_end = if t_end.is_finite() { t_end } else { t + window };
            let mut z0 = Vec::with_capacity(d + 1);
            z0.extend_from_slice(&x);
            z0.push(g0);

            let saw_bad_rate = Cell::new(false);
            let disc_ref = &disc;
            let rhs = |tt: f64, z: &[f64], dz: &mut [f64]| {
                let y = &z[..d];
                let r = model.total_rate_raw(y, disc_ref, tt);
                if !r.is_finite() || r < 0.0 {
                    saw_bad_rate.set(true);
                    dz.fill(f64::NAN);
                    return;
                }
                model.vector_field(y, disc_ref, tt, &mut dz[..d]);
                dz[d] = r;
            };
            let mut mask = vec![true; d + 1];
            mask[d] = false;
            let problem = OdeProblem::new(z0, t, w_end, rhs).with_controlled(mask);

            let mut last_g = g0;
            let halt = |_tt: f64, z: &[f64]| {
                let g = z[d];
                if g < last_g - 10.0 * config.atol {
                    warning_count += 1;
                }
                last_g = g;
                g >= s_n
            };
            let (sol, outcome) = integrate_until(&problem, config, halt)?;

            match outcome {
                IntegrationOutcome::Halted => {
                    let t_star = find_root(&sol, |z, _tt| z[d] - s_n, sol.t_start(), sol.t_reached())
                        .map_err(|e| TjmError::EventMissed { t: sol.t_reached(), source: e })?;
                    let z = sol.interpolate(t_star)?;
                    let before = State { continuous: z[..d].to_vec(), discrete: disc.clone() };
                    let after = model.apply_jump(&before.continuous, &disc, t_star, stream)?;
                    index += 1;
                    records.push(JumpRecord {
                        index,
                        kind: RecordKind::TrueJump,
                        time: t_star,
                        s_draw: Some(s_n),
                        state_before: before,
                        state_after: after.clone(),
                    });
                    n_true += 1;
                    x = after.continuous;
                    disc = after.discrete;
                    t = t_star;
                    continue 'jumps;
                }
                IntegrationOutcome::Completed => {
                    let z = sol.endpoint_state();
                    if t_end.is_finite() {
                        index += 1;
                        let state = State { continuous: z[..d].to_vec(), discrete: disc.clone() };
                        records.push(JumpRecord {
                            index,
                            kind: RecordKind::HorizonEnd,
                            time: t_end,
                            s_draw: None,
                            state_before: state.clone(),
                            state_after: state,
                        });
                        break 'jumps;
                    }
                    x = z[..d].to_vec();
                    g0 = z[d];
                    t = sol.t_reached();
                    windows_used += 1;
                    let r_end = model.total_rate_raw(&x, &disc, t);
                    if !(r_end > RATE_NEGLIGIBLE) || windows_used >= MAX_WINDOWS {
                        return Err(TjmError::NoEventBeforeHorizon { t, hazard: g0, s_target: s_n });
                    }
                    window *= 2.0;
                }
                IntegrationOutcome::Failed(e) => {
                    if saw_bad_rate.get() {
                        let z = sol.endpoint_state();
                        model.total_rate(&z[..d], &disc, sol.t_reached())?;
                    }
                    return Err(TjmError::Solver(e));
                }
            }
        }
    }

    Ok(Trajectory {
        model_id: model.id.clone(),
        method: Method::TjmEvent,
        seed: stream.seed(),
        t_end,
        records,
        warning_count,
    })
}
