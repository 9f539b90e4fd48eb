//! Fictitious jump engine (thinning).
//!
//! Candidate events are generated from a dominating Poisson clock of
//! intensity `lambda >= R_tot` along the flow: the next candidate lies at
//! `t + S/lambda` with `S` unit exponential. The state is flowed there and
//! the candidate is accepted as a true jump with probability
//! `R_tot(x) / lambda`, otherwise recorded as fictitious and the walk
//! continues from the flowed state. Acceptance never requires integrating
//! the rate, only evaluating it at candidate times, at the price of
//! rejected candidates when the bound is slack.
//!
//! The bound is re-evaluated after every event, so a per-segment bound only
//! needs to dominate the rate along the flow launched at the current state.
//! A measured ratio `R_tot / lambda` above 1 (beyond a tiny floating-point
//! slack) means the dominating property is broken and the run aborts; the
//! sampled law would silently stop being the target law.

use thiserror::Error;

use crate::model::{JumpRecord, Method, ModelError, PdmpModel, RecordKind, State, Trajectory, UniformSource};
use crate::ode::{integrate, OdeError, OdeProblem, SolverConfig};
use crate::rng::ExpStream;

/// Relative slack allowed on the acceptance ratio before the bound counts
/// as violated; absorbs integrator and rounding noise at ratio 1.
pub const ACCEPT_SLACK: f64 = 1e-12;

/// Dominating intensity for the candidate clock.
pub enum RateBound {
    /// One global constant, valid everywhere.
    Constant(f64),
    /// Evaluated at each segment start `(x, d, t)`; must dominate `R_tot`
    /// along the flow from that point until the next candidate.
    PerSegment(Box<dyn Fn(&[f64], &[i64], f64) -> f64 + Send + Sync>),
}

impl RateBound {
    fn eval(&self, x: &[f64], d: &[i64], t: f64) -> f64 {
        match self {
            RateBound::Constant(l) => *l,
            RateBound::PerSegment(f) => f(x, d, t),
        }
    }
}

#[derive(Debug, Error)]
pub enum FjmError {
    #[error("solver: {0}")]
    Solver(#[from] OdeError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("BoundViolated: R_tot = {rate} exceeds bound {bound} at t = {t}")]
    BoundViolated { t: f64, rate: f64, bound: f64 },
    #[error("InvalidBound: bound = {bound} at t = {t} (must be positive and finite)")]
    InvalidBound { t: f64, bound: f64 },
    #[error("InvalidHorizon: t_end = {t_end} does not lie beyond the start time {t_start}")]
    InvalidHorizon { t_start: f64, t_end: f64 },
}

/// Simulates a trajectory by thinning until `t_end`, until `max_jumps` true
/// jumps, or until `max_events` candidates (true plus fictitious) have been
/// processed, whichever comes first. Reaching `max_events` is a clean stop:
/// the trajectory simply ends at the last candidate without a closing
/// horizon record.
pub fn fjm_simulate(
    model: &PdmpModel,
    bound: &RateBound,
    t_end: f64,
    max_jumps: u64,
    max_events: u64,
    stream: &mut ExpStream,
    config: &SolverConfig,
) -> Result<Trajectory, FjmError> {
    let mut x = model.initial_continuous.clone();
    let mut d = model.initial_discrete.clone();
    let mut t = model.initial_time;
    if t_end.is_nan() || t_end <= t {
        return Err(FjmError::InvalidHorizon { t_start: t, t_end });
    }

    let mut records = Vec::new();
    let mut n_true = 0u64;
    let mut events = 0u64;
    let mut index = 0u64;

    while n_true < max_jumps && events < max_events {
        let lambda = bound.eval(&x, &d, t);
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(FjmError::InvalidBound { t, bound: lambda });
        }
        let s = stream.draw();
        let t_next = t + s / lambda;
        if t_next > t_end {
            let x_end = flow_to(model, &x, &d, t, t_end, config)?;
            index += 1;
            let state = State { continuous: x_end, discrete: d.clone() };
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
        events += 1;

        let x_next = flow_to(model, &x, &d, t, t_next, config)?;
        let r = model.total_rate(&x_next, &d, t_next)?;
        let ratio = r / lambda;
        if ratio > 1.0 + ACCEPT_SLACK {
            return Err(FjmError::BoundViolated { t: t_next, rate: r, bound: lambda });
        }
        let u = stream.next_uniform();
        index += 1;
        let before = State { continuous: x_next, discrete: d.clone() };
        if u < ratio {
            let after = model.apply_jump(&before.continuous, &d, t_next, stream)?;
            records.push(JumpRecord {
                index,
                kind: RecordKind::TrueJump,
                time: t_next,
                s_draw: Some(s),
                state_before: before,
                state_after: after.clone(),
            });
            n_true += 1;
            x = after.continuous;
            d = after.discrete;
        } else {
            records.push(JumpRecord {
                index,
                kind: RecordKind::Fictitious,
                time: t_next,
                s_draw: Some(s),
                state_before: before.clone(),
                state_after: before.clone(),
            });
            x = before.continuous;
        }
        t = t_next;
    }

    Ok(Trajectory {
        model_id: model.id.clone(),
        method: Method::Fjm,
        seed: stream.seed(),
        t_end,
        records,
        warning_count: 0,
    })
}

/// Number of rejected (fictitious) candidates in a trajectory.
pub fn count_fictitious(traj: &Trajectory) -> u64 {
    traj.records.iter().filter(|r| r.kind == RecordKind::Fictitious).count() as u64
}

fn flow_to(
    model: &PdmpModel,
    x: &[f64],
    d: &[i64],
    t0: f64,
    t1: f64,
    config: &SolverConfig,
) -> Result<Vec<f64>, OdeError> {
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| model.vector_field(y, d, t, dy);
    let problem = OdeProblem::new(x.to_vec(), t0, t1, rhs);
    let sol = integrate(&problem, config)?;
    Ok(sol.endpoint_state().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    fn config() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn constant_rate_with_tight_bound_accepts_everything() {
        let model = examples::poisson(2.0);
        let mut stream = ExpStream::new(7);
        let traj = fjm_simulate(
            &model,
            &RateBound::Constant(2.0),
            f64::INFINITY,
            200,
            100_000,
            &mut stream,
            &config(),
        )
        .unwrap();
        assert_eq!(traj.n_true_jumps(), 200);
        assert_eq!(count_fictitious(&traj), 0);
    }

    #[test]
    fn doubled_bound_rejects_about_half() {
        // Acceptance probability 1/2 per candidate: fictitious count per
        // true jump is Geometric(1/2) with mean 1.
        let model = examples::poisson(1.0);
        let mut stream = ExpStream::new(11);
        let traj = fjm_simulate(
            &model,
            &RateBound::Constant(2.0),
            f64::INFINITY,
            20_000,
            200_000,
            &mut stream,
            &config(),
        )
        .unwrap();
        let per_jump = count_fictitious(&traj) as f64 / traj.n_true_jumps() as f64;
        assert!((per_jump - 1.0).abs() < 0.05, "fictitious per jump {per_jump}");
    }

    #[test]
    fn jump_times_match_time_change_on_constant_rate() {
        let model = examples::poisson(2.0);
        let fjm = {
            let mut stream = ExpStream::new(41);
            fjm_simulate(&model, &RateBound::Constant(2.0), f64::INFINITY, 100, 10_000, &mut stream, &config()).unwrap()
        };
        let chv = {
            let mut stream = ExpStream::new(41);
            crate::chv::chv_simulate(&model, f64::INFINITY, 100, &mut stream, &config(), &crate::chv::ChvOptions::default()).unwrap()
        };
        let a = fjm.jump_times();
        let b = chv.jump_times();
        assert_eq!(a.len(), b.len());
        for (ta, tb) in a.iter().zip(&b) {
            assert!((ta - tb).abs() < 1e-8, "{ta} vs {tb}");
        }
    }

    #[test]
    fn bound_violation_is_detected() {
        let model = examples::poisson(2.0);
        let mut stream = ExpStream::new(1);
        let err = fjm_simulate(&model, &RateBound::Constant(1.0), 10.0, 10, 1000, &mut stream, &config()).unwrap_err();
        match err {
            FjmError::BoundViolated { rate, bound, .. } => {
                assert_eq!(rate, 2.0);
                assert_eq!(bound, 1.0);
            }
            other => panic!("expected BoundViolated, got {other:?}"),
        }
    }

    #[test]
    fn ratio_within_slack_is_accepted() {
        let model = examples::poisson(1.0);
        let bound = RateBound::Constant(1.0 / (1.0 + 5e-13));
        let mut stream = ExpStream::new(2);
        let traj = fjm_simulate(&model, &bound, f64::INFINITY, 50, 1000, &mut stream, &config()).unwrap();
        assert_eq!(traj.n_true_jumps(), 50);
    }

    #[test]
    fn ratio_beyond_slack_is_rejected() {
        let model = examples::poisson(1.0);
        let bound = RateBound::Constant(1.0 / (1.0 + 1e-11));
        let mut stream = ExpStream::new(2);
        let err = fjm_simulate(&model, &bound, f64::INFINITY, 50, 1000, &mut stream, &config()).unwrap_err();
        assert!(matches!(err, FjmError::BoundViolated { .. }), "got {err:?}");
    }

    #[test]
    fn per_segment_bound_follows_decaying_rate() {
        // Odd branches of the quadratic-decay model have R = x strictly
        // decreasing along the flow, so the segment-start rate dominates.
        // Forcing the kernel to keep the branch odd keeps that true after
        // every jump.
        let base = examples::example2();
        let model = PdmpModel::new(
            "example2-odd-only",
            1,
            1,
            move |x, d, t, out| base.vector_field(x, d, t, out),
            |x, _, _| x[0],
            |x: &[f64], d: &[i64], _t, _u: &mut dyn UniformSource| (x.to_vec(), vec![d[0] + 2]),
            vec![2.0],
            vec![1],
            0.0,
        );
        let bound = RateBound::PerSegment(Box::new(|x, _, _| x[0]));
        let mut stream = ExpStream::new(23);
        let traj = fjm_simulate(&model, &bound, f64::INFINITY, 5, 10_000, &mut stream, &config()).unwrap();
        assert_eq!(traj.n_true_jumps(), 5);
        let times = traj.jump_times();
        for w in times.windows(2) {
            assert!(w[0] < w[1]);
        }
        // With the bound equal to the decaying rate the ratio is at most 1
        // but strictly below between candidates, so some rejections are
        // possible yet every accepted time must be strictly increasing and
        // the state strictly decreasing.
        let mut prev = f64::INFINITY;
        for rec in traj.true_jumps() {
            let x = rec.state_before.continuous[0];
            assert!(x < prev);
            prev = x;
        }
    }

    #[test]
    fn horizon_closes_with_flowed_state() {
        let model = examples::example3();
        let mut stream = ExpStream::new(9);
        let bound = RateBound::Constant(examples::EXAMPLE3_RATE_SUP);
        let traj = fjm_simulate(&model, &bound, 5.0, u64::MAX, 100_000, &mut stream, &config()).unwrap();
        let last = traj.records.last().unwrap();
        assert_eq!(last.kind, RecordKind::HorizonEnd);
        assert_eq!(last.time, 5.0);
    }

    #[test]
    fn max_events_stops_cleanly() {
        let model = examples::poisson(1.0);
        // Bound 100x the rate: ~99% rejects, so 10 candidates are consumed
        // well before 10 true jumps exist.
        let mut stream = ExpStream::new(4);
        let traj = fjm_simulate(&model, &RateBound::Constant(100.0), f64::INFINITY, 10, 10, &mut stream, &config()).unwrap();
        assert_eq!(traj.records.len(), 10);
        assert!(traj.n_true_jumps() < 10);
        assert!(traj.records.iter().all(|r| r.kind != RecordKind::HorizonEnd));
    }

    #[test]
    fn per_segment_bound_on_switching_sigmoid_never_violates() {
        // Decreasing branch of the sigmoid-rate model: the rate is
        // increasing in x and x decays, so the segment-start rate dominates
        // the whole segment. The tiny relative margin absorbs integration
        // error in the flowed state once x has decayed to the rate plateau.
        let base = examples::example3();
        let model = PdmpModel::new(
            "example3-odd-only",
            1,
            1,
            move |x, d, t, out| base.vector_field(x, d, t, out),
            examples::example3_rate,
            |x: &[f64], d: &[i64], _t, _u: &mut dyn UniformSource| (x.to_vec(), vec![d[0] + 2]),
            vec![4.0],
            vec![1],
            0.0,
        );
        let bound = RateBound::PerSegment(Box::new(|x, _, _| examples::example3_rate(x, &[], 0.0) * (1.0 + 1e-9)));
        let mut stream = ExpStream::new(15);
        let traj = fjm_simulate(&model, &bound, f64::INFINITY, 30, 100_000, &mut stream, &config()).unwrap();
        assert_eq!(traj.n_true_jumps(), 30);
    }

    #[test]
    fn invalid_bound_is_rejected() {
        let model = examples::poisson(1.0);
        let mut stream = ExpStream::new(4);
        let err = fjm_simulate(&model, &RateBound::Constant(0.0), 1.0, 1, 10, &mut stream, &config()).unwrap_err();
        assert!(matches!(err, FjmError::InvalidBound { .. }), "got {err:?}");
    }
}
