//! Dormand-Prince 5(4) stepper with PI step-size control.

use super::dense::{DenseSolution, Segment};
use super::{OdeError, OdeProblem, SolverConfig};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const SCALE_MIN: f64 = 0.2;
const SCALE_MAX: f64 = 5.0;
const PI_BETA: f64 = 0.04;
const PI_EXPO: f64 = 0.2 - 0.75 * PI_BETA;
/// Consecutive non-finite trial steps tolerated before giving up; each one
/// halves the step, so this spans 18 orders of magnitude.
const MAX_NONFINITE_REJECTS: u32 = 60;

/// How an integration ended. Runtime failures carry the partial solution up
/// to the last accepted step, so callers can inspect how far it got.
#[derive(Debug)]
pub enum IntegrationOutcome {
    /// Reached `t_end`.
    Completed,
    /// The halt predicate fired at an accepted step before `t_end`.
    Halted,
    Failed(OdeError),
}

/// Integrates the problem over its full span.
pub fn integrate<F>(problem: &OdeProblem<F>, config: &SolverConfig) -> Result<DenseSolution, OdeError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let (sol, outcome) = integrate_until(problem, config, |_, _| false)?;
    match outcome {
        IntegrationOutcome::Failed(e) => Err(e),
        _ => Ok(sol),
    }
}

/// Integrates until `t_end` or until `halt(t, y)` returns true at an
/// accepted step, whichever comes first. The predicate never influences step
/// selection; it is only consulted after a step has been accepted.
pub fn integrate_until<F, H>(
    problem: &OdeProblem<F>,
    config: &SolverConfig,
    mut halt: H,
) -> Result<(DenseSolution, IntegrationOutcome), OdeError>
where
    F: Fn(f64, &[f64], &mut [f64]),
    H: FnMut(f64, &[f64]) -> bool,
{
    config.validate()?;
    let n = problem.y0.len();
    if n == 0 {
        return Err(OdeError::InvalidConfig("state must have at least one component".into()));
    }
    if problem.y0.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::InvalidConfig("initial state must be finite".into()));
    }
    let mask = problem.controlled.as_deref();
    if let Some(m) = mask {
        if m.len() != n {
            return Err(OdeError::InvalidConfig("controlled mask length must match state dimension".into()));
        }
        if !m.iter().any(|&c| c) {
            return Err(OdeError::InvalidConfig("at least one component must be controlled".into()));
        }
    }
    let ctrl = |i: usize| mask.is_none_or(|m| m[i]);
    let n_ctrl = mask.map_or(n, |m| m.iter().filter(|&&c| c).count());
    let (t0, t1) = (problem.t_start, problem.t_end);
    if !t0.is_finite() || !t1.is_finite() || t1 < t0 {
        return Err(OdeError::InvalidSpan { t_start: t0, t_end: t1 });
    }

    let mut sol = DenseSolution {
        t_start: t0,
        t_reached: t0,
        segments: Vec::new(),
        endpoint: problem.y0.clone(),
        steps_accepted: 0,
        steps_rejected: 0,
    };
    if t1 == t0 {
        return Ok((sol, IntegrationOutcome::Completed));
    }

    let rhs = &problem.rhs;
    let mut y = problem.y0.clone();
    let mut y_new = vec![0.0; n];
    let mut y_stage = vec![0.0; n];
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];

    rhs(t0, &y, &mut k1);
    if k1.iter().any(|v| !v.is_finite()) {
        return Ok((sol, IntegrationOutcome::Failed(OdeError::NonFiniteDerivative { t: t0 })));
    }

    let mut h = match config.h_init {
        Some(h) => h.min(t1 - t0).min(config.h_max),
        None => initial_step(rhs, t0, t1, &y, &k1, mask, config),
    };

    let mut t = t0;
    let mut facold: f64 = 1e-4;
    let mut nonfinite_run = 0u32;
    let mut attempts = 0u64;

    while t < t1 {
        if attempts >= config.max_steps {
            return Ok((sol, IntegrationOutcome::Failed(OdeError::MaxStepsExceeded {
                t,
                max_steps: config.max_steps,
            })));
        }
        attempts += 1;

        h = h.min(config.h_max);
        let floor = config.h_min.max(4.0 * f64::EPSILON * t.abs()).max(1e-290);
        if h < floor {
            return Ok((sol, IntegrationOutcome::Failed(OdeError::StepUnderflow { t, h })));
        }
        let mut last = false;
        if t + 1.01 * h >= t1 {
            h = t1 - t;
            last = true;
        }

        for i in 0..n {
            y_stage[i] = y[i] + h * A21 * k1[i];
        }
        rhs(t + C2 * h, &y_stage, &mut k2);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * h, &y_stage, &mut k3);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * h, &y_stage, &mut k4);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * h, &y_stage, &mut k5);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs(t + h, &y_stage, &mut k6);
        for i in 0..n {
            y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        rhs(t + h, &y_new, &mut k7);

        let mut err_sq = 0.0;
        for i in 0..n {
            if !ctrl(i) {
                continue;
            }
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = config.atol + config.rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / n_ctrl as f64).sqrt();

        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            nonfinite_run += 1;
            if nonfinite_run > MAX_NONFINITE_REJECTS {
                return Ok((sol, IntegrationOutcome::Failed(OdeError::NonFiniteDerivative { t })));
            }
            sol.steps_rejected += 1;
            h *= 0.5;
            continue;
        }
        nonfinite_run = 0;

        if err <= 1.0 {
            let scale = (SAFETY * err.powf(-PI_EXPO) * facold.powf(PI_BETA)).clamp(SCALE_MIN, SCALE_MAX);
            facold = err.max(1e-4);

            let mut cont = [
                y.clone(),
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
            ];
            for i in 0..n {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k7[i] - bspl;
                cont[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            sol.segments.push(Segment { t_left: t, h, cont });
            sol.steps_accepted += 1;

            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            sol.t_reached = t;
            sol.endpoint.copy_from_slice(&y);

            if halt(t, &y) {
                return Ok((sol, IntegrationOutcome::Halted));
            }
            h *= scale;
        } else {
            sol.steps_rejected += 1;
            let scale = (SAFETY * err.powf(-PI_EXPO)).clamp(SCALE_MIN, 1.0);
            h *= scale;
        }
    }

    Ok((sol, IntegrationOutcome::Completed))
}

/// Initial step from the derivative magnitude at `t_start`: tentative Euler
/// step, second-derivative estimate, then the fifth-order heuristic
/// `h = (0.01 / max(d1, d2))^(1/5)`.
fn initial_step<F>(
    rhs: &F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    f0: &[f64],
    mask: Option<&[bool]>,
    config: &SolverConfig,
) -> f64
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let n_ctrl = mask.map_or(n, |m| m.iter().filter(|&&c| c).count());
    let span = t1 - t0;
    let sc: Vec<f64> = y0.iter().map(|v| config.atol + config.rtol * v.abs()).collect();
    let rms = |v: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            if mask.is_none_or(|m| m[i]) {
                s += (v[i] / sc[i]) * (v[i] / sc[i]);
            }
        }
        (s / n_ctrl as f64).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * (d0 / d1) };
    h0 = h0.min(span);

    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; n];
    rhs(t0 + h0, &y1, &mut f1);
    let h = if f1.iter().all(|v| v.is_finite()) {
        let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
        let d2 = rms(&diff) / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dmax).powf(0.2) };
        h1.min(100.0 * h0)
    } else {
        h0 * 1e-3
    };
    let floor = config.h_min.max(4.0 * f64::EPSILON * t0.abs()).max(1e-290);
    h.min(span).min(config.h_max).max(floor)
}
