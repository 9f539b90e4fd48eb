//! Adaptive explicit Runge-Kutta integration with dense output.
//!
//! One method serves every flow in this crate: the Dormand-Prince 5(4)
//! embedded pair with its free fourth-order interpolant. The jump engines
//! need exactly three capabilities, and this module provides nothing else:
//! integrate over a span, evaluate the solution anywhere inside it, and
//! locate a sign change of an event function on the dense output.

mod dense;
mod dopri5;
mod root;

pub use dense::DenseSolution;
pub use dopri5::{integrate, integrate_until, IntegrationOutcome};
pub use root::find_root;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("InvalidSpan: t_end = {t_end} does not follow t_start = {t_start}")]
    InvalidSpan { t_start: f64, t_end: f64 },
    #[error("MaxStepsExceeded: {max_steps} step attempts used, stopped at t = {t}")]
    MaxStepsExceeded { t: f64, max_steps: u64 },
    #[error("StepUnderflow: step size {h:e} collapsed at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("NonFiniteDerivative: right-hand side not finite near t = {t}")]
    NonFiniteDerivative { t: f64 },
    #[error("OutOfSpan: t = {t} outside integrated span [{t_start}, {t_end}]")]
    OutOfSpan { t: f64, t_start: f64, t_end: f64 },
    #[error("NoSignChange: event function has no sign change in [{t_lo}, {t_hi}]")]
    NoSignChange { t_lo: f64, t_hi: f64 },
    #[error("BracketInvalid: [{t_lo}, {t_hi}] is not a bracket inside the integrated span")]
    BracketInvalid { t_lo: f64, t_hi: f64 },
}

/// Initial value problem `y' = rhs(t, y)` on `[t_start, t_end]`.
///
/// The right-hand side writes the derivative into its last argument. A
/// non-finite derivative at an accepted point fails the integration with
/// [`OdeError::NonFiniteDerivative`]; non-finite values at trial points only
/// reject the step.
pub struct OdeProblem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub rhs: F,
    pub y0: Vec<f64>,
    pub t_start: f64,
    pub t_end: f64,
    /// Per-component flags for the step-size error test. `None` controls
    /// every component. Components flagged `false` are carried and
    /// interpolated but do not influence step selection, like an observer
    /// riding along an otherwise autonomous system.
    pub controlled: Option<Vec<bool>>,
}

impl<F> OdeProblem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(y0: Vec<f64>, t_start: f64, t_end: f64, rhs: F) -> Self {
        OdeProblem { rhs, y0, t_start, t_end, controlled: None }
    }

    /// Restricts the error test to the components flagged `true`.
    ///
    /// The mask length must equal the state dimension and at least one
    /// component must stay controlled; otherwise integration fails with
    /// [`OdeError::InvalidConfig`].
    pub fn with_controlled(mut self, mask: Vec<bool>) -> Self {
        self.controlled = Some(mask);
        self
    }

    pub fn dimension(&self) -> usize {
        self.y0.len()
    }
}

/// Integrator tolerances and step-size limits.
///
/// The error test is a root-mean-square over components of
/// `err_i / (atol + rtol * max(|y_i|, |y_new_i|))`, accepted when at most 1.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub atol: f64,
    pub rtol: f64,
    /// Initial step size; `None` selects one from the derivative magnitude
    /// at `t_start` with the usual order-aware heuristic.
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub h_max: f64,
    /// Cap on step attempts (accepted plus rejected) per integration call.
    pub max_steps: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            atol: 1e-10,
            rtol: 1e-10,
            h_init: None,
            h_min: 0.0,
            h_max: f64::INFINITY,
            max_steps: 100_000,
        }
    }
}

impl SolverConfig {
    pub fn with_tolerances(atol: f64, rtol: f64) -> Self {
        SolverConfig { atol, rtol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return Err(OdeError::InvalidConfig(format!("atol must be positive and finite, got {}", self.atol)));
        }
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return Err(OdeError::InvalidConfig(format!("rtol must be positive and finite, got {}", self.rtol)));
        }
        if let Some(h) = self.h_init {
            if !(h > 0.0 && h.is_finite()) {
                return Err(OdeError::InvalidConfig(format!("h_init must be positive and finite, got {h}")));
            }
        }
        if !(self.h_min >= 0.0) {
            return Err(OdeError::InvalidConfig(format!("h_min must be non-negative, got {}", self.h_min)));
        }
        if !(self.h_max > self.h_min) {
            return Err(OdeError::InvalidConfig(format!(
                "h_max = {} must exceed h_min = {}",
                self.h_max, self.h_min
            )));
        }
        if self.max_steps == 0 {
            return Err(OdeError::InvalidConfig("max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stiff_decay_endpoint() {
        // y' = -100 y over [0, 0.1]; exact endpoint exp(-10).
        let problem = OdeProblem::new(vec![1.0], 0.0, 0.1, |_t, y, dy: &mut [f64]| dy[0] = -100.0 * y[0]);
        let config = SolverConfig::default();
        let sol = integrate(&problem, &config).unwrap();
        let exact = 4.5399929762484854e-5;
        assert!(
            (sol.endpoint_state()[0] - exact).abs() <= 100.0 * config.atol,
            "endpoint {} vs {exact}",
            sol.endpoint_state()[0]
        );
    }

    #[test]
    fn interpolation_matches_step_endpoints() {
        let problem = OdeProblem::new(vec![1.0], 0.0, 1.0, |_t, y, dy: &mut [f64]| dy[0] = y[0]);
        let sol = integrate(&problem, &SolverConfig::default()).unwrap();
        for (t, state) in sol.grid() {
            let interp = sol.interpolate(t).unwrap();
            assert_eq!(interp[0].to_bits(), state[0].to_bits(), "boundary at t = {t}");
        }
        assert_eq!(sol.interpolate(0.0).unwrap()[0], 1.0);
    }

    #[test]
    fn interpolation_tracks_exact_solution() {
        let config = SolverConfig::default();
        let problem = OdeProblem::new(vec![1.0], 0.0, 2.0, |_t, y, dy: &mut [f64]| dy[0] = y[0]);
        let sol = integrate(&problem, &config).unwrap();
        for k in 0..=200 {
            let t = 2.0 * k as f64 / 200.0;
            let got = sol.interpolate(t).unwrap()[0];
            let exact = t.exp();
            assert!((got - exact).abs() <= 1e-7 * exact, "t = {t}: {got} vs {exact}");
        }
    }

    #[test]
    fn out_of_span_query_fails() {
        let problem = OdeProblem::new(vec![1.0], 0.0, 1.0, |_t, _y, dy: &mut [f64]| dy[0] = 1.0);
        let sol = integrate(&problem, &SolverConfig::default()).unwrap();
        assert!(matches!(sol.interpolate(1.5), Err(OdeError::OutOfSpan { .. })));
        assert!(matches!(sol.interpolate(-0.1), Err(OdeError::OutOfSpan { .. })));
    }

    #[test]
    fn finite_time_blowup_underflows_step() {
        // y' = y^2, y(0) = 1 blows up at t = 1; requesting t_end = 2 must
        // collapse the step size rather than loop or return garbage.
        let problem = OdeProblem::new(vec![1.0], 0.0, 2.0, |_t, y, dy: &mut [f64]| dy[0] = y[0] * y[0]);
        let err = integrate(&problem, &SolverConfig::default()).unwrap_err();
        assert!(
            matches!(err, OdeError::StepUnderflow { .. } | OdeError::MaxStepsExceeded { .. }),
            "unexpected error {err:?}"
        );
    }

    #[test]
    fn max_steps_is_enforced() {
        let config = SolverConfig { max_steps: 3, ..SolverConfig::default() };
        let problem = OdeProblem::new(vec![1.0], 0.0, 100.0, |t, _y, dy: &mut [f64]| dy[0] = (t).sin());
        let err = integrate(&problem, &config).unwrap_err();
        assert!(matches!(err, OdeError::MaxStepsExceeded { max_steps: 3, .. }));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let problem = OdeProblem::new(vec![1.0], 0.0, 1.0, |_t, _y, dy: &mut [f64]| dy[0] = 1.0);
        let config = SolverConfig { atol: 0.0, ..SolverConfig::default() };
        assert!(matches!(integrate(&problem, &config), Err(OdeError::InvalidConfig(_))));
        let config = SolverConfig { max_steps: 0, ..SolverConfig::default() };
        assert!(matches!(integrate(&problem, &config), Err(OdeError::InvalidConfig(_))));
    }

    #[test]
    fn invalid_span_is_rejected() {
        let problem = OdeProblem::new(vec![1.0], 1.0, 0.0, |_t, _y, dy: &mut [f64]| dy[0] = 1.0);
        assert!(matches!(
            integrate(&problem, &SolverConfig::default()),
            Err(OdeError::InvalidSpan { .. })
        ));
    }

    #[test]
    fn zero_span_is_trivial() {
        let problem = OdeProblem::new(vec![3.0], 2.0, 2.0, |_t, _y, dy: &mut [f64]| dy[0] = 1.0);
        let sol = integrate(&problem, &SolverConfig::default()).unwrap();
        assert_eq!(sol.endpoint_state(), &[3.0]);
        assert_eq!(sol.interpolate(2.0).unwrap(), vec![3.0]);
    }

    #[test]
    fn halt_stops_after_accepted_step() {
        let problem = OdeProblem::new(vec![0.0], 0.0, 10.0, |_t, _y, dy: &mut [f64]| dy[0] = 1.0);
        let (sol, outcome) = integrate_until(&problem, &SolverConfig::default(), |_t, y| y[0] >= 0.5).unwrap();
        assert!(matches!(outcome, IntegrationOutcome::Halted));
        assert!(sol.endpoint_state()[0] >= 0.5);
        assert!(sol.t_reached() < 10.0);
    }

    #[test]
    fn repeat_runs_are_bit_identical() {
        let run = || {
            let problem = OdeProblem::new(vec![1.0, 0.5], 0.0, 3.0, |_t, y, dy: &mut [f64]| {
                dy[0] = -0.7 * y[0] + y[1];
                dy[1] = -y[1];
            });
            integrate(&problem, &SolverConfig::default()).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.endpoint_state()[0].to_bits(), b.endpoint_state()[0].to_bits());
        assert_eq!(a.endpoint_state()[1].to_bits(), b.endpoint_state()[1].to_bits());
        assert_eq!(a.steps_accepted(), b.steps_accepted());
    }
}
