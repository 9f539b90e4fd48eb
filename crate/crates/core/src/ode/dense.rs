//! Piecewise quartic dense output of the Dormand-Prince 5(4) pair.

use super::OdeError;

/// One accepted step. `cont` holds the interpolation coefficients in the
/// nested form of the classic fourth-order continuous extension:
/// `y(t_left + theta h) = c0 + theta (c1 + (1-theta) (c2 + theta (c3 + (1-theta) c4)))`.
#[derive(Debug, Clone)]
pub(super) struct Segment {
    pub t_left: f64,
    pub h: f64,
    pub cont: [Vec<f64>; 5],
}

impl Segment {
    fn eval_into(&self, theta: f64, out: &mut [f64]) {
        let [c0, c1, c2, c3, c4] = &self.cont;
        for i in 0..out.len() {
            out[i] = c0[i] + theta * (c1[i] + (1.0 - theta) * (c2[i] + theta * (c3[i] + (1.0 - theta) * c4[i])));
        }
    }
}

/// Continuous solution over the integrated span: the accepted steps with
/// their interpolants, plus the endpoint state and step statistics.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    pub(super) t_start: f64,
    pub(super) t_reached: f64,
    pub(super) segments: Vec<Segment>,
    pub(super) endpoint: Vec<f64>,
    pub(super) steps_accepted: u64,
    pub(super) steps_rejected: u64,
}

impl DenseSolution {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    /// Right end of the integrated span. Equals the requested `t_end` unless
    /// integration was halted early.
    pub fn t_reached(&self) -> f64 {
        self.t_reached
    }

    pub fn endpoint_state(&self) -> &[f64] {
        &self.endpoint
    }

    pub fn steps_accepted(&self) -> u64 {
        self.steps_accepted
    }

    pub fn steps_rejected(&self) -> u64 {
        self.steps_rejected
    }

    fn slack(&self) -> f64 {
        8.0 * f64::EPSILON * self.t_start.abs().max(self.t_reached.abs()).max(1.0)
    }

    /// Evaluates the solution at `t`, which must lie inside the integrated
    /// span (up to rounding slack at the ends).
    pub fn interpolate(&self, t: f64) -> Result<Vec<f64>, OdeError> {
        let mut out = vec![0.0; self.endpoint.len()];
        self.interpolate_into(t, &mut out)?;
        Ok(out)
    }

    pub fn interpolate_into(&self, t: f64, out: &mut [f64]) -> Result<(), OdeError> {
        if !t.is_finite() || t < self.t_start - self.slack() || t > self.t_reached + self.slack() {
            return Err(OdeError::OutOfSpan {
                t,
                t_start: self.t_start,
                t_end: self.t_reached,
            });
        }
        let t = t.clamp(self.t_start, self.t_reached);
        if self.segments.is_empty() {
            out.copy_from_slice(&self.endpoint);
            return Ok(());
        }
        // Rightmost segment whose left edge is at or before t.
        let idx = match self.segments.partition_point(|s| s.t_left <= t) {
            0 => 0,
            n => n - 1,
        };
        let seg = &self.segments[idx];
        let theta = if seg.h == 0.0 { 0.0 } else { ((t - seg.t_left) / seg.h).clamp(0.0, 1.0) };
        seg.eval_into(theta, out);
        Ok(())
    }

    /// Accepted-step grid: the left edge of every step plus the endpoint,
    /// with the state at each point.
    pub fn grid(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.segments
            .iter()
            .map(|s| (s.t_left, s.cont[0].as_slice()))
            .chain(std::iter::once((self.t_reached, self.endpoint.as_slice())))
    }

    /// Times of the accepted-step boundaries, including both span ends.
    pub fn step_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self.segments.iter().map(|s| s.t_left).collect();
        ts.push(self.t_reached);
        ts
    }
}
