//! Built-in benchmark models, closed-form oracles, and per-jump error
//! tables.
//!
//! Three switching models exercise the engines in different regimes:
//!
//! - `example1`: `dx/dt = a x` with `a = +100` on even modes and `-100` on
//!   odd ones, rate `R_tot = x`. Stiff, and on odd modes the remaining
//!   hazard mass is finite, so the process can terminate (the next jump
//!   time is infinite).
//! - `example2`: `dx/dt = 10 x` on even modes, `-3 x^2` on odd ones, rate
//!   `R_tot = x`. Never terminates, but `x` comes arbitrarily close to 0 on
//!   odd modes, which breaks hazard-level event detection.
//! - `example3`: `dx/dt = 3 x` on even modes, `-4 x` on odd ones, rate
//!   `sigmoid(x - 5) + 0.1`, globally bounded in `(0.1, 1.1)`; the natural
//!   thinning benchmark.
//!
//! All three jump by incrementing the mode counter and leaving `x` intact.
//! Examples 1 and 2 admit closed-form jump times, implemented here as
//! oracles driven by the same exponential stream as the engines.

use thiserror::Error;

use crate::fjm::RateBound;
use crate::fmt::float17;
use crate::model::{Method, PdmpModel, Trajectory, UniformSource};
use crate::ode::SolverConfig;
use crate::rng::ExpStream;

/// Supremum of the `example3` rate: sigmoid limit 1 plus the 0.1 offset.
pub const EXAMPLE3_RATE_SUP: f64 = 1.1;

const EXAMPLE1_X0: f64 = 1.0;
const EXAMPLE2_X0: f64 = 1.0;
const EXAMPLE3_X0: f64 = 0.05;

fn mode_increment_kernel(x: &[f64], d: &[i64], _t: f64, _u: &mut dyn UniformSource) -> (Vec<f64>, Vec<i64>) {
    (x.to_vec(), vec![d[0] + 1])
}

/// Exponential growth/decay switching model with rate `R_tot = x`.
pub fn example1() -> PdmpModel {
    PdmpModel::new(
        "example1",
        1,
        1,
        |x, d, _t, out| {
            let a = if d[0] % 2 == 0 { 100.0 } else { -100.0 };
            out[0] = a * x[0];
        },
        |x, _d, _t| x[0],
        mode_increment_kernel,
        vec![EXAMPLE1_X0],
        vec![0],
        0.0,
    )
}

/// Exponential growth / quadratic decay switching model with rate
/// `R_tot = x`.
pub fn example2() -> PdmpModel {
    PdmpModel::new(
        "example2",
        1,
        1,
        |x, d, _t, out| {
            out[0] = if d[0] % 2 == 0 { 10.0 * x[0] } else { -3.0 * x[0] * x[0] };
        },
        |x, _d, _t| x[0],
        mode_increment_kernel,
        vec![EXAMPLE2_X0],
        vec![0],
        0.0,
    )
}

/// Rate of [`example3`]: a sigmoid in `x` centered at 5, offset by 0.1.
/// Ranges over `(0.1, 1.1)` and equals 0.6 at `x = 5`.
pub fn example3_rate(x: &[f64], _d: &[i64], _t: f64) -> f64 {
    1.0 / (1.0 + (-x[0] + 5.0).exp()) + 0.1
}

/// Bounded-rate switching model: linear growth/decay with the sigmoid rate.
pub fn example3() -> PdmpModel {
    PdmpModel::new(
        "example3",
        1,
        1,
        |x, d, _t, out| {
            out[0] = if d[0] % 2 == 0 { 3.0 * x[0] } else { -4.0 * x[0] };
        },
        example3_rate,
        mode_increment_kernel,
        vec![EXAMPLE3_X0],
        vec![0],
        0.0,
    )
}

/// Homogeneous Poisson counter: zero flow, constant rate, each jump
/// increments the mode.
pub fn poisson(rate: f64) -> PdmpModel {
    PdmpModel::new(
        "poisson",
        1,
        1,
        |_x, _d, _t, out| out.fill(0.0),
        move |_x, _d, _t| rate,
        mode_increment_kernel,
        vec![0.0],
        vec![0],
        0.0,
    )
}

/// Looks up a model by registry name: `example1`, `example2`, `example3`,
/// or `poisson` (unit rate).
pub fn builtin_model(name: &str) -> Option<PdmpModel> {
    match name {
        "example1" => Some(example1()),
        "example2" => Some(example2()),
        "example3" => Some(example3()),
        "poisson" => Some(poisson(1.0)),
        _ => None,
    }
}

/// Default thinning bound for a registry model, where a globally valid one
/// exists. Examples 1 and 2 have rates that grow without bound along their
/// expanding branches, so they get none.
pub fn default_bound(name: &str) -> Option<RateBound> {
    match name {
        "example3" => Some(RateBound::Constant(EXAMPLE3_RATE_SUP)),
        "poisson" => Some(RateBound::Constant(1.0)),
        _ => None,
    }
}

/// One closed-form jump. The kernels leave the continuous state unchanged,
/// so `x` is the state both just before and just after the jump.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleJump {
    pub index: u64,
    pub time: f64,
    pub s_draw: f64,
    pub x: f64,
}

/// Closed-form trajectory for a registry example, reproducible from the
/// stream seed.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTrajectory {
    pub model_id: String,
    pub seed: u64,
    pub jumps: Vec<OracleJump>,
    /// The remaining hazard mass could not cover the next draw: the next
    /// jump time is infinite and the trajectory has no further jumps.
    pub terminated: bool,
}

/// One closed-form step of `example1` from state `x` on a branch of the
/// given parity: returns `(dt, x_new)`, or `None` when the draw exceeds the
/// branch's remaining hazard mass (decaying branch only) and the jump never
/// happens.
///
/// On the branch `dx/dt = a x` with rate `x`, the hazard from `x` is
/// `(x/a)(e^{a t} - 1)`, so `dt = (1/a) ln(1 + a s / x)` and the pre-jump
/// state is `x + a s`.
pub fn example1_jump(x: f64, even: bool, s: f64) -> Option<(f64, f64)> {
    let a = if even { 100.0 } else { -100.0 };
    let arg = 1.0 + a * s / x;
    if arg <= 0.0 {
        return None;
    }
    Some((arg.ln() / a, x + a * s))
}

/// One closed-form step of `example2`: returns `(dt, x_new)`.
///
/// Even branch (`dx/dt = 10x`, rate `x`): `dt = ln(1 + 10 s / x) / 10` and
/// `x_new = x + 10 s`. Odd branch (`dx/dt = -3x^2`, rate `x`): the flow is
/// `x/(1 + 3 x t)` with hazard `ln(1 + 3 x t)/3`, so `dt = (e^{3s} - 1)/(3x)`
/// and `x_new = x e^{-3s}`. Both branches carry infinite hazard mass, so
/// the jump always happens.
pub fn example2_jump(x: f64, even: bool, s: f64) -> (f64, f64) {
    if even {
        ((1.0 + 10.0 * s / x).ln() / 10.0, x + 10.0 * s)
    } else {
        (((3.0 * s).exp() - 1.0) / (3.0 * x), x * (-3.0 * s).exp())
    }
}

/// Iterates the `example1` closed form over draws from `stream`, stopping
/// at `n_jumps` or at termination.
pub fn example1_oracle(stream: &mut ExpStream, n_jumps: u64) -> OracleTrajectory {
    let mut x = EXAMPLE1_X0;
    let mut t = 0.0;
    let mut jumps = Vec::new();
    let mut terminated = false;
    for n in 1..=n_jumps {
        let s = stream.draw();
        let even = (n - 1) % 2 == 0;
        match example1_jump(x, even, s) {
            Some((dt, x_new)) => {
                t += dt;
                x = x_new;
                jumps.push(OracleJump { index: n, time: t, s_draw: s, x });
            }
            None => {
                terminated = true;
                break;
            }
        }
    }
    OracleTrajectory { model_id: "example1".into(), seed: stream.seed(), jumps, terminated }
}

/// Iterates the `example2` closed form over draws from `stream`. Never
/// terminates early: every jump time is finite.
pub fn example2_oracle(stream: &mut ExpStream, n_jumps: u64) -> OracleTrajectory {
    let mut x = EXAMPLE2_X0;
    let mut t = 0.0;
    let mut jumps = Vec::new();
    for n in 1..=n_jumps {
        let s = stream.draw();
        let even = (n - 1) % 2 == 0;
        let (dt, x_new) = example2_jump(x, even, s);
        t += dt;
        x = x_new;
        jumps.push(OracleJump { index: n, time: t, s_draw: s, x });
    }
    OracleTrajectory { model_id: "example2".into(), seed: stream.seed(), jumps, terminated: false }
}

/// Per-jump comparison of a numeric trajectory against an oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub jump_index: u64,
    pub t_oracle: f64,
    pub t_numeric: f64,
    pub err_t: f64,
    pub err_x: f64,
    pub method: Method,
    pub atol: f64,
    pub rtol: f64,
}

/// Error table over the common jump range of a numeric run and an oracle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    pub fn max_err_t(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.err_t))
    }

    pub fn max_err_x(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.err_x))
    }

    /// CSV rendering with a fixed header; floats carry 17 significant
    /// digits so parsing them back is bit-exact.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("jump_index,t_oracle,t_numeric,err_t,err_x,method,atol,rtol\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.jump_index,
                float17(r.t_oracle),
                float17(r.t_numeric),
                float17(r.err_t),
                float17(r.err_x),
                r.method.as_str(),
                float17(r.atol),
                float17(r.rtol),
            ));
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("StreamMismatch: numeric run used seed {numeric} but the oracle used seed {oracle}")]
    StreamMismatch { numeric: u64, oracle: u64 },
    #[error("ModelMismatch: numeric run simulated '{numeric}' but the oracle describes '{oracle}'")]
    ModelMismatch { numeric: String, oracle: String },
}

/// Builds the per-jump error table between a numeric trajectory and an
/// oracle driven by the same stream. Rows cover the common jump range
/// (shorter of the two); errors are absolute differences of jump times and
/// of the pre-jump continuous state.
pub fn compare_to_oracle(
    numeric: &Trajectory,
    oracle: &OracleTrajectory,
    config: &SolverConfig,
) -> Result<ErrorTable, CompareError> {
    if numeric.seed != oracle.seed {
        return Err(CompareError::StreamMismatch { numeric: numeric.seed, oracle: oracle.seed });
    }
    if numeric.model_id != oracle.model_id {
        return Err(CompareError::ModelMismatch {
            numeric: numeric.model_id.clone(),
            oracle: oracle.model_id.clone(),
        });
    }
    let rows = numeric
        .true_jumps()
        .zip(&oracle.jumps)
        .map(|(num, ora)| {
            let x_numeric = num.state_before.continuous[0];
            ErrorRow {
                jump_index: ora.index,
                t_oracle: ora.time,
                t_numeric: num.time,
                err_t: (num.time - ora.time).abs(),
                err_x: (x_numeric - ora.x).abs(),
                method: numeric.method,
                atol: config.atol,
                rtol: config.rtol,
            }
        })
        .collect();
    Ok(ErrorTable { rows })
}
