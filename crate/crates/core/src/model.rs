//! PDMP model definition, trajectory records, and model validation.
//!
//! A model couples a continuous state `x` in `R^d` with an explicit integer
//! discrete state, a vector field `F(x, d, t)`, a total jump rate
//! `R_tot(x, d, t)`, and a jump kernel. The kernel draws its randomness from
//! an injected [`UniformSource`] so that the model itself owns no generator
//! and a realization is fully determined by its stream.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Source of uniform variates on (0, 1) injected into jump kernels and
/// accept/reject decisions.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

type VectorFieldFn = dyn Fn(&[f64], &[i64], f64, &mut [f64]) + Send + Sync;
type RateFn = dyn Fn(&[f64], &[i64], f64) -> f64 + Send + Sync;
type KernelFn = dyn Fn(&[f64], &[i64], f64, &mut dyn UniformSource) -> (Vec<f64>, Vec<i64>) + Send + Sync;

/// Hybrid state of a PDMP: continuous coordinates plus integer modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub continuous: Vec<f64>,
    pub discrete: Vec<i64>,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("NegativeRate: R_tot = {rate} at t = {t}")]
    NegativeRate { rate: f64, t: f64 },
    #[error("NonFiniteRate: R_tot is not finite at t = {t}")]
    NonFiniteRate { t: f64 },
    #[error("KernelDimension: jump kernel returned {actual} {which} components, expected {expected}")]
    KernelDimension { which: &'static str, expected: usize, actual: usize },
}

/// Definition of a piecewise deterministic Markov process.
pub struct PdmpModel {
    pub id: String,
    pub dim_continuous: usize,
    pub dim_discrete: usize,
    vector_field: Box<VectorFieldFn>,
    total_rate: Box<RateFn>,
    jump_kernel: Box<KernelFn>,
    pub initial_continuous: Vec<f64>,
    pub initial_discrete: Vec<i64>,
    pub initial_time: f64,
}

impl PdmpModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        dim_continuous: usize,
        dim_discrete: usize,
        vector_field: impl Fn(&[f64], &[i64], f64, &mut [f64]) + Send + Sync + 'static,
        total_rate: impl Fn(&[f64], &[i64], f64) -> f64 + Send + Sync + 'static,
        jump_kernel: impl Fn(&[f64], &[i64], f64, &mut dyn UniformSource) -> (Vec<f64>, Vec<i64>) + Send + Sync + 'static,
        initial_continuous: Vec<f64>,
        initial_discrete: Vec<i64>,
        initial_time: f64,
    ) -> Self {
        PdmpModel {
            id: id.into(),
            dim_continuous,
            dim_discrete,
            vector_field: Box::new(vector_field),
            total_rate: Box::new(total_rate),
            jump_kernel: Box::new(jump_kernel),
            initial_continuous,
            initial_discrete,
            initial_time,
        }
    }

    pub fn initial_state(&self) -> State {
        State {
            continuous: self.initial_continuous.clone(),
            discrete: self.initial_discrete.clone(),
        }
    }

    /// Evaluates `F(x, d, t)` into `out`.
    pub fn vector_field(&self, x: &[f64], d: &[i64], t: f64, out: &mut [f64]) {
        (self.vector_field)(x, d, t, out);
    }

    /// Evaluates `R_tot(x, d, t)` with no range checking. Engine inner loops
    /// use this and handle out-of-range values as step rejections.
    pub fn total_rate_raw(&self, x: &[f64], d: &[i64], t: f64) -> f64 {
        (self.total_rate)(x, d, t)
    }

    /// Evaluates `R_tot(x, d, t)` and rejects negative or non-finite values.
    /// A negative rate is an immediate error, never clamped to zero.
    pub fn total_rate(&self, x: &[f64], d: &[i64], t: f64) -> Result<f64, ModelError> {
        let r = (self.total_rate)(x, d, t);
        if !r.is_finite() {
            return Err(ModelError::NonFiniteRate { t });
        }
        if r < 0.0 {
            return Err(ModelError::NegativeRate { rate: r, t });
        }
        Ok(r)
    }

    /// Applies the jump kernel at `(x, d, t)`, checking output dimensions.
    pub fn apply_jump(
        &self,
        x: &[f64],
        d: &[i64],
        t: f64,
        uniforms: &mut dyn UniformSource,
    ) -> Result<State, ModelError> {
        let (xc, xd) = (self.jump_kernel)(x, d, t, uniforms);
        if xc.len() != self.dim_continuous {
            return Err(ModelError::KernelDimension {
                which: "continuous",
                expected: self.dim_continuous,
                actual: xc.len(),
            });
        }
        if xd.len() != self.dim_discrete {
            return Err(ModelError::KernelDimension {
                which: "discrete",
                expected: self.dim_discrete,
                actual: xd.len(),
            });
        }
        Ok(State { continuous: xc, discrete: xd })
    }
}

/// Simulation method that produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Chv,
    Fjm,
    TjmEvent,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Chv => "chv",
            Method::Fjm => "fjm",
            Method::TjmEvent => "tjm_event",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chv" => Ok(Method::Chv),
            "fjm" => Ok(Method::Fjm),
            "tjm-event" | "tjm_event" => Ok(Method::TjmEvent),
            other => Err(format!("unknown method '{other}' (expected chv, fjm, or tjm-event)")),
        }
    }
}

/// What a trajectory record represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    /// The jump kernel fired.
    TrueJump,
    /// Flow sample from the rate-augmentation Poisson clock; state unchanged.
    PhantomSample,
    /// Rejected thinning candidate; state unchanged.
    Fictitious,
    /// Simulation reached the time horizon before the next jump.
    HorizonEnd,
}

impl RecordKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::TrueJump => "true_jump",
            RecordKind::PhantomSample => "phantom_sample",
            RecordKind::Fictitious => "fictitious",
            RecordKind::HorizonEnd => "horizon_end",
        }
    }
}

/// One event on a simulated trajectory. `state_before` is the state after
/// flowing to `time` and before any kernel application; for non-jump records
/// the two states coincide. `s_draw` keeps the exponential variate that
/// produced the event so runs can be replayed and audited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub index: u64,
    pub kind: RecordKind,
    pub time: f64,
    pub s_draw: Option<f64>,
    pub state_before: State,
    pub state_after: State,
}

mod serde_horizon {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Ordered event list produced by one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub model_id: String,
    pub method: Method,
    pub seed: u64,
    /// Time horizon of the run; unbounded runs store infinity (serialized as
    /// null in JSON).
    #[serde(with = "serde_horizon")]
    pub t_end: f64,
    pub records: Vec<JumpRecord>,
    /// Diagnostics counter; currently counts hazard decreases seen by the
    /// event-detection baseline beyond integrator tolerance.
    pub warning_count: u64,
}

impl Trajectory {
    pub fn true_jumps(&self) -> impl Iterator<Item = &JumpRecord> {
        self.records.iter().filter(|r| r.kind == RecordKind::TrueJump)
    }

    pub fn n_true_jumps(&self) -> u64 {
        self.true_jumps().count() as u64
    }

    /// Times of true jumps, in order.
    pub fn jump_times(&self) -> Vec<f64> {
        self.true_jumps().map(|r| r.time).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    DimensionMismatch { what: &'static str, expected: usize, actual: usize },
    NegativeRate { value: f64 },
    NonFiniteRate,
    NonFiniteDerivative { component: usize },
    NonFiniteKernelOutput { component: usize },
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidationIssue::DimensionMismatch { what, expected, actual } => {
                write!(f, "DimensionMismatch: {what} has {actual} components, expected {expected}")
            }
            ValidationIssue::NegativeRate { value } => write!(f, "NegativeRate: R_tot = {value} at initial state"),
            ValidationIssue::NonFiniteRate => write!(f, "NonFiniteRate at initial state"),
            ValidationIssue::NonFiniteDerivative { component } => {
                write!(f, "NonFiniteDerivative: F component {component} at initial state")
            }
            ValidationIssue::NonFiniteKernelOutput { component } => {
                write!(f, "NonFiniteKernelOutput: kernel continuous component {component}")
            }
        }
    }
}

/// Collected findings from [`validate_model`]. Carries all failures instead
/// of stopping at the first one.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Evaluates `F`, `R_tot`, and the kernel at the initial state and reports
/// dimension mismatches, negative rates, and non-finite outputs.
pub fn validate_model(model: &PdmpModel) -> ValidationReport {
    let mut issues = Vec::new();
    if model.initial_continuous.len() != model.dim_continuous {
        issues.push(ValidationIssue::DimensionMismatch {
            what: "initial continuous state",
            expected: model.dim_continuous,
            actual: model.initial_continuous.len(),
        });
    }
    if model.initial_discrete.len() != model.dim_discrete {
        issues.push(ValidationIssue::DimensionMismatch {
            what: "initial discrete state",
            expected: model.dim_discrete,
            actual: model.initial_discrete.len(),
        });
    }
    if !issues.is_empty() {
        return ValidationReport { issues };
    }

    let x = &model.initial_continuous;
    let d = &model.initial_discrete;
    let t = model.initial_time;

    let mut f = vec![f64::NAN; model.dim_continuous];
    model.vector_field(x, d, t, &mut f);
    for (i, v) in f.iter().enumerate() {
        if !v.is_finite() {
            issues.push(ValidationIssue::NonFiniteDerivative { component: i });
        }
    }

    let r = model.total_rate_raw(x, d, t);
    if !r.is_finite() {
        issues.push(ValidationIssue::NonFiniteRate);
    } else if r < 0.0 {
        issues.push(ValidationIssue::NegativeRate { value: r });
    }

    let mut probe = crate::rng::ExpStream::new(0);
    let (xc, xd) = (model.jump_kernel)(x, d, t, &mut probe);
    if xc.len() != model.dim_continuous {
        issues.push(ValidationIssue::DimensionMismatch {
            what: "kernel continuous output",
            expected: model.dim_continuous,
            actual: xc.len(),
        });
    } else {
        for (i, v) in xc.iter().enumerate() {
            if !v.is_finite() {
                issues.push(ValidationIssue::NonFiniteKernelOutput { component: i });
            }
        }
    }
    if xd.len() != model.dim_discrete {
        issues.push(ValidationIssue::DimensionMismatch {
            what: "kernel discrete output",
            expected: model.dim_discrete,
            actual: xd.len(),
        });
    }

    ValidationReport { issues }
}
