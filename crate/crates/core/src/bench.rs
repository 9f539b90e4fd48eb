//! Monte Carlo timing harness: wall-clock distributions of the engines over
//! many independent realizations of the same model.

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::chv::{chv_simulate, ChvOptions};
use crate::examples;
use crate::fjm::{count_fictitious, fjm_simulate, RateBound};
use crate::fmt::float17;
use crate::model::{Method, PdmpModel};
use crate::ode::SolverConfig;
use crate::rng::ExpStream;
use crate::tjm::tjm_event_simulate;

/// Candidate guard per thinning realization; generous next to the few
/// thousand candidates a realistic run needs.
const FJM_MAX_EVENTS: u64 = 10_000_000;

/// Timing of one realization of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub method: Method,
    pub realization: u64,
    pub seconds: f64,
    /// True jumps computed; equals the requested count unless the model
    /// terminated early.
    pub jumps: u64,
    /// Rejected candidates; present only for the thinning method.
    pub fictitious: Option<u64>,
    /// Base seed of the batch; the realization index selects the derived
    /// stream.
    pub seed: u64,
}

/// A realization that errored; the batch records it and carries on.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchFailure {
    pub method: Method,
    pub realization: u64,
    pub error: String,
}

/// Outcome of a batch: per-realization timings plus any failures.
#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub results: Vec<BenchResult>,
    pub failures: Vec<BenchFailure>,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("InvalidJumpCount: n_jumps must be at least 1")]
    InvalidJumpCount,
    #[error("InvalidRealizations: realizations must be at least 1")]
    InvalidRealizations,
    #[error("MissingBound: method {method} requires a rate bound")]
    MissingBound { method: Method },
    #[error("InvalidBins: {bins} (need at least 2)")]
    InvalidBins { bins: usize },
    #[error("EmptyResults: nothing to bin")]
    EmptyResults,
}

fn run_one(
    model: &PdmpModel,
    method: Method,
    n_jumps: u64,
    base_seed: u64,
    k: u64,
    config: &SolverConfig,
    bound: Option<&RateBound>,
) -> Result<BenchResult, BenchFailure> {
    let mut stream = ExpStream::for_realization(base_seed, k);
    let start = Instant::now();
    let outcome = match method {
        Method::Chv => chv_simulate(model, f64::INFINITY, n_jumps, &mut stream, config, &ChvOptions::default())
            .map_err(|e| e.to_string()),
        Method::Fjm => {
            let bound = bound.expect("bound presence is checked before the batch starts");
            fjm_simulate(model, bound, f64::INFINITY, n_jumps, FJM_MAX_EVENTS, &mut stream, config)
                .map_err(|e| e.to_string())
        }
        Method::TjmEvent => {
            tjm_event_simulate(model, f64::INFINITY, n_jumps, &mut stream, config).map_err(|e| e.to_string())
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok(traj) => Ok(BenchResult {
            method,
            realization: k,
            seconds,
            jumps: traj.n_true_jumps(),
            fictitious: (method == Method::Fjm).then(|| count_fictitious(&traj)),
            seed: base_seed,
        }),
        Err(error) => Err(BenchFailure { method, realization: k, error }),
    }
}

/// Times `realizations` independent runs of each requested method, each
/// computing `n_jumps` true jumps with the stream derived from
/// `(base_seed, realization)`. One warm-up realization per method runs
/// first and is discarded, so first-call overhead (allocator, code paging)
/// never lands in the distribution. Realizations of one method run in
/// parallel; timing wraps only the simulation call.
///
/// `bound` is consulted only by the thinning method; when it is needed and
/// absent, no work starts. If it is `None` and the model is a registry
/// model with a known global bound, that bound is used.
pub fn run_bench(
    model: &PdmpModel,
    methods: &[Method],
    n_jumps: u64,
    realizations: u64,
    base_seed: u64,
    config: &SolverConfig,
    bound: Option<&RateBound>,
) -> Result<BenchReport, BenchError> {
    if n_jumps == 0 {
        return Err(BenchError::InvalidJumpCount);
    }
    if realizations == 0 {
        return Err(BenchError::InvalidRealizations);
    }
    let registry_bound = if bound.is_none() { examples::default_bound(&model.id) } else { None };
    let bound = bound.or(registry_bound.as_ref());
    if methods.contains(&Method::Fjm) && bound.is_none() {
        return Err(BenchError::MissingBound { method: Method::Fjm });
    }

    let mut report = BenchReport::default();
    for &method in methods {
        let _ = run_one(model, method, n_jumps, base_seed, 0, config, bound);
        let (ok, err): (Vec<_>, Vec<_>) = (0..realizations)
            .into_par_iter()
            .map(|k| run_one(model, method, n_jumps, base_seed, k, config, bound))
            .partition_map(|r| match r {
                Ok(v) => rayon::iter::Either::Left(v),
                Err(v) => rayon::iter::Either::Right(v),
            });
        report.results.extend(ok);
        report.failures.extend(err);
    }
    Ok(report)
}

/// CSV rendering of batch results: one row per realization, empty
/// `fictitious` field for methods without rejection counts.
pub fn results_to_csv(results: &[BenchResult]) -> String {
    let mut out = String::from("method,realization,seconds,jumps,fictitious,seed\n");
    for r in results {
        let fict = r.fictitious.map(|f| f.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.method.as_str(),
            r.realization,
            float17(r.seconds),
            r.jumps,
            fict,
            r.seed,
        ));
    }
    out
}

/// Equal-width histogram of realization times, binned over the pooled range
/// of all methods so their distributions share an axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` edges spanning the pooled time range.
    pub edges: Vec<f64>,
    /// Per method (in order of first appearance), counts per bin.
    pub counts: Vec<(Method, Vec<u64>)>,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    /// CSV rendering: `method,bin_lo,bin_hi,count` rows, methods in order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,bin_lo,bin_hi,count\n");
        for (method, counts) in &self.counts {
            for (b, &count) in counts.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    method.as_str(),
                    float17(self.edges[b]),
                    float17(self.edges[b + 1]),
                    count,
                ));
            }
        }
        out
    }
}

/// Bins `results` into `bins` equal-width classes over the pooled time
/// range. All-identical times collapse into the first bin.
pub fn histogram(results: &[BenchResult], bins: usize) -> Result<Histogram, BenchError> {
    if bins < 2 {
        return Err(BenchError::InvalidBins { bins });
    }
    if results.is_empty() {
        return Err(BenchError::EmptyResults);
    }
    let lo = results.iter().map(|r| r.seconds).fold(f64::INFINITY, f64::min);
    let hi = results.iter().map(|r| r.seconds).fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;
    let edges: Vec<f64> = (0..=bins).map(|b| lo + width * b as f64 / bins as f64).collect();

    let mut counts: Vec<(Method, Vec<u64>)> = Vec::new();
    for r in results {
        let slot = match counts.iter_mut().find(|(m, _)| *m == r.method) {
            Some((_, c)) => c,
            None => {
                counts.push((r.method, vec![0; bins]));
                &mut counts.last_mut().unwrap().1
            }
        };
        let idx = if width == 0.0 {
            0
        } else {
            (((r.seconds - lo) / width) * bins as f64).floor().min(bins as f64 - 1.0) as usize
        };
        slot[idx] += 1;
    }
    Ok(Histogram { edges, counts })
}
