//! Monte Carlo harness for halting-time experiments.
//!
//! One sample: build the deterministic part `A` for the plan's family,
//! draw `H` and form the spectrum of `A + sigma^2 H`, draw a unit right-hand
//! side, run extended-precision CG on the diagonalized system and record the
//! halting times. Samples use independent substreams keyed by
//! `(master_seed, N, sample_id)`, so output does not depend on the number of
//! workers.

mod io;
mod plan;
mod stats;
mod tails;

pub use io::{
    read_curves, read_failures, read_fit, read_records, write_curves, write_failures, write_fit, write_records,
    CURVES_HEADER, FAILURES_HEADER, RECORDS_HEADER,
};
pub use plan::{ExperimentPlan, Family};
pub use stats::{fit_growth, loglog_slope, sample_mean_curve, CurvePoint, Field, FitResult};
pub use tails::{sample_lue_extremes, tail_check, TailCheck, TailPoint, TailQuantity};

use crate::cg::{cg_run_diagonal, halting_times, CgConfig, CgTrace};
use crate::ensembles::{
    cluster_matrix, perturbed_system_with, sample_unit_b_with, BaseOperator, ClusterSpec, EnsembleSpec, SeededRng,
};
use crate::linalg::{laplacian_spectrum, Spectrum};
use crate::{Error, Result};
use rayon::prelude::*;

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    /// Actual dimension of the system solved.
    pub n: usize,
    pub gamma: f64,
    pub c: f64,
    pub sigma: f64,
    pub eps: f64,
    pub sample_id: u64,
    pub stream_id: u64,
    pub tau_l2: usize,
    pub tau_w: usize,
    pub kappa: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// A completed sample with its residual history.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub record: SampleRecord,
    pub trace: CgTrace,
}

/// A sample that could not be completed.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFailure {
    /// Grid value (not the actual dimension).
    pub n: usize,
    pub sample_id: u64,
    pub stream_id: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutput {
    pub records: Vec<SampleRecord>,
    pub failures: Vec<SampleFailure>,
}

/// Deterministic part of the system at grid value `n`.
pub fn base_operator(plan: &ExperimentPlan, n: usize) -> Result<BaseOperator> {
    let side = (n as f64).sqrt().floor() as usize;
    // guard against sqrt rounding just below an exact square
    let side = if (side + 1) * (side + 1) <= n { side + 1 } else { side };
    let mut values = match plan.family {
        Family::NoiseOnly => return Ok(BaseOperator::Zero),
        Family::Laplacian => laplacian_spectrum(side, side)?,
        Family::MpClusters => {
            let spec = ClusterSpec {
                convention: plan.cluster_convention,
                ..ClusterSpec::new(side, side)
            };
            cluster_matrix(&spec)?.eigenvalues().to_vec()
        }
    };
    if plan.normalize {
        let top = values.iter().cloned().fold(0.0f64, f64::max);
        if top > 0.0 {
            values.iter_mut().for_each(|v| *v /= top);
        }
    }
    Ok(BaseOperator::Diagonal(values))
}

fn base_dim(base: &BaseOperator, n: usize) -> usize {
    match base {
        BaseOperator::Zero => n,
        BaseOperator::Diagonal(d) => d.len(),
        BaseOperator::Dense(m) => m.dim(),
    }
}

/// Runs sample `sample_id` at grid value `n`.
pub fn run_sample(plan: &ExperimentPlan, n: usize, sample_id: u64) -> Result<SampleOutcome> {
    let base = base_operator(plan, n)?;
    run_sample_on(plan, &base, n, sample_id)
}

fn run_sample_on(plan: &ExperimentPlan, base: &BaseOperator, n: usize, sample_id: u64) -> Result<SampleOutcome> {
    let dim = base_dim(base, n);
    let stream = SeededRng::for_sample(plan.master_seed, n, sample_id);
    let mut rng = stream.generator();
    let spectrum = match (plan.family, base) {
        (Family::NoiseOnly, _) => {
            let spec = EnsembleSpec::new(dim, plan.gamma, plan.c, f64::INFINITY)?;
            perturbed_system_with(base, &spec, &mut rng)?
        }
        (_, BaseOperator::Diagonal(d)) if plan.sigma == 0.0 => Spectrum::from_eigenvalues(d.clone())?,
        _ => {
            let spec = EnsembleSpec::new(dim, plan.gamma, plan.c, plan.sigma)?;
            perturbed_system_with(base, &spec, &mut rng)?
        }
    };
    let b = sample_unit_b_with(dim, plan.b_law, &mut rng)?;
    let cfg = CgConfig {
        epsilon: plan.eps,
        max_iters: None,
        precision: plan.precision,
    };
    let trace = cg_run_diagonal(spectrum.eigenvalues(), &b, &cfg)?;
    let tau = halting_times(&trace, plan.eps)?;
    let record = SampleRecord {
        n: dim,
        gamma: plan.gamma,
        c: plan.c,
        sigma: plan.sigma,
        eps: plan.eps,
        sample_id,
        stream_id: stream.stream_id,
        tau_l2: tau.tau_l2,
        tau_w: tau.tau_w,
        kappa: spectrum.condition_number(),
        lambda_min: spectrum.lambda_min(),
        lambda_max: spectrum.lambda_max(),
    };
    Ok(SampleOutcome { record, trace })
}

/// All samples of the plan in `(N, sample_id)` order, each either completed
/// or failed. `workers = None` uses the global rayon pool.
pub fn run_plan_detailed(
    plan: &ExperimentPlan,
    workers: Option<usize>,
) -> Result<Vec<std::result::Result<SampleOutcome, SampleFailure>>> {
    plan.validate()?;
    let bases = plan
        .n_grid
        .iter()
        .map(|&n| base_operator(plan, n))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize, u64)> = plan
        .n_grid
        .iter()
        .enumerate()
        .flat_map(|(g, &n)| (0..plan.samples_per_n as u64).map(move |s| (g, n, s)))
        .collect();
    let work = || {
        jobs.par_iter()
            .map(|&(g, n, s)| {
                run_sample_on(plan, &bases[g], n, s).map_err(|e| SampleFailure {
                    n,
                    sample_id: s,
                    stream_id: SeededRng::for_sample(plan.master_seed, n, s).stream_id,
                    error: e.to_string(),
                })
            })
            .collect()
    };
    match workers {
        None => Ok(work()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::InvalidSpec(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

/// [`run_plan_detailed`] without the residual histories.
pub fn run_plan(plan: &ExperimentPlan, workers: Option<usize>) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    for r in run_plan_detailed(plan, workers)? {
        match r {
            Ok(o) => out.records.push(o.record),
            Err(f) => out.failures.push(f),
        }
    }
    Ok(out)
}
