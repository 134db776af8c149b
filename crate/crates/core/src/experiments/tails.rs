use crate::bounds::{lemma2_kappa_tail, lue_tail_bounds, BoundParams};
use crate::ensembles::{perturbed_system_with, BaseOperator, EnsembleSpec, SeededRng};
use crate::Result;
use rayon::prelude::*;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailQuantity {
    LambdaMax,
    InvLambdaMin,
    Kappa,
}

impl fmt::Display for TailQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailQuantity::LambdaMax => "lambda_max",
            TailQuantity::InvLambdaMin => "inv_lambda_min",
            TailQuantity::Kappa => "kappa",
        })
    }
}

/// Empirical survival `P(X > t)` against a tail estimate with unit prefactor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub quantity: TailQuantity,
    pub t: f64,
    pub empirical: f64,
    /// Binomial standard error of `empirical`.
    pub stderr: f64,
    /// Estimate with prefactor `C = 1`; 1 outside the validity range.
    pub unit_bound: f64,
    pub valid: bool,
}

impl TailPoint {
    /// Holds when `empirical <= min(1, C unit_bound) + k stderr`.
    pub fn holds(&self, c: f64, k: f64) -> bool {
        let bound = if self.valid { (c * self.unit_bound).min(1.0) } else { 1.0 };
        self.empirical <= bound + k * self.stderr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailCheck {
    pub n: usize,
    pub alpha: usize,
    pub d: f64,
    pub samples: usize,
    pub points: Vec<TailPoint>,
}

impl TailCheck {
    /// Smallest prefactor with `empirical <= C unit_bound` at every valid point
    /// of `q` where the estimate is positive; at least 1.
    pub fn calibrated_c(&self, q: TailQuantity) -> f64 {
        self.points
            .iter()
            .filter(|p| p.quantity == q && p.valid && p.unit_bound > 0.0)
            .map(|p| p.empirical / p.unit_bound)
            .fold(1.0, f64::max)
    }

    pub fn holds(&self, q: TailQuantity, c: f64, k: f64) -> bool {
        self.points.iter().filter(|p| p.quantity == q).all(|p| p.holds(c, k))
    }
}

/// Spectral extremes `(lambda_min, lambda_max)` of `samples` independent
/// draws of `H` at `(n, gamma, c)`.
pub fn sample_lue_extremes(n: usize, gamma: f64, c: f64, samples: usize, master_seed: u64) -> Result<Vec<(f64, f64)>> {
    let spec = EnsembleSpec::new(n, gamma, c, f64::INFINITY)?;
    (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = SeededRng::for_sample(master_seed, n, s).generator();
            let sp = perturbed_system_with(&BaseOperator::Zero, &spec, &mut rng)?;
            Ok((sp.lambda_min(), sp.lambda_max()))
        })
        .collect()
}

fn survival(xs: &[f64], t: f64) -> (f64, f64) {
    let k = xs.len() as f64;
    let p = xs.iter().filter(|&&x| x > t).count() as f64 / k;
    (p, (p * (1.0 - p) / k).sqrt())
}

/// Compares the empirical tails of `lambda_max(H)`, `1/lambda_min(H)` and
/// `kappa(H)` with the LUE estimates at exponent `d`.
///
/// Evaluation points: `lambda_max` at `t in {1, 1.01, 1.02, 1.05, 1.1, 1.2}`;
/// `1/lambda_min` at multiples `{1, 2, 4}` of its validity threshold;
/// `kappa` at multiples `{1, 2, 4}` of `a (1 + delta_N) f(N)`.
pub fn tail_check(n: usize, gamma: f64, c: f64, d: f64, samples: usize, master_seed: u64) -> Result<TailCheck> {
    let spec = EnsembleSpec::new(n, gamma, c, f64::INFINITY)?;
    let params = BoundParams::for_lue(&spec, d)?;
    let draws = sample_lue_extremes(n, gamma, c, samples, master_seed)?;
    let lmax: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let inv_lmin: Vec<f64> = draws.iter().map(|d| 1.0 / d.0).collect();
    let kappa: Vec<f64> = draws.iter().map(|d| d.1 / d.0).collect();
    let mut points = Vec::new();
    for t in [1.0, 1.01, 1.02, 1.05, 1.1, 1.2] {
        let (empirical, stderr) = survival(&lmax, t);
        let b = lue_tail_bounds(&spec, d, t)?;
        points.push(TailPoint {
            quantity: TailQuantity::LambdaMax,
            t,
            empirical,
            stderr,
            unit_bound: b.max,
            valid: b.max_valid,
        });
    }
    let threshold = params.hard_edge_threshold();
    let kappa_threshold = params.a * (1.0 + params.delta_n()) * params.f_n()?;
    for m in [1.0, 2.0, 4.0] {
        let t = m * threshold;
        let (empirical, stderr) = survival(&inv_lmin, t);
        let b = lue_tail_bounds(&spec, d, t)?;
        points.push(TailPoint {
            quantity: TailQuantity::InvLambdaMin,
            t,
            empirical,
            stderr,
            unit_bound: if t.is_finite() { b.min } else { 1.0 },
            valid: b.min_valid && t.is_finite(),
        });
        let t = m * kappa_threshold;
        let (empirical, stderr) = survival(&kappa, t);
        points.push(TailPoint {
            quantity: TailQuantity::Kappa,
            t,
            empirical,
            stderr,
            unit_bound: lemma2_kappa_tail(&params, t)?,
            valid: t.is_finite() && t >= kappa_threshold,
        });
    }
    Ok(TailCheck {
        n,
        alpha: spec.alpha(),
        d,
        samples,
        points,
    })
}
