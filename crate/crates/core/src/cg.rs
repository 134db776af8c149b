//! Conjugate gradient with residual tracking in two norms.
//!
//! Starting from `x_0 = 0`, the iterate `x_k` minimizes `||A x - b||_{w^-1}` over
//! the Krylov space `span{b, Ab, ..., A^{k-1} b}`. Every run records
//! `||r_k||_{l2}` and `||r_k||_{w^-1}` for `k = 0, 1, ...` and stops once both
//! relative residuals have dropped to `epsilon`.
//!
//! Two drivers share one generic iteration:
//!
//! - [`cg_run`] works on a dense Hermitian matrix; the `w^-1` norm is evaluated
//!   through a Cholesky factor held in the working precision.
//! - [`cg_run_diagonal`] works on `diag(lambda)` directly, which costs `O(N)`
//!   per step and, in [`Precision::Extended`], keeps round-off far below any
//!   threshold of practical interest.

use crate::dd::{DoubleDouble, Real};
use crate::linalg::{Cholesky, ComplexVector, Cx, HermitianMatrix, Spectrum};
use crate::{Error, Result};

/// Curvature below which `<p, M p>` is treated as a breakdown.
pub const BREAKDOWN_CURVATURE: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    /// IEEE double throughout.
    Standard,
    /// Double-double vectors and scalars (about 31 significant digits).
    #[default]
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig {
    /// Relative residual threshold, `0 < epsilon < 1`.
    pub epsilon: f64,
    /// Iteration cap; `None` means `10 N`.
    pub max_iters: Option<usize>,
    pub precision: Precision,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig {
            epsilon: 1e-4,
            max_iters: None,
            precision: Precision::Extended,
        }
    }
}

impl CgConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        CgConfig {
            epsilon,
            ..Default::default()
        }
    }

    pub fn standard(mut self) -> Self {
        self.precision = Precision::Standard;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.max_iters == Some(0) {
            return Err(Error::Domain("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Residual history of one CG run.
#[derive(Debug, Clone, PartialEq)]
pub struct CgTrace {
    /// `||r_k||_{l2}` for `k = 0..=iterations_run`.
    pub residuals_l2: Vec<f64>,
    /// `||r_k||_{w^-1}` for `k = 0..=iterations_run`.
    pub residuals_w: Vec<f64>,
    pub iterations_run: usize,
    /// Both relative residuals reached the configured epsilon.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaltingTimes {
    pub tau_l2: usize,
    pub tau_w: usize,
}

/// `min{k : residuals[k+1] / residuals[0] <= epsilon}`.
pub fn halting_time(residuals: &[f64], epsilon: f64) -> Result<usize> {
    let r0 = *residuals
        .first()
        .ok_or_else(|| Error::Domain("empty residual history".into()))?;
    residuals
        .iter()
        .skip(1)
        .position(|&r| r / r0 <= epsilon)
        .ok_or_else(|| Error::NotConverged {
            epsilon,
            final_ratio: residuals.last().copied().unwrap_or(f64::NAN) / r0,
        })
}

/// Halting times in both norms, re-thresholded at `epsilon`.
pub fn halting_times(trace: &CgTrace, epsilon: f64) -> Result<HaltingTimes> {
    Ok(HaltingTimes {
        tau_l2: halting_time(&trace.residuals_l2, epsilon)?,
        tau_w: halting_time(&trace.residuals_w, epsilon)?,
    })
}

impl CgTrace {
    /// Largest value over the run of `||r_k||_{w^-1} / (2 theta^k ||r_0||_{w^-1})`
    /// and of `||r_k||_{l2} / (2 sqrt(kappa) theta^k ||r_0||_{l2})`; both are at
    /// most one in exact arithmetic.
    pub fn envelope_ratios(&self, kappa: f64) -> (f64, f64) {
        let theta = crate::bounds::theta(kappa.max(1.0)).unwrap_or(0.0);
        let ratio = |res: &[f64], prefactor: f64| {
            let r0 = res[0];
            res.iter()
                .enumerate()
                .map(|(k, &r)| {
                    if r == 0.0 {
                        0.0
                    } else if theta == 0.0 {
                        if k == 0 { r / (prefactor * r0) } else { f64::INFINITY }
                    } else {
                        (r.ln() - (prefactor * r0).ln() - k as f64 * theta.ln()).exp()
                    }
                })
                .fold(0.0, f64::max)
        };
        (
            ratio(&self.residuals_w, 2.0),
            ratio(&self.residuals_l2, 2.0 * kappa.sqrt()),
        )
    }
}

trait Operator<S: Real> {
    fn dim(&self) -> usize;
    fn apply(&self, p: &[Cx<S>], out: &mut [Cx<S>]);
    fn inverse_norm_sqr(&self, r: &[Cx<S>]) -> Result<S>;
}

struct Diagonal<S> {
    lambda: Vec<f64>,
    inv_lambda: Vec<S>,
}

impl<S: Real> Operator<S> for Diagonal<S> {
    fn dim(&self) -> usize {
        self.lambda.len()
    }

    fn apply(&self, p: &[Cx<S>], out: &mut [Cx<S>]) {
        for ((o, pi), &l) in out.iter_mut().zip(p).zip(&self.lambda) {
            *o = pi.scale_f64(l);
        }
    }

    fn inverse_norm_sqr(&self, r: &[Cx<S>]) -> Result<S> {
        let mut acc = S::zero();
        for (ri, &il) in r.iter().zip(&self.inv_lambda) {
            acc += ri.norm_sqr() * il;
        }
        Ok(acc)
    }
}

struct Dense<'a, S> {
    m: &'a HermitianMatrix,
    chol: Cholesky<S>,
}

impl<S: Real> Operator<S> for Dense<'_, S> {
    fn dim(&self) -> usize {
        self.m.dim()
    }

    fn apply(&self, p: &[Cx<S>], out: &mut [Cx<S>]) {
        out.iter_mut().for_each(|o| *o = Cx::zero());
        let a = self.m.as_matrix();
        for (j, pj) in p.iter().enumerate() {
            for (o, &mij) in out.iter_mut().zip(a.column(j)) {
                *o += pj.mul_c64(mij);
            }
        }
    }

    fn inverse_norm_sqr(&self, r: &[Cx<S>]) -> Result<S> {
        self.chol.inverse_quadratic_form(r)
    }
}

fn run_generic<S: Real, O: Operator<S>>(op: &O, b: &ComplexVector, cfg: &CgConfig) -> Result<CgTrace> {
    cfg.validate()?;
    let n = op.dim();
    if b.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: b.len(),
        });
    }
    if b.norm() == 0.0 {
        return Err(Error::Domain("right-hand side is zero".into()));
    }
    let max_iters = cfg.max_iters.unwrap_or(10 * n.max(1));
    let eps = cfg.epsilon;

    let mut r: Vec<Cx<S>> = b.as_slice().iter().map(|&z| Cx::from_c64(z)).collect();
    let mut p = r.clone();
    let mut ap = vec![Cx::<S>::zero(); n];
    let norm_sqr = |v: &[Cx<S>]| {
        let mut acc = S::zero();
        for z in v {
            acc += z.norm_sqr();
        }
        acc
    };

    let mut rr = norm_sqr(&r);
    let mut res_l2 = vec![rr.sqrt().to_f64()];
    let mut res_w = vec![op.inverse_norm_sqr(&r)?.sqrt().to_f64()];
    let (r0_l2, r0_w) = (res_l2[0], res_w[0]);
    let (mut l2_done, mut w_done) = (false, false);
    let mut iterations = 0;

    while !(l2_done && w_done) && iterations < max_iters {
        op.apply(&p, &mut ap);
        let mut curvature = S::zero();
        for (pi, api) in p.iter().zip(&ap) {
            curvature += pi.re * api.re + pi.im * api.im;
        }
        if !(curvature.to_f64() > BREAKDOWN_CURVATURE) {
            return Err(Error::NotPositiveDefinite(format!(
                "search direction curvature {:e} at iteration {iterations}",
                curvature.to_f64()
            )));
        }
        let alpha = rr / curvature;
        for (ri, api) in r.iter_mut().zip(&ap) {
            *ri -= api.scale(alpha);
        }
        let rr_new = norm_sqr(&r);
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = *ri + pi.scale(beta);
        }
        rr = rr_new;
        iterations += 1;

        let l2 = rr.sqrt().to_f64();
        let w = op.inverse_norm_sqr(&r)?.sqrt().to_f64();
        l2_done |= l2 / r0_l2 <= eps;
        w_done |= w / r0_w <= eps;
        res_l2.push(l2);
        res_w.push(w);
    }

    Ok(CgTrace {
        residuals_l2: res_l2,
        residuals_w: res_w,
        iterations_run: iterations,
        converged: l2_done && w_done,
    })
}

/// Conjugate gradient on a dense Hermitian positive definite matrix.
pub fn cg_run(m: &HermitianMatrix, b: &ComplexVector, cfg: &CgConfig) -> Result<CgTrace> {
    match cfg.precision {
        Precision::Standard => {
            let op = Dense::<f64> {
                m,
                chol: Cholesky::factor(m)?,
            };
            run_generic(&op, b, cfg)
        }
        Precision::Extended => {
            let op = Dense::<DoubleDouble> {
                m,
                chol: Cholesky::factor(m)?,
            };
            run_generic(&op, b, cfg)
        }
    }
}

/// Conjugate gradient on `diag(lambda)`.
pub fn cg_run_diagonal(lambda: &[f64], b: &ComplexVector, cfg: &CgConfig) -> Result<CgTrace> {
    if let Some((i, l)) = lambda.iter().enumerate().find(|(_, l)| !(**l > 0.0)) {
        return Err(Error::NotPositiveDefinite(format!("eigenvalue {i} is {l:e}")));
    }
    match cfg.precision {
        Precision::Standard => {
            let op = Diagonal::<f64> {
                lambda: lambda.to_vec(),
                inv_lambda: lambda.iter().map(|l| 1.0 / l).collect(),
            };
            run_generic(&op, b, cfg)
        }
        Precision::Extended => {
            let op = Diagonal::<DoubleDouble> {
                lambda: lambda.to_vec(),
                inv_lambda: lambda
                    .iter()
                    .map(|&l| DoubleDouble::ONE / DoubleDouble::from_f64(l))
                    .collect(),
            };
            run_generic(&op, b, cfg)
        }
    }
}

/// [`cg_run_diagonal`] on the eigenvalues of a spectrum (its unitary, if any,
/// is ignored: the right-hand side is taken in eigen-coordinates).
pub fn cg_run_spectrum(spectrum: &Spectrum, b: &ComplexVector, cfg: &CgConfig) -> Result<CgTrace> {
    cg_run_diagonal(spectrum.eigenvalues(), b, cfg)
}
