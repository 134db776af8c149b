//! Closed-form bounds on CG halting times and on the spectral tails that
//! drive them.
//!
//! All logarithms are natural. Asymptotic statements are evaluated at
//! leading order: their `o(1)` and `O(.)` corrections are dropped, so the
//! moment bounds are only expected to dominate sample means up to a modest
//! safety factor at finite `N`.
//!
//! Constants that are only known to exist (`C`, `C_1`, `C_2`) are explicit
//! parameters with default 1.

use crate::ensembles::{alpha_of, EnsembleSpec};
use crate::{Error, Result};
use std::fmt;
use std::str::FromStr;

fn check_kappa(s: f64) -> Result<()> {
    if !(s >= 1.0) {
        return Err(Error::Domain(format!("condition number must be >= 1, got {s}")));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("epsilon must be positive, got {eps}")));
    }
    Ok(())
}

/// `log((sqrt(s) + 1) / (sqrt(s) - 1)) = -log theta(s)`, accurate for large `s`.
fn log_inv_theta(s: f64) -> f64 {
    (2.0 / (s.sqrt() - 1.0)).ln_1p()
}

/// `(sqrt(kappa) - 1) / (sqrt(kappa) + 1)`.
pub fn theta(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let r = kappa.sqrt();
    Ok((r - 1.0) / (r + 1.0))
}

/// `K_eps(kappa) = log(eps/2) / log theta(kappa)`, the worst-case iteration
/// count for the weighted residual; 0 when `kappa = 1` or `eps >= 2`.
pub fn k_eps(kappa: f64, eps: f64) -> Result<f64> {
    check_kappa(kappa)?;
    check_eps(eps)?;
    if kappa == 1.0 || eps >= 2.0 {
        return Ok(0.0);
    }
    Ok((2.0 / eps).ln() / log_inv_theta(kappa))
}

/// `log(2 sqrt(s) / eps) / log((sqrt(s)+1)/(sqrt(s)-1))`.
pub fn g_l2(s: f64, eps: f64) -> Result<f64> {
    check_kappa(s)?;
    check_eps(eps)?;
    if s == 1.0 {
        return Ok(0.0);
    }
    Ok((2.0 * s.sqrt() / eps).ln() / log_inv_theta(s))
}

/// `log(2 / eps) / log((sqrt(s)+1)/(sqrt(s)-1))`.
pub fn g_w(s: f64, eps: f64) -> Result<f64> {
    check_kappa(s)?;
    check_eps(eps)?;
    if s == 1.0 {
        return Ok(0.0);
    }
    Ok((2.0 / eps).ln() / log_inv_theta(s))
}

/// `(sqrt(s) - 1) / (sqrt(s) + 1)`.
pub fn g_resid(s: f64) -> Result<f64> {
    theta(s)
}

/// Which moment a bound controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundPart {
    /// `E[tau_eps^j]`, residual in the Euclidean norm.
    L2,
    /// `E[tau_{w,eps}^j]`, residual in the `w^-1` norm.
    Weighted,
    /// `E[(||r_{k+1}|| / ||r_k||)^j]`.
    Resid,
}

impl FromStr for BoundPart {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(BoundPart::L2),
            "weighted" => Ok(BoundPart::Weighted),
            "resid" => Ok(BoundPart::Resid),
            _ => Err(Error::InvalidSpec(format!("unknown bound part {s:?} (l2, weighted, resid)"))),
        }
    }
}

impl fmt::Display for BoundPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundPart::L2 => "l2",
            BoundPart::Weighted => "weighted",
            BoundPart::Resid => "resid",
        })
    }
}

/// `rho_sigma = 2 sqrt((1 + sigma^-2) / c)`.
pub fn rho_sigma(c: f64, sigma: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("c must be positive, got {c}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must lie in (0, inf], got {sigma}")));
    }
    Ok(2.0 * ((1.0 + 1.0 / (sigma * sigma)) / c).sqrt())
}

fn check_regime(j: u32, n: usize, gamma: f64) -> Result<()> {
    if j == 0 {
        return Err(Error::Domain("moment order j must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Domain(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    Ok(())
}

/// Leading-order moment bound for `A + sigma^2 H` with `||A|| <= 1`, in terms
/// of `L = N^(1-gamma) rho_sigma`:
///
/// - `L2`: `2^-j L^j (log(2L/eps))^j`
/// - `Weighted`: `2^-j L^j (log(2/eps))^j`
/// - `Resid`: `(1 - 2/(L+1))^j`
pub fn theorem1_bound(part: BoundPart, j: u32, n: usize, gamma: f64, c: f64, sigma: f64, eps: f64) -> Result<f64> {
    check_regime(j, n, gamma)?;
    check_eps(eps)?;
    let l = (n as f64).powf(1.0 - gamma) * rho_sigma(c, sigma)?;
    let j = j as i32;
    Ok(match part {
        BoundPart::L2 => (0.5 * l * (2.0 * l / eps).ln()).powi(j),
        BoundPart::Weighted => (0.5 * l * (2.0 / eps).ln()).powi(j),
        BoundPart::Resid => (1.0 - 2.0 / (l + 1.0)).powi(j),
    })
}

/// Markov-inequality tail for `P(tau_eps > N^lambda)` with `c = 2`:
/// `2^(2-j) (1 + sigma^-2)^(j/2) N^(-j(gamma - lambda)) (log(4 N^(1-gamma) (1+sigma^-2)^(1/2) / eps))^j`.
/// May exceed 1.
pub fn remark1_markov(j: u32, n: usize, gamma: f64, lambda_exp: f64, sigma: f64, eps: f64) -> Result<f64> {
    check_regime(j, n, gamma)?;
    check_eps(eps)?;
    if !(lambda_exp >= 0.0 && lambda_exp < gamma) {
        return Err(Error::Domain(format!("need 0 <= lambda < gamma, got lambda = {lambda_exp}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must lie in (0, inf], got {sigma}")));
    }
    let s = 1.0 + 1.0 / (sigma * sigma);
    let nf = n as f64;
    let jf = j as f64;
    let log_term = (4.0 * nf.powf(1.0 - gamma) * s.sqrt() / eps).ln();
    Ok(2f64.powf(2.0 - jf) * s.powf(jf / 2.0) * nf.powf(-jf * (gamma - lambda_exp)) * log_term.powi(j as i32))
}

/// `f(N) = [d^-1 alpha^(-1/3)]^(2/(d alpha)) [nu^2/alpha^2]^(1 + 2/(d alpha))`,
/// evaluated in log form.
pub fn lue_f(alpha: f64, nu: f64, d: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("f(N) needs alpha > 0, got {alpha}")));
    }
    if !(d > 0.0 && d <= 1.0) {
        return Err(Error::Domain(format!("d must lie in (0, 1], got {d}")));
    }
    let da = d * alpha;
    let ln_ratio = 2.0 * (nu / alpha).ln();
    Ok(((2.0 / da) * (-d.ln() - alpha.ln() / 3.0) + (1.0 + 2.0 / da) * ln_ratio).exp())
}

/// Default `ell(d) = 1 - d^(2/3)`.
pub fn default_ell(d: f64) -> f64 {
    1.0 - d.powf(2.0 / 3.0)
}

/// Parameters of the condition-number tail estimates.
///
/// The hard-edge exponent is `d * alpha`; with `d = 1` it is the plain
/// `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    /// Soft-edge location multiplier, `1 + sigma^-2` for the perturbed LUE.
    pub a: f64,
    /// Soft-edge exponential rate.
    pub c1: f64,
    /// Prefactor `C_1` of the largest-eigenvalue tail.
    pub c_max: f64,
    /// Prefactor `C_2` of the inverse-smallest-eigenvalue tail.
    pub c_min: f64,
    /// Prefactor `C` of the condition-number tail.
    pub c_kappa: f64,
    /// The constant `C` inside `delta_N`.
    pub c_delta: f64,
    pub delta: f64,
    pub d: f64,
    pub ell_d: f64,
    pub alpha: usize,
    pub n: usize,
    pub gamma: f64,
}

impl BoundParams {
    /// Parameters for `H` (or `sigma^-2 A + H`) drawn from the LUE in the
    /// critical scaling. `delta` is chosen so that `(1 + delta) f(N)` equals
    /// the hard-edge validity threshold `ell(d)^-2 nu^2 / alpha^2`, clamped to
    /// stay positive.
    pub fn for_lue(spec: &EnsembleSpec, d: f64) -> Result<Self> {
        spec.validate()?;
        let ell_d = default_ell(d);
        let mut p = BoundParams {
            a: 1.0 + spec.inv_sigma_sq(),
            c1: 4.0 / 3.0,
            c_max: 1.0,
            c_min: 1.0,
            c_kappa: 1.0,
            c_delta: 1.0,
            delta: 1.0,
            d,
            ell_d,
            alpha: spec.alpha(),
            n: spec.n,
            gamma: spec.gamma,
        };
        p.delta = p.delta_for_ell()?;
        Ok(p)
    }

    /// Recomputes `delta` after `ell_d` or `d` changed.
    pub fn with_ell(mut self, ell_d: f64) -> Result<Self> {
        self.ell_d = ell_d;
        self.delta = self.delta_for_ell()?;
        Ok(self)
    }

    fn delta_for_ell(&self) -> Result<f64> {
        self.validate_shape()?;
        let threshold = self.hard_edge_threshold();
        Ok((threshold / self.f_n()? - 1.0).max(1e-12))
    }

    fn validate_shape(&self) -> Result<()> {
        if alpha_of(self.n, self.gamma, 1.0).is_err() {
            return Err(Error::Domain(format!("invalid N = {} or gamma = {}", self.n, self.gamma)));
        }
        if self.alpha == 0 {
            return Err(Error::Domain("tail bounds need alpha >= 1".into()));
        }
        if !(self.d > 0.0 && self.d <= 1.0) {
            return Err(Error::Domain(format!("d must lie in (0, 1], got {}", self.d)));
        }
        if !(self.ell_d >= 0.0 && self.ell_d < 1.0) {
            return Err(Error::Domain(format!("ell(d) must lie in [0, 1), got {}", self.ell_d)));
        }
        if !(self.a >= 1.0 && self.c1 > 0.0) {
            return Err(Error::Domain("need a >= 1 and c1 > 0".into()));
        }
        Ok(())
    }

    pub fn nu(&self) -> f64 {
        (4 * self.n + 2 * self.alpha + 2) as f64
    }

    /// `M = N + (alpha + 1) / 2`.
    pub fn m_half(&self) -> f64 {
        self.n as f64 + 0.5 * (self.alpha as f64 + 1.0)
    }

    /// Hard-edge exponent `d alpha`.
    pub fn tail_exponent(&self) -> f64 {
        self.d * self.alpha as f64
    }

    pub fn f_n(&self) -> Result<f64> {
        lue_f(self.alpha as f64, self.nu(), self.d)
    }

    /// `ell(d)^-2 nu^2 / alpha^2`; infinite when `ell(d) = 0`.
    pub fn hard_edge_threshold(&self) -> f64 {
        let r = self.nu() / self.alpha as f64;
        r * r / (self.ell_d * self.ell_d)
    }

    /// `e_N = (1/2) (d alpha)^2 / (2 a c1 N + d alpha)`.
    pub fn e_n(&self) -> f64 {
        let x = self.tail_exponent();
        0.5 * x * x / (2.0 * self.a * self.c1 * self.n as f64 + x)
    }

    /// `delta_N = (1 + delta)(1 + C (N^-1 + delta N^(gamma-1))) - 1`.
    pub fn delta_n(&self) -> f64 {
        let nf = self.n as f64;
        (1.0 + self.delta) * (1.0 + self.c_delta * (1.0 / nf + self.delta * nf.powf(self.gamma - 1.0))) - 1.0
    }

    /// `b_N = a f(N) (1 + delta_N)`.
    pub fn b_n(&self) -> Result<f64> {
        Ok(self.a * self.f_n()? * (1.0 + self.delta_n()))
    }
}

/// The two tail estimates of the sufficient condition without clamping or
/// validity checks:
/// `(C_1 exp(-c1 N (t - a)), C_2 [t / f(N)]^(-d alpha / 2))`.
pub fn condition1_tail_formulas(p: &BoundParams, t: f64) -> Result<(f64, f64)> {
    p.validate_shape()?;
    let max = p.c_max * (-p.c1 * p.n as f64 * (t - p.a)).exp();
    let min = p.c_min * (t / p.f_n()?).powf(-p.tail_exponent() / 2.0);
    Ok((max, min))
}

/// Clamped tail estimates `(T_max(t), T_min(t))`. The max branch is applied
/// for `t >= 1` and capped at `C_1`; the min branch for
/// `t >= (1 + delta) f(N)` and capped at `C_2`. Outside its range a branch
/// returns 1.
pub fn condition1_tails(p: &BoundParams, t: f64) -> Result<(f64, f64)> {
    let (max, min) = condition1_tail_formulas(p, t)?;
    let max = if t >= 1.0 { max.min(p.c_max) } else { 1.0 };
    let min = if t >= (1.0 + p.delta) * p.f_n()? { min.min(p.c_min) } else { 1.0 };
    Ok((max, min))
}

/// `P(kappa > t) <= C [t / (a f(N))]^(-d alpha/2 + e_N)` for
/// `t >= a (1 + delta_N) f(N)`; returns 1 below the threshold.
pub fn lemma2_kappa_tail(p: &BoundParams, t: f64) -> Result<f64> {
    p.validate_shape()?;
    let f = p.f_n()?;
    if !(t >= p.a * (1.0 + p.delta_n()) * f) {
        return Ok(1.0);
    }
    let exponent = -p.tail_exponent() / 2.0 + p.e_n();
    Ok(p.c_kappa * (t / (p.a * f)).powf(exponent))
}

/// Prefactors for [`lue_tail_bounds_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LueTailConstants {
    pub c_max: f64,
    pub c_min: f64,
    /// `ell(d)`; `None` means [`default_ell`].
    pub ell_d: Option<f64>,
}

impl Default for LueTailConstants {
    fn default() -> Self {
        LueTailConstants {
            c_max: 1.0,
            c_min: 1.0,
            ell_d: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LueTails {
    /// Bound on `P(lambda_max(W/nu) > t)`.
    pub max: f64,
    /// Bound on `P(lambda_min(W/nu)^-1 > t)`.
    pub min: f64,
    pub max_valid: bool,
    pub min_valid: bool,
    /// `gamma > 1/2`, where the estimates are conjectural.
    pub conjectural: bool,
}

/// `C exp(-(4/3) M (t - 1))` for the largest eigenvalue and
/// `C [f(N) / t]^(d alpha / 2)` for the inverse smallest eigenvalue, the
/// latter valid for `t >= ell(d)^-2 nu^2 / alpha^2`.
pub fn lue_tail_bounds(spec: &EnsembleSpec, d: f64, t: f64) -> Result<LueTails> {
    lue_tail_bounds_with(spec, d, t, &LueTailConstants::default())
}

pub fn lue_tail_bounds_with(spec: &EnsembleSpec, d: f64, t: f64, k: &LueTailConstants) -> Result<LueTails> {
    spec.validate()?;
    let alpha = spec.alpha() as f64;
    let nu = spec.nu();
    let f = lue_f(alpha, nu, d)?;
    let ell = k.ell_d.unwrap_or_else(|| default_ell(d));
    let max_valid = t >= 1.0;
    let max = if max_valid {
        (k.c_max * (-(4.0 / 3.0) * spec.m_half() * (t - 1.0)).exp()).min(k.c_max.max(1.0))
    } else {
        1.0
    };
    let threshold = (nu / alpha).powi(2) / (ell * ell);
    let min_valid = t >= threshold;
    let min = if min_valid { k.c_min * (f / t).powf(d * alpha / 2.0) } else { 1.0 };
    Ok(LueTails {
        max,
        min,
        max_valid,
        min_valid,
        conjectural: spec.gamma > 0.5,
    })
}

/// Placement of the factor 2 in the logarithms of the general moment bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogConvention {
    /// `log(b^(1/2) / eps)` and `log(1/eps)`, as the general statement reads.
    #[default]
    Literal,
    /// `log(2 b^(1/2) / eps)` and `log(2/eps)`, as produced by the functions
    /// `g_l2` and `g_w`; agrees with [`theorem1_bound`] when
    /// `b_N = (rho_sigma N^(1-gamma))^2`.
    ProofForm,
}

/// Leading-order moment bound in terms of `b_N`:
///
/// - `L2`: `2^-j b^(j/2) (log(b^(1/2)/eps))^j`
/// - `Weighted`: `2^-j b^(j/2) (log(1/eps))^j`
/// - `Resid`: `(1 - 2/(b^(1/2) + 1))^j`
///
/// with the logarithms shifted by `log 2` under [`LogConvention::ProofForm`].
pub fn theorem2_bounds(part: BoundPart, j: u32, b_n: f64, eps: f64, convention: LogConvention) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain("moment order j must be at least 1".into()));
    }
    if !(b_n > 1.0 && b_n.is_finite()) {
        return Err(Error::Domain(format!("b_N must exceed 1, got {b_n}")));
    }
    check_eps(eps)?;
    let two = match convention {
        LogConvention::Literal => 1.0,
        LogConvention::ProofForm => 2.0,
    };
    let r = b_n.sqrt();
    let j = j as i32;
    Ok(match part {
        BoundPart::L2 => (0.5 * r * (two * r / eps).ln()).powi(j),
        BoundPart::Weighted => (0.5 * r * (two / eps).ln()).powi(j),
        BoundPart::Resid => (1.0 - 2.0 / (r + 1.0)).powi(j),
    })
}
