//! Laguerre functions and the LUE correlation kernel.
//!
//! `psi_j(x) = (j!/Gamma(j+alpha+1))^(1/2) e^(-x/2) x^(alpha/2) L_j^(alpha)(x)`
//! is an orthonormal system on `(0, inf)`, and the eigenvalue correlation
//! kernel of `W = X X^*` is `K_N(x, y) = sum_{j<N} psi_j(x) psi_j(y)`. The
//! scaled kernel of `W / nu` is `K^s_N(x, y) = nu K_N(nu x, nu y)`.
//!
//! The functions are generated by the three-term recurrence carried on
//! `psi_j` itself, with a running logarithmic scale so that neither the
//! exponential weight nor the growth of the polynomials leaves the double
//! range.

use crate::ensembles::EnsembleSpec;
use crate::quadrature::{adaptive_on_breaks, QuadOptions};
use crate::{Error, Result};

const RESCALE_HI: f64 = 1e150;
const RESCALE_LO: f64 = 1e-150;

/// `ln Gamma(alpha + 1)` for integer `alpha`.
fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Values `psi_0(x), ..., psi_n(x)`, each stored as `mantissa * e^scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiValues {
    mantissa: Vec<f64>,
    scale: Vec<f64>,
}

impl PsiValues {
    pub fn len(&self) -> usize {
        self.mantissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mantissa.is_empty()
    }

    /// `psi_j(x)`; underflows to zero far in the tails.
    pub fn value(&self, j: usize) -> f64 {
        self.mantissa[j] * self.scale[j].exp()
    }

    pub fn sign(&self, j: usize) -> f64 {
        if self.mantissa[j] == 0.0 {
            0.0
        } else {
            self.mantissa[j].signum()
        }
    }

    /// `ln |psi_j(x)|`, `-inf` for an exact zero.
    pub fn log_abs(&self, j: usize) -> f64 {
        self.mantissa[j].abs().ln() + self.scale[j]
    }

    /// `psi_j(x)` expressed relative to `e^s`.
    fn rel(&self, j: usize, s: f64) -> f64 {
        self.mantissa[j] * (self.scale[j] - s).exp()
    }
}

/// Laguerre functions of a fixed order `alpha` up to `max_degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreBasis {
    alpha: usize,
    max_degree: usize,
    half_ln_gamma: f64,
}

impl LaguerreBasis {
    pub fn new(alpha: usize, max_degree: usize) -> Self {
        LaguerreBasis {
            alpha,
            max_degree,
            half_ln_gamma: 0.5 * ln_factorial(alpha),
        }
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// `psi_0(x), ..., psi_{max_degree}(x)`.
    pub fn eval(&self, x: f64) -> Result<PsiValues> {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::Domain(format!("Laguerre functions need finite x >= 0, got {x}")));
        }
        let n = self.max_degree + 1;
        let a = self.alpha as f64;
        let mut mantissa = Vec::with_capacity(n);
        let mut scale = Vec::with_capacity(n);
        if x == 0.0 && self.alpha > 0 {
            return Ok(PsiValues {
                mantissa: vec![0.0; n],
                scale: vec![0.0; n],
            });
        }
        let log_x_term = if self.alpha == 0 { 0.0 } else { 0.5 * a * x.ln() };
        let mut s = -0.5 * x + log_x_term - self.half_ln_gamma;
        let (mut prev, mut cur) = (0.0, 1.0);
        mantissa.push(cur);
        scale.push(s);
        for k in 0..self.max_degree {
            let kf = k as f64;
            let next = ((2.0 * kf + a + 1.0 - x) * cur - (kf * (kf + a)).sqrt() * prev)
                / ((kf + 1.0) * (kf + a + 1.0)).sqrt();
            prev = cur;
            cur = next;
            let m = cur.abs().max(prev.abs());
            if m > RESCALE_HI || (m < RESCALE_LO && m > 0.0) {
                prev /= m;
                cur /= m;
                s += m.ln();
            }
            mantissa.push(cur);
            scale.push(s);
        }
        Ok(PsiValues { mantissa, scale })
    }
}

/// `psi_j(x)` for the given order.
pub fn psi(j: usize, x: f64, alpha: usize) -> Result<f64> {
    Ok(LaguerreBasis::new(alpha, j).eval(x)?.value(j))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    /// `K_N(x, y)` on the scale of `W`.
    Unscaled,
    /// `K^s_N(x, y) = nu K_N(nu x, nu y)` on the scale of `W / nu`.
    Scaled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelEval {
    pub n: usize,
    pub alpha: usize,
    pub nu: f64,
    pub mode: KernelMode,
    basis: LaguerreBasis,
}

/// Below this `x` the diagonal is summed directly rather than taken from
/// the Christoffel-Darboux derivative form, whose `1/x` loses digits.
const DIAG_SMALL_X: f64 = 1e-2;

impl KernelEval {
    pub fn new(n: usize, alpha: usize, mode: KernelMode) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("kernel needs N >= 1".into()));
        }
        Ok(KernelEval {
            n,
            alpha,
            nu: (4 * n + 2 * alpha + 2) as f64,
            mode,
            basis: LaguerreBasis::new(alpha, n),
        })
    }

    pub fn unscaled(n: usize, alpha: usize) -> Result<Self> {
        Self::new(n, alpha, KernelMode::Unscaled)
    }

    pub fn scaled(n: usize, alpha: usize) -> Result<Self> {
        Self::new(n, alpha, KernelMode::Scaled)
    }

    /// Scaled kernel of the LUE perturbation described by `spec`.
    pub fn for_spec(spec: &EnsembleSpec) -> Result<Self> {
        spec.validate()?;
        Self::scaled(spec.n, spec.alpha())
    }

    fn factor(&self) -> f64 {
        match self.mode {
            KernelMode::Unscaled => 1.0,
            KernelMode::Scaled => self.nu,
        }
    }

    fn a(&self, k: usize) -> f64 {
        ((k * (k + self.alpha)) as f64).sqrt()
    }

    /// `K(x, x)` from the derivative form
    /// `a_N [a_N psi_{N-1}^2 - psi_N psi_{N-1} - a_{N-1} psi_N psi_{N-2}] / x`,
    /// falling back to `sum psi_j^2` near zero or under heavy cancellation.
    pub fn kernel_diag(&self, x: f64) -> Result<f64> {
        let f = self.factor();
        Ok(f * self.unscaled_diag(f * x)?)
    }

    /// `sum_{j<N} psi_j(x)^2` (scaled as per the mode).
    pub fn kernel_diag_direct(&self, x: f64) -> Result<f64> {
        let f = self.factor();
        let v = self.basis.eval(f * x)?;
        Ok(f * direct_diag(&v, self.n))
    }

    fn unscaled_diag(&self, u: f64) -> Result<f64> {
        let v = self.basis.eval(u)?;
        let n = self.n;
        if u < DIAG_SMALL_X {
            return Ok(direct_diag(&v, n));
        }
        let s = v.scale[n];
        let p_n = v.rel(n, s);
        let p_n1 = v.rel(n - 1, s);
        let p_n2 = if n >= 2 { v.rel(n - 2, s) } else { 0.0 };
        let (an, an1) = (self.a(n), self.a(n - 1));
        let t1 = an * p_n1 * p_n1;
        let t2 = p_n * p_n1;
        let t3 = an1 * p_n * p_n2;
        let r = t1 - t2 - t3;
        let mass = t1.abs() + t2.abs() + t3.abs();
        if !(r > 1e-6 * mass) {
            return Ok(direct_diag(&v, n));
        }
        Ok(an * r / u * (2.0 * s).exp())
    }

    /// `K(x, y)` via the Christoffel-Darboux form
    /// `a_N (psi_{N-1}(x) psi_N(y) - psi_N(x) psi_{N-1}(y)) / (x - y)`,
    /// with the diagonal and near-diagonal handled by the direct sum.
    pub fn kernel(&self, x: f64, y: f64) -> Result<f64> {
        let f = self.factor();
        let (u, w) = (f * x, f * y);
        if (u - w).abs() <= 1e-3 * u.abs().max(w.abs()) {
            if u == w {
                return Ok(f * self.unscaled_diag(u)?);
            }
            return self.kernel_direct(x, y);
        }
        let (vu, vw) = (self.basis.eval(u)?, self.basis.eval(w)?);
        let n = self.n;
        let prod = |a: &PsiValues, i: usize, b: &PsiValues, k: usize| {
            a.sign(i) * b.sign(k) * (a.log_abs(i) + b.log_abs(k)).exp()
        };
        let num = prod(&vu, n - 1, &vw, n) - prod(&vu, n, &vw, n - 1);
        Ok(f * self.a(n) * num / (u - w))
    }

    /// `sum_{j<N} psi_j(x) psi_j(y)` (scaled as per the mode).
    pub fn kernel_direct(&self, x: f64, y: f64) -> Result<f64> {
        let f = self.factor();
        let (vu, vw) = (self.basis.eval(f * x)?, self.basis.eval(f * y)?);
        let s: f64 = (0..self.n)
            .map(|j| vu.sign(j) * vw.sign(j) * (vu.log_abs(j) + vw.log_abs(j)).exp())
            .sum();
        Ok(f * s)
    }

    /// Approximate right edge of the spectrum on this kernel's scale.
    fn soft_edge(&self) -> f64 {
        self.nu / self.factor()
    }

    /// `int K(x, x) dx` over `interval`.
    pub fn diag_integral(&self, interval: TailInterval) -> Result<f64> {
        let (lo, hi) = match interval {
            TailInterval::Above(t) => {
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(Error::Domain(format!("interval start must be finite and >= 0, got {t}")));
                }
                (t, self.truncation_point(t)?)
            }
            TailInterval::Below(t) => {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(Error::Domain(format!("interval end must be finite and > 0, got {t}")));
                }
                (0.0, t.min(self.truncation_point(0.0)?))
            }
        };
        if hi <= lo {
            return Ok(0.0);
        }
        // panels of about unit width on the scale of W resolve the N-fold ripple
        let width_w = (hi - lo) * self.factor();
        let panels = (width_w.ceil() as usize).clamp(8, 20_000);
        let breaks: Vec<f64> = (0..=panels).map(|i| lo + (hi - lo) * i as f64 / panels as f64).collect();
        let opts = QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-11,
            max_panels: 2_000_000,
        };
        let f = |x: f64| self.kernel_diag(x).unwrap_or(f64::NAN);
        adaptive_on_breaks(&f, &breaks, opts)
    }

    /// A point beyond `start` and the soft edge where `K(x, x)` has fallen
    /// below `1e-18` of its peak.
    fn truncation_point(&self, start: f64) -> Result<f64> {
        let edge = self.soft_edge();
        let mut peak = 0.0f64;
        for i in 1..=400 {
            peak = peak.max(self.kernel_diag(1.5 * edge * i as f64 / 400.0)?);
        }
        let mut x = start.max(edge);
        let step = 0.01 * edge;
        for _ in 0..100_000 {
            if self.kernel_diag(x)? < 1e-18 * peak {
                return Ok(x);
            }
            x += step.max(0.02 * x);
        }
        Err(Error::Quadrature {
            lo: start,
            hi: x,
            evaluations: 100_000,
            error: f64::NAN,
        })
    }
}

fn direct_diag(v: &PsiValues, n: usize) -> f64 {
    let s = (0..n).map(|j| v.scale[j]).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = (0..n).map(|j| v.rel(j, s).powi(2)).sum();
    sum * (2.0 * s).exp()
}

/// Region of integration for the trace bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailInterval {
    /// `[t, inf)`: the largest eigenvalue exceeds `t`.
    Above(f64),
    /// `[0, t]`: the smallest eigenvalue lies below `t`.
    Below(f64),
}

/// `I exp(1 + I)` with `I = int K(x, x) dx` over the interval; bounds the
/// probability that some eigenvalue lies in it.
pub fn tail_bound_from_kernel(ke: &KernelEval, interval: TailInterval) -> Result<f64> {
    let i = ke.diag_integral(interval)?;
    Ok(i * (1.0 + i).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive;

    fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let opts = QuadOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_panels: 2_000_000,
        };
        adaptive(&f, a, b, 200, opts).unwrap()
    }

    // explicit L_j^(alpha)(x) = sum_i (-1)^i C(j+alpha, j-i) x^i / i!
    fn laguerre_explicit(j: usize, alpha: usize, x: f64) -> f64 {
        let mut s = 0.0;
        for i in 0..=j {
            let mut binom = 1.0;
            for t in 0..(j - i) {
                binom *= (j + alpha - t) as f64 / (t + 1) as f64;
            }
            let fact: f64 = (1..=i).map(|t| t as f64).product();
            s += if i % 2 == 0 { 1.0 } else { -1.0 } * binom * x.powi(i as i32) / fact;
        }
        s
    }

    #[test]
    fn psi0_alpha0_is_exponential() {
        for x in [0.0, 0.3, 2.0, 17.5] {
            assert!((psi(0, x, 0).unwrap() - (-x / 2.0f64).exp()).abs() < 1e-15);
        }
        let norm = integrate(|x| psi(0, x, 0).unwrap().powi(2), 0.0, 80.0);
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_explicit_polynomials() {
        for alpha in [0usize, 1, 3] {
            let basis = LaguerreBasis::new(alpha, 8);
            for x in [0.1, 1.0, 4.5, 12.0] {
                let v = basis.eval(x).unwrap();
                for j in 0..=8 {
                    let h: f64 = ln_factorial(j + alpha) - ln_factorial(j);
                    let want = (-0.5 * h).exp()
                        * (-x / 2.0).exp()
                        * x.powf(alpha as f64 / 2.0)
                        * laguerre_explicit(j, alpha, x);
                    assert!((v.value(j) - want).abs() < 1e-12 * (1.0 + want.abs()), "{alpha} {x} {j}");
                }
            }
        }
    }

    #[test]
    fn orthonormal_by_quadrature() {
        for alpha in [0usize, 1, 5, 10] {
            let basis = LaguerreBasis::new(alpha, 30);
            let hi = 4.0 * 30.0 + 2.0 * alpha as f64 + 150.0;
            for (i, k) in [(0usize, 0usize), (0, 1), (3, 7), (12, 12), (29, 30), (30, 30)] {
                let g = integrate(
                    |x| {
                        let v = basis.eval(x).unwrap();
                        v.value(i) * v.value(k)
                    },
                    0.0,
                    hi,
                );
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-8, "alpha {alpha} ({i},{k}): {g}");
            }
        }
    }

    #[test]
    fn sign_changes_equal_degree() {
        let basis = LaguerreBasis::new(2, 10);
        for j in 0..=10 {
            let mut changes = 0;
            let mut last = 0.0f64;
            for i in 1..20_000 {
                let x = 60.0 * i as f64 / 20_000.0;
                let v = basis.eval(x).unwrap().value(j);
                if v != 0.0 {
                    if last != 0.0 && v.signum() != last.signum() {
                        changes += 1;
                    }
                    last = v;
                }
            }
            assert_eq!(changes, j);
        }
    }

    #[test]
    fn large_arguments_stay_finite() {
        let basis = LaguerreBasis::new(10, 500);
        let v = basis.eval(3000.0).unwrap();
        assert!(v.log_abs(500).is_finite());
        assert!(v.log_abs(0) < -1000.0);
        let v = basis.eval(1e-6).unwrap();
        assert!(v.value(500).is_finite());
    }

    #[test]
    fn diagonal_forms_agree() {
        for (n, alpha) in [(1usize, 0usize), (2, 3), (10, 0), (30, 5), (50, 10)] {
            let ke = KernelEval::unscaled(n, alpha).unwrap();
            for i in 0..200 {
                let x = 1e-3 * (1.07f64).powi(i);
                let a = ke.kernel_diag(x).unwrap();
                let b = ke.kernel_diag_direct(x).unwrap();
                assert!(a >= 0.0);
                assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-300), "N {n} alpha {alpha} x {x}: {a} {b}");
            }
        }
    }

    #[test]
    fn one_term_kernel_diagonal() {
        // N = 1: K(x, x) = psi_0(x)^2 = e^-x x^alpha / alpha!
        let ke = KernelEval::unscaled(1, 2).unwrap();
        let x: f64 = 3.0;
        let want = (-x).exp() * x * x / 2.0;
        assert!((ke.kernel_diag(x).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn christoffel_darboux_off_diagonal() {
        for (n, alpha) in [(5usize, 0usize), (20, 4), (50, 10)] {
            let ke = KernelEval::unscaled(n, alpha).unwrap();
            for &x in &[0.5, 3.0, 40.0, 150.0] {
                for &y in &[0.7, 2.9, 41.0, 120.0, 210.0] {
                    let cd = ke.kernel(x, y).unwrap();
                    let direct = ke.kernel_direct(x, y).unwrap();
                    let scale = (ke.kernel_diag(x).unwrap() * ke.kernel_diag(y).unwrap()).sqrt();
                    assert!((cd - direct).abs() <= 1e-8 * scale.max(direct.abs()), "{n} {x} {y}: {cd} {direct}");
                }
            }
        }
    }

    #[test]
    fn diagonal_matches_finite_difference_limit() {
        let ke = KernelEval::unscaled(20, 3).unwrap();
        for x in [1.0, 10.0, 60.0] {
            let h = 1e-2;
            let fd = 0.5 * (ke.kernel(x, x + h).unwrap() + ke.kernel(x, x - h).unwrap());
            let d = ke.kernel_diag(x).unwrap();
            assert!((fd - d).abs() <= 1e-3 * d);
        }
    }

    #[test]
    fn trace_identity() {
        for (n, alpha) in [(10usize, 0usize), (30, 5), (50, 10)] {
            let ke = KernelEval::unscaled(n, alpha).unwrap();
            let tr = ke.diag_integral(TailInterval::Above(0.0)).unwrap();
            assert!((tr - n as f64).abs() <= 1e-6 * n as f64, "{n}: {tr}");
            let sc = KernelEval::scaled(n, alpha).unwrap();
            let tr = sc.diag_integral(TailInterval::Above(0.0)).unwrap();
            assert!((tr - n as f64).abs() <= 1e-6 * n as f64, "scaled {n}: {tr}");
        }
    }

    #[test]
    fn scaled_kernel_matches_monic_weights() {
        // K^s from monic pi_j(x) = L_j(nu x) / (nu^j k_j), k_j = (-1)^j / j!, with
        // Z_j^-1 = int pi_j^2 x^alpha e^(-nu x) dx computed by quadrature
        let (n, alpha) = (5usize, 2usize);
        let ke = KernelEval::scaled(n, alpha).unwrap();
        let nu = ke.nu;
        let pi = |j: usize, x: f64| {
            let fact: f64 = (1..=j).map(|t| t as f64).product();
            let kj = if j % 2 == 0 { 1.0 } else { -1.0 } / fact;
            laguerre_explicit(j, alpha, nu * x) / (nu.powi(j as i32) * kj)
        };
        let z: Vec<f64> = (0..n)
            .map(|j| {
                1.0 / integrate(|x| pi(j, x).powi(2) * x.powi(alpha as i32) * (-nu * x).exp(), 0.0, 2.0)
            })
            .collect();
        for &(x, y) in &[(0.1, 0.1), (0.3, 0.5), (0.9, 0.2), (1.2, 1.2)] {
            let want: f64 = (0..n)
                .map(|j| z[j] * pi(j, x) * pi(j, y))
                .sum::<f64>()
                * (x * y).powf(alpha as f64 / 2.0)
                * (-nu * (x + y) / 2.0).exp();
            let got = ke.kernel(x, y).unwrap();
            assert!((got - want).abs() <= 1e-9 * want.abs().max(1e-12), "({x},{y}): {got} {want}");
        }
    }

    #[test]
    fn tail_bound_behaviour() {
        let ke = KernelEval::scaled(30, 6).unwrap();
        let mut last = f64::INFINITY;
        for i in 0..12 {
            let t = 0.9 + 0.05 * i as f64;
            let b = tail_bound_from_kernel(&ke, TailInterval::Above(t)).unwrap();
            assert!(b <= last * (1.0 + 1e-9));
            last = b;
        }
        let far = ke.diag_integral(TailInterval::Above(1.6)).unwrap();
        assert!(far < 1e-8);
        let b = tail_bound_from_kernel(&ke, TailInterval::Above(1.6)).unwrap();
        assert!(b <= 1e-7 && (b - far * std::f64::consts::E).abs() <= 1e-6 * b.max(1e-300));
        let low = tail_bound_from_kernel(&ke, TailInterval::Below(1e-5)).unwrap();
        assert!(low > 0.0 && low < 1e-6);
        assert!(tail_bound_from_kernel(&ke, TailInterval::Below(0.0)).is_err());
    }
}
