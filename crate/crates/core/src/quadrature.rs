//! Gauss-Legendre quadrature with adaptive panel bisection.

use crate::{Error, Result};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// The shared 20-point rule.
    pub fn default_rule() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(20))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes on `[-1, 1]`, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// `(int f, int |f|)` from one set of evaluations.
    pub fn integrate_with_abs<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> (f64, f64) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let (mut s, mut s_abs) = (0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            s += w * v;
            s_abs += w * v.abs();
        }
        (s * half, s_abs * half.abs())
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tolerances and limits for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_panels: 200_000,
        }
    }
}

/// Adaptive integration of `f` over `[a, b]`, starting from `initial_panels`
/// equal panels. A panel is accepted when the single-panel estimate and the
/// two-half estimate agree within its share of the tolerance.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    initial_panels: usize,
    opts: QuadOptions,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let breaks: Vec<f64> = (0..=initial_panels.max(1))
        .map(|i| a + (b - a) * i as f64 / initial_panels.max(1) as f64)
        .collect();
    adaptive_on_breaks(f, &breaks, opts)
}

/// Like [`adaptive`] but with an explicit initial partition.
pub fn adaptive_on_breaks<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<f64> {
    let rule = GaussLegendre::default_rule();
    let lo = breaks[0];
    let hi = *breaks.last().unwrap();
    let total_width = (hi - lo).abs();
    if total_width == 0.0 {
        return Ok(0.0);
    }

    let mut stack: Vec<(f64, f64, f64)> = breaks
        .windows(2)
        .map(|w| (w[0], w[1], rule.integrate(f, w[0], w[1])))
        .collect();
    let coarse_total: f64 = stack.iter().map(|p| p.2).sum();
    let scale = coarse_total.abs();

    let mut total = 0.0;
    let mut compensation = 0.0;
    let mut evaluations = stack.len();
    let mut worst = 0.0f64;
    while let Some((a, b, whole)) = stack.pop() {
        let m = 0.5 * (a + b);
        let (left, left_abs) = rule.integrate_with_abs(f, a, m);
        let (right, right_abs) = rule.integrate_with_abs(f, m, b);
        evaluations += 2;
        let refined = left + right;
        let err = (refined - whole).abs();
        let share = (b - a).abs() / total_width;
        let allowed = (opts.abs_tol + opts.rel_tol * scale) * share;
        let width_exhausted = (b - a).abs() <= 1e-14 * a.abs().max(b.abs()).max(1e-300);
        // differences at the rounding level of the panel values cannot shrink further
        let noise_floor = 64.0 * f64::EPSILON * (left_abs + right_abs);
        if err <= allowed || err <= noise_floor || width_exhausted {
            // Kahan summation keeps many small panels from drifting.
            let y = refined - compensation;
            let t = total + y;
            compensation = (t - total) - y;
            total = t;
            worst = worst.max(err);
        } else {
            if evaluations > opts.max_panels {
                return Err(Error::Quadrature {
                    lo,
                    hi,
                    evaluations,
                    error: err,
                });
            }
            stack.push((a, m, left));
            stack.push((m, b, right));
        }
    }
    if !total.is_finite() {
        return Err(Error::Quadrature {
            lo,
            hi,
            evaluations,
            error: worst,
        });
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(5);
        // degree 9 is the exactness limit for 5 nodes
        let v = gl.integrate(&|x: f64| x.powi(8) + 3.0 * x.powi(3), -1.0, 1.0);
        assert!((v - 2.0 / 9.0).abs() < 1e-15);
        let w: f64 = gl.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        // int_0^1 sqrt(1 - x) dx = 2/3
        let v = adaptive(&|x: f64| (1.0 - x).max(0.0).sqrt(), 0.0, 1.0, 4, QuadOptions::default())
            .unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn adaptive_gaussian() {
        let v = adaptive(&|x: f64| (-x * x).exp(), -10.0, 10.0, 8, QuadOptions::default()).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn panel_budget_is_reported() {
        let opts = QuadOptions {
            abs_tol: 0.0,
            rel_tol: 0.0,
            max_panels: 50,
        };
        let err = adaptive(&|x: f64| (1.0 / x).sin(), 1e-3, 1.0, 1, opts).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
