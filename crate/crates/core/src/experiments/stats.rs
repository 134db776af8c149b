use super::SampleRecord;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    TauL2,
    TauW,
}

impl Field {
    pub fn of(self, r: &SampleRecord) -> usize {
        match self {
            Field::TauL2 => r.tau_l2,
            Field::TauW => r.tau_w,
        }
    }
}

impl FromStr for Field {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau_l2" => Ok(Field::TauL2),
            "tau_w" => Ok(Field::TauW),
            _ => Err(Error::InvalidSpec(format!("unknown field '{s}'"))),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::TauL2 => "tau_l2",
            Field::TauW => "tau_w",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub n: usize,
    pub field: Field,
    pub mean: f64,
    /// Standard error of the mean (sample standard deviation over sqrt(count)).
    pub stderr: f64,
    pub count: usize,
}

/// Per-N sample means of `field`, ordered by N.
pub fn sample_mean_curve(records: &[SampleRecord], field: Field) -> Vec<CurvePoint> {
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry(r.n).or_default().push(field.of(r) as f64);
    }
    groups
        .into_iter()
        .map(|(n, v)| {
            let count = v.len();
            let mean = v.iter().sum::<f64>() / count as f64;
            let stderr = if count > 1 {
                let ss: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
                (ss / (count - 1) as f64).sqrt() / (count as f64).sqrt()
            } else {
                0.0
            };
            CurvePoint {
                n,
                field,
                mean,
                stderr,
                count,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub residual_norm: f64,
    pub plan_digest: Option<String>,
}

impl FitResult {
    /// `a N^p log N + b N^p`.
    pub fn eval(&self, n: f64) -> f64 {
        n.powf(self.p) * (self.a * n.ln() + self.b)
    }
}

fn residual(xs: &[(f64, f64, f64)], a: f64, b: f64) -> f64 {
    xs.iter()
        .map(|&(u, v, y)| (y - a * u - b * v).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Nonnegative least squares for `mean ~ a N^p log N + b N^p`.
///
/// The unconstrained solution is used when feasible; otherwise the best of
/// the one-coefficient fits (`a = 0` or `b = 0`) and the zero model.
pub fn fit_growth(curve: &[CurvePoint], p: f64) -> Result<FitResult> {
    if !p.is_finite() {
        return Err(Error::Fit(format!("exponent must be finite, got {p}")));
    }
    let mut distinct: Vec<usize> = curve.iter().map(|c| c.n).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::Fit("need at least two distinct N".into()));
    }
    let xs: Vec<(f64, f64, f64)> = curve
        .iter()
        .map(|c| {
            let n = c.n as f64;
            let v = n.powf(p);
            (v * n.ln(), v, c.mean)
        })
        .collect();
    let (mut suu, mut suv, mut svv, mut suy, mut svy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(u, v, y) in &xs {
        suu += u * u;
        suv += u * v;
        svv += v * v;
        suy += u * y;
        svy += v * y;
    }
    let det = suu * svv - suv * suv;
    if !(det > 1e-14 * suu * svv) {
        return Err(Error::Fit("singular design".into()));
    }
    let mut candidates = Vec::with_capacity(4);
    let a = (svv * suy - suv * svy) / det;
    let b = (suu * svy - suv * suy) / det;
    if a >= 0.0 && b >= 0.0 {
        candidates.push((a, b));
    } else {
        candidates.push(((suy / suu).max(0.0), 0.0));
        candidates.push((0.0, (svy / svv).max(0.0)));
    }
    let (a, b, residual_norm) = candidates
        .into_iter()
        .map(|(a, b)| (a, b, residual(&xs, a, b)))
        .min_by(|x, y| x.2.total_cmp(&y.2))
        .expect("at least one candidate");
    Ok(FitResult {
        p,
        a,
        b,
        residual_norm,
        plan_digest: None,
    })
}

/// Least-squares slope of `log(mean)` against `log(N)`.
pub fn loglog_slope(curve: &[CurvePoint]) -> Result<f64> {
    if curve.len() < 3 {
        return Err(Error::Fit(format!("need at least three points, got {}", curve.len())));
    }
    if let Some(c) = curve.iter().find(|c| !(c.mean > 0.0)) {
        return Err(Error::Domain(format!("nonpositive mean {} at N = {}", c.mean, c.n)));
    }
    let pts: Vec<(f64, f64)> = curve.iter().map(|c| ((c.n as f64).ln(), c.mean.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all points share one N".into()));
    }
    Ok(sxy / sxx)
}
