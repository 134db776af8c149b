//! Random and deterministic matrix families.
//!
//! - LUE perturbations `H = X X^* / nu` in the critical scaling
//!   `alpha = floor(sqrt(4c) N^gamma)`, `nu = 4N + 2 alpha + 2`.
//! - Unit right-hand sides (Gaussian sphere or normalized uniform box).
//! - The Marchenko-Pastur quantiles and the clustered spectra built on them.
//!
//! Every sampler takes a [`SeededRng`], so draws depend only on
//! `(master_seed, stream_id)` and never on scheduling.

use crate::linalg::{hermitian_eigen, ComplexMatrix, ComplexVector, HermitianMatrix, Spectrum};
use crate::quadrature::{adaptive, QuadOptions};
use crate::{Complex64, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Relative distance within which `sqrt(4c) N^gamma` is treated as an integer
/// before flooring, so that e.g. `2 * 100^(1/2)` gives 20 rather than 19.
pub const ALPHA_SNAP_RTOL: f64 = 1e-9;

/// `floor(sqrt(4c) N^gamma)`.
pub fn alpha_of(n: usize, gamma: f64, c: f64) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidSpec("N must be at least 1".into()));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidSpec(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidSpec(format!("c must be positive, got {c}")));
    }
    let x = (4.0 * c).sqrt() * (n as f64).powf(gamma);
    let r = x.round();
    let a = if (x - r).abs() <= ALPHA_SNAP_RTOL * x.max(1.0) { r } else { x.floor() };
    Ok(a as usize)
}

/// Parameters of the perturbation `sigma^2 H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub n: usize,
    pub gamma: f64,
    pub c: f64,
    /// `f64::INFINITY` selects the noise-only case `H`.
    pub sigma: f64,
}

impl EnsembleSpec {
    pub fn new(n: usize, gamma: f64, c: f64, sigma: f64) -> Result<Self> {
        let spec = EnsembleSpec { n, gamma, c, sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        alpha_of(self.n, self.gamma, self.c)?;
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidSpec(format!("sigma must lie in (0, inf], got {}", self.sigma)));
        }
        Ok(())
    }

    pub fn alpha(&self) -> usize {
        alpha_of(self.n, self.gamma, self.c).expect("validated spec")
    }

    pub fn nu(&self) -> f64 {
        (4 * self.n + 2 * self.alpha() + 2) as f64
    }

    /// `M = N + (alpha + 1) / 2`.
    pub fn m_half(&self) -> f64 {
        self.n as f64 + 0.5 * (self.alpha() as f64 + 1.0)
    }

    pub fn is_noise_only(&self) -> bool {
        self.sigma == f64::INFINITY
    }

    /// `1/sigma^2`, zero for the noise-only case.
    pub fn inv_sigma_sq(&self) -> f64 {
        1.0 / (self.sigma * self.sigma)
    }
}

/// A reproducible random stream identified by `(master_seed, stream_id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededRng {
    pub master_seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeededRng {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        SeededRng { master_seed, stream_id }
    }

    /// Substream for sample `sample_id` of grid point `n`:
    /// `stream_id = splitmix64(splitmix64(master_seed ^ splitmix64(n)) ^ sample_id)`.
    pub fn for_sample(master_seed: u64, n: usize, sample_id: u64) -> Self {
        let s = splitmix64(splitmix64(master_seed ^ splitmix64(n as u64)) ^ sample_id);
        SeededRng::new(master_seed, s)
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn generator(&self) -> ChaCha8Rng {
        let mut g = ChaCha8Rng::seed_from_u64(self.master_seed);
        g.set_stream(self.stream_id);
        g
    }
}

/// Standard complex normal: real and imaginary parts independent with
/// variance 1/2.
fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Draws `H = X X^* / nu` with `X` an `N x (N + alpha)` matrix of iid
/// standard complex normals.
pub fn sample_lue(spec: &EnsembleSpec, rng: &SeededRng) -> Result<HermitianMatrix> {
    spec.validate()?;
    sample_lue_with(spec, &mut rng.generator())
}

pub(crate) fn sample_lue_with<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<HermitianMatrix> {
    let n = spec.n;
    let cols = n + spec.alpha();
    // row i of X is stored contiguously
    let x: Vec<Complex64> = (0..n * cols).map(|_| complex_normal(rng)).collect();
    let inv_nu = 1.0 / spec.nu();
    let mut h = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let xj = &x[j * cols..(j + 1) * cols];
        for i in j..n {
            let xi = &x[i * cols..(i + 1) * cols];
            let (mut re, mut im) = (0.0, 0.0);
            for (a, b) in xi.iter().zip(xj) {
                // a * conj(b)
                re += a.re * b.re + a.im * b.im;
                im += a.im * b.re - a.re * b.im;
            }
            let z = Complex64::new(re * inv_nu, if i == j { 0.0 } else { im * inv_nu });
            h.set(i, j, z);
            if i != j {
                h.set(j, i, z.conj());
            }
        }
    }
    Ok(HermitianMatrix::from_trusted(h))
}

/// Law of the right-hand side `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BLaw {
    /// iid complex Gaussian entries, normalized; uniform on the unit sphere.
    GaussianSphere,
    /// iid real uniform entries on `[-1, 1]`, normalized.
    #[default]
    UniformBox,
}

impl std::str::FromStr for BLaw {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian_sphere" => Ok(BLaw::GaussianSphere),
            "uniform_box" => Ok(BLaw::UniformBox),
            _ => Err(Error::InvalidSpec(format!("unknown b law {s:?}"))),
        }
    }
}

impl std::fmt::Display for BLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BLaw::GaussianSphere => "gaussian_sphere",
            BLaw::UniformBox => "uniform_box",
        })
    }
}

pub fn sample_unit_b(n: usize, law: BLaw, rng: &SeededRng) -> Result<ComplexVector> {
    sample_unit_b_with(n, law, &mut rng.generator())
}

pub(crate) fn sample_unit_b_with<R: Rng + ?Sized>(n: usize, law: BLaw, rng: &mut R) -> Result<ComplexVector> {
    if n == 0 {
        return Err(Error::InvalidSpec("N must be at least 1".into()));
    }
    loop {
        let v = match law {
            BLaw::GaussianSphere => ComplexVector::new((0..n).map(|_| complex_normal(rng)).collect()),
            BLaw::UniformBox => {
                ComplexVector::from_real(&(0..n).map(|_| rng.random_range(-1.0..=1.0)).collect::<Vec<f64>>())
            }
        };
        if v.norm() > 0.0 {
            return Ok(v.normalized());
        }
    }
}

/// Marchenko-Pastur(1) distribution function on `[0, 4]`, by quadrature.
/// With `x = u^2` the density integral becomes `(1/pi) int_0^sqrt(t) sqrt(4 - u^2) du`.
pub fn mp_cdf(t: f64) -> Result<f64> {
    if t.is_nan() {
        return Err(Error::Domain("NaN argument".into()));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    if t >= 4.0 {
        return Ok(1.0);
    }
    mp_cdf_u(t.sqrt())
}

fn mp_cdf_u(u: f64) -> Result<f64> {
    let f = |v: f64| (4.0 - v * v).max(0.0).sqrt();
    let opts = QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-14,
        ..Default::default()
    };
    Ok(adaptive(&f, 0.0, u, 4, opts)? / PI)
}

/// `zeta_j = min{t in [0, 4] : F(t) = j/k}` for `j = 1..=k`; `zeta_k = 4`.
pub fn mp_quantiles(k: usize, tol: f64) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol must be positive, got {tol}")));
    }
    let mut out = Vec::with_capacity(k);
    let mut lo_prev = 0.0;
    for j in 1..k {
        let target = j as f64 / k as f64;
        // bisection in u = sqrt(t), where F is Lipschitz with constant 2/pi
        let (mut lo, mut hi) = (lo_prev, 2.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = mp_cdf_u(mid)?;
            if (v - target).abs() <= 0.01 * tol && hi - lo <= 1e-15 {
                break;
            }
            if v < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let u = if (mp_cdf_u(lo)? - target).abs() <= (mp_cdf_u(hi)? - target).abs() { lo } else { hi };
        let err = (mp_cdf_u(u)? - target).abs();
        if err > tol {
            return Err(Error::Quadrature {
                lo: 0.0,
                hi: u * u,
                evaluations: 200,
                error: err,
            });
        }
        lo_prev = u;
        out.push(u * u);
    }
    out.push(4.0);
    Ok(out)
}

/// Which index range the clustered spectrum uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusterConvention {
    /// `j in 0..k` with the row `j = 0` all zeros: `m k` values, `m` zeros.
    #[default]
    ZeroRow,
    /// `j in 0..=k`: the zero row plus clusters around every `zeta_1..zeta_k`,
    /// `m (k + 1)` values.
    ExtraZeroRow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSpec {
    pub m: usize,
    pub k: usize,
    /// Cluster width; `None` means `1 / (10 k^2)`.
    pub spread: Option<f64>,
    pub convention: ClusterConvention,
}

impl ClusterSpec {
    pub fn new(m: usize, k: usize) -> Self {
        ClusterSpec {
            m,
            k,
            spread: None,
            convention: ClusterConvention::default(),
        }
    }

    pub fn spread(&self) -> f64 {
        self.spread.unwrap_or(1.0 / (10.0 * (self.k * self.k) as f64))
    }
}

/// Diagonal clustered spectrum: `lambda_{l,0} = 0` and
/// `lambda_{l,j} = zeta_j + ((l - floor(m/2)) / m) * spread` for `l = 1..=m`.
pub fn cluster_matrix(spec: &ClusterSpec) -> Result<Spectrum> {
    let (m, k) = (spec.m, spec.k);
    if m == 0 || k == 0 {
        return Err(Error::InvalidSpec(format!("clusters need m, k >= 1 (got {m}, {k})")));
    }
    let spread = spec.spread();
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::InvalidSpec(format!("spread must be finite and nonnegative, got {spread}")));
    }
    let zeta = mp_quantiles(k, 1e-12)?;
    let j_max = match spec.convention {
        ClusterConvention::ZeroRow => k - 1,
        ClusterConvention::ExtraZeroRow => k,
    };
    let mut values = Vec::with_capacity(m * (j_max + 1));
    values.extend(std::iter::repeat_n(0.0, m));
    for z in &zeta[..j_max] {
        for l in 1..=m {
            let offset = (l as f64 - (m / 2) as f64) / m as f64;
            let v = z + offset * spread;
            if v < 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "spread {spread} pushes a cluster value below zero ({v:e})"
                )));
            }
            values.push(v);
        }
    }
    Spectrum::from_eigenvalues(values)
}

/// The deterministic part `A` of `A + sigma^2 H`.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseOperator {
    Zero,
    /// `diag(values)`; since `H` is unitarily invariant, any `A` may be
    /// replaced by its eigenvalues without changing the law of the result.
    Diagonal(Vec<f64>),
    Dense(HermitianMatrix),
}

impl BaseOperator {
    fn check_dim(&self, n: usize) -> Result<()> {
        let got = match self {
            BaseOperator::Zero => return Ok(()),
            BaseOperator::Diagonal(d) => d.len(),
            BaseOperator::Dense(m) => m.dim(),
        };
        if got != n {
            return Err(Error::Dimension { expected: n, got });
        }
        Ok(())
    }
}

/// Eigenvalues of `A + sigma^2 H`, or of `H` when `sigma = inf`, ascending.
pub fn perturbed_system(base: &BaseOperator, spec: &EnsembleSpec, rng: &SeededRng) -> Result<Spectrum> {
    spec.validate()?;
    perturbed_system_with(base, spec, &mut rng.generator())
}

pub(crate) fn perturbed_system_with<R: Rng + ?Sized>(
    base: &BaseOperator,
    spec: &EnsembleSpec,
    rng: &mut R,
) -> Result<Spectrum> {
    base.check_dim(spec.n)?;
    let h = sample_lue_with(spec, rng)?;
    let m = if spec.is_noise_only() {
        h
    } else {
        let s2 = spec.sigma * spec.sigma;
        match base {
            BaseOperator::Zero => h.scaled(s2),
            BaseOperator::Diagonal(d) => h.scaled(s2).add_diagonal(d)?,
            BaseOperator::Dense(a) => a.add_scaled(s2, &h)?,
        }
    };
    hermitian_eigen(&m, false)
}

/// A Haar-distributed unitary, by QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal absorbed.
pub fn haar_unitary(n: usize, rng: &SeededRng) -> ComplexMatrix {
    let mut g = rng.generator();
    let entries: Vec<Complex64> = (0..n * n).map(|_| complex_normal(&mut g)).collect();
    let mut q = ComplexMatrix::from_col_major(n, n, entries).expect("square");
    // modified Gram-Schmidt, twice for stability
    for j in 0..n {
        for _ in 0..2 {
            for p in 0..j {
                let proj: Complex64 = q
                    .column(p)
                    .iter()
                    .zip(q.column(j))
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let qp: Vec<Complex64> = q.column(p).to_vec();
                for (x, a) in q.column_mut(j).iter_mut().zip(&qp) {
                    *x -= a * proj;
                }
            }
        }
        let norm = crate::linalg::l2_norm(q.column(j));
        q.column_mut(j).iter_mut().for_each(|x| *x /= norm);
    }
    q
}

/// A random Hermitian positive definite matrix `U diag(lambda) U^*` with
/// Haar `U`.
pub fn hermitian_with_spectrum(lambda: &[f64], rng: &SeededRng) -> Result<HermitianMatrix> {
    let n = lambda.len();
    let u = haar_unitary(n, rng);
    let m = HermitianMatrix::from_lower_fn(n, |i, j| {
        (0..n).map(|k| u.get(i, k) * lambda[k] * u.get(j, k).conj()).sum()
    });
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_of(100, 0.5, 1.0).unwrap(), 20);
        assert_eq!(alpha_of(100, 1.0 / 3.0, 1.0).unwrap(), 9);
        for gamma in [0.1, 0.5, 1.0] {
            assert_eq!(alpha_of(1, gamma, 1.0).unwrap(), 2);
        }
        assert_eq!(alpha_of(400, 0.5, 1.0).unwrap(), 40);
        assert!(alpha_of(0, 0.5, 1.0).is_err());
        assert!(alpha_of(10, 0.0, 1.0).is_err());
        assert!(alpha_of(10, 0.5, -1.0).is_err());
    }

    #[test]
    fn derived_quantities() {
        let s = EnsembleSpec::new(100, 0.5, 1.0, f64::INFINITY).unwrap();
        assert_eq!(s.nu(), 442.0);
        assert_eq!(s.m_half(), 110.5);
        assert_eq!(s.inv_sigma_sq(), 0.0);
        assert!(EnsembleSpec::new(10, 0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = SeededRng::for_sample(7, 100, 3);
        let b = SeededRng::for_sample(7, 100, 3);
        let c = SeededRng::for_sample(7, 100, 4);
        let x: u64 = a.generator().random();
        assert_eq!(x, b.generator().random::<u64>());
        assert_ne!(x, c.generator().random::<u64>());
        assert_ne!(a.stream_id, SeededRng::for_sample(7, 200, 3).stream_id);
    }

    #[test]
    fn lue_sample_is_hermitian_psd() {
        let spec = EnsembleSpec::new(12, 0.5, 1.0, f64::INFINITY).unwrap();
        let h = sample_lue(&spec, &SeededRng::new(1, 2)).unwrap();
        assert_eq!(h.dim(), 12);
        for i in 0..12 {
            assert_eq!(h.get(i, i).im, 0.0);
            for j in 0..12 {
                assert_eq!(h.get(i, j), h.get(j, i).conj());
            }
        }
        let s = hermitian_eigen(&h, false).unwrap();
        assert!(s.lambda_min() > 0.0);
    }

    #[test]
    fn lue_trace_mean() {
        // E tr(X X^*) = N (N + alpha); N = 20 with alpha = 8 needs c = 4/5
        let spec = EnsembleSpec::new(20, 0.5, 0.8, f64::INFINITY).unwrap();
        assert_eq!(spec.alpha(), 8);
        let traces: Vec<f64> = (0..500)
            .map(|i| sample_lue(&spec, &SeededRng::for_sample(11, 20, i)).unwrap().trace() * spec.nu())
            .collect();
        let mean = traces.iter().sum::<f64>() / 500.0;
        let var = traces.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / 499.0;
        let se = (var / 500.0).sqrt();
        assert!((mean - 560.0).abs() <= 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn unit_b_examples() {
        for law in [BLaw::GaussianSphere, BLaw::UniformBox] {
            for i in 0..20 {
                let b = sample_unit_b(7, law, &SeededRng::new(3, i)).unwrap();
                assert!((b.norm() - 1.0).abs() < 1e-14);
            }
        }
        let b = sample_unit_b(1, BLaw::UniformBox, &SeededRng::new(5, 0)).unwrap();
        assert!((b[0].norm() - 1.0).abs() < 1e-15 && b[0].im == 0.0);
        assert_eq!("gaussian_sphere".parse::<BLaw>().unwrap(), BLaw::GaussianSphere);
        assert!("box".parse::<BLaw>().is_err());
    }

    #[test]
    fn gaussian_sphere_is_exchangeable() {
        let draws: Vec<f64> = (0..10_000)
            .map(|i| sample_unit_b(10, BLaw::GaussianSphere, &SeededRng::new(9, i)).unwrap()[0].norm_sqr())
            .collect();
        let mean = draws.iter().sum::<f64>() / 1e4;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 9999.0;
        assert!((mean - 0.1).abs() <= 3.0 * (var / 1e4).sqrt(), "{mean}");
    }

    // closed form of the Marchenko-Pastur(1) distribution function, used as oracle
    fn mp_cdf_closed(t: f64) -> f64 {
        let th = (t.sqrt() / 2.0).asin();
        (4.0 * th + 2.0 * (2.0 * th).sin()) / (2.0 * PI)
    }

    #[test]
    fn mp_cdf_matches_closed_form() {
        for t in [1e-8, 1e-3, 0.5, 1.0, 2.0, 3.9, 3.999999] {
            assert!((mp_cdf(t).unwrap() - mp_cdf_closed(t)).abs() < 1e-13, "{t}");
        }
        assert_eq!(mp_cdf(4.0).unwrap(), 1.0);
        assert_eq!(mp_cdf(-1.0).unwrap(), 0.0);
    }

    #[test]
    fn mp_quantile_examples() {
        let z = mp_quantiles(2, 1e-12).unwrap();
        assert_eq!(z[1], 4.0);
        assert!((mp_cdf_closed(z[0]) - 0.5).abs() < 1e-12);
        // frozen from the closed form: theta + sin(2 theta)/2 = pi/4
        assert!((z[0] - 0.6527759416335704).abs() < 1e-11, "{}", z[0]);

        let z = mp_quantiles(50, 1e-12).unwrap();
        assert!(z.windows(2).all(|w| w[0] < w[1]));
        for (j, t) in z.iter().enumerate() {
            assert!((mp_cdf_closed(*t) - (j + 1) as f64 / 50.0).abs() < 1e-11);
        }
        assert!(mp_quantiles(0, 1e-12).is_err());
    }

    #[test]
    fn cluster_two_by_two() {
        let z1 = mp_quantiles(2, 1e-12).unwrap()[0];
        let s = cluster_matrix(&ClusterSpec::new(2, 2)).unwrap();
        let want = [0.0, 0.0, z1, z1 + 1.0 / 80.0];
        for (a, b) in s.eigenvalues().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn cluster_counts() {
        let spec = ClusterSpec::new(6, 5);
        let s = cluster_matrix(&spec).unwrap();
        assert_eq!(s.len(), 30);
        assert_eq!(s.eigenvalues().iter().filter(|&&x| x == 0.0).count(), 6);
        assert!(s.lambda_max() <= 4.0 + spec.spread() / 2.0);

        let alt = ClusterSpec {
            convention: ClusterConvention::ExtraZeroRow,
            ..spec
        };
        assert_eq!(cluster_matrix(&alt).unwrap().len(), 36);

        let wide = ClusterSpec {
            spread: Some(10.0),
            ..spec
        };
        assert!(matches!(cluster_matrix(&wide), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn noise_only_matches_unit_sigma_on_zero_base() {
        let rng = SeededRng::new(4, 4);
        let inf = EnsembleSpec::new(15, 0.5, 1.0, f64::INFINITY).unwrap();
        let one = EnsembleSpec { sigma: 1.0, ..inf };
        let a = perturbed_system(&BaseOperator::Zero, &inf, &rng).unwrap();
        let b = perturbed_system(&BaseOperator::Zero, &one, &rng).unwrap();
        assert_eq!(a.eigenvalues(), b.eigenvalues());
    }

    #[test]
    fn perturbation_respects_weyl_and_shift() {
        let spec = EnsembleSpec::new(16, 0.5, 1.0, 0.3).unwrap();
        let base: Vec<f64> = (0..16).map(|i| 0.25 * i as f64).collect();
        for i in 0..5 {
            let rng = SeededRng::new(8, i);
            let s = perturbed_system(&BaseOperator::Diagonal(base.clone()), &spec, &rng).unwrap();
            let h = perturbed_system(&BaseOperator::Zero, &spec, &rng).unwrap();
            assert!(s.lambda_min() >= h.lambda_min() - 1e-10);
            let shifted = perturbed_system(&BaseOperator::Diagonal(vec![1.0; 16]), &spec, &rng).unwrap();
            assert!(shifted.lambda_min() >= 1.0 - 1e-12);
        }
        let wrong = BaseOperator::Diagonal(vec![1.0; 3]);
        assert!(perturbed_system(&wrong, &spec, &SeededRng::new(0, 0)).is_err());
    }

    #[test]
    fn dense_and_diagonal_bases_agree() {
        let spec = EnsembleSpec::new(10, 0.5, 1.0, 0.5).unwrap();
        let d: Vec<f64> = (0..10).map(|i| 1.0 + i as f64).collect();
        let rng = SeededRng::new(2, 2);
        let a = perturbed_system(&BaseOperator::Diagonal(d.clone()), &spec, &rng).unwrap();
        let b = perturbed_system(&BaseOperator::Dense(HermitianMatrix::from_real_diagonal(&d)), &spec, &rng).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let u = haar_unitary(9, &SeededRng::new(1, 1));
        assert!(u.unitarity_defect() < 1e-13);
        let m = hermitian_with_spectrum(&[1.0, 2.0, 3.0], &SeededRng::new(1, 2)).unwrap();
        assert!((m.trace() - 6.0).abs() < 1e-13);
    }
}
