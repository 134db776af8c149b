use super::{ComplexMatrix, HermitianMatrix};
use crate::{Complex64, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Eigenvalues in ascending order, optionally with the unitary `U` such
/// that `M = U diag(lambda) U^*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    unitary: Option<ComplexMatrix>,
}

impl Spectrum {
    /// A diagonal spectrum; values are sorted ascending.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if let Some(bad) = eigenvalues.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec(format!("non-finite eigenvalue {bad}")));
        }
        eigenvalues.sort_by(f64::total_cmp);
        Ok(Spectrum {
            eigenvalues,
            unitary: None,
        })
    }

    /// Pairs eigenvalues with eigenvector columns, sorting both ascending.
    pub fn with_unitary(eigenvalues: Vec<f64>, unitary: ComplexMatrix) -> Result<Self> {
        let n = eigenvalues.len();
        if unitary.rows() != n || unitary.cols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: unitary.cols(),
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let sorted: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
        let u = ComplexMatrix::from_fn(n, n, |i, j| unitary.get(i, order[j]));
        Ok(Spectrum {
            eigenvalues: sorted,
            unitary: Some(u),
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn unitary(&self) -> Option<&ComplexMatrix> {
        self.unitary.as_ref()
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    /// `lambda_max / lambda_min`; infinite when the spectrum is not positive.
    pub fn condition_number(&self) -> f64 {
        let lo = self.lambda_min();
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            self.lambda_max() / lo
        }
    }

    /// Drops the unitary, keeping eigenvalues only.
    pub fn eigenvalues_only(&self) -> Spectrum {
        Spectrum {
            eigenvalues: self.eigenvalues.clone(),
            unitary: None,
        }
    }

    /// `U diag(lambda) U^*`, if the unitary is present.
    pub fn reconstruct(&self) -> Option<HermitianMatrix> {
        let u = self.unitary.as_ref()?;
        let n = self.len();
        Some(HermitianMatrix::from_lower_fn(n, |i, j| {
            (0..n)
                .map(|k| u.get(i, k) * u.get(j, k).conj() * self.eigenvalues[k])
                .sum()
        }))
    }
}

/// Full Hermitian eigendecomposition.
///
/// Householder reflections reduce `M` to Hermitian tridiagonal form, a
/// diagonal unitary rotates the off-diagonal to real nonnegative values, and
/// implicit-shift QL diagonalizes the real tridiagonal matrix. With
/// `want_vectors = false` only eigenvalues are computed (`O(N^2)` after the
/// `O(N^3)` reduction).
pub fn hermitian_eigen(m: &HermitianMatrix, want_vectors: bool) -> Result<Spectrum> {
    let n = m.dim();
    if n == 0 {
        return Spectrum::from_eigenvalues(Vec::new());
    }
    let mut a = m.clone().into_matrix();
    let (diag, offdiag, taus) = tridiagonalize(&mut a);

    let mut d = diag;
    let mut e: Vec<f64> = offdiag.iter().map(|z| z.norm()).collect();
    e.push(0.0);

    if !want_vectors {
        tridiagonal_ql(&mut d, &mut e, None)?;
        return Spectrum::from_eigenvalues(d);
    }

    // Phases d_{k+1} = d_k e_k / |e_k| make D^* T D real.
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    for k in 0..n.saturating_sub(1) {
        let ek = offdiag[k];
        let r = ek.norm();
        phases[k + 1] = if r > 0.0 { phases[k] * (ek / r) } else { phases[k] };
    }

    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i + i * n] = 1.0;
    }
    tridiagonal_ql(&mut d, &mut e, Some(&mut z))?;

    let q = accumulate_reflectors(&a, &taus);
    // U = Q D Z
    let mut u = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let out = u.column_mut(j);
        for k in 0..n {
            let zkj = z[k + j * n];
            if zkj == 0.0 {
                continue;
            }
            let coef = phases[k] * zkj;
            for (o, qik) in out.iter_mut().zip(q.column(k)) {
                *o += qik * coef;
            }
        }
    }
    Spectrum::with_unitary(d, u)
}

/// Reduces `a` (full Hermitian storage, column-major) in place. Only the
/// lower triangle is referenced. Returns the real diagonal, the complex
/// subdiagonal and the reflector scalars; reflector vectors are left in the
/// strictly lower part of `a` below the subdiagonal (with the leading
/// component stored separately as the returned `taus.1`).
fn tridiagonalize(a: &mut ComplexMatrix) -> (Vec<f64>, Vec<Complex64>, Vec<(f64, Complex64)>) {
    let n = a.rows();
    let mut offdiag = Vec::with_capacity(n.saturating_sub(1));
    let mut taus = Vec::with_capacity(n.saturating_sub(1));
    let mut p = vec![ZERO; n];

    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        // x = a[k+1.., k]
        let (xnorm, x0) = {
            let col = &a.column(k)[k + 1..];
            (super::l2_norm(col), col[0])
        };
        if m == 1 || xnorm == 0.0 {
            // nothing to annihilate
            offdiag.push(x0);
            taus.push((0.0, ZERO));
            continue;
        }
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        let v0 = x0 - alpha;
        // v = x - alpha e1; v^* v = 2 |x|^2 + 2 |x0| |x|
        let vtv = 2.0 * xnorm * xnorm + 2.0 * x0.norm() * xnorm;
        let tau = 2.0 / vtv;
        {
            let col = a.column_mut(k);
            col[k + 1] = v0;
        }
        let v: Vec<Complex64> = a.column(k)[k + 1..].to_vec();

        // p = tau * B v with B = a[k+1.., k+1..], using the lower triangle.
        let p = &mut p[..m];
        p.iter_mut().for_each(|x| *x = ZERO);
        for j in 0..m {
            let col = &a.column(k + 1 + j)[k + 1..];
            let vj = v[j];
            let mut s = ZERO;
            for i in j + 1..m {
                let bij = col[i];
                p[i] += bij * vj;
                s += bij.conj() * v[i];
            }
            p[j] += col[j] * vj + s;
        }
        let mut vp = ZERO;
        for (pi, vi) in p.iter_mut().zip(&v) {
            *pi *= tau;
            vp += vi.conj() * *pi;
        }
        // w = p - (tau/2)(v^* p) v, with v^* p real
        let kf = 0.5 * tau * vp.re;
        let w: Vec<Complex64> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kf).collect();

        // B -= v w^* + w v^*, lower triangle only
        for j in 0..m {
            let cwj = w[j].conj();
            let cvj = v[j].conj();
            let col = &mut a.column_mut(k + 1 + j)[k + 1..];
            for i in j..m {
                col[i] -= v[i] * cwj + w[i] * cvj;
            }
            col[j].im = 0.0;
        }
        offdiag.push(alpha);
        taus.push((tau, v0));
    }
    let diag = (0..n).map(|i| a.get(i, i).re).collect();
    (diag, offdiag, taus)
}

/// Forms `Q = H_0 H_1 ... H_{n-2}` from the reflectors stored by
/// [`tridiagonalize`].
fn accumulate_reflectors(a: &ComplexMatrix, taus: &[(f64, Complex64)]) -> ComplexMatrix {
    let n = a.rows();
    let mut q = ComplexMatrix::identity(n);
    for k in (0..taus.len()).rev() {
        let (tau, v0) = taus[k];
        if tau == 0.0 {
            continue;
        }
        let mut v: Vec<Complex64> = a.column(k)[k + 1..].to_vec();
        v[0] = v0;
        // Q[k+1.., k+1..] -= tau v (v^* Q[k+1.., k+1..])
        for j in k + 1..n {
            let col = &mut q.column_mut(j)[k + 1..];
            let s: Complex64 = v.iter().zip(col.iter()).map(|(vi, qi)| vi.conj() * qi).sum();
            if s == ZERO {
                continue;
            }
            let s = s * tau;
            for (qi, vi) in col.iter_mut().zip(&v) {
                *qi -= vi * s;
            }
        }
    }
    q
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix with diagonal `d`
/// and subdiagonal `e` (`e[i]` couples `i` and `i+1`; `e[n-1]` is scratch).
/// When `z` is given (column-major `n x n`), the rotations are accumulated
/// into it. Total iterations are capped at `30 n`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    let cap = 30 * n.max(1);
    let mut total = 0usize;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            total += 1;
            if total > cap {
                return Err(Error::NoConvergence {
                    iterations: total,
                    index: l,
                    offdiag: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (left, right) = z.split_at_mut((i + 1) * n);
                    let zi = &mut left[i * n..];
                    let zi1 = &mut right[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
