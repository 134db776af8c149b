//! Dense complex Hermitian linear algebra.
//!
//! Storage is dense and column-major throughout. The eigensolver reduces a
//! Hermitian matrix to real symmetric tridiagonal form with Householder
//! reflections and finishes with implicit-shift QL.

mod cholesky;
mod eigen;
mod laplacian;
mod matrix;

pub use cholesky::{Cholesky, Cx};
pub use eigen::{hermitian_eigen, Spectrum};
pub use laplacian::{kron_sum_laplacian, laplacian_spectrum};
pub use matrix::{ComplexMatrix, HermitianMatrix};

use crate::{Complex64, Error, Result};
use std::ops::Index;

/// A vector in `C^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        ComplexVector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        ComplexVector(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn from_real(entries: &[f64]) -> Self {
        ComplexVector(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The `i`-th standard basis vector of `C^n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    /// Euclidean norm, scaled to avoid overflow and underflow.
    pub fn norm(&self) -> f64 {
        l2_norm(&self.0)
    }

    /// Returns `self / ||self||`; the zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        ComplexVector(self.0.iter().map(|z| z / n).collect())
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl From<Vec<Complex64>> for ComplexVector {
    fn from(v: Vec<Complex64>) -> Self {
        ComplexVector(v)
    }
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    let scale = v
        .iter()
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0f64, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = v.iter().map(|z| (z / scale).norm_sqr()).sum();
    scale * s.sqrt()
}

/// `<u, v> = sum_i u_i conj(v_i)`.
pub fn inner(u: &ComplexVector, v: &ComplexVector) -> Result<Complex64> {
    if u.len() != v.len() {
        return Err(Error::Dimension {
            expected: u.len(),
            got: v.len(),
        });
    }
    Ok(u.0.iter().zip(&v.0).map(|(a, b)| a * b.conj()).sum())
}

/// A positive definite operator that can evaluate the quadratic forms
/// `<u, M u>` and `<u, M^-1 u>`.
pub trait PositiveOperator {
    fn dim(&self) -> usize;
    fn quadratic_form(&self, u: &ComplexVector) -> Result<f64>;
    fn inverse_quadratic_form(&self, u: &ComplexVector) -> Result<f64>;
}

impl PositiveOperator for HermitianMatrix {
    fn dim(&self) -> usize {
        HermitianMatrix::dim(self)
    }

    fn quadratic_form(&self, u: &ComplexVector) -> Result<f64> {
        let mu = self.matvec(u)?;
        Ok(inner(u, &mu)?.re)
    }

    fn inverse_quadratic_form(&self, u: &ComplexVector) -> Result<f64> {
        let chol = Cholesky::<f64>::factor(self)?;
        let y = chol.solve_lower(u.as_slice())?;
        Ok(y.iter().map(|z| z.norm_sqr()).sum())
    }
}

/// A spectrum acts as `U diag(lambda) U*` when it carries its unitary, and as
/// the diagonal matrix `diag(lambda)` otherwise.
impl PositiveOperator for Spectrum {
    fn dim(&self) -> usize {
        self.len()
    }

    fn quadratic_form(&self, u: &ComplexVector) -> Result<f64> {
        self.weighted_sum(u, |l| l)
    }

    fn inverse_quadratic_form(&self, u: &ComplexVector) -> Result<f64> {
        self.weighted_sum(u, |l| 1.0 / l)
    }
}

impl Spectrum {
    fn weighted_sum(&self, u: &ComplexVector, w: impl Fn(f64) -> f64) -> Result<f64> {
        if u.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: u.len(),
            });
        }
        if self.lambda_min() <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "lambda_min = {:e}",
                self.lambda_min()
            )));
        }
        let coords = match self.unitary() {
            Some(q) => q.adjoint_mul_vec(u.as_slice())?,
            None => u.as_slice().to_vec(),
        };
        Ok(coords
            .iter()
            .zip(self.eigenvalues())
            .map(|(z, &l)| w(l) * z.norm_sqr())
            .sum())
    }
}

/// `(||u||_w, ||u||_{w^-1})` with `||u||_w^2 = <u, M u>` and
/// `||u||_{w^-1}^2 = <u, M^-1 u>`.
pub fn weighted_norms<M: PositiveOperator + ?Sized>(m: &M, u: &ComplexVector) -> Result<(f64, f64)> {
    if u.len() != m.dim() {
        return Err(Error::Dimension {
            expected: m.dim(),
            got: u.len(),
        });
    }
    let inv = m.inverse_quadratic_form(u)?;
    let fwd = m.quadratic_form(u)?;
    Ok((fwd.max(0.0).sqrt(), inv.max(0.0).sqrt()))
}
