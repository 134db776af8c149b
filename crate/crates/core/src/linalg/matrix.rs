use super::ComplexVector;
use crate::{Complex64, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A general dense complex matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + i * n] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i + j * self.rows]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i + j * self.rows] = z;
    }

    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub(crate) fn column_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension {
                expected: self.cols,
                got: v.len(),
            });
        }
        let mut out = vec![ZERO; self.rows];
        for (j, &vj) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.column(j)) {
                *o += a * vj;
            }
        }
        Ok(out)
    }

    /// `self^* v`.
    pub fn adjoint_mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.rows {
            return Err(Error::Dimension {
                expected: self.rows,
                got: v.len(),
            });
        }
        Ok((0..self.cols)
            .map(|j| self.column(j).iter().zip(v).map(|(a, x)| a.conj() * x).sum())
            .collect())
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            for k in 0..self.cols {
                let b = other.get(k, j);
                if b == ZERO {
                    continue;
                }
                let a_col = &self.data[k * self.rows..(k + 1) * self.rows];
                let o_col = &mut out.data[j * self.rows..(j + 1) * self.rows];
                for (o, a) in o_col.iter_mut().zip(a_col) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn frobenius_norm(&self) -> f64 {
        super::l2_norm(&self.data)
    }

    /// `max_ij |(U^* U - I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.cols {
            for j in 0..self.cols {
                let s: Complex64 = self
                    .column(i)
                    .iter()
                    .zip(self.column(j))
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }
}

/// A dense complex Hermitian matrix. Construction validates the Hermitian
/// property and then stores an exactly Hermitian copy with a real diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
}

impl HermitianMatrix {
    /// Tolerance used to accept nearly Hermitian input:
    /// `max |M_ij - conj(M_ji)| <= 1e-10 (1 + max |M_ij|)`.
    pub const HERMITIAN_RTOL: f64 = 1e-10;

    pub fn from_col_major(n: usize, data: Vec<Complex64>) -> Result<Self> {
        let m = ComplexMatrix::from_col_major(n, n, data)?;
        Self::from_matrix(m)
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::Dimension {
                expected: m.rows,
                got: m.cols,
            });
        }
        let n = m.rows;
        let mut max_abs = 0.0f64;
        let mut max_dev = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let a = m.get(i, j);
                if !(a.re.is_finite() && a.im.is_finite()) {
                    return Err(Error::InvalidSpec(format!("non-finite entry at ({i}, {j})")));
                }
                max_abs = max_abs.max(a.norm());
                if i >= j {
                    max_dev = max_dev.max((a - m.get(j, i).conj()).norm());
                }
            }
        }
        let tolerance = Self::HERMITIAN_RTOL * (1.0 + max_abs);
        if max_dev > tolerance {
            return Err(Error::NotHermitian {
                max_deviation: max_dev,
                tolerance,
            });
        }
        Ok(Self::from_lower_fn(n, |i, j| {
            if i == j {
                Complex64::new(m.get(i, i).re, 0.0)
            } else {
                0.5 * (m.get(i, j) + m.get(j, i).conj())
            }
        }))
    }

    /// Builds the Hermitian matrix whose lower triangle (`i >= j`) is given by
    /// `f`; the upper triangle is filled by conjugation and the diagonal's
    /// imaginary part is dropped.
    pub fn from_lower_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let d = f(j, j);
            m.set(j, j, Complex64::new(d.re, 0.0));
            for i in j + 1..n {
                let z = f(i, j);
                m.set(i, j, z);
                m.set(j, i, z.conj());
            }
        }
        HermitianMatrix { inner: m }
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix {
            inner: ComplexMatrix::identity(n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix {
            inner: ComplexMatrix::zeros(n, n),
        }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m.set(i, i, Complex64::new(x, 0.0));
        }
        HermitianMatrix { inner: m }
    }

    /// Wraps storage already known to be exactly Hermitian.
    pub(crate) fn from_trusted(inner: ComplexMatrix) -> Self {
        debug_assert_eq!(inner.rows, inner.cols);
        HermitianMatrix { inner }
    }

    pub fn dim(&self) -> usize {
        self.inner.rows
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner.get(i, j)
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn matvec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        Ok(ComplexVector::new(self.inner.mul_vec(v.as_slice())?))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i).re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let data = self
            .inner
            .data
            .iter()
            .zip(&other.inner.data)
            .map(|(a, b)| a + b * s)
            .collect();
        Ok(HermitianMatrix {
            inner: ComplexMatrix {
                rows: self.dim(),
                cols: self.dim(),
                data,
            },
        })
    }

    pub fn scaled(&self, s: f64) -> HermitianMatrix {
        HermitianMatrix {
            inner: ComplexMatrix {
                rows: self.dim(),
                cols: self.dim(),
                data: self.inner.data.iter().map(|a| a * s).collect(),
            },
        }
    }

    /// Adds `d_i` to each diagonal entry.
    pub fn add_diagonal(&self, d: &[f64]) -> Result<HermitianMatrix> {
        if d.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: d.len(),
            });
        }
        let mut out = self.clone();
        for (i, &x) in d.iter().enumerate() {
            let z = out.inner.get(i, i);
            out.inner.set(i, i, z + x);
        }
        Ok(out)
    }

    pub(crate) fn into_matrix(self) -> ComplexMatrix {
        self.inner
    }
}
