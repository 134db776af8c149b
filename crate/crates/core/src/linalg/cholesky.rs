use super::HermitianMatrix;
use crate::dd::Real;
use crate::{Complex64, Error, Result};
use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

/// A complex number over any [`Real`] scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cx<S> {
    pub re: S,
    pub im: S,
}

impl<S: Real> Cx<S> {
    #[inline]
    pub fn zero() -> Self {
        Cx {
            re: S::zero(),
            im: S::zero(),
        }
    }

    #[inline]
    pub fn from_c64(z: Complex64) -> Self {
        Cx {
            re: S::from_f64(z.re),
            im: S::from_f64(z.im),
        }
    }

    #[inline]
    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    #[inline]
    pub fn conj(self) -> Self {
        Cx {
            re: self.re,
            im: -self.im,
        }
    }

    #[inline]
    pub fn norm_sqr(self) -> S {
        self.re * self.re + self.im * self.im
    }

    #[inline]
    pub fn scale(self, s: S) -> Self {
        Cx {
            re: self.re * s,
            im: self.im * s,
        }
    }

    #[inline]
    pub fn scale_f64(self, s: f64) -> Self {
        Cx {
            re: self.re.scale(s),
            im: self.im.scale(s),
        }
    }

    /// `a * self` for a double-precision complex `a`.
    #[inline]
    pub fn mul_c64(self, a: Complex64) -> Self {
        Cx {
            re: self.re.scale(a.re) - self.im.scale(a.im),
            im: self.re.scale(a.im) + self.im.scale(a.re),
        }
    }
}

impl<S: Real> Add for Cx<S> {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        Cx {
            re: self.re + b.re,
            im: self.im + b.im,
        }
    }
}

impl<S: Real> Sub for Cx<S> {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        Cx {
            re: self.re - b.re,
            im: self.im - b.im,
        }
    }
}

impl<S: Real> Mul for Cx<S> {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        Cx {
            re: self.re * b.re - self.im * b.im,
            im: self.re * b.im + self.im * b.re,
        }
    }
}

impl<S: Real> AddAssign for Cx<S> {
    #[inline]
    fn add_assign(&mut self, b: Self) {
        self.re += b.re;
        self.im += b.im;
    }
}

impl<S: Real> SubAssign for Cx<S> {
    #[inline]
    fn sub_assign(&mut self, b: Self) {
        self.re -= b.re;
        self.im -= b.im;
    }
}

/// Cholesky factor `M = L L^*` of a Hermitian positive definite matrix,
/// computed in the scalar type `S`.
#[derive(Debug, Clone)]
pub struct Cholesky<S> {
    n: usize,
    // row-major lower triangle; diagonal stored as real in `re`
    l: Vec<Cx<S>>,
}

impl<S: Real> Cholesky<S> {
    pub fn factor(m: &HermitianMatrix) -> Result<Self> {
        let n = m.dim();
        let mut l = vec![Cx::<S>::zero(); n * n];
        for j in 0..n {
            let mut d = S::from_f64(m.get(j, j).re);
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if !(d.to_f64() > 0.0) {
                return Err(Error::NotPositiveDefinite(format!(
                    "Cholesky pivot {j} is {:e}",
                    d.to_f64()
                )));
            }
            let djj = d.sqrt();
            l[j * n + j] = Cx {
                re: djj,
                im: S::zero(),
            };
            for i in j + 1..n {
                let mut s = Cx::<S>::from_c64(m.get(i, j));
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = Cx {
                    re: s.re / djj,
                    im: s.im / djj,
                };
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `L y = b`; then `<b, M^-1 b> = ||y||^2`.
    pub fn solve_lower_cx(&self, b: &[Cx<S>]) -> Result<Vec<Cx<S>>> {
        if b.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: b.len(),
            });
        }
        let n = self.n;
        let mut y: Vec<Cx<S>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = b[i];
            for (k, yk) in y.iter().enumerate() {
                s -= self.l[i * n + k] * *yk;
            }
            let d = self.l[i * n + i].re;
            y.push(Cx {
                re: s.re / d,
                im: s.im / d,
            });
        }
        Ok(y)
    }

    pub fn solve_lower(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let bx: Vec<Cx<S>> = b.iter().map(|&z| Cx::from_c64(z)).collect();
        Ok(self
            .solve_lower_cx(&bx)?
            .into_iter()
            .map(Cx::to_c64)
            .collect())
    }

    /// `<b, M^-1 b>` in the factor's precision.
    pub fn inverse_quadratic_form(&self, b: &[Cx<S>]) -> Result<S> {
        let y = self.solve_lower_cx(b)?;
        let mut acc = S::zero();
        for z in y {
            acc += z.norm_sqr();
        }
        Ok(acc)
    }
}
