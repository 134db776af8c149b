use super::HermitianMatrix;
use crate::{Complex64, Error, Result};
use std::f64::consts::PI;

/// The `mk x mk` matrix `-(I_m (x) D_k + D_m (x) I_k)`, where `D_n` is the
/// `n x n` tridiagonal matrix with `-2` on the diagonal and `1` beside it.
/// Row `i * k + j` corresponds to grid point `(i, j)`.
pub fn kron_sum_laplacian(m: usize, k: usize) -> Result<HermitianMatrix> {
    if m == 0 || k == 0 {
        return Err(Error::InvalidSpec(format!("laplacian needs m, k >= 1 (got {m}, {k})")));
    }
    let n = m.checked_mul(k).ok_or_else(|| Error::InvalidSpec("m*k overflows".into()))?;
    Ok(HermitianMatrix::from_lower_fn(n, |r, c| {
        let (ri, rj) = (r / k, r % k);
        let (ci, cj) = (c / k, c % k);
        let v = if r == c {
            4.0
        } else if (ri == ci && rj.abs_diff(cj) == 1) || (rj == cj && ri.abs_diff(ci) == 1) {
            -1.0
        } else {
            0.0
        };
        Complex64::new(v, 0.0)
    }))
}

/// Eigenvalues of [`kron_sum_laplacian`] in ascending order:
/// `(2 - 2 cos(i pi/(m+1))) + (2 - 2 cos(j pi/(k+1)))`.
pub fn laplacian_spectrum(m: usize, k: usize) -> Result<Vec<f64>> {
    if m == 0 || k == 0 {
        return Err(Error::InvalidSpec(format!("laplacian needs m, k >= 1 (got {m}, {k})")));
    }
    let mu = |i: usize, n: usize| 2.0 - 2.0 * (i as f64 * PI / (n as f64 + 1.0)).cos();
    let mut out = Vec::with_capacity(m * k);
    for i in 1..=m {
        for j in 1..=k {
            out.push(mu(i, m) + mu(j, k));
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}
