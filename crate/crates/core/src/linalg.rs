//! Deterministic dense solvers and diagnostics.
//!
//! Symmetric positive definite systems go through a Cholesky factorization;
//! rank queries and the explicit inverse used for convergence diagnostics go
//! through a one-sided Jacobi SVD, which stays accurate for the very
//! ill-conditioned matrices those diagnostics exist to catch.

use thiserror::Error;

use crate::matrix::{DenseMatrix, MatrixError};
use crate::rng::RngStream;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error(transparent)]
    Shape(#[from] MatrixError),
    #[error("matrix is not positive definite (pivot {pivot:e} at column {col})")]
    NotPositiveDefinite { col: usize, pivot: f64 },
    #[error("singular normal matrix; a finite ridge factor is required")]
    SingularNormal,
    #[error("ridge factor must be positive, got {0}")]
    InvalidRidge(f64),
    #[error("jacobi svd did not converge within {0} sweeps")]
    SvdNoConvergence(usize),
    #[error("matrix with zero singular value cannot be inverted")]
    SingularInverse,
}

/// Entry distribution for [`random_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomScheme {
    /// i.i.d. uniform on `[-1, 1]`.
    Uniform,
    /// i.i.d. standard normal.
    Normal,
}

/// Seeded random matrix; entries are drawn row-major.
pub fn random_matrix<F: Scalar>(
    rng: &mut RngStream,
    rows: usize,
    cols: usize,
    scheme: RandomScheme,
) -> DenseMatrix<F> {
    DenseMatrix::from_fn(rows, cols, |_, _| {
        F::from_f64_lossy(match scheme {
            RandomScheme::Uniform => rng.uniform(-1.0, 1.0),
            RandomScheme::Normal => rng.normal(),
        })
    })
}

/// Lower-triangular Cholesky factor of an SPD matrix.
pub struct CholeskyFactor<F> {
    lower: DenseMatrix<F>,
}

/// Factors the lower triangle of `k` (assumed symmetric).
pub fn cholesky<F: Scalar>(k: &DenseMatrix<F>) -> Result<CholeskyFactor<F>, LinalgError> {
    if !k.is_square() {
        return Err(MatrixError::NotSquare { rows: k.rows(), cols: k.cols() }.into());
    }
    let n = k.rows();
    let mut l = k.clone();
    for j in 0..n {
        let (head, tail) = l.data_split_mut((j + 1) * n);
        let row_j = &mut head[j * n..];
        let mut d = row_j[j];
        for &v in &row_j[..j] {
            d -= v * v;
        }
        if d <= F::zero() || !d.is_finite() {
            return Err(LinalgError::NotPositiveDefinite {
                col: j,
                pivot: d.to_f64().unwrap_or(f64::NAN),
            });
        }
        let ljj = d.sqrt();
        row_j[j] = ljj;
        let inv = F::one() / ljj;
        for row_i in tail.chunks_exact_mut(n) {
            let mut s = row_i[j];
            for (&a, &b) in row_i[..j].iter().zip(&row_j[..j]) {
                s -= a * b;
            }
            row_i[j] = s * inv;
        }
    }
    // Zero the strict upper triangle so the factor is self-describing.
    for i in 0..n {
        for jj in (i + 1)..n {
            l.set(i, jj, F::zero());
        }
    }
    Ok(CholeskyFactor { lower: l })
}

impl<F: Scalar> CholeskyFactor<F> {
    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    /// Solves `K x = b` for all columns of `b` at once.
    pub fn solve(&self, b: &DenseMatrix<F>) -> Result<DenseMatrix<F>, LinalgError> {
        let n = self.dim();
        if b.rows() != n {
            return Err(MatrixError::ShapeMismatch {
                op: "cholesky_solve",
                lhs_rows: n,
                lhs_cols: n,
                rhs_rows: b.rows(),
                rhs_cols: b.cols(),
            }
            .into());
        }
        let m = b.cols();
        let l = &self.lower;
        let mut y = b.clone();
        // forward: L y = b
        for i in 0..n {
            let li = l.row(i);
            let (above, current) = y.data_split_mut(i * m);
            let yrow = &mut current[..m];
            for k in 0..i {
                let lik = li[k];
                if lik != F::zero() {
                    let yk = &above[k * m..(k + 1) * m];
                    for (v, &w) in yrow.iter_mut().zip(yk) {
                        *v -= lik * w;
                    }
                }
            }
            let inv = F::one() / li[i];
            for v in yrow.iter_mut() {
                *v = *v * inv;
            }
        }
        // backward: Lᵀ x = y
        for i in (0..n).rev() {
            let (head, tail) = y.data_split_mut((i + 1) * m);
            let xrow = &mut head[i * m..];
            for k in (i + 1)..n {
                let lki = l.get(k, i);
                if lki != F::zero() {
                    let xk = &tail[(k - i - 1) * m..(k - i) * m];
                    for (v, &w) in xrow.iter_mut().zip(xk) {
                        *v -= lki * w;
                    }
                }
            }
            let inv = F::one() / l.get(i, i);
            for v in xrow.iter_mut() {
                *v = *v * inv;
            }
        }
        Ok(y)
    }
}

/// Solves `K s = b` for symmetric positive definite `K`.
pub fn spd_solve<F: Scalar>(
    k: &DenseMatrix<F>,
    b: &DenseMatrix<F>,
) -> Result<DenseMatrix<F>, LinalgError> {
    cholesky(k)?.solve(b)
}

/// Ridge-regularized least squares: `(HᵀH + I/c)⁻¹ HᵀT`.
///
/// `c = +inf` drops the ridge term and solves the plain normal equations,
/// failing with [`LinalgError::SingularNormal`] when `HᵀH` is rank deficient.
pub fn ridge_solve<F: Scalar>(
    h: &DenseMatrix<F>,
    t: &DenseMatrix<F>,
    c: F,
) -> Result<DenseMatrix<F>, LinalgError> {
    if h.rows() != t.rows() {
        return Err(MatrixError::ShapeMismatch {
            op: "ridge_solve",
            lhs_rows: h.rows(),
            lhs_cols: h.cols(),
            rhs_rows: t.rows(),
            rhs_cols: t.cols(),
        }
        .into());
    }
    if !(c > F::zero()) {
        return Err(LinalgError::InvalidRidge(c.to_f64().unwrap_or(f64::NAN)));
    }
    let mut normal = h.gram();
    if c.is_finite() {
        normal.add_diag(F::one() / c);
    } else {
        // Cholesky breakdown on exactly-singular systems depends on rounding
        // luck, so the unregularized path checks rank explicitly.
        if numeric_rank(&normal, None)? < normal.rows() {
            return Err(LinalgError::SingularNormal);
        }
    }
    let rhs = h.t_mul(t)?;
    match spd_solve(&normal, &rhs) {
        Ok(beta) => Ok(beta),
        Err(LinalgError::NotPositiveDefinite { .. }) if !c.is_finite() => {
            Err(LinalgError::SingularNormal)
        }
        Err(e) => Err(e),
    }
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// One-sided Jacobi SVD working state. `w` holds the rotated columns of the
/// input as rows; `v` accumulates the right singular vectors as rows.
struct JacobiSvd<F> {
    w: DenseMatrix<F>,
    v: DenseMatrix<F>,
}

fn jacobi<F: Scalar>(m: &DenseMatrix<F>) -> Result<JacobiSvd<F>, LinalgError> {
    // Work on the taller orientation so rotations act on long contiguous rows.
    let a = if m.rows() >= m.cols() { m.clone() } else { m.transpose() };
    let n = a.cols();
    let mut w = a.transpose(); // n x rows; row i = column i of a
    let mut v = DenseMatrix::<F>::identity(n);
    let tol = F::epsilon();
    for sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let wp = w.row(p);
                    let wq = w.row(q);
                    let mut alpha = F::zero();
                    let mut beta = F::zero();
                    let mut gamma = F::zero();
                    for (&x, &y) in wp.iter().zip(wq) {
                        alpha += x * x;
                        beta += y * y;
                        gamma += x * y;
                    }
                    (alpha, beta, gamma)
                };
                if gamma == F::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = {
                    let r = (F::one() + zeta * zeta).sqrt();
                    if zeta >= F::zero() {
                        F::one() / (zeta + r)
                    } else {
                        F::one() / (zeta - r)
                    }
                };
                let cos = F::one() / (F::one() + t * t).sqrt();
                let sin = cos * t;
                rotate_rows(&mut w, p, q, cos, sin);
                rotate_rows(&mut v, p, q, cos, sin);
            }
        }
        if !rotated {
            return Ok(JacobiSvd { w, v });
        }
        if sweep == JACOBI_MAX_SWEEPS - 1 {
            return Err(LinalgError::SvdNoConvergence(JACOBI_MAX_SWEEPS));
        }
    }
    Ok(JacobiSvd { w, v })
}

fn rotate_rows<F: Scalar>(m: &mut DenseMatrix<F>, p: usize, q: usize, cos: F, sin: F) {
    let cols = m.cols();
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    let (head, tail) = m.data_split_mut((lo + 1) * cols);
    let row_lo = &mut head[lo * cols..];
    let row_hi = &mut tail[(hi - lo - 1) * cols..(hi - lo) * cols];
    let (rp, rq) = if p < q { (row_lo, row_hi) } else { (row_hi, row_lo) };
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = cos * xp - sin * yq;
        *y = sin * xp + cos * yq;
    }
}

/// Singular values in descending order.
pub fn singular_values<F: Scalar>(m: &DenseMatrix<F>) -> Result<Vec<F>, LinalgError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(Vec::new());
    }
    let svd = jacobi(m)?;
    let mut sv: Vec<F> =
        (0..svd.w.rows()).map(|i| svd.w.row(i).iter().map(|&x| x * x).sum::<F>().sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sv)
}

/// Number of singular values above `tol`; the default tolerance is
/// `max(rows, cols) * eps * sigma_max`.
pub fn numeric_rank<F: Scalar>(m: &DenseMatrix<F>, tol: Option<F>) -> Result<usize, LinalgError> {
    let sv = singular_values(m)?;
    let Some(&smax) = sv.first() else { return Ok(0) };
    let threshold = tol.unwrap_or_else(|| {
        F::from_usize(m.rows().max(m.cols())).expect("dims fit scalar") * F::epsilon() * smax
    });
    Ok(sv.iter().take_while(|&&s| s > threshold).count())
}

/// Explicit inverse of a symmetric matrix through its SVD.
///
/// Every singular value is inverted, no matter how small, so the result
/// faithfully exposes near-singularity instead of papering over it; that is
/// exactly what the rank-based convergence diagnostics need. Fails only when
/// a singular value is exactly zero.
pub fn sym_inverse<F: Scalar>(k: &DenseMatrix<F>) -> Result<DenseMatrix<F>, LinalgError> {
    if !k.is_square() {
        return Err(MatrixError::NotSquare { rows: k.rows(), cols: k.cols() }.into());
    }
    let n = k.rows();
    let svd = jacobi(k)?;
    // w row i = sigma_i * u_i ; inverse = sum_i v_i sigma_i^-2 (sigma_i u_i)^T
    let mut inv = DenseMatrix::<F>::zeros(n, n);
    for i in 0..n {
        let s2 = svd.w.row(i).iter().map(|&x| x * x).sum::<F>();
        if s2 == F::zero() {
            return Err(LinalgError::SingularInverse);
        }
        let weight = F::one() / s2;
        let vi = svd.v.row(i);
        let ui = svd.w.row(i);
        for r in 0..n {
            let vr = vi[r] * weight;
            if vr != F::zero() {
                let row = inv.row_mut(r);
                for (o, &u) in row.iter_mut().zip(ui) {
                    *o += vr * u;
                }
            }
        }
    }
    inv.symmetrize();
    Ok(inv)
}
