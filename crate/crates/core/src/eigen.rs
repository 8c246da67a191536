//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use crate::error::{domain, Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 64;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub eigenvalues: Vec<T>,
    /// Eigenvector `i` is column `i`.
    pub eigenvectors: DenseMatrix<T>,
    pub sweeps: usize,
}

impl<T: Real> SymmetricEigen<T> {
    /// `V diag(f(λ)) Vᵀ`, assembled on the upper triangle and mirrored.
    pub fn spectral_map(&self, f: impl Fn(T) -> T) -> DenseMatrix<T> {
        let n = self.eigenvalues.len();
        let weights: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let kept: Vec<usize> = (0..n).filter(|&k| weights[k] != T::zero()).collect();
        // Rows of `vt` are the kept eigenvectors, so each entry is a contiguous dot product.
        let vt = DenseMatrix::from_fn(kept.len(), n, |r, i| self.eigenvectors[(i, kept[r])]);
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = T::zero();
                for (r, &k) in kept.iter().enumerate() {
                    acc = acc + weights[k] * vt[(r, i)] * vt[(r, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out.mirror_upper();
        out
    }
}

/// Row-cyclic Jacobi sweeps until the off-diagonal Frobenius norm is at most
/// `max(1e-12, 64·eps)·‖A‖_F`.
///
/// The rotation order is fixed, so results are reproducible bit for bit.
pub fn symmetric_eigen<T: Real>(a: &DenseMatrix<T>) -> Result<SymmetricEigen<T>> {
    if !a.is_square() {
        return domain("eigendecomposition needs a square matrix");
    }
    let n = a.rows();
    let scale = a.max_abs();
    if a.asymmetry() > T::lit(1e-12) * scale {
        return domain("eigendecomposition needs a symmetric matrix");
    }
    let mut m = a.clone();
    m.symmetrize();
    // Rows of `vt` are the eigenvectors being accumulated.
    let mut vt = DenseMatrix::identity(n);
    let target = T::lit(1e-12).max(T::epsilon() * T::lit(64.0)) * a.frobenius();
    let mut sweeps = 0;
    while off_diagonal_norm(&m) > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "Jacobi did not converge in {MAX_SWEEPS} sweeps (off-diagonal norm {})",
                off_diagonal_norm(&m)
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut vt, p, q);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));
    Ok(SymmetricEigen {
        eigenvalues: order.iter().map(|&i| m[(i, i)]).collect(),
        eigenvectors: DenseMatrix::from_fn(n, n, |r, c| vt[(order[c], r)]),
        sweeps,
    })
}

fn off_diagonal_norm<T: Real>(m: &DenseMatrix<T>) -> T {
    let n = m.rows();
    let mut acc = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            acc = acc + m[(i, j)] * m[(i, j)];
        }
    }
    (acc + acc).sqrt()
}

/// Annihilates `m[p][q]` with a plane rotation, in O(n).
fn rotate<T: Real>(m: &mut DenseMatrix<T>, vt: &mut DenseMatrix<T>, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == T::zero() {
        return;
    }
    let app = m[(p, p)];
    let aqq = m[(q, q)];
    let theta = (aqq - app) / (apq + apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
    let c = (t * t + T::one()).sqrt().recip();
    let s = t * c;
    let n = m.rows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        let new_p = c * akp - s * akq;
        let new_q = s * akp + c * akq;
        m[(k, p)] = new_p;
        m[(p, k)] = new_p;
        m[(k, q)] = new_q;
        m[(q, k)] = new_q;
    }
    m[(p, p)] = app - t * apq;
    m[(q, q)] = aqq + t * apq;
    m[(p, q)] = T::zero();
    m[(q, p)] = T::zero();
    for k in 0..n {
        let vp = vt[(p, k)];
        let vq = vt[(q, k)];
        vt[(p, k)] = c * vp - s * vq;
        vt[(q, k)] = s * vp + c * vq;
    }
}
