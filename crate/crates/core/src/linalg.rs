//! Dense linear algebra for small Hermitian matrices.
//!
//! Eigenproblems here are at most 16×16, so a cyclic complex Jacobi sweep is
//! both accurate (small relative error on eigenvalues) and fast enough.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `A = U · diag(values) · U†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: DVector<f64>,
    /// Columns are the matching orthonormal eigenvectors.
    pub vectors: DMatrix<C64>,
}

/// Largest entry of `|A - A†|`.
pub fn hermiticity_defect(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

fn off_diagonal_norm2(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

/// Cyclic Jacobi eigensolver. The input is symmetrised as `(A + A†)/2`;
/// callers that care should check [`hermiticity_defect`] first.
pub fn hermitian_eigen(a: &DMatrix<C64>) -> HermitianEigen {
    assert!(a.is_square(), "eigensolve needs a square matrix");
    let n = a.nrows();
    let mut m = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let mut v = DMatrix::<C64>::identity(n, n);
    let scale = m.norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm2(&m).sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U restricted to (p,q): [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]]
                let upp = C64::new(c, 0.0);
                let upq = C64::new(s, 0.0);
                let uqp = -phase.conj() * s;
                let uqq = phase.conj() * c;

                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * upp + akq * uqp;
                    m[(k, q)] = akp * upq + akq * uqq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * upp + vkq * uqp;
                    v[(k, q)] = vkp * upq + vkq * uqq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
                    m[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = DVector::from_iterator(n, order.iter().map(|&i| m[(i, i)].re));
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    HermitianEigen { values, vectors }
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(a: &DMatrix<C64>) -> DVector<f64> {
    hermitian_eigen(a).values
}

/// Hermiticity tolerance scaled to the matrix size.
fn hermitian_tol(a: &DMatrix<C64>) -> f64 {
    1e-9 * a.norm().max(1.0)
}

/// `Tr|A| = Σ|λ_i|` for Hermitian `A`.
pub fn trace_norm(a: &DMatrix<C64>) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("{}×{} is not square", a.nrows(), a.ncols())));
    }
    let defect = hermiticity_defect(a);
    if defect > hermitian_tol(a) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(hermitian_eigenvalues(a).iter().map(|x| x.abs()).sum())
}

/// Partial trace over the factors of `H = ⊗_k C^{dims[k]}` that are not listed
/// in `keep`. Factor 0 is the most significant index; `keep` must be sorted.
pub fn partial_trace(a: &DMatrix<C64>, dims: &[usize], keep: &[usize]) -> Result<DMatrix<C64>> {
    let total: usize = dims.iter().product();
    if a.nrows() != total || a.ncols() != total {
        return Err(Error::Dimension(format!(
            "matrix is {}×{}, factors multiply to {total}",
            a.nrows(),
            a.ncols()
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Dimension(format!("bad subsystem list {keep:?}")));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();

    let digits = |mut idx: usize, which: &[usize]| -> Vec<usize> {
        let mut out = vec![0; which.len()];
        for (slot, &k) in which.iter().enumerate().rev() {
            out[slot] = idx % dims[k];
            idx /= dims[k];
        }
        out
    };
    let compose = |kept: &[usize], tr: &[usize]| -> usize {
        let mut full = vec![0; dims.len()];
        for (slot, &k) in keep.iter().enumerate() {
            full[k] = kept[slot];
        }
        for (slot, &k) in traced.iter().enumerate() {
            full[k] = tr[slot];
        }
        full.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
    };

    let mut out = DMatrix::<C64>::zeros(kept_dim, kept_dim);
    for i in 0..kept_dim {
        let ki = digits(i, keep);
        for j in 0..kept_dim {
            let kj = digits(j, keep);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..traced_dim {
                let tt = digits(t, &traced);
                acc += a[(compose(&ki, &tt), compose(&kj, &tt))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}
