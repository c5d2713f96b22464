//! Dense symmetric eigensolvers and small vector helpers.

use nalgebra::{DMatrix, DVector};

/// Eigendecomposition with eigenvalues sorted in decreasing order; column `k`
/// of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps over all off-diagonal pairs until the off-diagonal Frobenius mass
/// drops to `rel_tol * ||A||_F` (or `max_sweeps` is reached).
pub fn jacobi_eigen(a: &DMatrix<f64>, rel_tol: f64, max_sweeps: usize) -> SymmetricEigen {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "jacobi_eigen needs a square matrix");
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let target = rel_tol * a.norm();
    let mut sweeps = 0;

    while sweeps < max_sweeps && off_diagonal_norm(&m) > target {
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (m[(p, p)], m[(q, q)]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;

                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    SymmetricEigen {
        values,
        vectors,
        sweeps,
    }
}

fn off_diagonal_norm(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)] * m[(i, j)];
            }
        }
    }
    acc.sqrt()
}

/// Eigendecomposition through Householder tridiagonalization and implicit QL
/// (nalgebra), sorted in decreasing order. Used where the per-call cost
/// matters more than an independent implementation.
pub fn fast_symmetric_eigen(a: &DMatrix<f64>) -> SymmetricEigen {
    let eig = nalgebra::SymmetricEigen::new(a.clone());
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    SymmetricEigen {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]),
        sweeps: 0,
    }
}

/// Entrywise sign with `sign(0) = +1`.
pub fn sign_vector(u: &[f64]) -> Vec<i8> {
    u.iter().map(|&x| if x < 0.0 { -1 } else { 1 }).collect()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Normalizes in place; returns the previous norm.
pub fn normalize(x: &mut [f64]) -> f64 {
    let nrm = norm(x);
    if nrm > 0.0 {
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    nrm
}

/// Removes the component along the all-ones direction.
pub fn project_out_ones(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

/// `y = A x` for a dense matrix.
pub fn matvec(a: &DMatrix<f64>, x: &[f64], y: &mut [f64]) {
    let xv = DVector::from_column_slice(x);
    let r = a * xv;
    y.copy_from_slice(r.as_slice());
}

/// `||A x - lambda x||_2`.
pub fn residual(a: &DMatrix<f64>, x: &[f64], lambda: f64) -> f64 {
    let mut y = vec![0.0; x.len()];
    matvec(a, x, &mut y);
    y.iter().zip(x).map(|(yi, xi)| (yi - lambda * xi).powi(2)).sum::<f64>().sqrt()
}
