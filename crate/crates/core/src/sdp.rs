//! Semidefinite relaxation of min-bisection.
//!
//! ```text
//! maximize <A, X>  subject to  X PSD,  <X, 1 1^T> = 0,  X_ii = 1.
//! ```
//!
//! Solved by ADMM on the splitting `X = Z` with `X` in the affine set and `Z`
//! in the PSD cone. The affine projection is exact in closed form: the
//! diagonal is reset to 1 and the off-diagonal entries are shifted by a common
//! constant so that their sum is `-n`. The cone projection clips negative
//! eigenvalues of a dense eigendecomposition.
//!
//! For `X = x x^T` with `x` balanced, `<A, X> = 2 g(x)` where
//! `g(x) = sum_{i<j} x_i A_ij x_j` is the min-bisection objective.

use log::debug;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::combinatorics::balanced_sign_fixed;
use crate::error::{invalid, Error, Result};
use crate::linalg::{fast_symmetric_eigen, sign_vector};
use crate::model::{AdjacencyMatrix, LabelVector};
use crate::spectral::{Algorithm, PartitionResult};

/// Size guard for the dense per-iteration eigendecomposition.
pub const SDP_LIMIT: usize = 500;

/// Size guard for exhaustive enumeration (`C(16, 8) = 12 870` candidates).
const BALANCE_EVERY: usize = 10;
const MAX_PENALTY_CHANGES: usize = 10;

pub const BRUTE_LIMIT: usize = 16;

/// ADMM settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Initial penalty parameter.
    pub penalty: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 50_000,
            penalty: 1.0,
        }
    }
}

/// Output of [`solve_sdp`]. `x` is the PSD iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub x: DMatrix<f64>,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `max(primal, dual)` residual after each iteration.
    pub history: Vec<f64>,
}

impl SdpSolution {
    /// Largest `|X_ii - 1|`.
    pub fn diagonal_error(&self) -> f64 {
        self.x.diagonal().iter().map(|d| (d - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `<X, 1 1^T>`.
    pub fn total_sum(&self) -> f64 {
        self.x.sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        fast_symmetric_eigen(&self.x).values.last().copied().unwrap_or(0.0)
    }
}

/// Orthogonal projection onto `{X symmetric : diag(X) = 1, sum(X) = 0}`.
pub fn project_affine(x: &mut DMatrix<f64>) {
    let n = x.nrows();
    if n < 2 {
        x.fill_diagonal(1.0);
        return;
    }
    let mut off = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off += x[(i, j)];
            }
        }
    }
    let shift = (-(n as f64) - off) / (n * (n - 1)) as f64;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                x[(i, j)] = 1.0;
            } else {
                x[(i, j)] += shift;
            }
        }
    }
}

/// Projection onto the PSD cone.
pub fn project_psd(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let sym = (x + x.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym.clone());
    let positive = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
    // Rebuild from whichever side of the spectrum is smaller.
    let keep_positive = positive <= n / 2;
    let cols: Vec<usize> = (0..n)
        .filter(|&k| (eig.eigenvalues[k] > 0.0) == keep_positive)
        .collect();
    if cols.is_empty() {
        return if keep_positive { DMatrix::zeros(n, n) } else { sym };
    }
    let v = eig.eigenvectors.select_columns(&cols);
    let mut scaled = v.clone();
    for (j, &k) in cols.iter().enumerate() {
        scaled.column_mut(j).scale_mut(eig.eigenvalues[k]);
    }
    let part = scaled * v.transpose();
    if keep_positive {
        part
    } else {
        sym - part
    }
}

/// Feasible starting point `(n I - J) / (n - 1)`.
fn feasible_start(n: usize) -> DMatrix<f64> {
    let off = -1.0 / (n as f64 - 1.0);
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { off })
}

/// Solves the relaxation by ADMM with residual balancing.
///
/// Convergence is declared when both the primal residual `||X - Z||_F` and the
/// dual residual `penalty * ||Z - Z_prev||_F` are at most `tol`. Reaching
/// `max_iter` is not an error; `converged` is false in that case.
pub fn solve_sdp(a: &AdjacencyMatrix, opts: &SdpOptions) -> Result<SdpSolution> {
    let n = a.n();
    if n > SDP_LIMIT {
        return Err(Error::SizeLimit { n, limit: SDP_LIMIT });
    }
    if n < 2 {
        return invalid("the relaxation needs at least 2 vertices");
    }
    // Objective scale does not move the optimizer; normalize so that
    // ||C||_F is comparable to ||X||_F = O(n).
    let a_norm = a.matrix().norm();
    let c = if a_norm > 0.0 {
        a.matrix() * (n as f64 / a_norm)
    } else {
        DMatrix::zeros(n, n)
    };

    let mut rho = opts.penalty;
    let mut z = feasible_start(n);
    let mut u = DMatrix::<f64>::zeros(n, n);
    let mut history = Vec::new();
    let (mut primal, mut dual) = (f64::INFINITY, f64::INFINITY);
    let mut converged = false;
    let mut iterations = 0;
    let mut changes = 0usize;

    for it in 1..=opts.max_iter {
        iterations = it;
        let mut x = &z - &u + &c / rho;
        project_affine(&mut x);
        let z_prev = z;
        z = project_psd(&(&x + &u));
        u += &x - &z;

        primal = (&x - &z).norm();
        dual = rho * (&z - &z_prev).norm();
        history.push(primal.max(dual));
        if primal <= opts.tol && dual <= opts.tol {
            converged = true;
            break;
        }
        // Residual balancing. Unlimited adaptation can lock the iteration into
        // a limit cycle, so the penalty is checked every few iterations and
        // frozen after a fixed number of changes; from then on this is plain
        // ADMM with its usual convergence guarantee.
        if it % BALANCE_EVERY != 0 || changes >= MAX_PENALTY_CHANGES {
            continue;
        }
        if primal > 10.0 * dual {
            rho *= 2.0;
            u /= 2.0;
            changes += 1;
        } else if dual > 10.0 * primal {
            rho /= 2.0;
            u *= 2.0;
            changes += 1;
        }
    }
    if !converged {
        debug!("ADMM stopped after {iterations} iterations (primal {primal:e}, dual {dual:e})");
    }
    let objective = a.matrix().dot(&z);
    Ok(SdpSolution {
        x: z,
        objective,
        primal_residual: primal,
        dual_residual: dual,
        iterations,
        converged,
        history,
    })
}

/// Algorithm 3: signs of the top eigenvector of the relaxation's optimizer.
///
/// Non-convergence is reported through `converged = false`, not as an error.
pub fn algorithm3_sdp(a: &AdjacencyMatrix, opts: &SdpOptions) -> Result<PartitionResult> {
    Ok(partition_from_solution(&solve_sdp(a, opts)?))
}

/// The rounding step of Algorithm 3 on an existing solution.
pub fn partition_from_solution(sol: &SdpSolution) -> PartitionResult {
    let eig = fast_symmetric_eigen(&sol.x);
    let top: Vec<f64> = eig.vectors.column(0).iter().copied().collect();
    let mut result = PartitionResult::new(sign_vector(&top), Algorithm::Sdp);
    result.converged = sol.converged;
    result
}

/// Outcome of the dual-certificate check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateResult {
    pub nu: f64,
    /// Second smallest eigenvalue of `S = D - A + nu J`.
    pub second_smallest_eig: f64,
    pub smallest_eig: f64,
    /// `||S sigma||_2`.
    pub sigma_residual: f64,
    pub sigma_in_kernel: bool,
    pub certified: bool,
}

/// Within-community and cross-community mean of the off-diagonal entries.
pub fn block_means(a: &AdjacencyMatrix, labels: &LabelVector) -> (f64, f64) {
    let n = a.n();
    let (mut within, mut nw, mut across, mut na) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if labels.get(i) == labels.get(j) {
                within += a.get(i, j);
                nw += 1;
            } else {
                across += a.get(i, j);
                na += 1;
            }
        }
    }
    (within / nw.max(1) as f64, across / na.max(1) as f64)
}

/// Checks whether `S = D - A + nu J`, with `D_vv = sum_j A_vj sigma_v sigma_j`,
/// certifies `sigma sigma^T` as the unique optimum of the relaxation:
/// `S sigma = 0` and `lambda_{n-1}(S) > 0`.
///
/// `nu` defaults to the average of the empirical within and across block means.
pub fn certificate_check(a: &AdjacencyMatrix, labels: &LabelVector, nu: Option<f64>) -> Result<CertificateResult> {
    let n = a.n();
    if labels.len() != n {
        return invalid("label length does not match the matrix");
    }
    if n < 2 {
        return invalid("need at least 2 vertices");
    }
    let nu = nu.unwrap_or_else(|| {
        let (p_hat, q_hat) = block_means(a, labels);
        0.5 * (p_hat + q_hat)
    });
    let sigma = labels.to_f64();
    let mut s = a.matrix().map(|x| nu - x);
    for v in 0..n {
        let d: f64 = (0..n).map(|j| a.get(v, j) * sigma[v] * sigma[j]).sum();
        s[(v, v)] = d + nu;
    }
    let sv = &s * nalgebra::DVector::from_vec(sigma);
    let sigma_residual = sv.norm();
    let tol = 1e-9 * a.matrix().norm().max(1.0);
    let eig = fast_symmetric_eigen(&s);
    let second_smallest_eig = eig.values[n - 2];
    let sigma_in_kernel = sigma_residual <= tol;
    Ok(CertificateResult {
        nu,
        second_smallest_eig,
        smallest_eig: eig.values[n - 1],
        sigma_residual,
        sigma_in_kernel,
        certified: sigma_in_kernel && second_smallest_eig > tol,
    })
}

/// `g(x) = sum_{i<j} x_i A_ij x_j`.
pub fn bisection_objective(a: &AdjacencyMatrix, x: &[i8]) -> f64 {
    let n = a.n();
    let mut g = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            g += (x[i] * x[j]) as f64 * a.get(i, j);
        }
    }
    g
}

/// Exhaustive min-bisection: maximizes `g` over balanced `x` with `x_0 = +1`.
/// Ties keep the first candidate in lexicographic order of the `+1` support
/// and set `tie`.
pub fn min_bisection_brute(a: &AdjacencyMatrix) -> Result<PartitionResult> {
    let n = a.n();
    if n > BRUTE_LIMIT {
        return Err(Error::SizeLimit { n, limit: BRUTE_LIMIT });
    }
    if n < 2 || !n.is_multiple_of(2) {
        return invalid("min-bisection needs an even number of vertices");
    }
    let (best, _, tie) = argmax_balanced(n, |z| bisection_objective(a, z));
    let mut result = PartitionResult::new(best, Algorithm::MinBisection);
    result.tie = tie;
    Ok(result)
}

/// Scans all sign-fixed balanced vectors. Returns the first maximizer, its
/// score, and whether another candidate attained the same score.
pub(crate) fn argmax_balanced<F: FnMut(&[i8]) -> f64>(n: usize, mut score: F) -> (Vec<i8>, f64, bool) {
    let mut best: Option<(Vec<i8>, f64)> = None;
    let mut tie = false;
    for z in balanced_sign_fixed(n) {
        let s = score(&z);
        match &best {
            None => best = Some((z, s)),
            Some((_, b)) => {
                let eps = 1e-12 * (1.0 + b.abs());
                if s > b + eps {
                    best = Some((z, s));
                    tie = false;
                } else if (s - b).abs() <= eps {
                    tie = true;
                }
            }
        }
    }
    let (z, s) = best.expect("at least one balanced vector");
    (z, s, tie)
}
