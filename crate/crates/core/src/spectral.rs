//! Second-eigenpair solvers and the two spectral partition algorithms.
//!
//! The adjacency algorithm signs the second eigenvector of `A`. The power
//! route never forms the rank-one deflation explicitly: it iterates
//! `u <- P u / ||P u||` with `P u = A u - (mean degree / n) (1^T u) 1`, which
//! costs one dense matrix-vector product per step.
//!
//! The Laplacian algorithm signs the second eigenvector of
//! `L = D^{-1/2} A D^{-1/2}` with the Moore-Penrose convention
//! (`D^{-1/2}_vv = 0` for isolated vertices). Since `D^{1/2} 1` is an exact
//! eigenvector of `L` for eigenvalue 1, the deflation there is exact. The
//! generalized problem `A w = lambda D w` has `w = D^{-1/2} u`, which has the
//! same signs, so both formulations give the same partition.

use log::{debug, warn};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, jacobi_eigen, normalize, sign_vector};
use crate::metrics::mismatch_ratio;
use crate::model::{AdjacencyMatrix, LabelVector};

/// Cap for the standalone dense (Jacobi) solver.
pub const DENSE_LIMIT: usize = 2000;

const JACOBI_REL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// An eigenpair together with solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `||M x - mu x||` for the operator `M` that was solved.
    pub residual: f64,
    pub iterations: usize,
    /// Rayleigh quotient on the deflated operator (power route only).
    pub deflated_value: Option<f64>,
    /// The power route converged to a negative eigenvalue of the deflated
    /// operator, i.e. the most negative direction dominated in magnitude.
    pub negative_dominant: bool,
}

/// Estimator tag carried by a [`PartitionResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    AdjacencySpectral,
    LaplacianSpectral,
    Sdp,
    MleOracle,
    MinBisection,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::AdjacencySpectral => "adjacency",
            Algorithm::LaplacianSpectral => "laplacian",
            Algorithm::Sdp => "sdp",
            Algorithm::MleOracle => "mle-oracle",
            Algorithm::MinBisection => "min-bisection",
        }
    }
}

/// Estimated labels plus metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionResult {
    pub labels_hat: Vec<i8>,
    pub algorithm: Algorithm,
    pub eigen: Option<EigenPair>,
    pub mismatch: Option<f64>,
    pub exact: Option<bool>,
    /// False when an iterative solver stopped at its iteration cap.
    pub converged: bool,
    /// Set by the exhaustive oracles when several candidates attain the optimum.
    pub tie: bool,
}

impl PartitionResult {
    pub fn new(labels_hat: Vec<i8>, algorithm: Algorithm) -> Self {
        Self {
            labels_hat,
            algorithm,
            eigen: None,
            mismatch: None,
            exact: None,
            converged: true,
            tie: false,
        }
    }

    /// Fills `mismatch` and `exact` against the ground truth.
    pub fn with_truth(mut self, truth: &LabelVector) -> Result<Self> {
        let r = mismatch_ratio(truth.as_slice(), &self.labels_hat)?;
        self.mismatch = Some(r);
        self.exact = Some(r == 0.0);
        Ok(self)
    }
}

/// Power-iteration and dense-fallback settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    /// Stop when successive iterates differ by at most this (up to sign).
    pub tol: f64,
    pub max_iter: usize,
    /// Use the dense solver at or below this size.
    pub dense_threshold: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            dense_threshold: 64,
        }
    }
}

/// Second-largest eigenpair of `A` by full cyclic Jacobi decomposition.
///
/// With a repeated top eigenvalue the returned vector is an arbitrary member
/// of that eigenspace; Algorithm 1 therefore works on the deflated operator.
pub fn dense_second_eigenpair(a: &AdjacencyMatrix) -> Result<EigenPair> {
    let m = a.matrix();
    let n = m.nrows();
    if n > DENSE_LIMIT {
        return Err(Error::SizeLimit { n, limit: DENSE_LIMIT });
    }
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 vertices".into()));
    }
    let eig = jacobi_eigen(m, JACOBI_REL_TOL, JACOBI_MAX_SWEEPS);
    let vector: Vec<f64> = eig.vectors.column(1).iter().copied().collect();
    let value = eig.values[1];
    Ok(EigenPair {
        residual: linalg::residual(m, &vector, value),
        value,
        vector,
        iterations: eig.sweeps,
        deflated_value: None,
        negative_dominant: false,
    })
}

struct PowerOutcome {
    vector: Vec<f64>,
    value: f64,
    residual: f64,
    iterations: usize,
}

/// Plain power iteration on a symmetric linear operator. Returns the unit
/// vector, its Rayleigh quotient and the eigen-residual.
fn power_iterate<F>(n: usize, mut start: Vec<f64>, apply: F, tol: f64, max_iter: usize) -> Result<PowerOutcome>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut u = std::mem::take(&mut start);
    if normalize(&mut u) == 0.0 {
        return Err(Error::InvalidArgument("power iteration started from the zero vector".into()));
    }
    let mut next = vec![0.0; n];
    let mut change = f64::INFINITY;
    for it in 1..=max_iter {
        apply(&u, &mut next);
        let nrm = normalize(&mut next);
        if nrm == 0.0 {
            // u lies in the kernel: an exact eigenvector for eigenvalue 0
            return Ok(PowerOutcome {
                vector: u,
                value: 0.0,
                residual: 0.0,
                iterations: it,
            });
        }
        let s = if dot(&next, &u) < 0.0 { -1.0 } else { 1.0 };
        change = next.iter().zip(&u).map(|(x, y)| (x - s * y).powi(2)).sum::<f64>().sqrt();
        std::mem::swap(&mut u, &mut next);
        if change <= tol {
            apply(&u, &mut next);
            let value = dot(&u, &next);
            let residual = next.iter().zip(&u).map(|(y, x)| (y - value * x).powi(2)).sum::<f64>().sqrt();
            return Ok(PowerOutcome {
                vector: u,
                value,
                residual,
                iterations: it,
            });
        }
    }
    Err(Error::Convergence {
        iterations: max_iter,
        residual: change,
    })
}

fn random_unit<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Applies `P = A - (mean degree / n) J` without forming `J`.
fn deflated_adjacency_apply(a: &DMatrix<f64>) -> impl Fn(&[f64], &mut [f64]) + '_ {
    let n = a.nrows();
    let mean_degree = a.sum() / n as f64;
    let shift = mean_degree / n as f64;
    move |x: &[f64], y: &mut [f64]| {
        linalg::matvec(a, x, y);
        let total: f64 = x.iter().sum();
        y.iter_mut().for_each(|v| *v -= shift * total);
    }
}

/// The deflated operator `P = A - (mean degree / n) 1 1^T` as a dense matrix.
pub fn deflated_adjacency(a: &AdjacencyMatrix) -> DMatrix<f64> {
    let n = a.n();
    let shift = a.matrix().sum() / (n * n) as f64;
    a.matrix().map(|x| x - shift)
}

/// Second eigenpair of `A` by power iteration on the implicitly deflated
/// operator `P`.
///
/// The start vector is Gaussian, projected orthogonal to the all-ones vector.
/// The reported `value` is the Rayleigh quotient `u^T A u` of the converged
/// unit vector; `deflated_value` is `u^T P u`. When `u^T P u < 0` the iteration
/// locked onto the most negative eigenvalue of `P` and `negative_dominant` is set.
pub fn power_second_eigenpair<R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    tol: f64,
    max_iter: usize,
    rng: &mut R,
) -> Result<EigenPair> {
    let n = a.n();
    let mut start = random_unit(n, rng);
    linalg::project_out_ones(&mut start);
    let apply = deflated_adjacency_apply(a.matrix());
    let out = power_iterate(n, start, &apply, tol, max_iter)?;
    let mut au = vec![0.0; n];
    linalg::matvec(a.matrix(), &out.vector, &mut au);
    let value = dot(&out.vector, &au);
    if out.value < 0.0 {
        debug!("power iteration converged to a negative deflated eigenvalue {}", out.value);
    }
    Ok(EigenPair {
        value,
        vector: out.vector,
        residual: out.residual,
        iterations: out.iterations,
        deflated_value: Some(out.value),
        negative_dominant: out.value < 0.0,
    })
}

/// Algorithm 1: signs of the second eigenvector of the adjacency matrix.
pub fn algorithm1_adjacency<R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    opts: &SpectralOptions,
    rng: &mut R,
) -> Result<PartitionResult> {
    let n = a.n();
    let eigen = if n <= opts.dense_threshold {
        dense_deflated_adjacency(a, true)?
    } else {
        match power_second_eigenpair(a, opts.tol, opts.max_iter, rng) {
            Ok(pair) if !pair.negative_dominant => pair,
            Ok(_) | Err(Error::Convergence { .. }) if n <= DENSE_LIMIT => {
                warn!("power iteration did not isolate the second eigenvector; using the dense solver");
                dense_deflated_adjacency(a, false)?
            }
            Ok(pair) => pair,
            Err(e) => return Err(e),
        }
    };
    let mut result = PartitionResult::new(sign_vector(&eigen.vector), Algorithm::AdjacencySpectral);
    result.eigen = Some(eigen);
    Ok(result)
}

/// Top eigenpair of a deflated operator `p`, skipping eigenvectors that are
/// mostly aligned with the deflated direction `reference` (a unit vector).
///
/// Picking from the deflated operator rather than taking "the second column"
/// of the undeflated one matters when the top eigenvalue is repeated, e.g. for
/// a disconnected graph: any vector of that eigenspace is an eigenvector, and
/// only the one orthogonal to `reference` carries the partition.
fn top_deflated(p: &DMatrix<f64>, reference: &[f64], jacobi: bool) -> (f64, Vec<f64>) {
    let eig = if jacobi {
        jacobi_eigen(p, JACOBI_REL_TOL, JACOBI_MAX_SWEEPS)
    } else {
        linalg::fast_symmetric_eigen(p)
    };
    let n = p.nrows();
    let pick = (0..n)
        .find(|&k| {
            let v: Vec<f64> = eig.vectors.column(k).iter().copied().collect();
            dot(&v, reference).abs() < std::f64::consts::FRAC_1_SQRT_2
        })
        .unwrap_or(0);
    (eig.values[pick], eig.vectors.column(pick).iter().copied().collect())
}

/// Dense route of Algorithm 1: top eigenpair of the materialized `P`.
fn dense_deflated_adjacency(a: &AdjacencyMatrix, jacobi: bool) -> Result<EigenPair> {
    let n = a.n();
    if n > DENSE_LIMIT {
        return Err(Error::SizeLimit { n, limit: DENSE_LIMIT });
    }
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 vertices".into()));
    }
    let p = deflated_adjacency(a);
    let ones = vec![1.0 / (n as f64).sqrt(); n];
    let (deflated, vector) = top_deflated(&p, &ones, jacobi);
    let mut av = vec![0.0; n];
    linalg::matvec(a.matrix(), &vector, &mut av);
    let value = dot(&vector, &av);
    Ok(EigenPair {
        residual: linalg::residual(&p, &vector, deflated),
        value,
        vector,
        iterations: 0,
        deflated_value: Some(deflated),
        negative_dominant: false,
    })
}

/// Dense route of Algorithm 2: top eigenpair of `L - t t^T`, `t = sqrt(d) / |sqrt(d)|`.
fn dense_deflated_laplacian(l: &DMatrix<f64>, top: &[f64], jacobi: bool) -> Result<EigenPair> {
    let n = l.nrows();
    if n > DENSE_LIMIT {
        return Err(Error::SizeLimit { n, limit: DENSE_LIMIT });
    }
    let t = nalgebra::DVector::from_column_slice(top);
    let p = l - &t * t.transpose();
    let (deflated, vector) = top_deflated(&p, top, jacobi);
    Ok(EigenPair {
        residual: linalg::residual(&p, &vector, deflated),
        value: deflated,
        vector,
        iterations: 0,
        deflated_value: Some(deflated),
        negative_dominant: false,
    })
}

/// `L = D^{-1/2} A D^{-1/2}` with zero rows and columns for isolated vertices.
pub fn normalized_laplacian(a: &AdjacencyMatrix) -> Result<DMatrix<f64>> {
    let d = a.degrees();
    if d.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateGraph("every vertex has degree zero".into()));
    }
    let inv_sqrt: Vec<f64> = d.iter().map(|&x| if x > 0.0 { x.powf(-0.5) } else { 0.0 }).collect();
    let n = a.n();
    Ok(DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * a.get(i, j) * inv_sqrt[j]))
}

/// Algorithm 2: signs of the second eigenvector of the normalized Laplacian.
pub fn algorithm2_laplacian<R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    opts: &SpectralOptions,
    rng: &mut R,
) -> Result<PartitionResult> {
    let l = normalized_laplacian(a)?;
    let n = a.n();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 vertices".into()));
    }
    let mut top: Vec<f64> = a.degrees().iter().map(|x| x.sqrt()).collect();
    normalize(&mut top);
    let eigen = if n <= opts.dense_threshold {
        dense_deflated_laplacian(&l, &top, true)?
    } else {
        let apply = |x: &[f64], y: &mut [f64]| {
            linalg::matvec(&l, x, y);
            let c = dot(&top, x);
            y.iter_mut().zip(&top).for_each(|(v, t)| *v -= c * t);
        };
        let mut start = random_unit(n, rng);
        let c = dot(&top, &start);
        start.iter_mut().zip(&top).for_each(|(v, t)| *v -= c * t);
        match power_iterate(n, start, apply, opts.tol, opts.max_iter) {
            Ok(out) if out.value >= 0.0 => EigenPair {
                value: out.value,
                vector: out.vector,
                residual: out.residual,
                iterations: out.iterations,
                deflated_value: Some(out.value),
                negative_dominant: false,
            },
            Ok(_) | Err(Error::Convergence { .. }) if n <= DENSE_LIMIT => {
                warn!("power iteration on the Laplacian did not isolate the second eigenvector; using the dense solver");
                dense_deflated_laplacian(&l, &top, false)?
            }
            Ok(out) => EigenPair {
                value: out.value,
                vector: out.vector,
                residual: out.residual,
                iterations: out.iterations,
                deflated_value: Some(out.value),
                negative_dominant: true,
            },
            Err(e) => return Err(e),
        }
    };
    let mut result = PartitionResult::new(sign_vector(&eigen.vector), Algorithm::LaplacianSpectral);
    result.eigen = Some(eigen);
    Ok(result)
}
