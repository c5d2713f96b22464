//! The two-community non-uniform hypergraph stochastic block model.
//!
//! A model is a vertex count `n` together with one layer per arity `m`. Each
//! layer is an independent `m`-uniform hypergraph in which an `m`-subset is a
//! hyperedge with probability `p_m` when all of its vertices share a label and
//! `q_m` otherwise. In the logarithmic-degree regime
//!
//! ```text
//! p_m = a_m ln(n) / C(n-1, m-1),    q_m = b_m ln(n) / C(n-1, m-1).
//! ```
//!
//! Hypergraphs are kept as sparse per-layer edge lists; the estimators only
//! ever see the contracted pairwise matrix `A_ij = #{hyperedges containing i and j}`.

use std::collections::{BTreeMap, HashSet};

use log::warn;
use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, binomial_u64, Combinations};
use crate::error::{invalid, Error, Result};

/// Intensity parameters of one layer.
///
/// `Scaled` is the usual `(a_m, b_m)` parametrization. `Direct` fixes the edge
/// probabilities themselves, which is convenient for degenerate or tiny
/// instances (`p = 1, q = 0`) that the scaled form cannot express.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum LayerParams {
    Scaled { a: f64, b: f64 },
    Direct { p: f64, q: f64 },
}

impl LayerParams {
    fn validate(&self, m: usize) -> Result<()> {
        match *self {
            LayerParams::Scaled { a, b } => {
                if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
                    return invalid(format!("layer {m}: a and b must be positive, got a={a}, b={b}"));
                }
            }
            LayerParams::Direct { p, q } => {
                let ok = |x: f64| x.is_finite() && (0.0..=1.0).contains(&x);
                if !(ok(p) && ok(q)) {
                    return invalid(format!("layer {m}: p and q must lie in [0,1], got p={p}, q={q}"));
                }
            }
        }
        Ok(())
    }
}

/// Edge probabilities of one layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeProbabilities {
    pub p: f64,
    pub q: f64,
    /// Set when the scaled formula exceeded 1 and was clamped.
    pub clamped: bool,
}

#[derive(Deserialize)]
struct RawModelSpec {
    n: usize,
    layers: BTreeMap<usize, LayerParams>,
}

/// Generative contract: vertex count and per-arity layer intensities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelSpec")]
pub struct ModelSpec {
    n: usize,
    layers: BTreeMap<usize, LayerParams>,
}

impl TryFrom<RawModelSpec> for ModelSpec {
    type Error = Error;

    fn try_from(raw: RawModelSpec) -> Result<Self> {
        ModelSpec::new(raw.n, raw.layers)
    }
}

impl ModelSpec {
    pub fn new(n: usize, layers: BTreeMap<usize, LayerParams>) -> Result<Self> {
        if layers.is_empty() {
            return invalid("model needs at least one layer");
        }
        for (&m, params) in &layers {
            if m < 2 {
                return invalid(format!("arity must be at least 2, got {m}"));
            }
            params.validate(m)?;
        }
        let max_m = *layers.keys().next_back().unwrap();
        if !n.is_multiple_of(2) || n < 2 * max_m {
            return invalid(format!(
                "n must be even and at least 2*max(M) = {}, got {n}",
                2 * max_m
            ));
        }
        Ok(Self { n, layers })
    }

    /// Convenience constructor from `(m, a_m, b_m)` triples.
    pub fn scaled(n: usize, layers: &[(usize, f64, f64)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(m, a, b) in layers {
            if map.insert(m, LayerParams::Scaled { a, b }).is_some() {
                return invalid(format!("duplicate arity {m}"));
            }
        }
        Self::new(n, map)
    }

    /// Convenience constructor from `(m, p_m, q_m)` triples of direct probabilities.
    pub fn direct(n: usize, layers: &[(usize, f64, f64)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(m, p, q) in layers {
            if map.insert(m, LayerParams::Direct { p, q }).is_some() {
                return invalid(format!("duplicate arity {m}"));
            }
        }
        Self::new(n, map)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &BTreeMap<usize, LayerParams> {
        &self.layers
    }

    pub fn arities(&self) -> impl Iterator<Item = usize> + '_ {
        self.layers.keys().copied()
    }

    /// Same layers on a different vertex count.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.layers.clone())
    }

    /// Adds (or replaces) one layer.
    pub fn with_layer(&self, m: usize, params: LayerParams) -> Result<Self> {
        let mut layers = self.layers.clone();
        layers.insert(m, params);
        Self::new(self.n, layers)
    }

    /// Union of two specs on the same `n` with disjoint arities.
    pub fn union(&self, other: &ModelSpec) -> Result<Self> {
        if self.n != other.n {
            return invalid("cannot merge specs with different n");
        }
        let mut layers = self.layers.clone();
        for (&m, &params) in &other.layers {
            if layers.insert(m, params).is_some() {
                return invalid(format!("arity {m} present in both specs"));
            }
        }
        Self::new(self.n, layers)
    }

    /// `a_m > b_m` (equivalently `p_m > q_m`) for every layer.
    pub fn is_assortative(&self) -> bool {
        self.layers.iter().all(|(&m, _)| {
            let (a, b) = self.intensities(m).expect("arity present");
            a > b
        })
    }

    /// The `(a_m, b_m)` pair of a layer. Direct layers are mapped back through
    /// the regime scaling, `a = p C(n-1, m-1) / ln n`.
    pub fn intensities(&self, m: usize) -> Result<(f64, f64)> {
        match self.layers.get(&m) {
            Some(&LayerParams::Scaled { a, b }) => Ok((a, b)),
            Some(&LayerParams::Direct { p, q }) => {
                let scale = binomial(self.n - 1, m - 1) / (self.n as f64).ln();
                Ok((p * scale, q * scale))
            }
            None => invalid(format!("arity {m} is not part of the model")),
        }
    }

    /// Edge probabilities `(p_m, q_m)` of layer `m`, clamped to `[0, 1]`.
    pub fn edge_probabilities(&self, m: usize) -> Result<EdgeProbabilities> {
        match self.layers.get(&m) {
            Some(&LayerParams::Scaled { a, b }) => {
                let scale = (self.n as f64).ln() / binomial(self.n - 1, m - 1);
                let (p, q) = (a * scale, b * scale);
                let clamped = p > 1.0 || q > 1.0;
                if clamped {
                    warn!("layer {m}: edge probability above 1 clamped (p={p:.4}, q={q:.4})");
                }
                Ok(EdgeProbabilities {
                    p: p.min(1.0),
                    q: q.min(1.0),
                    clamped,
                })
            }
            Some(&LayerParams::Direct { p, q }) => Ok(EdgeProbabilities {
                p,
                q,
                clamped: false,
            }),
            None => invalid(format!("arity {m} is not part of the model")),
        }
    }

    /// Human-readable arity tag, e.g. `2+3`.
    pub fn arity_tag(&self) -> String {
        self.arities().map(|m| m.to_string()).collect::<Vec<_>>().join("+")
    }
}

/// Balanced ±1 community labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct LabelVector(Vec<i8>);

impl LabelVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.is_empty() {
            return invalid("label vector is empty");
        }
        if let Some(x) = entries.iter().find(|&&x| x != 1 && x != -1) {
            return invalid(format!("labels must be +1 or -1, found {x}"));
        }
        let sum: i64 = entries.iter().map(|&x| x as i64).sum();
        if sum != 0 {
            return invalid(format!("labels must be balanced, sum is {sum}"));
        }
        Ok(Self(entries))
    }

    /// Uniformly random balanced labels.
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return invalid(format!("n must be even and positive, got {n}"));
        }
        let mut entries = vec![-1_i8; n];
        for i in index::sample(rng, n, n / 2) {
            entries[i] = 1;
        }
        Ok(Self(entries))
    }

    /// `(+1, ..., +1, -1, ..., -1)`.
    pub fn blocks(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| if i < n / 2 { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|&x| -x).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&x| x as f64).collect()
    }

    fn indices_of(&self, sign: i8) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] == sign).collect()
    }
}

impl<'de> Deserialize<'de> for LabelVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<i8>::deserialize(d)?;
        LabelVector::new(raw).map_err(serde::de::Error::custom)
    }
}

/// Uniformly random balanced labels.
pub fn sample_labels<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LabelVector> {
    LabelVector::sample(n, rng)
}

/// Sparse non-uniform hypergraph: one sorted, duplicate-free edge list per arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    layers: BTreeMap<usize, Vec<Vec<usize>>>,
}

impl Hypergraph {
    /// Validates and canonicalizes the edge lists (vertices sorted within each
    /// edge, edges sorted lexicographically). Duplicate edges, repeated
    /// vertices, wrong arity and out-of-range indices are rejected.
    pub fn new(n: usize, layers: BTreeMap<usize, Vec<Vec<usize>>>) -> Result<Self> {
        let mut canonical = BTreeMap::new();
        for (m, mut edges) in layers {
            if m < 2 {
                return invalid(format!("arity must be at least 2, got {m}"));
            }
            for e in edges.iter_mut() {
                if e.len() != m {
                    return invalid(format!("edge {e:?} in layer {m} has {} vertices", e.len()));
                }
                e.sort_unstable();
                if e.windows(2).any(|w| w[0] == w[1]) {
                    return invalid(format!("edge {e:?} repeats a vertex"));
                }
                if e[m - 1] >= n {
                    return invalid(format!("edge {e:?} has a vertex outside [0, {n})"));
                }
            }
            edges.sort_unstable();
            if edges.windows(2).any(|w| w[0] == w[1]) {
                return invalid(format!("layer {m} contains a duplicate edge"));
            }
            canonical.insert(m, edges);
        }
        Ok(Self {
            n,
            layers: canonical,
        })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            layers: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &BTreeMap<usize, Vec<Vec<usize>>> {
        &self.layers
    }

    pub fn edges(&self, m: usize) -> &[Vec<usize>] {
        self.layers.get(&m).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn edge_count(&self) -> usize {
        self.layers.values().map(Vec::len).sum()
    }

    /// Merges the layers of `other` into `self`. Arities must not overlap.
    pub fn merge(mut self, other: Hypergraph) -> Result<Self> {
        if self.n != other.n {
            return invalid("cannot merge hypergraphs with different n");
        }
        for (m, edges) in other.layers {
            if self.layers.insert(m, edges).is_some() {
                return invalid(format!("arity {m} present in both hypergraphs"));
            }
        }
        Ok(self)
    }
}

/// Samples one `m`-uniform layer with in-cluster probability `p` and cross
/// probability `q` without enumerating all `C(n, m)` subsets.
///
/// The number of in-cluster and cross edges are binomial; the edges themselves
/// are drawn uniformly within their class by rejection on collisions. When a
/// class is more than half full the class is enumerated and subsampled instead,
/// which keeps the dense corner (`p` near 1) from degenerating into a coupon
/// collector.
pub fn sample_layer<R: Rng + ?Sized>(
    m: usize,
    p: f64,
    q: f64,
    labels: &LabelVector,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    let n = labels.len();
    let plus = labels.indices_of(1);
    let minus = labels.indices_of(-1);
    let half = n / 2;
    let overflow = || Error::InvalidArgument(format!("C({n}, {m}) does not fit in 64 bits"));
    let per_block = binomial_u64(half, m).ok_or_else(overflow)?;
    let total = binomial_u64(n, m).ok_or_else(overflow)?;
    let n_in = 2 * per_block;
    let n_cross = total - n_in;

    let k_in = draw_binomial(n_in, p, rng)?;
    let k_cross = draw_binomial(n_cross, q, rng)?;

    let mut edges = Vec::with_capacity((k_in + k_cross) as usize);

    // in-cluster
    if k_in > 0 {
        if 2 * k_in > n_in {
            let mut all = Vec::with_capacity(n_in as usize);
            for block in [&plus, &minus] {
                all.extend(Combinations::new(half, m).map(|c| c.iter().map(|&i| block[i]).collect::<Vec<_>>()));
            }
            for i in index::sample(rng, all.len(), k_in as usize) {
                edges.push(sorted(all[i].clone()));
            }
        } else {
            let mut seen = HashSet::with_capacity(k_in as usize);
            while (seen.len() as u64) < k_in {
                let block = if rng.random_bool(0.5) { &plus } else { &minus };
                let e = sorted(index::sample(rng, half, m).into_iter().map(|i| block[i]).collect());
                seen.insert(e);
            }
            edges.extend(seen);
        }
    }

    // cross
    if k_cross > 0 {
        let in_cluster = |e: &[usize]| e.iter().all(|&v| labels.get(v) == labels.get(e[0]));
        if 2 * k_cross > n_cross {
            let all: Vec<Vec<usize>> = Combinations::new(n, m).filter(|e| !in_cluster(e)).collect();
            for i in index::sample(rng, all.len(), k_cross as usize) {
                edges.push(all[i].clone());
            }
        } else {
            let mut seen = HashSet::with_capacity(k_cross as usize);
            while (seen.len() as u64) < k_cross {
                let e = sorted(index::sample(rng, n, m).into_vec());
                if !in_cluster(&e) {
                    seen.insert(e);
                }
            }
            edges.extend(seen);
        }
    }

    edges.sort_unstable();
    Ok(edges)
}

fn sorted(mut e: Vec<usize>) -> Vec<usize> {
    e.sort_unstable();
    e
}

fn draw_binomial<R: Rng + ?Sized>(trials: u64, p: f64, rng: &mut R) -> Result<u64> {
    if trials == 0 || p <= 0.0 {
        return Ok(0);
    }
    if p >= 1.0 {
        return Ok(trials);
    }
    let dist = Binomial::new(trials, p).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(dist.sample(rng))
}

/// Samples a hypergraph from the model given the planted labels. Layers are
/// drawn in increasing arity from the same stream.
pub fn sample_hsbm<R: Rng + ?Sized>(spec: &ModelSpec, labels: &LabelVector, rng: &mut R) -> Result<Hypergraph> {
    if labels.len() != spec.n() {
        return invalid(format!(
            "labels have length {} but the model has n = {}",
            labels.len(),
            spec.n()
        ));
    }
    let mut layers = BTreeMap::new();
    for m in spec.arities() {
        let probs = spec.edge_probabilities(m)?;
        layers.insert(m, sample_layer(m, probs.p, probs.q, labels, rng)?);
    }
    Ok(Hypergraph {
        n: spec.n(),
        layers,
    })
}

/// Symmetric non-negative `n x n` matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix(DMatrix<f64>);

impl AdjacencyMatrix {
    /// Wraps a dense matrix after checking it is square, symmetric, hollow and
    /// entrywise non-negative.
    pub fn from_dense(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return invalid(format!("matrix is {}x{}, not square", m.nrows(), m.ncols()));
        }
        let n = m.nrows();
        for i in 0..n {
            if m[(i, i)] != 0.0 {
                return invalid(format!("diagonal entry {i} is {}, expected 0", m[(i, i)]));
            }
            for j in 0..i {
                let (x, y) = (m[(i, j)], m[(j, i)]);
                if !x.is_finite() || x < 0.0 {
                    return invalid(format!("entry ({i},{j}) = {x} is not a finite non-negative number"));
                }
                if x != y {
                    return invalid(format!("matrix is not symmetric at ({i},{j})"));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Row sums `D_vv = sum_j A_vj`.
    pub fn degrees(&self) -> Vec<f64> {
        self.0.row_iter().map(|r| r.sum()).collect()
    }

    /// Positive multiple of the matrix.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return invalid(format!("scale must be positive, got {c}"));
        }
        Ok(Self(&self.0 * c))
    }

    /// Relabels vertices: entry `(i, j)` of the result is `A[perm[i], perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n();
        Self(DMatrix::from_fn(n, n, |i, j| self.0[(perm[i], perm[j])]))
    }
}

/// Contracts the hyperedge lists to the pairwise co-membership count matrix.
pub fn contract(h: &Hypergraph) -> AdjacencyMatrix {
    let n = h.n();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for edges in h.layers().values() {
        for e in edges {
            for (k, &i) in e.iter().enumerate() {
                for &j in &e[k + 1..] {
                    a[(i, j)] += 1.0;
                    a[(j, i)] += 1.0;
                }
            }
        }
    }
    AdjacencyMatrix(a)
}

/// Pair intensities and spectrum of `E[A]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedModel {
    pub p: f64,
    pub q: f64,
    pub rho_n: f64,
    pub lambda1_star: f64,
    pub lambda2_star: f64,
}

/// Closed-form expected-model quantities:
/// `p = sum_m p_m C(n-2, m-2)`, `rho_n = (p+q) n/2 - p`, `lambda2* = (p-q) n/2 - p`.
pub fn expected_model(spec: &ModelSpec) -> Result<ExpectedModel> {
    let n = spec.n();
    let (mut p, mut q) = (0.0, 0.0);
    for m in spec.arities() {
        let probs = spec.edge_probabilities(m)?;
        let pairs = binomial(n - 2, m - 2);
        p += probs.p * pairs;
        q += probs.q * pairs;
    }
    let half = n as f64 / 2.0;
    let lambda1_star = (p + q) * half - p;
    Ok(ExpectedModel {
        p,
        q,
        rho_n: lambda1_star,
        lambda1_star,
        lambda2_star: (p - q) * half - p,
    })
}

/// `E[A]` for the given labels: `p` within a community, `q` across, zero diagonal.
pub fn expected_adjacency(spec: &ModelSpec, labels: &LabelVector) -> Result<AdjacencyMatrix> {
    if labels.len() != spec.n() {
        return invalid("label length does not match the model");
    }
    let em = expected_model(spec)?;
    Ok(block_adjacency(labels, em.p, em.q))
}

/// Two-block matrix with `p` inside communities and `q` across.
pub fn block_adjacency(labels: &LabelVector, p: f64, q: f64) -> AdjacencyMatrix {
    let n = labels.len();
    AdjacencyMatrix(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else if labels.get(i) == labels.get(j) {
            p
        } else {
            q
        }
    }))
}

/// Ground-truth weighted adjacency used as an entrywise pivot.
///
/// For each row `v`, an edge `e` containing `v` and `j` is classified by the
/// number `r` of the other `m-1` vertices sharing `v`'s label. It contributes
/// `log(p_m/q_m) / w` to entry `(v, j)` where `w = m-1` when `r` is `0` or
/// `m-1`, `w = r` when `j` shares `v`'s label and `w = m-1-r` otherwise.
///
/// The weights depend on the row vertex, so the result is not symmetric in
/// general.
pub fn weighted_adjacency(h: &Hypergraph, labels: &LabelVector, spec: &ModelSpec) -> Result<DMatrix<f64>> {
    if !spec.is_assortative() {
        return invalid("weighted adjacency requires an assortative model");
    }
    if labels.len() != h.n() || h.n() != spec.n() {
        return invalid("hypergraph, labels and model disagree on n");
    }
    let n = h.n();
    let mut out = DMatrix::<f64>::zeros(n, n);
    for (&m, edges) in h.layers() {
        let probs = spec.edge_probabilities(m)?;
        let llr = (probs.p / probs.q).ln();
        for e in edges {
            for &v in e {
                let sv = labels.get(v);
                let r = e.iter().filter(|&&u| u != v && labels.get(u) == sv).count();
                for &j in e {
                    if j == v {
                        continue;
                    }
                    let w = if r == 0 || r == m - 1 {
                        m - 1
                    } else if labels.get(j) == sv {
                        r
                    } else {
                        m - 1 - r
                    };
                    out[(v, j)] += llr / w as f64;
                }
            }
        }
    }
    Ok(out)
}
