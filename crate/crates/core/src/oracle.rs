//! Exhaustive ground truth for tiny instances and Monte-Carlo tail estimates.
//!
//! Under the symmetric model the likelihood of `H` given labels `z` depends on
//! `z` only through the number of in-cluster hyperedges per layer, so the MLE
//! maximizes
//!
//! ```text
//! f(z | H) = sum_m log[p_m (1 - q_m) / (q_m (1 - p_m))] * #{e in E_m : e in-cluster w.r.t. z}.
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::Combinations;
use crate::error::{invalid, Error, Result};
use crate::model::{Hypergraph, LabelVector, ModelSpec};
use crate::sdp::{argmax_balanced, BRUTE_LIMIT};
use crate::spectral::{Algorithm, PartitionResult};
use crate::thresholds::RateSpec;

fn in_cluster(e: &[usize], z: &[i8]) -> bool {
    e.iter().all(|&v| z[v] == z[e[0]])
}

/// `log[p(1-q) / (q(1-p))]` per layer; fails unless `0 < p, q < 1`.
pub fn log_odds(spec: &ModelSpec) -> Result<Vec<(usize, f64)>> {
    spec.arities()
        .map(|m| {
            let pr = spec.edge_probabilities(m)?;
            let open = |x: f64| x > 0.0 && x < 1.0;
            if !(open(pr.p) && open(pr.q)) {
                return invalid(format!(
                    "layer {m}: log-odds need 0 < p, q < 1 (p = {}, q = {})",
                    pr.p, pr.q
                ));
            }
            Ok((m, (pr.p * (1.0 - pr.q) / (pr.q * (1.0 - pr.p))).ln()))
        })
        .collect()
}

fn check_inputs(z: &[i8], h: &Hypergraph, spec: &ModelSpec) -> Result<()> {
    if z.len() != h.n() || h.n() != spec.n() {
        return invalid("labels, hypergraph and model disagree on n");
    }
    if let Some(m) = h.layers().keys().find(|m| !spec.layers().contains_key(m)) {
        return invalid(format!("hypergraph layer {m} is not part of the model"));
    }
    Ok(())
}

/// The MLE objective `f(z | H)`.
pub fn f_score(z: &LabelVector, h: &Hypergraph, spec: &ModelSpec) -> Result<f64> {
    check_inputs(z.as_slice(), h, spec)?;
    let odds = log_odds(spec)?;
    Ok(score_with(&odds, z.as_slice(), h))
}

fn score_with(odds: &[(usize, f64)], z: &[i8], h: &Hypergraph) -> f64 {
    odds.iter()
        .map(|&(m, w)| w * h.edges(m).iter().filter(|e| in_cluster(e, z)).count() as f64)
        .sum()
}

/// Exhaustive maximum-likelihood estimate over balanced labels with `z_0 = +1`.
/// Ties keep the lexicographically first `+1` support and set `tie`.
pub fn brute_force_mle(h: &Hypergraph, spec: &ModelSpec) -> Result<PartitionResult> {
    let n = h.n();
    if n > BRUTE_LIMIT {
        return Err(Error::SizeLimit { n, limit: BRUTE_LIMIT });
    }
    if !spec.is_assortative() {
        return invalid("the MLE oracle requires an assortative model");
    }
    check_inputs(&vec![1; n], h, spec)?;
    let odds = log_odds(spec)?;
    let (best, _, tie) = argmax_balanced(n, |z| score_with(&odds, z, h));
    let mut result = PartitionResult::new(best, Algorithm::MleOracle);
    result.tie = tie;
    Ok(result)
}

/// Exact log-likelihood `log P(H | z)` summed over every `m`-subset of every
/// layer. Exponential in `m`; for cross-checking on tiny instances only.
pub fn log_likelihood(z: &[i8], h: &Hypergraph, spec: &ModelSpec) -> Result<f64> {
    check_inputs(z, h, spec)?;
    let mut total = 0.0;
    for m in spec.arities() {
        let pr = spec.edge_probabilities(m)?;
        let present: std::collections::HashSet<&[usize]> = h.edges(m).iter().map(Vec::as_slice).collect();
        for e in Combinations::new(h.n(), m) {
            let prob = if in_cluster(&e, z) { pr.p } else { pr.q };
            total += if present.contains(e.as_slice()) {
                prob.ln()
            } else {
                (1.0 - prob).ln()
            };
        }
    }
    Ok(total)
}

/// Monte-Carlo estimate of a weighted-binomial lower tail on the `log n` scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    /// `-log(p_hat) / log_n`, or the bound `log(samples) / log_n` when no hit occurred.
    pub rate: f64,
    /// Delta-method standard error of `rate` (infinite when no hit occurred).
    pub std_error: f64,
    pub hits: u64,
    pub samples: u64,
    /// No sample fell in the tail; `rate` is only a lower bound.
    pub lower_bound: bool,
}

/// Binomial parameters of the tail estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailScale {
    /// Caller-side scale `g(n)`.
    pub g_scale: f64,
    /// `log n`.
    pub log_n: f64,
    /// The combinatorial count (the `C(n-1, m-1)` analogue) shared by all
    /// terms: `N_i = rho_i g K`, `p_i = alpha_i log_n / K`.
    pub count: f64,
}

/// Estimates `P(sum c_i Y_i <= delta g log_n)` with `Y_i ~ Bin(N_i, p_i)` and
/// returns it on the `log n` scale. A statistical cross-check of
/// [`crate::thresholds::rate_function`], never used by the estimators.
pub fn tail_estimate<R: Rng + ?Sized>(spec: &RateSpec, scale: TailScale, samples: u64, rng: &mut R) -> Result<TailEstimate> {
    spec.validate()?;
    if samples < 10_000 {
        return invalid(format!("need at least 10^4 samples, got {samples}"));
    }
    if !(scale.log_n > 0.0 && scale.g_scale > 0.0 && scale.count > 0.0) {
        return invalid("log_n, g_scale and count must be positive");
    }
    let mut dists = Vec::with_capacity(spec.terms.len());
    for t in &spec.terms {
        let trials = (t.rho * scale.g_scale * scale.count).round() as u64;
        let p = t.alpha * scale.log_n / scale.count;
        if !(0.0..=1.0).contains(&p) {
            return invalid(format!("success probability {p} outside [0, 1]; increase count"));
        }
        let d = Binomial::new(trials, p).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        dists.push((t.c, d));
    }
    let threshold = spec.delta * scale.g_scale * scale.log_n;

    const CHUNK: u64 = 1 << 16;
    let base: u64 = rng.random();
    let chunks = samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut local = ChaCha8Rng::seed_from_u64(base ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let count = CHUNK.min(samples - k * CHUNK);
            (0..count)
                .filter(|_| {
                    let x: f64 = dists.iter().map(|(c, d)| c * d.sample(&mut local) as f64).sum();
                    x <= threshold
                })
                .count() as u64
        })
        .sum();

    let s = samples as f64;
    if hits == 0 {
        return Ok(TailEstimate {
            rate: s.ln() / scale.log_n,
            std_error: f64::INFINITY,
            hits,
            samples,
            lower_bound: true,
        });
    }
    let p_hat = hits as f64 / s;
    Ok(TailEstimate {
        rate: -p_hat.ln() / scale.log_n,
        std_error: ((1.0 - p_hat) / (p_hat * s)).sqrt() / scale.log_n,
        hits,
        samples,
        lower_bound: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thresholds::RateTerm;
    use std::collections::BTreeMap;

    fn hypergraph(n: usize, m: usize, edges: &[&[usize]]) -> Hypergraph {
        let mut layers = BTreeMap::new();
        layers.insert(m, edges.iter().map(|e| e.to_vec()).collect());
        Hypergraph::new(n, layers).unwrap()
    }

    #[test]
    fn single_edge_score() {
        let spec = ModelSpec::direct(4, &[(2, 0.6, 0.2)]).unwrap();
        let h = hypergraph(4, 2, &[&[0, 1]]);
        let odds = (0.6f64 * 0.8 / (0.2 * 0.4)).ln();
        let same = LabelVector::new(vec![1, 1, -1, -1]).unwrap();
        let split = LabelVector::new(vec![1, -1, 1, -1]).unwrap();
        assert!((f_score(&same, &h, &spec).unwrap() - odds).abs() < 1e-12);
        assert_eq!(f_score(&split, &h, &spec).unwrap(), 0.0);
        assert_eq!(f_score(&same.negated(), &h, &spec).unwrap(), f_score(&same, &h, &spec).unwrap());
    }

    #[test]
    fn empty_hypergraph_scores_zero_and_ties() {
        let spec = ModelSpec::direct(6, &[(2, 0.6, 0.2)]).unwrap();
        let h = Hypergraph::empty(6);
        assert_eq!(f_score(&LabelVector::blocks(6).unwrap(), &h, &spec).unwrap(), 0.0);
        let res = brute_force_mle(&h, &spec).unwrap();
        assert!(res.tie);
    }

    #[test]
    fn degenerate_probabilities_rejected() {
        let spec = ModelSpec::direct(4, &[(2, 1.0, 0.2)]).unwrap();
        let h = hypergraph(4, 2, &[&[0, 1]]);
        assert!(f_score(&LabelVector::blocks(4).unwrap(), &h, &spec).is_err());
    }

    #[test]
    fn two_triangles() {
        let spec = ModelSpec::direct(6, &[(2, 0.6, 0.2)]).unwrap();
        let h = hypergraph(6, 2, &[&[0, 1], &[1, 2], &[0, 2], &[3, 4], &[4, 5], &[3, 5]]);
        let res = brute_force_mle(&h, &spec).unwrap();
        assert_eq!(res.labels_hat, vec![1, 1, 1, -1, -1, -1]);
        assert!(!res.tie);
    }

    #[test]
    fn size_guard() {
        let spec = ModelSpec::direct(18, &[(2, 0.6, 0.2)]).unwrap();
        assert!(matches!(
            brute_force_mle(&Hypergraph::empty(18), &spec),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn tail_rejects_all_positive_and_few_samples() {
        let pos = RateSpec {
            delta: 0.0,
            terms: vec![RateTerm { c: 1.0, alpha: 1.0, rho: 1.0 }],
        };
        let scale = TailScale {
            g_scale: 1.0,
            log_n: 10.0,
            count: 1e5,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(tail_estimate(&pos, scale, 100_000, &mut rng).is_err());
        let ok = RateSpec::new(
            0.0,
            vec![
                RateTerm { c: 1.0, alpha: 2.0, rho: 1.0 },
                RateTerm { c: -1.0, alpha: 1.0, rho: 1.0 },
            ],
        )
        .unwrap();
        assert!(tail_estimate(&ok, scale, 100, &mut rng).is_err());
    }

    #[test]
    fn tail_near_the_mean_is_likely() {
        // delta just below the drift: the event covers about half the mass
        let terms = vec![
            RateTerm { c: 1.0, alpha: 3.0, rho: 1.0 },
            RateTerm { c: -1.0, alpha: 1.0, rho: 1.0 },
        ];
        let spec = RateSpec::new(2.0 - 1e-6, terms).unwrap();
        let scale = TailScale {
            g_scale: 1.0,
            log_n: 20.0,
            count: 1e6,
        };
        let est = tail_estimate(&spec, scale, 20_000, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert!(est.rate < 0.05, "rate {}", est.rate);
        assert!(!est.lower_bound);
    }

    #[test]
    fn tail_with_no_hits_is_a_bound() {
        let terms = vec![
            RateTerm { c: 1.0, alpha: 50.0, rho: 1.0 },
            RateTerm { c: -1.0, alpha: 0.1, rho: 1.0 },
        ];
        let spec = RateSpec::new(0.0, terms).unwrap();
        let scale = TailScale {
            g_scale: 1.0,
            log_n: 20.0,
            count: 1e6,
        };
        let est = tail_estimate(&spec, scale, 10_000, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert!(est.lower_bound);
        assert_eq!(est.hits, 0);
        assert!((est.rate - 10_000f64.ln() / 20.0).abs() < 1e-12);
    }
}
