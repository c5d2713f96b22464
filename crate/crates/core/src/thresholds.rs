//! Exact-recovery thresholds.
//!
//! Both divergences are values of the weighted-binomial rate function
//!
//! ```text
//! D = max_{t >= 0}  -t delta + sum_i alpha_i rho_i (1 - exp(-c_i t))
//! ```
//!
//! which is strictly concave in `t` as soon as one coefficient is non-zero,
//! and has an interior maximizer when `g'(0) = sum c alpha rho - delta > 0`
//! and some `c_i < 0`.
//!
//! - `D_GH = sum_m (sqrt(a_m) - sqrt(b_m))^2 / 2^(m-1)` uses the term pair
//!   `(+-ln(a_m/b_m), a_m | b_m, 2^(1-m))` per layer and is attained at `t = 1/2`.
//! - `D_SDP` uses, per layer, `(m-1, a_m)` and `(m-1-2r, b_m C(m-1, r))` for
//!   `r = 1..m-1`, all with density `2^(1-m)`, maximized jointly over layers.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::combinatorics::binomial;
use crate::error::{invalid, Result};
use crate::model::ModelSpec;

/// One `(c, alpha, rho)` term of the rate function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateTerm {
    pub c: f64,
    pub alpha: f64,
    pub rho: f64,
}

/// Arguments of the rate function: target offset `delta` and the terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSpec {
    pub delta: f64,
    pub terms: Vec<RateTerm>,
}

impl RateSpec {
    pub fn new(delta: f64, terms: Vec<RateTerm>) -> Result<Self> {
        let spec = Self { delta, terms };
        spec.validate()?;
        Ok(spec)
    }

    /// `sum c alpha rho`, the mean drift per unit scale.
    pub fn drift(&self) -> f64 {
        self.terms.iter().map(|t| t.c * t.alpha * t.rho).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta.is_finite() {
            return invalid("delta must be finite");
        }
        for t in &self.terms {
            if !(t.c.is_finite() && t.alpha.is_finite() && t.rho.is_finite()) || t.alpha <= 0.0 || t.rho <= 0.0 {
                return invalid(format!("invalid rate term {t:?}: alpha and rho must be positive"));
            }
        }
        if !self.terms.iter().any(|t| t.c < 0.0) {
            return invalid("at least one coefficient c must be negative");
        }
        let drift = self.drift();
        if drift <= self.delta {
            return invalid(format!("need sum(c*alpha*rho) = {drift} > delta = {}", self.delta));
        }
        Ok(())
    }

    /// `g(t) = -t delta + sum alpha rho (1 - e^{-c t})`.
    pub fn objective(&self, t: f64) -> f64 {
        -t * self.delta
            + self
                .terms
                .iter()
                .map(|x| x.alpha * x.rho * (-(-x.c * t).exp_m1()))
                .sum::<f64>()
    }

    /// `g'(t) = -delta + sum alpha c rho e^{-c t}`.
    pub fn derivative(&self, t: f64) -> f64 {
        -self.delta
            + self
                .terms
                .iter()
                .map(|x| x.alpha * x.c * x.rho * (-x.c * t).exp())
                .sum::<f64>()
    }
}

/// Value and maximizer of the rate function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateOptimum {
    pub value: f64,
    pub t_star: f64,
}

const INTERVAL_TOL: f64 = 1e-10;

/// Maximizes the rate function over `t >= 0`.
///
/// Zero-coefficient terms are constant zero and are dropped first. The upper
/// bracket doubles from 1 until `g'` turns negative; a golden-section search
/// then shrinks the bracket to `1e-10`.
pub fn rate_function(spec: &RateSpec) -> Result<RateOptimum> {
    spec.validate()?;
    let reduced = RateSpec {
        delta: spec.delta,
        terms: spec.terms.iter().copied().filter(|t| t.c != 0.0).collect(),
    };
    let mut hi = 1.0;
    while reduced.derivative(hi) >= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return invalid("rate function has no finite maximizer");
        }
    }
    Ok(golden_section_max(&reduced, 0.0, hi))
}

/// Golden-section search for the maximum of the (strictly concave) objective
/// on `[lo, hi]`.
pub fn golden_section_max(spec: &RateSpec, mut lo: f64, mut hi: f64) -> RateOptimum {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = spec.objective(x1);
    let mut f2 = spec.objective(x2);
    while hi - lo > INTERVAL_TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = spec.objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = spec.objective(x1);
        }
    }
    let t_star = 0.5 * (lo + hi);
    RateOptimum {
        value: spec.objective(t_star),
        t_star,
    }
}

/// Divergences of a model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub d_gh: f64,
    pub d_sdp: f64,
    pub per_layer_gh: BTreeMap<usize, f64>,
    pub per_layer_sdp: BTreeMap<usize, f64>,
    pub t_star_sdp: f64,
    pub t_star_gh: f64,
}

/// `(sqrt(a) - sqrt(b))^2 / 2^(m-1)`.
pub fn layer_gh(m: usize, a: f64, b: f64) -> f64 {
    (a.sqrt() - b.sqrt()).powi(2) / 2f64.powi(m as i32 - 1)
}

/// Rate-function terms whose maximum is the generalized Hellinger divergence.
/// Layers with `a = b` contribute nothing and yield no terms.
pub fn gh_terms(spec: &ModelSpec) -> Result<Vec<RateTerm>> {
    let mut terms = Vec::new();
    for m in spec.arities() {
        let (a, b) = spec.intensities(m)?;
        if a == b {
            continue;
        }
        if a <= 0.0 || b <= 0.0 {
            return invalid(format!("layer {m}: the variational form needs a, b > 0"));
        }
        let llr = (a / b).ln();
        let rho = 2f64.powi(1 - m as i32);
        terms.push(RateTerm { c: llr, alpha: a, rho });
        terms.push(RateTerm { c: -llr, alpha: b, rho });
    }
    Ok(terms)
}

/// Rate-function terms of the SDP divergence for one layer; `c = 0` terms dropped.
pub fn sdp_layer_terms(m: usize, a: f64, b: f64) -> Vec<RateTerm> {
    let rho = 2f64.powi(1 - m as i32);
    let mut terms = vec![RateTerm {
        c: (m - 1) as f64,
        alpha: a,
        rho,
    }];
    for r in 1..m {
        let c = m as f64 - 1.0 - 2.0 * r as f64;
        if c != 0.0 {
            terms.push(RateTerm {
                c,
                alpha: b * binomial(m - 1, r),
                rho,
            });
        }
    }
    terms
}

/// Closed-form generalized Hellinger divergence.
pub fn d_gh(spec: &ModelSpec) -> Result<DivergenceReport> {
    let mut per_layer_gh = BTreeMap::new();
    for m in spec.arities() {
        let (a, b) = spec.intensities(m)?;
        per_layer_gh.insert(m, layer_gh(m, a, b));
    }
    Ok(DivergenceReport {
        d_gh: per_layer_gh.values().sum(),
        d_sdp: f64::NAN,
        per_layer_gh,
        per_layer_sdp: BTreeMap::new(),
        t_star_sdp: f64::NAN,
        t_star_gh: 0.5,
    })
}

/// Generalized Hellinger divergence through the rate function, as an
/// independent route to the closed form.
pub fn d_gh_variational(spec: &ModelSpec) -> Result<RateOptimum> {
    let terms = gh_terms(spec)?;
    if terms.is_empty() {
        return Ok(RateOptimum { value: 0.0, t_star: 0.5 });
    }
    rate_function(&RateSpec::new(0.0, terms)?)
}

/// Maximizes a term set that may not satisfy the rate-function preconditions:
/// a non-positive drift gives the boundary optimum `t = 0`, and a set without
/// negative coefficients is unbounded in `t` with supremum `sum alpha rho` over
/// the positive terms.
fn maximize_terms(terms: Vec<RateTerm>) -> Result<RateOptimum> {
    let terms: Vec<_> = terms.into_iter().filter(|t| t.alpha > 0.0 && t.c != 0.0).collect();
    let spec = RateSpec { delta: 0.0, terms };
    if spec.terms.is_empty() || spec.drift() <= 0.0 {
        return Ok(RateOptimum { value: 0.0, t_star: 0.0 });
    }
    if !spec.terms.iter().any(|t| t.c < 0.0) {
        let sup = spec.terms.iter().map(|t| t.alpha * t.rho).sum();
        return Ok(RateOptimum {
            value: sup,
            t_star: f64::INFINITY,
        });
    }
    rate_function(&spec)
}

/// SDP divergence, jointly maximized over all layers.
pub fn d_sdp(spec: &ModelSpec) -> Result<DivergenceReport> {
    let mut terms = Vec::new();
    let mut per_layer_sdp = BTreeMap::new();
    for m in spec.arities() {
        let (a, b) = spec.intensities(m)?;
        let layer = sdp_layer_terms(m, a, b);
        per_layer_sdp.insert(m, maximize_terms(layer.clone())?.value);
        terms.extend(layer);
    }
    let opt = maximize_terms(terms)?;
    if !spec.is_assortative() {
        log::warn!("SDP divergence evaluated on a non-assortative model");
    }
    Ok(DivergenceReport {
        d_gh: f64::NAN,
        d_sdp: opt.value,
        per_layer_gh: BTreeMap::new(),
        per_layer_sdp,
        t_star_sdp: opt.t_star,
        t_star_gh: 0.5,
    })
}

/// Both divergences with all fields filled.
pub fn divergences(spec: &ModelSpec) -> Result<DivergenceReport> {
    let gh = d_gh(spec)?;
    let sdp = d_sdp(spec)?;
    Ok(DivergenceReport {
        d_sdp: sdp.d_sdp,
        per_layer_sdp: sdp.per_layer_sdp,
        t_star_sdp: sdp.t_star_sdp,
        ..gh
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_max(spec: &RateSpec, hi: f64, step: f64) -> (f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0.0);
        let steps = (hi / step) as usize;
        for k in 0..=steps {
            let t = k as f64 * step;
            let g = spec.objective(t);
            if g > best.0 {
                best = (g, t);
            }
        }
        best
    }

    #[test]
    fn rate_function_gh_pair() {
        let l4 = 4f64.ln();
        let spec = RateSpec::new(
            0.0,
            vec![
                RateTerm { c: l4, alpha: 4.0, rho: 0.5 },
                RateTerm { c: -l4, alpha: 1.0, rho: 0.5 },
            ],
        )
        .unwrap();
        let opt = rate_function(&spec).unwrap();
        // dense grid oracle on [0, 5] with step 1e-6
        let (gv, gt) = grid_max(&spec, 5.0, 1e-6);
        assert!((gv - 0.5).abs() < 1e-9);
        assert!((gt - 0.5).abs() < 2e-6);
        assert!((opt.value - 0.5).abs() < 1e-12);
        assert!((opt.t_star - 0.5).abs() < 1e-8);
    }

    #[test]
    fn rate_function_rejects_boundary_delta() {
        let terms = vec![
            RateTerm { c: 1.0, alpha: 3.0, rho: 1.0 },
            RateTerm { c: -1.0, alpha: 1.0, rho: 1.0 },
        ];
        let drift = 2.0;
        assert!(RateSpec::new(drift, terms.clone()).is_err());
        let mut prev = f64::INFINITY;
        for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
            let opt = rate_function(&RateSpec::new(drift - eps, terms.clone()).unwrap()).unwrap();
            assert!(opt.value < prev);
            assert!(opt.t_star < 10.0 * eps);
            prev = opt.value;
        }
        assert!(prev < 1e-7);
    }

    #[test]
    fn rate_function_rejects_all_positive() {
        let terms = vec![RateTerm { c: 1.0, alpha: 3.0, rho: 1.0 }];
        assert!(RateSpec::new(0.0, terms).is_err());
    }

    #[test]
    fn symmetric_pair_stationary_point() {
        for &(a, b, c) in &[(5.0, 2.0, 0.7), (9.0, 1.0, 2.0), (1.5, 1.2, 0.3)] {
            let spec = RateSpec::new(
                0.0,
                vec![
                    RateTerm { c, alpha: a, rho: 0.25 },
                    RateTerm { c: -c, alpha: b, rho: 0.25 },
                ],
            )
            .unwrap();
            let opt = rate_function(&spec).unwrap();
            let expected = (a / b).ln() / (2.0 * c);
            assert!((opt.t_star - expected).abs() < 1e-8, "{} vs {}", opt.t_star, expected);
        }
    }

    #[test]
    fn table_one_entry() {
        let spec = ModelSpec::scaled(100, &[(4, 128.0, 72.0)]).unwrap();
        let r = divergences(&spec).unwrap();
        assert!((r.d_gh - 1.0).abs() < 1e-12);
        assert!((r.d_sdp - 0.80).abs() < 0.01);
        assert!(r.d_sdp < r.d_gh - 1e-6);
    }

    #[test]
    fn graph_layer_equality() {
        let spec = ModelSpec::scaled(100, &[(2, 4.0, 1.0)]).unwrap();
        let r = divergences(&spec).unwrap();
        assert!((r.d_gh - 0.5).abs() < 1e-12);
        assert!((r.d_sdp - 0.5).abs() < 1e-9);
    }

    #[test]
    fn zero_signal() {
        let spec = ModelSpec::scaled(100, &[(3, 5.0, 5.0)]).unwrap();
        let r = divergences(&spec).unwrap();
        assert_eq!(r.d_gh, 0.0);
        assert_eq!(r.d_sdp, 0.0);
        assert_eq!(d_gh_variational(&spec).unwrap().value, 0.0);
    }

    #[test]
    fn sdp_terms_drop_zero_coefficient() {
        let t = sdp_layer_terms(3, 10.0, 2.0);
        // c = 2 for a, then r=1 -> c=0 dropped, r=2 -> c=-2
        assert_eq!(t.len(), 2);
        assert_eq!(t[1].c, -2.0);
        assert_eq!(t[1].alpha, 2.0);
        let t = sdp_layer_terms(4, 10.0, 2.0);
        assert_eq!(t.iter().map(|x| x.c).collect::<Vec<_>>(), vec![3.0, 1.0, -1.0, -3.0]);
    }

    #[test]
    fn disassortative_sdp_is_zero() {
        let spec = ModelSpec::scaled(100, &[(4, 50.0, 80.0)]).unwrap();
        let r = d_sdp(&spec).unwrap();
        assert_eq!(r.d_sdp, 0.0);
        assert_eq!(r.t_star_sdp, 0.0);
        let gh = d_gh(&spec).unwrap();
        assert!(gh.d_gh > 0.0);
    }
}
