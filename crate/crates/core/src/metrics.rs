//! Recovery-quality measures.

use crate::error::{invalid, Result};

/// Fraction of misclassified vertices, minimized over the global sign flip.
///
/// The estimate need not be balanced. Entries must be `+1` or `-1`.
pub fn mismatch_ratio(truth: &[i8], estimate: &[i8]) -> Result<f64> {
    if truth.len() != estimate.len() {
        return invalid(format!(
            "length mismatch: truth has {} entries, estimate has {}",
            truth.len(),
            estimate.len()
        ));
    }
    if truth.is_empty() {
        return invalid("empty label vectors");
    }
    if truth.iter().chain(estimate).any(|&x| x != 1 && x != -1) {
        return invalid("entries must be +1 or -1");
    }
    let disagree = truth.iter().zip(estimate).filter(|(a, b)| a != b).count();
    let n = truth.len();
    Ok(disagree.min(n - disagree) as f64 / n as f64)
}

/// `estimate == +-truth`.
pub fn exact_recovery(truth: &[i8], estimate: &[i8]) -> Result<bool> {
    Ok(mismatch_ratio(truth, estimate)? == 0.0)
}
