//! Demand-fairness gaps and the bounds that relate firm-level to market-level gaps.
//!
//! A firm's local gap is the spread of its selection probability across
//! profiles; the global gap is the spread of the opt-out probability. Scores
//! are `1 - gap`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::ChoiceMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub local_gaps: Vec<f64>,
    pub local_scores: Vec<f64>,
    pub global_gap: f64,
    pub global_score: f64,
}

impl FairnessReport {
    pub fn from_choices(choices: &ChoiceMatrix) -> Self {
        let local_gaps: Vec<f64> = (0..choices.num_firms()).map(|j| spread(choices.firm_column(j))).collect();
        let local_scores = local_gaps.iter().map(|g| 1.0 - g).collect();
        let global_gap = global_fairness_gap(choices);
        FairnessReport {
            local_gaps,
            local_scores,
            global_gap,
            global_score: 1.0 - global_gap,
        }
    }

    pub fn max_local_gap(&self) -> f64 {
        self.local_gaps.iter().copied().fold(0.0, f64::max)
    }
}

/// `max_{i,k} |x_i - x_k|`, which is `max - min`; zero for fewer than two values.
pub(crate) fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut it = values.into_iter();
    let Some(first) = it.next() else { return 0.0 };
    let (lo, hi) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// Local fairness gap of firm `firm` (zero-based).
pub fn local_fairness_gap(choices: &ChoiceMatrix, firm: usize) -> Result<f64> {
    if firm >= choices.num_firms() {
        return Err(Error::domain(format!(
            "firm index {firm} out of range for {} firms; the outside option is covered by the global gap",
            choices.num_firms()
        )));
    }
    Ok(spread(choices.firm_column(firm)))
}

pub fn global_fairness_gap(choices: &ChoiceMatrix) -> f64 {
    spread((0..choices.num_profiles()).map(|i| choices.outside(i)))
}

/// Worst-case global gap implied by every firm being `epsilon`-locally fair.
pub fn prop1_bound(n_firms: usize, epsilon: f64) -> Result<f64> {
    if n_firms == 0 {
        return Err(Error::domain("need at least one firm"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::domain(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    Ok((n_firms as f64 * epsilon).min(1.0))
}

/// High-probability global gap bound `2 eps sqrt((N/2) ln(2/delta))`, assuming
/// independent per-firm differences bounded by `eps`.
pub fn hoeffding_gap_bound(n_firms: usize, epsilon: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 2.0) {
        return Err(Error::domain(format!("delta must lie in (0, 2], got {delta}")));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    let n = n_firms as f64;
    Ok(2.0 * epsilon * (n / 2.0 * (2.0 / delta).ln()).sqrt())
}

/// Bernstein tail probability `2 exp(-t^2 / (2 N sigma^2 + (2/3) eps t))`, capped at one.
pub fn bernstein_tail_bound(n_firms: usize, epsilon: f64, sigma_sq: f64, t: f64) -> Result<f64> {
    if [epsilon, sigma_sq, t].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::domain("epsilon, sigma_sq and t must be nonnegative and finite"));
    }
    let denom = 2.0 * n_firms as f64 * sigma_sq + 2.0 / 3.0 * epsilon * t;
    if denom <= 0.0 {
        return Err(Error::domain("Bernstein denominator is zero"));
    }
    Ok((2.0 * (-t * t / denom).exp()).clamp(0.0, 1.0))
}
