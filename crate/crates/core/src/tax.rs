//! Bracketed fairness tax, welfare and the planner's penalized objective.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::FairnessReport;
use crate::market::{self, ChoiceMatrix, MarketConfig, PriceMatrix};

/// Per-bracket tax rates. Bracket `b` (1-based) covers local fairness scores in
/// `[(b-1)/B, b/B)`, with a score of exactly 1 assigned to the top bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaxSchedule {
    rates: Vec<f64>,
}

impl TaxSchedule {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::config("brackets", "a schedule needs at least one bracket"));
        }
        if let Some((b, r)) = rates.iter().enumerate().find(|(_, r)| !(0.0..=1.0).contains(*r)) {
            return Err(Error::config(format!("rates[{b}]"), format!("rate {r} outside [0, 1]")));
        }
        Ok(TaxSchedule { rates })
    }

    pub fn constant(brackets: usize, rate: f64) -> Result<Self> {
        Self::new(vec![rate; brackets])
    }

    pub fn brackets(&self) -> usize {
        self.rates.len()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Rate for a 1-based bracket index.
    pub fn rate(&self, bracket: usize) -> f64 {
        self.rates[bracket - 1]
    }

    /// Rate in force for a firm with local fairness score `score`.
    pub fn rate_for_score(&self, score: f64) -> Result<f64> {
        Ok(self.rate(bracket_index(score, self.brackets())?))
    }

    pub fn min_rate(&self) -> f64 {
        self.rates.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn within(&self, tau_min: f64, tau_max: f64) -> bool {
        self.rates.iter().all(|r| (tau_min..=tau_max).contains(r))
    }

    /// `(low, high, rate)` rows describing each bracket's score interval.
    pub fn table(&self) -> Vec<(f64, f64, f64)> {
        let b = self.brackets() as f64;
        self.rates
            .iter()
            .enumerate()
            .map(|(k, &r)| (k as f64 / b, (k + 1) as f64 / b, r))
            .collect()
    }
}

pub fn bracket_index(score: f64, brackets: usize) -> Result<usize> {
    if brackets == 0 {
        return Err(Error::domain("bracket count must be at least 1"));
    }
    if !(0.0..=1.0).contains(&score) {
        return Err(Error::domain(format!("fairness score {score} outside [0, 1]")));
    }
    let b = (score * brackets as f64).floor() as usize + 1;
    Ok(b.min(brackets))
}

/// Monotone prior `tau_b = 1 - b/B`.
pub fn linear_baseline(brackets: usize) -> Result<TaxSchedule> {
    if brackets == 0 {
        return Err(Error::domain("bracket count must be at least 1"));
    }
    let bf = brackets as f64;
    TaxSchedule::new((1..=brackets).map(|b| 1.0 - b as f64 / bf).collect())
}

pub fn net_profit(pre_tax: f64, score: f64, schedule: &TaxSchedule) -> Result<f64> {
    Ok(pre_tax * (1.0 - schedule.rate_for_score(score)?))
}

/// Mean net profit scaled by the global fairness score.
pub fn welfare(net_profits: &[f64], global_score: f64) -> Result<f64> {
    if net_profits.is_empty() {
        return Err(Error::domain("welfare needs at least one firm"));
    }
    Ok(mean(net_profits) * global_score)
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    WelfareMax,
    FairnessMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub lambda: f64,
    pub baseline: TaxSchedule,
    pub objective: ObjectiveKind,
    pub tau_min: f64,
    pub tau_max: f64,
}

impl PlannerConfig {
    /// Welfare-maximizing planner anchored to the linear baseline over `[0, 1]` rates.
    pub fn linear(brackets: usize, lambda: f64) -> Result<Self> {
        let cfg = PlannerConfig {
            lambda,
            baseline: linear_baseline(brackets)?,
            objective: ObjectiveKind::WelfareMax,
            tau_min: 0.0,
            tau_max: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn brackets(&self) -> usize {
        self.baseline.brackets()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::config("planner.lambda", "must be a nonnegative finite real"));
        }
        if !(0.0 <= self.tau_min && self.tau_min <= self.tau_max && self.tau_max <= 1.0) {
            return Err(Error::config("planner.tau_min", "rate bounds must satisfy 0 <= tau_min <= tau_max <= 1"));
        }
        Ok(())
    }
}

/// `lambda * sum_b |tau_b - base_b|`.
pub fn l1_penalty(schedule: &TaxSchedule, config: &PlannerConfig) -> Result<f64> {
    if schedule.brackets() != config.baseline.brackets() {
        return Err(Error::config(
            "schedule",
            format!(
                "has {} brackets but the baseline has {}",
                schedule.brackets(),
                config.baseline.brackets()
            ),
        ));
    }
    let dev: f64 = schedule
        .rates()
        .iter()
        .zip(config.baseline.rates())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(config.lambda * dev)
}

pub fn planner_objective(welfare: f64, penalty: f64) -> f64 {
    welfare - penalty
}

/// Everything observable about a market once prices are fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketOutcome {
    pub prices: PriceMatrix,
    pub choices: ChoiceMatrix,
    pub pre_tax_profits: Vec<f64>,
    /// Rate applied to each firm; all zero when no schedule is in force.
    pub tax_rates: Vec<f64>,
    /// 1-based bracket of each firm, when a schedule is in force.
    pub brackets: Option<Vec<usize>>,
    pub net_profits: Vec<f64>,
    pub fairness: FairnessReport,
    pub opt_out: Vec<f64>,
    pub weighted_opt_out: f64,
    pub welfare: f64,
    pub converged: bool,
    pub rounds: usize,
}

impl MarketOutcome {
    pub fn evaluate(config: &MarketConfig, prices: &PriceMatrix, schedule: Option<&TaxSchedule>) -> Result<Self> {
        Self::evaluate_with_brackets(config, prices, schedule, None)
    }

    /// Like [`MarketOutcome::evaluate`], but taxes each firm at an already
    /// assigned bracket instead of the one implied by its score at `prices`.
    pub fn evaluate_with_brackets(
        config: &MarketConfig,
        prices: &PriceMatrix,
        schedule: Option<&TaxSchedule>,
        assigned: Option<&[usize]>,
    ) -> Result<Self> {
        let choices = market::choice_probabilities(config, prices)?;
        let pre_tax_profits = market::expected_profits(config, prices, &choices);
        let fairness = FairnessReport::from_choices(&choices);
        let (tax_rates, brackets) = match schedule {
            Some(s) if assigned.is_some() => {
                let bs = assigned.unwrap_or_default().to_vec();
                if bs.len() != config.num_firms() || bs.iter().any(|&b| b == 0 || b > s.brackets()) {
                    return Err(Error::config("brackets", "one bracket in 1..=B per firm"));
                }
                (bs.iter().map(|&b| s.rate(b)).collect(), Some(bs))
            }
            Some(s) => {
                let mut rates = Vec::with_capacity(config.num_firms());
                let mut bs = Vec::with_capacity(config.num_firms());
                for &score in &fairness.local_scores {
                    let b = bracket_index(score, s.brackets())?;
                    bs.push(b);
                    rates.push(s.rate(b));
                }
                (rates, Some(bs))
            }
            None => (vec![0.0; config.num_firms()], None),
        };
        let net_profits: Vec<f64> = pre_tax_profits
            .iter()
            .zip(&tax_rates)
            .map(|(p, t)| p * (1.0 - t))
            .collect();
        let welfare = welfare(&net_profits, fairness.global_score)?;
        Ok(MarketOutcome {
            opt_out: market::opt_out_rates(&choices),
            weighted_opt_out: market::weighted_opt_out(config, &choices),
            prices: prices.clone(),
            choices,
            pre_tax_profits,
            tax_rates,
            brackets,
            net_profits,
            fairness,
            welfare,
            converged: true,
            rounds: 0,
        })
    }

    pub fn mean_net_profit(&self) -> f64 {
        mean(&self.net_profits)
    }

    pub fn mean_pre_tax_profit(&self) -> f64 {
        mean(&self.pre_tax_profits)
    }

    pub fn aggregate_pre_tax_profit(&self) -> f64 {
        self.pre_tax_profits.iter().sum()
    }

    /// Planner objective value of this outcome under `schedule`.
    pub fn objective(&self, schedule: &TaxSchedule, planner: &PlannerConfig) -> Result<f64> {
        let penalty = l1_penalty(schedule, planner)?;
        let gain = match planner.objective {
            ObjectiveKind::WelfareMax => self.welfare,
            ObjectiveKind::FairnessMax => self.fairness.global_score,
        };
        Ok(planner_objective(gain, penalty))
    }
}
