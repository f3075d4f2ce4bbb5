//! Black-box search over bracketed tax schedules.
//!
//! The planner's decision is a single stateless choice of schedule, so the
//! search is a plain elitist cross-entropy method over `[tau_min, tau_max]^B`.
//! Other strategies plug in through [`ScheduleSearch`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{nash_equilibrium, SolverSettings};
use crate::error::{Error, Result};
use crate::market::MarketConfig;
use crate::stream_seed;
use crate::tax::{MarketOutcome, ObjectiveKind, PlannerConfig, TaxSchedule};

/// Smallest per-bracket spread kept after a refit.
const MIN_SPREAD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    pub population_size: usize,
    pub elite_fraction: f64,
    pub generations: usize,
    pub initial_spread: f64,
    pub seed: u64,
    pub evaluation_settings: SolverSettings,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            population_size: 64,
            elite_fraction: 0.125,
            generations: 200,
            initial_spread: 0.05,
            seed: 0,
            evaluation_settings: SolverSettings::default(),
        }
    }
}

impl SearchSettings {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::config("search.population_size", "must be at least 2"));
        }
        if self.generations == 0 {
            return Err(Error::config("search.generations", "must be at least 1"));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction <= 1.0) {
            return Err(Error::config("search.elite_fraction", "must lie in (0, 1]"));
        }
        if !(self.initial_spread.is_finite() && self.initial_spread >= 0.0) {
            return Err(Error::config("search.initial_spread", "must be nonnegative"));
        }
        self.evaluation_settings.validate()
    }

    fn elite_count(&self) -> usize {
        ((self.elite_fraction * self.population_size as f64).round() as usize).clamp(1, self.population_size)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerResult {
    pub best_schedule: TaxSchedule,
    pub best_objective: f64,
    pub best_outcome: MarketOutcome,
    /// Best objective seen up to and including each generation.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

/// Solves the taxed market under `schedule` and scores it for the planner.
pub fn evaluate_schedule(
    config: &MarketConfig,
    schedule: &TaxSchedule,
    planner: &PlannerConfig,
    settings: &SolverSettings,
) -> Result<(f64, MarketOutcome)> {
    if schedule.brackets() != planner.brackets() {
        return Err(Error::config(
            "schedule",
            format!("has {} brackets, planner expects {}", schedule.brackets(), planner.brackets()),
        ));
    }
    if !schedule.within(planner.tau_min, planner.tau_max) {
        return Err(Error::config("schedule", "rates must lie within [tau_min, tau_max]"));
    }
    let eq = nash_equilibrium(config, Some(schedule), settings)?;
    let mut outcome = MarketOutcome::evaluate_with_brackets(config, &eq.prices, Some(schedule), eq.brackets.as_deref())?;
    outcome.converged = eq.converged;
    outcome.rounds = eq.rounds_used;
    let objective = outcome.objective(schedule, planner)?;
    Ok((objective, outcome))
}

pub trait ScheduleSearch {
    /// Searches for the best schedule. `incumbents` are evaluated in the first
    /// generation alongside the planner's baseline.
    fn search(
        &self,
        config: &MarketConfig,
        planner: &PlannerConfig,
        settings: &SearchSettings,
        incumbents: &[TaxSchedule],
    ) -> Result<PlannerResult>;
}

/// Elitist cross-entropy search with independent clamped Gaussians per bracket.
#[derive(Debug, Clone, Copy, Default)]
pub struct CrossEntropySearch;

struct Candidate {
    schedule: TaxSchedule,
    objective: f64,
    outcome: Option<MarketOutcome>,
}

impl ScheduleSearch for CrossEntropySearch {
    fn search(
        &self,
        config: &MarketConfig,
        planner: &PlannerConfig,
        settings: &SearchSettings,
        incumbents: &[TaxSchedule],
    ) -> Result<PlannerResult> {
        config.validate()?;
        planner.validate()?;
        settings.validate()?;
        let b = planner.brackets();
        let (lo, hi) = (planner.tau_min, planner.tau_max);
        let clamp_schedule = |s: &TaxSchedule| TaxSchedule::new(s.rates().iter().map(|r| r.clamp(lo, hi)).collect());

        let mut mean = clamp_schedule(&planner.baseline)?.rates().to_vec();
        let mut spread = vec![settings.initial_spread; b];
        let mut seeded = vec![clamp_schedule(&planner.baseline)?];
        for s in incumbents {
            if s.brackets() != b {
                return Err(Error::config("incumbents", "bracket count differs from the planner baseline"));
            }
            seeded.push(clamp_schedule(s)?);
        }

        let mut best: Option<Candidate> = None;
        let mut history = Vec::with_capacity(settings.generations);
        let mut evaluations = 0;
        let elites = settings.elite_count();

        for generation in 0..settings.generations {
            let fixed: &[TaxSchedule] = if generation == 0 { &seeded } else { &[] };
            let population = settings.population_size.max(fixed.len());
            let mut candidates: Vec<Candidate> = (0..population)
                .into_par_iter()
                .map(|k| {
                    let schedule = match fixed.get(k) {
                        Some(s) => s.clone(),
                        None => {
                            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(settings.seed, &[generation as u64, k as u64]));
                            let rates = (0..b)
                                .map(|i| {
                                    let z: f64 = StandardNormal.sample(&mut rng);
                                    (mean[i] + spread[i] * z).clamp(lo, hi)
                                })
                                .collect();
                            TaxSchedule::new(rates).expect("clamped rates lie in [0, 1]")
                        }
                    };
                    match evaluate_schedule(config, &schedule, planner, &settings.evaluation_settings) {
                        Ok((objective, outcome)) if objective.is_finite() => {
                            Candidate { schedule, objective, outcome: Some(outcome) }
                        }
                        _ => Candidate { schedule, objective: f64::NEG_INFINITY, outcome: None },
                    }
                })
                .collect();
            evaluations += candidates.len();

            // Stable sort keeps the lower candidate index first among ties.
            candidates.sort_by(|a, c| c.objective.total_cmp(&a.objective));
            let top = &candidates[0];
            if top.outcome.is_some() && best.as_ref().map_or(true, |cur| top.objective > cur.objective) {
                best = Some(Candidate { schedule: top.schedule.clone(), objective: top.objective, outcome: top.outcome.clone() });
            }

            let mut pool: Vec<&TaxSchedule> = candidates.iter().take(elites).filter(|c| c.objective.is_finite()).map(|c| &c.schedule).collect();
            if let Some(cur) = &best {
                if !pool.iter().any(|s| *s == &cur.schedule) {
                    pool.pop();
                    pool.insert(0, &cur.schedule);
                }
            }
            if !pool.is_empty() {
                let k = pool.len() as f64;
                for i in 0..b {
                    let mu = pool.iter().map(|s| s.rates()[i]).sum::<f64>() / k;
                    let var = pool.iter().map(|s| (s.rates()[i] - mu).powi(2)).sum::<f64>() / k;
                    mean[i] = mu;
                    spread[i] = var.sqrt().max(MIN_SPREAD);
                }
            }
            history.push(best.as_ref().map_or(f64::NEG_INFINITY, |c| c.objective));
        }

        let best = best.ok_or_else(|| Error::numeric("no candidate schedule produced a finite objective"))?;
        Ok(PlannerResult {
            best_schedule: best.schedule,
            best_objective: best.objective,
            best_outcome: best.outcome.expect("finite candidates carry outcomes"),
            history,
            evaluations,
        })
    }
}

pub fn search_schedule(config: &MarketConfig, planner: &PlannerConfig, settings: &SearchSettings) -> Result<PlannerResult> {
    CrossEntropySearch.search(config, planner, settings, &[])
}

/// Fairness-maximizing planner with no penalty.
///
/// The all-`tau_min` schedule is always a candidate, so the bound never falls
/// below the least-taxed market's global score.
pub fn fairness_search(
    config: &MarketConfig,
    planner: &PlannerConfig,
    settings: &SearchSettings,
    incumbents: &[TaxSchedule],
) -> Result<PlannerResult> {
    let fair = PlannerConfig { lambda: 0.0, objective: ObjectiveKind::FairnessMax, ..planner.clone() };
    let mut seeded = vec![TaxSchedule::constant(planner.brackets(), planner.tau_min)?];
    seeded.extend_from_slice(incumbents);
    CrossEntropySearch.search(config, &fair, settings, &seeded)
}

/// Global fairness score reached by the fairness-maximizing planner.
pub fn fairness_upper_bound(config: &MarketConfig, planner: &PlannerConfig, settings: &SearchSettings) -> Result<f64> {
    Ok(fairness_search(config, planner, settings, &[])?.best_outcome.fairness.global_score)
}
