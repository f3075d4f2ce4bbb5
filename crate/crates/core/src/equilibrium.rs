//! Firm best responses, simultaneous-update Nash iteration and the collusion oracle.
//!
//! Under a tax schedule the firm's bracket is endogenous: the objective
//! recomputes the firm's own local fairness from the candidate prices (other
//! firms held at the previous round) and applies the matching rate. A frozen
//! bracket would only rescale profit and could never move the argmax.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{log_sum_exp, MarketConfig, PriceMatrix};
use crate::optimize::{self, Bounds, Minimum, PowellOptions};
use crate::stream_seed;
use crate::tax::{bracket_index, TaxSchedule};

/// How a firm's tax bracket reacts to its own price choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BracketMode {
    /// Bracket recomputed from the candidate prices inside the firm's objective.
    Endogenous,
    /// Bracket fixed from the incoming prices before optimizing.
    Frozen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Nash iteration stops once no price moves by more than this.
    pub price_tolerance: f64,
    pub max_rounds: usize,
    /// Relative objective tolerance of each direction-set search.
    pub optimizer_tolerance: f64,
    pub max_optimizer_iterations: usize,
    /// Optimizer starts per taxed best response and per collusion solve.
    pub restarts: usize,
    pub seed: u64,
    pub bracket_mode: BracketMode,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            price_tolerance: 1e-4,
            max_rounds: 200,
            optimizer_tolerance: 1e-10,
            max_optimizer_iterations: 200,
            restarts: 3,
            seed: 0,
            bracket_mode: BracketMode::Endogenous,
        }
    }
}

impl SolverSettings {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.price_tolerance > 0.0 && self.optimizer_tolerance > 0.0) {
            return Err(Error::config("settings.tolerance", "tolerances must be positive"));
        }
        if self.max_rounds == 0 || self.max_optimizer_iterations == 0 || self.restarts == 0 {
            return Err(Error::config("settings", "round, iteration and restart counts must be at least 1"));
        }
        Ok(())
    }

    pub(crate) fn powell_options(&self) -> PowellOptions {
        PowellOptions {
            ftol: self.optimizer_tolerance,
            xtol: 100.0 * self.optimizer_tolerance,
            max_iterations: self.max_optimizer_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub prices: PriceMatrix,
    pub rounds_used: usize,
    pub converged: bool,
    pub max_last_step: f64,
    /// Bracket each firm settled on in its final best response, when taxed.
    pub brackets: Option<Vec<usize>>,
}

/// Minimizes `objective` over `bounds` with Powell's method from `start` plus
/// `settings.restarts - 1` seeded random starts.
pub fn direction_set_minimize<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    start: &[f64],
    bounds: &Bounds,
    settings: &SolverSettings,
) -> Result<Minimum> {
    if !bounds.contains(start) {
        return Err(Error::domain("start point lies outside the bounds"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    optimize::powell_multistart(&mut objective, start, bounds, &settings.powell_options(), settings.restarts, &mut rng)
}

/// Firm `firm`'s view of the market with every other price fixed.
///
/// Selection probabilities reduce to `1 / (1 + exp(rest_i - U_ij))` where
/// `rest_i` is the log-sum-exp of the outside option and the rivals' utilities.
#[derive(Debug, Clone)]
pub struct FirmProblem {
    sizes: Vec<f64>,
    betas: Vec<f64>,
    base_utility: f64,
    costs: Vec<f64>,
    log_rest: Vec<f64>,
}

impl FirmProblem {
    pub fn new(config: &MarketConfig, firm: usize, prices: &PriceMatrix) -> Self {
        let n = config.num_firms();
        let log_rest = config
            .profiles
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let rivals = (0..n)
                    .filter(|&k| k != firm)
                    .map(move |k| config.firms[k].base_utility - p.beta * prices.get(i, k));
                log_sum_exp(std::iter::once(config.outside_utility).chain(rivals))
            })
            .collect();
        FirmProblem {
            sizes: config.profiles.iter().map(|p| p.size).collect(),
            betas: config.profiles.iter().map(|p| p.beta).collect(),
            base_utility: config.firms[firm].base_utility,
            costs: config.firms[firm].marginal_costs.clone(),
            log_rest,
        }
    }

    #[inline]
    fn share(&self, i: usize, price: f64) -> f64 {
        let u = self.base_utility - self.betas[i] * price;
        1.0 / (1.0 + (self.log_rest[i] - u).exp())
    }

    /// Pre-tax expected profit and local fairness score at `prices`.
    #[inline]
    pub fn profit_and_score(&self, prices: &[f64]) -> (f64, f64) {
        let mut profit = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, &p) in prices.iter().enumerate() {
            let s = self.share(i, p);
            profit += self.sizes[i] * s * (p - self.costs[i]);
            lo = lo.min(s);
            hi = hi.max(s);
        }
        (profit, (1.0 - (hi - lo)).clamp(0.0, 1.0))
    }

    pub fn profit(&self, prices: &[f64]) -> f64 {
        prices
            .iter()
            .enumerate()
            .map(|(i, &p)| self.sizes[i] * self.share(i, p) * (p - self.costs[i]))
            .sum()
    }

    /// After-tax profit with the bracket implied by `prices`, and that bracket.
    pub fn taxed_profit(&self, prices: &[f64], schedule: &TaxSchedule) -> (f64, usize) {
        let (profit, score) = self.profit_and_score(prices);
        let b = bracket_index(score, schedule.brackets()).expect("score clamped to [0, 1]");
        (profit * (1.0 - schedule.rate(b)), b)
    }

    pub fn local_score(&self, prices: &[f64]) -> f64 {
        self.profit_and_score(prices).1
    }

    /// Price at which profile `i` selects this firm with probability `share`.
    fn price_for_share(&self, i: usize, share: f64, pmin: f64, pmax: f64) -> f64 {
        if self.betas[i] == 0.0 {
            return pmax;
        }
        let logit = (share / (1.0 - share)).ln();
        ((self.base_utility - self.log_rest[i] - logit) / self.betas[i]).clamp(pmin, pmax)
    }

    /// Most profitable prices whose shares all fit in a band of width `gap`.
    ///
    /// Each profile's profit is unimodal in its own share, so for a fixed band
    /// the best share is the unconstrained optimum (`anchor`) clamped into it,
    /// leaving a one-dimensional search over the band's position.
    pub fn banded_optimum(&self, anchor: &[f64], gap: f64, pmin: f64, pmax: f64) -> Option<Vec<f64>> {
        let m = anchor.len();
        let target: Vec<f64> = (0..m).map(|i| self.share(i, anchor[i])).collect();
        let smin: Vec<f64> = (0..m).map(|i| self.share(i, pmax)).collect();
        let smax: Vec<f64> = (0..m).map(|i| self.share(i, pmin)).collect();
        let lo_min = smin.iter().copied().fold(f64::NEG_INFINITY, f64::max) - gap;
        let lo_max = smax.iter().copied().fold(f64::INFINITY, f64::min);
        if lo_min > lo_max {
            return None;
        }
        let prices_at = |lo: f64| -> Vec<f64> {
            (0..m)
                .map(|i| {
                    let (a, b) = (lo.max(smin[i]), (lo + gap).min(smax[i]));
                    let s = if a <= b { target[i].clamp(a, b) } else { a };
                    if s == target[i] {
                        anchor[i]
                    } else {
                        self.price_for_share(i, s, pmin, pmax)
                    }
                })
                .collect()
        };
        let value = |lo: f64| self.profit(&prices_at(lo));

        const GRID: usize = 48;
        let h = (lo_max - lo_min) / GRID as f64;
        let (mut k_best, mut v_best) = (0, f64::NEG_INFINITY);
        for k in 0..=GRID {
            let v = value(lo_min + k as f64 * h);
            if v > v_best {
                (k_best, v_best) = (k, v);
            }
        }
        let (mut a, mut b) = (lo_min + k_best.saturating_sub(1) as f64 * h, lo_min + (k_best + 1).min(GRID) as f64 * h);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut best_lo = lo_min + k_best as f64 * h;
        for _ in 0..40 {
            let c = b - inv_phi * (b - a);
            let d = a + inv_phi * (b - a);
            let (vc, vd) = (value(c), value(d));
            if vc >= vd {
                b = d;
                if vc > v_best {
                    (v_best, best_lo) = (vc, c);
                }
            } else {
                a = c;
                if vd > v_best {
                    (v_best, best_lo) = (vd, d);
                }
            }
        }
        Some(prices_at(best_lo))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub prices: Vec<f64>,
    /// The firm's objective (after-tax profit when taxed) at `prices`.
    pub objective: f64,
    pub bracket: Option<usize>,
    pub evaluations: usize,
}

/// Best response of `firm` to the other columns of `prices`.
///
/// Column `firm` of `prices` is only used as the warm start. Restarts are
/// seeded from `settings.seed`.
pub fn firm_best_response(
    config: &MarketConfig,
    firm: usize,
    prices: &PriceMatrix,
    schedule: Option<&TaxSchedule>,
    settings: &SolverSettings,
) -> Result<BestResponse> {
    if firm >= config.num_firms() {
        return Err(Error::config("firm", format!("index {firm} out of range")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    best_response_with(config, firm, prices, schedule, settings, &mut rng)
}

fn best_response_with(
    config: &MarketConfig,
    firm: usize,
    prices: &PriceMatrix,
    schedule: Option<&TaxSchedule>,
    settings: &SolverSettings,
    rng: &mut ChaCha8Rng,
) -> Result<BestResponse> {
    let problem = FirmProblem::new(config, firm, prices);
    let m = config.num_profiles();
    let bounds = Bounds::uniform(m, config.price_min, config.price_max)?;
    let mut start = prices.firm_prices(firm);
    bounds.clamp(&mut start);
    let opts = settings.powell_options();

    // Untaxed profit is a sum of per-profile log-concave terms, so one
    // direction-set pass from any start reaches the global maximum.
    let untaxed = optimize::powell(&mut |x: &[f64]| -problem.profit(x), &start, &bounds, &opts)?;
    let Some(schedule) = schedule else {
        return Ok(BestResponse {
            objective: -untaxed.value,
            prices: untaxed.point,
            bracket: None,
            evaluations: untaxed.evaluations,
        });
    };

    match settings.bracket_mode {
        BracketMode::Frozen => {
            let rate = schedule.rate_for_score(problem.local_score(&start))?;
            let keep = 1.0 - rate;
            let r = optimize::powell(&mut |x: &[f64]| -(keep * problem.profit(x)), &start, &bounds, &opts)?;
            Ok(BestResponse {
                objective: -r.value,
                bracket: Some(bracket_index(problem.local_score(&start), schedule.brackets())?),
                prices: r.point,
                evaluations: untaxed.evaluations + r.evaluations,
            })
        }
        BracketMode::Endogenous => {
            let mut evaluations = untaxed.evaluations;
            let (taxed_at_untaxed, b) = problem.taxed_profit(&untaxed.point, schedule);
            // Nothing can beat the untaxed optimum once it already pays the lowest rate.
            if -untaxed.value >= 0.0 && schedule.rate(b) <= schedule.min_rate() {
                return Ok(BestResponse {
                    prices: untaxed.point,
                    objective: taxed_at_untaxed,
                    bracket: Some(b),
                    evaluations,
                });
            }
            let mut starts = vec![untaxed.point.clone(), start.clone()];
            if let Some(x) = banded_candidate(&problem, &untaxed.point, taxed_at_untaxed, b, schedule, config) {
                starts.insert(0, x);
            }
            let mut objective = |x: &[f64]| -problem.taxed_profit(x, schedule).0;
            let mut best: Option<Minimum> = None;
            for _ in 1..settings.restarts {
                starts.push(bounds.sample(rng));
            }
            for s in &starts {
                let r = optimize::powell(&mut objective, s, &bounds, &opts)?;
                evaluations += r.evaluations;
                if best.as_ref().map_or(true, |b| r.value < b.value) {
                    best = Some(r);
                }
            }
            let best = best.expect("at least one start");
            let (obj, b) = problem.taxed_profit(&best.point, schedule);
            Ok(BestResponse { prices: best.point, objective: obj, bracket: Some(b), evaluations })
        }
    }
}

/// Best start found by solving, for each cheaper bracket, the profit
/// maximization with the bracket's fairness floor imposed.
fn banded_candidate(
    problem: &FirmProblem,
    untaxed: &[f64],
    current_value: f64,
    current_bracket: usize,
    schedule: &TaxSchedule,
    config: &MarketConfig,
) -> Option<Vec<f64>> {
    let base_profit = problem.profit(untaxed);
    if !(base_profit > 0.0) {
        return None;
    }
    let brackets = schedule.brackets();
    let current_rate = schedule.rate(current_bracket);
    let mut levels: Vec<usize> = (1..=brackets).filter(|&k| schedule.rate(k) < current_rate).collect();
    levels.sort_by(|a, c| schedule.rate(*a).total_cmp(&schedule.rate(*c)).then(a.cmp(c)));
    let (mut best_value, mut best) = (current_value, None);
    for k in levels {
        if (1.0 - schedule.rate(k)) * base_profit <= best_value {
            break;
        }
        let gap = 1.0 - (k - 1) as f64 / brackets as f64 - 1e-7;
        if let Some(x) = problem.banded_optimum(untaxed, gap, config.price_min, config.price_max) {
            let v = problem.taxed_profit(&x, schedule).0;
            if v > best_value {
                (best_value, best) = (v, Some(x));
            }
        }
    }
    best
}

/// The firm's own objective at `prices` (after tax under the endogenous rule).
pub fn firm_objective(config: &MarketConfig, firm: usize, prices: &PriceMatrix, schedule: Option<&TaxSchedule>) -> f64 {
    let problem = FirmProblem::new(config, firm, prices);
    let own = prices.firm_prices(firm);
    match schedule {
        Some(s) => problem.taxed_profit(&own, s).0,
        None => problem.profit(&own),
    }
}

/// One synchronous round: every firm best-responds to `prices`, then all update at once.
fn play_round(
    config: &MarketConfig,
    prices: &PriceMatrix,
    schedule: Option<&TaxSchedule>,
    settings: &SolverSettings,
    round: usize,
) -> Result<(PriceMatrix, Option<Vec<usize>>)> {
    let responses: Vec<BestResponse> = (0..config.num_firms())
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(settings.seed, &[round as u64, j as u64]));
            best_response_with(config, j, prices, schedule, settings, &mut rng)
        })
        .collect::<Result<_>>()?;
    let mut next = prices.clone();
    for (j, r) in responses.iter().enumerate() {
        next.set_firm_prices(j, &r.prices);
    }
    let brackets = schedule.map(|_| responses.iter().map(|r| r.bracket.unwrap_or(0)).collect());
    Ok((next, brackets))
}

/// Simultaneous best-response iteration from the midpoint of the price box.
pub fn nash_equilibrium(
    config: &MarketConfig,
    schedule: Option<&TaxSchedule>,
    settings: &SolverSettings,
) -> Result<EquilibriumResult> {
    let start = PriceMatrix::uniform(config, config.price_midpoint());
    nash_equilibrium_from(config, schedule, settings, start)
}

pub fn nash_equilibrium_from(
    config: &MarketConfig,
    schedule: Option<&TaxSchedule>,
    settings: &SolverSettings,
    start: PriceMatrix,
) -> Result<EquilibriumResult> {
    config.validate()?;
    settings.validate()?;
    start.check(config)?;
    let mut prices = start;
    let mut brackets = None;
    let mut step = f64::INFINITY;
    for round in 1..=settings.max_rounds {
        let (next, b) = play_round(config, &prices, schedule, settings, round)?;
        step = next.max_abs_diff(&prices);
        prices = next;
        brackets = b;
        if step <= settings.price_tolerance {
            return Ok(EquilibriumResult { prices, rounds_used: round, converged: true, max_last_step: step, brackets });
        }
    }
    Ok(EquilibriumResult {
        prices,
        rounds_used: settings.max_rounds,
        converged: false,
        max_last_step: step,
        brackets,
    })
}

/// Plays exactly `rounds` synchronous rounds from the midpoint, ignoring convergence.
pub fn play_rounds(
    config: &MarketConfig,
    schedule: Option<&TaxSchedule>,
    settings: &SolverSettings,
    rounds: usize,
) -> Result<PriceMatrix> {
    let mut prices = PriceMatrix::uniform(config, config.price_midpoint());
    for round in 1..=rounds {
        prices = play_round(config, &prices, schedule, settings, round)?.0;
    }
    Ok(prices)
}

/// Aggregate pre-tax profit of all firms at a flattened (profile-major) price vector.
pub fn aggregate_profit(config: &MarketConfig, flat: &[f64]) -> f64 {
    let n = config.num_firms();
    let mut total = 0.0;
    let mut utils = vec![0.0; n];
    for (i, p) in config.profiles.iter().enumerate() {
        let row = &flat[i * n..(i + 1) * n];
        for j in 0..n {
            utils[j] = config.firms[j].base_utility - p.beta * row[j];
        }
        let max = utils.iter().copied().fold(config.outside_utility, f64::max);
        let mut denom = (config.outside_utility - max).exp();
        let mut margin = 0.0;
        for j in 0..n {
            let e = (utils[j] - max).exp();
            denom += e;
            margin += e * (row[j] - config.firms[j].marginal_costs[i]);
        }
        total += p.size * margin / denom;
    }
    total
}

/// Joint profit maximization over every price, untaxed.
pub fn collusive_optimum(config: &MarketConfig, settings: &SolverSettings) -> Result<EquilibriumResult> {
    config.validate()?;
    settings.validate()?;
    let dim = config.num_profiles() * config.num_firms();
    let bounds = Bounds::uniform(dim, config.price_min, config.price_max)?;
    let start = vec![config.price_midpoint(); dim];
    let best = direction_set_minimize(|x| -aggregate_profit(config, x), &start, &bounds, settings)?;
    let rows: Vec<Vec<f64>> = best.point.chunks(config.num_firms()).map(<[f64]>::to_vec).collect();
    Ok(EquilibriumResult {
        prices: PriceMatrix::from_rows(&rows)?,
        rounds_used: best.iterations,
        converged: best.converged,
        max_last_step: 0.0,
        brackets: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{ConsumerProfile, FirmSpec};
    use crate::tax::MarketOutcome;

    fn market(betas: &[f64], costs: &[&[f64]]) -> MarketConfig {
        MarketConfig {
            name: "t".into(),
            profiles: betas
                .iter()
                .enumerate()
                .map(|(i, &b)| ConsumerProfile { name: format!("P{i}"), size: 100.0 + 50.0 * i as f64, beta: b })
                .collect(),
            firms: costs
                .iter()
                .enumerate()
                .map(|(j, c)| FirmSpec { name: format!("F{j}"), base_utility: 5.0, marginal_costs: c.to_vec() })
                .collect(),
            outside_utility: 0.0,
            price_min: 1.0,
            price_max: 20.0,
        }
    }

    #[test]
    fn price_insensitive_demand_prices_at_cap() {
        let c = market(&[0.0, 0.0], &[&[1.0, 2.0], &[1.5, 1.0]]);
        let s = SolverSettings::default();
        let br = firm_best_response(&c, 0, &PriceMatrix::uniform(&c, 10.0), None, &s).unwrap();
        assert_eq!(br.prices, vec![20.0, 20.0]);
        let eq = nash_equilibrium(&c, None, &s).unwrap();
        assert!(eq.converged && eq.rounds_used <= 2);
        assert!(eq.prices.0.as_slice().iter().all(|&p| p == 20.0));
        let col = collusive_optimum(&c, &s).unwrap();
        assert!(col.prices.0.as_slice().iter().all(|&p| p == 20.0), "{:?}", col.prices);
    }

    #[test]
    fn identical_profiles_get_identical_prices() {
        let mut c = market(&[0.6, 0.6], &[&[2.0, 2.0], &[2.5, 2.5]]);
        c.profiles[1].size = c.profiles[0].size;
        let br = firm_best_response(&c, 0, &PriceMatrix::uniform(&c, 7.0), None, &SolverSettings::default()).unwrap();
        assert!((br.prices[0] - br.prices[1]).abs() < 1e-6, "{br:?}");
    }

    #[test]
    fn identical_firms_share_equilibrium_prices() {
        let c = market(&[0.4, 0.9], &[&[2.0, 3.0], &[2.0, 3.0], &[2.0, 3.0]]);
        let eq = nash_equilibrium(&c, None, &SolverSettings::default()).unwrap();
        assert!(eq.converged);
        for i in 0..2 {
            for j in 1..3 {
                assert!((eq.prices.get(i, j) - eq.prices.get(i, 0)).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn best_response_improves_on_incoming_prices() {
        let c = market(&[0.3, 0.8, 1.1], &[&[2.0, 3.0, 3.5], &[2.2, 2.8, 3.1]]);
        let sched = crate::tax::linear_baseline(20).unwrap();
        let prices = PriceMatrix::from_rows(&[vec![4.0, 9.0], vec![6.0, 3.0], vec![15.0, 2.0]]).unwrap();
        for sch in [None, Some(&sched)] {
            for j in 0..2 {
                let before = firm_objective(&c, j, &prices, sch);
                let br = firm_best_response(&c, j, &prices, sch, &SolverSettings::default()).unwrap();
                assert!(br.objective >= before - 1e-12);
                let mut after = prices.clone();
                after.set_firm_prices(j, &br.prices);
                assert!((firm_objective(&c, j, &after, sch) - br.objective).abs() < 1e-9);
                assert!(br.prices.iter().all(|&p| (1.0..=20.0).contains(&p)));
            }
        }
    }

    #[test]
    fn zero_tax_schedule_reproduces_free_market() {
        let c = market(&[0.3, 0.8, 1.1], &[&[2.0, 3.0, 3.5], &[2.2, 2.8, 3.1]]);
        let s = SolverSettings::default();
        let free = nash_equilibrium(&c, None, &s).unwrap();
        let zero = TaxSchedule::constant(20, 0.0).unwrap();
        let taxed = nash_equilibrium(&c, Some(&zero), &s).unwrap();
        assert!(free.prices.max_abs_diff(&taxed.prices) < 1e-12);
    }

    #[test]
    fn monopoly_collusion_matches_best_response() {
        let c = market(&[0.5, 0.9], &[&[2.0, 3.0]]);
        let s = SolverSettings::default();
        let eq = nash_equilibrium(&c, None, &s).unwrap();
        let col = collusive_optimum(&c, &s).unwrap();
        assert!(eq.prices.max_abs_diff(&col.prices) < 1e-5, "{:?} vs {:?}", eq.prices, col.prices);
    }

    #[test]
    fn collusion_dominates_competition() {
        let c = market(&[0.3, 0.8, 1.1], &[&[2.0, 3.0, 3.5], &[2.2, 2.8, 3.1]]);
        let s = SolverSettings::default();
        let eq = nash_equilibrium(&c, None, &s).unwrap();
        let col = collusive_optimum(&c, &s).unwrap();
        let free = MarketOutcome::evaluate(&c, &eq.prices, None).unwrap().aggregate_pre_tax_profit();
        let joint = MarketOutcome::evaluate(&c, &col.prices, None).unwrap().aggregate_pre_tax_profit();
        assert!(joint >= free * (1.0 - 1e-9), "{joint} < {free}");
    }

    #[test]
    fn aggregate_profit_matches_outcome() {
        let c = market(&[0.3, 0.8], &[&[2.0, 3.0], &[2.2, 2.8]]);
        let p = PriceMatrix::from_rows(&[vec![4.0, 9.0], vec![6.0, 3.0]]).unwrap();
        let o = MarketOutcome::evaluate(&c, &p, None).unwrap();
        assert!((aggregate_profit(&c, p.0.as_slice()) - o.aggregate_pre_tax_profit()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_settings() {
        let c = market(&[0.3], &[&[2.0]]);
        let s = SolverSettings { restarts: 0, ..Default::default() };
        assert!(nash_equilibrium(&c, None, &s).is_err());
    }
}
