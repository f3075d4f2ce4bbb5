//! Market regimes, multi-seed comparison reports and their CSV/JSON forms.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{collusive_optimum, nash_equilibrium, SolverSettings};
use crate::error::{Error, Result};
use crate::market::{MarketConfig, PriceMatrix};
use crate::planner::{evaluate_schedule, search_schedule, PlannerResult, SearchSettings};
use crate::tax::{mean, MarketOutcome, PlannerConfig, TaxSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeKind {
    FreeMarket,
    LinearSp,
    PlannerSp,
    Collusion,
}

impl RegimeKind {
    pub const ALL: [RegimeKind; 4] = [RegimeKind::FreeMarket, RegimeKind::LinearSp, RegimeKind::PlannerSp, RegimeKind::Collusion];

    pub fn as_str(self) -> &'static str {
        match self {
            RegimeKind::FreeMarket => "free-market",
            RegimeKind::LinearSp => "linear-sp",
            RegimeKind::PlannerSp => "planner-sp",
            RegimeKind::Collusion => "collusion",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RegimeKind::FreeMarket => "Free Market",
            RegimeKind::LinearSp => "Linear-SP",
            RegimeKind::PlannerSp => "Planner-SP",
            RegimeKind::Collusion => "Collusion",
        }
    }
}

impl std::str::FromStr for RegimeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RegimeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown regime {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub kind: RegimeKind,
    pub planner: Option<PlannerConfig>,
    pub search: Option<SearchSettings>,
}

impl RegimeSpec {
    pub fn free_market() -> Self {
        RegimeSpec { kind: RegimeKind::FreeMarket, planner: None, search: None }
    }

    pub fn linear_sp(planner: PlannerConfig) -> Self {
        RegimeSpec { kind: RegimeKind::LinearSp, planner: Some(planner), search: None }
    }

    pub fn planner_sp(planner: PlannerConfig, search: SearchSettings) -> Self {
        RegimeSpec { kind: RegimeKind::PlannerSp, planner: Some(planner), search: Some(search) }
    }

    pub fn collusion() -> Self {
        RegimeSpec { kind: RegimeKind::Collusion, planner: None, search: None }
    }

    /// The four standard regimes in table order.
    pub fn standard(planner: &PlannerConfig, search: &SearchSettings) -> Vec<RegimeSpec> {
        vec![
            Self::free_market(),
            Self::linear_sp(planner.clone()),
            Self::planner_sp(planner.clone(), search.clone()),
            Self::collusion(),
        ]
    }

    fn planner_config(&self) -> Result<&PlannerConfig> {
        self.planner
            .as_ref()
            .ok_or_else(|| Error::config("regime.planner", format!("{} needs a planner configuration", self.kind.as_str())))
    }
}

/// One regime solved once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRun {
    pub kind: RegimeKind,
    pub outcome: MarketOutcome,
    pub schedule: Option<TaxSchedule>,
    pub search: Option<PlannerResult>,
}

pub fn run_regime(config: &MarketConfig, regime: &RegimeSpec, settings: &SolverSettings) -> Result<MarketOutcome> {
    Ok(run_regime_detailed(config, regime, settings)?.outcome)
}

/// Solves `regime`. A planner regime searches with `settings` as its
/// evaluation settings and reports the equilibrium under its best schedule.
pub fn run_regime_detailed(config: &MarketConfig, regime: &RegimeSpec, settings: &SolverSettings) -> Result<RegimeRun> {
    let (outcome, schedule, search) = match regime.kind {
        RegimeKind::FreeMarket => {
            let eq = nash_equilibrium(config, None, settings)?;
            let mut o = MarketOutcome::evaluate(config, &eq.prices, None)?;
            o.converged = eq.converged;
            o.rounds = eq.rounds_used;
            (o, None, None)
        }
        RegimeKind::LinearSp => {
            let planner = regime.planner_config()?;
            let (_, o) = evaluate_schedule(config, &planner.baseline, planner, settings)?;
            (o, Some(planner.baseline.clone()), None)
        }
        RegimeKind::PlannerSp => {
            let planner = regime.planner_config()?;
            let base = regime
                .search
                .as_ref()
                .ok_or_else(|| Error::config("regime.search", "planner-sp needs search settings"))?;
            let search = SearchSettings { evaluation_settings: settings.clone(), ..base.clone() };
            let result = search_schedule(config, planner, &search)?;
            (result.best_outcome.clone(), Some(result.best_schedule.clone()), Some(result))
        }
        RegimeKind::Collusion => {
            let eq = collusive_optimum(config, settings)?;
            let mut o = MarketOutcome::evaluate(config, &eq.prices, None)?;
            o.converged = eq.converged;
            o.rounds = eq.rounds_used;
            (o, None, None)
        }
    };
    Ok(RegimeRun { kind: regime.kind, outcome, schedule, search })
}

/// One regime under one seed, normalized against that seed's collusive profit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub regime: RegimeKind,
    pub seed: u64,
    pub normalized_profit: f64,
    pub fairness: f64,
    pub opt_out: f64,
    pub welfare: f64,
    pub group_opt_out: Vec<f64>,
    pub prices: PriceMatrix,
    pub schedule: Option<TaxSchedule>,
    pub converged: bool,
    pub rounds: usize,
}

/// Mean with its standard error over seeds (zero for a single seed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let m = mean(xs);
        let n = xs.len() as f64;
        let se = if xs.len() < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
        };
        Estimate { mean: m, se }
    }

    /// `0.707 ± 0.002`, dropping the error term when it is below 0.001.
    pub fn render(&self) -> String {
        if self.se < 1e-3 {
            format!("{:.3}", self.mean)
        } else {
            format!("{:.3} ± {:.3}", self.mean, self.se)
        }
    }
}

/// Seed-aggregated row of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub regime: RegimeKind,
    pub normalized_profit: Estimate,
    pub fairness: Estimate,
    pub opt_out: Estimate,
    /// Mean profit times mean fairness; the error is taken from per-seed welfare.
    pub welfare: Estimate,
    pub group_opt_out: Vec<f64>,
    pub delta_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub market: String,
    pub groups: Vec<String>,
    pub firms: Vec<String>,
    pub seeds: Vec<u64>,
    pub rows: Vec<SummaryRow>,
    /// Seed-averaged equilibrium prices, aligned with `rows`.
    pub prices: Vec<PriceMatrix>,
    pub records: Vec<SeedRecord>,
}

/// Runs every regime for every seed and aggregates into a report.
pub fn compare_regimes(
    config: &MarketConfig,
    regimes: &[RegimeSpec],
    settings: &SolverSettings,
    seeds: &[u64],
) -> Result<ComparisonReport> {
    if !regimes.iter().any(|r| r.kind == RegimeKind::Collusion) {
        return Err(Error::config("regimes", "collusion must be included; it defines the profit normalizer"));
    }
    if seeds.is_empty() {
        return Err(Error::config("seeds", "need at least one seed"));
    }
    let per_seed: Vec<Vec<RegimeRun>> = seeds
        .par_iter()
        .map(|&seed| {
            let s = settings.clone().with_seed(seed);
            regimes
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    if let Some(search) = r.search.as_mut() {
                        search.seed = seed;
                    }
                    run_regime_detailed(config, &r, &s)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::with_capacity(seeds.len() * regimes.len());
    for (&seed, runs) in seeds.iter().zip(&per_seed) {
        let collusion = runs.iter().find(|r| r.kind == RegimeKind::Collusion).expect("checked above");
        let normalizer: f64 = collusion.outcome.pre_tax_profits.iter().sum();
        if !(normalizer > 0.0) {
            return Err(Error::numeric("collusive aggregate profit is not positive"));
        }
        for run in runs {
            let o = &run.outcome;
            let normalized_profit = o.net_profits.iter().sum::<f64>() / normalizer;
            records.push(SeedRecord {
                regime: run.kind,
                seed,
                normalized_profit,
                fairness: o.fairness.global_score,
                opt_out: o.weighted_opt_out,
                welfare: normalized_profit * o.fairness.global_score,
                group_opt_out: o.opt_out.clone(),
                prices: o.prices.clone(),
                schedule: run.schedule.clone(),
                converged: o.converged,
                rounds: o.rounds,
            });
        }
    }

    let mut rows = Vec::with_capacity(regimes.len());
    let mut prices = Vec::with_capacity(regimes.len());
    for (k, regime) in regimes.iter().enumerate() {
        let recs: Vec<&SeedRecord> = records.iter().skip(k).step_by(regimes.len()).collect();
        let pick = |f: fn(&SeedRecord) -> f64| recs.iter().map(|r| f(r)).collect::<Vec<f64>>();
        let normalized_profit = Estimate::from_samples(&pick(|r| r.normalized_profit));
        let fairness = Estimate::from_samples(&pick(|r| r.fairness));
        let welfare = Estimate {
            mean: normalized_profit.mean * fairness.mean,
            se: Estimate::from_samples(&pick(|r| r.welfare)).se,
        };
        let group_opt_out: Vec<f64> = (0..config.num_profiles())
            .map(|i| mean(&recs.iter().map(|r| r.group_opt_out[i]).collect::<Vec<_>>()))
            .collect();
        let delta_max = crate::fairness::spread(group_opt_out.iter().copied());
        let mut avg = recs[0].prices.clone();
        for i in 0..config.num_profiles() {
            for j in 0..config.num_firms() {
                avg.set(i, j, mean(&recs.iter().map(|r| r.prices.get(i, j)).collect::<Vec<_>>()));
            }
        }
        rows.push(SummaryRow {
            regime: regime.kind,
            normalized_profit,
            fairness,
            opt_out: Estimate::from_samples(&pick(|r| r.opt_out)),
            welfare,
            group_opt_out,
            delta_max,
        });
        prices.push(avg);
    }

    Ok(ComparisonReport {
        market: config.name.clone(),
        groups: config.profiles.iter().map(|p| p.name.clone()).collect(),
        firms: config.firms.iter().map(|f| f.name.clone()).collect(),
        seeds: seeds.to_vec(),
        rows,
        prices,
        records,
    })
}

const SUMMARY_FIXED: [&str; 10] = [
    "regime",
    "normalized_profit",
    "normalized_profit_se",
    "fairness",
    "fairness_se",
    "opt_out",
    "opt_out_se",
    "welfare",
    "welfare_se",
    "delta_max",
];

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("csv: {e}"))
}

fn field<'a>(rec: &'a csv::StringRecord, i: usize) -> Result<&'a str> {
    rec.get(i).ok_or_else(|| Error::Parse(format!("missing column {i}")))
}

fn number(rec: &csv::StringRecord, i: usize) -> Result<f64> {
    let s = field(rec, i)?;
    s.parse().map_err(|_| Error::Parse(format!("column {i}: {s:?} is not a number")))
}

impl ComparisonReport {
    pub fn row(&self, kind: RegimeKind) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.regime == kind)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Table-shaped summary: one line per regime, group opt-outs as `opt_out_<group>` columns.
    pub fn summary_csv(&self) -> Result<String> {
        summary_csv(&self.groups, &self.rows)
    }

    /// Per-profile, per-firm equilibrium prices for each regime.
    pub fn prices_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["regime".to_string(), "group".to_string()];
        header.extend(self.firms.iter().cloned());
        w.write_record(&header).map_err(csv_error)?;
        for (row, p) in self.rows.iter().zip(&self.prices) {
            for (i, g) in self.groups.iter().enumerate() {
                let mut rec = vec![row.regime.as_str().to_string(), g.clone()];
                rec.extend((0..self.firms.len()).map(|j| p.get(i, j).to_string()));
                w.write_record(&rec).map_err(csv_error)?;
            }
        }
        String::from_utf8(w.into_inner().map_err(csv_error)?).map_err(csv_error)
    }

    /// Human-readable table; standard errors below 0.001 are omitted.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let width = 18;
        let _ = write!(out, "{:<10}", self.market);
        for r in &self.rows {
            let _ = write!(out, "{:>width$}", r.regime.label());
        }
        out.push('\n');
        let lines: [(&str, fn(&SummaryRow) -> String); 5] = [
            ("Profit", |r| r.normalized_profit.render()),
            ("Fairness", |r| r.fairness.render()),
            ("Opt Out", |r| r.opt_out.render()),
            ("Welfare", |r| r.welfare.render()),
            ("Dmax", |r| format!("{:.3}", r.delta_max)),
        ];
        for (name, f) in lines {
            let _ = write!(out, "{name:<10}");
            for r in &self.rows {
                let _ = write!(out, "{:>width$}", f(r));
            }
            out.push('\n');
        }
        out
    }
}

pub fn summary_csv(groups: &[String], rows: &[SummaryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = SUMMARY_FIXED.iter().map(|s| s.to_string()).collect();
    header.extend(groups.iter().map(|g| format!("opt_out_{g}")));
    w.write_record(&header).map_err(csv_error)?;
    for r in rows {
        let mut rec = vec![r.regime.as_str().to_string()];
        for e in [r.normalized_profit, r.fairness, r.opt_out, r.welfare] {
            rec.push(e.mean.to_string());
            rec.push(e.se.to_string());
        }
        rec.push(r.delta_max.to_string());
        rec.extend(r.group_opt_out.iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_error)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_error)?).map_err(csv_error)
}

/// Inverse of [`summary_csv`]: the group names and rows.
pub fn parse_summary_csv(text: &str) -> Result<(Vec<String>, Vec<SummaryRow>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_error)?.clone();
    if header.len() < SUMMARY_FIXED.len() || header.iter().zip(SUMMARY_FIXED).any(|(a, b)| a != b) {
        return Err(Error::Parse("unexpected summary header".into()));
    }
    let groups: Vec<String> = header
        .iter()
        .skip(SUMMARY_FIXED.len())
        .map(|h| h.strip_prefix("opt_out_").map(str::to_string).ok_or_else(|| Error::Parse(format!("bad column {h:?}"))))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let est = |i: usize| -> Result<Estimate> { Ok(Estimate { mean: number(&rec, i)?, se: number(&rec, i + 1)? }) };
        rows.push(SummaryRow {
            regime: field(&rec, 0)?.parse()?,
            normalized_profit: est(1)?,
            fairness: est(3)?,
            opt_out: est(5)?,
            welfare: est(7)?,
            delta_max: number(&rec, 9)?,
            group_opt_out: (0..groups.len()).map(|g| number(&rec, 10 + g)).collect::<Result<_>>()?,
        });
    }
    Ok((groups, rows))
}

/// `bracket_low,bracket_high,rate` rows, one per bracket.
pub fn schedule_csv(schedule: &TaxSchedule) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bracket_low", "bracket_high", "rate"]).map_err(csv_error)?;
    for (lo, hi, rate) in schedule.table() {
        w.write_record([lo.to_string(), hi.to_string(), rate.to_string()]).map_err(csv_error)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_error)?).map_err(csv_error)
}

pub fn parse_schedule_csv(text: &str) -> Result<TaxSchedule> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut rates = Vec::new();
    for rec in r.records() {
        rates.push(number(&rec.map_err(csv_error)?, 2)?);
    }
    TaxSchedule::new(rates)
}

/// `generation,best_objective` rows.
pub fn history_csv(history: &[f64]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["generation", "best_objective"]).map_err(csv_error)?;
    for (g, v) in history.iter().enumerate() {
        w.write_record([g.to_string(), v.to_string()]).map_err(csv_error)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_error)?).map_err(csv_error)
}
