use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fairprice::bench::{bench_csv, runtime_benchmark};
use fairprice::config::load_market_config;
use fairprice::equilibrium::{BracketMode, SolverSettings};
use fairprice::market::MarketConfig;
use fairprice::planner::{fairness_search, search_schedule, SearchSettings};
use fairprice::scenario::{compare_regimes, history_csv, run_regime_detailed, schedule_csv, RegimeKind, RegimeSpec};
use fairprice::tax::PlannerConfig;
use fairprice::{Error, Result};

/// Fairness-taxed oligopoly pricing simulator.
#[derive(Debug, Parser)]
#[command(name = "fairprice", version)]
struct Cli {
    /// Market config JSON; `insurance` and `credit` name the bundled calibrations.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for single-run commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Comma-separated seed list for `compare` and `bench`.
    #[arg(long, global = true, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Write outputs into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Nash convergence threshold on the largest price change.
    #[arg(long, global = true, default_value_t = 1e-4)]
    tolerance: f64,
    #[arg(long, global = true, default_value_t = 200)]
    max_rounds: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Budget {
    #[arg(long, default_value_t = 64)]
    population: usize,
    #[arg(long, default_value_t = 200)]
    generations: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one regime and print its outcome as JSON.
    Run {
        #[arg(long, default_value = "free-market")]
        regime: RegimeKind,
        /// Keep each firm's bracket fixed while it optimizes.
        #[arg(long)]
        frozen_brackets: bool,
        #[command(flatten)]
        budget: Budget,
    },
    /// Compare regimes over a seed list.
    Compare {
        #[arg(long, value_delimiter = ',', default_value = "free-market,linear-sp,planner-sp,collusion")]
        regimes: Vec<RegimeKind>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Search for a tax schedule and print it as a bracket table.
    Planner {
        #[command(flatten)]
        budget: Budget,
    },
    /// Global fairness reachable by a fairness-maximizing planner.
    FairnessBound {
        #[command(flatten)]
        budget: Budget,
    },
    /// Time price-game rounds against the number of firms.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "2,20,40,60,80,100")]
        firms: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        rounds: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 2 } else { 1 })
        }
    }
}

fn solver_settings(cli: &Cli, seed: u64) -> SolverSettings {
    SolverSettings { price_tolerance: cli.tolerance, max_rounds: cli.max_rounds, seed, ..Default::default() }
}

fn search_settings(budget: &Budget, seed: u64, eval: SolverSettings) -> SearchSettings {
    SearchSettings { population_size: budget.population, generations: budget.generations, seed, evaluation_settings: eval, ..Default::default() }
}

fn load(cli: &Cli) -> Result<(MarketConfig, PlannerConfig)> {
    let path = cli.config.as_ref().ok_or_else(|| Error::config("--config", "a market config is required"))?;
    load_market_config(path)
}

/// Writes `files` under `--out`, or prints the first one to stdout.
fn emit(out: Option<&Path>, files: &[(&str, String)]) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for (name, body) in files {
                std::fs::write(dir.join(name), body)?;
            }
        }
        None => print!("{}", files[0].1),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Run { regime, frozen_brackets, budget } => {
            let (market, planner) = load(&cli)?;
            let mut settings = solver_settings(&cli, cli.seed);
            if *frozen_brackets {
                settings.bracket_mode = BracketMode::Frozen;
            }
            let spec = RegimeSpec { kind: *regime, planner: Some(planner), search: Some(search_settings(budget, cli.seed, settings.clone())) };
            let result = run_regime_detailed(&market, &spec, &settings)?;
            let mut json = serde_json::to_string_pretty(&result.outcome).map_err(Error::from)?;
            json.push('\n');
            emit(out, &[(&format!("outcome_{}.json", regime.as_str()), json)])
        }
        Command::Compare { regimes, budget } => {
            let (market, planner) = load(&cli)?;
            let seeds = cli.seeds.clone().unwrap_or_else(|| vec![cli.seed]);
            let settings = solver_settings(&cli, cli.seed);
            let search = search_settings(budget, cli.seed, settings.clone());
            let specs: Vec<RegimeSpec> = regimes
                .iter()
                .map(|k| RegimeSpec { kind: *k, planner: Some(planner.clone()), search: Some(search.clone()) })
                .collect();
            let report = compare_regimes(&market, &specs, &settings, &seeds)?;
            let mut json = report.to_json()?;
            json.push('\n');
            emit(
                out,
                &[
                    ("comparison.csv", report.summary_csv()?),
                    ("comparison.json", json),
                    ("prices.csv", report.prices_csv()?),
                    ("table.txt", report.render_table()),
                ],
            )
        }
        Command::Planner { budget } => {
            let (market, planner) = load(&cli)?;
            let settings = solver_settings(&cli, cli.seed);
            let result = search_schedule(&market, &planner, &search_settings(budget, cli.seed, settings))?;
            let mut json = serde_json::to_string_pretty(&result.best_outcome).map_err(Error::from)?;
            json.push('\n');
            emit(
                out,
                &[
                    ("schedule.csv", schedule_csv(&result.best_schedule)?),
                    ("history.csv", history_csv(&result.history)?),
                    ("outcome.json", json),
                ],
            )
        }
        Command::FairnessBound { budget } => {
            let (market, planner) = load(&cli)?;
            let settings = solver_settings(&cli, cli.seed);
            let result = fairness_search(&market, &planner, &search_settings(budget, cli.seed, settings), &[])?;
            let f = &result.best_outcome.fairness;
            let mut body = String::from("scope,fairness\n");
            for (firm, s) in market.firms.iter().zip(&f.local_scores) {
                body.push_str(&format!("{},{}\n", firm.name, s));
            }
            body.push_str(&format!("global,{}\n", f.global_score));
            emit(out, &[("fairness_bound.csv", body), ("schedule.csv", schedule_csv(&result.best_schedule)?)])
        }
        Command::Bench { firms, rounds } => {
            let seeds = cli.seeds.clone().unwrap_or_else(|| (0..5).collect());
            let rows = runtime_benchmark(firms, *rounds, &seeds, &solver_settings(&cli, cli.seed))?;
            emit(out, &[("bench.csv", bench_csv(&rows)?)])
        }
    }
}
