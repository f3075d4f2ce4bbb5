//! Wall-clock scaling of the price game in the number of firms.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config;
use crate::equilibrium::{play_rounds, SolverSettings};
use crate::error::{Error, Result};
use crate::market::{FirmSpec, MarketConfig};
use crate::stream_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub firms: usize,
    pub mean_seconds: f64,
    pub std_seconds: f64,
    pub seeds: usize,
}

/// Credit market with `n` firms: the bundled lenders repeated cyclically,
/// each copy's costs jittered by up to 5% in a deterministic way.
pub fn synthetic_market(n: usize) -> Result<MarketConfig> {
    if n < 2 {
        return Err(Error::config("firms", "benchmark markets need at least 2 firms"));
    }
    let (base, _) = config::credit();
    let templates = base.firms.clone();
    let firms = (0..n)
        .map(|j| {
            let t = &templates[j % templates.len()];
            let costs = t
                .marginal_costs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if j < templates.len() {
                        return *c;
                    }
                    let u = (stream_seed(j as u64, &[i as u64]) >> 11) as f64 / (1u64 << 53) as f64;
                    c * (1.0 + 0.05 * (2.0 * u - 1.0))
                })
                .collect();
            FirmSpec { name: format!("F{}", j + 1), base_utility: t.base_utility, marginal_costs: costs }
        })
        .collect();
    let market = MarketConfig { name: format!("credit-{n}"), firms, ..base };
    market.validate()?;
    Ok(market)
}

/// Times `rounds` untaxed price-game rounds per seed for each firm count.
pub fn runtime_benchmark(firm_counts: &[usize], rounds: usize, seeds: &[u64], settings: &SolverSettings) -> Result<Vec<BenchRow>> {
    if seeds.is_empty() || rounds == 0 {
        return Err(Error::config("bench", "need at least one seed and one round"));
    }
    let mut rows = Vec::with_capacity(firm_counts.len());
    for &n in firm_counts {
        let market = synthetic_market(n)?;
        let mut times = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let s = settings.clone().with_seed(seed);
            let start = Instant::now();
            let prices = play_rounds(&market, None, &s, rounds)?;
            times.push(start.elapsed().as_secs_f64());
            std::hint::black_box(prices);
        }
        let k = times.len() as f64;
        let mean = times.iter().sum::<f64>() / k;
        let var = if times.len() > 1 { times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
        rows.push(BenchRow { firms: n, mean_seconds: mean, std_seconds: var.sqrt(), seeds: seeds.len() });
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Parse(e.to_string()))?).map_err(|e| Error::Parse(e.to_string()))
}

/// Least-squares line through `(x, y)`: `(slope, intercept, r_squared)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}
