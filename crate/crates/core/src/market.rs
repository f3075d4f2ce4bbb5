//! Market configuration, logit consumer choice and the quantities derived from it.
//!
//! Firms are indexed from zero in every matrix that only holds firms
//! ([`PriceMatrix`], demand and profit vectors). A [`ChoiceMatrix`] row holds
//! `n + 1` alternatives with column 0 reserved for the outside option, so firm
//! `j` lives in column `j + 1` there; use [`ChoiceMatrix::firm`] and
//! [`ChoiceMatrix::outside`] rather than raw column arithmetic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One population segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsumerProfile {
    pub name: String,
    /// Number of consumers in the segment.
    pub size: f64,
    /// Price sensitivity.
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirmSpec {
    pub name: String,
    pub base_utility: f64,
    /// Average marginal cost of serving each profile, in profile order.
    pub marginal_costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub name: String,
    pub profiles: Vec<ConsumerProfile>,
    pub firms: Vec<FirmSpec>,
    pub outside_utility: f64,
    pub price_min: f64,
    pub price_max: f64,
}

impl MarketConfig {
    pub fn num_profiles(&self) -> usize {
        self.profiles.len()
    }

    pub fn num_firms(&self) -> usize {
        self.firms.len()
    }

    pub fn total_population(&self) -> f64 {
        self.profiles.iter().map(|p| p.size).sum()
    }

    pub fn marginal_cost(&self, profile: usize, firm: usize) -> f64 {
        self.firms[firm].marginal_costs[profile]
    }

    /// Checks every structural invariant and reports the first violation by field path.
    pub fn validate(&self) -> Result<()> {
        if self.profiles.is_empty() {
            return Err(Error::config("profiles", "at least one consumer profile is required"));
        }
        if self.firms.is_empty() {
            return Err(Error::config("firms", "at least one firm is required"));
        }
        for (i, p) in self.profiles.iter().enumerate() {
            if !(p.size.is_finite() && p.size > 0.0) {
                return Err(Error::config(
                    format!("profiles[{i}].size"),
                    format!("must be a positive finite count, got {}", p.size),
                ));
            }
            if !(p.beta.is_finite() && p.beta >= 0.0) {
                return Err(Error::config(
                    format!("profiles[{i}].beta"),
                    format!("must be a nonnegative finite real, got {}", p.beta),
                ));
            }
        }
        let m = self.profiles.len();
        for (j, f) in self.firms.iter().enumerate() {
            if !f.base_utility.is_finite() {
                return Err(Error::config(format!("firms[{j}].base_utility"), "must be finite"));
            }
            if f.marginal_costs.len() != m {
                return Err(Error::config(
                    format!("firms[{j}].marginal_costs"),
                    format!("expected {m} entries (one per profile), got {}", f.marginal_costs.len()),
                ));
            }
            for (i, &mc) in f.marginal_costs.iter().enumerate() {
                if !(mc.is_finite() && mc >= 0.0) {
                    return Err(Error::config(
                        format!("firms[{j}].marginal_costs[{i}]"),
                        format!("must be a nonnegative finite real, got {mc}"),
                    ));
                }
            }
        }
        if !self.outside_utility.is_finite() {
            return Err(Error::config("outside_utility", "must be finite"));
        }
        if !(self.price_min.is_finite() && self.price_min >= 0.0) {
            return Err(Error::config("price_min", "must be a nonnegative finite real"));
        }
        if !(self.price_max.is_finite() && self.price_max > self.price_min) {
            return Err(Error::config("price_max", "must be finite and strictly above price_min"));
        }
        Ok(())
    }

    pub fn price_midpoint(&self) -> f64 {
        0.5 * (self.price_min + self.price_max)
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Matrix { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::domain("ragged rows"));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Per-(profile, firm) prices: the firms' joint strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriceMatrix(pub Matrix);

impl PriceMatrix {
    pub fn uniform(config: &MarketConfig, price: f64) -> Self {
        PriceMatrix(Matrix::filled(config.num_profiles(), config.num_firms(), price))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Matrix::from_rows(rows).map(PriceMatrix)
    }

    #[inline]
    pub fn get(&self, profile: usize, firm: usize) -> f64 {
        self.0.get(profile, firm)
    }

    #[inline]
    pub fn set(&mut self, profile: usize, firm: usize, price: f64) {
        self.0.set(profile, firm, price)
    }

    /// Prices firm `firm` charges each profile.
    pub fn firm_prices(&self, firm: usize) -> Vec<f64> {
        self.0.column(firm)
    }

    pub fn set_firm_prices(&mut self, firm: usize, prices: &[f64]) {
        for (i, &p) in prices.iter().enumerate() {
            self.0.set(i, firm, p);
        }
    }

    pub fn max_abs_diff(&self, other: &PriceMatrix) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    /// Checks shape against `config` and that every price lies in the price box.
    pub fn check(&self, config: &MarketConfig) -> Result<()> {
        if self.0.rows() != config.num_profiles() || self.0.cols() != config.num_firms() {
            return Err(Error::config(
                "prices",
                format!(
                    "expected a {}x{} matrix, got {}x{}",
                    config.num_profiles(),
                    config.num_firms(),
                    self.0.rows(),
                    self.0.cols()
                ),
            ));
        }
        for &p in self.0.as_slice() {
            if !(p >= config.price_min && p <= config.price_max) {
                return Err(Error::domain(format!(
                    "price {p} outside [{}, {}]",
                    config.price_min, config.price_max
                )));
            }
        }
        Ok(())
    }
}

/// Per-profile choice distribution over `{outside, firm 0, .., firm n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChoiceMatrix(pub Matrix);

impl ChoiceMatrix {
    /// Wraps raw rows (outside option first) after checking they are distributions.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        if m.rows() == 0 || m.cols() < 2 {
            return Err(Error::domain("choice matrix needs at least one row and two columns"));
        }
        for r in 0..m.rows() {
            let row = m.row(r);
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::domain(format!("row {r} has an entry outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::domain(format!("row {r} sums to {s}, not 1")));
            }
        }
        Ok(ChoiceMatrix(m))
    }

    pub fn num_profiles(&self) -> usize {
        self.0.rows()
    }

    pub fn num_firms(&self) -> usize {
        self.0.cols() - 1
    }

    #[inline]
    pub fn outside(&self, profile: usize) -> f64 {
        self.0.get(profile, 0)
    }

    #[inline]
    pub fn firm(&self, profile: usize, firm: usize) -> f64 {
        self.0.get(profile, firm + 1)
    }

    pub fn firm_column(&self, firm: usize) -> Vec<f64> {
        self.0.column(firm + 1)
    }

    pub fn row(&self, profile: usize) -> &[f64] {
        self.0.row(profile)
    }
}

/// An entry in a consumer's choice set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    Outside,
    Firm(usize),
}

pub fn utility(config: &MarketConfig, profile: usize, alt: Alternative, price: f64) -> Result<f64> {
    let p = config
        .profiles
        .get(profile)
        .ok_or_else(|| Error::config("profile", format!("index {profile} out of range")))?;
    match alt {
        Alternative::Outside => Ok(config.outside_utility),
        Alternative::Firm(j) => {
            let f = config
                .firms
                .get(j)
                .ok_or_else(|| Error::config("firm", format!("index {j} out of range")))?;
            Ok(f.base_utility - p.beta * price)
        }
    }
}

/// Numerically stable `ln(sum(exp(xs)))`.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = xs.into_iter().map(|x| (x - max).exp()).sum();
    max + s.ln()
}

/// Multinomial logit choice probabilities, one softmax per profile.
pub fn choice_probabilities(config: &MarketConfig, prices: &PriceMatrix) -> Result<ChoiceMatrix> {
    let m = config.num_profiles();
    let n = config.num_firms();
    let mut out = Matrix::filled(m, n + 1, 0.0);
    let mut utils = vec![0.0; n + 1];
    for i in 0..m {
        let beta = config.profiles[i].beta;
        utils[0] = config.outside_utility;
        for j in 0..n {
            utils[j + 1] = config.firms[j].base_utility - beta * prices.get(i, j);
        }
        let max = utils.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() || utils.iter().any(|u| !u.is_finite()) {
            return Err(Error::numeric(format!("non-finite utility in profile {i}")));
        }
        let mut total = 0.0;
        for (k, u) in utils.iter().enumerate() {
            let e = (u - max).exp();
            out.set(i, k, e);
            total += e;
        }
        for k in 0..=n {
            out.set(i, k, out.get(i, k) / total);
        }
    }
    Ok(ChoiceMatrix(out))
}

/// Expected unit demand `S_i * p_{j|i}` as a profiles x firms matrix.
pub fn expected_demand(config: &MarketConfig, choices: &ChoiceMatrix) -> Matrix {
    let m = config.num_profiles();
    let n = config.num_firms();
    let mut out = Matrix::filled(m, n, 0.0);
    for i in 0..m {
        let s = config.profiles[i].size;
        for j in 0..n {
            out.set(i, j, s * choices.firm(i, j));
        }
    }
    out
}

pub fn opt_out_rates(choices: &ChoiceMatrix) -> Vec<f64> {
    (0..choices.num_profiles()).map(|i| choices.outside(i)).collect()
}

/// Population-weighted market-wide opt-out rate.
pub fn weighted_opt_out(config: &MarketConfig, choices: &ChoiceMatrix) -> f64 {
    let total = config.total_population();
    config
        .profiles
        .iter()
        .enumerate()
        .map(|(i, p)| p.size * choices.outside(i))
        .sum::<f64>()
        / total
}

/// Pre-tax expected profit of every firm: `sum_i S_i p_{j|i} (p_ij - mc_ij)`.
pub fn expected_profits(config: &MarketConfig, prices: &PriceMatrix, choices: &ChoiceMatrix) -> Vec<f64> {
    (0..config.num_firms())
        .map(|j| {
            (0..config.num_profiles())
                .map(|i| {
                    config.profiles[i].size
                        * choices.firm(i, j)
                        * (prices.get(i, j) - config.marginal_cost(i, j))
                })
                .sum()
        })
        .collect()
}

/// Log-sum consumer surplus per profile, summed over firms only.
pub fn consumer_surplus(config: &MarketConfig, prices: &PriceMatrix) -> Result<Vec<f64>> {
    config
        .profiles
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if p.beta <= 0.0 {
                return Err(Error::domain(format!(
                    "consumer surplus undefined for profile {i} with beta = {}",
                    p.beta
                )));
            }
            let lse = log_sum_exp(
                config
                    .firms
                    .iter()
                    .enumerate()
                    .map(|(j, f)| f.base_utility - p.beta * prices.get(i, j)),
            );
            Ok(lse / p.beta)
        })
        .collect()
}
