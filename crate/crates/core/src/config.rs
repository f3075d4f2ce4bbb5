//! JSON market files and the two bundled calibrations.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{ConsumerProfile, FirmSpec, MarketConfig};
use crate::tax::{linear_baseline, ObjectiveKind, PlannerConfig, TaxSchedule};

pub const INSURANCE_JSON: &str = include_str!("../configs/insurance.json");
pub const CREDIT_JSON: &str = include_str!("../configs/credit.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaselineSpec {
    /// `"linear"`: the `1 - b/B` schedule.
    Named(String),
    Rates(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerBlock {
    pub brackets: usize,
    #[serde(default = "default_baseline")]
    pub baseline: BaselineSpec,
    pub lambda: f64,
    #[serde(default = "default_objective")]
    pub objective: ObjectiveKind,
    #[serde(default)]
    pub tau_min: f64,
    #[serde(default = "one")]
    pub tau_max: f64,
}

fn default_baseline() -> BaselineSpec {
    BaselineSpec::Named("linear".into())
}

fn default_objective() -> ObjectiveKind {
    ObjectiveKind::WelfareMax
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub name: String,
    pub outside_utility: f64,
    pub price_min: f64,
    pub price_max: f64,
    pub profiles: Vec<ConsumerProfile>,
    pub firms: Vec<FirmSpec>,
    pub planner: PlannerBlock,
}

impl ConfigFile {
    pub fn into_parts(self) -> Result<(MarketConfig, PlannerConfig)> {
        let market = MarketConfig {
            name: self.name,
            profiles: self.profiles,
            firms: self.firms,
            outside_utility: self.outside_utility,
            price_min: self.price_min,
            price_max: self.price_max,
        };
        market.validate()?;
        let p = self.planner;
        if p.brackets == 0 {
            return Err(Error::config("planner.brackets", "must be at least 1"));
        }
        let baseline = match p.baseline {
            BaselineSpec::Named(ref s) if s == "linear" => linear_baseline(p.brackets)?,
            BaselineSpec::Named(s) => {
                return Err(Error::config("planner.baseline", format!("unknown baseline {s:?}; use \"linear\" or a rate list")))
            }
            BaselineSpec::Rates(r) => {
                if r.len() != p.brackets {
                    return Err(Error::config(
                        "planner.baseline",
                        format!("has {} rates but brackets = {}", r.len(), p.brackets),
                    ));
                }
                TaxSchedule::new(r).map_err(|e| Error::config("planner.baseline", e.to_string()))?
            }
        };
        let planner = PlannerConfig { lambda: p.lambda, baseline, objective: p.objective, tau_min: p.tau_min, tau_max: p.tau_max };
        planner.validate()?;
        Ok((market, planner))
    }
}

pub fn parse_market_config(json: &str) -> Result<(MarketConfig, PlannerConfig)> {
    let file: ConfigFile = serde_json::from_str(json).map_err(|e| Error::config("config", e.to_string()))?;
    file.into_parts()
}

/// Loads a market file. The names `insurance` and `credit` (with or without
/// `.json`) fall back to the bundled calibrations when no such file exists.
pub fn load_market_config(path: impl AsRef<Path>) -> Result<(MarketConfig, PlannerConfig)> {
    let path = path.as_ref();
    if !path.exists() {
        if let Some(json) = bundled(&path.to_string_lossy()) {
            return parse_market_config(json);
        }
    }
    let text = std::fs::read_to_string(path)?;
    parse_market_config(&text)
}

fn bundled(name: &str) -> Option<&'static str> {
    match name.trim_end_matches(".json") {
        "insurance" => Some(INSURANCE_JSON),
        "credit" => Some(CREDIT_JSON),
        _ => None,
    }
}

pub fn insurance() -> (MarketConfig, PlannerConfig) {
    parse_market_config(INSURANCE_JSON).expect("bundled insurance config is valid")
}

pub fn credit() -> (MarketConfig, PlannerConfig) {
    parse_market_config(CREDIT_JSON).expect("bundled credit config is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_insurance() {
        let (m, p) = insurance();
        assert_eq!((m.num_firms(), m.num_profiles()), (2, 3));
        assert_eq!(m.profiles[0].beta, 0.25);
        assert_eq!(m.profiles.iter().map(|p| p.size).collect::<Vec<_>>(), vec![200.0, 520.0, 280.0]);
        assert_eq!(m.marginal_cost(2, 1), 3.25);
        assert_eq!((m.price_min, m.price_max), (1.0, 20.0));
        assert_eq!(p.brackets(), 20);
        assert_eq!(p.lambda, 100.0);
    }

    #[test]
    fn bundled_credit() {
        let (m, p) = credit();
        assert_eq!(m.num_firms(), 5);
        assert_eq!(m.marginal_cost(2, 1), 2.30);
        assert_eq!(m.profiles.iter().map(|p| p.beta).collect::<Vec<_>>(), vec![3.0, 2.7, 2.25]);
        assert_eq!(p.lambda, 10.0);
        assert_eq!(p.baseline, linear_baseline(20).unwrap());
    }

    #[test]
    fn negative_size_is_rejected_by_field() {
        let bad = INSURANCE_JSON.replacen("\"size\": 520", "\"size\": -5", 1);
        let err = parse_market_config(&bad).unwrap_err().to_string();
        assert!(err.contains("profiles[1].size"), "{err}");
    }

    #[test]
    fn cost_grid_mismatch_is_rejected() {
        let bad = INSURANCE_JSON.replacen("2.5,\n        3.0,\n        3.5", "2.5,\n        3.0", 1);
        assert_ne!(bad, INSURANCE_JSON);
        let err = parse_market_config(&bad).unwrap_err().to_string();
        assert!(err.contains("marginal_costs"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = INSURANCE_JSON.replacen("\"name\": \"insurance\"", "\"name\": \"insurance\", \"bogus\": 1", 1);
        assert!(parse_market_config(&bad).is_err());
    }

    #[test]
    fn explicit_baseline_length_checked() {
        let bad = INSURANCE_JSON.replace("\"baseline\": \"linear\"", "\"baseline\": [0.5, 0.2]");
        let err = parse_market_config(&bad).unwrap_err().to_string();
        assert!(err.contains("planner.baseline"), "{err}");
    }
}
