//! Solver outputs checked against independently derived answers.

use fairprice::config;
use fairprice::equilibrium::{collusive_optimum, firm_best_response, firm_objective, nash_equilibrium, SolverSettings};
use fairprice::market::{choice_probabilities, consumer_surplus, ConsumerProfile, FirmSpec, MarketConfig, PriceMatrix};
use fairprice::planner::evaluate_schedule;
use fairprice::tax::{MarketOutcome, PlannerConfig, TaxSchedule};

fn tight() -> SolverSettings {
    SolverSettings { price_tolerance: 1e-9, ..Default::default() }
}

/// Interior logit Nash prices from the first-order markup rule
/// `p_ij = c_ij + 1 / (beta_i (1 - s_ij))`, iterated with damping.
fn markup_fixed_point(config: &MarketConfig) -> PriceMatrix {
    let mut p = PriceMatrix::uniform(config, config.price_midpoint());
    for _ in 0..20_000 {
        let ch = choice_probabilities(config, &p).unwrap();
        let mut next = p.clone();
        for (i, prof) in config.profiles.iter().enumerate() {
            for j in 0..config.num_firms() {
                let target = config.marginal_cost(i, j) + 1.0 / (prof.beta * (1.0 - ch.firm(i, j)));
                next.set(i, j, 0.5 * p.get(i, j) + 0.5 * target);
            }
        }
        let step = next.max_abs_diff(&p);
        p = next;
        if step < 1e-13 {
            break;
        }
    }
    p
}

#[test]
fn nash_matches_markup_rule_on_insurance() {
    let (m, _) = config::insurance();
    let eq = nash_equilibrium(&m, None, &tight()).unwrap();
    let oracle = markup_fixed_point(&m);
    assert!(eq.converged);
    assert!(eq.prices.max_abs_diff(&oracle) < 1e-4, "{:?}\n{:?}", eq.prices, oracle);
}

#[test]
fn nash_matches_markup_rule_on_asymmetric_triopoly() {
    let m = MarketConfig {
        name: "tri".into(),
        profiles: vec![
            ConsumerProfile { name: "a".into(), size: 300.0, beta: 0.5 },
            ConsumerProfile { name: "b".into(), size: 120.0, beta: 1.2 },
        ],
        firms: (0..3)
            .map(|j| FirmSpec { name: format!("F{j}"), base_utility: 4.0 + j as f64, marginal_costs: vec![1.5 + 0.3 * j as f64, 2.0] })
            .collect(),
        outside_utility: 0.5,
        price_min: 1.0,
        price_max: 20.0,
    };
    let eq = nash_equilibrium(&m, None, &tight()).unwrap();
    let oracle = markup_fixed_point(&m);
    assert!(eq.prices.max_abs_diff(&oracle) < 1e-4, "{:?}\n{:?}", eq.prices, oracle);
}

#[test]
fn converged_nash_leaves_no_profitable_deviation() {
    for (m, p) in [config::insurance(), config::credit()] {
        // A firm held at a bracket edge gains to first order in the residual
        // price error, so the taxed market needs a tighter stopping rule.
        for (schedule, price_tolerance) in [(None, 1e-4), (Some(&p.baseline), 1e-8)] {
            let s = SolverSettings { price_tolerance, ..Default::default() };
            let eq = nash_equilibrium(&m, schedule, &s).unwrap();
            assert!(eq.converged && eq.max_last_step <= s.price_tolerance);
            for j in 0..m.num_firms() {
                let now = firm_objective(&m, j, &eq.prices, schedule);
                let br = firm_best_response(&m, j, &eq.prices, schedule, &s).unwrap();
                let gain = (br.objective - now) / now.abs().max(1.0);
                assert!(gain <= 10.0 * s.optimizer_tolerance.max(1e-9), "{} firm {j}: relative gain {gain:e}", m.name);
            }
        }
    }
}

#[test]
fn zero_tax_matches_free_market() {
    for (m, p) in [config::insurance(), config::credit()] {
        let s = SolverSettings::default();
        let free = nash_equilibrium(&m, None, &s).unwrap();
        let zero = TaxSchedule::constant(p.brackets(), 0.0).unwrap();
        let planner = PlannerConfig { baseline: zero.clone(), ..p };
        let (_, out) = evaluate_schedule(&m, &zero, &planner, &s).unwrap();
        assert!(out.prices.max_abs_diff(&free.prices) < 1e-5);
    }
}

#[test]
fn collusion_dominates_on_bundled_markets() {
    for (m, _) in [config::insurance(), config::credit()] {
        let s = SolverSettings::default();
        let free = nash_equilibrium(&m, None, &s).unwrap();
        let joint = collusive_optimum(&m, &s).unwrap();
        let a = MarketOutcome::evaluate(&m, &free.prices, None).unwrap().aggregate_pre_tax_profit();
        let b = MarketOutcome::evaluate(&m, &joint.prices, None).unwrap().aggregate_pre_tax_profit();
        assert!(b >= a * (1.0 - 1e-6));
        let o = MarketOutcome::evaluate(&m, &joint.prices, None).unwrap();
        let f = MarketOutcome::evaluate(&m, &free.prices, None).unwrap();
        assert!(o.weighted_opt_out > f.weighted_opt_out);
    }
}

#[test]
fn logsum_surplus_examples() {
    let mk = |alphas: &[f64], beta: f64| MarketConfig {
        name: "cs".into(),
        profiles: vec![ConsumerProfile { name: "g".into(), size: 1.0, beta }],
        firms: alphas.iter().map(|&a| FirmSpec { name: "f".into(), base_utility: a, marginal_costs: vec![0.0] }).collect(),
        outside_utility: 0.0,
        price_min: 1.0,
        price_max: 20.0,
    };
    let one = mk(&[1.0], 1.0);
    assert!(consumer_surplus(&one, &PriceMatrix::uniform(&one, 1.0)).unwrap()[0].abs() < 1e-15);
    let two = mk(&[2.0, 2.0], 2.0);
    let cs = consumer_surplus(&two, &PriceMatrix::uniform(&two, 1.0)).unwrap()[0];
    assert!((cs - 2f64.ln() / 2.0).abs() < 1e-15);
    assert!((cs - 0.34657).abs() < 1e-5);
    let flat = mk(&[1.0], 0.0);
    assert!(consumer_surplus(&flat, &PriceMatrix::uniform(&flat, 1.0)).is_err());
}
