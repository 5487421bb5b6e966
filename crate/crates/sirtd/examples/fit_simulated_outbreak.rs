//! The full workbench loop: simulate an outbreak with the agent-based
//! process, fit the ODE model to its death and tweet columns, and compare
//! the posterior-mean curves against the simulated truth.
//!
//! ```bash
//! cargo run --release --example fit_simulated_outbreak
//! ```

use sirtd::abm::{InfectionMode, SimConfig, simulate};
use sirtd::data::{CompartmentState, ObservedData};
use sirtd::diagnostics::{format_summary_table, summarize};
use sirtd::mcmc::{SamplerConfig, init_from_prior, sample};
use sirtd::model::{FitContext, log_posterior_unconstrained, posterior_predictive};
use sirtd::ode::SolverConfig;
use sirtd::params::{PriorConfig, UnconstrainedPoint};

fn main() {
    let sim_config = SimConfig {
        population: 10_000,
        days: 70,
        contacts: 10,
        beta: 0.3,
        omega: 0.1,
        lambda: 0.2,
        d_i: 7.0,
        d_t: 10.0,
        initial_infected: 10,
        seed: 42,
        infection_mode: InfectionMode::DailyRate,
    };
    let sim = simulate(&sim_config).unwrap();
    let deaths: Vec<u64> = sim.rows.iter().map(|r| r.deceased).collect();
    let tweets: Vec<u64> = sim.rows.iter().map(|r| r.tweets).collect();
    println!(
        "simulated outbreak: final deaths {}, peak daily tweets {}",
        deaths.last().unwrap(),
        tweets.iter().max().unwrap()
    );

    let population = sim_config.population as f64;
    let initial = CompartmentState::new(
        (sim_config.population - sim_config.initial_infected) as f64,
        sim_config.initial_infected as f64,
        0.0,
        0.0,
        0.0,
    )
    .unwrap();
    let observed = ObservedData::new(
        (0..sim_config.days).collect(),
        deaths.clone(),
        tweets.clone(),
        population,
        initial,
    )
    .unwrap();
    let solver = SolverConfig::default();
    let ctx = FitContext::new(observed, PriorConfig::default(), solver).unwrap();

    let sampler = SamplerConfig {
        seed: 7,
        ..SamplerConfig::default()
    };
    let target = |v: &UnconstrainedPoint| log_posterior_unconstrained(v, &ctx);
    let inits = init_from_prior(target, &ctx.priors, sampler.n_chains, sampler.seed).unwrap();
    let draws = sample(target, &sampler, &inits).unwrap();

    let summaries = summarize(&draws);
    print!("\n{}", format_summary_table(&summaries));
    println!(
        "\n(the agent process and the ODE are different generators, so point\n\
         estimates compensate along the transmission/dwell ridge; the curves\n\
         below are the real check)"
    );

    let predictive = posterior_predictive(&draws.pooled(), &ctx, 99).unwrap();
    let rmse = |predicted: &[f64], observed_counts: &[u64]| {
        let total: f64 = predicted
            .iter()
            .zip(observed_counts)
            .map(|(p, &o)| (p - o as f64).powi(2))
            .sum();
        (total / predicted.len() as f64).sqrt()
    };
    let peak_deaths = *deaths.iter().max().unwrap() as f64;
    let peak_tweets = *tweets.iter().max().unwrap() as f64;
    println!(
        "\ndeath curve RMSE {:.2} ({:.1}% of peak)",
        rmse(&predictive.mean_deaths, &deaths),
        100.0 * rmse(&predictive.mean_deaths, &deaths) / peak_deaths
    );
    println!(
        "tweet curve RMSE {:.2} ({:.1}% of peak)",
        rmse(&predictive.mean_tweets, &tweets),
        100.0 * rmse(&predictive.mean_tweets, &tweets) / peak_tweets
    );

    println!("\nday  observed D  predicted D  observed tweets  predicted tweets");
    for day in (0..70).step_by(10) {
        println!(
            "{:>3} {:>11} {:>12.1} {:>16} {:>17.1}",
            day, deaths[day], predictive.mean_deaths[day], tweets[day], predictive.mean_tweets[day]
        );
    }
}
