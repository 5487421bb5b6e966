//! Self-consistency experiment: draw synthetic death/tweet observations from
//! the model at known parameters, fit them back with the default sampler,
//! and check that the 90% intervals recover the truth.
//!
//! ```bash
//! cargo run --release --example generate_and_fit
//! ```

use sirtd::data::{CompartmentState, ObservedData};
use sirtd::diagnostics::{format_summary_table, summarize};
use sirtd::mcmc::{SamplerConfig, init_from_prior, sample};
use sirtd::model::{FitContext, log_posterior_unconstrained, simulate_observations};
use sirtd::ode::SolverConfig;
use sirtd::params::{EpidemicParams, PriorConfig, UnconstrainedPoint};

fn main() {
    let truth = EpidemicParams::new(0.3, 0.1, 0.2, 7.0, 10.0, 0.1, 0.1).unwrap();
    let population = 10_000.0;
    let initial = CompartmentState::new(9_990.0, 10.0, 0.0, 0.0, 0.0).unwrap();
    let days: Vec<u32> = (0..70).collect();
    let solver = SolverConfig::default();

    let (deaths, tweets) =
        simulate_observations(&truth, &initial, population, &days, &solver, 2024).unwrap();
    println!(
        "generated {} days of observations (final deaths {}, peak tweets {})",
        days.len(),
        deaths.last().unwrap(),
        tweets.iter().max().unwrap()
    );

    // noisy replicates of a cumulative state are not monotone, hence the
    // dedicated constructor
    let observed =
        ObservedData::new_with_noisy_deaths(days, deaths, tweets, population, initial).unwrap();
    let ctx = FitContext::new(observed, PriorConfig::default(), solver).unwrap();

    let sampler = SamplerConfig {
        seed: 1,
        ..SamplerConfig::default()
    };
    let target = |v: &UnconstrainedPoint| log_posterior_unconstrained(v, &ctx);
    let inits = init_from_prior(target, &ctx.priors, sampler.n_chains, sampler.seed).unwrap();
    let start = std::time::Instant::now();
    let draws = sample(target, &sampler, &inits).unwrap();
    println!(
        "sampled {} chains x {} draws in {:.2?}\n",
        draws.chains.len(),
        draws.chains[0].draws.len(),
        start.elapsed()
    );

    let summaries = summarize(&draws);
    print!("{}", format_summary_table(&summaries));

    println!();
    let truth_values = truth.as_array();
    for (summary, truth_value) in summaries.iter().zip(truth_values.iter()).take(5) {
        let inside = summary.q5 <= *truth_value && *truth_value <= summary.q95;
        println!(
            "{:>11}: truth {:>6.3} {} [{:.3}, {:.3}]",
            summary.name,
            truth_value,
            if inside { "inside " } else { "OUTSIDE" },
            summary.q5,
            summary.q95
        );
    }
}
