//! Posterior-predictive check: fit synthetic data, generate predictive
//! bands for every channel, and report how many observed points the 5-95%
//! death band covers.
//!
//! ```bash
//! cargo run --release --example posterior_predictive_bands
//! ```

use sirtd::data::{CompartmentState, ObservedData};
use sirtd::mcmc::{SamplerConfig, init_from_prior, sample};
use sirtd::model::{
    FitContext, log_posterior_unconstrained, posterior_predictive, simulate_observations,
};
use sirtd::ode::SolverConfig;
use sirtd::params::{EpidemicParams, PriorConfig, UnconstrainedPoint};

fn main() {
    let truth = EpidemicParams::new(0.3, 0.1, 0.2, 7.0, 10.0, 0.1, 0.1).unwrap();
    let population = 10_000.0;
    let initial = CompartmentState::new(9_990.0, 10.0, 0.0, 0.0, 0.0).unwrap();
    let days: Vec<u32> = (0..70).collect();
    let solver = SolverConfig::default();

    let (deaths, tweets) =
        simulate_observations(&truth, &initial, population, &days, &solver, 5150).unwrap();
    let observed =
        ObservedData::new_with_noisy_deaths(days, deaths.clone(), tweets, population, initial)
            .unwrap();
    let ctx = FitContext::new(observed, PriorConfig::default(), solver).unwrap();

    let sampler = SamplerConfig {
        seed: 3,
        ..SamplerConfig::default()
    };
    let target = |v: &UnconstrainedPoint| log_posterior_unconstrained(v, &ctx);
    let inits = init_from_prior(target, &ctx.priors, sampler.n_chains, sampler.seed).unwrap();
    let draws = sample(target, &sampler, &inits).unwrap();

    let predictive = posterior_predictive(&draws.pooled(), &ctx, 808).unwrap();
    if predictive.skipped_draws > 0 {
        println!(
            "skipped {} draws whose solve failed",
            predictive.skipped_draws
        );
    }

    println!("death channel, every 10th day:");
    println!("day  observed      q5    mean     q95");
    let death_rows: Vec<_> = predictive
        .rows
        .iter()
        .filter(|row| row.channel == "deaths")
        .collect();
    for row in death_rows.iter().step_by(10) {
        let observed_value = deaths[row.day as usize];
        println!(
            "{:>3} {:>9} {:>7.1} {:>7.1} {:>7.1}",
            row.day, observed_value, row.q5, row.mean, row.q95
        );
    }

    let covered = death_rows
        .iter()
        .filter(|row| {
            let y = deaths[row.day as usize] as f64;
            row.q5 <= y && y <= row.q95
        })
        .count();
    println!(
        "\n5-95% band covers {covered}/{} observed death counts ({:.0}%)",
        death_rows.len(),
        100.0 * covered as f64 / death_rows.len() as f64
    );

    let channels: Vec<&str> = {
        let mut seen = Vec::new();
        for row in &predictive.rows {
            if !seen.contains(&row.channel) {
                seen.push(row.channel);
            }
        }
        seen
    };
    println!("channels emitted: {}", channels.join(", "));
}
