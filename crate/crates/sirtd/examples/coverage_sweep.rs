//! Repeat the self-consistency experiment over many seeds and report how
//! often the 90% intervals cover the generating truth — a quick calibration
//! audit of the whole pipeline.
//!
//! ```bash
//! cargo run --release --example coverage_sweep
//! ```

use sirtd::data::{CompartmentState, ObservedData};
use sirtd::diagnostics::summarize;
use sirtd::mcmc::{SamplerConfig, init_from_prior, sample};
use sirtd::model::{FitContext, log_posterior_unconstrained, simulate_observations};
use sirtd::ode::SolverConfig;
use sirtd::params::{EpidemicParams, PriorConfig, UnconstrainedPoint};

fn main() {
    let n_seeds: u64 = std::env::args()
        .nth(1)
        .and_then(|raw| raw.parse().ok())
        .unwrap_or(10);

    let truth = EpidemicParams::new(0.3, 0.1, 0.2, 7.0, 10.0, 0.1, 0.1).unwrap();
    let truth_values = truth.as_array();
    let population = 10_000.0;
    let initial = CompartmentState::new(9_990.0, 10.0, 0.0, 0.0, 0.0).unwrap();
    let days: Vec<u32> = (0..70).collect();
    let solver = SolverConfig::default();

    let mut per_param_covered = [0u32; 7];
    let mut seeds_with_4_of_5 = 0;
    let mut worst_rhat_overall = 0.0_f64;

    println!("seed  coverage(5 curve params)  worst rhat");
    for seed in 0..n_seeds {
        let (deaths, tweets) =
            simulate_observations(&truth, &initial, population, &days, &solver, seed).unwrap();
        let observed = ObservedData::new_with_noisy_deaths(
            days.clone(),
            deaths,
            tweets,
            population,
            initial,
        )
        .unwrap();
        let ctx = FitContext::new(observed, PriorConfig::default(), solver).unwrap();
        let cfg = SamplerConfig {
            seed,
            ..SamplerConfig::default()
        };
        let target = |v: &UnconstrainedPoint| log_posterior_unconstrained(v, &ctx);
        let inits = init_from_prior(target, &ctx.priors, cfg.n_chains, seed).unwrap();
        let draws = sample(target, &cfg, &inits).unwrap();

        let summaries = summarize(&draws);
        let mut covered_curve_params = 0;
        let mut worst_rhat = 0.0_f64;
        for (index, summary) in summaries.iter().enumerate() {
            worst_rhat = worst_rhat.max(summary.rhat.unwrap_or(f64::INFINITY));
            if summary.q5 <= truth_values[index] && truth_values[index] <= summary.q95 {
                per_param_covered[index] += 1;
                if index < 5 {
                    covered_curve_params += 1;
                }
            }
        }
        if covered_curve_params >= 4 {
            seeds_with_4_of_5 += 1;
        }
        worst_rhat_overall = worst_rhat_overall.max(worst_rhat);
        println!("{seed:>4}  {covered_curve_params}/5                       {worst_rhat:.4}");
    }

    println!("\nper-parameter 90% coverage over {n_seeds} seeds:");
    for (name, covered) in sirtd::params::PARAM_NAMES.iter().zip(per_param_covered) {
        println!(
            "  {name:>11}: {covered}/{n_seeds} ({:.0}%)",
            100.0 * f64::from(covered) / n_seeds as f64
        );
    }
    println!(
        "\nseeds with >= 4/5 curve-parameter coverage: {seeds_with_4_of_5}/{n_seeds}; \
         worst rhat anywhere {worst_rhat_overall:.4}"
    );
}
