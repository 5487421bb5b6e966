//! One end-to-end fit on model-generated data, checking the sampler-level
//! contracts that only show up against the real posterior.

use sirtd::data::{CompartmentState, ObservedData};
use sirtd::mcmc::{SamplerConfig, init_from_prior, sample};
use sirtd::model::{
    FitContext, log_posterior_unconstrained, posterior_predictive, simulate_observations,
};
use sirtd::ode::SolverConfig;
use sirtd::params::{EpidemicParams, PriorConfig, UnconstrainedPoint, to_unconstrained};

#[test]
fn default_fit_contracts_hold_on_fixture_posterior() {
    let truth = EpidemicParams::new(0.3, 0.1, 0.2, 7.0, 10.0, 0.1, 0.1).unwrap();
    let population = 10_000.0;
    let initial = CompartmentState::new(9_990.0, 10.0, 0.0, 0.0, 0.0).unwrap();
    let days: Vec<u32> = (0..70).collect();
    let solver = SolverConfig::default();
    let (deaths, tweets) =
        simulate_observations(&truth, &initial, population, &days, &solver, 404).unwrap();
    let observed =
        ObservedData::new_with_noisy_deaths(days, deaths, tweets, population, initial).unwrap();
    let ctx = FitContext::new(observed, PriorConfig::default(), solver).unwrap();
    let target = |v: &UnconstrainedPoint| log_posterior_unconstrained(v, &ctx);

    // finite on a ball around the truth in unconstrained space
    let center = to_unconstrained(&truth);
    for (index, sign) in [(0usize, 1.0f64), (1, -1.0), (3, 1.0), (5, -1.0), (6, 1.0)] {
        let mut point = center;
        point[index] += sign * 0.2;
        assert!(
            target(&point).is_finite(),
            "non-finite near truth at {index}"
        );
    }

    let cfg = SamplerConfig {
        seed: 17,
        ..SamplerConfig::default()
    };
    let inits = init_from_prior(target, &ctx.priors, cfg.n_chains, cfg.seed).unwrap();
    let draws = sample(target, &cfg, &inits).unwrap();

    for (index, chain) in draws.chains.iter().enumerate() {
        assert_eq!(
            chain.draws.len(),
            cfg.n_retained(),
            "chain {index} draw count"
        );
        assert!(
            (0.1..=0.5).contains(&chain.accept_rate),
            "chain {index} acceptance {} outside [0.1, 0.5]",
            chain.accept_rate
        );
        assert_eq!(
            chain.scales_at_warmup_end, chain.scales_final,
            "chain {index} proposal changed after warmup"
        );
    }

    // calibration of the predictive band on self-generated data
    let predictive = posterior_predictive(&draws.pooled(), &ctx, 42).unwrap();
    assert_eq!(predictive.skipped_draws, 0);
    let death_rows: Vec<_> = predictive
        .rows
        .iter()
        .filter(|row| row.channel == "deaths")
        .collect();
    let covered = death_rows
        .iter()
        .zip(ctx.observed.cumulative_deaths.iter())
        .filter(|(row, obs)| {
            let y = **obs as f64;
            row.q5 <= y && y <= row.q95
        })
        .count();
    assert!(
        covered as f64 >= 0.8 * death_rows.len() as f64,
        "predictive band covered only {covered}/{} observed deaths",
        death_rows.len()
    );
}
