//! Log-prior, negative-binomial observation model over the death and tweet
//! channels, the unconstrained log-posterior the sampler targets, and
//! posterior-predictive generation.

use crate::data::{CompartmentState, ObservedData};
use crate::ode::{OdeError, SolverConfig, solve_sirtd};
use crate::params::{
    EpidemicParams, OmegaPrior, PriorConfig, UnconstrainedPoint, from_unconstrained,
};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

/// ODE channel means below this are floored before the NB evaluation so that
/// zero-valued observations in the early epidemic keep a finite likelihood.
/// Far below one person, so it cannot bias estimates.
pub const MEAN_FLOOR: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("likelihood rejected: {0}")]
    LikelihoodRejection(#[from] OdeError),
    #[error("no usable posterior draws ({0})")]
    NoDraws(String),
}

/// Everything a likelihood evaluation needs.
#[derive(Debug, Clone)]
pub struct FitContext {
    pub observed: ObservedData,
    pub priors: PriorConfig,
    pub solver: SolverConfig,
}

impl FitContext {
    pub fn new(
        observed: ObservedData,
        priors: PriorConfig,
        solver: SolverConfig,
    ) -> Result<Self, ModelError> {
        priors
            .validate()
            .map_err(|e| ModelError::Domain(e.to_string()))?;
        solver
            .validate()
            .map_err(|e| ModelError::Domain(e.to_string()))?;
        Ok(Self {
            observed,
            priors,
            solver,
        })
    }

    fn day_grid(&self) -> Vec<f64> {
        self.observed.days.iter().map(|&d| f64::from(d)).collect()
    }
}

/// Log-pmf of the mean/dispersion negative binomial: mean `mu`, dispersion
/// `disp`, variance `mu + mu^2 / disp`.
pub fn nb2_log_pmf(y: u64, mu: f64, disp: f64) -> Result<f64, ModelError> {
    if mu <= 0.0 || !mu.is_finite() {
        return Err(ModelError::Domain(format!(
            "nb2 mean must be positive, got {mu}"
        )));
    }
    if disp <= 0.0 || !disp.is_finite() {
        return Err(ModelError::Domain(format!(
            "nb2 dispersion must be positive, got {disp}"
        )));
    }
    let yf = y as f64;
    Ok(ln_gamma(yf + disp) - ln_gamma(disp) - ln_gamma(yf + 1.0)
        + disp * (disp.ln() - (mu + disp).ln())
        + yf * (mu.ln() - (mu + disp).ln()))
}

/// Joint log-density of the priors at `params`.
///
/// Half-normals for beta, d_i, d_t; omega follows `priors.omega` (truncated
/// normal renormalized to [0, 1] by default, or a beta density); a beta
/// density for lambda; exponentials for the two precision parameters.
/// Normalization constants are included. Returns -inf at density zeros
/// (e.g. lambda = 1 under Beta(1, 2)).
pub fn log_prior(params: &EpidemicParams, priors: &PriorConfig) -> f64 {
    let mut lp = 0.0;
    lp += truncated_normal_log_pdf(
        params.beta,
        priors.mu_beta,
        priors.sigma_beta,
        0.0,
        f64::INFINITY,
    );
    lp += match priors.omega {
        OmegaPrior::TruncatedNormal { mu, sigma } => {
            truncated_normal_log_pdf(params.omega, mu, sigma, 0.0, 1.0)
        }
        OmegaPrior::Beta { alpha, beta } => beta_log_pdf(params.omega, alpha, beta),
    };
    lp += beta_log_pdf(
        params.lambda_tweets,
        priors.alpha_lambda,
        priors.beta_lambda,
    );
    lp += truncated_normal_log_pdf(
        params.d_i,
        priors.mu_d_i,
        priors.sigma_d_i,
        0.0,
        f64::INFINITY,
    );
    lp += truncated_normal_log_pdf(
        params.d_t,
        priors.mu_d_t,
        priors.sigma_d_t,
        0.0,
        f64::INFINITY,
    );
    lp += exponential_log_pdf(params.phi_deaths, priors.rate_phi);
    lp += exponential_log_pdf(params.phi_tweets, priors.rate_phi_tweets);
    lp
}

fn truncated_normal_log_pdf(x: f64, mu: f64, sigma: f64, lower: f64, upper: f64) -> f64 {
    if x < lower || x > upper {
        return f64::NEG_INFINITY;
    }
    let z = (x - mu) / sigma;
    if !z.is_finite() {
        return f64::NEG_INFINITY;
    }
    let standard = Normal::standard();
    let mass = standard.cdf((upper - mu) / sigma) - standard.cdf((lower - mu) / sigma);
    -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - mass.ln()
}

fn beta_log_pdf(x: f64, alpha: f64, beta: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return f64::NEG_INFINITY;
    }
    let ln_norm = ln_gamma(alpha + beta) - ln_gamma(alpha) - ln_gamma(beta);
    // 0 * ln(0) = 0 at the edges for flat components
    let term = |coef: f64, v: f64| if coef == 0.0 { 0.0 } else { coef * v.ln() };
    ln_norm + term(alpha - 1.0, x) + term(beta - 1.0, 1.0 - x)
}

fn exponential_log_pdf(x: f64, rate: f64) -> f64 {
    if x < 0.0 {
        return f64::NEG_INFINITY;
    }
    rate.ln() - rate * x
}

/// Channel means over the observation grid for one parameter point.
struct ChannelMeans {
    deaths: Vec<f64>,
    tweets: Vec<f64>,
    compartments: Vec<[f64; 5]>,
}

fn channel_means(params: &EpidemicParams, ctx: &FitContext) -> Result<ChannelMeans, OdeError> {
    let trajectory = solve_sirtd(
        params,
        &ctx.observed.initial_state,
        ctx.observed.population,
        &ctx.day_grid(),
        &ctx.solver,
    )?;
    let mut deaths = Vec::with_capacity(trajectory.len());
    let mut tweets = Vec::with_capacity(trajectory.len());
    let mut compartments = Vec::with_capacity(trajectory.len());
    for state in trajectory.states() {
        deaths.push(state.deceased);
        tweets.push(state.infectious * params.lambda_tweets);
        compartments.push(state.as_array());
    }
    Ok(ChannelMeans {
        deaths,
        tweets,
        compartments,
    })
}

/// Log-likelihood of the observed deaths and tweets under `params`.
///
/// Integrates the SIRTD system from the observed initial state over the
/// observation days, then sums NB terms: cumulative deaths against the D
/// state directly (no differencing) and daily tweet counts against
/// `I(t) * lambda`. The NB dispersion is `1 / phi` for each channel, exactly
/// as parameterized, so a larger phi means a more over-dispersed channel.
/// Solver failures surface as [`ModelError::LikelihoodRejection`].
pub fn log_likelihood(params: &EpidemicParams, ctx: &FitContext) -> Result<f64, ModelError> {
    let means = channel_means(params, ctx)?;
    let disp_deaths = 1.0 / params.phi_deaths;
    let disp_tweets = 1.0 / params.phi_tweets;
    let mut total = 0.0;
    for (i, (&obs_deaths, &obs_tweets)) in ctx
        .observed
        .cumulative_deaths
        .iter()
        .zip(ctx.observed.tweet_counts.iter())
        .enumerate()
    {
        total += nb2_log_pmf(obs_deaths, means.deaths[i].max(MEAN_FLOOR), disp_deaths)?;
        total += nb2_log_pmf(obs_tweets, means.tweets[i].max(MEAN_FLOOR), disp_tweets)?;
    }
    Ok(total)
}

/// The sampler target: log-prior + log-likelihood + transform Jacobian at the
/// parameters corresponding to the unconstrained point. -inf when the
/// likelihood rejects (solver failure) or the prior has no mass.
pub fn log_posterior_unconstrained(v: &UnconstrainedPoint, ctx: &FitContext) -> f64 {
    if v.iter().any(|x| !x.is_finite()) {
        return f64::NEG_INFINITY;
    }
    let (params, log_jacobian) = from_unconstrained(v);
    let lp = log_prior(&params, &ctx.priors);
    if lp == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    match log_likelihood(&params, ctx) {
        Ok(ll) => lp + ll + log_jacobian,
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Synthetic observations drawn from the model itself at known parameters:
/// independent NB draws around `D(t)` and `I(t) * lambda`, exactly the
/// observation model the likelihood assumes.
///
/// The death draws are noise around a *cumulative* state, so the resulting
/// series is generally not monotone; pair this with
/// [`ObservedData::new_with_noisy_deaths`] when fitting it back.
pub fn simulate_observations(
    params: &EpidemicParams,
    initial_state: &CompartmentState,
    population: f64,
    days: &[u32],
    solver: &SolverConfig,
    seed: u64,
) -> Result<(Vec<u64>, Vec<u64>), ModelError> {
    let grid: Vec<f64> = days.iter().map(|&d| f64::from(d)).collect();
    let trajectory = solve_sirtd(params, initial_state, population, &grid, solver)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let disp_deaths = 1.0 / params.phi_deaths;
    let disp_tweets = 1.0 / params.phi_tweets;

    let mut deaths = Vec::with_capacity(days.len());
    let mut tweets = Vec::with_capacity(days.len());
    for state in trajectory.states() {
        deaths.push(sample_nb(&mut rng, state.deceased, disp_deaths));
        tweets.push(sample_nb(
            &mut rng,
            state.infectious * params.lambda_tweets,
            disp_tweets,
        ));
    }
    Ok((deaths, tweets))
}

/// Gamma-Poisson draw from NB(mu, disp). Means at or below the floor yield 0.
fn sample_nb(rng: &mut ChaCha12Rng, mu: f64, disp: f64) -> u64 {
    if mu <= MEAN_FLOOR {
        return 0;
    }
    let gamma = Gamma::new(disp, mu / disp).expect("positive shape and scale");
    let intensity: f64 = gamma.sample(rng);
    if intensity <= 0.0 || !intensity.is_finite() {
        return 0;
    }
    let poisson = Poisson::new(intensity).expect("positive finite intensity");
    poisson.sample(rng) as u64
}

/// Per-day posterior-predictive summary for one output channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveRow {
    pub day: u32,
    /// One of deaths, tweets, S, I, R, T, D.
    pub channel: &'static str,
    pub mean: f64,
    pub q5: f64,
    pub q95: f64,
}

/// Posterior-predictive bands plus bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveSummary {
    pub rows: Vec<PredictiveRow>,
    /// Draws dropped because the solver failed at their parameters.
    pub skipped_draws: usize,
    /// Posterior-mean curves for the two observation channels, in day order
    /// (used for observed-vs-predicted overlays).
    pub mean_deaths: Vec<f64>,
    pub mean_tweets: Vec<f64>,
}

/// Channel labels in emission order.
pub const PREDICTIVE_CHANNELS: [&str; 7] = ["deaths", "tweets", "S", "I", "R", "T", "D"];

/// Posterior-predictive generation over retained draws.
///
/// For each draw the SIRTD system is solved once; the deaths and tweets
/// channels additionally get one NB replicate per draw and day. Channel
/// means average the per-draw mean curves (so a single-draw input reproduces
/// that draw's solution exactly), while the 5%/95% band for deaths and
/// tweets comes from the NB replicates and the compartment bands from the
/// per-draw solutions. Draws whose solve fails are skipped and counted.
pub fn posterior_predictive(
    draws: &[EpidemicParams],
    ctx: &FitContext,
    seed: u64,
) -> Result<PredictiveSummary, ModelError> {
    if draws.is_empty() {
        return Err(ModelError::NoDraws("empty draw set".into()));
    }
    let n_days = ctx.observed.len();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let mut death_reps: Vec<Vec<f64>> = vec![Vec::new(); n_days];
    let mut tweet_reps: Vec<Vec<f64>> = vec![Vec::new(); n_days];
    let mut death_means = vec![0.0; n_days];
    let mut tweet_means = vec![0.0; n_days];
    let mut compartment_values: Vec<[Vec<f64>; 5]> = (0..n_days)
        .map(|_| std::array::from_fn(|_| Vec::new()))
        .collect();
    let mut used = 0usize;
    let mut skipped = 0usize;

    for params in draws {
        let means = match channel_means(params, ctx) {
            Ok(m) => m,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        used += 1;
        let disp_deaths = 1.0 / params.phi_deaths;
        let disp_tweets = 1.0 / params.phi_tweets;
        for day in 0..n_days {
            death_means[day] += means.deaths[day];
            tweet_means[day] += means.tweets[day];
            death_reps[day].push(sample_nb(&mut rng, means.deaths[day], disp_deaths) as f64);
            tweet_reps[day].push(sample_nb(&mut rng, means.tweets[day], disp_tweets) as f64);
            for (c, value) in means.compartments[day].iter().enumerate() {
                compartment_values[day][c].push(*value);
            }
        }
    }
    if used == 0 {
        return Err(ModelError::NoDraws(format!(
            "all {skipped} draws failed to solve"
        )));
    }

    for value in death_means.iter_mut().chain(tweet_means.iter_mut()) {
        *value /= used as f64;
    }

    let mut rows = Vec::with_capacity(n_days * PREDICTIVE_CHANNELS.len());
    for day in 0..n_days {
        let day_index = ctx.observed.days[day];
        rows.push(PredictiveRow {
            day: day_index,
            channel: "deaths",
            mean: death_means[day],
            q5: sorted_quantile(&mut death_reps[day], 0.05),
            q95: sorted_quantile(&mut death_reps[day], 0.95),
        });
        rows.push(PredictiveRow {
            day: day_index,
            channel: "tweets",
            mean: tweet_means[day],
            q5: sorted_quantile(&mut tweet_reps[day], 0.05),
            q95: sorted_quantile(&mut tweet_reps[day], 0.95),
        });
        for (c, label) in PREDICTIVE_CHANNELS[2..].iter().enumerate() {
            let values = &mut compartment_values[day][c];
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            rows.push(PredictiveRow {
                day: day_index,
                channel: label,
                mean,
                q5: sorted_quantile(values, 0.05),
                q95: sorted_quantile(values, 0.95),
            });
        }
    }

    Ok(PredictiveSummary {
        rows,
        skipped_draws: skipped,
        mean_deaths: death_means,
        mean_tweets: tweet_means,
    })
}

/// Quantile by linear interpolation of order statistics (sorts in place).
fn sorted_quantile(values: &mut [f64], p: f64) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in predictive values"));
    crate::diagnostics::quantile_sorted(values, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::to_unconstrained;

    fn stock_params() -> EpidemicParams {
        EpidemicParams::new(0.3, 0.1, 0.2, 7.0, 10.0, 1.0, 1.0).unwrap()
    }

    fn fixture_context(seed: u64, phi: f64) -> (FitContext, EpidemicParams) {
        let truth = EpidemicParams::new(0.3, 0.1, 0.2, 7.0, 10.0, phi, phi).unwrap();
        let population = 10_000.0;
        let y0 = CompartmentState::new(9_990.0, 10.0, 0.0, 0.0, 0.0).unwrap();
        let days: Vec<u32> = (0..70).collect();
        let solver = SolverConfig::default();
        let (deaths, tweets) =
            simulate_observations(&truth, &y0, population, &days, &solver, seed).unwrap();
        let observed =
            ObservedData::new_with_noisy_deaths(days, deaths, tweets, population, y0).unwrap();
        let ctx = FitContext::new(observed, PriorConfig::default(), solver).unwrap();
        (ctx, truth)
    }

    /// Independent route to the NB log-pmf: recurrence over y with
    /// compensated summation, no gamma function involved.
    fn nb2_oracle(y: u64, mu: f64, disp: f64) -> f64 {
        let log_p0 = disp * (disp.ln() - (mu + disp).ln());
        let ratio = mu.ln() - (mu + disp).ln();
        let mut total = log_p0;
        let mut compensation = 0.0;
        for k in 0..y {
            let kf = k as f64;
            // log P(k+1) - log P(k) = log((k + disp) / (k + 1)) + log(mu / (mu + disp))
            let term = ((kf + disp) / (kf + 1.0)).ln() + ratio;
            let adjusted = term - compensation;
            let new_total = total + adjusted;
            compensation = (new_total - total) - adjusted;
            total = new_total;
        }
        total
    }

    #[test]
    fn nb2_zero_count_unit_parameters() {
        // NB2(0 | mu, phi) = (phi / (mu + phi))^phi = 1/2 here.
        let lp = nb2_log_pmf(0, 1.0, 1.0).unwrap();
        assert!((lp - 0.5_f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn nb2_matches_recurrence_oracle() {
        let lp = nb2_log_pmf(3, 2.5, 10.0).unwrap();
        assert!((lp - nb2_oracle(3, 2.5, 10.0)).abs() < 1e-10);

        for &(y, mu, disp) in &[
            (0u64, 0.5, 0.3),
            (7, 12.0, 2.0),
            (120, 100.0, 55.0),
            (400, 350.0, 0.7),
        ] {
            let got = nb2_log_pmf(y, mu, disp).unwrap();
            let want = nb2_oracle(y, mu, disp);
            assert!(
                (got - want).abs() < 1e-10,
                "y={y} mu={mu} disp={disp}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn nb2_normalizes_by_direct_summation() {
        let total: f64 = (0..=500)
            .map(|y| nb2_log_pmf(y, 2.5, 3.0).unwrap().exp())
            .sum();
        assert!((total - 1.0).abs() < 1e-8, "sum {total}");
    }

    #[test]
    fn nb2_rejects_bad_arguments() {
        assert!(nb2_log_pmf(1, 0.0, 1.0).is_err());
        assert!(nb2_log_pmf(1, -3.0, 1.0).is_err());
        assert!(nb2_log_pmf(1, 1.0, 0.0).is_err());
        assert!(nb2_log_pmf(1, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn nb2_approaches_poisson_for_large_dispersion() {
        // Poisson log-pmf: y ln mu - mu - ln y!
        for &y in &[8u64, 10, 12] {
            let mu = 10.0;
            let nb = nb2_log_pmf(y, mu, 1e8).unwrap();
            let poisson = y as f64 * mu.ln() - mu - ln_gamma(y as f64 + 1.0);
            assert!((nb - poisson).abs() < 1e-4, "y={y}: {nb} vs {poisson}");
        }
    }

    #[test]
    fn flat_beta_prior_contributes_zero() {
        assert!(beta_log_pdf(0.5, 1.0, 1.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_prior_hand_value() {
        // log lambda - lambda x at x = 0.2, rate 5: log 5 - 1.
        let lp = exponential_log_pdf(0.2, 5.0);
        assert!((lp - (5.0_f64.ln() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn log_prior_matches_independent_density_sum() {
        // Re-derive every density from first principles with libm's erf as
        // the normal CDF, independent of the statrs-based implementation.
        let params = stock_params();
        let priors = PriorConfig::default();

        let normal_cdf = |x: f64| 0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2));
        let normal_logpdf = |x: f64, mu: f64, sigma: f64| {
            -0.5 * ((x - mu) / sigma).powi(2) - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
        };
        let trunc = |x: f64, mu: f64, sigma: f64, lo: f64, hi: f64| {
            normal_logpdf(x, mu, sigma)
                - (normal_cdf((hi - mu) / sigma) - normal_cdf((lo - mu) / sigma)).ln()
        };

        let mut expected = 0.0;
        expected += trunc(0.3, 2.0, 1.0, 0.0, f64::INFINITY);
        expected += trunc(0.1, 0.4, 0.5, 0.0, 1.0);
        // Beta(1, 2): log(2 (1 - x))
        expected += (2.0 * (1.0 - 0.2_f64)).ln();
        expected += trunc(7.0, 7.0, 2.0, 0.0, f64::INFINITY);
        expected += trunc(10.0, 10.0, 2.0, 0.0, f64::INFINITY);
        expected += 5.0_f64.ln() - 5.0 * 1.0;
        expected += 5.0_f64.ln() - 5.0 * 1.0;

        let got = log_prior(&params, &priors);
        assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
    }

    #[test]
    fn omega_beta_override_is_used() {
        let priors = PriorConfig {
            omega: OmegaPrior::Beta {
                alpha: 2.0,
                beta: 5.0,
            },
            ..PriorConfig::default()
        };
        let params = stock_params();
        let default_lp = log_prior(&params, &PriorConfig::default());
        let override_lp = log_prior(&params, &priors);
        assert!((default_lp - override_lp).abs() > 1e-6);

        // Beta(2, 5) at 0.1 by hand: ln Gamma(7) - ln Gamma(2) - ln Gamma(5)
        // + ln(0.1) + 4 ln(0.9)
        let expected =
            ln_gamma(7.0) - ln_gamma(2.0) - ln_gamma(5.0) + 0.1_f64.ln() + 4.0 * 0.9_f64.ln();
        assert!((beta_log_pdf(0.1, 2.0, 5.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn diverging_solver_yields_rejection() {
        let (ctx, _) = fixture_context(99, 1.0);
        // max_steps of 1 cannot integrate 70 days
        let mut tight = ctx.clone();
        tight.solver.max_steps = 1;
        let truth = stock_params();
        let err = log_likelihood(&truth, &tight).unwrap_err();
        assert!(matches!(err, ModelError::LikelihoodRejection(_)));
        let v = to_unconstrained(&truth);
        assert_eq!(log_posterior_unconstrained(&v, &tight), f64::NEG_INFINITY);
    }

    #[test]
    fn likelihood_finite_with_zero_observations() {
        // All-zero observations at epidemic start exercise the mean floor.
        let population = 10_000.0;
        let y0 = CompartmentState::new(9_990.0, 10.0, 0.0, 0.0, 0.0).unwrap();
        let observed =
            ObservedData::new(vec![0, 1, 2], vec![0, 0, 0], vec![0, 0, 0], population, y0).unwrap();
        let ctx =
            FitContext::new(observed, PriorConfig::default(), SolverConfig::default()).unwrap();
        let ll = log_likelihood(&stock_params(), &ctx).unwrap();
        assert!(ll.is_finite());
    }

    #[test]
    fn truth_beats_doubled_beta_on_self_generated_data() {
        for seed in 0..20 {
            let (ctx, truth) = fixture_context(seed, 1.0);
            let ll_truth = log_likelihood(&truth, &ctx).unwrap();
            let mut off = truth;
            off.beta *= 2.0;
            let ll_off = log_likelihood(&off, &ctx).unwrap();
            assert!(
                ll_truth > ll_off,
                "seed {seed}: truth {ll_truth} vs doubled beta {ll_off}"
            );
        }
    }

    #[test]
    fn posterior_decomposition_is_definitional() {
        let (ctx, truth) = fixture_context(3, 0.1);
        let v = to_unconstrained(&truth);
        let (params, log_jac) = from_unconstrained(&v);
        let expected =
            log_prior(&params, &ctx.priors) + log_likelihood(&params, &ctx).unwrap() + log_jac;
        let got = log_posterior_unconstrained(&v, &ctx);
        assert!(got.is_finite());
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn posterior_decays_in_beta_tails() {
        let (ctx, truth) = fixture_context(5, 0.1);
        let center = to_unconstrained(&truth);
        let at = |beta_component: f64| {
            let mut v = center;
            v[0] = beta_component;
            log_posterior_unconstrained(&v, &ctx)
        };
        let peak = at(center[0]);
        assert!(peak.is_finite());
        // strictly decreasing toward both tails while the solve stays
        // feasible
        let mut previous = peak;
        for step in 1..=4 {
            let value = at(center[0] + f64::from(step));
            assert!(value.is_finite(), "diverged at +{step}");
            assert!(value < previous, "not decreasing at +{step}");
            previous = value;
        }
        let far_high = at(center[0] + 20.0);
        assert!(far_high <= previous, "tail turned back up: {far_high}");

        let mut previous = peak;
        for step in 1..=4 {
            let value = at(center[0] - f64::from(step));
            assert!(value.is_finite(), "diverged at -{step}");
            assert!(value < previous, "not decreasing at -{step}");
            previous = value;
        }
        let far_low = at(center[0] - 20.0);
        assert!(far_low <= previous, "tail turned back up: {far_low}");
    }

    #[test]
    fn single_draw_predictive_mean_is_that_solution() {
        let (ctx, truth) = fixture_context(8, 0.1);
        let summary = posterior_predictive(&[truth], &ctx, 77).unwrap();
        let means = channel_means(&truth, &ctx).unwrap();
        for (day, row) in summary
            .rows
            .iter()
            .filter(|r| r.channel == "deaths")
            .enumerate()
        {
            assert_eq!(row.mean, means.deaths[day]);
        }
        assert_eq!(summary.skipped_draws, 0);
    }

    #[test]
    fn predictive_bands_are_ordered_and_calibrated() {
        let (ctx, truth) = fixture_context(21, 0.1);
        // A small cloud of draws around the truth stands in for a posterior.
        let mut draws = Vec::new();
        for i in 0..40 {
            let f = 1.0 + 0.002 * f64::from(i - 20);
            draws.push(
                EpidemicParams::new(
                    truth.beta * f,
                    truth.omega,
                    truth.lambda_tweets,
                    truth.d_i / f,
                    truth.d_t,
                    truth.phi_deaths,
                    truth.phi_tweets,
                )
                .unwrap(),
            );
        }
        let summary = posterior_predictive(&draws, &ctx, 4242).unwrap();
        for row in &summary.rows {
            assert!(row.q5 <= row.q95, "{row:?}");
            // Count-channel bands come from integer NB replicates, so they
            // can only bracket the mean curve once the expected count is
            // non-negligible; below one expected person the replicates are
            // all zero while the mean is a small positive number.
            let orderable = match row.channel {
                "deaths" | "tweets" => row.mean >= 1.0,
                _ => true,
            };
            if orderable {
                assert!(
                    row.q5 <= row.mean + 1e-9 && row.mean <= row.q95 + 1e-9,
                    "{row:?}"
                );
            }
        }
        // Calibration on self-generated data: at least 80% of observed death
        // points inside the 5-95% band.
        let inside = summary
            .rows
            .iter()
            .filter(|r| r.channel == "deaths")
            .zip(ctx.observed.cumulative_deaths.iter())
            .filter(|(row, obs)| {
                let y = **obs as f64;
                row.q5 <= y && y <= row.q95
            })
            .count();
        let total = ctx.observed.len();
        assert!(
            inside as f64 >= 0.8 * total as f64,
            "only {inside}/{total} death points inside the predictive band"
        );
    }

    #[test]
    fn predictive_requires_draws() {
        let (ctx, _) = fixture_context(1, 0.1);
        assert!(matches!(
            posterior_predictive(&[], &ctx, 1),
            Err(ModelError::NoDraws(_))
        ));
    }
}
