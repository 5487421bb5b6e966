//! Gradient-free adaptive random-walk Metropolis over the 7-dimensional
//! unconstrained posterior, with multi-chain orchestration.
//!
//! During warmup each chain adapts a global log step size by Robbins-Monro
//! toward the target acceptance rate while tracking a running estimate of the
//! per-coordinate posterior spread (or, with `full_covariance`, the full
//! covariance with a Cholesky-factored proposal). Adaptation freezes at the
//! end of warmup. Chains run independently (in parallel) on RNG streams
//! derived from the run seed and are merged by chain index, so results are
//! reproducible regardless of scheduling.

use crate::params::{
    EpidemicParams, N_PARAMS, OmegaPrior, PriorConfig, UnconstrainedPoint, from_unconstrained,
    to_unconstrained,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta as BetaDist, Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McmcError {
    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),
    #[error("initialization failed for chain {chain}: {reason}")]
    InitializationError { chain: usize, reason: String },
}

/// Sampler settings. Defaults: 4 chains, 2000 iterations each with the first
/// 1000 discarded as warmup, diagonal proposals tuned toward the random-walk
/// optimum acceptance rate of 0.234.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub n_chains: usize,
    /// Total iterations per chain, warmup included.
    pub n_iterations: usize,
    /// Leading iterations used for adaptation and discarded.
    pub n_warmup: usize,
    pub target_accept: f64,
    pub seed: u64,
    /// Adapt a full proposal covariance (Cholesky-factored) instead of
    /// per-coordinate scales. On by default: the death-channel parameters
    /// ride a narrow transmission-rate/dwell-time ridge that axis-aligned
    /// proposals cross too slowly for the default iteration budget.
    pub full_covariance: bool,
    /// Metropolis updates performed per recorded iteration. A random walk
    /// moves a tiny fraction of the posterior width per update, so one
    /// recorded draw per update would leave the retained sample heavily
    /// autocorrelated at the default iteration counts; batching updates is
    /// the walk's analogue of the many internal leapfrog steps
    /// gradient-based samplers spend per iteration.
    pub updates_per_iteration: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_chains: 4,
            n_iterations: 2000,
            n_warmup: 1000,
            target_accept: 0.234,
            seed: 0,
            full_covariance: true,
            updates_per_iteration: 15,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), McmcError> {
        if self.n_chains == 0 {
            return Err(McmcError::InvalidConfig(
                "n_chains must be at least 1".into(),
            ));
        }
        if self.n_warmup >= self.n_iterations {
            return Err(McmcError::InvalidConfig(format!(
                "n_warmup ({}) must be below n_iterations ({})",
                self.n_warmup, self.n_iterations
            )));
        }
        if !(0.0..1.0).contains(&self.target_accept) || self.target_accept <= 0.0 {
            return Err(McmcError::InvalidConfig(format!(
                "target_accept must be in (0, 1), got {}",
                self.target_accept
            )));
        }
        if self.updates_per_iteration == 0 {
            return Err(McmcError::InvalidConfig(
                "updates_per_iteration must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Retained draws per chain.
    pub fn n_retained(&self) -> usize {
        self.n_iterations - self.n_warmup
    }
}

/// Output of one chain: retained draws in constrained space plus acceptance
/// and adaptation bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub seed: u64,
    pub draws: Vec<EpidemicParams>,
    /// Acceptance fraction over the retained (post-warmup) iterations.
    pub accept_rate: f64,
    /// Per-coordinate proposal standard deviations when adaptation froze.
    pub scales_at_warmup_end: Vec<f64>,
    /// The same quantity read back at the final iteration; bit-identical to
    /// `scales_at_warmup_end` because adaptation is frozen after warmup.
    pub scales_final: Vec<f64>,
}

/// Draws from every chain, merged by chain index.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDraws {
    pub chains: Vec<ChainOutput>,
}

impl ChainDraws {
    /// All retained draws pooled in chain order.
    pub fn pooled(&self) -> Vec<EpidemicParams> {
        self.chains
            .iter()
            .flat_map(|c| c.draws.iter().copied())
            .collect()
    }

    /// Per-chain series of one parameter (by canonical index), as the
    /// diagnostics expect.
    pub fn parameter_chains(&self, index: usize) -> Vec<Vec<f64>> {
        self.chains
            .iter()
            .map(|c| c.draws.iter().map(|d| d.as_array()[index]).collect())
            .collect()
    }
}

/// Stable per-chain seed derivation (SplitMix64 over the run seed).
pub fn chain_seed(run_seed: u64, chain_index: usize) -> u64 {
    let mut z =
        run_seed.wrapping_add(0x9e37_79b9_7f4a_7c15_u64.wrapping_mul(chain_index as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Run all chains and merge by index. `init` must supply one finite-density
/// starting point per chain (see [`init_from_prior`]).
pub fn sample<F>(
    target: F,
    cfg: &SamplerConfig,
    init: &[UnconstrainedPoint],
) -> Result<ChainDraws, McmcError>
where
    F: Fn(&UnconstrainedPoint) -> f64 + Sync,
{
    cfg.validate()?;
    if init.len() != cfg.n_chains {
        return Err(McmcError::InvalidConfig(format!(
            "{} init points for {} chains",
            init.len(),
            cfg.n_chains
        )));
    }
    for (chain, point) in init.iter().enumerate() {
        if !target(point).is_finite() {
            return Err(McmcError::InitializationError {
                chain,
                reason: "initial point has non-finite density".into(),
            });
        }
    }

    let chains: Vec<ChainOutput> = (0..cfg.n_chains)
        .into_par_iter()
        .map(|idx| sample_chain(&target, cfg, &init[idx], chain_seed(cfg.seed, idx)))
        .collect();
    Ok(ChainDraws { chains })
}

/// Greedy pre-warmup moves; prior draws often start far from the posterior
/// mass and pure Metropolis transport is too slow to cross the gap.
const EXPLORATION_MOVES: usize = 300;
/// Iterations spent settling the step size before the first adaptation
/// window opens.
const SETTLE_ITERATIONS: usize = 75;
/// First adaptation window length; later windows double.
const FIRST_WINDOW: usize = 100;

/// Run a single chain with the given seed. Exposed so chains are
/// independently reproducible: permuting (init, seed) pairs permutes the
/// outputs correspondingly.
///
/// Warmup has three stages. A short greedy exploration walks the start
/// point toward the high-density region (accepted only when the density
/// improves, so it is pure initialization and biases nothing that is kept).
/// The Metropolis warmup then adapts the global log step by Robbins-Monro
/// toward `target_accept` while estimating the posterior spread in doubling
/// windows, refreshing the proposal shape and resetting the estimator at
/// each window boundary so early-trajectory smear does not contaminate the
/// final proposal. Everything freezes at the end of warmup.
pub fn sample_chain<F>(
    target: &F,
    cfg: &SamplerConfig,
    init: &UnconstrainedPoint,
    seed: u64,
) -> ChainOutput
where
    F: Fn(&UnconstrainedPoint) -> f64 + ?Sized,
{
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut position = *init;
    let mut log_density = target(&position);

    // 2.38 / sqrt(d) is the classic random-walk scale for a unit target.
    let base_log_step = (2.38 / (N_PARAMS as f64).sqrt()).ln();
    let mut log_step = base_log_step;
    let mut adaptation = SpreadEstimate::new();
    let mut proposal = Proposal::identity(cfg.full_covariance);

    if cfg.n_warmup > 0 {
        let mut explore_scale = 1.0_f64;
        let mut step = [0.0_f64; N_PARAMS];
        for _ in 0..EXPLORATION_MOVES {
            for value in step.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *value = explore_scale * z;
            }
            let mut candidate = position;
            for (x, dx) in candidate.iter_mut().zip(step.iter()) {
                *x += dx;
            }
            let candidate_density = target(&candidate);
            if candidate_density > log_density {
                position = candidate;
                log_density = candidate_density;
                explore_scale *= 1.1;
            } else {
                explore_scale = (explore_scale * 0.95).max(1e-3);
            }
        }
    }

    // Adaptation window boundaries: after a settle phase the window length
    // doubles, and a terminal buffer after the last refresh re-tunes the
    // step size against the final proposal shape.
    let term_buffer = (cfg.n_warmup / 10).min(75);
    let mut window_ends = Vec::new();
    let window_limit = cfg.n_warmup.saturating_sub(term_buffer);
    if window_limit > SETTLE_ITERATIONS + FIRST_WINDOW {
        let mut width = FIRST_WINDOW;
        let mut end = SETTLE_ITERATIONS + FIRST_WINDOW;
        while end < window_limit {
            window_ends.push(end);
            width *= 2;
            end += width;
        }
        window_ends.push(window_limit);
    }

    let mut draws = Vec::with_capacity(cfg.n_retained());
    let mut accepted_post_warmup = 0usize;
    let mut post_warmup_updates = 0usize;
    let mut scales_at_warmup_end = Vec::new();
    let mut window_cursor = 0usize;
    let mut rm_counter = 0usize;

    let mut step = [0.0_f64; N_PARAMS];
    for iteration in 0..cfg.n_iterations {
        let warming = iteration < cfg.n_warmup;
        for _ in 0..cfg.updates_per_iteration {
            let scale = log_step.exp();
            proposal.draw(&mut rng, scale, &mut step);
            let mut candidate = position;
            for (x, dx) in candidate.iter_mut().zip(step.iter()) {
                *x += dx;
            }
            let candidate_density = target(&candidate);
            let log_ratio = candidate_density - log_density;
            let accept_probability = if log_ratio >= 0.0 {
                1.0
            } else if log_ratio == f64::NEG_INFINITY {
                0.0
            } else {
                log_ratio.exp()
            };
            let accepted = accept_probability > 0.0 && {
                let u: f64 = rng.random();
                u < accept_probability
            };
            if accepted {
                position = candidate;
                log_density = candidate_density;
            }

            if warming {
                // Robbins-Monro on the global scale; the counter restarts
                // with every proposal-shape refresh so late windows still
                // adapt.
                let gamma = (1.0 + rm_counter as f64).powf(-0.6);
                rm_counter += 1;
                log_step += gamma * (accept_probability - cfg.target_accept);
                if iteration >= SETTLE_ITERATIONS {
                    adaptation.update(&position);
                }
            } else {
                post_warmup_updates += 1;
                if accepted {
                    accepted_post_warmup += 1;
                }
            }
        }

        if warming {
            if window_cursor < window_ends.len() && iteration + 1 == window_ends[window_cursor] {
                if adaptation.count >= 25 {
                    proposal.refresh(&adaptation);
                    // fresh shape: restart the scale search around the
                    // theoretical optimum for a unit target
                    log_step = base_log_step;
                    rm_counter = 0;
                }
                adaptation = SpreadEstimate::new();
                window_cursor += 1;
            }
            if iteration + 1 == cfg.n_warmup {
                scales_at_warmup_end = proposal.coordinate_scales(log_step.exp());
            }
        } else {
            let (params, _) = from_unconstrained(&position);
            draws.push(params);
        }
    }

    if cfg.n_warmup == 0 {
        scales_at_warmup_end = proposal.coordinate_scales(log_step.exp());
    }
    let scales_final = proposal.coordinate_scales(log_step.exp());

    ChainOutput {
        seed,
        draws,
        accept_rate: accepted_post_warmup as f64 / post_warmup_updates.max(1) as f64,
        scales_at_warmup_end,
        scales_final,
    }
}

/// Running mean/covariance of warmup positions (Welford updates). Only the
/// diagonal is used unless the proposal is full-covariance.
struct SpreadEstimate {
    count: usize,
    mean: [f64; N_PARAMS],
    // upper triangle of sum of outer products of deviations
    cov_sums: [[f64; N_PARAMS]; N_PARAMS],
}

impl SpreadEstimate {
    fn new() -> Self {
        Self {
            count: 0,
            mean: [0.0; N_PARAMS],
            cov_sums: [[0.0; N_PARAMS]; N_PARAMS],
        }
    }

    fn update(&mut self, x: &UnconstrainedPoint) {
        self.count += 1;
        let k = self.count as f64;
        let mut delta = [0.0; N_PARAMS];
        for (i, d) in delta.iter_mut().enumerate() {
            *d = x[i] - self.mean[i];
            self.mean[i] += *d / k;
        }
        for (i, (&xi, &mean_i)) in x.iter().zip(self.mean.iter()).enumerate() {
            let delta2_i = xi - mean_i;
            for (j, dj) in delta.iter().enumerate().skip(i) {
                self.cov_sums[i][j] += dj * delta2_i;
            }
        }
    }

    fn variance(&self, i: usize) -> f64 {
        if self.count < 2 {
            1.0
        } else {
            (self.cov_sums[i][i] / (self.count as f64 - 1.0)).max(1e-12)
        }
    }

    fn covariance(&self) -> [[f64; N_PARAMS]; N_PARAMS] {
        let mut cov = [[0.0; N_PARAMS]; N_PARAMS];
        let denom = (self.count as f64 - 1.0).max(1.0);
        for (i, sums_row) in self.cov_sums.iter().enumerate() {
            for (j, sum) in sums_row.iter().enumerate().skip(i) {
                let v = sum / denom;
                cov[i][j] = v;
                if i != j {
                    cov[j][i] = v;
                }
            }
            // regularization keeps the factorization well-posed early on
            cov[i][i] = cov[i][i].max(1e-12) + 1e-10;
        }
        cov
    }
}

/// Proposal shape: either per-coordinate standard deviations or a Cholesky
/// factor of the adapted covariance (boxed; one per chain).
enum Proposal {
    Diagonal {
        sds: [f64; N_PARAMS],
    },
    Cholesky {
        factor: Box<[[f64; N_PARAMS]; N_PARAMS]>,
    },
}

impl Proposal {
    fn identity(full_covariance: bool) -> Self {
        if full_covariance {
            let mut factor = Box::new([[0.0; N_PARAMS]; N_PARAMS]);
            for (i, row) in factor.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            Proposal::Cholesky { factor }
        } else {
            Proposal::Diagonal {
                sds: [1.0; N_PARAMS],
            }
        }
    }

    fn refresh(&mut self, estimate: &SpreadEstimate) {
        match self {
            Proposal::Diagonal { sds } => {
                for (i, sd) in sds.iter_mut().enumerate() {
                    *sd = estimate.variance(i).sqrt();
                }
            }
            Proposal::Cholesky { factor } => {
                if let Some(chol) = cholesky(&estimate.covariance()) {
                    **factor = chol;
                }
            }
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R, scale: f64, out: &mut [f64; N_PARAMS]) {
        let mut z = [0.0; N_PARAMS];
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(rng);
        }
        match self {
            Proposal::Diagonal { sds } => {
                for i in 0..N_PARAMS {
                    out[i] = scale * sds[i] * z[i];
                }
            }
            Proposal::Cholesky { factor } => {
                for i in 0..N_PARAMS {
                    let mut acc = 0.0;
                    for j in 0..=i {
                        acc += factor[i][j] * z[j];
                    }
                    out[i] = scale * acc;
                }
            }
        }
    }

    /// Effective per-coordinate proposal standard deviations.
    fn coordinate_scales(&self, scale: f64) -> Vec<f64> {
        match self {
            Proposal::Diagonal { sds } => sds.iter().map(|s| scale * s).collect(),
            Proposal::Cholesky { factor } => (0..N_PARAMS)
                .map(|i| {
                    let row_norm: f64 = (0..=i).map(|j| factor[i][j] * factor[i][j]).sum();
                    scale * row_norm.sqrt()
                })
                .collect(),
        }
    }
}

fn cholesky(matrix: &[[f64; N_PARAMS]; N_PARAMS]) -> Option<[[f64; N_PARAMS]; N_PARAMS]> {
    let mut factor = [[0.0; N_PARAMS]; N_PARAMS];
    for i in 0..N_PARAMS {
        for j in 0..=i {
            let dot: f64 = factor[i][..j]
                .iter()
                .zip(factor[j][..j].iter())
                .map(|(a, b)| a * b)
                .sum();
            let sum = matrix[i][j] - dot;
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                factor[i][j] = sum.sqrt();
            } else {
                factor[i][j] = sum / factor[j][j];
            }
        }
    }
    Some(factor)
}

/// Draw one starting point per chain from the priors, transformed to
/// unconstrained space, redrawing (up to 100 times per chain) until the
/// target is finite there.
pub fn init_from_prior<F>(
    target: F,
    priors: &PriorConfig,
    n_chains: usize,
    seed: u64,
) -> Result<Vec<UnconstrainedPoint>, McmcError>
where
    F: Fn(&UnconstrainedPoint) -> f64,
{
    priors
        .validate()
        .map_err(|e| McmcError::InvalidConfig(e.to_string()))?;
    let mut points = Vec::with_capacity(n_chains);
    for chain in 0..n_chains {
        let mut rng = ChaCha12Rng::seed_from_u64(chain_seed(seed ^ 0x5eed, chain));
        let mut found = None;
        for _ in 0..100 {
            let params = draw_from_priors(priors, &mut rng)
                .map_err(|reason| McmcError::InitializationError { chain, reason })?;
            let point = to_unconstrained(&params);
            if point.iter().all(|x| x.is_finite()) && target(&point).is_finite() {
                found = Some(point);
                break;
            }
        }
        match found {
            Some(point) => points.push(point),
            None => {
                return Err(McmcError::InitializationError {
                    chain,
                    reason: "no finite-density prior draw in 100 attempts".into(),
                });
            }
        }
    }
    Ok(points)
}

fn draw_from_priors(priors: &PriorConfig, rng: &mut ChaCha12Rng) -> Result<EpidemicParams, String> {
    let beta = truncated_normal_draw(rng, priors.mu_beta, priors.sigma_beta, 0.0, f64::INFINITY)?;
    let omega = match priors.omega {
        OmegaPrior::TruncatedNormal { mu, sigma } => {
            truncated_normal_draw(rng, mu, sigma, 0.0, 1.0)?
        }
        OmegaPrior::Beta { alpha, beta } => BetaDist::new(alpha, beta)
            .map_err(|e| format!("omega prior: {e}"))?
            .sample(rng),
    };
    let lambda = BetaDist::new(priors.alpha_lambda, priors.beta_lambda)
        .map_err(|e| format!("lambda prior: {e}"))?
        .sample(rng);
    let d_i = truncated_normal_draw(rng, priors.mu_d_i, priors.sigma_d_i, 0.0, f64::INFINITY)?;
    let d_t = truncated_normal_draw(rng, priors.mu_d_t, priors.sigma_d_t, 0.0, f64::INFINITY)?;
    let phi_deaths = Exp::new(priors.rate_phi)
        .map_err(|e| format!("phi prior: {e}"))?
        .sample(rng);
    let phi_tweets = Exp::new(priors.rate_phi_tweets)
        .map_err(|e| format!("phi_tweets prior: {e}"))?
        .sample(rng);
    EpidemicParams::new(beta, omega, lambda, d_i, d_t, phi_deaths, phi_tweets)
        .map_err(|e| e.to_string())
}

fn truncated_normal_draw(
    rng: &mut ChaCha12Rng,
    mu: f64,
    sigma: f64,
    lower: f64,
    upper: f64,
) -> Result<f64, String> {
    for _ in 0..10_000 {
        let z: f64 = StandardNormal.sample(rng);
        let x = mu + sigma * z;
        if x >= lower && x <= upper {
            return Ok(x);
        }
    }
    Err(format!(
        "truncated normal ({mu}, {sigma}) on [{lower}, {upper}] rejected 10000 draws"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard_gaussian(v: &UnconstrainedPoint) -> f64 {
        -0.5 * v.iter().map(|x| x * x).sum::<f64>()
    }

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::default().validate().is_ok());
        let c = SamplerConfig {
            n_warmup: SamplerConfig::default().n_iterations,
            ..SamplerConfig::default()
        };
        assert!(c.validate().is_err());
        let c = SamplerConfig {
            n_chains: 0,
            ..SamplerConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn gaussian_oracle_moments() {
        // Known-distribution check on the standard 7-d Gaussian: pooled
        // post-warmup means within 0.1 of zero and every chain's marginal
        // variances within 15% of one. A random-walk sampler needs on the
        // order of 20k draws per chain before those bounds sit at 3+
        // standard errors of the respective estimators.
        let cfg = SamplerConfig {
            n_chains: 4,
            n_iterations: 21_000,
            n_warmup: 1000,
            seed: 5,
            ..SamplerConfig::default()
        };
        let init = vec![[0.1; N_PARAMS]; 4];
        let out = sample(standard_gaussian, &cfg, &init).unwrap();

        // back to unconstrained space via the exact inverse
        let unconstrained: Vec<Vec<UnconstrainedPoint>> = out
            .chains
            .iter()
            .map(|c| c.draws.iter().map(to_unconstrained).collect())
            .collect();

        for dim in 0..N_PARAMS {
            let pooled: Vec<f64> = unconstrained.iter().flatten().map(|v| v[dim]).collect();
            let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
            assert!(mean.abs() < 0.1, "dim {dim}: pooled mean {mean}");
        }
        for (c, chain) in unconstrained.iter().enumerate() {
            for dim in 0..N_PARAMS {
                let values: Vec<f64> = chain.iter().map(|v| v[dim]).collect();
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
                    / (values.len() as f64 - 1.0);
                assert!(
                    (var - 1.0).abs() < 0.15,
                    "chain {c} dim {dim}: variance {var}"
                );
            }
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cfg = SamplerConfig {
            n_iterations: 400,
            n_warmup: 200,
            seed: 9,
            ..SamplerConfig::default()
        };
        let init = vec![[0.0; N_PARAMS]; 4];
        let a = sample(standard_gaussian, &cfg, &init).unwrap();
        let b = sample(standard_gaussian, &cfg, &init).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn adaptation_is_frozen_after_warmup() {
        let cfg = SamplerConfig {
            n_iterations: 600,
            n_warmup: 300,
            seed: 5,
            ..SamplerConfig::default()
        };
        let out = sample_chain(&standard_gaussian, &cfg, &[0.0; N_PARAMS], 17);
        assert_eq!(out.scales_at_warmup_end, out.scales_final);
        assert!(!out.scales_at_warmup_end.is_empty());
    }

    #[test]
    fn full_covariance_mode_also_samples() {
        let cfg = SamplerConfig {
            n_iterations: 1500,
            n_warmup: 750,
            seed: 31,
            full_covariance: true,
            ..SamplerConfig::default()
        };
        // correlated 2-d structure embedded in the 7-d Gaussian
        let target = |v: &UnconstrainedPoint| {
            let corr: f64 = 0.9;
            let quad = (v[0] * v[0] - 2.0 * corr * v[0] * v[1] + v[1] * v[1]) / (1.0 - corr * corr);
            -0.5 * (quad + v[2..].iter().map(|x| x * x).sum::<f64>())
        };
        let out = sample(target, &cfg, &vec![[0.0; N_PARAMS]; 4]).unwrap();
        for chain in &out.chains {
            assert!(
                chain.accept_rate > 0.05,
                "accept rate {}",
                chain.accept_rate
            );
            assert_eq!(chain.draws.len(), cfg.n_retained());
        }
    }

    #[test]
    fn non_finite_init_is_an_error() {
        let cfg = SamplerConfig::default();
        let target = |_: &UnconstrainedPoint| f64::NEG_INFINITY;
        let err = sample(target, &cfg, &vec![[0.0; N_PARAMS]; 4]).unwrap_err();
        assert!(matches!(
            err,
            McmcError::InitializationError { chain: 0, .. }
        ));
    }

    #[test]
    fn chains_are_exchangeable_under_seed_permutation() {
        let cfg = SamplerConfig {
            n_iterations: 300,
            n_warmup: 100,
            ..SamplerConfig::default()
        };
        let init_a = [0.2; N_PARAMS];
        let init_b = [-0.3; N_PARAMS];
        let run = |init: &UnconstrainedPoint, seed: u64| {
            sample_chain(&standard_gaussian, &cfg, init, seed)
        };
        // swapping (init, seed) pairs swaps the outputs
        let first = (run(&init_a, 11), run(&init_b, 22));
        let second = (run(&init_b, 22), run(&init_a, 11));
        assert_eq!(first.0, second.1);
        assert_eq!(first.1, second.0);
    }

    #[test]
    fn double_well_mode_masses_match_quadrature() {
        // 1-d asymmetric double well embedded in the first coordinate; the
        // remaining coordinates stay standard normal and independent, so the
        // x > 0 mass factorizes.
        let log_density_1d = |x: f64| -2.0 * (x * x - 1.0).powi(2) + 0.5 * x;
        let target = |v: &UnconstrainedPoint| {
            log_density_1d(v[0]) - 0.5 * v[1..].iter().map(|x| x * x).sum::<f64>()
        };

        // midpoint quadrature for the positive-mode mass
        let (mut total, mut positive) = (0.0, 0.0);
        let step = 1e-4;
        let cells = (12.0 / step) as usize;
        for i in 0..cells {
            let x = -6.0 + (i as f64 + 0.5) * step;
            let density = log_density_1d(x).exp() * step;
            total += density;
            if x >= 0.0 {
                positive += density;
            }
        }
        let expected = positive / total;

        let cfg = SamplerConfig {
            n_chains: 1,
            n_iterations: 110_000,
            n_warmup: 10_000,
            seed: 77,
            ..SamplerConfig::default()
        };
        let out = sample(target, &cfg, &[[1.0; N_PARAMS]]).unwrap();
        let draws = &out.chains[0].draws;
        // draws are stored constrained; component 0 is exp(x), so x > 0
        // corresponds to beta > 1
        let fraction = draws.iter().filter(|d| d.beta > 1.0).count() as f64 / draws.len() as f64;
        assert!(
            (fraction - expected).abs() < 0.05 * expected,
            "empirical {fraction} vs quadrature {expected}"
        );
    }

    #[test]
    fn prior_inits_are_distinct_and_prior_shaped() {
        let priors = PriorConfig {
            alpha_lambda: 1.0,
            beta_lambda: 1.0,
            ..PriorConfig::default()
        };
        let target = |_: &UnconstrainedPoint| 0.0;

        let inits = init_from_prior(target, &priors, 4, 99).unwrap();
        assert_eq!(inits.len(), 4);
        for i in 0..inits.len() {
            for j in (i + 1)..inits.len() {
                assert_ne!(inits[i], inits[j], "chains {i} and {j} share an init");
            }
        }

        // With Beta(1, 1) on lambda the initial lambda values should look
        // uniform: Kolmogorov-Smirnov at alpha = 0.01 over 1000 draws.
        let n = 1000;
        let mut lambdas: Vec<f64> = (0..n)
            .map(|k| {
                let point = init_from_prior(target, &priors, 1, 1_000 + k as u64).unwrap()[0];
                from_unconstrained(&point).0.lambda_tweets
            })
            .collect();
        lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks = 0.0_f64;
        for (i, x) in lambdas.iter().enumerate() {
            let empirical_hi = (i + 1) as f64 / n as f64;
            let empirical_lo = i as f64 / n as f64;
            ks = ks
                .max((empirical_hi - x).abs())
                .max((x - empirical_lo).abs());
        }
        let critical = 1.628 / (n as f64).sqrt();
        assert!(ks < critical, "KS statistic {ks} above {critical}");
    }

    #[test]
    fn degenerate_priors_concentrate_inits() {
        let priors = PriorConfig {
            sigma_beta: 1e-9,
            mu_beta: 2.0,
            ..PriorConfig::default()
        };
        let target = |_: &UnconstrainedPoint| 0.0;
        let inits = init_from_prior(target, &priors, 8, 5).unwrap();
        for point in inits {
            let (params, _) = from_unconstrained(&point);
            assert!((params.beta - 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn init_gives_up_after_rejections() {
        let target = |_: &UnconstrainedPoint| f64::NEG_INFINITY;
        let err = init_from_prior(target, &PriorConfig::default(), 2, 3).unwrap_err();
        assert!(matches!(err, McmcError::InitializationError { .. }));
    }

    #[test]
    fn acceptance_rate_lands_near_target_on_gaussian() {
        let cfg = SamplerConfig {
            seed: 8,
            ..SamplerConfig::default()
        };
        let out = sample(standard_gaussian, &cfg, &vec![[0.0; N_PARAMS]; 4]).unwrap();
        for chain in &out.chains {
            assert!(
                (0.1..=0.5).contains(&chain.accept_rate),
                "acceptance {}",
                chain.accept_rate
            );
        }
    }
}
