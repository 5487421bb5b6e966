//! Command-line surface: `simulate`, `fit`, `summarize`, and `predict`
//! subcommands over the library pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/validation error,
//! 3 numerical failure. The run seed resolves as SIRTD_SEED environment
//! variable over `--seed` over the config `seed` key; every run writes a
//! manifest (config echo, resolved seed, version) next to its outputs.

use crate::abm::{InfectionMode, SimConfig, simulate};
use crate::data::{CompartmentState, ObservedData};
use crate::diagnostics::{ParameterSummary, format_summary_table, summarize_parameter};
use crate::io::{
    ConfigFile, IoError, draws_to_csv, initial_state_from_confirmed, overlay_to_csv,
    predictive_to_csv, read_draws_csv, read_observed_csv, summary_to_csv, write_atomic,
    write_sim_csv,
};
use crate::mcmc::{SamplerConfig, chain_seed, init_from_prior, sample};
use crate::model::{FitContext, log_posterior_unconstrained, posterior_predictive};
use crate::ode::SolverConfig;
use crate::params::{OmegaPrior, PARAM_NAMES, PriorConfig};
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable overriding every other seed source.
pub const SEED_ENV_VAR: &str = "SIRTD_SEED";

#[derive(Parser)]
#[command(
    name = "sirtd",
    version,
    about = "SIRTD epidemic workbench: agent-based simulation, Bayesian fitting, diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the agent-based simulation and write the daily table as CSV.
    Simulate {
        /// Config file with the sim.* keys.
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit the model to death and tweet series; writes draws, summary, and
    /// an observed-vs-predicted overlay.
    Fit {
        #[arg(long)]
        config: PathBuf,
        /// Deaths CSV (date,cumulative_deaths); falls back to data.deaths.
        #[arg(long)]
        deaths: Option<PathBuf>,
        /// Tweets CSV (date,symptom_tweet_count); falls back to data.tweets.
        #[arg(long)]
        tweets: Option<PathBuf>,
        /// Optional confirmed-cases CSV (date,confirmed_cases) used only to
        /// build the initial compartment counts.
        #[arg(long)]
        confirmed: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the convergence/summary table for an existing draws CSV.
    Summarize {
        #[arg(long)]
        draws: PathBuf,
    },
    /// Posterior-predictive bands for an existing draws CSV.
    Predict {
        #[arg(long)]
        draws: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Parse `argv` and run. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, out, seed } => run_simulate(&config, &out, seed),
        Command::Fit {
            config,
            deaths,
            tweets,
            confirmed,
            out,
            seed,
        } => run_fit(
            &config,
            deaths.as_deref(),
            tweets.as_deref(),
            confirmed.as_deref(),
            &out,
            seed,
        ),
        Command::Summarize { draws } => run_summarize(&draws),
        Command::Predict {
            draws,
            config,
            out,
            seed,
        } => run_predict(&draws, &config, &out, seed),
    }
}

const KNOWN_KEYS: &[&str] = &[
    "seed",
    "sim.N",
    "sim.days",
    "sim.contacts",
    "sim.beta",
    "sim.omega",
    "sim.lambda",
    "sim.d_i",
    "sim.d_t",
    "sim.i0",
    "sim.infection_mode",
    "fit.N",
    "fit.i0",
    "fit.r0",
    "fit.t0",
    "fit.d0",
    "priors.mu_beta",
    "priors.sigma_beta",
    "priors.omega_family",
    "priors.mu_omega",
    "priors.sigma_omega",
    "priors.alpha_omega",
    "priors.beta_omega",
    "priors.alpha_lambda",
    "priors.beta_lambda",
    "priors.mu_d_i",
    "priors.sigma_d_i",
    "priors.mu_d_t",
    "priors.sigma_d_t",
    "priors.rate_phi",
    "priors.rate_phi_tweets",
    "sampler.n_chains",
    "sampler.n_iterations",
    "sampler.n_warmup",
    "sampler.target_accept",
    "sampler.full_covariance",
    "sampler.updates_per_iteration",
    "solver.rtol",
    "solver.atol",
    "solver.max_steps",
    "data.deaths",
    "data.tweets",
    "data.confirmed",
];

fn load_config(path: &Path) -> Result<ConfigFile, CliError> {
    let config = ConfigFile::load(path)?;
    // Reject typos up front: every key must be one the pipeline understands.
    let unknown: Vec<&str> = config
        .keys()
        .filter(|key| !KNOWN_KEYS.contains(key))
        .collect();
    if !unknown.is_empty() {
        return Err(CliError::Data(format!(
            "unknown config keys: {}",
            unknown.join(", ")
        )));
    }
    Ok(config)
}

/// SIRTD_SEED > --seed > config `seed` > 0.
fn resolve_seed(config: &ConfigFile, flag: Option<u64>) -> Result<u64, CliError> {
    if let Ok(raw) = std::env::var(SEED_ENV_VAR) {
        return raw.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "{SEED_ENV_VAR} must be an unsigned integer, got {raw:?}"
            ))
        });
    }
    if let Some(seed) = flag {
        return Ok(seed);
    }
    Ok(config
        .get_parsed::<u64>("seed")
        .map_err(|e| CliError::Data(e.to_string()))?
        .unwrap_or(0))
}

fn write_manifest(
    out_dir: &Path,
    command: &str,
    config: &ConfigFile,
    seed: u64,
) -> Result<(), CliError> {
    let manifest = format!(
        "command = {command}\nversion = {} {}\nresolved_seed = {seed}\n--- config ---\n{}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        config.echo()
    );
    write_atomic(&out_dir.join("manifest.txt"), &manifest)?;
    Ok(())
}

fn config_value<T: std::str::FromStr>(
    config: &ConfigFile,
    key: &str,
    default: T,
) -> Result<T, CliError> {
    Ok(config
        .get_parsed::<T>(key)
        .map_err(|e| CliError::Data(e.to_string()))?
        .unwrap_or(default))
}

fn require_value<T: std::str::FromStr>(config: &ConfigFile, key: &str) -> Result<T, CliError> {
    config
        .require::<T>(key)
        .map_err(|e| CliError::Data(e.to_string()))
}

fn run_simulate(
    config_path: &Path,
    out_dir: &Path,
    seed_flag: Option<u64>,
) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let seed = resolve_seed(&config, seed_flag)?;

    let infection_mode = match config.get_str("sim.infection_mode").as_deref() {
        None | Some("daily_rate") => InfectionMode::DailyRate,
        Some("per_contact") => InfectionMode::PerContact,
        Some(other) => {
            return Err(CliError::Data(format!(
                "sim.infection_mode must be daily_rate or per_contact, got {other:?}"
            )));
        }
    };
    let sim_config = SimConfig {
        population: require_value(&config, "sim.N")?,
        days: require_value(&config, "sim.days")?,
        contacts: require_value(&config, "sim.contacts")?,
        beta: require_value(&config, "sim.beta")?,
        omega: require_value(&config, "sim.omega")?,
        lambda: require_value(&config, "sim.lambda")?,
        d_i: require_value(&config, "sim.d_i")?,
        d_t: require_value(&config, "sim.d_t")?,
        initial_infected: require_value(&config, "sim.i0")?,
        seed,
        infection_mode,
    };
    let output = simulate(&sim_config).map_err(|e| CliError::Data(e.to_string()))?;
    write_sim_csv(&output, &out_dir.join("simulated.csv"))?;
    write_manifest(out_dir, "simulate", &config, seed)?;
    println!(
        "simulated {} days over population {} -> {}",
        output.rows.len(),
        sim_config.population,
        out_dir.join("simulated.csv").display()
    );
    Ok(())
}

fn priors_from_config(config: &ConfigFile) -> Result<PriorConfig, CliError> {
    let defaults = PriorConfig::default();
    let omega = match config.get_str("priors.omega_family").as_deref() {
        None | Some("half_normal") => OmegaPrior::TruncatedNormal {
            mu: config_value(config, "priors.mu_omega", 0.4)?,
            sigma: config_value(config, "priors.sigma_omega", 0.5)?,
        },
        Some("beta") => OmegaPrior::Beta {
            alpha: require_value(config, "priors.alpha_omega")?,
            beta: require_value(config, "priors.beta_omega")?,
        },
        Some(other) => {
            return Err(CliError::Data(format!(
                "priors.omega_family must be half_normal or beta, got {other:?}"
            )));
        }
    };
    let priors = PriorConfig {
        mu_beta: config_value(config, "priors.mu_beta", defaults.mu_beta)?,
        sigma_beta: config_value(config, "priors.sigma_beta", defaults.sigma_beta)?,
        omega,
        alpha_lambda: config_value(config, "priors.alpha_lambda", defaults.alpha_lambda)?,
        beta_lambda: config_value(config, "priors.beta_lambda", defaults.beta_lambda)?,
        mu_d_i: config_value(config, "priors.mu_d_i", defaults.mu_d_i)?,
        sigma_d_i: config_value(config, "priors.sigma_d_i", defaults.sigma_d_i)?,
        mu_d_t: config_value(config, "priors.mu_d_t", defaults.mu_d_t)?,
        sigma_d_t: config_value(config, "priors.sigma_d_t", defaults.sigma_d_t)?,
        rate_phi: config_value(config, "priors.rate_phi", defaults.rate_phi)?,
        rate_phi_tweets: config_value(config, "priors.rate_phi_tweets", defaults.rate_phi_tweets)?,
    };
    priors
        .validate()
        .map_err(|e| CliError::Data(e.to_string()))?;
    Ok(priors)
}

fn sampler_from_config(config: &ConfigFile, seed: u64) -> Result<SamplerConfig, CliError> {
    let defaults = SamplerConfig::default();
    let sampler = SamplerConfig {
        n_chains: config_value(config, "sampler.n_chains", defaults.n_chains)?,
        n_iterations: config_value(config, "sampler.n_iterations", defaults.n_iterations)?,
        n_warmup: config_value(config, "sampler.n_warmup", defaults.n_warmup)?,
        target_accept: config_value(config, "sampler.target_accept", defaults.target_accept)?,
        seed,
        full_covariance: config_value(config, "sampler.full_covariance", defaults.full_covariance)?,
        updates_per_iteration: config_value(
            config,
            "sampler.updates_per_iteration",
            defaults.updates_per_iteration,
        )?,
    };
    sampler
        .validate()
        .map_err(|e| CliError::Data(e.to_string()))?;
    Ok(sampler)
}

fn solver_from_config(config: &ConfigFile) -> Result<SolverConfig, CliError> {
    let defaults = SolverConfig::default();
    let solver = SolverConfig {
        rtol: config_value(config, "solver.rtol", defaults.rtol)?,
        atol: config_value(config, "solver.atol", defaults.atol)?,
        max_steps: config_value(config, "solver.max_steps", defaults.max_steps)?,
        non_negative: false,
    };
    solver
        .validate()
        .map_err(|e| CliError::Data(e.to_string()))?;
    Ok(solver)
}

fn data_path(flag: Option<&Path>, config: &ConfigFile, key: &str) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| config.get_str(key).map(PathBuf::from))
}

/// Assemble the observed data from CSVs plus the initial-state protocol.
fn observed_from_inputs(
    config: &ConfigFile,
    deaths_flag: Option<&Path>,
    tweets_flag: Option<&Path>,
    confirmed_flag: Option<&Path>,
) -> Result<ObservedData, CliError> {
    let deaths_path = data_path(deaths_flag, config, "data.deaths").ok_or_else(|| {
        CliError::Data("no deaths series (pass --deaths or set data.deaths)".into())
    })?;
    let tweets_path = data_path(tweets_flag, config, "data.tweets").ok_or_else(|| {
        CliError::Data("no tweets series (pass --tweets or set data.tweets)".into())
    })?;
    let confirmed_path = data_path(confirmed_flag, config, "data.confirmed");

    let joined = read_observed_csv(&deaths_path, &tweets_path)?;
    let population: f64 = require_value(config, "fit.N")?;

    let initial_state = if let Some(confirmed) = confirmed_path {
        initial_state_from_confirmed(
            &confirmed,
            joined.start_date,
            joined.cumulative_deaths[0],
            population,
        )?
    } else {
        let i0: f64 = require_value(config, "fit.i0")?;
        let r0: f64 = config_value(config, "fit.r0", 0.0)?;
        let t0: f64 = config_value(config, "fit.t0", 0.0)?;
        let d0: f64 = config_value(config, "fit.d0", 0.0)?;
        CompartmentState::new(population - i0 - r0 - t0 - d0, i0, r0, t0, d0)
            .map_err(|e| CliError::Data(e.to_string()))?
    };

    joined
        .into_observed(population, initial_state)
        .map_err(|e| CliError::Data(e.to_string()))
}

fn summaries_from_chains(chains: &[Vec<crate::params::EpidemicParams>]) -> Vec<ParameterSummary> {
    PARAM_NAMES
        .iter()
        .enumerate()
        .map(|(index, name)| {
            let series: Vec<Vec<f64>> = chains
                .iter()
                .map(|chain| chain.iter().map(|d| d.as_array()[index]).collect())
                .collect();
            summarize_parameter(name, &series)
        })
        .collect()
}

fn run_fit(
    config_path: &Path,
    deaths: Option<&Path>,
    tweets: Option<&Path>,
    confirmed: Option<&Path>,
    out_dir: &Path,
    seed_flag: Option<u64>,
) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let seed = resolve_seed(&config, seed_flag)?;

    let observed = observed_from_inputs(&config, deaths, tweets, confirmed)?;
    let priors = priors_from_config(&config)?;
    let sampler_config = sampler_from_config(&config, seed)?;
    let solver = solver_from_config(&config)?;
    let ctx =
        FitContext::new(observed, priors, solver).map_err(|e| CliError::Data(e.to_string()))?;

    let target = |v: &crate::params::UnconstrainedPoint| log_posterior_unconstrained(v, &ctx);
    let inits = init_from_prior(target, &ctx.priors, sampler_config.n_chains, seed)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let draws =
        sample(target, &sampler_config, &inits).map_err(|e| CliError::Numerical(e.to_string()))?;

    let per_chain: Vec<Vec<crate::params::EpidemicParams>> =
        draws.chains.iter().map(|c| c.draws.clone()).collect();
    write_atomic(&out_dir.join("draws.csv"), &draws_to_csv(&per_chain))?;

    let summaries = summaries_from_chains(&per_chain);
    write_atomic(&out_dir.join("summary.csv"), &summary_to_csv(&summaries))?;
    write_atomic(
        &out_dir.join("summary.txt"),
        &format_summary_table(&summaries),
    )?;

    let predictive = posterior_predictive(&draws.pooled(), &ctx, chain_seed(seed, 1_000_003))
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    write_atomic(
        &out_dir.join("overlay.csv"),
        &overlay_to_csv(
            &ctx.observed.days,
            &ctx.observed.cumulative_deaths,
            &ctx.observed.tweet_counts,
            &predictive.mean_deaths,
            &predictive.mean_tweets,
        ),
    )?;

    write_manifest(out_dir, "fit", &config, seed)?;
    print!("{}", format_summary_table(&summaries));
    for chain in &draws.chains {
        println!(
            "chain seed {}: acceptance {:.3}",
            chain.seed, chain.accept_rate
        );
    }
    if predictive.skipped_draws > 0 {
        println!(
            "posterior predictive skipped {} draws",
            predictive.skipped_draws
        );
    }
    Ok(())
}

fn run_summarize(draws_path: &Path) -> Result<(), CliError> {
    let chains = read_draws_csv(draws_path)?;
    let summaries = summaries_from_chains(&chains);
    print!("{}", format_summary_table(&summaries));
    Ok(())
}

fn run_predict(
    draws_path: &Path,
    config_path: &Path,
    out_dir: &Path,
    seed_flag: Option<u64>,
) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let seed = resolve_seed(&config, seed_flag)?;

    let chains = read_draws_csv(draws_path)?;
    let observed = observed_from_inputs(&config, None, None, None)?;
    let priors = priors_from_config(&config)?;
    let solver = solver_from_config(&config)?;
    let ctx =
        FitContext::new(observed, priors, solver).map_err(|e| CliError::Data(e.to_string()))?;

    let pooled: Vec<crate::params::EpidemicParams> = chains.into_iter().flatten().collect();
    let predictive = posterior_predictive(&pooled, &ctx, chain_seed(seed, 1_000_003))
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    write_atomic(
        &out_dir.join("predictive.csv"),
        &predictive_to_csv(&predictive.rows),
    )?;
    write_manifest(out_dir, "predict", &config, seed)?;
    println!(
        "predictive bands for {} days -> {}",
        ctx.observed.len(),
        out_dir.join("predictive.csv").display()
    );
    if predictive.skipped_draws > 0 {
        println!("skipped {} draws", predictive.skipped_draws);
    }
    Ok(())
}
