//! Simulation and Bayesian inference workbench for a SIRTD
//! (Susceptible-Infectious-Recovered-Terminally-ill-Deceased) compartmental
//! epidemic model with a social-media symptom-mention observation channel.
//!
//! The pipeline has three stages, each usable on its own:
//!
//! 1. [`abm`] — an agent-based data-generating process producing integer
//!    daily compartment counts plus a tweet count ([`abm::simulate`]).
//! 2. [`model`] + [`mcmc`] — a Bayesian SIRTD model with negative-binomial
//!    observation channels for cumulative deaths and daily symptom tweets,
//!    sampled by adaptive random-walk Metropolis over the unconstrained
//!    parameter space ([`model::log_posterior_unconstrained`],
//!    [`mcmc::sample`]).
//! 3. [`diagnostics`] — split R-hat, bulk/tail effective sample sizes, and
//!    summary tables over the merged chains.
//!
//! [`ode`] holds the shared Dormand-Prince 5(4) integrator, [`io`] the CSV
//! and config formats, and [`cli`] the `simulate` / `fit` / `summarize` /
//! `predict` command surface. See the crate examples for one runnable
//! program per capability.
//!
//! ```
//! use sirtd::abm::{InfectionMode, SimConfig, simulate};
//!
//! let output = simulate(&SimConfig {
//!     population: 1_000,
//!     days: 30,
//!     contacts: 10,
//!     beta: 0.3,
//!     omega: 0.1,
//!     lambda: 0.2,
//!     d_i: 7.0,
//!     d_t: 10.0,
//!     initial_infected: 5,
//!     seed: 1,
//!     infection_mode: InfectionMode::DailyRate,
//! })
//! .unwrap();
//! assert_eq!(output.rows.len(), 30);
//! assert!(output.rows.iter().all(|r| r.compartment_total() == 1_000));
//! ```

pub mod abm;
pub mod cli;
pub mod data;
pub mod diagnostics;
pub mod io;
pub mod mcmc;
pub mod model;
pub mod ode;
pub mod params;

pub use abm::{InfectionMode, SimConfig, SimOutput, SimRow};
pub use data::{CompartmentState, ObservedData, Trajectory};
pub use diagnostics::{
    ParameterSummary, ess_bulk, ess_tail, split_rhat, summarize, summarize_parameter,
};
pub use mcmc::{ChainDraws, ChainOutput, SamplerConfig, init_from_prior, sample};
pub use model::{
    FitContext, PredictiveSummary, log_likelihood, log_posterior_unconstrained, log_prior,
    nb2_log_pmf, posterior_predictive, simulate_observations,
};
pub use ode::{SolverConfig, integrate, sirtd_rhs, solve_sirtd};
pub use params::{
    EpidemicParams, N_PARAMS, OmegaPrior, PARAM_NAMES, PriorConfig, UnconstrainedPoint,
    from_unconstrained, to_unconstrained,
};
