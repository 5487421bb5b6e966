//! Agent-based data-generating process: a per-agent daily SIRTD sweep with a
//! tweet counter, producing integer daily compartment counts.
//!
//! All transitions in a day are evaluated against the day-start state and
//! applied at day end, so results do not depend on agent iteration order and
//! newly infected agents become infectious the next day.

use rand::SeedableRng;
use rand::distr::{Bernoulli, Distribution, Uniform};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbmError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("simulated table violates an invariant at day {day}: {reason}")]
    InvariantViolation { day: u32, reason: String },
}

/// How the infection probability of a single contact is derived from `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InfectionMode {
    /// Each contact infects with probability `beta / contacts`, so an
    /// infectious agent in a fully susceptible population causes `beta`
    /// transmissions per day in expectation. The default.
    #[default]
    DailyRate,
    /// Each contact infects with probability `beta` directly.
    PerContact,
}

/// Configuration of one simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Population size N.
    pub population: u64,
    /// Number of days simulated, including the initial row.
    pub days: u32,
    /// Contact draws per infectious agent per day.
    pub contacts: u32,
    /// Infection rate.
    pub beta: f64,
    /// Probability an infection ends terminally.
    pub omega: f64,
    /// Daily tweet probability for infectious agents.
    pub lambda: f64,
    /// Mean dwell time in I, days (>= 1 so the daily exit probability is a
    /// probability).
    pub d_i: f64,
    /// Mean dwell time in T, days (>= 1).
    pub d_t: f64,
    /// Initially infectious count.
    pub initial_infected: u64,
    /// RNG seed; identical seeds give bit-identical output.
    pub seed: u64,
    pub infection_mode: InfectionMode,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), AbmError> {
        let err = |msg: String| Err(AbmError::InvalidConfig(msg));
        if self.population == 0 {
            return err("population must be positive".into());
        }
        if self.initial_infected == 0 || self.initial_infected > self.population {
            return err(format!(
                "initial_infected must be in 1..=population, got {}",
                self.initial_infected
            ));
        }
        if self.days == 0 {
            return err("days must be at least 1".into());
        }
        if self.contacts == 0 {
            return err("contacts must be at least 1".into());
        }
        let p_infect = self.per_contact_probability();
        if !(0.0..=1.0).contains(&p_infect) {
            return err(format!(
                "per-contact infection probability {p_infect} is not a probability; \
                 lower beta or raise contacts"
            ));
        }
        for (name, value) in [("omega", self.omega), ("lambda", self.lambda)] {
            if !(0.0..=1.0).contains(&value) {
                return err(format!("{name} must be in [0, 1], got {value}"));
            }
        }
        for (name, value) in [("d_i", self.d_i), ("d_t", self.d_t)] {
            if value < 1.0 || !value.is_finite() {
                return err(format!("{name} must be at least 1 day, got {value}"));
            }
        }
        Ok(())
    }

    fn per_contact_probability(&self) -> f64 {
        match self.infection_mode {
            InfectionMode::DailyRate => self.beta / f64::from(self.contacts),
            InfectionMode::PerContact => self.beta,
        }
    }
}

/// One day of simulated counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimRow {
    pub day: u32,
    pub susceptible: u64,
    pub infectious: u64,
    pub recovered: u64,
    pub terminal: u64,
    pub deceased: u64,
    pub tweets: u64,
}

impl SimRow {
    pub fn compartment_total(&self) -> u64 {
        self.susceptible + self.infectious + self.recovered + self.terminal + self.deceased
    }
}

/// Daily table produced by [`simulate`]. Row 0 is the initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOutput {
    pub population: u64,
    pub rows: Vec<SimRow>,
}

impl SimOutput {
    /// Check population conservation, monotone deaths, and the tweet bound
    /// (tweets on a day cannot exceed the infectious count at day start).
    pub fn validate(&self) -> Result<(), AbmError> {
        let mut prev: Option<&SimRow> = None;
        for row in &self.rows {
            if row.compartment_total() != self.population {
                return Err(AbmError::InvariantViolation {
                    day: row.day,
                    reason: format!(
                        "compartments sum to {} but population is {}",
                        row.compartment_total(),
                        self.population
                    ),
                });
            }
            match prev {
                None => {
                    if row.tweets != 0 {
                        return Err(AbmError::InvariantViolation {
                            day: row.day,
                            reason: "initial row must have zero tweets".into(),
                        });
                    }
                }
                Some(p) => {
                    if row.deceased < p.deceased {
                        return Err(AbmError::InvariantViolation {
                            day: row.day,
                            reason: format!(
                                "deaths decreased ({} -> {})",
                                p.deceased, row.deceased
                            ),
                        });
                    }
                    if row.tweets > p.infectious {
                        return Err(AbmError::InvariantViolation {
                            day: row.day,
                            reason: format!(
                                "{} tweets from {} infectious at day start",
                                row.tweets, p.infectious
                            ),
                        });
                    }
                }
            }
            prev = Some(row);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Agent {
    Susceptible,
    Infectious,
    Recovered,
    Terminal,
    Dead,
}

/// Run the agent-based simulation. Deterministic for a given seed.
///
/// Daily sweep, all against the day-start state: every infectious agent
/// tweets with probability `lambda`, draws its exit from I with probability
/// `1/d_i` (routing to T with probability `omega`, else to R), and draws
/// `contacts` uniform targets from the whole population (self and repeat
/// contacts allowed), infecting targets that are susceptible with the
/// per-contact probability. Every terminally-ill agent moves to D with
/// probability `1/d_t`. Transitions apply at day end.
pub fn simulate(cfg: &SimConfig) -> Result<SimOutput, AbmError> {
    cfg.validate()?;

    let n = usize::try_from(cfg.population)
        .map_err(|_| AbmError::InvalidConfig("population too large for this platform".into()))?;
    let i0 = cfg.initial_infected;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);

    let mut agents = vec![Agent::Susceptible; n];
    for agent in agents.iter_mut().take(i0 as usize) {
        *agent = Agent::Infectious;
    }

    let bern = |p: f64| Bernoulli::new(p).expect("validated probability");
    let tweet_draw = bern(cfg.lambda);
    let exit_i_draw = bern(1.0 / cfg.d_i);
    let route_terminal_draw = bern(cfg.omega);
    let exit_t_draw = bern(1.0 / cfg.d_t);
    let infect_draw = bern(cfg.per_contact_probability());
    let target_draw = Uniform::new(0usize, n).expect("population is positive");

    let mut counts = Counts {
        susceptible: cfg.population - i0,
        infectious: i0,
        recovered: 0,
        terminal: 0,
        dead: 0,
    };
    let mut rows = Vec::with_capacity(cfg.days as usize);
    rows.push(counts.row(0, 0));

    let mut newly_infected = vec![false; n];
    let mut to_terminal: Vec<usize> = Vec::new();
    let mut to_recovered: Vec<usize> = Vec::new();
    let mut to_dead: Vec<usize> = Vec::new();
    let mut infected_list: Vec<usize> = Vec::new();

    for day in 1..cfg.days {
        let mut tweets = 0u64;
        to_terminal.clear();
        to_recovered.clear();
        to_dead.clear();
        infected_list.clear();

        for idx in 0..n {
            match agents[idx] {
                Agent::Infectious => {
                    if tweet_draw.sample(&mut rng) {
                        tweets += 1;
                    }
                    if exit_i_draw.sample(&mut rng) {
                        if route_terminal_draw.sample(&mut rng) {
                            to_terminal.push(idx);
                        } else {
                            to_recovered.push(idx);
                        }
                    }
                    for _ in 0..cfg.contacts {
                        let target = target_draw.sample(&mut rng);
                        if agents[target] == Agent::Susceptible
                            && infect_draw.sample(&mut rng)
                            && !newly_infected[target]
                        {
                            newly_infected[target] = true;
                            infected_list.push(target);
                        }
                    }
                }
                Agent::Terminal if exit_t_draw.sample(&mut rng) => {
                    to_dead.push(idx);
                }
                _ => {}
            }
        }

        for &idx in &to_terminal {
            agents[idx] = Agent::Terminal;
        }
        for &idx in &to_recovered {
            agents[idx] = Agent::Recovered;
        }
        for &idx in &to_dead {
            agents[idx] = Agent::Dead;
        }
        for &idx in &infected_list {
            agents[idx] = Agent::Infectious;
            newly_infected[idx] = false;
        }

        counts.infectious += infected_list.len() as u64;
        counts.infectious -= (to_terminal.len() + to_recovered.len()) as u64;
        counts.susceptible -= infected_list.len() as u64;
        counts.terminal += to_terminal.len() as u64;
        counts.terminal -= to_dead.len() as u64;
        counts.recovered += to_recovered.len() as u64;
        counts.dead += to_dead.len() as u64;

        rows.push(counts.row(day, tweets));
    }

    let output = SimOutput {
        population: cfg.population,
        rows,
    };
    debug_assert!(output.validate().is_ok());
    Ok(output)
}

#[derive(Clone, Copy)]
struct Counts {
    susceptible: u64,
    infectious: u64,
    recovered: u64,
    terminal: u64,
    dead: u64,
}

impl Counts {
    fn row(&self, day: u32, tweets: u64) -> SimRow {
        SimRow {
            day,
            susceptible: self.susceptible,
            infectious: self.infectious,
            recovered: self.recovered,
            terminal: self.terminal,
            deceased: self.dead,
            tweets,
        }
    }
}
