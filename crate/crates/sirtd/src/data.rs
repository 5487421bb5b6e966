//! Shared domain types: compartment states, trajectories, and observed data.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("compartment {name} = {value} must be finite and non-negative")]
    NegativeCompartment { name: &'static str, value: f64 },
    #[error("trajectory days and states have different lengths ({days} vs {states})")]
    LengthMismatch { days: usize, states: usize },
    #[error("day indices must be strictly increasing (position {position})")]
    NonIncreasingDays { position: usize },
    #[error("observed series have different lengths")]
    SeriesLengthMismatch,
    #[error("observed series are empty")]
    EmptySeries,
    #[error("cumulative deaths decrease at position {position} ({previous} -> {current})")]
    NonMonotoneDeaths {
        position: usize,
        previous: u64,
        current: u64,
    },
    #[error("initial state sums to {total} but population is {population}")]
    InitialStateMismatch { total: f64, population: f64 },
    #[error("population must be positive, got {0}")]
    BadPopulation(f64),
}

/// Real-valued sub-population sizes at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompartmentState {
    pub susceptible: f64,
    pub infectious: f64,
    pub recovered: f64,
    pub terminal: f64,
    pub deceased: f64,
}

impl CompartmentState {
    pub fn new(
        susceptible: f64,
        infectious: f64,
        recovered: f64,
        terminal: f64,
        deceased: f64,
    ) -> Result<Self, DataError> {
        let state = Self {
            susceptible,
            infectious,
            recovered,
            terminal,
            deceased,
        };
        for (name, value) in state.named() {
            if !value.is_finite() || value < 0.0 {
                return Err(DataError::NegativeCompartment { name, value });
            }
        }
        Ok(state)
    }

    fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("S", self.susceptible),
            ("I", self.infectious),
            ("R", self.recovered),
            ("T", self.terminal),
            ("D", self.deceased),
        ]
    }

    pub fn total(&self) -> f64 {
        self.susceptible + self.infectious + self.recovered + self.terminal + self.deceased
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.susceptible,
            self.infectious,
            self.recovered,
            self.terminal,
            self.deceased,
        ]
    }

    pub fn from_array(values: [f64; 5]) -> Result<Self, DataError> {
        Self::new(values[0], values[1], values[2], values[3], values[4])
    }
}

/// A state per day over a strictly increasing day grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    days: Vec<f64>,
    states: Vec<CompartmentState>,
}

impl Trajectory {
    pub fn new(days: Vec<f64>, states: Vec<CompartmentState>) -> Result<Self, DataError> {
        if days.len() != states.len() {
            return Err(DataError::LengthMismatch {
                days: days.len(),
                states: states.len(),
            });
        }
        for (i, pair) in days.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(DataError::NonIncreasingDays { position: i + 1 });
            }
        }
        Ok(Self { days, states })
    }

    pub fn days(&self) -> &[f64] {
        &self.days
    }

    pub fn states(&self) -> &[CompartmentState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &CompartmentState)> {
        self.days.iter().copied().zip(self.states.iter())
    }
}

/// The data a fit conditions on: day grid, cumulative deaths, daily symptom
/// tweet counts, the population size, and the known initial state at day 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedData {
    pub days: Vec<u32>,
    pub cumulative_deaths: Vec<u64>,
    pub tweet_counts: Vec<u64>,
    pub population: f64,
    pub initial_state: CompartmentState,
}

impl ObservedData {
    pub fn new(
        days: Vec<u32>,
        cumulative_deaths: Vec<u64>,
        tweet_counts: Vec<u64>,
        population: f64,
        initial_state: CompartmentState,
    ) -> Result<Self, DataError> {
        for (i, pair) in cumulative_deaths.windows(2).enumerate() {
            if pair[1] < pair[0] {
                return Err(DataError::NonMonotoneDeaths {
                    position: i + 1,
                    previous: pair[0],
                    current: pair[1],
                });
            }
        }
        Self::new_with_noisy_deaths(
            days,
            cumulative_deaths,
            tweet_counts,
            population,
            initial_state,
        )
    }

    /// Like [`ObservedData::new`] but without the monotone-deaths check.
    ///
    /// Real ingested death counts are cumulative and must not decrease, but
    /// series *generated from the model* put independent NB observation
    /// noise directly on the cumulative D(t) state — exactly what the
    /// posterior predictive replicates — and such draws dip below earlier
    /// values wherever the noise exceeds the daily increment. Fitting those
    /// replicates back is the self-consistency experiment, so they need a
    /// constructor.
    pub fn new_with_noisy_deaths(
        days: Vec<u32>,
        cumulative_deaths: Vec<u64>,
        tweet_counts: Vec<u64>,
        population: f64,
        initial_state: CompartmentState,
    ) -> Result<Self, DataError> {
        if days.is_empty() {
            return Err(DataError::EmptySeries);
        }
        if days.len() != cumulative_deaths.len() || days.len() != tweet_counts.len() {
            return Err(DataError::SeriesLengthMismatch);
        }
        for (i, pair) in days.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(DataError::NonIncreasingDays { position: i + 1 });
            }
        }
        if population <= 0.0 || !population.is_finite() {
            return Err(DataError::BadPopulation(population));
        }
        let total = initial_state.total();
        if (total - population).abs() > 1e-6 * population {
            return Err(DataError::InitialStateMismatch { total, population });
        }
        Ok(Self {
            days,
            cumulative_deaths,
            tweet_counts,
            population,
            initial_state,
        })
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y0(n: f64, i0: f64) -> CompartmentState {
        CompartmentState::new(n - i0, i0, 0.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn compartment_state_rejects_negatives() {
        assert!(CompartmentState::new(1.0, -0.5, 0.0, 0.0, 0.0).is_err());
        assert!(CompartmentState::new(1.0, f64::NAN, 0.0, 0.0, 0.0).is_err());
        let s = CompartmentState::new(100.0, 1.0, 2.0, 3.0, 4.0).unwrap();
        assert_eq!(s.total(), 110.0);
        assert_eq!(CompartmentState::from_array(s.as_array()).unwrap(), s);
    }

    #[test]
    fn trajectory_requires_increasing_days() {
        let s = y0(10.0, 1.0);
        assert!(Trajectory::new(vec![0.0, 1.0, 1.0], vec![s, s, s]).is_err());
        assert!(Trajectory::new(vec![0.0, 1.0], vec![s]).is_err());
        let tr = Trajectory::new(vec![0.0, 0.5, 2.0], vec![s, s, s]).unwrap();
        assert_eq!(tr.len(), 3);
    }

    #[test]
    fn observed_data_validation() {
        let init = y0(100.0, 5.0);
        assert!(
            ObservedData::new(vec![0, 1, 2], vec![0, 1, 2], vec![3, 2, 1], 100.0, init).is_ok()
        );
        // deaths must be non-decreasing
        let err = ObservedData::new(vec![0, 1, 2], vec![0, 2, 1], vec![0, 0, 0], 100.0, init)
            .unwrap_err();
        assert!(matches!(err, DataError::NonMonotoneDeaths { .. }));
        // shared length
        assert!(ObservedData::new(vec![0, 1], vec![0, 1, 2], vec![0, 0], 100.0, init).is_err());
        // y0 must sum to N
        assert!(ObservedData::new(vec![0], vec![0], vec![0], 90.0, init).is_err());
        // empty is rejected
        assert!(ObservedData::new(vec![], vec![], vec![], 100.0, init).is_err());
    }
}
