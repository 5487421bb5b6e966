//! Integrate the deterministic SIRTD system with the adaptive
//! Dormand-Prince solver and print the weekly trajectory.
//!
//! ```bash
//! cargo run --example solve_trajectory
//! ```

use sirtd::data::CompartmentState;
use sirtd::ode::{SolverConfig, solve_sirtd};
use sirtd::params::EpidemicParams;

fn main() {
    let params = EpidemicParams::new(0.3, 0.1, 0.2, 7.0, 10.0, 1.0, 1.0).unwrap();
    let population = 10_000.0;
    let initial = CompartmentState::new(9_990.0, 10.0, 0.0, 0.0, 0.0).unwrap();
    let days: Vec<f64> = (1..=70).map(f64::from).collect();

    let trajectory = solve_sirtd(
        &params,
        &initial,
        population,
        &days,
        &SolverConfig::default(),
    )
    .expect("smooth system at stock parameters");

    println!("day        S        I        R        T        D    total drift");
    for (day, state) in trajectory.iter() {
        if (day as u64).is_multiple_of(7) {
            println!(
                "{:>3} {:>8.1} {:>8.1} {:>8.1} {:>8.1} {:>8.1} {:>14.2e}",
                day,
                state.susceptible,
                state.infectious,
                state.recovered,
                state.terminal,
                state.deceased,
                state.total() - population
            );
        }
    }

    let basic_reproduction = params.beta * params.d_i;
    println!("\nbasic reproduction number beta * d_i = {basic_reproduction:.2}");
    let final_state = trajectory.states().last().unwrap();
    println!(
        "deceased at day 70: {:.1}; infections so far imply {:.1} eventual deaths",
        final_state.deceased,
        params.omega * (population - final_state.susceptible)
    );
}
