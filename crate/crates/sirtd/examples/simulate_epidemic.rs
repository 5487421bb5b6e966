//! Run the agent-based SIRTD simulation at the stock configuration and print
//! the daily table head plus a few trajectory landmarks.
//!
//! ```bash
//! cargo run --example simulate_epidemic
//! ```

use sirtd::abm::{InfectionMode, SimConfig, simulate};

fn main() {
    let config = SimConfig {
        population: 10_000,
        days: 70,
        contacts: 10,
        beta: 0.3,
        omega: 0.1,
        lambda: 0.2,
        d_i: 7.0,
        d_t: 10.0,
        initial_infected: 10,
        seed: 42,
        infection_mode: InfectionMode::DailyRate,
    };
    let output = simulate(&config).expect("valid stock configuration");

    println!("day     S     I     R     T     D  tweets");
    for row in output.rows.iter().take(10) {
        println!(
            "{:>3} {:>5} {:>5} {:>5} {:>5} {:>5} {:>7}",
            row.day,
            row.susceptible,
            row.infectious,
            row.recovered,
            row.terminal,
            row.deceased,
            row.tweets
        );
    }
    println!("...");

    let peak = output.rows.iter().max_by_key(|row| row.infectious).unwrap();
    let last = output.rows.last().unwrap();
    println!("\npeak infectious: {} on day {}", peak.infectious, peak.day);
    println!(
        "final state: S={} R={} D={} (attack fraction {:.1}%)",
        last.susceptible,
        last.recovered,
        last.deceased,
        100.0 * (config.population - last.susceptible) as f64 / config.population as f64
    );

    // every row conserves the population exactly
    assert!(
        output
            .rows
            .iter()
            .all(|row| row.compartment_total() == config.population)
    );
    println!("population conserved on all {} rows", output.rows.len());
}
