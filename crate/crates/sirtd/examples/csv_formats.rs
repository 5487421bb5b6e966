//! Tour of the file formats: write a simulation table, derive date-keyed
//! observation CSVs from it, join them back, and parse a dotted-key config.
//!
//! ```bash
//! cargo run --example csv_formats
//! ```

use chrono::NaiveDate;
use sirtd::abm::{InfectionMode, SimConfig, simulate};
use sirtd::io::{
    ConfigFile, read_observed_csv, read_sim_csv, write_observation_csvs_from_sim, write_sim_csv,
};
use std::path::Path;

fn main() {
    let dir = std::env::temp_dir().join("sirtd_csv_formats");
    std::fs::create_dir_all(&dir).unwrap();

    let sim = simulate(&SimConfig {
        population: 5_000,
        days: 30,
        contacts: 10,
        beta: 0.35,
        omega: 0.12,
        lambda: 0.25,
        d_i: 6.0,
        d_t: 8.0,
        initial_infected: 10,
        seed: 99,
        infection_mode: InfectionMode::DailyRate,
    })
    .unwrap();

    // simulation table: day,S,I,R,T,D,tweets (lossless round trip)
    let sim_path = dir.join("simulated.csv");
    write_sim_csv(&sim, &sim_path).unwrap();
    let round_tripped = read_sim_csv(&sim_path).unwrap();
    assert_eq!(round_tripped, sim);
    println!("wrote and re-read {} ({} rows)", sim_path.display(), sim.rows.len());

    // observation series keyed by calendar date, ready for `sirtd fit`
    let deaths_path = dir.join("deaths.csv");
    let tweets_path = dir.join("tweets.csv");
    let start = NaiveDate::from_ymd_opt(2020, 6, 10).unwrap();
    write_observation_csvs_from_sim(&sim, start, &deaths_path, &tweets_path).unwrap();

    let joined = read_observed_csv(&deaths_path, &tweets_path).unwrap();
    println!(
        "joined {} days starting {}; final cumulative deaths {}",
        joined.len(),
        joined.start_date,
        joined.cumulative_deaths.last().unwrap()
    );

    // flat dotted-key config
    let config_text = "\
# run setup
seed = 7
sim.N = 5000
sim.beta = 0.35
data.deaths = deaths.csv
";
    let config = ConfigFile::parse(config_text, Path::new("inline.toml")).unwrap();
    println!(
        "config: seed {} / sim.N {} / data.deaths {:?}",
        config.require::<u64>("seed").unwrap(),
        config.require::<u64>("sim.N").unwrap(),
        config.get_str("data.deaths").unwrap()
    );

    std::fs::remove_dir_all(&dir).ok();
}
