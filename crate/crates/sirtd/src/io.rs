//! File formats and configuration: observation CSVs joined on date,
//! simulation tables, draw/summary/predictive CSVs, the flat dotted-key
//! config format, and atomic output writing.
//!
//! CSV headers are normative: `date,cumulative_deaths` and
//! `date,symptom_tweet_count` for observations, `date,confirmed_cases` for
//! the optional confirmed series, `day,S,I,R,T,D,tweets` for simulation
//! tables, `chain,iteration,beta,omega,lambda,d_i,d_t,phi_deaths,phi_tweets`
//! for draws.

use crate::abm::{SimOutput, SimRow};
use crate::data::{CompartmentState, DataError, ObservedData};
use crate::diagnostics::ParameterSummary;
use crate::model::PredictiveRow;
use crate::params::{EpidemicParams, N_PARAMS, PARAM_NAMES};
use chrono::NaiveDate;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("cumulative deaths decrease on {date}")]
    NonMonotoneDeaths { date: NaiveDate },
    #[error("{path}: missing {series} entry for {date} inside the joint window")]
    DateGap {
        path: PathBuf,
        series: &'static str,
        date: NaiveDate,
    },
    #[error("death and tweet files share no dates")]
    EmptyJoin,
    #[error("{path}: row {line} violates an invariant: {message}")]
    InvariantViolation {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("config key {key}: {message}")]
    Config { key: String, message: String },
    #[error("{0}")]
    Data(#[from] DataError),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn read_to_string(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// Write `contents` to `path` through a temporary file in the same directory
/// plus an atomic rename, so outputs are either complete or absent.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), IoError> {
    let wrap = |source: std::io::Error| IoError::Write {
        path: path.to_path_buf(),
        source,
    };
    let directory = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(directory).map_err(wrap)?;
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".to_string());
    let tmp = directory.join(format!(".tmp-{file_name}"));
    {
        let mut file = fs::File::create(&tmp).map_err(wrap)?;
        file.write_all(contents.as_bytes()).map_err(wrap)?;
        file.sync_all().map_err(wrap)?;
    }
    fs::rename(&tmp, path).map_err(wrap)
}

fn parse_date(raw: &str, path: &Path, line: usize) -> Result<NaiveDate, IoError> {
    NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d").map_err(|_| IoError::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("bad ISO-8601 date {raw:?}"),
    })
}

/// Read a two-column dated count series, validating the header.
fn read_dated_counts(path: &Path, value_column: &str) -> Result<BTreeMap<NaiveDate, u64>, IoError> {
    let text = read_to_string(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let parse_err = |line: usize, message: String| IoError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let expected = ["date", value_column];
    if headers.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(parse_err(
            1,
            format!(
                "expected header {:?}, found {:?}",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut series = BTreeMap::new();
    for (index, record) in reader.records().enumerate() {
        let line = index + 2;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        if record.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 fields, got {}", record.len()),
            ));
        }
        let date = parse_date(&record[0], path, line)?;
        let value: u64 = record[1]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad non-negative integer {:?}", &record[1])))?;
        if series.insert(date, value).is_some() {
            return Err(parse_err(line, format!("duplicate date {date}")));
        }
    }
    Ok(series)
}

fn check_contiguous(
    series: &BTreeMap<NaiveDate, u64>,
    start: NaiveDate,
    end: NaiveDate,
    path: &Path,
    label: &'static str,
) -> Result<(), IoError> {
    let mut date = start;
    while date <= end {
        if !series.contains_key(&date) {
            return Err(IoError::DateGap {
                path: path.to_path_buf(),
                series: label,
                date,
            });
        }
        date = date.succ_opt().expect("date overflow");
    }
    Ok(())
}

/// Joined observation series: day indices from the earliest joint date plus
/// the date mapping, before population and initial state are attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinedObservations {
    pub start_date: NaiveDate,
    pub cumulative_deaths: Vec<u64>,
    pub tweet_counts: Vec<u64>,
}

impl JoinedObservations {
    pub fn len(&self) -> usize {
        self.cumulative_deaths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative_deaths.is_empty()
    }

    /// Attach population and initial state, producing validated
    /// [`ObservedData`] with day indices 0..len.
    pub fn into_observed(
        self,
        population: f64,
        initial_state: CompartmentState,
    ) -> Result<ObservedData, IoError> {
        let days: Vec<u32> = (0..self.len() as u32).collect();
        Ok(ObservedData::new(
            days,
            self.cumulative_deaths,
            self.tweet_counts,
            population,
            initial_state,
        )?)
    }
}

/// Read and inner-join the deaths and tweets CSVs on date.
///
/// Day index 0 is the earliest date present in both files; a date missing
/// from either file inside the joint window is a [`IoError::DateGap`].
/// Deaths must be non-decreasing over the joint window.
pub fn read_observed_csv(
    deaths_path: &Path,
    tweets_path: &Path,
) -> Result<JoinedObservations, IoError> {
    let deaths = read_dated_counts(deaths_path, "cumulative_deaths")?;
    let tweets = read_dated_counts(tweets_path, "symptom_tweet_count")?;

    let (Some(deaths_first), Some(tweets_first)) = (deaths.keys().next(), tweets.keys().next())
    else {
        return Err(IoError::EmptyJoin);
    };
    let deaths_last = *deaths.keys().next_back().unwrap();
    let tweets_last = *tweets.keys().next_back().unwrap();
    let start = (*deaths_first).max(*tweets_first);
    let end = deaths_last.min(tweets_last);
    if start > end {
        return Err(IoError::EmptyJoin);
    }
    check_contiguous(&deaths, start, end, deaths_path, "cumulative_deaths")?;
    check_contiguous(&tweets, start, end, tweets_path, "symptom_tweet_count")?;

    let mut cumulative_deaths = Vec::new();
    let mut tweet_counts = Vec::new();
    let mut date = start;
    let mut previous: Option<u64> = None;
    while date <= end {
        let d = deaths[&date];
        if let Some(p) = previous
            && d < p
        {
            return Err(IoError::NonMonotoneDeaths { date });
        }
        previous = Some(d);
        cumulative_deaths.push(d);
        tweet_counts.push(tweets[&date]);
        date = date.succ_opt().expect("date overflow");
    }
    Ok(JoinedObservations {
        start_date: start,
        cumulative_deaths,
        tweet_counts,
    })
}

/// Initial compartment counts per the fit protocol: I0 from the confirmed
/// count on the start date, R0 as the cumulative confirmed total before it,
/// D0 from the deaths series, T0 = 0, S0 as the remainder.
pub fn initial_state_from_confirmed(
    confirmed_path: &Path,
    start_date: NaiveDate,
    deaths_on_start: u64,
    population: f64,
) -> Result<CompartmentState, IoError> {
    let confirmed = read_dated_counts(confirmed_path, "confirmed_cases")?;
    let Some(&i0) = confirmed.get(&start_date) else {
        return Err(IoError::DateGap {
            path: confirmed_path.to_path_buf(),
            series: "confirmed_cases",
            date: start_date,
        });
    };
    let r0: u64 = confirmed
        .iter()
        .filter(|(date, _)| **date < start_date)
        .map(|(_, count)| count)
        .sum();
    let susceptible = population - i0 as f64 - r0 as f64 - deaths_on_start as f64;
    Ok(CompartmentState::new(
        susceptible,
        i0 as f64,
        r0 as f64,
        0.0,
        deaths_on_start as f64,
    )?)
}

/// Turn a simulation table into fit-ready observation CSVs, mapping day
/// indices to calendar dates from `start_date`. Deaths come from the D
/// column (already cumulative), tweets from the tweet column.
pub fn write_observation_csvs_from_sim(
    output: &SimOutput,
    start_date: NaiveDate,
    deaths_path: &Path,
    tweets_path: &Path,
) -> Result<(), IoError> {
    let mut deaths = String::from("date,cumulative_deaths\n");
    let mut tweets = String::from("date,symptom_tweet_count\n");
    let mut date = start_date;
    for row in &output.rows {
        deaths.push_str(&format!("{date},{}\n", row.deceased));
        tweets.push_str(&format!("{date},{}\n", row.tweets));
        date = date.succ_opt().expect("date overflow");
    }
    write_atomic(deaths_path, &deaths)?;
    write_atomic(tweets_path, &tweets)
}

/// Write a simulation table with header `day,S,I,R,T,D,tweets`.
pub fn write_sim_csv(output: &SimOutput, path: &Path) -> Result<(), IoError> {
    let mut text = String::from("day,S,I,R,T,D,tweets\n");
    for row in &output.rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.day,
            row.susceptible,
            row.infectious,
            row.recovered,
            row.terminal,
            row.deceased,
            row.tweets
        ));
    }
    write_atomic(path, &text)
}

/// Read a simulation table back, re-validating conservation and the other
/// row invariants.
pub fn read_sim_csv(path: &Path) -> Result<SimOutput, IoError> {
    let text = read_to_string(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let parse_err = |line: usize, message: String| IoError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let expected = ["day", "S", "I", "R", "T", "D", "tweets"];
    if headers.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(parse_err(
            1,
            format!("expected header day,S,I,R,T,D,tweets, found {headers:?}"),
        ));
    }

    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let line = index + 2;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        if record.len() != 7 {
            return Err(parse_err(
                line,
                format!("expected 7 fields, got {}", record.len()),
            ));
        }
        let field = |i: usize| -> Result<u64, IoError> {
            record[i]
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("bad integer {:?}", &record[i])))
        };
        rows.push(SimRow {
            day: field(0)? as u32,
            susceptible: field(1)?,
            infectious: field(2)?,
            recovered: field(3)?,
            terminal: field(4)?,
            deceased: field(5)?,
            tweets: field(6)?,
        });
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }
    let output = SimOutput {
        population: rows[0].compartment_total(),
        rows,
    };
    output.validate().map_err(|e| IoError::InvariantViolation {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    Ok(output)
}

/// Draws table: one row per retained draw with chain and iteration columns.
pub fn draws_to_csv(chains: &[Vec<EpidemicParams>]) -> String {
    let mut text = format!("chain,iteration,{}\n", PARAM_NAMES.join(","));
    for (chain_index, draws) in chains.iter().enumerate() {
        for (iteration, draw) in draws.iter().enumerate() {
            text.push_str(&format!("{chain_index},{iteration}"));
            for value in draw.as_array() {
                text.push_str(&format!(",{value}"));
            }
            text.push('\n');
        }
    }
    text
}

/// Parse a draws CSV back into per-chain draw vectors.
pub fn read_draws_csv(path: &Path) -> Result<Vec<Vec<EpidemicParams>>, IoError> {
    let text = read_to_string(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let parse_err = |line: usize, message: String| IoError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let mut expected = vec!["chain", "iteration"];
    expected.extend(PARAM_NAMES);
    if headers.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(parse_err(1, format!("unexpected draws header {headers:?}")));
    }

    let mut chains: Vec<Vec<EpidemicParams>> = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let line = index + 2;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        let chain: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad chain index {:?}", &record[0])))?;
        let mut values = [0.0; N_PARAMS];
        for (i, value) in values.iter_mut().enumerate() {
            *value = record[i + 2]
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("bad value {:?}", &record[i + 2])))?;
        }
        let params =
            EpidemicParams::from_array(values).map_err(|e| parse_err(line, e.to_string()))?;
        if chains.len() <= chain {
            chains.resize(chain + 1, Vec::new());
        }
        chains[chain].push(params);
    }
    if chains.is_empty() || chains.iter().any(Vec::is_empty) {
        return Err(parse_err(
            1,
            "draws file has no rows or an empty chain".into(),
        ));
    }
    Ok(chains)
}

/// Summary table CSV shaped like the usual posterior summaries.
pub fn summary_to_csv(rows: &[ParameterSummary]) -> String {
    let mut text = String::from("parameter,mean,median,sd,mad,q5,q95,rhat,ess_bulk,ess_tail\n");
    let opt = |v: Option<f64>| v.map_or("NA".to_string(), |x| x.to_string());
    for row in rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.name,
            row.mean,
            row.median,
            row.sd,
            row.mad,
            row.q5,
            row.q95,
            opt(row.rhat),
            opt(row.ess_bulk),
            opt(row.ess_tail)
        ));
    }
    text
}

/// Predictive band CSV with columns `day,channel,mean,q5,q95`.
pub fn predictive_to_csv(rows: &[PredictiveRow]) -> String {
    let mut text = String::from("day,channel,mean,q5,q95\n");
    for row in rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            row.day, row.channel, row.mean, row.q5, row.q95
        ));
    }
    text
}

/// Observed-vs-predicted overlay CSV per observation channel.
pub fn overlay_to_csv(
    days: &[u32],
    observed_deaths: &[u64],
    observed_tweets: &[u64],
    predicted_deaths: &[f64],
    predicted_tweets: &[f64],
) -> String {
    let mut text = String::from("day,channel,observed,predicted_mean\n");
    for (i, &day) in days.iter().enumerate() {
        text.push_str(&format!(
            "{day},deaths,{},{}\n",
            observed_deaths[i], predicted_deaths[i]
        ));
    }
    for (i, &day) in days.iter().enumerate() {
        text.push_str(&format!(
            "{day},tweets,{},{}\n",
            observed_tweets[i], predicted_tweets[i]
        ));
    }
    text
}

/// Flat dotted-key configuration file: one `section.key = value` per line,
/// `#` comments, blank lines ignored.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, (String, usize)>,
    consumed: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self, IoError> {
        let mut entries = BTreeMap::new();
        for (index, raw_line) in text.lines().enumerate() {
            let line_number = index + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(IoError::Parse {
                    path: path.to_path_buf(),
                    line: line_number,
                    message: format!("expected `key = value`, found {line:?}"),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().trim_matches('"').to_string();
            if key.is_empty() {
                return Err(IoError::Parse {
                    path: path.to_path_buf(),
                    line: line_number,
                    message: "empty key".into(),
                });
            }
            if entries.insert(key.clone(), (value, line_number)).is_some() {
                return Err(IoError::Parse {
                    path: path.to_path_buf(),
                    line: line_number,
                    message: format!("duplicate key {key}"),
                });
            }
        }
        Ok(Self {
            entries,
            consumed: Default::default(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        Self::parse(&read_to_string(path)?, path)
    }

    fn lookup(&self, key: &str) -> Option<&str> {
        self.consumed.borrow_mut().insert(key.to_string());
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get_str(&self, key: &str) -> Option<String> {
        self.lookup(key).map(str::to_string)
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, IoError> {
        match self.lookup(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| IoError::Config {
                key: key.to_string(),
                message: format!("cannot parse {raw:?}"),
            }),
        }
    }

    pub fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T, IoError> {
        self.get_parsed(key)?.ok_or_else(|| IoError::Config {
            key: key.to_string(),
            message: "required key is missing".into(),
        })
    }

    /// All keys present in the file.
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Keys present in the file but never read by the consumer; used to
    /// reject typos before any computation starts.
    pub fn unknown_keys(&self) -> Vec<String> {
        let consumed = self.consumed.borrow();
        self.entries
            .keys()
            .filter(|k| !consumed.contains(*k))
            .cloned()
            .collect()
    }

    /// Echo of every entry, sorted by key, for the run manifest.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for (key, (value, _)) in &self.entries {
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abm::{InfectionMode, SimConfig, simulate};
    use tempfile::TempDir;

    fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
        let path = dir.path().join(name);
        fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn joins_aligned_series() {
        let dir = TempDir::new().unwrap();
        let deaths = write(
            &dir,
            "deaths.csv",
            "date,cumulative_deaths\n2020-06-10,5\n2020-06-11,6\n2020-06-12,6\n2020-06-13,8\n2020-06-14,9\n",
        );
        let tweets = write(
            &dir,
            "tweets.csv",
            "date,symptom_tweet_count\n2020-06-10,12\n2020-06-11,14\n2020-06-12,11\n2020-06-13,13\n2020-06-14,16\n",
        );
        let joined = read_observed_csv(&deaths, &tweets).unwrap();
        assert_eq!(joined.len(), 5);
        assert_eq!(joined.cumulative_deaths, vec![5, 6, 6, 8, 9]);
        assert_eq!(joined.tweet_counts, vec![12, 14, 11, 13, 16]);
        assert_eq!(
            joined.start_date,
            NaiveDate::from_ymd_opt(2020, 6, 10).unwrap()
        );
        let observed = joined
            .into_observed(
                100.0,
                CompartmentState::new(95.0, 5.0, 0.0, 0.0, 0.0).unwrap(),
            )
            .unwrap();
        assert_eq!(observed.days, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn join_window_is_the_overlap() {
        let dir = TempDir::new().unwrap();
        let deaths = write(
            &dir,
            "deaths.csv",
            "date,cumulative_deaths\n2020-06-09,1\n2020-06-10,5\n2020-06-11,6\n",
        );
        let tweets = write(
            &dir,
            "tweets.csv",
            "date,symptom_tweet_count\n2020-06-10,12\n2020-06-11,14\n2020-06-12,11\n",
        );
        let joined = read_observed_csv(&deaths, &tweets).unwrap();
        assert_eq!(joined.len(), 2);
        assert_eq!(joined.cumulative_deaths, vec![5, 6]);
    }

    #[test]
    fn decreasing_deaths_name_the_date() {
        let dir = TempDir::new().unwrap();
        let deaths = write(
            &dir,
            "deaths.csv",
            "date,cumulative_deaths\n2020-06-10,5\n2020-06-11,4\n",
        );
        let tweets = write(
            &dir,
            "tweets.csv",
            "date,symptom_tweet_count\n2020-06-10,1\n2020-06-11,1\n",
        );
        match read_observed_csv(&deaths, &tweets).unwrap_err() {
            IoError::NonMonotoneDeaths { date } => {
                assert_eq!(date, NaiveDate::from_ymd_opt(2020, 6, 11).unwrap());
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn missing_date_is_a_gap() {
        let dir = TempDir::new().unwrap();
        let deaths = write(
            &dir,
            "deaths.csv",
            "date,cumulative_deaths\n2020-06-10,5\n2020-06-11,6\n2020-06-12,7\n",
        );
        let tweets = write(
            &dir,
            "tweets.csv",
            "date,symptom_tweet_count\n2020-06-10,1\n2020-06-12,1\n",
        );
        assert!(matches!(
            read_observed_csv(&deaths, &tweets).unwrap_err(),
            IoError::DateGap { .. }
        ));
    }

    #[test]
    fn disjoint_ranges_are_an_empty_join() {
        let dir = TempDir::new().unwrap();
        let deaths = write(&dir, "deaths.csv", "date,cumulative_deaths\n2020-06-10,5\n");
        let tweets = write(
            &dir,
            "tweets.csv",
            "date,symptom_tweet_count\n2020-07-10,1\n",
        );
        assert!(matches!(
            read_observed_csv(&deaths, &tweets).unwrap_err(),
            IoError::EmptyJoin
        ));
    }

    #[test]
    fn malformed_rows_carry_line_numbers() {
        let dir = TempDir::new().unwrap();
        let deaths = write(
            &dir,
            "deaths.csv",
            "date,cumulative_deaths\n2020-06-10,5\nnot-a-date,6\n",
        );
        let tweets = write(
            &dir,
            "tweets.csv",
            "date,symptom_tweet_count\n2020-06-10,1\n",
        );
        match read_observed_csv(&deaths, &tweets).unwrap_err() {
            IoError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn sim_csv_round_trip_is_lossless() {
        let cfg = SimConfig {
            population: 2_000,
            days: 30,
            contacts: 10,
            beta: 0.3,
            omega: 0.1,
            lambda: 0.2,
            d_i: 7.0,
            d_t: 10.0,
            initial_infected: 5,
            seed: 3,
            infection_mode: InfectionMode::DailyRate,
        };
        let output = simulate(&cfg).unwrap();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("sim.csv");
        write_sim_csv(&output, &path).unwrap();
        assert_eq!(read_sim_csv(&path).unwrap(), output);
    }

    #[test]
    fn sim_csv_rejects_conservation_violations() {
        let dir = TempDir::new().unwrap();
        let path = write(
            &dir,
            "sim.csv",
            "day,S,I,R,T,D,tweets\n0,90,10,0,0,0,0\n1,90,11,0,0,0,2\n",
        );
        assert!(matches!(
            read_sim_csv(&path).unwrap_err(),
            IoError::InvariantViolation { .. }
        ));
    }

    #[test]
    fn draws_csv_round_trip() {
        let a = EpidemicParams::new(0.3, 0.1, 0.2, 7.0, 10.0, 1.0, 1.5).unwrap();
        let b = EpidemicParams::new(0.25, 0.12, 0.18, 6.5, 11.0, 0.8, 1.2).unwrap();
        let chains = vec![vec![a, b], vec![b, a]];
        let text = draws_to_csv(&chains);
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("draws.csv");
        write_atomic(&path, &text).unwrap();
        assert_eq!(read_draws_csv(&path).unwrap(), chains);
    }

    #[test]
    fn confirmed_series_builds_initial_state() {
        let dir = TempDir::new().unwrap();
        let confirmed = write(
            &dir,
            "confirmed.csv",
            "date,confirmed_cases\n2020-06-08,100\n2020-06-09,150\n2020-06-10,200\n",
        );
        let start = NaiveDate::from_ymd_opt(2020, 6, 10).unwrap();
        let state = initial_state_from_confirmed(&confirmed, start, 40, 100_000.0).unwrap();
        assert_eq!(state.infectious, 200.0);
        assert_eq!(state.recovered, 250.0);
        assert_eq!(state.deceased, 40.0);
        assert_eq!(state.terminal, 0.0);
        assert_eq!(state.susceptible, 100_000.0 - 200.0 - 250.0 - 40.0);
    }

    #[test]
    fn config_parses_dotted_keys() {
        let text = "# simulation\nsim.N = 10000\nsim.beta = 0.3\nseed = 42\npaths.out = \"runs\"\n";
        let cfg = ConfigFile::parse(text, Path::new("test.toml")).unwrap();
        assert_eq!(cfg.require::<u64>("sim.N").unwrap(), 10_000);
        assert_eq!(cfg.require::<f64>("sim.beta").unwrap(), 0.3);
        assert_eq!(cfg.get_str("paths.out").unwrap(), "runs");
        assert_eq!(cfg.require::<u64>("seed").unwrap(), 42);
        assert!(cfg.get_parsed::<f64>("sim.missing").unwrap().is_none());
        assert!(cfg.unknown_keys().is_empty());
    }

    #[test]
    fn config_rejects_bad_lines_and_tracks_unknown_keys() {
        assert!(ConfigFile::parse("just words\n", Path::new("c")).is_err());
        assert!(ConfigFile::parse("a = 1\na = 2\n", Path::new("c")).is_err());
        let cfg = ConfigFile::parse("sim.N = 1\nsim.typo = 2\n", Path::new("c")).unwrap();
        let _ = cfg.require::<u64>("sim.N").unwrap();
        assert_eq!(cfg.unknown_keys(), vec!["sim.typo".to_string()]);
    }

    #[test]
    fn draws_csv_rejects_out_of_range_values() {
        let dir = TempDir::new().unwrap();
        let path = write(
            &dir,
            "draws.csv",
            "chain,iteration,beta,omega,lambda,d_i,d_t,phi_deaths,phi_tweets\n\
             0,0,0.3,2.5,0.2,7,10,1,1\n",
        );
        assert!(matches!(
            read_draws_csv(&path).unwrap_err(),
            IoError::Parse { line: 2, .. }
        ));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]

        // round-trip identity over arbitrary valid simulations
        #[test]
        fn sim_csv_round_trip_property(
            seed in 0u64..1_000,
            beta in 0.0..1.0f64,
            omega in 0.0..1.0f64,
            days in 2u32..40,
        ) {
            let cfg = SimConfig {
                population: 500,
                days,
                contacts: 5,
                beta,
                omega,
                lambda: 0.3,
                d_i: 4.0,
                d_t: 6.0,
                initial_infected: 3,
                seed,
                infection_mode: InfectionMode::DailyRate,
            };
            let output = simulate(&cfg).unwrap();
            let dir = TempDir::new().unwrap();
            let path = dir.path().join("sim.csv");
            write_sim_csv(&output, &path).unwrap();
            proptest::prop_assert_eq!(read_sim_csv(&path).unwrap(), output);
        }
    }

    #[test]
    fn atomic_write_leaves_no_temp_file() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "hello\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "hello\n");
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .filter(|name| name.starts_with(".tmp-"))
            .collect();
        assert!(leftovers.is_empty(), "{leftovers:?}");
    }
}
