//! Convergence diagnostics and posterior summaries: split R-hat on
//! normalized ranks, bulk/tail effective sample sizes, and the summary table
//! (mean, median, sd, mad, q5, q95, rhat, ess_bulk, ess_tail per parameter).

use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("chains are degenerate (zero total variance)")]
    DegenerateChains,
    #[error("need at least one chain with at least 4 draws, got {chains} x {draws}")]
    TooFewDraws { chains: usize, draws: usize },
}

fn check_shape(chains: &[Vec<f64>]) -> Result<(usize, usize), DiagnosticsError> {
    let n_chains = chains.len();
    let n_draws = chains.iter().map(Vec::len).min().unwrap_or(0);
    if n_chains == 0 || n_draws < 4 {
        return Err(DiagnosticsError::TooFewDraws {
            chains: n_chains,
            draws: n_draws,
        });
    }
    Ok((n_chains, n_draws))
}

fn is_constant(chains: &[Vec<f64>]) -> bool {
    let first = chains[0][0];
    chains
        .iter()
        .all(|c| c.iter().all(|&x| (x - first).abs() == 0.0))
}

/// Replace every draw by its normalized pooled rank in (0, 1), averaging
/// ranks over ties. Any common monotone transformation of the draws leaves
/// the result unchanged.
fn fractional_ranks(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let total: usize = chains.iter().map(Vec::len).sum();
    let mut indexed: Vec<(f64, usize)> = Vec::with_capacity(total);
    let mut offsets = Vec::with_capacity(chains.len());
    let mut offset = 0;
    for chain in chains {
        offsets.push(offset);
        for (i, &x) in chain.iter().enumerate() {
            indexed.push((x, offset + i));
        }
        offset += chain.len();
    }
    indexed.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("draws must not be NaN"));

    let mut ranks = vec![0.0; total];
    let mut i = 0;
    while i < total {
        let mut j = i;
        while j + 1 < total && indexed[j + 1].0 == indexed[i].0 {
            j += 1;
        }
        // average rank for the tie group, 1-based
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for item in &indexed[i..=j] {
            ranks[item.1] = rank;
        }
        i = j + 1;
    }

    chains
        .iter()
        .enumerate()
        .map(|(c, chain)| {
            (0..chain.len())
                .map(|i| (ranks[offsets[c] + i] - 0.375) / (total as f64 + 0.25))
                .collect()
        })
        .collect()
}

/// Fractional ranks pushed through the standard normal quantile function
/// (the rank-normalization used for bulk ESS).
fn rank_normalize(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let standard = Normal::standard();
    fractional_ranks(chains)
        .into_iter()
        .map(|chain| chain.into_iter().map(|u| standard.inverse_cdf(u)).collect())
        .collect()
}

/// Split each chain in half, dropping the middle draw of odd-length chains.
fn split_in_half(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut halves = Vec::with_capacity(chains.len() * 2);
    for chain in chains {
        let n = chain.len();
        let half = n / 2;
        halves.push(chain[..half].to_vec());
        halves.push(chain[n - half..].to_vec());
    }
    halves
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (values.len() as f64 - 1.0)
}

/// Potential scale reduction over half-chains: sqrt(var_plus / W) with
/// var_plus = (n-1)/n W + B/n.
fn psrf(half_chains: &[Vec<f64>]) -> f64 {
    let n = half_chains[0].len() as f64;
    let chain_means: Vec<f64> = half_chains.iter().map(|c| mean(c)).collect();
    let within = mean(
        &half_chains
            .iter()
            .map(|c| sample_variance(c))
            .collect::<Vec<_>>(),
    );
    let between_over_n = if half_chains.len() > 1 {
        sample_variance(&chain_means)
    } else {
        0.0
    };
    let var_plus = within * (n - 1.0) / n + between_over_n;
    (var_plus / within).sqrt()
}

/// Split R-hat on normalized pooled ranks.
///
/// Working on ranks makes the statistic exactly invariant under any common
/// monotone transformation of the draws. The usual extra step of pushing
/// ranks through the normal quantile function is deliberately omitted here:
/// it compresses the tails enough to cap the statistic near 1.8 for two
/// fully separated chains, masking exactly the failure the statistic exists
/// to flag. On well-mixed chains the two versions agree to well within the
/// 1.01 decision threshold.
pub fn split_rhat(chains: &[Vec<f64>]) -> Result<f64, DiagnosticsError> {
    check_shape(chains)?;
    if is_constant(chains) {
        return Err(DiagnosticsError::DegenerateChains);
    }
    let ranked = fractional_ranks(chains);
    Ok(psrf(&split_in_half(&ranked)))
}

/// Effective sample size from combined-chain autocorrelations with Geyer's
/// initial positive and monotone truncation.
fn ess_core(chains: &[Vec<f64>]) -> Result<f64, DiagnosticsError> {
    let (n_chains, n_draws) = check_shape(chains)?;
    let trimmed: Vec<&[f64]> = chains.iter().map(|c| &c[..n_draws]).collect();

    let chain_means: Vec<f64> = trimmed.iter().map(|c| mean(c)).collect();
    // biased (1/n) autocovariances, computed lag by lag on demand
    let autocov = |chain: &[f64], chain_mean: f64, lag: usize| -> f64 {
        let mut acc = 0.0;
        for i in 0..(n_draws - lag) {
            acc += (chain[i] - chain_mean) * (chain[i + lag] - chain_mean);
        }
        acc / n_draws as f64
    };
    let mean_autocov = |lag: usize| -> f64 {
        let mut acc = 0.0;
        for (c, chain) in trimmed.iter().enumerate() {
            acc += autocov(chain, chain_means[c], lag);
        }
        acc / n_chains as f64
    };

    let n = n_draws as f64;
    let chain_vars: Vec<f64> = trimmed
        .iter()
        .enumerate()
        .map(|(c, chain)| autocov(chain, chain_means[c], 0) * n / (n - 1.0))
        .collect();
    let mean_var = mean(&chain_vars);
    let mut var_plus = mean_var * (n - 1.0) / n;
    if n_chains > 1 {
        var_plus += sample_variance(&chain_means);
    }
    if var_plus <= 0.0 || !var_plus.is_finite() {
        return Err(DiagnosticsError::DegenerateChains);
    }

    // Geyer's initial positive sequence over paired autocorrelations,
    // then the monotone correction.
    let rho = |lag: usize| 1.0 - (mean_var - mean_autocov(lag)) / var_plus;
    let mut pair_sums: Vec<f64> = Vec::new();
    let mut rho_even = 1.0;
    let mut rho_odd = rho(1);
    pair_sums.push(rho_even + rho_odd);
    let mut lag = 1;
    while lag + 2 < n_draws - 2 {
        rho_even = rho(lag + 1);
        rho_odd = rho(lag + 2);
        if rho_even + rho_odd < 0.0 {
            break;
        }
        pair_sums.push(rho_even + rho_odd);
        lag += 2;
    }
    for k in 1..pair_sums.len() {
        if pair_sums[k] > pair_sums[k - 1] {
            pair_sums[k] = pair_sums[k - 1];
        }
    }

    let tau = -1.0 + 2.0 * pair_sums.iter().sum::<f64>();
    let total = (n_chains * n_draws) as f64;
    let ess = total / tau.max(1.0 / total);
    // antithetic chains can push tau below 1/total; cap as in common practice
    Ok(ess.min(total * total.log10()))
}

/// Bulk effective sample size on rank-normalized draws.
pub fn ess_bulk(chains: &[Vec<f64>]) -> Result<f64, DiagnosticsError> {
    check_shape(chains)?;
    if is_constant(chains) {
        return Err(DiagnosticsError::DegenerateChains);
    }
    ess_core(&split_in_half(&rank_normalize(chains)))
}

/// Tail effective sample size: the smaller of the ESS values of the 5% and
/// 95% quantile indicator sequences.
pub fn ess_tail(chains: &[Vec<f64>]) -> Result<f64, DiagnosticsError> {
    check_shape(chains)?;
    if is_constant(chains) {
        return Err(DiagnosticsError::DegenerateChains);
    }
    let mut pooled: Vec<f64> = chains.iter().flatten().copied().collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).expect("draws must not be NaN"));
    let mut tail_ess = f64::INFINITY;
    for p in [0.05, 0.95] {
        let threshold = quantile_sorted(&pooled, p);
        let indicators: Vec<Vec<f64>> = chains
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&x| if x <= threshold { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        if is_constant(&indicators) {
            return Err(DiagnosticsError::DegenerateChains);
        }
        tail_ess = tail_ess.min(ess_core(&split_in_half(&indicators))?);
    }
    Ok(tail_ess)
}

/// Quantile by linear interpolation of order statistics over a sorted slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let h = (sorted.len() as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Summary row for one parameter, shaped like the usual posterior tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub mad: f64,
    pub q5: f64,
    pub q95: f64,
    /// None when the chains are degenerate for this parameter.
    pub rhat: Option<f64>,
    pub ess_bulk: Option<f64>,
    pub ess_tail: Option<f64>,
}

/// Summarize one parameter from its per-chain draw sequences. Pooled moments
/// and quantiles; mad is the median absolute deviation scaled by 1.4826.
pub fn summarize_parameter(name: &str, chains: &[Vec<f64>]) -> ParameterSummary {
    let mut pooled: Vec<f64> = chains.iter().flatten().copied().collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).expect("draws must not be NaN"));
    let mean_value = mean(&pooled);
    let median = quantile_sorted(&pooled, 0.5);
    let sd = if pooled.len() > 1 {
        sample_variance(&pooled).sqrt()
    } else {
        0.0
    };
    let mut abs_dev: Vec<f64> = pooled.iter().map(|&x| (x - median).abs()).collect();
    abs_dev.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let mad = 1.4826 * quantile_sorted(&abs_dev, 0.5);

    ParameterSummary {
        name: name.to_string(),
        mean: mean_value,
        median,
        sd,
        mad,
        q5: quantile_sorted(&pooled, 0.05),
        q95: quantile_sorted(&pooled, 0.95),
        rhat: split_rhat(chains).ok(),
        ess_bulk: ess_bulk(chains).ok(),
        ess_tail: ess_tail(chains).ok(),
    }
}

/// Summary table over a full set of chain draws, one row per parameter in
/// the canonical order.
pub fn summarize(draws: &crate::mcmc::ChainDraws) -> Vec<ParameterSummary> {
    crate::params::PARAM_NAMES
        .iter()
        .enumerate()
        .map(|(index, name)| summarize_parameter(name, &draws.parameter_chains(index)))
        .collect()
}

/// Render summary rows as an aligned text table.
pub fn format_summary_table(rows: &[ParameterSummary]) -> String {
    let headers = [
        "variable", "mean", "median", "sd", "mad", "q5", "q95", "rhat", "ess_bulk", "ess_tail",
    ];
    let fmt_opt = |v: Option<f64>, digits: usize| match v {
        Some(x) => format!("{x:.digits$}"),
        None => "NA".to_string(),
    };
    let mut cells: Vec<Vec<String>> = vec![headers.iter().map(|s| s.to_string()).collect()];
    for row in rows {
        cells.push(vec![
            row.name.clone(),
            format!("{:.4}", row.mean),
            format!("{:.4}", row.median),
            format!("{:.4}", row.sd),
            format!("{:.4}", row.mad),
            format!("{:.4}", row.q5),
            format!("{:.4}", row.q95),
            fmt_opt(row.rhat, 4),
            fmt_opt(row.ess_bulk, 1),
            fmt_opt(row.ess_tail, 1),
        ]);
    }
    let widths: Vec<usize> = (0..headers.len())
        .map(|c| cells.iter().map(|r| r[c].len()).max().unwrap())
        .collect();
    let mut out = String::new();
    for row in &cells {
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                out.push_str("  ");
            }
            out.push_str(&format!("{cell:>width$}", width = widths[c]));
        }
        out.push('\n');
    }
    out
}
