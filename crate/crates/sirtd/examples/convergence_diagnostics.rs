//! Exercise the convergence diagnostics on chains with known behavior:
//! well-mixed iid draws, sticky AR(1) chains, and chains stuck in different
//! regions.
//!
//! ```bash
//! cargo run --example convergence_diagnostics
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use sirtd::diagnostics::{ess_bulk, ess_tail, split_rhat};

fn describe(label: &str, chains: &[Vec<f64>]) {
    let rhat = split_rhat(chains)
        .map(|x| format!("{x:.4}"))
        .unwrap_or_else(|e| format!("({e})"));
    let bulk = ess_bulk(chains)
        .map(|x| format!("{x:.1}"))
        .unwrap_or_else(|e| format!("({e})"));
    let tail = ess_tail(chains)
        .map(|x| format!("{x:.1}"))
        .unwrap_or_else(|e| format!("({e})"));
    println!("{label:<28} rhat {rhat:>8}  ess_bulk {bulk:>8}  ess_tail {tail:>8}");
}

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let n = 1000;

    let iid: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    describe("4 iid normal chains", &iid);

    // AR(1) with coefficient 0.9: effective sample size collapses by
    // (1 - 0.9) / (1 + 0.9) ~ 1/19 even though rhat stays near 1.
    let coefficient: f64 = 0.9;
    let innovation = (1.0 - coefficient * coefficient).sqrt();
    let sticky: Vec<Vec<f64>> = (0..4)
        .map(|_| {
            let mut x = 0.0;
            (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    x = coefficient * x + innovation * z;
                    x
                })
                .collect()
        })
        .collect();
    describe("4 AR(1) chains, coeff 0.9", &sticky);

    let split: Vec<Vec<f64>> = (0..2)
        .map(|c| {
            (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z + 10.0 * c as f64
                })
                .collect()
        })
        .collect();
    describe("2 chains at means 0 and 10", &split);

    let constant = vec![vec![1.0; n], vec![1.0; n]];
    describe("constant chains", &constant);
}
