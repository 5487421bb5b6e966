//! Epidemic model parameters, prior configuration, and the bijection between
//! constrained parameters and the unconstrained space the sampler works in.

use thiserror::Error;

/// Number of model parameters.
pub const N_PARAMS: usize = 7;

/// Column/row labels for draws and summary tables, in the canonical order.
pub const PARAM_NAMES: [&str; N_PARAMS] = [
    "beta",
    "omega",
    "lambda",
    "d_i",
    "d_t",
    "phi_deaths",
    "phi_tweets",
];

/// Point in unconstrained space, ordered as [`PARAM_NAMES`].
pub type UnconstrainedPoint = [f64; N_PARAMS];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("parameter {name} = {value} is outside its valid range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("hyperparameter {name} = {value} must be strictly positive")]
    BadHyperparameter { name: &'static str, value: f64 },
}

/// Latent parameters of the SIRTD model plus the two observation channels.
///
/// The canonical ordering used everywhere draws are stored or serialized is
/// (beta, omega, lambda, d_i, d_t, phi_deaths, phi_tweets). Reordering would
/// silently corrupt persisted chains, so any new code must go through
/// [`EpidemicParams::as_array`] / [`EpidemicParams::from_array`] rather than
/// hand-rolling the layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpidemicParams {
    /// Daily contact-transmission rate (> 0).
    pub beta: f64,
    /// Probability that an infection ends terminally, in [0, 1].
    pub omega: f64,
    /// Daily probability that an infectious individual tweets symptoms, in [0, 1].
    pub lambda_tweets: f64,
    /// Mean dwell time in the infectious compartment, days (> 0).
    pub d_i: f64,
    /// Mean dwell time in the terminally-ill compartment, days (> 0).
    pub d_t: f64,
    /// Death-channel precision parameter (> 0). The likelihood passes `1 /
    /// phi_deaths` to the negative binomial as its dispersion, so larger
    /// values mean *more* over-dispersion.
    pub phi_deaths: f64,
    /// Tweet-channel precision parameter (> 0), same convention as `phi_deaths`.
    pub phi_tweets: f64,
}

impl EpidemicParams {
    pub fn new(
        beta: f64,
        omega: f64,
        lambda_tweets: f64,
        d_i: f64,
        d_t: f64,
        phi_deaths: f64,
        phi_tweets: f64,
    ) -> Result<Self, ParamsError> {
        let params = Self {
            beta,
            omega,
            lambda_tweets,
            d_i,
            d_t,
            phi_deaths,
            phi_tweets,
        };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<(), ParamsError> {
        let positive: [(&'static str, f64); 5] = [
            ("beta", self.beta),
            ("d_i", self.d_i),
            ("d_t", self.d_t),
            ("phi_deaths", self.phi_deaths),
            ("phi_tweets", self.phi_tweets),
        ];
        for (name, value) in positive {
            if value <= 0.0 || value.is_nan() {
                return Err(ParamsError::OutOfRange { name, value });
            }
        }
        let unit: [(&'static str, f64); 2] =
            [("omega", self.omega), ("lambda", self.lambda_tweets)];
        for (name, value) in unit {
            if !(0.0..=1.0).contains(&value) {
                return Err(ParamsError::OutOfRange { name, value });
            }
        }
        Ok(())
    }

    /// Values in the canonical order.
    pub fn as_array(&self) -> [f64; N_PARAMS] {
        [
            self.beta,
            self.omega,
            self.lambda_tweets,
            self.d_i,
            self.d_t,
            self.phi_deaths,
            self.phi_tweets,
        ]
    }

    /// Rebuild from values in the canonical order.
    pub fn from_array(values: [f64; N_PARAMS]) -> Result<Self, ParamsError> {
        Self::new(
            values[0], values[1], values[2], values[3], values[4], values[5], values[6],
        )
    }
}

/// Map valid parameters onto R^7: log for the positive components, logit for
/// the unit-interval ones. Inverse of [`from_unconstrained`].
///
/// omega or lambda exactly at 0 or 1 map to -inf / +inf, which
/// [`from_unconstrained`] maps back exactly.
pub fn to_unconstrained(params: &EpidemicParams) -> UnconstrainedPoint {
    [
        params.beta.ln(),
        logit(params.omega),
        logit(params.lambda_tweets),
        params.d_i.ln(),
        params.d_t.ln(),
        params.phi_deaths.ln(),
        params.phi_tweets.ln(),
    ]
}

/// Map an unconstrained point back to parameters, returning the log absolute
/// determinant of the Jacobian of the inverse map.
///
/// The Jacobian is `sum(v_i)` over the log-transformed components plus
/// `sum(log(sigmoid(v_j) * (1 - sigmoid(v_j))))` over the logit-transformed
/// ones; the latter is evaluated in log space so it stays finite far into the
/// tails. Exp arguments are saturated at the f64 limit, so any finite input
/// yields finite parameters instead of an overflow panic.
pub fn from_unconstrained(v: &UnconstrainedPoint) -> (EpidemicParams, f64) {
    let params = EpidemicParams {
        beta: exp_saturating(v[0]),
        omega: sigmoid(v[1]),
        lambda_tweets: sigmoid(v[2]),
        d_i: exp_saturating(v[3]),
        d_t: exp_saturating(v[4]),
        phi_deaths: exp_saturating(v[5]),
        phi_tweets: exp_saturating(v[6]),
    };
    let log_jacobian = v[0]
        + v[3]
        + v[4]
        + v[5]
        + v[6]
        + log_logistic_derivative(v[1])
        + log_logistic_derivative(v[2]);
    (params, log_jacobian)
}

fn logit(p: f64) -> f64 {
    p.ln() - (1.0 - p).ln()
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// log(sigmoid(v) * (1 - sigmoid(v))) = -softplus(v) - softplus(-v).
fn log_logistic_derivative(v: f64) -> f64 {
    -softplus(v) - softplus(-v)
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// exp clamped below the f64 overflow threshold.
fn exp_saturating(v: f64) -> f64 {
    const MAX_EXP_ARG: f64 = 709.0;
    v.min(MAX_EXP_ARG).exp()
}

/// Prior family for the terminal-illness probability omega.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaPrior {
    /// Normal(mu, sigma) truncated and renormalized to [0, 1]. The default.
    TruncatedNormal { mu: f64, sigma: f64 },
    /// Beta(alpha, beta) on [0, 1].
    Beta { alpha: f64, beta: f64 },
}

/// Hyperparameters of the prior distributions.
///
/// Defaults: beta ~ Normal+(2, 1), omega ~ Normal(0.4, 0.5) truncated to
/// [0, 1], lambda ~ Beta(1, 2), d_i ~ Normal+(7, 2), d_t ~ Normal+(10, 2),
/// phi_deaths and phi_tweets ~ Exponential(5).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorConfig {
    pub mu_beta: f64,
    pub sigma_beta: f64,
    pub omega: OmegaPrior,
    pub alpha_lambda: f64,
    pub beta_lambda: f64,
    pub mu_d_i: f64,
    pub sigma_d_i: f64,
    pub mu_d_t: f64,
    pub sigma_d_t: f64,
    pub rate_phi: f64,
    pub rate_phi_tweets: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            mu_beta: 2.0,
            sigma_beta: 1.0,
            omega: OmegaPrior::TruncatedNormal {
                mu: 0.4,
                sigma: 0.5,
            },
            alpha_lambda: 1.0,
            beta_lambda: 2.0,
            mu_d_i: 7.0,
            sigma_d_i: 2.0,
            mu_d_t: 10.0,
            sigma_d_t: 2.0,
            rate_phi: 5.0,
            rate_phi_tweets: 5.0,
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<(), ParamsError> {
        let mut checks = vec![
            ("sigma_beta", self.sigma_beta),
            ("alpha_lambda", self.alpha_lambda),
            ("beta_lambda", self.beta_lambda),
            ("sigma_d_i", self.sigma_d_i),
            ("sigma_d_t", self.sigma_d_t),
            ("rate_phi", self.rate_phi),
            ("rate_phi_tweets", self.rate_phi_tweets),
        ];
        match self.omega {
            OmegaPrior::TruncatedNormal { sigma, .. } => checks.push(("sigma_omega", sigma)),
            OmegaPrior::Beta { alpha, beta } => {
                checks.push(("alpha_omega", alpha));
                checks.push(("beta_omega", beta));
            }
        }
        for (name, value) in checks {
            if value <= 0.0 || !value.is_finite() {
                return Err(ParamsError::BadHyperparameter { name, value });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(EpidemicParams::new(0.0, 0.1, 0.2, 7.0, 10.0, 1.0, 1.0).is_err());
        assert!(EpidemicParams::new(0.3, -0.1, 0.2, 7.0, 10.0, 1.0, 1.0).is_err());
        assert!(EpidemicParams::new(0.3, 0.1, 1.2, 7.0, 10.0, 1.0, 1.0).is_err());
        assert!(EpidemicParams::new(0.3, 0.1, 0.2, 7.0, 10.0, f64::NAN, 1.0).is_err());
        assert!(EpidemicParams::new(0.3, 1.0, 0.0, 7.0, 10.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn unit_params_map_to_zero_vector() {
        // log 1 = 0 and logit 0.5 = 0.
        let p = EpidemicParams::new(1.0, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0).unwrap();
        for component in to_unconstrained(&p) {
            assert_eq!(component, 0.0);
        }
    }

    #[test]
    fn log_beta_is_first_component() {
        let p = EpidemicParams::new(std::f64::consts::E, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((to_unconstrained(&p)[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reference_point_matches_scalar_oracle() {
        // Element-wise log/logit oracle against the stock simulation truth.
        let p = EpidemicParams::new(0.3, 0.1, 0.2, 7.0, 10.0, 1.0, 1.0).unwrap();
        let v = to_unconstrained(&p);
        let oracle = [
            0.3_f64.ln(),
            (0.1_f64 / 0.9).ln(),
            (0.2_f64 / 0.8).ln(),
            7.0_f64.ln(),
            10.0_f64.ln(),
            0.0,
            0.0,
        ];
        for (got, want) in v.iter().zip(oracle.iter()) {
            assert!(close(*got, *want, 1e-14), "{got} vs {want}");
        }
    }

    #[test]
    fn zero_vector_inverse_and_jacobian() {
        let (p, log_jac) = from_unconstrained(&[0.0; N_PARAMS]);
        assert_eq!(p.as_array(), [1.0, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0]);
        // Hand evaluation: five log components contribute 0, each logit
        // component contributes log(0.25).
        let expected = 2.0 * 0.25_f64.ln();
        assert!((log_jac - expected).abs() < 1e-14);
    }

    #[test]
    fn large_components_stay_finite() {
        let mut v = [0.0; N_PARAMS];
        v[0] = 700.0;
        let (p, log_jac) = from_unconstrained(&v);
        assert!(p.beta.is_finite());
        assert!(log_jac.is_finite());

        // logit component deep in the tail: params saturate at the interval
        // edge while the jacobian stays a well-defined large negative number.
        let mut v = [0.0; N_PARAMS];
        v[1] = 700.0;
        let (p, log_jac) = from_unconstrained(&v);
        assert_eq!(p.omega, 1.0);
        assert!((log_jac - (-700.0 + 0.25_f64.ln())).abs() < 1e-9);

        // Past the exp overflow threshold the result saturates instead of
        // becoming inf.
        let mut v = [0.0; N_PARAMS];
        v[0] = 1000.0;
        let (p, _) = from_unconstrained(&v);
        assert!(p.beta.is_finite());
    }

    #[test]
    fn default_priors_validate() {
        PriorConfig::default().validate().unwrap();
        let bad = PriorConfig {
            rate_phi: 0.0,
            ..PriorConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    fn arbitrary_params() -> impl Strategy<Value = EpidemicParams> {
        (
            1e-6..50.0_f64,
            1e-9..1.0_f64,
            1e-9..1.0_f64,
            1e-3..200.0_f64,
            1e-3..200.0_f64,
            1e-6..100.0_f64,
            1e-6..100.0_f64,
        )
            .prop_map(|(beta, omega, lambda, d_i, d_t, phi_d, phi_t)| {
                EpidemicParams::new(beta, omega, lambda, d_i, d_t, phi_d, phi_t).unwrap()
            })
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(params in arbitrary_params()) {
            let (back, _) = from_unconstrained(&to_unconstrained(&params));
            for (a, b) in params.as_array().iter().zip(back.as_array().iter()) {
                // 1e-12 relative, no absolute floor
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()), "{a} vs {b}");
            }
        }

        #[test]
        fn log_jacobian_matches_finite_differences(params in arbitrary_params()) {
            let v = to_unconstrained(&params);
            // The transform is componentwise, so the log-determinant is the
            // sum of log derivatives; estimate each by central differences.
            let h = 1e-6;
            let mut fd_log_det = 0.0;
            for i in 0..N_PARAMS {
                let mut hi = v;
                let mut lo = v;
                hi[i] += h;
                lo[i] -= h;
                let (p_hi, _) = from_unconstrained(&hi);
                let (p_lo, _) = from_unconstrained(&lo);
                let deriv = (p_hi.as_array()[i] - p_lo.as_array()[i]) / (2.0 * h);
                fd_log_det += deriv.abs().ln();
            }
            let (_, log_jac) = from_unconstrained(&v);
            prop_assert!(
                close(log_jac, fd_log_det, 1e-6),
                "analytic {log_jac} vs finite-difference {fd_log_det}"
            );
        }
    }
}
