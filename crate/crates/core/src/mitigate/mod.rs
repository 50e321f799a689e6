//! Extrapolation to zero noise: Richardson, linear and exponential fits in
//! the gain, and symmetry-learned coefficients (GUESS), plus the fallback
//! rule for non-physical estimates.

mod guess;
mod lstsq;
mod matrix;
mod zne;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sim::UncertainValue;

pub use guess::{
    guess_apply, guess_apply_with, guess_learn, guess_learn_with, propagate_covariance, solve_coefficients, Constraint,
    GuessCoefficients, GuessMode, VarianceTerms,
};
pub use lstsq::{affine_min_norm, min_norm_lstsq, unit_l1_min};
pub use matrix::MeasurementMatrix;
pub use zne::{
    intercept_weights, propagated_sigma, richardson, richardson_coefficients, zne_exponential, zne_linear, LOG_FLOOR,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GuessExp,
    GuessLin,
    ZneExp,
    ZneLin,
    Richardson,
    Raw,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::GuessExp => "guess_exp",
            Method::GuessLin => "guess_lin",
            Method::ZneExp => "zne_exp",
            Method::ZneLin => "zne_lin",
            Method::Richardson => "richardson",
            Method::Raw => "raw",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigationResult {
    pub value: UncertainValue,
    pub method_used: Method,
    pub fallback_applied: bool,
    /// `|value.mean| ≤ 1`.
    pub physical: bool,
}

pub fn is_physical(v: &UncertainValue) -> bool {
    v.mean.is_finite() && v.mean.abs() <= 1.0
}

/// First physical candidate in `chain`, else `raw`. A candidate that failed
/// to compute counts as non-physical.
pub fn mitigate_with_fallback(chain: Vec<(Method, Result<UncertainValue>)>, raw: UncertainValue) -> MitigationResult {
    for (i, (method, value)) in chain.into_iter().enumerate() {
        if let Ok(v) = value {
            if is_physical(&v) {
                return MitigationResult { value: v, method_used: method, fallback_applied: i > 0, physical: true };
            }
        }
    }
    MitigationResult { value: raw, method_used: Method::Raw, fallback_applied: true, physical: is_physical(&raw) }
}

/// Which variant heads the chain; the other one follows, then raw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primary {
    #[default]
    Exponential,
    Linear,
}

/// GUESS with the exp/lin fallback applied to one target row.
pub fn guess_with_fallback(
    row: &[UncertainValue],
    coeffs_exp: &GuessCoefficients,
    coeffs_lin: &GuessCoefficients,
    primary: Primary,
) -> MitigationResult {
    let exp = (Method::GuessExp, guess_apply(coeffs_exp, row));
    let lin = (Method::GuessLin, guess_apply(coeffs_lin, row));
    let chain = match primary {
        Primary::Exponential => vec![exp, lin],
        Primary::Linear => vec![lin, exp],
    };
    mitigate_with_fallback(chain, row[0])
}

/// ZNE with the exp/lin fallback; `row[j]` is measured at `gains[j]`.
pub fn zne_with_fallback(gains: &[f64], row: &[UncertainValue], primary: Primary) -> MitigationResult {
    let points: Vec<(f64, UncertainValue)> = gains.iter().copied().zip(row.iter().copied()).collect();
    let exp = (Method::ZneExp, zne_exponential(&points));
    let lin = (Method::ZneLin, zne_linear(&points));
    let chain = match primary {
        Primary::Exponential => vec![exp, lin],
        Primary::Linear => vec![lin, exp],
    };
    mitigate_with_fallback(chain, row[0])
}
