use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lstsq::{affine_min_norm, min_norm_lstsq, unit_l1_min};
use super::matrix::MeasurementMatrix;
use super::zne::{common_sign, LOG_FLOOR};
use crate::error::{Error, Result};
use crate::sim::UncertainValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessMode {
    /// `b = Σ M_j x_j`.
    Linear,
    /// Geometric: `b = Π |M_j|^{x_j}`, learned on `ln|M|` against `ln b_S`.
    Exponential,
    /// `b = exp(Σ M_j x_j)`, learned on raw entries against `ln b_S`.
    ExpRaw,
    /// Unconstrained minimum-norm solve of `M x = b_S`.
    Odr,
}

impl GuessMode {
    fn log_domain(self) -> bool {
        matches!(self, GuessMode::Exponential)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `Σ x_j = 1`.
    #[default]
    SumToOne,
    /// `Σ |x_j| = 1`.
    UnitL1,
}

/// Which parts of `Cov(x)` enter the variance of a mitigated value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceTerms {
    /// Full quadratic form `Mᵀ Cov(x) M`.
    #[default]
    Full,
    /// Only the coefficient variances `Σ M_j² Cov(x)_jj`.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessCoefficients {
    pub x: Vec<f64>,
    /// Row-major `m × m`.
    pub covariance: Vec<Vec<f64>>,
    pub mode: GuessMode,
    pub constraint: Constraint,
}

impl GuessCoefficients {
    /// Coefficients known exactly.
    pub fn exact(x: Vec<f64>, mode: GuessMode) -> Self {
        let m = x.len();
        Self { x, covariance: vec![vec![0.0; m]; m], mode, constraint: Constraint::SumToOne }
    }

    pub fn variances(&self) -> Vec<f64> {
        (0..self.x.len()).map(|j| self.covariance[j][j]).collect()
    }
}

/// Solves for the coefficients from exact symmetry means.
pub fn solve_coefficients(means: &DMatrix<f64>, b_s: &[f64], mode: GuessMode, constraint: Constraint) -> Result<Vec<f64>> {
    let (n, m) = means.shape();
    if n == 0 || m == 0 {
        return Err(Error::InsufficientData("empty symmetry matrix".into()));
    }
    if b_s.len() != n {
        return Err(Error::Shape(format!("{} targets for {n} symmetry rows", b_s.len())));
    }
    let log_target = || -> Result<DVector<f64>> {
        if let Some(b) = b_s.iter().find(|b| **b <= LOG_FLOOR) {
            return Err(Error::LogDomain(format!("symmetry target {b} is not positive")));
        }
        Ok(DVector::from_iterator(n, b_s.iter().map(|b| b.ln())))
    };
    let (a, b) = match mode {
        GuessMode::Linear | GuessMode::Odr => (means.clone(), DVector::from_column_slice(b_s)),
        GuessMode::Exponential => {
            if let Some(v) = means.iter().find(|v| v.abs() <= LOG_FLOOR || !v.is_finite()) {
                return Err(Error::LogDomain(format!("symmetry entry {v} too close to zero")));
            }
            (means.map(|v| v.abs().ln()), log_target()?)
        }
        GuessMode::ExpRaw => (means.clone(), log_target()?),
    };
    let x = match (mode, constraint) {
        (GuessMode::Odr, _) => min_norm_lstsq(&a, &b)?,
        (_, Constraint::SumToOne) => affine_min_norm(&a, &b, &DVector::repeat(m, 1.0))?,
        (_, Constraint::UnitL1) => unit_l1_min(&a, &b)?,
    };
    Ok(x.iter().copied().collect())
}

/// `Cov(x) = J diag(σ²) Jᵀ` with `J = ∂x/∂M` from central differences of
/// `solver`, step `max(1e−6, 1e−4·|M_jk|)` per entry.
pub fn propagate_covariance<F>(means: &DMatrix<f64>, sigmas: &DMatrix<f64>, solver: F) -> Result<DMatrix<f64>>
where
    F: Fn(&DMatrix<f64>) -> Result<Vec<f64>>,
{
    if means.shape() != sigmas.shape() {
        return Err(Error::Shape(format!("means {:?} vs sigmas {:?}", means.shape(), sigmas.shape())));
    }
    let m = solver(means)?.len();
    let mut cov = DMatrix::zeros(m, m);
    let mut shifted = means.clone();
    for j in 0..means.nrows() {
        for k in 0..means.ncols() {
            let s = sigmas[(j, k)];
            if s == 0.0 {
                continue;
            }
            let v = means[(j, k)];
            let h = (1e-4 * v.abs()).max(1e-6);
            shifted[(j, k)] = v + h;
            let up = solver(&shifted)?;
            shifted[(j, k)] = v - h;
            let down = solver(&shifted)?;
            shifted[(j, k)] = v;
            let col = DVector::from_iterator(m, up.iter().zip(&down).map(|(u, d)| (u - d) / (2.0 * h)));
            cov += &col * col.transpose() * (s * s);
        }
    }
    Ok(cov)
}

/// Learns coefficients from the symmetry rows `ms` with ideal values `b_s`.
pub fn guess_learn(ms: &MeasurementMatrix, b_s: &[f64], mode: GuessMode) -> Result<GuessCoefficients> {
    guess_learn_with(ms, b_s, mode, Constraint::SumToOne)
}

pub fn guess_learn_with(
    ms: &MeasurementMatrix,
    b_s: &[f64],
    mode: GuessMode,
    constraint: Constraint,
) -> Result<GuessCoefficients> {
    let means = ms.means();
    let solver = |m: &DMatrix<f64>| solve_coefficients(m, b_s, mode, constraint);
    let x = solver(&means)?;
    let cov = propagate_covariance(&means, &ms.sigmas(), solver)?;
    let covariance = (0..x.len()).map(|i| (0..x.len()).map(|j| cov[(i, j)]).collect()).collect();
    Ok(GuessCoefficients { x, covariance, mode, constraint })
}

/// Applies the coefficients to a target row.
pub fn guess_apply(coeffs: &GuessCoefficients, row: &[UncertainValue]) -> Result<UncertainValue> {
    guess_apply_with(coeffs, row, VarianceTerms::Full)
}

pub fn guess_apply_with(coeffs: &GuessCoefficients, row: &[UncertainValue], terms: VarianceTerms) -> Result<UncertainValue> {
    let m = coeffs.x.len();
    if row.len() != m {
        return Err(Error::Shape(format!("row of {} entries for {m} coefficients", row.len())));
    }
    // Work in the domain where the estimate is linear in x.
    let (vals, sigmas, sign): (Vec<f64>, Vec<f64>, f64) = if coeffs.mode.log_domain() {
        let means: Vec<f64> = row.iter().map(|v| v.mean).collect();
        let sign = common_sign(&means)?;
        (
            means.iter().map(|v| v.abs().ln()).collect(),
            row.iter().map(|v| v.sigma / v.mean.abs()).collect(),
            sign,
        )
    } else {
        (row.iter().map(|v| v.mean).collect(), row.iter().map(|v| v.sigma).collect(), 1.0)
    };
    let lin: f64 = vals.iter().zip(&coeffs.x).map(|(v, x)| v * x).sum();
    let cov = &coeffs.covariance;
    let coeff_term: f64 = match terms {
        VarianceTerms::Full => (0..m).map(|i| (0..m).map(|j| vals[i] * cov[i][j] * vals[j]).sum::<f64>()).sum(),
        VarianceTerms::Diagonal => (0..m).map(|j| vals[j] * vals[j] * cov[j][j]).sum(),
    };
    let data_term: f64 = (0..m).map(|j| (coeffs.x[j] * sigmas[j]).powi(2)).sum();
    let cross_term: f64 = (0..m).map(|j| cov[j][j] * sigmas[j] * sigmas[j]).sum();
    let var = (coeff_term + data_term + cross_term).max(0.0);
    Ok(match coeffs.mode {
        GuessMode::Linear | GuessMode::Odr => UncertainValue::new(lin, var.sqrt()),
        GuessMode::Exponential | GuessMode::ExpRaw => {
            let b = sign * lin.exp();
            UncertainValue::new(b, b.abs() * var.sqrt())
        }
    })
}
