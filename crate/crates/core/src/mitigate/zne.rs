use crate::error::{Error, Result};
use crate::sim::UncertainValue;

/// Floor below which logarithms of expectation values are refused.
pub const LOG_FLOOR: f64 = 1e-6;

/// Lagrange weights `γ_j = Π_{k≠j} λ_k / (λ_k − λ_j)` extrapolating to 0.
pub fn richardson_coefficients(gains: &[f64]) -> Result<Vec<f64>> {
    if gains.is_empty() {
        return Err(Error::InsufficientData("no gains".into()));
    }
    for (i, a) in gains.iter().enumerate() {
        if gains[i + 1..].iter().any(|b| (a - b).abs() < 1e-12) {
            return Err(Error::DuplicateGain(*a));
        }
    }
    Ok((0..gains.len())
        .map(|j| {
            gains
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, lk)| lk / (lk - gains[j]))
                .product()
        })
        .collect())
}

/// Richardson estimate with sigma propagated from the inputs.
pub fn richardson(points: &[(f64, UncertainValue)]) -> Result<UncertainValue> {
    let gains: Vec<f64> = points.iter().map(|p| p.0).collect();
    let w = richardson_coefficients(&gains)?;
    let mean = w.iter().zip(points).map(|(w, p)| w * p.1.mean).sum();
    let var: f64 = w.iter().zip(points).map(|(w, p)| (w * p.1.sigma).powi(2)).sum();
    Ok(UncertainValue::new(mean, var.sqrt()))
}

/// Weights `w` with intercept `a = Σ w_i y_i` of the least-squares line
/// through `(x_i, y_i)`.
pub fn intercept_weights(xs: &[f64]) -> Result<Vec<f64>> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("a line needs 2 points, got {n}")));
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    if sxx < 1e-24 {
        return Err(Error::DuplicateGain(xs[0]));
    }
    Ok(xs.iter().map(|x| 1.0 / n as f64 - mean * (x - mean) / sxx).collect())
}

struct LineFit {
    intercept: f64,
    /// `σ²_res [1/n + x̄²/S_xx]`, or the input propagation when `n = 2`.
    intercept_var: f64,
}

fn fit_line(xs: &[f64], ys: &[f64], input_sigmas: &[f64]) -> Result<LineFit> {
    let w = intercept_weights(xs)?;
    let n = xs.len();
    let xbar = xs.iter().sum::<f64>() / n as f64;
    let ybar = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let intercept_var = if n == 2 {
        w.iter().zip(input_sigmas).map(|(w, s)| (w * s).powi(2)).sum()
    } else {
        let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        rss / (n - 2) as f64 * (1.0 / n as f64 + xbar * xbar / sxx)
    };
    Ok(LineFit { intercept, intercept_var })
}

fn split(points: &[(f64, UncertainValue)]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let xs = points.iter().map(|p| p.0).collect();
    let ys = points.iter().map(|p| p.1.mean).collect();
    let ss = points.iter().map(|p| p.1.sigma).collect();
    (xs, ys, ss)
}

/// Linear fit in the gain, evaluated at gain 0.
pub fn zne_linear(points: &[(f64, UncertainValue)]) -> Result<UncertainValue> {
    let (xs, ys, ss) = split(points);
    let fit = fit_line(&xs, &ys, &ss)?;
    Ok(UncertainValue::new(fit.intercept, fit.intercept_var.max(0.0).sqrt()))
}

/// Sign shared by all means; mixed signs or values below the floor fail.
pub(crate) fn common_sign(values: &[f64]) -> Result<f64> {
    if let Some(v) = values.iter().find(|v| v.abs() <= LOG_FLOOR || !v.is_finite()) {
        return Err(Error::LogDomain(format!("expectation {v} too close to zero")));
    }
    let pos = values.iter().filter(|v| **v > 0.0).count();
    if pos != 0 && pos != values.len() {
        return Err(Error::LogDomain("mixed signs".into()));
    }
    Ok(if pos > 0 { 1.0 } else { -1.0 })
}

/// Fit of `ln|y| = ln a + b·gain`, evaluated at gain 0.
pub fn zne_exponential(points: &[(f64, UncertainValue)]) -> Result<UncertainValue> {
    let (xs, ys, ss) = split(points);
    let sign = common_sign(&ys)?;
    let logs: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let rel: Vec<f64> = ys.iter().zip(&ss).map(|(y, s)| s / y.abs()).collect();
    let fit = fit_line(&xs, &logs, &rel)?;
    let y0 = fit.intercept.exp();
    Ok(UncertainValue::new(sign * y0, y0 * fit.intercept_var.max(0.0).sqrt()))
}

/// Sigma of a linear-weight estimate propagated from the input sigmas,
/// `sqrt(Σ w_i² σ_i²)`. For log-domain estimates pass relative sigmas and
/// multiply by the estimate.
pub fn propagated_sigma(weights: &[f64], sigmas: &[f64]) -> f64 {
    weights.iter().zip(sigmas).map(|(w, s)| (w * s).powi(2)).sum::<f64>().sqrt()
}
