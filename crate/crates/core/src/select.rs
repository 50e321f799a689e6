//! Post-selection of observables from their symmetry measurements: flag
//! records with outlying standard deviations, then keep the least decayed.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::UncertainValue;

/// Gain-1 symmetry measurements of one observable across the measured steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryRecord {
    pub id: usize,
    pub values: Vec<UncertainValue>,
    pub flagged: bool,
}

impl SymmetryRecord {
    pub fn new(id: usize, values: Vec<UncertainValue>) -> Self {
        Self { id, values, flagged: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierPolicy {
    pub k_iqr: f64,
    pub max_discard: usize,
    pub keep_best: usize,
}

impl Default for OutlierPolicy {
    fn default() -> Self {
        Self { k_iqr: 1.5, max_discard: 10, keep_best: 20 }
    }
}

/// Quantile by linear interpolation between order statistics of `sorted`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn check_batch(records: &[SymmetryRecord]) -> Result<usize> {
    let steps = records.first().map_or(0, |r| r.values.len());
    if records.iter().any(|r| r.values.len() != steps) {
        return Err(Error::Shape("symmetry records of unequal length".into()));
    }
    Ok(steps)
}

/// Flags records whose sigma exceeds `Q3 + k·IQR` of the unflagged cohort,
/// step by step from the shortest circuit, until `max_discard` records are
/// flagged. Flagged records get NaN values. Returns the newly flagged ids in
/// flagging order.
pub fn detect_sigma_outliers(records: &mut [SymmetryRecord], policy: &OutlierPolicy) -> Result<Vec<usize>> {
    if records.len() < 4 {
        return Err(Error::InsufficientData(format!("outlier detection needs 4 records, got {}", records.len())));
    }
    let steps = check_batch(records)?;
    let mut budget = policy.max_discard.saturating_sub(records.iter().filter(|r| r.flagged).count());
    let mut newly = Vec::new();
    for step in 0..steps {
        if budget == 0 {
            break;
        }
        let mut sigmas: Vec<f64> = records.iter().filter(|r| !r.flagged).map(|r| r.values[step].sigma).collect();
        if sigmas.len() < 4 {
            break;
        }
        sigmas.sort_by(f64::total_cmp);
        let (q1, q3) = (quantile(&sigmas, 0.25), quantile(&sigmas, 0.75));
        let limit = q3 + policy.k_iqr * (q3 - q1);
        let tol = 1e-12 * limit.abs().max(f64::MIN_POSITIVE);
        // Worst offenders first when the budget runs out mid-step.
        let mut over: Vec<(f64, usize)> = records
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.flagged && r.values[step].sigma > limit + tol)
            .map(|(i, r)| (r.values[step].sigma, i))
            .collect();
        over.sort_by(|a, b| b.0.total_cmp(&a.0).then(records[a.1].id.cmp(&records[b.1].id)));
        for (_, i) in over.into_iter().take(budget) {
            let r = &mut records[i];
            r.flagged = true;
            r.values.iter_mut().for_each(|v| *v = UncertainValue::new(f64::NAN, f64::NAN));
            newly.push(r.id);
            budget -= 1;
        }
    }
    Ok(newly)
}

/// Ids of the `keep_best` unflagged records with the highest symmetry
/// expectation at the final step; ties go to lower sigma, then lower id.
pub fn select_best(records: &[SymmetryRecord], policy: &OutlierPolicy) -> Result<Vec<usize>> {
    let steps = check_batch(records)?;
    if steps == 0 {
        return Err(Error::InsufficientData("records carry no steps".into()));
    }
    let mut pool: Vec<&SymmetryRecord> = records.iter().filter(|r| !r.flagged).collect();
    if pool.len() < policy.keep_best {
        return Err(Error::InsufficientData(format!(
            "{} unflagged records for keep_best = {}",
            pool.len(),
            policy.keep_best
        )));
    }
    let last = steps - 1;
    pool.sort_by(|a, b| {
        let (va, vb) = (a.values[last], b.values[last]);
        vb.mean
            .partial_cmp(&va.mean)
            .unwrap_or(Ordering::Equal)
            .then(va.sigma.partial_cmp(&vb.sigma).unwrap_or(Ordering::Equal))
            .then(a.id.cmp(&b.id))
    });
    Ok(pool.into_iter().take(policy.keep_best).map(|r| r.id).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: usize, mean: f64, sigma: f64) -> SymmetryRecord {
        SymmetryRecord::new(id, vec![UncertainValue::new(mean, sigma)])
    }

    #[test]
    fn quartile_convention() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&s, 0.25), 2.0);
        assert_eq!(quantile(&s, 0.75), 4.0);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.25), 1.75);
    }

    #[test]
    fn outlier_examples() {
        let policy = OutlierPolicy::default();
        let mut rs: Vec<_> = [0.01, 0.01, 0.01, 0.01, 0.10].iter().enumerate().map(|(i, &s)| rec(i, 0.9, s)).collect();
        assert_eq!(detect_sigma_outliers(&mut rs, &policy).unwrap(), vec![4]);
        assert!(rs[4].flagged && rs[4].values[0].mean.is_nan());

        let mut flat: Vec<_> = (0..6).map(|i| rec(i, 0.9, 0.02)).collect();
        assert!(detect_sigma_outliers(&mut flat, &policy).unwrap().is_empty());

        let mut gated: Vec<_> = [0.01, 0.01, 0.01, 0.01, 0.10].iter().enumerate().map(|(i, &s)| rec(i, 0.9, s)).collect();
        let none = OutlierPolicy { max_discard: 0, ..policy };
        assert!(detect_sigma_outliers(&mut gated, &none).unwrap().is_empty());

        let mut few: Vec<_> = (0..3).map(|i| rec(i, 0.9, 0.02)).collect();
        assert!(detect_sigma_outliers(&mut few, &policy).is_err());
    }

    #[test]
    fn select_examples() {
        let policy = OutlierPolicy { keep_best: 2, ..Default::default() };
        let rs: Vec<_> = [0.9, 0.5, 0.8, 0.7].iter().enumerate().map(|(i, &m)| rec(i, m, 0.01)).collect();
        assert_eq!(select_best(&rs, &policy).unwrap(), vec![0, 2]);

        let tied = vec![rec(0, 0.8, 0.02), rec(1, 0.8, 0.01)];
        let one = OutlierPolicy { keep_best: 1, ..Default::default() };
        assert_eq!(select_best(&tied, &one).unwrap(), vec![1]);

        let mut short = rs.clone();
        short[0].flagged = true;
        short[2].flagged = true;
        short[3].flagged = true;
        assert!(select_best(&short, &policy).is_err());
    }

    #[test]
    fn budget_takes_worst_first() {
        let mut rs: Vec<_> = [0.01, 0.01, 0.011, 0.01, 0.2, 0.5].iter().enumerate().map(|(i, &s)| rec(i, 0.9, s)).collect();
        let one = OutlierPolicy { max_discard: 1, ..Default::default() };
        assert_eq!(detect_sigma_outliers(&mut rs, &one).unwrap(), vec![5]);
    }
}
