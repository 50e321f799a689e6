use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::UncertainValue;

/// Observables × gains table of noisy expectation values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementMatrix {
    gains: Vec<f64>,
    labels: Vec<String>,
    rows: Vec<Vec<UncertainValue>>,
}

impl MeasurementMatrix {
    pub fn new(gains: Vec<f64>, labels: Vec<String>, rows: Vec<Vec<UncertainValue>>) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::Shape("no gains".into()));
        }
        if (gains[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("first gain must be 1, got {}", gains[0])));
        }
        if labels.len() != rows.len() {
            return Err(Error::Shape(format!("{} labels for {} rows", labels.len(), rows.len())));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != gains.len()) {
            return Err(Error::Shape(format!("row of {} entries for {} gains", r.len(), gains.len())));
        }
        Ok(Self { gains, labels, rows })
    }

    /// A single unlabelled row.
    pub fn single(gains: Vec<f64>, row: Vec<UncertainValue>) -> Result<Self> {
        Self::new(gains, vec!["row".into()], vec![row])
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<UncertainValue>] {
        &self.rows
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.gains.len()
    }

    pub fn means(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.nrows(), self.ncols(), |i, j| self.rows[i][j].mean)
    }

    pub fn sigmas(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.nrows(), self.ncols(), |i, j| self.rows[i][j].sigma)
    }

    /// `gains: g1 g2 …` then `label<TAB>mean±sigma<TAB>…` per row.
    pub fn to_text(&self) -> String {
        let gains: Vec<String> = self.gains.iter().map(|g| g.to_string()).collect();
        let mut out = format!("gains: {}\n", gains.join(" "));
        for (label, row) in self.labels.iter().zip(&self.rows) {
            out.push_str(label);
            for v in row {
                let _ = write!(out, "\t{}±{}", v.mean, v.sigma);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Config("empty measurement matrix".into()))?;
        let gains = header
            .strip_prefix("gains:")
            .ok_or_else(|| Error::Config(format!("expected 'gains:' header, got {header:?}")))?
            .split_whitespace()
            .map(|g| g.parse::<f64>().map_err(|e| Error::Config(format!("gain {g:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut labels = Vec::new();
        let mut rows = Vec::new();
        for line in lines {
            let mut cells = line.split('\t');
            labels.push(cells.next().unwrap_or_default().to_string());
            let row = cells
                .map(|cell| {
                    let (m, s) = cell
                        .split_once('±')
                        .ok_or_else(|| Error::Config(format!("expected mean±sigma, got {cell:?}")))?;
                    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| Error::Config(format!("{v:?}: {e}")));
                    Ok(UncertainValue::new(parse(m)?, parse(s)?))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::new(gains, labels, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let m = MeasurementMatrix::new(
            vec![1.0, 1.2, 1.5],
            vec!["Z0".into(), "Z1".into()],
            vec![
                vec![UncertainValue::new(0.9, 0.01), UncertainValue::new(0.85, 0.012), UncertainValue::new(0.8, 0.02)],
                vec![UncertainValue::new(-0.5, 0.0), UncertainValue::new(-0.45, 0.1), UncertainValue::new(-0.4, 0.3)],
            ],
        )
        .unwrap();
        let text = m.to_text();
        assert!(text.starts_with("gains: 1 1.2 1.5\nZ0\t0.9±0.01\t"));
        assert_eq!(MeasurementMatrix::from_text(&text).unwrap(), m);
    }

    #[test]
    fn shape_checks() {
        let v = UncertainValue::exact(0.5);
        assert!(MeasurementMatrix::single(vec![1.0, 2.0], vec![v]).is_err());
        assert!(MeasurementMatrix::single(vec![2.0], vec![v]).is_err());
        assert!(MeasurementMatrix::single(vec![], vec![]).is_err());
        assert!(MeasurementMatrix::from_text("gains: 1 2\nrow\t0.5±0.1\n").is_err());
        assert!(MeasurementMatrix::from_text("1 2\n").is_err());
    }
}
