use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use crate::dense::{pauli_matrix, CMatrix};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

/// Stochastic Pauli channel `ρ ↦ (1−p)ρ + Σ p_P PρP` on one or two sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliChannel {
    sites: usize,
    entries: Vec<(PauliString, f64)>,
}

impl PauliChannel {
    pub fn new(sites: usize, entries: Vec<(PauliString, f64)>) -> Result<Self> {
        if sites == 0 || sites > 2 {
            return Err(Error::InvalidNoise(format!("channels act on 1 or 2 sites, got {sites}")));
        }
        for (p, prob) in &entries {
            if p.len() != sites {
                return Err(Error::LengthMismatch { left: sites, right: p.len() });
            }
            if p.weight() == 0 {
                return Err(Error::InvalidNoise("identity listed as an error".into()));
            }
            if !(prob.is_finite() && *prob >= 0.0) {
                return Err(Error::InvalidNoise(format!("probability {prob} for {p}")));
            }
        }
        let ch = Self { sites, entries };
        if ch.total_error() > 1.0 + 1e-12 {
            return Err(Error::ErrorProbabilityTooLarge(ch.total_error()));
        }
        Ok(ch)
    }

    /// Total error `p` spread evenly over the `4^k − 1` non-identity Paulis.
    pub fn depolarizing(sites: usize, p: f64) -> Result<Self> {
        let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        let count = (1usize << (2 * sites)) - 1;
        let mut entries = Vec::with_capacity(count);
        for code in 1..=count {
            let ls: Vec<Pauli> = (0..sites).rev().map(|k| letters[(code >> (2 * k)) & 3]).collect();
            let op = PauliString::new(ls, crate::pauli::Phase::Plus)?;
            entries.push((op, p / count as f64));
        }
        Self::new(sites, entries)
    }

    pub fn noiseless(sites: usize) -> Self {
        Self { sites, entries: Vec::new() }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn entries(&self) -> &[(PauliString, f64)] {
        &self.entries
    }

    pub fn total_error(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    /// Every error probability multiplied by `factor`; the identity weight
    /// absorbs the difference.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::InvalidNoise(format!("scale factor {factor}")));
        }
        let total = self.total_error() * factor;
        if total > 1.0 + 1e-12 {
            return Err(Error::ErrorProbabilityTooLarge(total));
        }
        Ok(Self {
            sites: self.sites,
            entries: self.entries.iter().map(|(p, q)| (p.clone(), q * factor)).collect(),
        })
    }

    /// Superoperator (row-stacked, see [`LocalSuperop`]) of the channel.
    pub fn superop(&self) -> CMatrix {
        let d = 1usize << self.sites;
        let dd = d * d;
        let mut s = CMatrix::identity(dd, dd) * Complex64::new(1.0 - self.total_error(), 0.0);
        for (p, prob) in &self.entries {
            s += conjugation_superop(&pauli_matrix(p)) * Complex64::new(*prob, 0.0);
        }
        s
    }
}

/// `X ↦ U X U†` as a `d²×d²` matrix acting on row-major `vec(X)`.
pub fn conjugation_superop(u: &CMatrix) -> CMatrix {
    let d = u.nrows();
    CMatrix::from_fn(d * d, d * d, |row, col| {
        let (r2, c2) = (row / d, row % d);
        let (r, c) = (col / d, col % d);
        u[(r2, r)] * u[(c2, c)].conj()
    })
}

/// Per-gate noise specification for the circuit backend plus the coupling
/// of the continuous-time backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub two_qubit: PauliChannel,
    pub one_qubit: Option<PauliChannel>,
    /// Site → error multiplier; absent sites use 1. A two-qubit gate uses the
    /// mean of its two sites.
    pub site_multipliers: BTreeMap<usize, f64>,
    pub lindblad_lambda: f64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            two_qubit: PauliChannel::noiseless(2),
            one_qubit: None,
            site_multipliers: BTreeMap::new(),
            lindblad_lambda: 0.0,
        }
    }

    /// Two-qubit depolarizing noise of total error `p` after every
    /// interaction gate.
    pub fn depolarizing(p: f64) -> Result<Self> {
        Ok(Self { two_qubit: PauliChannel::depolarizing(2, p)?, ..Self::noiseless() })
    }

    pub fn with_site_multiplier(mut self, site: usize, m: f64) -> Self {
        self.site_multipliers.insert(site, m);
        self
    }

    pub fn site_multiplier(&self, site: usize) -> f64 {
        self.site_multipliers.get(&site).copied().unwrap_or(1.0)
    }

    pub fn gate_multiplier(&self, sites: &[usize]) -> f64 {
        sites.iter().map(|&s| self.site_multiplier(s)).sum::<f64>() / sites.len() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.two_qubit.sites() != 2 {
            return Err(Error::InvalidNoise("two-qubit channel must act on 2 sites".into()));
        }
        if let Some(c) = &self.one_qubit {
            if c.sites() != 1 {
                return Err(Error::InvalidNoise("one-qubit channel must act on 1 site".into()));
            }
        }
        if self.site_multipliers.values().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidNoise("site multipliers must be finite and >= 0".into()));
        }
        if !(self.lindblad_lambda.is_finite() && self.lindblad_lambda >= 0.0) {
            return Err(Error::InvalidNoise("lindblad coupling must be >= 0".into()));
        }
        Ok(())
    }
}

/// A superoperator on one or two sites of a density matrix.
///
/// The local index is `(r, c)` over the row and column bits of the sites,
/// `r` major; for two sites the first listed site is the more significant
/// bit. Entries are kept sparse per output row.
#[derive(Debug, Clone)]
pub struct LocalSuperop {
    sites: Vec<usize>,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl LocalSuperop {
    pub fn new(sites: Vec<usize>, m: &CMatrix) -> Self {
        let dd = m.nrows();
        assert_eq!(dd, 1usize << (2 * sites.len()), "superop size does not match site count");
        let rows = (0..dd)
            .map(|r| {
                (0..dd)
                    .filter_map(|c| {
                        let v = m[(r, c)];
                        (v.norm() > 1e-15).then_some((c, v))
                    })
                    .collect()
            })
            .collect();
        Self { sites, rows }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn apply(&self, rho: &mut DensityMatrix) {
        let n = rho.n();
        let k = self.sites.len();
        // Bit offsets of the local row bits then the local column bits.
        let mut positions = Vec::with_capacity(2 * k);
        for &s in &self.sites {
            positions.push(2 * n - 1 - s);
        }
        for &s in &self.sites {
            positions.push(n - 1 - s);
        }
        let m = positions.len();
        let offsets: Vec<usize> = (0..1usize << m)
            .map(|local| {
                positions
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| local >> (m - 1 - bit) & 1 == 1)
                    .map(|(_, &p)| 1usize << p)
                    .sum()
            })
            .collect();
        let mut sorted = positions.clone();
        sorted.sort_unstable();

        let data = rho.data_mut();
        let blocks = data.len() >> m;
        let mut buf = vec![Complex64::new(0.0, 0.0); offsets.len()];
        for blk in 0..blocks {
            let mut base = blk;
            for &p in &sorted {
                base = ((base >> p) << (p + 1)) | (base & ((1usize << p) - 1));
            }
            for (slot, off) in buf.iter_mut().zip(&offsets) {
                *slot = data[base + off];
            }
            for (row, off) in self.rows.iter().zip(&offsets) {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(c, v) in row {
                    acc += v * buf[c];
                }
                data[base + off] = acc;
            }
        }
    }
}
