//! Spin-chain Hamiltonians, their first-order Trotter circuits, and the
//! impurity-perturbed twins that enforce a local symmetry.

mod impurity;
mod trotter;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, Phase, PauliString};

pub use impurity::{apply_impurity, make_impurity, verify_symmetry, Impurity};
pub use trotter::{trotterize, Gate, GateKind, TrotterCircuit, TrotterSpec};

/// Coefficients below this magnitude are treated as absent.
pub(crate) const COEFF_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ising,
    HeisenbergXz,
}

/// Parameters of an open-boundary chain. Ising uses `j` and `h_x`; the XZ
/// Heisenberg chain uses `j_x`, `j_z` and `h_x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub n: usize,
    #[serde(default)]
    pub j: f64,
    #[serde(default)]
    pub h_x: f64,
    #[serde(default)]
    pub j_x: f64,
    #[serde(default)]
    pub j_z: f64,
}

impl ModelParams {
    pub fn ising(n: usize, j: f64, h_x: f64) -> Self {
        Self { kind: ModelKind::Ising, n, j, h_x, j_x: 0.0, j_z: 0.0 }
    }

    pub fn heisenberg(n: usize, j_x: f64, j_z: f64, h_x: f64) -> Self {
        Self { kind: ModelKind::HeisenbergXz, n, j: 0.0, h_x, j_x, j_z }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("chain needs n >= 2 sites, got {}", self.n)));
        }
        let vals = [self.j, self.h_x, self.j_x, self.j_z];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite coupling".into()));
        }
        Ok(())
    }
}

/// Trotter stage a term is exponentiated in. Within one step the stages run
/// in declaration order, each bond stage split into odd then even bonds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    XxBonds,
    ZzBonds,
    Fields,
}

impl Stage {
    /// The stage an operator is placed in unless stated otherwise.
    pub fn default_for(op: &PauliString) -> Stage {
        let letters: Vec<Pauli> = op.letters().iter().copied().filter(|l| !l.is_identity()).collect();
        match letters.as_slice() {
            [Pauli::X, Pauli::X] => Stage::XxBonds,
            [_, _] => Stage::ZzBonds,
            _ => Stage::Fields,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Stage::XxBonds => "xx-stage",
            Stage::ZzBonds => "zz-stage",
            Stage::Fields => "field-stage",
        }
    }

    fn from_tag(s: &str) -> Option<Stage> {
        match s {
            "xx-stage" => Some(Stage::XxBonds),
            "zz-stage" => Some(Stage::ZzBonds),
            "field-stage" => Some(Stage::Fields),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub op: PauliString,
    pub stage: Stage,
}

impl Term {
    /// A term in its operator's default stage. The operator's phase is
    /// folded into the coefficient.
    pub fn new(coeff: f64, op: PauliString) -> Self {
        let stage = Stage::default_for(&op);
        Self::in_stage(coeff, op, stage)
    }

    pub fn in_stage(coeff: f64, op: PauliString, stage: Stage) -> Self {
        let coeff = coeff * op.phase().sign();
        Self { coeff, op: op.with_phase(Phase::Plus), stage }
    }
}

/// Weighted Pauli sum. Entries sharing an operator and stage are merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    n: usize,
    terms: Vec<Term>,
}

impl Hamiltonian {
    pub fn new(n: usize) -> Self {
        Self { n, terms: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `term`, merging into an existing entry with the same operator and
    /// stage. Entries whose coefficient cancels to zero are dropped.
    pub fn add(&mut self, term: Term) -> Result<()> {
        if term.op.len() != self.n {
            return Err(Error::LengthMismatch { left: self.n, right: term.op.len() });
        }
        if let Some(idx) = self.find(&term.op, term.stage) {
            self.terms[idx].coeff += term.coeff;
            if self.terms[idx].coeff.abs() < COEFF_EPS {
                self.terms.remove(idx);
            }
        } else if term.coeff.abs() >= COEFF_EPS {
            self.terms.push(term);
        }
        Ok(())
    }

    pub(crate) fn find(&self, op: &PauliString, stage: Stage) -> Option<usize> {
        self.terms.iter().position(|t| t.stage == stage && t.op == *op)
    }

    /// Number of weight-2 entries, one per two-qubit gate in each Trotter step.
    pub fn two_body_count(&self) -> usize {
        self.terms.iter().filter(|t| t.op.weight() == 2).count()
    }

    pub fn count_with_weight(&self, w: usize) -> usize {
        self.terms.iter().filter(|t| t.op.weight() == w).count()
    }

    /// One term per line, `coefficient<TAB>pauli-string`. Terms sitting in a
    /// non-default stage carry a third column naming it.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            let _ = write!(out, "{}\t{}", t.coeff, t.op);
            if t.stage != Stage::default_for(&t.op) {
                let _ = write!(out, "\t{}", t.stage.tag());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut h: Option<Hamiltonian> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 2 || cols.len() > 3 {
                return Err(Error::Config(format!("hamiltonian line {}: expected 2 or 3 columns", lineno + 1)));
            }
            let coeff: f64 = cols[0]
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("hamiltonian line {}: bad coefficient", lineno + 1)))?;
            let op: PauliString = cols[1].trim().parse()?;
            let term = match cols.get(2) {
                Some(tag) => {
                    let stage = Stage::from_tag(tag.trim()).ok_or_else(|| {
                        Error::Config(format!("hamiltonian line {}: unknown stage {tag}", lineno + 1))
                    })?;
                    Term::in_stage(coeff, op, stage)
                }
                None => Term::new(coeff, op),
            };
            let ham = h.get_or_insert_with(|| Hamiltonian::new(term.op.len()));
            ham.add(term)?;
        }
        h.ok_or_else(|| Error::Config("empty hamiltonian".into()))
    }
}

/// Open-boundary transverse-field Ising or XZ Heisenberg chain.
pub fn build_hamiltonian(params: &ModelParams) -> Result<Hamiltonian> {
    params.validate()?;
    let n = params.n;
    let mut h = Hamiltonian::new(n);
    let bonds = 0..n - 1;
    match params.kind {
        ModelKind::Ising => {
            for i in bonds {
                h.add(Term::new(params.j, PauliString::two(n, i, i + 1, Pauli::Z)?))?;
            }
        }
        ModelKind::HeisenbergXz => {
            for i in bonds.clone() {
                h.add(Term::new(params.j_x, PauliString::two(n, i, i + 1, Pauli::X)?))?;
            }
            for i in bonds {
                h.add(Term::new(params.j_z, PauliString::two(n, i, i + 1, Pauli::Z)?))?;
            }
        }
    }
    for i in 0..n {
        h.add(Term::new(params.h_x, PauliString::single(n, i, Pauli::X)?))?;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ising_hundred_sites() {
        let h = build_hamiltonian(&ModelParams::ising(100, 1.0, 0.75)).unwrap();
        assert_eq!(h.count_with_weight(2), 99);
        assert_eq!(h.count_with_weight(1), 100);
        assert!(h.terms().iter().filter(|t| t.op.weight() == 2).all(|t| t.coeff == 1.0));
        assert!(h.terms().iter().filter(|t| t.op.weight() == 1).all(|t| t.coeff == 0.75));
    }

    #[test]
    fn heisenberg_three_sites() {
        let h = build_hamiltonian(&ModelParams::heisenberg(3, 0.5, 2.0, 0.5)).unwrap();
        let count = |s: &str| h.terms().iter().filter(|t| t.op.to_string() == s).count();
        assert_eq!(h.len(), 7);
        assert_eq!(count("XXI") + count("IXX"), 2);
        assert_eq!(count("ZZI") + count("IZZ"), 2);
        assert_eq!(h.count_with_weight(1), 3);
        let zz = h.terms().iter().find(|t| t.op.to_string() == "ZZI").unwrap();
        assert_eq!(zz.coeff, 2.0);
    }

    #[test]
    fn field_free_pair() {
        let h = build_hamiltonian(&ModelParams::ising(2, 1.0, 0.0)).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.terms()[0].op.to_string(), "ZZ");
        assert_eq!(h.terms()[0].coeff, 1.0);
    }

    #[test]
    fn too_few_sites() {
        assert!(build_hamiltonian(&ModelParams::ising(1, 1.0, 0.5)).is_err());
    }

    #[test]
    fn merging_and_cancellation() {
        let mut h = Hamiltonian::new(2);
        let zz: PauliString = "ZZ".parse().unwrap();
        h.add(Term::new(1.0, zz.clone())).unwrap();
        h.add(Term::new(0.5, zz.clone())).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.terms()[0].coeff, 1.5);
        h.add(Term::new(1.5, zz.clone().with_phase(Phase::Minus))).unwrap();
        assert!(h.is_empty());
    }

    #[test]
    fn text_format_round_trip() {
        let mut h = build_hamiltonian(&ModelParams::heisenberg(3, 0.5, 2.0, 0.5)).unwrap();
        h.add(Term::in_stage(0.5, "ZZI".parse().unwrap(), Stage::XxBonds)).unwrap();
        let text = h.to_text();
        assert!(text.contains("0.5\tZZI\txx-stage"));
        assert!(text.lines().next().unwrap().starts_with("0.5\tXXI"));
        let back = Hamiltonian::from_text(&text).unwrap();
        assert_eq!(back, h);
    }
}
