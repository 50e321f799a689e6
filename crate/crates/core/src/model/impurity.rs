use serde::{Deserialize, Serialize};

use super::{Hamiltonian, ModelKind, ModelParams, Stage, Term, COEFF_EPS};
use crate::dense;
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

/// Largest chain the dense commutator fallback of [`verify_symmetry`] runs on.
const DENSE_SYMMETRY_MAX_SITES: usize = 6;

/// A local perturbation that makes `target` a symmetry of the chain while
/// keeping the number of two-qubit terms fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Impurity {
    pub removed: Vec<Term>,
    pub added: Vec<Term>,
    pub target: PauliString,
    pub h_i: f64,
}

impl Impurity {
    pub fn empty(target: PauliString) -> Self {
        Self { removed: Vec::new(), added: Vec::new(), target, h_i: 0.0 }
    }

    /// Change in the number of two-body terms after applying the impurity.
    pub fn two_body_delta(&self) -> isize {
        let count = |ts: &[Term]| ts.iter().filter(|t| t.op.weight() == 2).count() as isize;
        count(&self.added) - count(&self.removed)
    }
}

fn unsupported(target: &PauliString, reason: &str) -> Error {
    Error::UnsupportedTarget { target: target.to_string(), reason: reason.to_string() }
}

/// Builds the impurity that enforces `target` as a symmetry.
///
/// Ising accepts `Z_i` (the local field is removed) and `Z_i Z_{i+1}` (both
/// fields removed). The XZ Heisenberg chain accepts `Z_i`: the field on `i`
/// is removed and each `XX` bond touching `i` is replaced by a `ZZ` bond of
/// the same strength placed in the `XX` stage, so gate positions survive.
/// The impurity field equals the model field so the removals cancel exactly.
pub fn make_impurity(h: &Hamiltonian, target: &PauliString, params: &ModelParams) -> Result<Impurity> {
    let n = h.n();
    if target.len() != n {
        return Err(Error::LengthMismatch { left: n, right: target.len() });
    }
    let support = target.support();
    if support.iter().any(|&s| target.letter(s) != Pauli::Z) {
        return Err(unsupported(target, "targets must be products of Z"));
    }
    let h_i = params.h_x;
    let field = |site: usize| -> Result<Option<Term>> {
        if h_i.abs() < COEFF_EPS {
            return Ok(None);
        }
        Ok(Some(Term::new(h_i, PauliString::single(n, site, Pauli::X)?)))
    };

    let mut imp = Impurity { removed: Vec::new(), added: Vec::new(), target: target.unsigned(), h_i };
    match (params.kind, support.as_slice()) {
        (ModelKind::Ising, [i]) => {
            imp.removed.extend(field(*i)?);
        }
        (ModelKind::Ising, [i, j]) if j - i == 1 => {
            imp.removed.extend(field(*i)?);
            imp.removed.extend(field(*j)?);
        }
        (ModelKind::Ising, _) => {
            return Err(unsupported(target, "ising impurities exist for Z_i and Z_i Z_(i+1)"));
        }
        (ModelKind::HeisenbergXz, [i]) => {
            let i = *i;
            imp.removed.extend(field(i)?);
            let mut bonds = Vec::new();
            if i > 0 {
                bonds.push((i - 1, i));
            }
            if i + 1 < n {
                bonds.push((i, i + 1));
            }
            if params.j_x.abs() >= COEFF_EPS {
                for (a, b) in bonds {
                    imp.removed.push(Term::new(params.j_x, PauliString::two(n, a, b, Pauli::X)?));
                    imp.added.push(Term::in_stage(
                        params.j_x,
                        PauliString::two(n, a, b, Pauli::Z)?,
                        Stage::XxBonds,
                    ));
                }
            }
        }
        (ModelKind::HeisenbergXz, _) => {
            return Err(unsupported(target, "heisenberg impurities exist for Z_i only"));
        }
    }
    Ok(imp)
}

/// `H + I`: removes each listed term (it must be present with at least that
/// coefficient magnitude) and adds the new ones.
pub fn apply_impurity(h: &Hamiltonian, imp: &Impurity) -> Result<Hamiltonian> {
    let mut out = h.clone();
    for t in &imp.removed {
        if out.find(&t.op, t.stage).is_none() {
            return Err(Error::MissingTerm { op: t.op.to_string() });
        }
        out.add(Term { coeff: -t.coeff, ..t.clone() })?;
    }
    for t in &imp.added {
        out.add(t.clone())?;
    }
    Ok(out)
}

/// True iff `[H, S] = 0`. Checked term by term; when some term anticommutes
/// the dense commutator decides for chains of up to six sites, catching
/// cancellations between terms.
pub fn verify_symmetry(h: &Hamiltonian, s: &PauliString) -> bool {
    if h.n() != s.len() {
        return false;
    }
    let termwise = h.terms().iter().all(|t| t.op.commutes(s).unwrap_or(false));
    if termwise {
        return true;
    }
    if h.n() <= DENSE_SYMMETRY_MAX_SITES {
        let hm = dense::hamiltonian_matrix(h);
        let sm = dense::pauli_matrix(s);
        let comm = &hm * &sm - &sm * &hm;
        return comm.iter().all(|z| z.norm() < 1e-10);
    }
    false
}
