use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Hamiltonian, Stage, Term};
use crate::error::{Error, Result};
use crate::pauli::Pauli;

/// Time grid of a first-order product formula. The step size is stored and
/// the total time derived from it, so `dt * steps` is exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrotterSpec {
    dt: f64,
    steps: usize,
}

impl TrotterSpec {
    pub fn new(total_time: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParams("trotter steps must be positive".into()));
        }
        if !total_time.is_finite() || total_time < 0.0 {
            return Err(Error::InvalidParams(format!("invalid total time {total_time}")));
        }
        Ok(Self { dt: total_time / steps as f64, steps })
    }

    pub fn from_dt(dt: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !dt.is_finite() || dt < 0.0 {
            return Err(Error::InvalidParams(format!("invalid trotter grid dt={dt} steps={steps}")));
        }
        Ok(Self { dt, steps })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.steps as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Rx,
    Rzz,
    Rxx,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Rx => 1,
            GateKind::Rzz | GateKind::Rxx => 2,
        }
    }

    /// The Pauli letter the rotation is generated by.
    pub fn axis(self) -> Pauli {
        match self {
            GateKind::Rx | GateKind::Rxx => Pauli::X,
            GateKind::Rzz => Pauli::Z,
        }
    }

    fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Rzz => "RZZ",
            GateKind::Rxx => "RXX",
        }
    }
}

/// `exp(-i angle/2 · P)` with `P` the kind's Pauli on `sites`.
///
/// `noise_scale` multiplies the error probability of the channel attached
/// after this gate; folded copies may carry a value above 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub sites: Vec<usize>,
    pub angle: f64,
    pub noise_scale: f64,
}

impl Gate {
    pub fn new(kind: GateKind, sites: Vec<usize>, angle: f64) -> Self {
        debug_assert_eq!(kind.arity(), sites.len());
        Self { kind, sites, angle, noise_scale: 1.0 }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind.arity() == 2
    }

    pub fn inverse(&self) -> Gate {
        Gate { angle: -self.angle, ..self.clone() }
    }
}

/// Ordered gate layers. `step_ends[k]` is the number of layers that make up
/// the first `k + 1` Trotter steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterCircuit {
    pub n: usize,
    pub layers: Vec<Vec<Gate>>,
    pub step_ends: Vec<usize>,
    /// Structural noise gain relative to the unfolded circuit.
    pub realized_gain: f64,
}

impl TrotterCircuit {
    pub fn steps(&self) -> usize {
        self.step_ends.len()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates().filter(|g| g.is_two_qubit()).count()
    }

    /// Two-qubit gates in the first `steps` Trotter steps.
    pub fn two_qubit_count_upto(&self, steps: usize) -> usize {
        if steps == 0 {
            return 0;
        }
        let end = self.step_ends[steps.min(self.steps()) - 1];
        self.layers[..end].iter().flatten().filter(|g| g.is_two_qubit()).count()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flatten()
    }

    /// Layer index range belonging to Trotter step `k` (0-based).
    pub fn step_layers(&self, k: usize) -> std::ops::Range<usize> {
        let start = if k == 0 { 0 } else { self.step_ends[k - 1] };
        start..self.step_ends[k]
    }

    /// The circuit of the first `steps` Trotter steps.
    pub fn truncated(&self, steps: usize) -> Result<TrotterCircuit> {
        if steps > self.steps() {
            return Err(Error::InvalidParams(format!("{steps} steps requested from {}", self.steps())));
        }
        let end = if steps == 0 { 0 } else { self.step_ends[steps - 1] };
        Ok(TrotterCircuit {
            n: self.n,
            layers: self.layers[..end].to_vec(),
            step_ends: self.step_ends[..steps].to_vec(),
            realized_gain: self.realized_gain,
        })
    }

    /// One gate per line, `kind sites angle`, with `---` after each step.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for k in 0..self.steps() {
            for layer in &self.layers[self.step_layers(k)] {
                for g in layer {
                    let sites: Vec<String> = g.sites.iter().map(|s| s.to_string()).collect();
                    let _ = writeln!(out, "{} {} {}", g.kind.name(), sites.join(","), g.angle);
                }
            }
            out.push_str("---\n");
        }
        out
    }

    pub fn validate_layers(&self) -> Result<()> {
        for layer in &self.layers {
            let mut used = vec![false; self.n];
            for g in layer {
                for &s in &g.sites {
                    if s >= self.n {
                        return Err(Error::SiteOutOfRange { site: s, n: self.n });
                    }
                    if used[s] {
                        return Err(Error::InvalidParams(format!("site {s} used twice in one layer")));
                    }
                    used[s] = true;
                }
            }
        }
        Ok(())
    }
}

fn gate_for(term: &Term, dt: f64) -> Result<(Gate, Option<usize>)> {
    let support = term.op.support();
    let unsupported = |reason: &str| Error::UnsupportedTerm {
        op: term.op.to_string(),
        coeff: term.coeff,
        reason: reason.to_string(),
    };
    let angle = 2.0 * term.coeff * dt;
    match support.as_slice() {
        [s] => {
            if term.op.letter(*s) != Pauli::X || term.stage != Stage::Fields {
                return Err(unsupported("single-site terms must be X fields"));
            }
            Ok((Gate::new(GateKind::Rx, vec![*s], angle), None))
        }
        [a, b] => {
            if b - a != 1 {
                return Err(unsupported("two-body terms must couple nearest neighbours"));
            }
            if term.stage == Stage::Fields {
                return Err(unsupported("two-body term in the field stage"));
            }
            let kind = match (term.op.letter(*a), term.op.letter(*b)) {
                (Pauli::Z, Pauli::Z) => GateKind::Rzz,
                (Pauli::X, Pauli::X) => GateKind::Rxx,
                _ => return Err(unsupported("two-body terms must be XX or ZZ")),
            };
            Ok((Gate::new(kind, vec![*a, *b], angle), Some(*a)))
        }
        _ => Err(unsupported("weight must be 1 or 2")),
    }
}

/// First-order product formula. Each step applies, per bond stage, the odd
/// bonds `(1,2),(3,4),…` then the even bonds `(0,1),(2,3),…`, followed by
/// the single-site field layer.
pub fn trotterize(h: &Hamiltonian, spec: &TrotterSpec) -> Result<TrotterCircuit> {
    let n = h.n();
    let dt = spec.dt();

    let mut odd_even: Vec<(Stage, Vec<Gate>, Vec<Gate>)> = Vec::new();
    let mut fields: Vec<Gate> = Vec::new();
    for stage in [Stage::XxBonds, Stage::ZzBonds] {
        let mut odd = Vec::new();
        let mut even = Vec::new();
        for t in h.terms().iter().filter(|t| t.stage == stage) {
            let (gate, left) = gate_for(t, dt)?;
            match left {
                Some(a) if a % 2 == 1 => odd.push(gate),
                Some(_) => even.push(gate),
                None => unreachable!("bond stage yielded a single-site gate"),
            }
        }
        odd.sort_by_key(|g| g.sites[0]);
        even.sort_by_key(|g| g.sites[0]);
        odd_even.push((stage, odd, even));
    }
    for t in h.terms().iter().filter(|t| t.stage == Stage::Fields) {
        fields.push(gate_for(t, dt)?.0);
    }
    fields.sort_by_key(|g| g.sites[0]);

    let mut step_layers: Vec<Vec<Gate>> = Vec::new();
    for (_, odd, even) in &odd_even {
        for layer in [odd, even] {
            if !layer.is_empty() {
                step_layers.push(layer.clone());
            }
        }
    }
    if !fields.is_empty() {
        step_layers.push(fields);
    }

    let mut layers = Vec::with_capacity(step_layers.len() * spec.steps());
    let mut step_ends = Vec::with_capacity(spec.steps());
    for _ in 0..spec.steps() {
        layers.extend(step_layers.iter().cloned());
        step_ends.push(layers.len());
    }

    let circuit = TrotterCircuit { n, layers, step_ends, realized_gain: 1.0 };
    circuit.validate_layers().map_err(|e| match e {
        Error::InvalidParams(msg) => Error::UnsupportedTerm {
            op: "<layer>".into(),
            coeff: 0.0,
            reason: format!("two terms share a site within one stage ({msg})"),
        },
        other => other,
    })?;
    Ok(circuit)
}
