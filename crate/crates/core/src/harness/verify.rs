use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{apply_impurity, build_hamiltonian, make_impurity, ModelParams};
use crate::pauli::{Pauli, PauliString};
use crate::sim::{channel_distance_bound, lindblad_expectations, two_qubit_cliffords, DensityMatrix, PauliChannel};

pub const DECAY_TOLERANCE: f64 = 1e-5;
pub const LOG_RATIO_TOLERANCE: f64 = 1e-3;

/// Closed-form decay of conserved Paulis under uniform single-site
/// depolarizing noise, `⟨S(t)⟩ = ⟨S(0)⟩ e^{−4λ·wt(S)·t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub lambda: f64,
    pub t: f64,
    pub dt: f64,
    /// Largest `|⟨X⊗X⊗X⟩ − e^{−12λt}|` from `|+++⟩`.
    pub global_max_error: f64,
    /// Largest `|ln⟨S₁⟩ / ln⟨S₂⟩ − 1/2|` for enforced symmetries of weight 1 and 2.
    pub log_ratio_max_error: f64,
    pub passed: bool,
}

pub fn verify_decay(lambda: f64, t: f64, dt: f64) -> Result<DecayReport> {
    let params = ModelParams::ising(3, 1.0, 0.75);
    let h = build_hamiltonian(&params)?;
    let xxx = PauliString::uniform(3, Pauli::X);
    let (times, values) = lindblad_expectations(&h, lambda, &DensityMatrix::plus_state(3), t, dt, &[xxx])?;
    let rate = 4.0 * lambda * 3.0;
    let global_max_error =
        times.iter().zip(&values).map(|(t, v)| (v[0] - (-rate * t).exp()).abs()).fold(0.0, f64::max);

    let s1 = PauliString::single(3, 1, Pauli::Z)?;
    let s2 = PauliString::two(3, 0, 1, Pauli::Z)?;
    let mut logs = Vec::new();
    for s in [&s1, &s2] {
        let twin = apply_impurity(&h, &make_impurity(&h, s, &params)?)?;
        let (_, v) = lindblad_expectations(&twin, lambda, &DensityMatrix::zero_state(3), t, dt, std::slice::from_ref(s))?;
        logs.push(v.iter().map(|r| r[0].ln()).collect::<Vec<f64>>());
    }
    let log_ratio_max_error =
        logs[0].iter().zip(&logs[1]).skip(1).map(|(a, b)| (a / b - 0.5).abs()).fold(0.0, f64::max);

    Ok(DecayReport {
        lambda,
        t,
        dt,
        global_max_error,
        log_ratio_max_error,
        passed: global_max_error < DECAY_TOLERANCE && log_ratio_max_error < LOG_RATIO_TOLERANCE,
    })
}

/// Choi lower bounds against `4p` over random pairs of two-qubit Cliffords.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub pairs: usize,
    pub probabilities: Vec<f64>,
    pub cases: usize,
    pub violations: usize,
    /// Largest `lower / bound`.
    pub max_ratio: f64,
    pub passed: bool,
}

pub fn verify_bound(pairs: usize, probabilities: &[f64], seed: u64) -> Result<BoundReport> {
    let group = two_qubit_cliffords();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<(usize, usize)> =
        (0..pairs).map(|_| (rng.random_range(0..group.len()), rng.random_range(0..group.len()))).collect();
    let mut violations = 0;
    let mut max_ratio = 0.0f64;
    for &p in probabilities {
        let channel = PauliChannel::depolarizing(2, p)?;
        for &(a, b) in &picks {
            let (lower, bound) = channel_distance_bound(&channel, &group[a], &group[b])?;
            if lower > bound {
                violations += 1;
            }
            max_ratio = max_ratio.max(lower / bound);
        }
    }
    Ok(BoundReport {
        pairs,
        probabilities: probabilities.to_vec(),
        cases: pairs * probabilities.len(),
        violations,
        max_ratio,
        passed: violations == 0,
    })
}
