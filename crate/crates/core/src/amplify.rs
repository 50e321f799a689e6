//! Noise amplification by analog channel scaling or by structural folding
//! of two-qubit gates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Gate, TrotterCircuit};
use crate::sim::NoiseModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplificationMode {
    /// Channel probabilities multiplied by the gain.
    Analog,
    /// Gates replaced by `U U† U` until the gate count matches the gain.
    #[default]
    Folding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldStrategy {
    #[default]
    Stride,
    SeededRandom,
}

/// Gains assumed by the extrapolation and how they are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSchedule {
    pub assumed_gains: Vec<f64>,
    #[serde(default)]
    pub mode: AmplificationMode,
    #[serde(default)]
    pub folding_strategy: FoldStrategy,
    /// Extra error factor on the inserted copies of a folded gate.
    #[serde(default = "one")]
    pub fold_noise_multiplier: f64,
}

fn one() -> f64 {
    1.0
}

impl GainSchedule {
    pub fn folding(assumed_gains: Vec<f64>) -> Self {
        Self {
            assumed_gains,
            mode: AmplificationMode::Folding,
            folding_strategy: FoldStrategy::Stride,
            fold_noise_multiplier: 1.0,
        }
    }

    pub fn analog(assumed_gains: Vec<f64>) -> Self {
        Self { mode: AmplificationMode::Analog, ..Self::folding(assumed_gains) }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.assumed_gains;
        if g.is_empty() || (g[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams("gain schedule must start at 1".into()));
        }
        if g.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams(format!("gains must increase strictly: {g:?}")));
        }
        if !(self.fold_noise_multiplier.is_finite() && self.fold_noise_multiplier >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "fold noise multiplier must be >= 1, got {}",
                self.fold_noise_multiplier
            )));
        }
        Ok(())
    }

    /// The circuit to run for `gain` and the analog gain to run it at.
    pub fn amplify(&self, circuit: &TrotterCircuit, gain: f64, seed: u64) -> Result<(TrotterCircuit, f64)> {
        match self.mode {
            AmplificationMode::Analog => {
                let mut c = circuit.clone();
                c.realized_gain = gain;
                Ok((c, gain))
            }
            AmplificationMode::Folding => Ok((
                fold_gates_with(circuit, gain, self.folding_strategy, seed, self.fold_noise_multiplier)?,
                1.0,
            )),
        }
    }
}

/// Every channel probability multiplied by `g`.
pub fn scale_noise(noise: &NoiseModel, g: f64) -> Result<NoiseModel> {
    if !(g.is_finite() && g >= 0.0) {
        return Err(Error::InvalidNoise(format!("gain {g}")));
    }
    Ok(NoiseModel {
        two_qubit: noise.two_qubit.scaled(g)?,
        one_qubit: noise.one_qubit.as_ref().map(|c| c.scaled(g)).transpose()?,
        ..noise.clone()
    })
}

/// [`fold_gates_with`] with ideal folded copies.
pub fn fold_gates(circuit: &TrotterCircuit, factor: f64, strategy: FoldStrategy, seed: u64) -> Result<TrotterCircuit> {
    fold_gates_with(circuit, factor, strategy, seed, 1.0)
}

/// Folds `k = round((factor − 1)/2 · N₂)` two-qubit gates, `U → U U† U`.
///
/// Factors above 3 fold every gate `⌊k/N₂⌋` times and the remainder once
/// more. The inserted copies carry `noise_multiplier` on top of the gate's
/// own noise scale. Folded gates of a layer are followed by a layer of
/// their inverses and a layer of their repeats, keeping layers disjoint.
pub fn fold_gates_with(
    circuit: &TrotterCircuit,
    factor: f64,
    strategy: FoldStrategy,
    seed: u64,
    noise_multiplier: f64,
) -> Result<TrotterCircuit> {
    if !(factor.is_finite() && factor >= 1.0) {
        return Err(Error::InvalidFoldFactor(factor));
    }
    let n2 = circuit.two_qubit_count();
    if n2 == 0 {
        return Err(Error::FoldResolution { factor, two_qubit: 0 });
    }
    let k = ((factor - 1.0) / 2.0 * n2 as f64).round() as usize;
    if k == 0 {
        if factor > 1.0 {
            return Err(Error::FoldResolution { factor, two_qubit: n2 });
        }
        return Ok(TrotterCircuit { realized_gain: 1.0, ..circuit.clone() });
    }

    let mut folds = vec![k / n2; n2];
    let rest = k % n2;
    if rest > 0 {
        let picks: Vec<usize> = match strategy {
            FoldStrategy::Stride => {
                let stride = n2 / rest;
                (0..rest).map(|j| j * stride).collect()
            }
            FoldStrategy::SeededRandom => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rand::seq::index::sample(&mut rng, n2, rest).into_vec()
            }
        };
        for p in picks {
            folds[p] += 1;
        }
    }

    let mut layers = Vec::with_capacity(circuit.layers.len());
    let mut step_ends = Vec::with_capacity(circuit.steps());
    let mut index = 0usize;
    for step in 0..circuit.steps() {
        for layer in &circuit.layers[circuit.step_layers(step)] {
            let mut counted: Vec<(&Gate, usize)> = Vec::new();
            for g in layer {
                if g.is_two_qubit() {
                    counted.push((g, folds[index]));
                    index += 1;
                }
            }
            layers.push(layer.clone());
            let depth = counted.iter().map(|(_, c)| *c).max().unwrap_or(0);
            for rep in 1..=depth {
                let copy = |g: &Gate| Gate { noise_scale: g.noise_scale * noise_multiplier, ..g.clone() };
                let chosen: Vec<&Gate> = counted.iter().filter(|(_, c)| *c >= rep).map(|(g, _)| *g).collect();
                layers.push(chosen.iter().map(|g| copy(&g.inverse())).collect());
                layers.push(chosen.iter().map(|g| copy(g)).collect());
            }
        }
        step_ends.push(layers.len());
    }

    Ok(TrotterCircuit {
        n: circuit.n,
        layers,
        step_ends,
        realized_gain: (n2 + 2 * k) as f64 / n2 as f64,
    })
}

/// `realized_gain − assumed` of a folded circuit.
pub fn realized_vs_assumed(folded: &TrotterCircuit, assumed: f64) -> f64 {
    folded.realized_gain - assumed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{circuit_unitary, operator_norm};
    use crate::model::{build_hamiltonian, trotterize, GateKind, ModelParams, TrotterSpec};

    fn bonds_only(n2: usize) -> TrotterCircuit {
        // One RZZ per layer so any count is reachable.
        let layers: Vec<Vec<Gate>> = (0..n2).map(|i| vec![Gate::new(GateKind::Rzz, vec![0, 1], 0.1 * i as f64)]).collect();
        TrotterCircuit { n: 2, layers, step_ends: vec![n2], realized_gain: 1.0 }
    }

    #[test]
    fn scale_noise_examples() {
        let base = NoiseModel::depolarizing(0.003).unwrap();
        assert_eq!(scale_noise(&base, 1.0).unwrap(), base);
        let up = scale_noise(&base, 1.5).unwrap();
        assert!((up.two_qubit.total_error() - 0.0045).abs() < 1e-15);
        assert!(scale_noise(&NoiseModel::depolarizing(0.8).unwrap(), 1.5).is_err());
    }

    #[test]
    fn fold_examples() {
        let c = bonds_only(100);
        let f = fold_gates(&c, 1.5, FoldStrategy::Stride, 0).unwrap();
        assert_eq!(f.two_qubit_count(), 150);
        assert_eq!(f.realized_gain, 1.5);

        let same = fold_gates(&c, 1.0, FoldStrategy::Stride, 0).unwrap();
        assert_eq!(same, c);

        let f3 = fold_gates(&bonds_only(10), 3.0, FoldStrategy::Stride, 0).unwrap();
        assert_eq!(f3.two_qubit_count(), 30);
        assert_eq!(f3.realized_gain, 3.0);
    }

    #[test]
    fn realized_gain_mismatch() {
        let f = fold_gates(&bonds_only(99), 1.2, FoldStrategy::Stride, 0).unwrap();
        assert_eq!(f.two_qubit_count(), 99 + 20);
        assert!((realized_vs_assumed(&f, 1.2) - (119.0 / 99.0 - 1.2)).abs() < 1e-15);
        let f4 = fold_gates(&bonds_only(4), 1.5, FoldStrategy::Stride, 0).unwrap();
        assert_eq!(realized_vs_assumed(&f4, 1.5), 0.0);
        assert_eq!(realized_vs_assumed(&bonds_only(4), 1.0), 0.0);
    }

    #[test]
    fn too_coarse_fails() {
        assert!(matches!(
            fold_gates(&bonds_only(3), 1.1, FoldStrategy::Stride, 0),
            Err(Error::FoldResolution { .. })
        ));
        assert!(fold_gates(&bonds_only(3), 0.5, FoldStrategy::Stride, 0).is_err());
    }

    #[test]
    fn folding_preserves_the_unitary() {
        let h = build_hamiltonian(&ModelParams::heisenberg(4, 0.5, 2.0, 0.5)).unwrap();
        let c = trotterize(&h, &TrotterSpec::new(1.0, 3).unwrap()).unwrap();
        let u = circuit_unitary(&c);
        for (factor, strategy) in [(1.2, FoldStrategy::Stride), (1.5, FoldStrategy::SeededRandom), (4.2, FoldStrategy::Stride)] {
            let f = fold_gates(&c, factor, strategy, 9).unwrap();
            f.validate_layers().unwrap();
            assert_eq!(f.steps(), c.steps());
            assert!(operator_norm(&(circuit_unitary(&f) - &u)) < 1e-8);
        }
    }

    #[test]
    fn inserted_copies_carry_the_multiplier() {
        let f = fold_gates_with(&bonds_only(4), 1.5, FoldStrategy::Stride, 0, 1.05).unwrap();
        let scales: Vec<f64> = f.gates().map(|g| g.noise_scale).collect();
        assert_eq!(scales.iter().filter(|&&s| s == 1.05).count(), 2);
        assert_eq!(scales.iter().filter(|&&s| s == 1.0).count(), 4);
    }

    #[test]
    fn seeded_random_is_deterministic() {
        let c = bonds_only(50);
        let a = fold_gates(&c, 1.4, FoldStrategy::SeededRandom, 4).unwrap();
        let b = fold_gates(&c, 1.4, FoldStrategy::SeededRandom, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.two_qubit_count(), 50 + 2 * 10);
    }

    #[test]
    fn schedule_validation() {
        assert!(GainSchedule::folding(vec![1.0, 1.2, 1.5]).validate().is_ok());
        assert!(GainSchedule::folding(vec![1.2, 1.5]).validate().is_err());
        assert!(GainSchedule::folding(vec![1.0, 1.5, 1.2]).validate().is_err());
        let mut s = GainSchedule::analog(vec![1.0, 2.0]);
        s.fold_noise_multiplier = 0.9;
        assert!(s.validate().is_err());
    }
}
