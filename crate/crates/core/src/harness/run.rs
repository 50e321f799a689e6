use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::amplify::AmplificationMode;
use crate::error::{Error, Result};
use crate::mitigate::{
    guess_apply_with, guess_learn_with, intercept_weights, is_physical, mitigate_with_fallback, propagated_sigma,
    richardson, zne_exponential, zne_linear, GuessCoefficients, GuessMode, MeasurementMatrix, Method,
    MitigationResult,
};
use crate::model::{apply_impurity, build_hamiltonian, make_impurity, trotterize, verify_symmetry, TrotterCircuit};
use crate::pauli::PauliString;
use crate::select::{detect_sigma_outliers, select_best, OutlierPolicy, SymmetryRecord};
use crate::sim::{derive_seed, expectations_at_steps, sample_from_value, DensityMatrix, NoiseModel, UncertainValue};

/// Below this magnitude of the ideal value a relative error is unreliable.
pub const RELIABLE_IDEAL: f64 = 0.05;

const FOLD_STREAM: u64 = 1;
const TARGET_STREAM: u64 = 2;
const SYMMETRY_STREAM: u64 = 3;

/// Reporting order of the methods.
const METHOD_ORDER: [Method; 6] =
    [Method::Raw, Method::ZneLin, Method::ZneExp, Method::Richardson, Method::GuessLin, Method::GuessExp];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeError {
    pub pct: f64,
    pub abs: f64,
    /// False when `|ideal|` is below [`RELIABLE_IDEAL`].
    pub reliable: bool,
}

/// `100·|ideal − mean(mitigated)| / |ideal|`.
pub fn relative_error(mitigated: &[f64], ideal: f64) -> RelativeError {
    let avg = mitigated.iter().sum::<f64>() / mitigated.len() as f64;
    let abs = (ideal - avg).abs();
    RelativeError { pct: 100.0 * abs / ideal.abs(), abs, reliable: ideal.abs() >= RELIABLE_IDEAL }
}

/// Two-qubit gate counts of a target circuit and its twin at one gain and step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateCountCheck {
    pub observable: usize,
    pub gain: f64,
    pub step: usize,
    pub target: usize,
    pub twin: usize,
}

/// Noise-exact expectation values of one experiment, before shot sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactData {
    pub config: ExperimentConfig,
    pub labels: Vec<String>,
    pub observables: Vec<PauliString>,
    pub steps: Vec<usize>,
    /// `[step][observable]` of the noiseless target circuit.
    pub ideal: Vec<Vec<f64>>,
    /// `[gain][step][observable]`.
    pub target: Vec<Vec<Vec<f64>>>,
    /// `[observable][gain][step]` of each observable's twin.
    pub symmetry: Vec<Vec<Vec<f64>>>,
    /// Ideal symmetry value, its expectation in the initial state.
    pub symmetry_ideal: Vec<f64>,
    /// `[gain][step]`.
    pub realized_gains: Vec<Vec<f64>>,
    pub gate_counts: Vec<GateCountCheck>,
}

struct Job<'a> {
    circuit: usize,
    gain: usize,
    /// `None` runs every measured step in one pass.
    step: Option<usize>,
    source: &'a TrotterCircuit,
    observables: &'a [PauliString],
}

struct JobOutput {
    circuit: usize,
    gain: usize,
    /// `(step index, values per observable, two-qubit count, realized gain)`.
    rows: Vec<(usize, Vec<f64>, usize, f64)>,
}

fn run_job(job: &Job<'_>, config: &ExperimentConfig, noise: &NoiseModel, steps: &[usize]) -> Result<JobOutput> {
    let schedule = config.gains.schedule();
    let gain = schedule.assumed_gains[job.gain];
    let rho0 = DensityMatrix::zero_state(job.source.n);
    let rows = match job.step {
        None => {
            let (circuit, analog) = match schedule.mode {
                AmplificationMode::Analog => schedule.amplify(job.source, gain, 0)?,
                AmplificationMode::Folding => (job.source.clone(), 1.0),
            };
            let values = expectations_at_steps(&circuit, noise, analog, &rho0, steps, job.observables)?;
            values
                .into_iter()
                .enumerate()
                .map(|(k, v)| (k, v, circuit.two_qubit_count_upto(steps[k]), gain))
                .collect()
        }
        Some(k) => {
            let truncated = job.source.truncated(steps[k])?;
            let seed = derive_seed(config.seed, &[FOLD_STREAM, job.gain as u64, steps[k] as u64]);
            let (circuit, analog) = schedule.amplify(&truncated, gain, seed)?;
            let values = expectations_at_steps(&circuit, noise, analog, &rho0, &[steps[k]], job.observables)?;
            let v = values.into_iter().next().unwrap_or_default();
            vec![(k, v, circuit.two_qubit_count(), circuit.realized_gain)]
        }
    };
    Ok(JobOutput { circuit: job.circuit, gain: job.gain, rows })
}

/// Simulates the target circuit, its noiseless reference and every twin at
/// every gain. Independent of the sampling seed; folding positions drawn at
/// random use the configured seed.
pub fn simulate_exact(config: &ExperimentConfig) -> Result<ExactData> {
    config.validate()?;
    let observables = config.observables()?;
    let (labels, observables): (Vec<String>, Vec<PauliString>) = observables.into_iter().unzip();
    let h = build_hamiltonian(&config.model)?;
    let spec = config.trotter.spec()?;
    let circuit = trotterize(&h, &spec)?;
    let mut twins = Vec::with_capacity(observables.len());
    for o in &observables {
        let imp = make_impurity(&h, o, &config.model)?;
        let h_twin = apply_impurity(&h, &imp)?;
        if !verify_symmetry(&h_twin, o) {
            return Err(Error::InvariantViolation(format!("twin of {o} does not conserve it")));
        }
        twins.push(trotterize(&h_twin, &spec)?);
    }
    let steps = config.trotter.measured_steps();
    let noise = config.noise.noise_model()?;
    let rho0 = DensityMatrix::zero_state(config.model.n);
    let symmetry_ideal = observables.iter().map(|o| rho0.expectation(o)).collect::<Result<Vec<_>>>()?;
    let ideal = expectations_at_steps(&circuit, &NoiseModel::noiseless(), 1.0, &rho0, &steps, &observables)?;

    let gains = &config.gains.assumed;
    let twin_obs: Vec<[PauliString; 1]> = observables.iter().map(|o| [o.clone()]).collect();
    let mut jobs = Vec::new();
    let sources = std::iter::once((&circuit, observables.as_slice()))
        .chain(twins.iter().zip(&twin_obs).map(|(c, o)| (c, o.as_slice())));
    for (ci, (source, obs)) in sources.enumerate() {
        for (gi, &g) in gains.iter().enumerate() {
            // Folding depends on the circuit length, so each step gets its own run.
            let per_step = config.gains.mode == AmplificationMode::Folding && g != 1.0;
            if per_step {
                for k in 0..steps.len() {
                    jobs.push(Job { circuit: ci, gain: gi, step: Some(k), source, observables: obs });
                }
            } else {
                jobs.push(Job { circuit: ci, gain: gi, step: None, source, observables: obs });
            }
        }
    }
    let outputs = jobs.par_iter().map(|j| run_job(j, config, &noise, &steps)).collect::<Result<Vec<_>>>()?;

    let (n_obs, n_gain, n_step) = (observables.len(), gains.len(), steps.len());
    let mut target = vec![vec![vec![0.0; n_obs]; n_step]; n_gain];
    let mut symmetry = vec![vec![vec![0.0; n_step]; n_gain]; n_obs];
    let mut realized_gains = vec![vec![1.0; n_step]; n_gain];
    let mut counts = vec![vec![vec![0usize; n_step]; n_gain]; n_obs + 1];
    for out in outputs {
        for (k, values, count, realized) in out.rows {
            counts[out.circuit][out.gain][k] = count;
            if out.circuit == 0 {
                target[out.gain][k] = values;
                realized_gains[out.gain][k] = realized;
            } else {
                symmetry[out.circuit - 1][out.gain][k] = values[0];
            }
        }
    }
    let mut gate_counts = Vec::with_capacity(n_obs * n_gain * n_step);
    for o in 0..n_obs {
        for (g, &gain) in gains.iter().enumerate() {
            for (k, &step) in steps.iter().enumerate() {
                gate_counts.push(GateCountCheck {
                    observable: o,
                    gain,
                    step,
                    target: counts[0][g][k],
                    twin: counts[o + 1][g][k],
                });
            }
        }
    }
    Ok(ExactData {
        config: config.clone(),
        labels,
        observables,
        steps,
        ideal,
        target,
        symmetry,
        symmetry_ideal,
        realized_gains,
        gate_counts,
    })
}

/// One method's output for one observable and step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodEstimate {
    /// The reported column; the result may come from a fallback.
    pub method: Method,
    pub result: MitigationResult,
    /// The column's own estimate before any fallback, `None` if it failed.
    pub unmitigated: Option<f64>,
    /// Sigma of the reported value from the shot noise of its inputs.
    pub sampling_sigma: f64,
}

impl MethodEstimate {
    pub fn nonphysical(&self) -> bool {
        !self.unmitigated.is_some_and(|v| v.abs() <= 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableStep {
    pub observable: usize,
    pub step: usize,
    pub ideal: f64,
    /// Sampled target row, one entry per gain.
    pub target: Vec<UncertainValue>,
    /// Sampled symmetry row of the twin.
    pub symmetry: Vec<UncertainValue>,
    pub estimates: Vec<MethodEstimate>,
}

impl ObservableStep {
    pub fn estimate(&self, method: Method) -> Option<&MethodEstimate> {
        self.estimates.iter().find(|e| e.method == method)
    }
}

/// Average over the selected observables at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub step: usize,
    pub average: UncertainValue,
    pub ideal: f64,
    pub error: RelativeError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    /// Mean over steps with a reliable relative error.
    pub mean_rel_err_pct: Option<f64>,
    pub mean_abs_err: f64,
    /// Mean reported sigma over the selected observables and all steps.
    pub mean_sigma: f64,
    /// Entries whose own estimate was non-physical or failed, over all observables.
    pub nonphysical_pct: f64,
    pub fallback_pct: f64,
    pub per_step: Vec<StepSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub config: ExperimentConfig,
    pub labels: Vec<String>,
    pub steps: Vec<usize>,
    pub gains: Vec<f64>,
    /// `[gain][step]`.
    pub realized_gains: Vec<Vec<f64>>,
    pub methods: Vec<Method>,
    /// Ordered by observable, then step.
    pub entries: Vec<ObservableStep>,
    pub summaries: Vec<MethodSummary>,
    pub selected: Vec<usize>,
    pub flagged: Vec<usize>,
    pub gate_counts_match: bool,
}

impl ExperimentReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    pub fn entry(&self, observable: usize, step_index: usize) -> &ObservableStep {
        &self.entries[observable * self.steps.len() + step_index]
    }

    /// Pass/fail checks of the report: physical outputs, twin gate counts,
    /// and GUESS not trailing ZNE on non-physical rates and relative error.
    pub fn checks(&self) -> Vec<Check> {
        let mut out = Vec::new();
        let bad = self.entries.iter().flat_map(|e| &e.estimates).filter(|e| !e.result.physical).count();
        out.push(Check { name: "physical".into(), passed: bad == 0, detail: format!("{bad} non-physical results") });
        out.push(Check {
            name: "twin_gate_counts".into(),
            passed: self.gate_counts_match,
            detail: String::new(),
        });
        for (g, z) in [(Method::GuessLin, Method::ZneLin), (Method::GuessExp, Method::ZneExp)] {
            if let (Some(gs), Some(zs)) = (self.summary(g), self.summary(z)) {
                out.push(Check {
                    name: format!("nonphysical_{g}_le_{z}"),
                    passed: gs.nonphysical_pct <= zs.nonphysical_pct,
                    detail: format!("{} vs {}", gs.nonphysical_pct, zs.nonphysical_pct),
                });
            }
        }
        if let (Some(gs), Some(zs)) = (self.summary(Method::GuessExp), self.summary(Method::ZneExp)) {
            let (a, b) = (gs.mean_rel_err_pct, zs.mean_rel_err_pct);
            out.push(Check {
                name: "rel_err_guess_exp_le_zne_exp".into(),
                passed: matches!((a, b), (Some(a), Some(b)) if a <= b),
                detail: format!("{a:?} vs {b:?}"),
            });
        }
        out
    }
}

fn sample_rows(
    exact: &[f64],
    shots: u64,
    seed: u64,
    stream: u64,
    observable: usize,
    step: usize,
) -> Result<Vec<UncertainValue>> {
    exact
        .iter()
        .enumerate()
        .map(|(g, &v)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[stream, observable as u64, g as u64, step as u64]));
            sample_from_value(v, shots, &mut rng)
        })
        .collect()
}

struct Candidates {
    values: Vec<(Method, Result<UncertainValue>)>,
}

impl Candidates {
    fn take(&mut self, m: Method) -> Result<UncertainValue> {
        let i = self.values.iter().position(|(k, _)| *k == m).expect("candidate computed");
        match &self.values[i].1 {
            Ok(v) => Ok(*v),
            Err(e) => Err(Error::InsufficientData(e.to_string())),
        }
    }
}

fn learn(config: &ExperimentConfig, ms: &MeasurementMatrix, b_s: f64, mode: GuessMode) -> Result<GuessCoefficients> {
    guess_learn_with(ms, &[b_s], mode, config.mitigation.constraint)
}

fn sampling_sigma(method: Method, gains: &[f64], row: &[UncertainValue], value: &UncertainValue) -> f64 {
    let sigmas: Vec<f64> = row.iter().map(|v| v.sigma).collect();
    match method {
        Method::Raw => row[0].sigma,
        Method::ZneLin => intercept_weights(gains).map_or(f64::NAN, |w| propagated_sigma(&w, &sigmas)),
        Method::ZneExp => {
            let rel: Vec<f64> = row.iter().map(|v| v.sigma / v.mean.abs()).collect();
            intercept_weights(gains).map_or(f64::NAN, |w| value.mean.abs() * propagated_sigma(&w, &rel))
        }
        Method::Richardson | Method::GuessLin | Method::GuessExp => value.sigma,
    }
}

fn mitigate_entry(
    config: &ExperimentConfig,
    methods: &[Method],
    target: &[UncertainValue],
    symmetry: &[UncertainValue],
    b_s: f64,
) -> Result<Vec<MethodEstimate>> {
    let gains = &config.gains.assumed;
    let terms = config.mitigation.variance_terms;
    let points: Vec<(f64, UncertainValue)> = gains.iter().copied().zip(target.iter().copied()).collect();
    let ms = MeasurementMatrix::single(gains.clone(), symmetry.to_vec())?;
    let lin_mode = if config.mitigation.odr { GuessMode::Odr } else { GuessMode::Linear };
    let guess = |mode| learn(config, &ms, b_s, mode).and_then(|c| guess_apply_with(&c, target, terms));
    let raw = target[0];
    let mut cand = Candidates {
        values: vec![
            (Method::Raw, Ok(raw)),
            (Method::ZneLin, zne_linear(&points)),
            (Method::ZneExp, zne_exponential(&points)),
            (Method::Richardson, richardson(&points)),
            (Method::GuessLin, guess(lin_mode)),
            (Method::GuessExp, guess(config.mitigation.exp_mode)),
        ],
    };
    let mut out = Vec::with_capacity(methods.len());
    for &m in methods {
        let chain: Vec<Method> = match m {
            Method::Raw => vec![],
            Method::ZneExp => vec![Method::ZneExp, Method::ZneLin],
            Method::GuessExp => vec![Method::GuessExp, Method::GuessLin],
            other => vec![other],
        };
        let own = cand.take(m).ok().map(|v| v.mean);
        let result = if m == Method::Raw {
            MitigationResult { value: raw, method_used: Method::Raw, fallback_applied: false, physical: is_physical(&raw) }
        } else {
            mitigate_with_fallback(chain.iter().map(|&c| (c, cand.take(c))).collect(), raw)
        };
        let sampling_sigma = sampling_sigma(result.method_used, gains, target, &result.value);
        out.push(MethodEstimate { method: m, result, unmitigated: own, sampling_sigma });
    }
    Ok(out)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

impl ExactData {
    /// Samples every expectation with `seed`, mitigates, post-selects and
    /// aggregates.
    pub fn report(&self, seed: u64) -> Result<ExperimentReport> {
        let config = &self.config;
        let methods: Vec<Method> = METHOD_ORDER
            .iter()
            .copied()
            .filter(|m| *m == Method::Raw || config.mitigation.methods.contains(m))
            .collect();
        let (n_obs, n_step) = (self.observables.len(), self.steps.len());
        let mut entries = Vec::with_capacity(n_obs * n_step);
        for o in 0..n_obs {
            for (k, &step) in self.steps.iter().enumerate() {
                let exact_target: Vec<f64> = self.target.iter().map(|g| g[k][o]).collect();
                let exact_sym: Vec<f64> = self.symmetry[o].iter().map(|g| g[k]).collect();
                let target = sample_rows(&exact_target, config.shots, seed, TARGET_STREAM, o, step)?;
                let symmetry = sample_rows(&exact_sym, config.shots, seed, SYMMETRY_STREAM, o, step)?;
                let estimates = mitigate_entry(config, &methods, &target, &symmetry, self.symmetry_ideal[o])?;
                entries.push(ObservableStep { observable: o, step, ideal: self.ideal[k][o], target, symmetry, estimates });
            }
        }

        let (selected, flagged) = if config.selection.enabled {
            let mut records: Vec<SymmetryRecord> = (0..n_obs)
                .map(|o| SymmetryRecord::new(o, (0..n_step).map(|k| entries[o * n_step + k].symmetry[0]).collect()))
                .collect();
            let policy = config.selection.policy();
            let flagged = detect_sigma_outliers(&mut records, &policy)?;
            let pool = records.iter().filter(|r| !r.flagged).count();
            let policy = OutlierPolicy { keep_best: policy.keep_best.min(pool), ..policy };
            let mut selected = select_best(&records, &policy)?;
            selected.sort_unstable();
            (selected, flagged)
        } else {
            ((0..n_obs).collect(), Vec::new())
        };

        let summaries = methods
            .iter()
            .map(|&m| {
                let est = |e: &ObservableStep| e.estimate(m).expect("method reported").clone();
                let per_step: Vec<StepSummary> = if selected.is_empty() {
                    Vec::new()
                } else {
                    (0..n_step)
                        .map(|k| {
                            let row: Vec<MethodEstimate> =
                                selected.iter().map(|&o| est(&entries[o * n_step + k])).collect();
                            let means: Vec<f64> = row.iter().map(|e| e.result.value.mean).collect();
                            let n = row.len() as f64;
                            let sigma = row.iter().map(|e| e.result.value.sigma.powi(2)).sum::<f64>().sqrt() / n;
                            let ideal = mean(selected.iter().map(|&o| self.ideal[k][o]));
                            StepSummary {
                                step: self.steps[k],
                                average: UncertainValue::new(mean(means.iter().copied()), sigma),
                                ideal,
                                error: relative_error(&means, ideal),
                            }
                        })
                        .collect()
                };
                let reliable: Vec<f64> = per_step.iter().filter(|s| s.error.reliable).map(|s| s.error.pct).collect();
                let all: Vec<MethodEstimate> = entries.iter().map(est).collect();
                let pct = |n: usize| if all.is_empty() { 0.0 } else { 100.0 * n as f64 / all.len() as f64 };
                MethodSummary {
                    method: m,
                    mean_rel_err_pct: (!reliable.is_empty()).then(|| mean(reliable.iter().copied())),
                    mean_abs_err: mean(per_step.iter().map(|s| s.error.abs)),
                    mean_sigma: mean(
                        entries.iter().filter(|e| selected.contains(&e.observable)).map(|e| est(e).result.value.sigma),
                    ),
                    nonphysical_pct: pct(all.iter().filter(|e| e.nonphysical()).count()),
                    fallback_pct: pct(all.iter().filter(|e| e.result.fallback_applied).count()),
                    per_step,
                }
            })
            .collect();

        Ok(ExperimentReport {
            seed,
            config: config.clone(),
            labels: self.labels.clone(),
            steps: self.steps.clone(),
            gains: config.gains.assumed.clone(),
            realized_gains: self.realized_gains.clone(),
            methods,
            entries,
            summaries,
            selected,
            flagged,
            gate_counts_match: self.gate_counts.iter().all(|c| c.target == c.twin),
        })
    }
}

/// Simulates and reports with the configured seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    simulate_exact(config)?.report(config.seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_examples() {
        let e = relative_error(&[0.45], 0.5);
        assert!((e.pct - 10.0).abs() < 1e-12 && e.reliable);
        assert_eq!(relative_error(&[0.4, 0.6], 0.5).pct, 0.0);
        let small = relative_error(&[0.02], 0.01);
        assert!((small.pct - 100.0).abs() < 1e-9 && !small.reliable);
        assert!((small.abs - 0.01).abs() < 1e-15);
    }
}
