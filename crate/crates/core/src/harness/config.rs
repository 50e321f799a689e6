use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::amplify::{AmplificationMode, FoldStrategy, GainSchedule};
use crate::error::{Error, Result};
use crate::mitigate::{Constraint, GuessMode, Method, VarianceTerms};
use crate::model::{ModelParams, TrotterSpec};
use crate::pauli::{Pauli, PauliString};
use crate::select::OutlierPolicy;
use crate::sim::{NoiseModel, PauliChannel};

/// Largest chain the experiment runner accepts.
pub const MAX_SITES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterConfig {
    /// Total evolution time; alternatively give `dt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub steps: usize,
    #[serde(default = "default_measure_every")]
    pub measure_every: usize,
}

fn default_measure_every() -> usize {
    4
}

impl TrotterConfig {
    pub fn spec(&self) -> Result<TrotterSpec> {
        match (self.t, self.dt) {
            (Some(t), None) => TrotterSpec::new(t, self.steps),
            (None, Some(dt)) => TrotterSpec::from_dt(dt, self.steps),
            _ => Err(Error::Config("trotter needs exactly one of t and dt".into())),
        }
    }

    /// Every `measure_every`-th step, always ending with the last one.
    pub fn measured_steps(&self) -> Vec<usize> {
        let every = self.measure_every.max(1);
        let mut steps: Vec<usize> = (1..=self.steps).filter(|s| s % every == 0).collect();
        if steps.last() != Some(&self.steps) {
            steps.push(self.steps);
        }
        steps
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Total error of the two-qubit depolarizing channel.
    pub p: f64,
    /// Depolarizing error after every single-qubit rotation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one_qubit_p: Option<f64>,
    /// `[site, multiplier]` pairs.
    #[serde(default)]
    pub site_multipliers: Vec<(usize, f64)>,
}

impl NoiseConfig {
    pub fn noise_model(&self) -> Result<NoiseModel> {
        let mut noise = NoiseModel::depolarizing(self.p)?;
        if let Some(p1) = self.one_qubit_p {
            noise.one_qubit = Some(PauliChannel::depolarizing(1, p1)?);
        }
        for &(site, m) in &self.site_multipliers {
            noise = noise.with_site_multiplier(site, m);
        }
        noise.validate()?;
        Ok(noise)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainConfig {
    pub assumed: Vec<f64>,
    #[serde(default)]
    pub mode: AmplificationMode,
    #[serde(default)]
    pub strategy: FoldStrategy,
    #[serde(default = "one")]
    pub fold_noise_multiplier: f64,
}

fn one() -> f64 {
    1.0
}

impl GainConfig {
    pub fn schedule(&self) -> GainSchedule {
        GainSchedule {
            assumed_gains: self.assumed.clone(),
            mode: self.mode,
            folding_strategy: self.strategy,
            fold_noise_multiplier: self.fold_noise_multiplier,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigationConfig {
    /// Methods reported besides `raw`.
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub constraint: Constraint,
    #[serde(default)]
    pub variance_terms: VarianceTerms,
    /// `exponential` or `exp_raw`.
    #[serde(default = "default_exp_mode")]
    pub exp_mode: GuessMode,
    /// Learn the linear coefficients without the constraint.
    #[serde(default)]
    pub odr: bool,
}

fn default_methods() -> Vec<Method> {
    vec![Method::ZneLin, Method::ZneExp, Method::GuessLin, Method::GuessExp]
}

fn default_exp_mode() -> GuessMode {
    GuessMode::Exponential
}

impl Default for MitigationConfig {
    fn default() -> Self {
        Self {
            methods: default_methods(),
            constraint: Constraint::default(),
            variance_terms: VarianceTerms::default(),
            exp_mode: default_exp_mode(),
            odr: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_k_iqr")]
    pub k_iqr: f64,
    #[serde(default = "default_max_discard")]
    pub max_discard: usize,
    #[serde(default = "default_keep_best")]
    pub keep_best: usize,
}

fn default_k_iqr() -> f64 {
    OutlierPolicy::default().k_iqr
}

fn default_max_discard() -> usize {
    OutlierPolicy::default().max_discard
}

fn default_keep_best() -> usize {
    OutlierPolicy::default().keep_best
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self { enabled: false, k_iqr: default_k_iqr(), max_discard: default_max_discard(), keep_best: default_keep_best() }
    }
}

impl SelectionConfig {
    pub fn policy(&self) -> OutlierPolicy {
        OutlierPolicy { k_iqr: self.k_iqr, max_discard: self.max_discard, keep_best: self.keep_best }
    }
}

/// One experiment: the chain, its Trotter circuit, the noise, the gains and
/// what to measure and report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub shots: u64,
    /// Pauli strings, or the shorthands `all_z` and `all_zz`.
    pub observables: Vec<String>,
    pub model: ModelParams,
    pub trotter: TrotterConfig,
    pub noise: NoiseConfig,
    pub gains: GainConfig,
    #[serde(default)]
    pub mitigation: MitigationConfig,
    #[serde(default)]
    pub selection: SelectionConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let config = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        self.model.validate().map_err(config)?;
        if self.model.n > MAX_SITES {
            return Err(Error::Config(format!("n = {} exceeds the limit of {MAX_SITES}", self.model.n)));
        }
        if self.trotter.steps == 0 {
            return Err(Error::Config("trotter steps must be >= 1".into()));
        }
        self.trotter.spec().map_err(config)?;
        if self.shots == 0 {
            return Err(Error::Config("shots must be >= 1".into()));
        }
        self.gains.schedule().validate().map_err(config)?;
        let noise = self.noise.noise_model().map_err(config)?;
        if let Some(&(site, _)) = self.noise.site_multipliers.iter().find(|(s, _)| *s >= self.model.n) {
            return Err(Error::Config(format!("site multiplier for site {site} of a {}-site chain", self.model.n)));
        }
        let worst = noise.site_multipliers.values().fold(1.0f64, |a, &b| a.max(b));
        let max_gain = self.gains.assumed.iter().fold(1.0f64, |a, &b| a.max(b));
        let peak = noise.two_qubit.total_error() * worst * max_gain * self.gains.fold_noise_multiplier;
        if peak > 1.0 {
            return Err(Error::Config(format!("amplified error rate {peak} exceeds 1")));
        }
        let observables = self.observables().map_err(config)?;
        if self.selection.enabled {
            if observables.len() < 4 {
                return Err(Error::Config("post-selection needs at least 4 observables".into()));
            }
            if !(self.selection.k_iqr.is_finite() && self.selection.k_iqr >= 0.0) {
                return Err(Error::Config("k_iqr must be >= 0".into()));
            }
            if self.selection.keep_best == 0 {
                return Err(Error::Config("keep_best must be >= 1".into()));
            }
        }
        Ok(())
    }

    /// The observables with their short labels, in configuration order.
    pub fn observables(&self) -> Result<Vec<(String, PauliString)>> {
        let n = self.model.n;
        let mut out = Vec::new();
        for spec in &self.observables {
            match spec.as_str() {
                "all_z" => {
                    for i in 0..n {
                        out.push(PauliString::single(n, i, Pauli::Z)?);
                    }
                }
                "all_zz" => {
                    for i in 0..n - 1 {
                        out.push(PauliString::two(n, i, i + 1, Pauli::Z)?);
                    }
                }
                s => {
                    let p: PauliString = s.parse()?;
                    if p.len() != n {
                        return Err(Error::LengthMismatch { left: n, right: p.len() });
                    }
                    out.push(p);
                }
            }
        }
        Ok(out.into_iter().map(|p| (label(&p), p)).collect())
    }
}

/// `Z3`, `Z0Z1`, `-X2`; the identity is `I`.
pub fn label(p: &PauliString) -> String {
    let mut s = String::new();
    if p.phase().sign() < 0.0 {
        s.push('-');
    }
    for site in p.support() {
        s.push(p.letter(site).as_char());
        s.push_str(&site.to_string());
    }
    if p.weight() == 0 {
        s.push('I');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 3
shots = 1000
observables = ["all_z", "ZZIIII"]

[model]
kind = "ising"
n = 6
j = 1.0
h_x = 0.75

[trotter]
t = 1.0
steps = 10

[noise]
p = 0.01
site_multipliers = [[2, 3.0]]

[gains]
assumed = [1.0, 1.2, 1.5]
"#;

    #[test]
    fn parses_sample() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.trotter.measure_every, 4);
        assert_eq!(c.trotter.measured_steps(), vec![4, 8, 10]);
        let obs = c.observables().unwrap();
        assert_eq!(obs.len(), 7);
        assert_eq!(obs[6].0, "Z0Z1");
        assert_eq!(c.gains.mode, AmplificationMode::Folding);
        assert_eq!(c.mitigation.methods.len(), 4);
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn rejects_invalid() {
        let bad = [
            SAMPLE.replace("n = 6", "n = 11"),
            SAMPLE.replace("steps = 10", "steps = 0"),
            SAMPLE.replace("shots = 1000", "shots = 0"),
            SAMPLE.replace("[1.0, 1.2, 1.5]", "[1.2, 1.5]"),
            SAMPLE.replace("t = 1.0", "t = 1.0\ndt = 0.1"),
            SAMPLE.replace("\"ZZIIII\"", "\"ZZ\""),
            SAMPLE.replace("p = 0.01", "p = 0.9"),
            SAMPLE.replace("[[2, 3.0]]", "[[6, 3.0]]"),
            SAMPLE.replace("seed = 3", "seed = 3\nbogus = 1"),
            SAMPLE.replace("observables = [\"all_z\", \"ZZIIII\"]", "observables = [\"ZIIIII\"]")
                + "\n[selection]\nenabled = true\n",
        ];
        for text in &bad {
            assert!(matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn labels() {
        assert_eq!(label(&"IZIZ".parse().unwrap()), "Z1Z3");
        assert_eq!(label(&"-XII".parse().unwrap()), "-X0");
        assert_eq!(label(&"III".parse().unwrap()), "I");
    }
}
