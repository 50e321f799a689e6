use std::path::PathBuf;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use guess::harness::{
    emit_report, simulate_exact, verify_bound, verify_decay, ExactData, ExperimentConfig, ExperimentReport,
    DECAY_TOLERANCE, LOG_RATIO_TOLERANCE, RESULTS_FILE, SUMMARY_FILE,
};
use guess::mitigate::{guess_apply, guess_learn, richardson_coefficients, GuessMode, MeasurementMatrix, Method};
use guess::sim::UncertainValue;

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::load(&path).unwrap()
}

fn ising() -> &'static ExactData {
    static DATA: OnceLock<ExactData> = OnceLock::new();
    DATA.get_or_init(|| simulate_exact(&config("ising_folding.toml")).unwrap())
}

fn heisenberg() -> &'static ExactData {
    static DATA: OnceLock<ExactData> = OnceLock::new();
    DATA.get_or_init(|| simulate_exact(&config("heisenberg_folding.toml")).unwrap())
}

fn ising_reports() -> &'static Vec<ExperimentReport> {
    static REPORTS: OnceLock<Vec<ExperimentReport>> = OnceLock::new();
    REPORTS.get_or_init(|| SEEDS.iter().map(|&s| ising().report(s).unwrap()).collect())
}

fn verdict(name: &str, passed: bool, detail: &str) {
    println!("{name}: {} {detail}", if passed { "PASS" } else { "FAIL" });
}

struct Comparison {
    rel_wins: usize,
    sigma_wins: usize,
}

fn compare_guess_zne(reports: &[ExperimentReport]) -> Comparison {
    let mut c = Comparison { rel_wins: 0, sigma_wins: 0 };
    for r in reports {
        let g = r.summary(Method::GuessExp).unwrap();
        let z = r.summary(Method::ZneExp).unwrap();
        let (gr, zr) = (g.mean_rel_err_pct.unwrap(), z.mean_rel_err_pct.unwrap());
        println!(
            "  seed {}: rel err guess_exp {gr:.3}% zne_exp {zr:.3}%, sigma guess_exp {:.5} zne_exp {:.5}",
            r.seed, g.mean_sigma, z.mean_sigma
        );
        c.rel_wins += usize::from(gr < zr);
        c.sigma_wins += usize::from(g.mean_sigma <= z.mean_sigma);
    }
    c
}

#[test]
fn criterion_1_symmetry_decay() {
    let r = verify_decay(0.05, 5.0, 0.01).unwrap();
    let passed = r.global_max_error < DECAY_TOLERANCE && r.log_ratio_max_error < LOG_RATIO_TOLERANCE;
    verdict(
        "criterion 1",
        passed,
        &format!("global max error {:.2e}, log-ratio max error {:.2e}", r.global_max_error, r.log_ratio_max_error),
    );
    assert!(passed);
}

#[test]
fn criterion_2_richardson_identity() {
    let w = richardson_coefficients(&[1.0, 1.2, 1.5]).unwrap();
    let coeff_err = w.iter().zip([18.0, -25.0, 8.0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let mut quad_err = 0.0f64;
    for _ in 0..1000 {
        let (a, b, c): (f64, f64, f64) = (unit.sample(&mut rng), unit.sample(&mut rng), unit.sample(&mut rng));
        let est: f64 = w.iter().zip([1.0, 1.2, 1.5]).map(|(w, g)| w * (a + b * g + c * g * g)).sum();
        quad_err = quad_err.max((est - a).abs());
    }
    let passed = coeff_err < 1e-10 && quad_err < 1e-10;
    verdict("criterion 2", passed, &format!("coefficient error {coeff_err:.1e}, quadratic error {quad_err:.1e}"));
    assert!(passed);
}

#[test]
fn criterion_3_guess_beats_zne_under_folding() {
    let c = compare_guess_zne(ising_reports());
    let passed = c.rel_wins >= 4 && c.sigma_wins >= 4;
    verdict(
        "criterion 3",
        passed,
        &format!("relative error wins {}/5, sigma wins {}/5", c.rel_wins, c.sigma_wins),
    );
    assert!(passed);
}

#[test]
fn criterion_4_heisenberg_variant() {
    let reports: Vec<ExperimentReport> = SEEDS.iter().map(|&s| heisenberg().report(s).unwrap()).collect();
    let c = compare_guess_zne(&reports);
    let passed = c.rel_wins >= 4;
    verdict("criterion 4", passed, &format!("relative error wins {}/5", c.rel_wins));
    assert!(passed);
}

fn bootstrap_ratio(mode: GuessMode) -> f64 {
    let gains = vec![1.0, 2.0, 3.0];
    let sym: Vec<f64> = gains.iter().map(|g: &f64| (-g).exp()).collect();
    let tgt: Vec<f64> = gains.iter().map(|g: &f64| 0.7 * (-0.8 * g).exp()).collect();
    let row = |means: &[f64]| -> Vec<UncertainValue> {
        means.iter().map(|m| UncertainValue::new(*m, 0.05 * m.abs())).collect()
    };
    let estimate = |s: &[f64], t: &[f64]| -> f64 {
        let ms = MeasurementMatrix::single(gains.clone(), row(s)).unwrap();
        let coeffs = guess_learn(&ms, &[1.0], mode).unwrap();
        guess_apply(&coeffs, &row(t)).unwrap().mean
    };
    let ms = MeasurementMatrix::single(gains.clone(), row(&sym)).unwrap();
    let analytic = guess_apply(&guess_learn(&ms, &[1.0], mode).unwrap(), &row(&tgt)).unwrap().sigma.powi(2);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let mut jitter = |means: &[f64]| -> Vec<f64> {
        means.iter().map(|m| m * (1.0 + 0.05 * unit.sample(&mut rng))).collect()
    };
    let draws: Vec<f64> = (0..10_000)
        .map(|_| {
            let s = jitter(&sym);
            let t = jitter(&tgt);
            estimate(&s, &t)
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let empirical = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
    println!("  {mode:?}: analytic {analytic:.4e}, empirical {empirical:.4e}");
    analytic / empirical
}

#[test]
fn criterion_5_variance_propagation() {
    let lin = bootstrap_ratio(GuessMode::Linear);
    let exp = bootstrap_ratio(GuessMode::Exponential);
    let passed = (lin - 1.0).abs() <= 0.25 && (exp - 1.0).abs() <= 0.25;
    verdict("criterion 5", passed, &format!("analytic/empirical linear {lin:.3}, exponential {exp:.3}"));
    assert!(passed);
}

#[test]
fn criterion_6_fallback_hierarchy() {
    let mut failures = Vec::new();
    for r in ising_reports() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(r, dir.path()).unwrap();
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
        let pct = |m: &str| {
            summary["methods"]
                .as_array()
                .unwrap()
                .iter()
                .find(|s| s["method"] == m)
                .and_then(|s| s["nonphysical_pct"].as_f64())
                .unwrap()
        };
        let csv = std::fs::read_to_string(dir.path().join(RESULTS_FILE)).unwrap();
        let max_abs = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap().abs())
            .fold(0.0, f64::max);
        let (gl, zl, ge, ze) = (pct("guess_lin"), pct("zne_lin"), pct("guess_exp"), pct("zne_exp"));
        println!("  seed {}: max |mean| {max_abs:.4}, nonphysical guess_lin {gl:.2}% zne_lin {zl:.2}% guess_exp {ge:.2}% zne_exp {ze:.2}%", r.seed);
        if max_abs > 1.0 || gl > zl || ge > ze {
            failures.push(r.seed);
        }
    }
    verdict("criterion 6", failures.is_empty(), &format!("failing seeds {failures:?}"));
    assert!(failures.is_empty());
}

#[test]
fn criterion_7_post_selection() {
    let exact = simulate_exact(&config("ising_postselect.toml")).unwrap();
    let noisy = [2usize, 7];
    let mut excluded = 0;
    for seed in 1..=10 {
        let r = exact.report(seed).unwrap();
        let chosen: Vec<&str> = r.selected.iter().map(|&i| r.labels[i].as_str()).collect();
        println!("  seed {seed}: selected {chosen:?}");
        excluded += usize::from(noisy.iter().all(|s| !r.selected.contains(s)));
    }
    let passed = excluded >= 9;
    verdict("criterion 7", passed, &format!("both noisy sites excluded on {excluded}/10 seeds"));
    assert!(passed);
}

#[test]
fn criterion_8_diamond_bound() {
    let r = verify_bound(200, &[0.001, 0.003, 0.01], 0).unwrap();
    let passed = r.violations == 0 && r.cases == 600;
    verdict(
        "criterion 8",
        passed,
        &format!("{} cases, {} violations, max lower/bound {:.4}", r.cases, r.violations, r.max_ratio),
    );
    assert!(passed);
}

#[test]
fn criterion_9_gate_count_preservation() {
    let mut checked = 0;
    let mut mismatched = 0;
    for data in [ising(), heisenberg()] {
        let expected = data.observables.len() * data.config.gains.assumed.len() * data.steps.len();
        assert_eq!(data.gate_counts.len(), expected);
        checked += data.gate_counts.len();
        mismatched += data.gate_counts.iter().filter(|g| g.target != g.twin).count();
    }
    let passed = mismatched == 0 && checked > 0;
    verdict("criterion 9", passed, &format!("{checked} circuit pairs, {mismatched} mismatched"));
    assert!(passed);
}

#[test]
fn criterion_10_noiseless_sanity() {
    let mut cfg = config("ising_folding.toml");
    cfg.noise.p = 0.0;
    cfg.shots = 1_000_000;
    let r = simulate_exact(&cfg).unwrap().report(cfg.seed).unwrap();
    let mut worst = 0.0f64;
    let mut outside = 0;
    for e in &r.entries {
        for m in &e.estimates {
            let z = (m.result.value.mean - e.ideal).abs() / m.sampling_sigma;
            worst = worst.max(z);
            outside += usize::from(z > 5.0);
        }
    }
    let count = r.entries.iter().map(|e| e.estimates.len()).sum::<usize>();
    let passed = outside == 0 && r.methods.len() == 5;
    verdict("criterion 10", passed, &format!("{count} estimates, worst {worst:.2} sigma, {outside} beyond 5 sigma"));
    assert!(passed);
}
