use nalgebra::DMatrix;
use proptest::prelude::*;

use guess::amplify::{fold_gates, FoldStrategy};
use guess::dense::circuit_unitary;
use guess::harness::relative_error;
use guess::mitigate::{
    guess_apply, guess_learn, propagate_covariance, richardson_coefficients, solve_coefficients, Constraint, GuessMode,
    MeasurementMatrix,
};
use guess::model::{build_hamiltonian, trotterize, ModelParams, TrotterSpec};
use guess::pauli::{commutes, conjugate, Pauli, PauliString, Phase};
use guess::select::{detect_sigma_outliers, select_best, OutlierPolicy, SymmetryRecord};
use guess::sim::UncertainValue;

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(0u8..4, n), any::<bool>()).prop_map(|(ls, neg)| {
        let letters = ls.into_iter().map(|l| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][l as usize]).collect();
        PauliString::new(letters, if neg { Phase::Minus } else { Phase::Plus }).unwrap()
    })
}

fn distinct_gains(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(1u32..60, 1..=max).prop_map(|s| s.into_iter().map(|k| 1.0 + 0.1 * (k - 1) as f64).collect())
}

fn sigma_records() -> impl Strategy<Value = Vec<SymmetryRecord>> {
    prop::collection::vec((0.5f64..1.0, 0.001f64..0.05), 4..12).prop_map(|v| {
        v.into_iter().enumerate().map(|(i, (m, s))| SymmetryRecord::new(i, vec![UncertainValue::new(m, s)])).collect()
    })
}

proptest! {
    #[test]
    fn pauli_text_round_trip(p in pauli_string(5)) {
        let back: PauliString = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn commutation_is_symmetric(a in pauli_string(4), b in pauli_string(4)) {
        prop_assert_eq!(commutes(&a, &b).unwrap(), commutes(&b, &a).unwrap());
    }

    #[test]
    fn conjugation_flips_sign_iff_anticommuting(a in pauli_string(4), b in pauli_string(4)) {
        let c = conjugate(&a, &b).unwrap();
        prop_assert_eq!(c.letters(), a.letters());
        let flipped = c.phase() != a.phase();
        prop_assert_eq!(flipped, !commutes(&a, &b).unwrap());
    }

    #[test]
    fn weight_counts_non_identity(p in pauli_string(6)) {
        prop_assert_eq!(p.weight(), p.letters().iter().filter(|l| !l.is_identity()).count());
    }

    #[test]
    fn richardson_weights_sum_to_one(gains in distinct_gains(4)) {
        let w = richardson_coefficients(&gains).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn richardson_recovers_polynomial_constant(
        gains in distinct_gains(4),
        coeffs in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let m = gains.len();
        let poly = |g: f64| coeffs[..m].iter().rev().fold(0.0, |acc, c| acc * g + c);
        let w = richardson_coefficients(&gains).unwrap();
        let est: f64 = w.iter().zip(&gains).map(|(w, g)| w * poly(*g)).sum();
        let scale = w.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        prop_assert!((est - coeffs[0]).abs() < 1e-9 * scale);
    }

    #[test]
    fn exponential_guess_reproduces_its_own_row(c in 0.01f64..1.0, b in 0.3f64..1.0) {
        let gains = vec![1.0, 1.2, 1.5];
        let row: Vec<UncertainValue> = gains.iter().map(|g| UncertainValue::exact(b * (-c * g).exp())).collect();
        let ms = MeasurementMatrix::single(gains.clone(), row.clone()).unwrap();
        let coeffs = guess_learn(&ms, &[b], GuessMode::Exponential).unwrap();
        prop_assert!((coeffs.x.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let v = guess_apply(&coeffs, &row).unwrap();
        prop_assert!((v.mean - b).abs() < 1e-8);
    }

    #[test]
    fn covariance_scales_quadratically(
        means in prop::collection::vec(0.5f64..0.95, 3),
        sig in prop::collection::vec(0.001f64..0.02, 3),
        s in 0.1f64..5.0,
    ) {
        let m = DMatrix::from_row_slice(1, 3, &means);
        let base = DMatrix::from_row_slice(1, 3, &sig);
        let solver = |a: &DMatrix<f64>| solve_coefficients(a, &[1.0], GuessMode::Linear, Constraint::SumToOne);
        let c1 = propagate_covariance(&m, &base, solver).unwrap();
        let c2 = propagate_covariance(&m, &(base * s), solver).unwrap();
        let tol = 1e-9 * c1.amax().max(1e-12) * s * s;
        prop_assert!((c2 - c1 * (s * s)).amax() <= tol);
    }

    #[test]
    fn larger_k_flags_a_subset(records in sigma_records(), k in 0.0f64..3.0, dk in 0.0f64..3.0) {
        let policy = OutlierPolicy { k_iqr: k, max_discard: usize::MAX, keep_best: 1 };
        let mut a = records.clone();
        let mut b = records;
        let loose = detect_sigma_outliers(&mut a, &policy).unwrap();
        let strict = detect_sigma_outliers(&mut b, &OutlierPolicy { k_iqr: k + dk, ..policy }).unwrap();
        prop_assert!(strict.iter().all(|id| loose.contains(id)));
    }

    #[test]
    fn flagging_is_permutation_equivariant(records in sigma_records(), rot in 0usize..12) {
        let policy = OutlierPolicy { max_discard: usize::MAX, ..OutlierPolicy::default() };
        let mut a = records.clone();
        let mut b = records;
        let r = rot % b.len();
        b.rotate_left(r);
        let mut fa = detect_sigma_outliers(&mut a, &policy).unwrap();
        let mut fb = detect_sigma_outliers(&mut b, &policy).unwrap();
        fa.sort_unstable();
        fb.sort_unstable();
        prop_assert_eq!(fa, fb);
    }

    #[test]
    fn selection_keeps_unflagged_best(mut records in sigma_records(), keep in 1usize..4) {
        let policy = OutlierPolicy { keep_best: keep, ..OutlierPolicy::default() };
        detect_sigma_outliers(&mut records, &policy).unwrap();
        let pool = records.iter().filter(|r| !r.flagged).count();
        if pool >= keep {
            let chosen = select_best(&records, &policy).unwrap();
            prop_assert_eq!(chosen.len(), keep);
            let worst_kept = chosen.iter().map(|&i| records[i].values[0].mean).fold(f64::INFINITY, f64::min);
            for r in records.iter().filter(|r| !r.flagged && !chosen.contains(&r.id)) {
                prop_assert!(r.values[0].mean <= worst_kept);
            }
        }
    }

    #[test]
    fn relative_error_is_scale_free(avg in -1.0f64..1.0, ideal in 0.05f64..1.0, s in 0.1f64..10.0) {
        let a = relative_error(&[avg], ideal);
        let b = relative_error(&[avg * s], ideal * s);
        prop_assert!(a.pct >= 0.0);
        prop_assert!((a.pct - b.pct).abs() < 1e-9 * a.pct.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn folding_preserves_the_unitary(factor in 1.0f64..4.0, seed in any::<u64>(), random in any::<bool>()) {
        let h = build_hamiltonian(&ModelParams::ising(4, 1.0, 0.75)).unwrap();
        let circuit = trotterize(&h, &TrotterSpec::new(0.6, 3).unwrap()).unwrap();
        let strategy = if random { FoldStrategy::SeededRandom } else { FoldStrategy::Stride };
        let n2 = circuit.two_qubit_count() as f64;
        let Ok(folded) = fold_gates(&circuit, factor, strategy, seed) else {
            // Too small a factor to fold a single gate.
            prop_assert!((factor - 1.0) * n2 < 1.0);
            return Ok(());
        };
        let diff = circuit_unitary(&folded) - circuit_unitary(&circuit);
        prop_assert!(diff.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
        prop_assert!((folded.realized_gain - folded.two_qubit_count() as f64 / n2).abs() < 1e-12);
        prop_assert!((folded.realized_gain - factor).abs() <= 1.0 / n2 + 1e-12);
    }
}
