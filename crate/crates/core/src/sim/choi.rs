use std::collections::{HashSet, VecDeque};
use std::sync::OnceLock;

use num_complex::Complex64;

use super::channel::{conjugation_superop, PauliChannel};
use crate::dense::{trace_norm_hermitian, CMatrix};
use crate::error::{Error, Result};

/// Size of the two-qubit Clifford group modulo global phase.
pub const TWO_QUBIT_CLIFFORD_COUNT: usize = 11_520;

/// Choi matrix `(1/d) Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)` of a row-stacked superoperator.
pub fn choi_from_superop(s: &CMatrix) -> CMatrix {
    let d = (s.nrows() as f64).sqrt().round() as usize;
    let norm = Complex64::new(1.0 / d as f64, 0.0);
    CMatrix::from_fn(d * d, d * d, |row, col| {
        let (i, k) = (row / d, row % d);
        let (j, l) = (col / d, col % d);
        s[(k * d + l, i * d + j)] * norm
    })
}

/// `ρ ↦ U N(U† ρ U) U†` as a superoperator.
fn conjugated(channel: &PauliChannel, u: &CMatrix) -> CMatrix {
    conjugation_superop(u) * channel.superop() * conjugation_superop(&u.adjoint())
}

/// Distance between `U1∘N∘U1†` and `U2∘N∘U2†`.
///
/// `lower` is the trace norm of the difference of the normalised Choi
/// matrices, which never exceeds the diamond distance. `bound` is `4p` with
/// `p` the channel's total error. With this normalisation `‖N − id‖⋄ = 2p`
/// for a Pauli channel, so `lower ≤ bound` always holds.
pub fn channel_distance_bound(channel: &PauliChannel, u1: &CMatrix, u2: &CMatrix) -> Result<(f64, f64)> {
    let d = 1usize << channel.sites();
    for u in [u1, u2] {
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::Shape(format!(
                "{}x{} unitary for a {}-site channel",
                u.nrows(),
                u.ncols(),
                channel.sites()
            )));
        }
    }
    let j1 = choi_from_superop(&conjugated(channel, u1));
    let j2 = choi_from_superop(&conjugated(channel, u2));
    let diff = &j1 - &j2;
    let diff = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
    let bound = 4.0 * channel.total_error();
    Ok((trace_norm_hermitian(&diff), bound))
}

fn phase_normalized(u: &CMatrix) -> CMatrix {
    let pivot = u.iter().find(|z| z.norm() > 1e-6).copied().unwrap_or(Complex64::new(1.0, 0.0));
    u * (pivot.conj() / pivot.norm())
}

fn key(u: &CMatrix) -> Vec<i64> {
    u.iter()
        .flat_map(|z| [(z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64])
        .collect()
}

fn generators() -> Vec<CMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let h = CMatrix::from_row_slice(2, 2, &[c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)]);
    let s = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
    let id = CMatrix::identity(2, 2);
    let mut cnot = CMatrix::zeros(4, 4);
    for (a, b) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        cnot[(a, b)] = c(1.0, 0.0);
    }
    vec![h.kronecker(&id), id.kronecker(&h), s.kronecker(&id), id.kronecker(&s), cnot]
}

/// All two-qubit Clifford unitaries modulo global phase, in a fixed order.
pub fn two_qubit_cliffords() -> &'static [CMatrix] {
    static GROUP: OnceLock<Vec<CMatrix>> = OnceLock::new();
    GROUP.get_or_init(|| {
        let gens = generators();
        let start = CMatrix::identity(4, 4);
        let mut seen = HashSet::from([key(&start)]);
        let mut queue = VecDeque::from([start.clone()]);
        let mut out = vec![start];
        while let Some(u) = queue.pop_front() {
            for g in &gens {
                let v = phase_normalized(&(g * &u));
                if seen.insert(key(&v)) {
                    out.push(v.clone());
                    queue.push_back(v);
                }
            }
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::operator_norm;

    #[test]
    fn clifford_group_has_expected_order() {
        let g = two_qubit_cliffords();
        assert_eq!(g.len(), TWO_QUBIT_CLIFFORD_COUNT);
        for u in g.iter().step_by(997) {
            assert!(operator_norm(&(u * u.adjoint() - CMatrix::identity(4, 4))) < 1e-10);
        }
    }

    #[test]
    fn identical_unitaries_give_zero() {
        let ch = PauliChannel::depolarizing(2, 0.01).unwrap();
        let u = &two_qubit_cliffords()[123];
        let (lower, bound) = channel_distance_bound(&ch, u, u).unwrap();
        assert!(lower < 1e-12);
        assert!((bound - 0.04).abs() < 1e-15);
    }

    #[test]
    fn noiseless_channel_gives_zero() {
        let ch = PauliChannel::noiseless(2);
        let g = two_qubit_cliffords();
        assert_eq!(channel_distance_bound(&ch, &g[5], &g[900]).unwrap().1, 0.0);
        assert!(channel_distance_bound(&ch, &g[5], &g[900]).unwrap().0 < 1e-12);
    }

    #[test]
    fn choi_of_identity_is_maximally_entangled() {
        let j = choi_from_superop(&CMatrix::identity(16, 16));
        // |Φ⟩⟨Φ| with |Φ⟩ = (|00⟩ + |11⟩ + …)/2 on 4 + 4 dims: trace 1, rank 1.
        let tr: Complex64 = (0..16).map(|i| j[(i, i)]).sum();
        assert!((tr.re - 1.0).abs() < 1e-12);
        assert!((trace_norm_hermitian(&j) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_against_identity_is_two_p() {
        // Choi of a Pauli channel is diagonal in the Bell basis, so
        // ‖J_N − J_id‖₁ = (1 − (1 − p)) + p = 2p.
        let p = 0.003;
        let ch = PauliChannel::depolarizing(2, p).unwrap();
        let jn = choi_from_superop(&ch.superop());
        let jid = choi_from_superop(&CMatrix::identity(16, 16));
        assert!((trace_norm_hermitian(&(jn - jid)) - 2.0 * p).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch() {
        let ch = PauliChannel::depolarizing(2, 0.01).unwrap();
        assert!(channel_distance_bound(&ch, &CMatrix::identity(2, 2), &CMatrix::identity(4, 4)).is_err());
    }
}
