//! Small dense-matrix helpers used for cross-checks on short chains.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::model::{Gate, Hamiltonian, TrotterCircuit};
use crate::pauli::{Pauli, PauliString};

pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    }
}

/// Dense matrix of `p`, including its phase.
pub fn pauli_matrix(p: &PauliString) -> CMatrix {
    let dim = 1usize << p.len();
    let (x, z, ny) = p.masks();
    let global = i_pow(ny) * p.phase().sign();
    let mut m = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        let sign = if (b & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        m[(b ^ x, b)] = global * sign;
    }
    m
}

pub fn hamiltonian_matrix(h: &Hamiltonian) -> CMatrix {
    let dim = 1usize << h.n();
    let mut m = CMatrix::zeros(dim, dim);
    for t in h.terms() {
        m += pauli_matrix(&t.op) * Complex64::new(t.coeff, 0.0);
    }
    m
}

/// Unitary of one rotation gate, `cos(θ/2)·I − i·sin(θ/2)·P`.
pub fn gate_matrix(n: usize, g: &Gate) -> CMatrix {
    let letter = g.kind.axis();
    let sites: Vec<(usize, Pauli)> = g.sites.iter().map(|&s| (s, letter)).collect();
    let p = PauliString::from_sites(n, &sites).expect("gate sites in range");
    let dim = 1usize << n;
    let (c, s) = ((g.angle / 2.0).cos(), (g.angle / 2.0).sin());
    CMatrix::identity(dim, dim) * Complex64::new(c, 0.0) - pauli_matrix(&p) * (I * s)
}

/// Noiseless unitary of the whole circuit.
pub fn circuit_unitary(circuit: &TrotterCircuit) -> CMatrix {
    let dim = 1usize << circuit.n;
    let mut u = CMatrix::identity(dim, dim);
    for g in circuit.gates() {
        u = gate_matrix(circuit.n, g) * u;
    }
    u
}

/// `exp(−i·H·t)` for Hermitian `H`.
pub fn unitary_evolution(h: &CMatrix, t: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|e| (-I * e * t).exp()));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

pub fn operator_norm(m: &CMatrix) -> f64 {
    m.singular_values().max()
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.iter().map(|e| e.abs()).sum()
}
