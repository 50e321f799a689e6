use std::io::{Read, Write};

use num_complex::Complex64;

use crate::dense::CMatrix;
use crate::error::{Error, Result};
use crate::pauli::PauliString;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => ONE,
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

#[inline]
pub(crate) fn parity_sign(v: usize) -> f64 {
    if v.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Dense `2^n × 2^n` density matrix, row-major. Site 0 is the most
/// significant bit of a basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|0…0⟩⟨0…0|`.
    pub fn zero_state(n: usize) -> Self {
        let dim = 1usize << n;
        let mut data = vec![ZERO; dim * dim];
        data[0] = ONE;
        Self { n, data }
    }

    /// `|+…+⟩⟨+…+|`, the `+1` eigenstate of `X^{⊗n}`.
    pub fn plus_state(n: usize) -> Self {
        let dim = 1usize << n;
        let v = Complex64::new(1.0 / dim as f64, 0.0);
        Self { n, data: vec![v; dim * dim] }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        let mut data = vec![ZERO; dim * dim];
        for a in 0..dim {
            data[a * dim + a] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self { n, data }
    }

    pub fn from_pure(n: usize, amplitudes: &[Complex64]) -> Result<Self> {
        let dim = 1usize << n;
        if amplitudes.len() != dim {
            return Err(Error::Shape(format!("state vector of length {} for {n} sites", amplitudes.len())));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let mut data = vec![ZERO; dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                data[a * dim + b] = amplitudes[a] * amplitudes[b].conj() / norm;
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_matrix(n: usize, m: &CMatrix) -> Result<Self> {
        let dim = 1usize << n;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::Shape(format!("{}x{} matrix for {n} sites", m.nrows(), m.ncols())));
        }
        let mut data = vec![ZERO; dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                data[a * dim + b] = m[(a, b)];
            }
        }
        Ok(Self { n, data })
    }

    pub fn to_matrix(&self) -> CMatrix {
        let dim = self.dim();
        CMatrix::from_fn(dim, dim, |a, b| self.data[a * dim + b])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.data[a * self.dim() + b]
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|a| self.data[a * dim + a]).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for a in 0..dim {
            for b in a..dim {
                let d = self.data[a * dim + b] - self.data[b * dim + a].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue; dense and therefore meant for short chains.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = self.to_matrix();
        let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigen().eigenvalues.min()
    }

    /// Trace and Hermiticity within `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvariantViolation(format!("trace {tr}")));
        }
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(Error::InvariantViolation(format!("hermiticity error {herm:e}")));
        }
        if self.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvariantViolation("non-finite entry".into()));
        }
        // |ρ_ab|² ≤ ρ_aa ρ_bb ≤ 1 for any state.
        let largest = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if largest > 1.0 + tol {
            return Err(Error::InvariantViolation(format!("entry of magnitude {largest:e}")));
        }
        Ok(())
    }

    /// Full invariant check including positivity (`λ_min ≥ −1e−9`).
    pub fn validate(&self, tol: f64) -> Result<()> {
        self.check(tol)?;
        let low = self.min_eigenvalue();
        if low < -1e-9 {
            return Err(Error::InvariantViolation(format!("negative eigenvalue {low:e}")));
        }
        Ok(())
    }

    /// `Tr(O ρ)` including the phase of `O`. The imaginary residue is dropped.
    pub fn expectation(&self, o: &PauliString) -> Result<f64> {
        if o.len() != self.n {
            return Err(Error::LengthMismatch { left: self.n, right: o.len() });
        }
        let dim = self.dim();
        let (x, z, ny) = o.masks();
        // ⟨a|O = conj(i^ny) (−1)^{|a∧z|} ⟨a⊕x|
        let pre = i_pow(ny).conj() * o.phase().sign();
        let mut acc = ZERO;
        for a in 0..dim {
            acc += self.data[(a ^ x) * dim + a] * parity_sign(a & z);
        }
        Ok((pre * acc).re)
    }

    /// `P ρ P` for a Pauli string without phase.
    pub(crate) fn pauli_sandwich_into(&self, x: usize, z: usize, out: &mut [Complex64], scale: f64) {
        let dim = self.dim();
        for a in 0..dim {
            let sa = parity_sign(a & z);
            let row = (a ^ x) * dim;
            for b in 0..dim {
                let s = sa * parity_sign(b & z) * scale;
                out[a * dim + b] += self.data[row + (b ^ x)] * s;
            }
        }
    }

    /// Little-endian dump: `u32` site count then interleaved `f64` real and
    /// imaginary parts, row-major.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&(self.n as u32).to_le_bytes())?;
        for z in &self.data {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> std::io::Result<Self> {
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let n = u32::from_le_bytes(word) as usize;
        if n > 16 {
            return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, "site count too large"));
        }
        let dim = 1usize << n;
        let mut data = Vec::with_capacity(dim * dim);
        let mut buf = [0u8; 8];
        for _ in 0..dim * dim {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf);
            r.read_exact(&mut buf)?;
            let im = f64::from_le_bytes(buf);
            data.push(Complex64::new(re, im));
        }
        Ok(Self { n, data })
    }
}
