use num_complex::Complex64;

use super::density::{i_pow, parity_sign, DensityMatrix};
use crate::error::{Error, Result};
use crate::model::Hamiltonian;
use crate::pauli::{Pauli, PauliString};

/// Largest chain the continuous-time backend accepts.
pub const LINDBLAD_MAX_SITES: usize = 8;

const STATE_TOL: f64 = 1e-8;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// States sampled every `dt`, starting with `rho0` at `t = 0`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

struct Generator {
    n: usize,
    lambda: f64,
    /// `(coeff, x, z, i^ny)` per Hamiltonian term.
    terms: Vec<(f64, usize, usize, Complex64)>,
    /// `(x, z)` masks of the single-site jump operators.
    jumps: Vec<(usize, usize)>,
}

impl Generator {
    fn new(h: &Hamiltonian, lambda: f64) -> Self {
        let n = h.n();
        let terms = h
            .terms()
            .iter()
            .map(|t| {
                let (x, z, ny) = t.op.masks();
                (t.coeff * t.op.phase().sign(), x, z, i_pow(ny))
            })
            .collect();
        let mut jumps = Vec::with_capacity(3 * n);
        for w in 0..n {
            for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
                let p = PauliString::single(n, w, letter).expect("site in range");
                let (x, z, _) = p.masks();
                jumps.push((x, z));
            }
        }
        Self { n, lambda, terms, jumps }
    }

    /// `out = −i[H, ρ] + λ Σ_w Σ_P (P_w ρ P_w − ρ)`.
    fn apply(&self, rho: &DensityMatrix, out: &mut DensityMatrix) {
        let dim = 1usize << self.n;
        let src = rho.data();
        let dst = out.data_mut();
        dst.iter_mut().for_each(|v| *v = ZERO);
        let minus_i = Complex64::new(0.0, -1.0);
        for &(c, x, z, ph) in &self.terms {
            // P|b⟩ = ph (−1)^{|b∧z|} |b⊕x⟩
            let k = minus_i * c * ph;
            for a in 0..dim {
                let left = k * parity_sign((a ^ x) & z);
                let row = (a ^ x) * dim;
                for b in 0..dim {
                    let right = k * parity_sign(b & z);
                    dst[a * dim + b] += left * src[row + b] - src[a * dim + (b ^ x)] * right;
                }
            }
        }
        if self.lambda > 0.0 {
            let jumps = self.jumps.len() as f64;
            for (d, s) in dst.iter_mut().zip(src) {
                *d -= s * (self.lambda * jumps);
            }
            for &(x, z) in &self.jumps {
                rho.pauli_sandwich_into(x, z, out.data_mut(), self.lambda);
            }
        }
    }
}

fn axpy(out: &mut DensityMatrix, base: &DensityMatrix, k: &DensityMatrix, h: f64) {
    for ((o, b), d) in out.data_mut().iter_mut().zip(base.data()).zip(k.data()) {
        *o = b + d * h;
    }
}

fn check_inputs(h: &Hamiltonian, lambda: f64, rho0: &DensityMatrix, t: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParams(format!("dt must be > 0, got {dt}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParams(format!("t must be >= 0, got {t}")));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidNoise(format!("lambda must be >= 0, got {lambda}")));
    }
    if h.n() != rho0.n() {
        return Err(Error::LengthMismatch { left: h.n(), right: rho0.n() });
    }
    if h.n() > LINDBLAD_MAX_SITES {
        return Err(Error::InvalidParams(format!(
            "continuous-time backend supports up to {LINDBLAD_MAX_SITES} sites, got {}",
            h.n()
        )));
    }
    let steps = (t / dt).round();
    if (steps * dt - t).abs() > 1e-9 * t.max(1.0) {
        return Err(Error::InvalidParams(format!("t = {t} is not a multiple of dt = {dt}")));
    }
    Ok(steps as usize)
}

/// Integrates the master equation with fixed-step RK4 and calls
/// `observe(t, ρ)` at `t = 0, dt, …, t`.
pub fn evolve_lindblad_observed<F>(
    h: &Hamiltonian,
    lambda: f64,
    rho0: &DensityMatrix,
    t: f64,
    dt: f64,
    mut observe: F,
) -> Result<()>
where
    F: FnMut(f64, &DensityMatrix) -> Result<()>,
{
    let steps = check_inputs(h, lambda, rho0, t, dt)?;
    let gen = Generator::new(h, lambda);
    let mut rho = rho0.clone();
    let mut k1 = rho.clone();
    let mut k2 = rho.clone();
    let mut k3 = rho.clone();
    let mut k4 = rho.clone();
    let mut tmp = rho.clone();
    observe(0.0, &rho)?;
    for step in 1..=steps {
        gen.apply(&rho, &mut k1);
        axpy(&mut tmp, &rho, &k1, dt / 2.0);
        gen.apply(&tmp, &mut k2);
        axpy(&mut tmp, &rho, &k2, dt / 2.0);
        gen.apply(&tmp, &mut k3);
        axpy(&mut tmp, &rho, &k3, dt);
        gen.apply(&tmp, &mut k4);
        let data = rho.data_mut();
        for (i, d) in data.iter_mut().enumerate() {
            *d += (k1.data()[i] + (k2.data()[i] + k3.data()[i]) * 2.0 + k4.data()[i]) * (dt / 6.0);
        }
        rho.check(STATE_TOL).map_err(|e| {
            Error::InvariantViolation(format!("step {step}: {e}; reduce dt"))
        })?;
        observe(step as f64 * dt, &rho)?;
    }
    Ok(())
}

/// Full trajectory of the master equation sampled every `dt`.
pub fn evolve_lindblad(h: &Hamiltonian, lambda: f64, rho0: &DensityMatrix, t: f64, dt: f64) -> Result<Trajectory> {
    let mut traj = Trajectory { times: Vec::new(), states: Vec::new() };
    evolve_lindblad_observed(h, lambda, rho0, t, dt, |time, rho| {
        traj.times.push(time);
        traj.states.push(rho.clone());
        Ok(())
    })?;
    Ok(traj)
}

/// Expectations of `observables` along the trajectory:
/// returns `(times, values[time][observable])` without storing states.
pub fn lindblad_expectations(
    h: &Hamiltonian,
    lambda: f64,
    rho0: &DensityMatrix,
    t: f64,
    dt: f64,
    observables: &[PauliString],
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    evolve_lindblad_observed(h, lambda, rho0, t, dt, |time, rho| {
        times.push(time);
        values.push(observables.iter().map(|o| rho.expectation(o)).collect::<Result<Vec<_>>>()?);
        Ok(())
    })?;
    Ok((times, values))
}
