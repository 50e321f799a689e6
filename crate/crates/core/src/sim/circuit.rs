use num_complex::Complex64;

use super::channel::{conjugation_superop, LocalSuperop, NoiseModel, PauliChannel};
use super::density::DensityMatrix;
use crate::dense::{pauli_matrix, CMatrix};
use crate::error::{Error, Result};
use crate::model::{Gate, TrotterCircuit};
use crate::pauli::PauliString;

/// Tolerance on trace and Hermiticity of circuit outputs.
const STATE_TOL: f64 = 1e-8;

fn local_unitary(g: &Gate) -> CMatrix {
    let k = g.sites.len();
    let p = PauliString::uniform(k, g.kind.axis());
    let d = 1usize << k;
    let (c, s) = ((g.angle / 2.0).cos(), (g.angle / 2.0).sin());
    CMatrix::identity(d, d) * Complex64::new(c, 0.0) - pauli_matrix(&p) * Complex64::new(0.0, s)
}

/// Gate followed by its (scaled) noise channel, fused into one superoperator.
fn gate_superop(g: &Gate, noise: &NoiseModel, gain: f64) -> Result<LocalSuperop> {
    let unitary = conjugation_superop(&local_unitary(g));
    let channel: Option<&PauliChannel> = if g.is_two_qubit() {
        Some(&noise.two_qubit)
    } else {
        noise.one_qubit.as_ref()
    };
    let m = match channel {
        Some(ch) if ch.total_error() > 0.0 => {
            let factor = gain * g.noise_scale * noise.gate_multiplier(&g.sites);
            let total = ch.total_error() * factor;
            if total > 1.0 + 1e-12 {
                return Err(Error::ErrorProbabilityTooLarge(total));
            }
            ch.scaled(factor)?.superop() * unitary
        }
        _ => unitary,
    };
    Ok(LocalSuperop::new(g.sites.clone(), &m))
}

fn check_sites(circuit: &TrotterCircuit, rho: &DensityMatrix) -> Result<()> {
    if circuit.n != rho.n() {
        return Err(Error::LengthMismatch { left: circuit.n, right: rho.n() });
    }
    for g in circuit.gates() {
        if let Some(&s) = g.sites.iter().find(|&&s| s >= circuit.n) {
            return Err(Error::SiteOutOfRange { site: s, n: circuit.n });
        }
    }
    Ok(())
}

/// Runs the first `upto_step` Trotter steps of `circuit` on `rho0`.
///
/// Every gate is followed by its Pauli channel, with probabilities scaled by
/// the gate's `noise_scale`, its site multiplier and `gain`. Pass `gain = 1`
/// for folded circuits; larger values realise analog amplification.
pub fn run_circuit(
    circuit: &TrotterCircuit,
    noise: &NoiseModel,
    gain: f64,
    rho0: &DensityMatrix,
    upto_step: usize,
) -> Result<DensityMatrix> {
    let mut last = None;
    run_circuit_observed(circuit, noise, gain, rho0, &[upto_step], |_, rho| {
        last = Some(rho.clone());
        Ok(())
    })?;
    Ok(last.unwrap_or_else(|| rho0.clone()))
}

/// Runs the circuit and calls `observe(step, ρ)` after each step listed in
/// `steps` (ascending, a step of 0 observes `rho0`). Stops after the last one.
pub fn run_circuit_observed<F>(
    circuit: &TrotterCircuit,
    noise: &NoiseModel,
    gain: f64,
    rho0: &DensityMatrix,
    steps: &[usize],
    mut observe: F,
) -> Result<()>
where
    F: FnMut(usize, &DensityMatrix) -> Result<()>,
{
    if !(gain.is_finite() && gain >= 0.0) {
        return Err(Error::InvalidNoise(format!("gain {gain}")));
    }
    noise.validate()?;
    check_sites(circuit, rho0)?;
    if steps.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParams("observation steps must be ascending".into()));
    }
    if let Some(&last) = steps.last() {
        if last > circuit.steps() {
            return Err(Error::InvalidParams(format!(
                "step {last} requested from a {}-step circuit",
                circuit.steps()
            )));
        }
    }

    let mut rho = rho0.clone();
    let mut pending = steps.iter().copied().peekable();
    while pending.peek() == Some(&0) {
        observe(0, &rho)?;
        pending.next();
    }
    let mut done = 0usize;
    while let Some(&target) = pending.peek() {
        while done < target {
            for layer in &circuit.layers[circuit.step_layers(done)] {
                for g in layer {
                    gate_superop(g, noise, gain)?.apply(&mut rho);
                }
            }
            done += 1;
        }
        rho.check(STATE_TOL)?;
        while pending.peek() == Some(&target) {
            observe(target, &rho)?;
            pending.next();
        }
    }
    Ok(())
}

/// Exact expectations of `observables` after each listed step:
/// `out[step_index][observable_index]`.
pub fn expectations_at_steps(
    circuit: &TrotterCircuit,
    noise: &NoiseModel,
    gain: f64,
    rho0: &DensityMatrix,
    steps: &[usize],
    observables: &[PauliString],
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(steps.len());
    run_circuit_observed(circuit, noise, gain, rho0, steps, |_, rho| {
        let row = observables.iter().map(|o| rho.expectation(o)).collect::<Result<Vec<_>>>()?;
        out.push(row);
        Ok(())
    })?;
    Ok(out)
}
