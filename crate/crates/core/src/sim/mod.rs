//! Exact density-matrix simulation: gate circuits with Pauli noise, the
//! continuous-time master equation, shot sampling and channel distances.

mod channel;
mod choi;
mod circuit;
mod density;
mod lindblad;
mod sampling;

pub use channel::{conjugation_superop, LocalSuperop, NoiseModel, PauliChannel};
pub use choi::{channel_distance_bound, choi_from_superop, two_qubit_cliffords, TWO_QUBIT_CLIFFORD_COUNT};
pub use circuit::{expectations_at_steps, run_circuit, run_circuit_observed};
pub use density::DensityMatrix;
pub use lindblad::{evolve_lindblad, evolve_lindblad_observed, lindblad_expectations, Trajectory, LINDBLAD_MAX_SITES};
pub use sampling::{derive_seed, sample_expectation, sample_from_value, UncertainValue};
