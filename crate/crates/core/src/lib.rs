//! Simulation toolkit for coherent control of mesoscopic atomic ensembles in
//! the regime of perfect Rydberg blockade.
//!
//! An ensemble of `N` identical atoms that never hosts more than one Rydberg
//! excitation stays in the permutation-symmetric subspace of its product
//! Hilbert space, so collective states can be labeled by per-level occupation
//! numbers. This crate builds those blockaded symmetric bases ([`basis`]),
//! composes time-dependent drive schedules ([`pulse`]), integrates the
//! Schrödinger equation in the rotating frame ([`dynamics`]), assembles named
//! multi-pulse protocols such as deterministic single-atom excitation and
//! ensemble-qubit gates ([`protocols`]), and reduces trajectories to
//! observables like excitation probabilities, truth tables and phase-error
//! sweeps ([`analysis`]).
//!
//! Units: time in µs, angular frequencies in rad/µs, ħ = 1. Constructors that
//! accept laboratory values take them as `value/2π` in MHz and convert at the
//! API boundary.

pub mod analysis;
pub mod basis;
pub mod dynamics;
pub mod ode;
pub mod oracle;
pub mod protocols;
pub mod pulse;

pub use basis::{Level, LevelScheme, RegisterBasis, Transition};
pub use dynamics::{HamiltonianModel, Sampling, StateVector, Trajectory};
pub use pulse::{DetuningLaw, Envelope, PulseSchedule, PulseSegment};

/// Convert a laboratory frequency quoted as `value/2π` in MHz into angular
/// rad/µs.
pub fn mhz(value_over_2pi: f64) -> f64 {
    std::f64::consts::TAU * value_over_2pi
}

/// Convert an angular frequency in rad/µs back to `value/2π` in MHz.
pub fn to_mhz(angular: f64) -> f64 {
    angular / std::f64::consts::TAU
}
