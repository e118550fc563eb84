//! Rotating-frame Hamiltonian assembly and Schrödinger evolution.
//!
//! The Hamiltonian over a [`RegisterBasis`] is
//!
//! ```text
//! H(t) = Σ_levels Δ_level(t) · n̂_level
//!      + Σ_segments (Ω_seg(t)/2) · e^{iφ_seg} Â_seg + h.c.
//! ```
//!
//! where `Â_seg` is the collective raising operator of the segment's
//! transition (matrix elements `√(n_a(n_b+1))` from the basis) and the
//! diagonal frame terms come from each segment's detuning law applied to the
//! upper level of its transition while the segment is active. Segments on the
//! same level with an identical law share a single frame term, so the two
//! halves of a double sequence never double-count the detuning. The all-ground
//! configuration has zero diagonal energy at all times, fixing the phase
//! gauge of the collective ground-state amplitude.
//!
//! Evolution integrates `i dψ/dt = H(t)ψ` (ħ = 1) with the Dormand–Prince
//! 5(4) stepper, split at segment window edges and detuning switch times.
//! The norm is never re-imposed; its drift is reported as the integration
//! quality metric.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::basis::{BasisError, Level, RaiseOutcome, RegisterBasis};
use crate::ode::{self, OdeError, OdeOptions};
use crate::pulse::{DetuningLaw, PulseSchedule};

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Basis(#[from] BasisError),

    #[error("initial state norm is {0}, expected 1")]
    NotNormalized(f64),

    #[error("state vector has length {0} but the basis has dimension {1}")]
    DimensionMismatch(usize, usize),

    #[error("time span [{0}, {1}] lies outside the schedule window [{2}, {3}]")]
    SpanOutOfWindow(f64, f64, f64, f64),

    #[error("sample spacing must be positive (got {0})")]
    NonPositiveDt(f64),

    #[error("integration failed: {0}")]
    Integration(#[from] OdeError),
}

/// Complex amplitudes over a [`RegisterBasis`] at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub amplitudes: Array1<C64>,
    pub time: f64,
}

impl StateVector {
    /// Unit amplitude on a single basis state.
    pub fn basis_state(basis: &RegisterBasis, index: usize, time: f64) -> Self {
        let mut amplitudes = Array1::zeros(basis.dim());
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes, time }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Time-ordered samples of an evolution.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Array1<C64>>,
    pub final_state: StateVector,
    /// `|‖ψ(t_end)‖² − 1|`; the integration-quality signal.
    pub norm_drift: f64,
    pub n_accepted: usize,
    pub n_rejected: usize,
}

impl Trajectory {
    pub fn state_at(&self, k: usize) -> StateVector {
        StateVector {
            amplitudes: self.states[k].clone(),
            time: self.times[k],
        }
    }
}

/// Output sampling policy for [`HamiltonianModel::evolve`].
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Sampling {
    /// Record the state on a uniform grid with spacing `dt`.
    Dense { dt: f64 },
    /// Record only the initial and final states.
    EndpointsOnly,
}

struct CouplingOp {
    /// `(source index, target index, √(n_a(n_b+1)))` for the raising part.
    entries: Vec<(usize, usize, f64)>,
}

struct FrameTerm {
    ensemble: usize,
    level: Level,
    law: DetuningLaw,
    windows: Vec<(f64, f64)>,
    /// Occupation of `level` in each basis state.
    weights: Vec<f64>,
}

impl FrameTerm {
    fn active(&self, t: f64) -> bool {
        self.windows.iter().any(|&(a, b)| a <= t && t < b)
    }
}

/// A pulse schedule bound to a register basis, ready to evaluate `H(t)` and
/// integrate the Schrödinger equation. Immutable once built; evolutions of
/// different initial states may run concurrently.
pub struct HamiltonianModel<'a> {
    basis: &'a RegisterBasis,
    schedule: &'a PulseSchedule,
    couplings: Vec<CouplingOp>,
    frame: Vec<FrameTerm>,
}

impl<'a> HamiltonianModel<'a> {
    /// Bind `schedule` to `basis`, precomputing the sparse collective
    /// operators. Segments addressing levels absent from the ensemble's
    /// scheme are rejected here.
    pub fn new(
        basis: &'a RegisterBasis,
        schedule: &'a PulseSchedule,
    ) -> Result<Self, DynamicsError> {
        let dim = basis.dim();
        let mut couplings = Vec::with_capacity(schedule.segments.len());
        let mut frame: Vec<FrameTerm> = Vec::new();

        for seg in &schedule.segments {
            // Validates ensemble index and both levels.
            let scheme = basis.scheme(seg.transition.ensemble)?;
            for level in [seg.transition.from, seg.transition.to] {
                if scheme.position(level).is_none() {
                    return Err(BasisError::UnknownLevel(level, seg.transition.ensemble).into());
                }
            }

            let mut entries = Vec::new();
            for i in 0..dim {
                match basis.raise(i, &seg.transition)? {
                    RaiseOutcome::Coupled(j, elem) => entries.push((i, j, elem)),
                    RaiseOutcome::Empty | RaiseOutcome::Blocked => {}
                }
            }
            couplings.push(CouplingOp { entries });

            // Frame bookkeeping: the law rides on the upper level of the
            // transition. Identical (ensemble, level, law) terms merge.
            let ensemble = seg.transition.ensemble;
            let level = seg.transition.to;
            if let Some(term) = frame
                .iter_mut()
                .find(|f| f.ensemble == ensemble && f.level == level && f.law == seg.detuning)
            {
                term.windows.push(seg.window);
            } else {
                let weights = (0..dim)
                    .map(|i| basis.count(i, ensemble, level).map(f64::from))
                    .collect::<Result<Vec<f64>, BasisError>>()?;
                frame.push(FrameTerm {
                    ensemble,
                    level,
                    law: seg.detuning,
                    windows: vec![seg.window],
                    weights,
                });
            }
        }
        Ok(Self {
            basis,
            schedule,
            couplings,
            frame,
        })
    }

    pub fn basis(&self) -> &RegisterBasis {
        self.basis
    }

    pub fn schedule(&self) -> &PulseSchedule {
        self.schedule
    }

    /// Dense Hermitian matrix of `H(t)` in rad/µs.
    pub fn hamiltonian_at(&self, t: f64) -> Array2<C64> {
        let dim = self.basis.dim();
        let mut h = Array2::<C64>::zeros((dim, dim));
        for term in &self.frame {
            if term.active(t) {
                let v = term.law.value(t);
                if v != 0.0 {
                    for (i, w) in term.weights.iter().enumerate() {
                        h[(i, i)] += C64::new(v * w, 0.0);
                    }
                }
            }
        }
        for (seg, op) in self.schedule.segments.iter().zip(&self.couplings) {
            let amp = seg.amplitude_at(t);
            if amp == 0.0 {
                continue;
            }
            let half = 0.5 * amp * C64::new(0.0, seg.carrier_phase).exp();
            for &(i, j, elem) in &op.entries {
                let v = half * elem;
                h[(j, i)] += v;
                h[(i, j)] += v.conj();
            }
        }
        h
    }

    /// Apply `dψ = −i H(t) ψ` without materializing the matrix.
    fn apply_rhs(&self, t: f64, psi: &Array1<C64>, out: &mut Array1<C64>) {
        out.fill(C64::new(0.0, 0.0));
        for term in &self.frame {
            if term.active(t) {
                let v = term.law.value(t);
                if v != 0.0 {
                    for (i, w) in term.weights.iter().enumerate() {
                        if *w != 0.0 {
                            out[i] += C64::new(0.0, -v * w) * psi[i];
                        }
                    }
                }
            }
        }
        for (seg, op) in self.schedule.segments.iter().zip(&self.couplings) {
            let amp = seg.amplitude_at(t);
            if amp == 0.0 {
                continue;
            }
            // −i (Ω/2) e^{iφ} on the raising part, conjugate on the lowering.
            let up = C64::new(0.0, -0.5 * amp) * C64::new(0.0, seg.carrier_phase).exp();
            let down = up.conj() * C64::new(-1.0, 0.0);
            for &(i, j, elem) in &op.entries {
                out[j] += up * elem * psi[i];
                out[i] += down * elem * psi[j];
            }
        }
    }

    /// Integrate the Schrödinger equation from `psi0` over `t_span`.
    pub fn evolve(
        &self,
        psi0: &StateVector,
        t_span: (f64, f64),
        sampling: Sampling,
    ) -> Result<Trajectory, DynamicsError> {
        self.evolve_with(psi0, t_span, sampling, &OdeOptions::default())
    }

    /// [`HamiltonianModel::evolve`] with explicit integrator tolerances.
    pub fn evolve_with(
        &self,
        psi0: &StateVector,
        t_span: (f64, f64),
        sampling: Sampling,
        opts: &OdeOptions,
    ) -> Result<Trajectory, DynamicsError> {
        let (ta, tb) = t_span;
        if psi0.amplitudes.len() != self.basis.dim() {
            return Err(DynamicsError::DimensionMismatch(
                psi0.amplitudes.len(),
                self.basis.dim(),
            ));
        }
        if ta < self.schedule.t0 - 1e-12 || tb > self.schedule.t1 + 1e-12 || ta >= tb {
            return Err(DynamicsError::SpanOutOfWindow(
                ta,
                tb,
                self.schedule.t0,
                self.schedule.t1,
            ));
        }
        let norm = psi0.norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(DynamicsError::NotNormalized(norm));
        }

        let sample_times: Vec<f64> = match sampling {
            Sampling::Dense { dt } => {
                if dt <= 0.0 {
                    return Err(DynamicsError::NonPositiveDt(dt));
                }
                let n = ((tb - ta) / dt + 1e-9).floor() as usize;
                (0..=n).map(|k| ta + k as f64 * dt).collect()
            }
            Sampling::EndpointsOnly => vec![ta, tb],
        };

        // Split the integration at envelope edges and detuning switches.
        let mut edges: Vec<f64> = self
            .schedule
            .breakpoints()
            .into_iter()
            .filter(|&t| t > ta && t < tb)
            .collect();
        edges.push(tb);

        let mut y = psi0.amplitudes.clone();
        let mut t = ta;
        let mut states: Vec<Array1<C64>> = Vec::with_capacity(sample_times.len());
        let mut cursor = 0usize;
        let mut n_accepted = 0usize;
        let mut n_rejected = 0usize;

        for edge in edges {
            if edge - t < 1e-12 {
                continue;
            }
            let upto = sample_times[cursor..]
                .iter()
                .take_while(|&&s| s <= edge + 1e-12)
                .count();
            let piece_samples = &sample_times[cursor..cursor + upto];
            let sol = ode::solve(
                |tt, yy, dy| self.apply_rhs(tt, yy, dy),
                t,
                edge,
                y,
                piece_samples,
                opts,
            )?;
            states.extend(sol.samples);
            cursor += upto;
            n_accepted += sol.n_accepted;
            n_rejected += sol.n_rejected;
            y = sol.final_state;
            t = edge;
        }
        // Any trailing samples equal to tb within tolerance.
        while cursor < sample_times.len() {
            states.push(y.clone());
            cursor += 1;
        }

        let final_state = StateVector {
            amplitudes: y,
            time: tb,
        };
        let norm_drift = (final_state.norm().powi(2) - 1.0).abs();
        Ok(Trajectory {
            times: sample_times,
            states,
            final_state,
            norm_drift,
            n_accepted,
            n_rejected,
        })
    }
}
