//! Observables: excitation probabilities, truth tables, error sweeps and
//! loading statistics.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use thiserror::Error;

use crate::basis::RegisterBasis;
use crate::dynamics::{HamiltonianModel, Sampling, Trajectory};
use crate::ode::OdeOptions;
use crate::protocols::{self, ProtocolError, ProtocolKind, ProtocolSpec, PulseParams};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),

    #[error("protocol {0:?} is not a two-qubit gate")]
    NotTwoQubit(ProtocolKind),

    #[error("protocol {0:?} is not a double passage sequence")]
    NotDoubleSequence(ProtocolKind),

    #[error("sweep grid must lie in (0, 2] and be strictly increasing")]
    BadGrid,
}

/// Probability of exactly one Rydberg excitation (summed over ensembles) in
/// a state vector.
pub fn single_excitation_probability(basis: &RegisterBasis, amplitudes: &Array1<C64>) -> f64 {
    (0..basis.dim())
        .filter(|&i| basis.total_rydberg(i) == 1)
        .map(|i| amplitudes[i].norm_sqr())
        .sum()
}

/// Time series of the single-excitation probability along a trajectory.
pub fn excitation_series(basis: &RegisterBasis, traj: &Trajectory) -> Vec<f64> {
    traj.states
        .iter()
        .map(|psi| single_excitation_probability(basis, psi))
        .collect()
}

/// Populations split into (ground manifold, intermediate manifold, single
/// Rydberg). The three add up to the squared norm: every blockaded basis
/// state falls in exactly one class.
pub fn population_partition(basis: &RegisterBasis, amplitudes: &Array1<C64>) -> (f64, f64, f64) {
    let mut ground = 0.0;
    let mut intermediate = 0.0;
    let mut rydberg = 0.0;
    for (i, occ) in basis.states().iter().enumerate() {
        let p = amplitudes[i].norm_sqr();
        if basis.total_rydberg(i) == 1 {
            rydberg += p;
            continue;
        }
        let has_e: bool = (0..basis.n_ensembles()).any(|k| {
            let (scheme, _) = basis.ensemble(k).unwrap();
            scheme
                .levels()
                .iter()
                .zip(&occ[k])
                .any(|(l, &n)| !l.is_ground() && !l.is_rydberg() && n > 0)
        });
        if has_e {
            intermediate += p;
        } else {
            ground += p;
        }
    }
    (ground, intermediate, rydberg)
}

/// Poisson distribution `P(N) = e^{−N̄} N̄^N / N!` for `N = 0..=n_max`.
pub fn poisson_distribution(nbar: f64, n_max: u32) -> Vec<f64> {
    let mut p = (-nbar).exp();
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(p);
    for n in 1..=n_max {
        p *= nbar / n as f64;
        out.push(p);
    }
    out
}

/// Measured truth table of a two-qubit gate.
pub struct TruthTable {
    /// Logical input labels in row order (`00`, `01`, `10`, `11`).
    pub inputs: Vec<String>,
    /// `P(out | in)`: row = input, column = output.
    pub probabilities: Array2<f64>,
    /// Decoded output amplitudes, row = input.
    pub amplitudes: Array2<C64>,
    /// Ideal gate matrix (column = input).
    pub target: Array2<C64>,
    /// Largest deviation of any measured probability from the ideal
    /// `|U|²` pattern.
    pub max_probability_deviation: f64,
    /// Leakage per input row.
    pub leakage: Vec<f64>,
    pub leakage_flagged: bool,
}

impl TruthTable {
    /// `‖U†U − I‖_max` of the decoded amplitude matrix.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.amplitudes.nrows();
        // Decoded gate with column = input is the transpose of the row-major
        // amplitude storage.
        let mut defect = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..dim {
                    // (U†U)_{ij} = Σ_k conj(U_{ki}) U_{kj}; U_{k,in} = amplitudes[in][k]
                    acc += self.amplitudes[(i, k)].conj() * self.amplitudes[(j, k)];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((acc - C64::new(target, 0.0)).norm());
            }
        }
        defect
    }
}

/// Ideal gate matrix (column = input) of a two-qubit protocol, in the
/// paper's phase conventions: the CNOT swaps `00 ↔ 01` with amplitude −1 and
/// leaves `10`, `11` with −i; the controlled-phase gate is
/// `diag(1, −1, −1, −1)`.
pub fn ideal_gate(kind: &ProtocolKind) -> Option<Array2<C64>> {
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    match kind {
        ProtocolKind::MwCnot | ProtocolKind::OptCnot => {
            let mut u = Array2::from_elem((4, 4), zero);
            u[(0, 1)] = -one;
            u[(1, 0)] = -one;
            u[(2, 2)] = -i;
            u[(3, 3)] = -i;
            Some(u)
        }
        ProtocolKind::MwCz | ProtocolKind::OptCz => {
            let mut u = Array2::from_elem((4, 4), zero);
            u[(0, 0)] = one;
            u[(1, 1)] = -one;
            u[(2, 2)] = -one;
            u[(3, 3)] = -one;
            Some(u)
        }
        _ => None,
    }
}

/// Run all four logical inputs of a two-qubit gate and compare the decoded
/// outputs against the ideal matrix.
pub fn truth_table(spec: &ProtocolSpec, opts: &OdeOptions) -> Result<TruthTable, AnalysisError> {
    let target = ideal_gate(&spec.kind).ok_or(AnalysisError::NotTwoQubit(spec.kind))?;
    let runs: Vec<Result<(Vec<C64>, f64), ProtocolError>> = (0..4usize)
        .into_par_iter()
        .map(|input| {
            let mut logical = [C64::new(0.0, 0.0); 4];
            logical[input] = C64::new(1.0, 0.0);
            let gate = protocols::run_gate(spec, &logical, Sampling::EndpointsOnly, opts)?;
            Ok((gate.logical_out, gate.leakage))
        })
        .collect();

    let mut amplitudes = Array2::from_elem((4, 4), C64::new(0.0, 0.0));
    let mut probabilities = Array2::zeros((4, 4));
    let mut leakage = Vec::with_capacity(4);
    for (row, res) in runs.into_iter().enumerate() {
        let (out, leak) = res?;
        for (col, amp) in out.iter().enumerate() {
            amplitudes[(row, col)] = *amp;
            probabilities[(row, col)] = amp.norm_sqr();
        }
        leakage.push(leak);
    }

    let mut max_dev = 0.0f64;
    for row in 0..4 {
        for col in 0..4 {
            // target column = input: ideal P(out=col | in=row) = |U_{col,row}|².
            let ideal = target[(col, row)].norm_sqr();
            max_dev = max_dev.max((probabilities[(row, col)] - ideal).abs());
        }
    }
    let leakage_flagged = leakage.iter().any(|&l| l > protocols::LEAKAGE_THRESHOLD);
    Ok(TruthTable {
        inputs: vec!["00".into(), "01".into(), "10".into(), "11".into()],
        probabilities,
        amplitudes,
        target,
        max_probability_deviation: max_dev,
        leakage,
        leakage_flagged,
    })
}

/// One point of a ratio sweep.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub ratio: f64,
    pub n: u32,
    /// `1 − P(return to |0̄⟩)` at the end of the double sequence.
    pub population_error: f64,
    /// `|final ground-state phase|`, or `None` if the ground amplitude is
    /// too small for the phase to be defined.
    pub phase_error: Option<f64>,
    /// Set when the integration failed at this point.
    pub failed: bool,
}

/// Grid sweep of the second-passage Rabi amplitude of a double sequence.
pub struct SweepResult {
    pub ratios: Vec<f64>,
    pub n_list: Vec<u32>,
    /// Points in grid-major order: `points[g * n_list.len() + k]`.
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn point(&self, grid_index: usize, n_index: usize) -> &SweepPoint {
        &self.points[grid_index * self.n_list.len() + n_index]
    }
}

/// Scale the second passage of a double sequence by each ratio in `grid` and
/// record the population and phase errors per atom number. Points run in
/// parallel and are merged in grid order.
pub fn rabi_ratio_sweep(
    spec: &ProtocolSpec,
    grid: &[f64],
    n_list: &[u32],
    opts: &OdeOptions,
) -> Result<SweepResult, AnalysisError> {
    if !matches!(
        spec.kind,
        ProtocolKind::DoubleArp { .. } | ProtocolKind::DoubleStirap { .. }
    ) {
        return Err(AnalysisError::NotDoubleSequence(spec.kind));
    }
    if grid.is_empty()
        || grid.iter().any(|&r| r <= 0.0 || r > 2.0)
        || grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(AnalysisError::BadGrid);
    }

    let tasks: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..n_list.len()).map(move |k| (g, k)))
        .collect();
    let points: Vec<SweepPoint> = tasks
        .par_iter()
        .map(|&(g, k)| {
            let ratio = grid[g];
            let n = n_list[k];
            let mut sub = spec.clone();
            sub.n_atoms = vec![n];
            let run = protocols::build(&sub).and_then(|mut built| {
                for &idx in &built.second_passage.clone() {
                    built.schedule.segments[idx] = built.schedule.segments[idx].scaled(ratio);
                }
                let model = HamiltonianModel::new(&built.basis, &built.schedule)?;
                let traj = model.evolve_with(
                    &built.initial,
                    (built.schedule.t0, built.schedule.t1),
                    Sampling::EndpointsOnly,
                    opts,
                )?;
                let ground = built.basis.all_ground_index();
                let amp = traj.final_state.amplitudes[ground];
                Ok((amp.norm_sqr(), amp))
            });
            match run {
                Ok((p_ground, amp)) => SweepPoint {
                    ratio,
                    n,
                    population_error: (1.0 - p_ground).max(0.0),
                    phase_error: if amp.norm() > 1e-6 {
                        Some(protocols::wrap_phase(amp.arg()).abs())
                    } else {
                        None
                    },
                    failed: false,
                },
                Err(_) => SweepPoint {
                    ratio,
                    n,
                    population_error: f64::NAN,
                    phase_error: None,
                    failed: true,
                },
            }
        })
        .collect();

    Ok(SweepResult {
        ratios: grid.to_vec(),
        n_list: n_list.to_vec(),
        points,
    })
}

/// `P(|1̄⟩)` after two sequential π/2 rotations versus the relative
/// microwave phase, per atom number. Rows follow `n_list`, columns follow
/// `phi_grid`.
pub fn interference_curves(
    n_list: &[u32],
    phi_grid: &[f64],
    params: &PulseParams,
    sign_switch: bool,
    opts: &OdeOptions,
) -> Result<Vec<Vec<f64>>, AnalysisError> {
    n_list
        .iter()
        .map(|&n| {
            phi_grid
                .par_iter()
                .map(|&phi| {
                    protocols::run_interference(n, phi, params, sign_switch, opts)
                        .map_err(AnalysisError::from)
                })
                .collect::<Result<Vec<f64>, AnalysisError>>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{Level, LevelScheme};
    use approx::assert_relative_eq;

    #[test]
    fn poisson_reference_values() {
        let p = poisson_distribution(5.0, 15);
        // e^{-5} = 0.006737947
        assert_relative_eq!(p[0], 0.006737947, epsilon = 1e-9);
        assert_relative_eq!(p[5], 0.17546737, epsilon = 1e-7);
        // Tail deficit below 1e-4 at n_max = 15.
        let total: f64 = p.iter().sum();
        assert!(1.0 - total < 1e-4);
        // N̄ → 0⁺: P(0) → 1.
        assert_relative_eq!(poisson_distribution(1e-12, 3)[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn excitation_probability_ground_state_is_zero() {
        let basis = RegisterBasis::single(LevelScheme::new(vec![Level::G0, Level::R0]).unwrap(), 3)
            .unwrap();
        let mut amps = Array1::zeros(basis.dim());
        amps[basis.all_ground_index()] = C64::new(1.0, 0.0);
        assert_eq!(single_excitation_probability(&basis, &amps), 0.0);
    }

    #[test]
    fn partition_covers_norm() {
        let basis = RegisterBasis::single(
            LevelScheme::new(vec![Level::G0, Level::E, Level::R0]).unwrap(),
            2,
        )
        .unwrap();
        let dim = basis.dim();
        let amps: Array1<C64> = (0..dim)
            .map(|k| C64::new(0.3 + k as f64 * 0.1, 0.2))
            .collect();
        let (g, e, r) = population_partition(&basis, &amps);
        let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        assert_relative_eq!(g + e + r, norm_sq, epsilon = 1e-12);
    }

    #[test]
    fn ideal_cnot_pattern() {
        let u = ideal_gate(&ProtocolKind::MwCnot).unwrap();
        // Input 00 (column 0) maps to output 01.
        assert_relative_eq!(u[(1, 0)].norm_sqr(), 1.0);
        assert_relative_eq!(u[(0, 1)].norm_sqr(), 1.0);
        assert_relative_eq!(u[(2, 2)].norm_sqr(), 1.0);
        assert_relative_eq!(u[(3, 3)].norm_sqr(), 1.0);
    }
}
