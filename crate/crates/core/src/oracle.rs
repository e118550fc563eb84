//! Brute-force product-basis reference evolution.
//!
//! Deliberately naive validation oracle for the symmetric-basis machinery:
//! atoms are kept distinguishable, the Hamiltonian couples one atom at a time
//! with unit matrix elements, and blockade is imposed by deleting every
//! product state with more than one Rydberg excitation. Starting from a
//! permutation-symmetric initial state, the projection of the evolved product
//! state onto symmetrized states must match the symmetric-basis result
//! amplitude for amplitude. Intended for N ≤ 3 in validation suites only;
//! nothing in the main code paths calls it.

use std::collections::HashMap;

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::basis::{Level, RegisterBasis};
use crate::dynamics::DynamicsError;
use crate::ode::{self, OdeOptions};
use crate::pulse::{DetuningLaw, PulseSchedule};

/// Product-basis register: each atom of each ensemble carries an explicit
/// level, states violating blockade are dropped.
pub struct ProductBasis {
    /// (levels of the scheme, atom count) per ensemble.
    ensembles: Vec<(Vec<Level>, u32)>,
    /// Each state: per ensemble, one level per atom.
    states: Vec<Vec<Vec<Level>>>,
    index: HashMap<Vec<Vec<Level>>, usize>,
}

impl ProductBasis {
    /// Mirror the configuration of `basis` in the product space.
    pub fn from_register(basis: &RegisterBasis) -> Self {
        let ensembles: Vec<(Vec<Level>, u32)> = (0..basis.n_ensembles())
            .map(|k| {
                let (scheme, n) = basis.ensemble(k).unwrap();
                (scheme.levels().to_vec(), n)
            })
            .collect();
        let cross_blockade = basis.cross_blockade();

        let per_ensemble: Vec<Vec<Vec<Level>>> = ensembles
            .iter()
            .map(|(levels, n)| {
                let mut configs: Vec<Vec<Level>> = vec![vec![]];
                for _ in 0..*n {
                    configs = configs
                        .into_iter()
                        .flat_map(|c| {
                            levels.iter().map(move |&l| {
                                let mut cc = c.clone();
                                cc.push(l);
                                cc
                            })
                        })
                        .collect();
                }
                configs
                    .into_iter()
                    .filter(|c| c.iter().filter(|l| l.is_rydberg()).count() <= 1)
                    .collect()
            })
            .collect();

        let mut states: Vec<Vec<Vec<Level>>> = Vec::new();
        match per_ensemble.as_slice() {
            [one] => {
                for c in one {
                    states.push(vec![c.clone()]);
                }
            }
            [first, second] => {
                for c0 in first {
                    for c1 in second {
                        if cross_blockade {
                            let total = c0.iter().filter(|l| l.is_rydberg()).count()
                                + c1.iter().filter(|l| l.is_rydberg()).count();
                            if total > 1 {
                                continue;
                            }
                        }
                        states.push(vec![c0.clone(), c1.clone()]);
                    }
                }
            }
            _ => unreachable!(),
        }
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Self {
            ensembles,
            states,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    fn index_of(&self, state: &[Vec<Level>]) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// All atoms of every ensemble in the first level of their scheme.
    pub fn all_ground(&self) -> Array1<C64> {
        let ground: Vec<Vec<Level>> = self
            .ensembles
            .iter()
            .map(|(levels, n)| vec![levels[0]; *n as usize])
            .collect();
        let mut psi = Array1::zeros(self.dim());
        psi[self.index_of(&ground).unwrap()] = C64::new(1.0, 0.0);
        psi
    }

    /// The permutation-symmetric product state corresponding to one
    /// occupation-number basis state of `basis`: equal amplitude `1/√M` on
    /// each of the `M` distinct arrangements.
    pub fn embed_symmetric(&self, basis: &RegisterBasis, sym_index: usize) -> Array1<C64> {
        let occ = basis.occupation(sym_index).unwrap();
        let mut psi = Array1::zeros(self.dim());
        let mut hits = Vec::new();
        for (idx, state) in self.states.iter().enumerate() {
            let matches = state.iter().enumerate().all(|(k, atoms)| {
                let levels = &self.ensembles[k].0;
                levels
                    .iter()
                    .zip(&occ[k])
                    .all(|(&l, &n)| atoms.iter().filter(|&&a| a == l).count() as u32 == n)
            });
            if matches {
                hits.push(idx);
            }
        }
        let amp = C64::new(1.0 / (hits.len() as f64).sqrt(), 0.0);
        for idx in hits {
            psi[idx] = amp;
        }
        psi
    }

    /// Integrate the product-space Schrödinger equation over the whole
    /// schedule window and return the final product-state amplitudes.
    pub fn evolve(
        &self,
        schedule: &PulseSchedule,
        psi0: Array1<C64>,
        opts: &OdeOptions,
    ) -> Result<Array1<C64>, DynamicsError> {
        // One (source, target) index pair per atom move; the matrix element
        // of a single-atom transition is 1. Pairs whose target was deleted
        // by the blockade are simply absent.
        let moves: Vec<Vec<(usize, usize)>> = schedule
            .segments
            .iter()
            .map(|seg| {
                let k = seg.transition.ensemble;
                let mut pairs = Vec::new();
                for (idx, state) in self.states.iter().enumerate() {
                    for atom in 0..state[k].len() {
                        if state[k][atom] == seg.transition.from {
                            let mut target = state.clone();
                            target[k][atom] = seg.transition.to;
                            if let Some(jdx) = self.index_of(&target) {
                                pairs.push((idx, jdx));
                            }
                        }
                    }
                }
                pairs
            })
            .collect();
        // Occupancy of each segment's upper level per state, for the
        // diagonal detuning terms.
        let occupancy: Vec<Vec<f64>> = schedule
            .segments
            .iter()
            .map(|seg| {
                self.states
                    .iter()
                    .map(|state| {
                        state[seg.transition.ensemble]
                            .iter()
                            .filter(|&&l| l == seg.transition.to)
                            .count() as f64
                    })
                    .collect()
            })
            .collect();

        let rhs = |t: f64, psi: &Array1<C64>, out: &mut Array1<C64>| {
            out.fill(C64::new(0.0, 0.0));
            let mut seen: Vec<(usize, Level, DetuningLaw)> = Vec::new();
            for (s, seg) in schedule.segments.iter().enumerate() {
                if !seg.is_active(t) {
                    continue;
                }
                let key = (seg.transition.ensemble, seg.transition.to, seg.detuning);
                if seen.contains(&key) {
                    continue;
                }
                seen.push(key);
                let v = seg.detuning.value(t);
                if v == 0.0 {
                    continue;
                }
                for (idx, &count) in occupancy[s].iter().enumerate() {
                    if count > 0.0 {
                        out[idx] += C64::new(0.0, -v * count) * psi[idx];
                    }
                }
            }
            for (s, seg) in schedule.segments.iter().enumerate() {
                let amp = seg.amplitude_at(t);
                if amp == 0.0 {
                    continue;
                }
                let up = C64::new(0.0, -0.5 * amp) * C64::new(0.0, seg.carrier_phase).exp();
                let down = -up.conj();
                for &(i, j) in &moves[s] {
                    out[j] += up * psi[i];
                    out[i] += down * psi[j];
                }
            }
        };

        let mut edges = schedule.breakpoints();
        edges.push(schedule.t1);
        let mut y = psi0;
        let mut t = schedule.t0;
        for edge in edges {
            if edge - t < 1e-12 {
                continue;
            }
            let sol = ode::solve(rhs, t, edge, y, &[], opts)?;
            y = sol.final_state;
            t = edge;
        }
        Ok(y)
    }

    /// Project product amplitudes onto the symmetrized states of `basis`:
    /// for occupation `n⃗` the symmetric amplitude is `(1/√M) Σ_arrangements
    /// ⟨arrangement|ψ⟩` with `M` the number of distinct arrangements.
    pub fn project_symmetric(&self, basis: &RegisterBasis, psi: &Array1<C64>) -> Array1<C64> {
        let mut out = Array1::zeros(basis.dim());
        for (idx, state) in self.states.iter().enumerate() {
            let occ: Vec<Vec<u32>> = state
                .iter()
                .enumerate()
                .map(|(k, atoms)| {
                    let levels = &self.ensembles[k].0;
                    levels
                        .iter()
                        .map(|&l| atoms.iter().filter(|&&a| a == l).count() as u32)
                        .collect()
                })
                .collect();
            if let Some(j) = basis.index_of(&occ) {
                out[j] += psi[idx];
            }
        }
        // Normalize each component by √M.
        for (j, occ) in basis.states().iter().enumerate() {
            let m: f64 = occ
                .iter()
                .zip(&self.ensembles)
                .map(|(counts, (_, n))| multinomial(*n, counts))
                .product();
            out[j] /= m.sqrt();
        }
        out
    }
}

fn multinomial(n: u32, counts: &[u32]) -> f64 {
    let mut result = 1.0f64;
    let mut remaining = n;
    for &c in counts {
        result *= binomial(remaining, c);
        remaining -= c;
    }
    result
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k.min(n));
    let mut r = 1.0f64;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{LevelScheme, Transition};
    use crate::dynamics::{HamiltonianModel, Sampling, StateVector};
    use crate::pulse::make_arp;
    use approx::assert_relative_eq;

    #[test]
    fn product_dim_counts_blockade() {
        // 2 atoms in {g0, r0}: product states gg, gr, rg (rr deleted).
        let basis = RegisterBasis::single(LevelScheme::new(vec![Level::G0, Level::R0]).unwrap(), 2)
            .unwrap();
        let prod = ProductBasis::from_register(&basis);
        assert_eq!(prod.dim(), 3);
    }

    #[test]
    fn embed_then_project_is_identity() {
        let basis = RegisterBasis::single(
            LevelScheme::new(vec![Level::G0, Level::G1, Level::R0]).unwrap(),
            3,
        )
        .unwrap();
        let prod = ProductBasis::from_register(&basis);
        for j in 0..basis.dim() {
            let embedded = prod.embed_symmetric(&basis, j);
            let projected = prod.project_symmetric(&basis, &embedded);
            for (i, amp) in projected.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(amp.re, expected, epsilon = 1e-12);
                assert_relative_eq!(amp.im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_projection_matches_collective_evolution() {
        // Short ARP drive on two atoms: product-basis evolution projected
        // onto symmetric states equals the collective-basis evolution.
        let basis = RegisterBasis::single(LevelScheme::new(vec![Level::G0, Level::R0]).unwrap(), 2)
            .unwrap();
        let seg = make_arp(
            Transition::new(0, Level::G0, Level::R0),
            2.0,
            1e12,
            1.0,
            0.0,
            0.0,
        )
        .unwrap();
        let schedule = PulseSchedule::covering(vec![seg]).unwrap();

        let model = HamiltonianModel::new(&basis, &schedule).unwrap();
        let psi0 = StateVector::basis_state(&basis, basis.all_ground_index(), schedule.t0);
        let sym = model
            .evolve(&psi0, (schedule.t0, schedule.t1), Sampling::EndpointsOnly)
            .unwrap();

        let prod = ProductBasis::from_register(&basis);
        let opts = OdeOptions::default();
        let final_prod = prod.evolve(&schedule, prod.all_ground(), &opts).unwrap();
        let projected = prod.project_symmetric(&basis, &final_prod);

        for (a, b) in sym.final_state.amplitudes.iter().zip(projected.iter()) {
            assert_relative_eq!(a.re, b.re, epsilon = 1e-8);
            assert_relative_eq!(a.im, b.im, epsilon = 1e-8);
        }
    }
}
