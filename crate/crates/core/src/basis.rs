//! Symmetric (permutation-invariant) blockaded Hilbert spaces.
//!
//! A collective state of an `N`-atom ensemble is labeled by how many atoms
//! occupy each single-atom level; perfect Rydberg blockade removes every
//! configuration with more than one Rydberg excitation from the basis
//! outright, so no interaction term is ever needed. A register holds one or
//! two ensembles; with cross-ensemble blockade enabled the *total* Rydberg
//! count over both ensembles is limited to one.
//!
//! Collective transition amplitudes follow the bosonic bookkeeping of
//! symmetric states: moving one atom from level `a` to level `b` carries the
//! factor `√(n_a (n_b + 1))`, which reproduces the collectively enhanced
//! coupling `√N Ω` out of the all-ground state and the single-atom rate `Ω`
//! out of a singly-occupied level.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Single-atom level labels used throughout the crate.
///
/// `G0`, `G1`, `G2` are hyperfine/magnetic ground sublevels, `E` is an
/// intermediate excited state, and `R0`, `R1` are Rydberg levels subject to
/// blockade.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    G0,
    G1,
    G2,
    E,
    R0,
    R1,
}

impl Level {
    pub fn is_rydberg(self) -> bool {
        matches!(self, Level::R0 | Level::R1)
    }

    pub fn is_ground(self) -> bool {
        matches!(self, Level::G0 | Level::G1 | Level::G2)
    }

    pub fn label(self) -> &'static str {
        match self {
            Level::G0 => "g0",
            Level::G1 => "g1",
            Level::G2 => "g2",
            Level::E => "e",
            Level::R0 => "r0",
            Level::R1 => "r1",
        }
    }

    /// Parse a textual label (`"g0"`, `"e"`, `"r1"`, ...).
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "g0" | "0" => Some(Level::G0),
            "g1" | "1" => Some(Level::G1),
            "g2" | "2" => Some(Level::G2),
            "e" => Some(Level::E),
            "r0" | "r" => Some(Level::R0),
            "r1" => Some(Level::R1),
            _ => None,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BasisError {
    #[error("level scheme must contain at least one ground level")]
    NoGroundLevel,

    #[error("duplicate level {0} in scheme")]
    DuplicateLevel(Level),

    #[error("ensemble must contain at least one atom")]
    EmptyEnsemble,

    #[error("a register holds at most two ensembles (got {0})")]
    TooManyEnsembles(usize),

    #[error("ensemble index {0} out of range")]
    BadEnsemble(usize),

    #[error("level {0} is not part of the scheme of ensemble {1}")]
    UnknownLevel(Level, usize),

    #[error("transition must connect two distinct levels (got {0} -> {0})")]
    IdenticalLevels(Level),

    #[error("basis index {0} out of range (dim {1})")]
    BadIndex(usize, usize),

    #[error(
        "transition {from} -> {to} out of state {state} is blockade-forbidden: \
         the target configuration is excluded from the basis"
    )]
    Blocked {
        from: Level,
        to: Level,
        state: String,
    },
}

/// Ordered set of single-atom levels for one ensemble.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelScheme {
    levels: Vec<Level>,
}

impl LevelScheme {
    /// Build a scheme from an ordered list of distinct levels. At least one
    /// ground level is required.
    pub fn new(levels: impl Into<Vec<Level>>) -> Result<Self, BasisError> {
        let levels = levels.into();
        for (k, level) in levels.iter().enumerate() {
            if levels[..k].contains(level) {
                return Err(BasisError::DuplicateLevel(*level));
            }
        }
        if !levels.iter().any(|l| l.is_ground()) {
            return Err(BasisError::NoGroundLevel);
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn position(&self, level: Level) -> Option<usize> {
        self.levels.iter().position(|&l| l == level)
    }
}

/// Addressed single-atom transition: one atom of the named ensemble moves
/// `from -> to`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub ensemble: usize,
    pub from: Level,
    pub to: Level,
}

impl Transition {
    pub fn new(ensemble: usize, from: Level, to: Level) -> Self {
        Self { ensemble, from, to }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ens{}:{}->{}", self.ensemble, self.from, self.to)
    }
}

/// Occupation numbers of one register basis state, one `Vec<u32>` per
/// ensemble, each indexed like the ensemble's [`LevelScheme`].
pub type Occupation = Vec<Vec<u32>>;

/// Outcome of applying a collective raising operator to a basis state.
#[derive(Clone, Debug, PartialEq)]
pub enum RaiseOutcome {
    /// Target state exists in the basis; carries `(target index, √(n_a(n_b+1)))`.
    Coupled(usize, f64),
    /// The source state has no atom in the departure level.
    Empty,
    /// The target configuration is excluded by blockade.
    Blocked,
}

/// Enumerated symmetric basis of one or two blockaded ensembles.
///
/// States are ordered deterministically: occupation tuples compare
/// lexicographically reading counts from the *last* level of the last
/// ensemble backwards, ascending, which places the all-ground configuration
/// at index 0.
#[derive(Clone, Debug)]
pub struct RegisterBasis {
    ensembles: Vec<(LevelScheme, u32)>,
    cross_blockade: bool,
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

fn compositions(n: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; parts];
    fn rec(n: u32, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == cur.len() - 1 {
            cur[k] = n;
            out.push(cur.clone());
            return;
        }
        for c in 0..=n {
            cur[k] = c;
            rec(n - c, k + 1, cur, out);
        }
    }
    rec(n, 0, &mut cur, &mut out);
    out
}

fn rydberg_count(scheme: &LevelScheme, occ: &[u32]) -> u32 {
    scheme
        .levels()
        .iter()
        .zip(occ)
        .filter(|(l, _)| l.is_rydberg())
        .map(|(_, &n)| n)
        .sum()
}

/// Ordering key: compare tuples right-to-left so that the all-ground state
/// (all atoms in the first level) sorts first.
fn order_key(occ: &Occupation) -> Vec<u32> {
    occ.iter()
        .flat_map(|c| c.iter().rev().copied())
        .collect::<Vec<u32>>()
}

impl RegisterBasis {
    /// Enumerate the blockaded symmetric basis of a single ensemble.
    pub fn single(scheme: LevelScheme, n_atoms: u32) -> Result<Self, BasisError> {
        Self::enumerate(vec![(scheme, n_atoms)], false)
    }

    /// Enumerate the joint basis of one or two ensembles. With
    /// `cross_blockade` set, the total Rydberg count over both ensembles is
    /// limited to one; the per-ensemble limit always applies.
    pub fn enumerate(
        ensembles: Vec<(LevelScheme, u32)>,
        cross_blockade: bool,
    ) -> Result<Self, BasisError> {
        if ensembles.is_empty() || ensembles.len() > 2 {
            return Err(BasisError::TooManyEnsembles(ensembles.len()));
        }
        if ensembles.iter().any(|&(_, n)| n == 0) {
            return Err(BasisError::EmptyEnsemble);
        }

        let per_ensemble: Vec<Vec<Vec<u32>>> = ensembles
            .iter()
            .map(|(scheme, n)| {
                compositions(*n, scheme.len())
                    .into_iter()
                    .filter(|occ| rydberg_count(scheme, occ) <= 1)
                    .collect()
            })
            .collect();

        let mut states: Vec<Occupation> = Vec::new();
        match per_ensemble.as_slice() {
            [one] => {
                for occ in one {
                    states.push(vec![occ.clone()]);
                }
            }
            [first, second] => {
                for occ0 in first {
                    for occ1 in second {
                        if cross_blockade {
                            let total = rydberg_count(&ensembles[0].0, occ0)
                                + rydberg_count(&ensembles[1].0, occ1);
                            if total > 1 {
                                continue;
                            }
                        }
                        states.push(vec![occ0.clone(), occ1.clone()]);
                    }
                }
            }
            _ => unreachable!(),
        }
        states.sort_by_key(order_key);

        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(Self {
            ensembles,
            cross_blockade,
            states,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn n_ensembles(&self) -> usize {
        self.ensembles.len()
    }

    pub fn cross_blockade(&self) -> bool {
        self.cross_blockade
    }

    pub fn ensemble(&self, k: usize) -> Option<(&LevelScheme, u32)> {
        self.ensembles.get(k).map(|(s, n)| (s, *n))
    }

    pub fn scheme(&self, k: usize) -> Result<&LevelScheme, BasisError> {
        self.ensembles
            .get(k)
            .map(|(s, _)| s)
            .ok_or(BasisError::BadEnsemble(k))
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn occupation(&self, index: usize) -> Result<&Occupation, BasisError> {
        self.states
            .get(index)
            .ok_or(BasisError::BadIndex(index, self.dim()))
    }

    pub fn index_of(&self, occ: &Occupation) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// Index of the all-ground configuration (every atom in the first level
    /// of its scheme). This is index 0 by the enumeration order.
    pub fn all_ground_index(&self) -> usize {
        0
    }

    /// Number of atoms of ensemble `k` in `level` for basis state `index`.
    pub fn count(&self, index: usize, k: usize, level: Level) -> Result<u32, BasisError> {
        let occ = self.occupation(index)?;
        let scheme = self.scheme(k)?;
        let pos = scheme
            .position(level)
            .ok_or(BasisError::UnknownLevel(level, k))?;
        Ok(occ[k][pos])
    }

    /// Total Rydberg occupancy of basis state `index` over all ensembles.
    pub fn total_rydberg(&self, index: usize) -> u32 {
        let occ = &self.states[index];
        self.ensembles
            .iter()
            .zip(occ)
            .map(|((scheme, _), o)| rydberg_count(scheme, o))
            .sum()
    }

    fn would_block(&self, occ: &Occupation, k: usize, from_pos: usize, to_pos: usize) -> bool {
        let scheme = &self.ensembles[k].0;
        let gain = u32::from(scheme.levels()[to_pos].is_rydberg());
        let loss = u32::from(scheme.levels()[from_pos].is_rydberg());
        if gain <= loss {
            // Moves between Rydberg levels (or out of them) never raise the
            // excitation count.
            return false;
        }
        let intra = rydberg_count(scheme, &occ[k]) + gain - loss;
        if intra > 1 {
            return true;
        }
        if self.cross_blockade {
            let total: u32 = self
                .ensembles
                .iter()
                .zip(occ)
                .map(|((s, _), o)| rydberg_count(s, o))
                .sum();
            if total + gain - loss > 1 {
                return true;
            }
        }
        false
    }

    /// Apply the collective raising operator of `transition` to basis state
    /// `index`: move one atom `from -> to` with amplitude `√(n_from(n_to+1))`.
    pub fn raise(&self, index: usize, transition: &Transition) -> Result<RaiseOutcome, BasisError> {
        if transition.from == transition.to {
            return Err(BasisError::IdenticalLevels(transition.from));
        }
        let k = transition.ensemble;
        let scheme = self.scheme(k)?;
        let from_pos = scheme
            .position(transition.from)
            .ok_or(BasisError::UnknownLevel(transition.from, k))?;
        let to_pos = scheme
            .position(transition.to)
            .ok_or(BasisError::UnknownLevel(transition.to, k))?;
        let occ = self.occupation(index)?;

        let n_from = occ[k][from_pos];
        if n_from == 0 {
            return Ok(RaiseOutcome::Empty);
        }
        if self.would_block(occ, k, from_pos, to_pos) {
            return Ok(RaiseOutcome::Blocked);
        }
        let n_to = occ[k][to_pos];
        let mut moved = occ.clone();
        moved[k][from_pos] -= 1;
        moved[k][to_pos] += 1;
        let target = self
            .index_of(&moved)
            .expect("blockade-allowed occupation must be enumerated");
        Ok(RaiseOutcome::Coupled(
            target,
            ((n_from as f64) * (n_to as f64 + 1.0)).sqrt(),
        ))
    }

    /// Collective matrix element `⟨to_index| Σ_j |to⟩⟨from|_j |from_index⟩`.
    ///
    /// Returns `√(n_from (n_to + 1))` evaluated on the source occupation when
    /// the target state is the source with one atom moved, and `0.0` when the
    /// two states simply do not overlap under the transition. A move whose
    /// target configuration is excluded by blockade is an error, not a zero:
    /// the operation distinguishes "blocked" from "no overlap" by basis
    /// membership.
    pub fn transition_element(
        &self,
        from_index: usize,
        to_index: usize,
        transition: &Transition,
    ) -> Result<f64, BasisError> {
        self.occupation(to_index)?;
        match self.raise(from_index, transition)? {
            RaiseOutcome::Coupled(target, elem) if target == to_index => Ok(elem),
            RaiseOutcome::Coupled(..) | RaiseOutcome::Empty => Ok(0.0),
            RaiseOutcome::Blocked => {
                let occ = self.occupation(from_index)?;
                Err(BasisError::Blocked {
                    from: transition.from,
                    to: transition.to,
                    state: format!("{occ:?}"),
                })
            }
        }
    }

    /// Occupation formatted as `g0:2 r0:1 | g0:1` for diagnostics and output
    /// headers.
    pub fn state_label(&self, index: usize) -> String {
        let occ = &self.states[index];
        occ.iter()
            .enumerate()
            .map(|(k, counts)| {
                let scheme = &self.ensembles[k].0;
                scheme
                    .levels()
                    .iter()
                    .zip(counts)
                    .filter(|(_, &n)| n > 0)
                    .map(|(l, n)| format!("{l}:{n}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scheme(levels: &[Level]) -> LevelScheme {
        LevelScheme::new(levels.to_vec()).unwrap()
    }

    #[test]
    fn scheme_rejects_duplicates_and_no_ground() {
        assert_eq!(
            LevelScheme::new(vec![Level::G0, Level::G0]),
            Err(BasisError::DuplicateLevel(Level::G0))
        );
        assert_eq!(
            LevelScheme::new(vec![Level::E, Level::R0]),
            Err(BasisError::NoGroundLevel)
        );
    }

    #[test]
    fn three_level_two_atom_enumeration() {
        let basis = RegisterBasis::single(scheme(&[Level::G0, Level::E, Level::R0]), 2).unwrap();
        let expect: Vec<Vec<u32>> = vec![
            vec![2, 0, 0],
            vec![1, 1, 0],
            vec![0, 2, 0],
            vec![1, 0, 1],
            vec![0, 1, 1],
        ];
        assert_eq!(basis.dim(), 5);
        let got: Vec<Vec<u32>> = basis.states().iter().map(|s| s[0].clone()).collect();
        assert_eq!(got, expect);
        assert_eq!(basis.all_ground_index(), 0);
        assert_eq!(basis.states()[0][0], vec![2, 0, 0]);
    }

    #[test]
    fn single_two_level_atom() {
        let basis = RegisterBasis::single(scheme(&[Level::G0, Level::R0]), 1).unwrap();
        assert_eq!(basis.dim(), 2);
    }

    #[test]
    fn cross_blockade_excludes_double_excitation() {
        let s = scheme(&[Level::G0, Level::R0]);
        let basis = RegisterBasis::enumerate(vec![(s.clone(), 1), (s, 1)], true).unwrap();
        assert_eq!(basis.dim(), 3);
        for i in 0..basis.dim() {
            assert!(basis.total_rydberg(i) <= 1);
        }
    }

    #[test]
    fn rejects_empty_and_oversized_registers() {
        let s = scheme(&[Level::G0, Level::R0]);
        assert!(matches!(
            RegisterBasis::single(s.clone(), 0),
            Err(BasisError::EmptyEnsemble)
        ));
        assert!(matches!(
            RegisterBasis::enumerate(vec![(s.clone(), 1), (s.clone(), 1), (s, 1)], false),
            Err(BasisError::TooManyEnsembles(3))
        ));
    }

    #[test]
    fn collective_enhancement_and_single_atom_rate() {
        // N=4: (4,0) -> (3,1) on g0->r0 carries sqrt(4) = 2.
        let basis = RegisterBasis::single(scheme(&[Level::G0, Level::R0]), 4).unwrap();
        let from = basis.index_of(&vec![vec![4, 0]]).unwrap();
        let to = basis.index_of(&vec![vec![3, 1]]).unwrap();
        let t = Transition::new(0, Level::G0, Level::R0);
        assert_eq!(basis.transition_element(from, to, &t).unwrap(), 2.0);

        // Single atom: plain rate 1.
        let basis1 = RegisterBasis::single(scheme(&[Level::G0, Level::R0]), 1).unwrap();
        assert_eq!(basis1.transition_element(0, 1, &t).unwrap(), 1.0);

        // N=3 with one atom in g1: g1->r1 at the single-atom rate.
        let basis3 =
            RegisterBasis::single(scheme(&[Level::G0, Level::G1, Level::R0, Level::R1]), 3)
                .unwrap();
        let from = basis3.index_of(&vec![vec![2, 1, 0, 0]]).unwrap();
        let to = basis3.index_of(&vec![vec![2, 0, 0, 1]]).unwrap();
        let t = Transition::new(0, Level::G1, Level::R1);
        assert_eq!(basis3.transition_element(from, to, &t).unwrap(), 1.0);
    }

    #[test]
    fn blocked_transition_is_an_error_not_zero() {
        let basis = RegisterBasis::single(scheme(&[Level::G0, Level::R0, Level::R1]), 2).unwrap();
        // (1,1,0): one Rydberg already present; g0->r1 would give two.
        let from = basis.index_of(&vec![vec![1, 1, 0]]).unwrap();
        let t = Transition::new(0, Level::G0, Level::R1);
        let any_other = (from + 1) % basis.dim();
        assert!(matches!(
            basis.transition_element(from, any_other, &t),
            Err(BasisError::Blocked { .. })
        ));
    }

    #[test]
    fn rydberg_to_rydberg_move_is_not_blocked() {
        // A microwave transfer r0 -> r1 keeps the excitation count at one.
        let basis = RegisterBasis::single(scheme(&[Level::G0, Level::R0, Level::R1]), 3).unwrap();
        let from = basis.index_of(&vec![vec![2, 1, 0]]).unwrap();
        let to = basis.index_of(&vec![vec![2, 0, 1]]).unwrap();
        let t = Transition::new(0, Level::R0, Level::R1);
        assert_eq!(basis.transition_element(from, to, &t).unwrap(), 1.0);

        // Cross-ensemble: moving within one ensemble's Rydberg manifold is
        // allowed even with cross blockade enabled.
        let s = scheme(&[Level::G0, Level::R0, Level::R1]);
        let reg = RegisterBasis::enumerate(vec![(s.clone(), 1), (s, 1)], true).unwrap();
        let from = reg.index_of(&vec![vec![0, 1, 0], vec![1, 0, 0]]).unwrap();
        let to = reg.index_of(&vec![vec![0, 0, 1], vec![1, 0, 0]]).unwrap();
        let t = Transition::new(0, Level::R0, Level::R1);
        assert_eq!(reg.transition_element(from, to, &t).unwrap(), 1.0);
    }

    #[test]
    fn identical_levels_rejected() {
        let basis = RegisterBasis::single(scheme(&[Level::G0, Level::R0]), 1).unwrap();
        let t = Transition::new(0, Level::G0, Level::G0);
        assert!(matches!(
            basis.transition_element(0, 1, &t),
            Err(BasisError::IdenticalLevels(Level::G0))
        ));
    }

    #[test]
    fn zero_overlap_returns_zero() {
        let basis = RegisterBasis::single(scheme(&[Level::G0, Level::E, Level::R0]), 2).unwrap();
        let from = basis.index_of(&vec![vec![2, 0, 0]]).unwrap();
        let to = basis.index_of(&vec![vec![0, 2, 0]]).unwrap();
        let t = Transition::new(0, Level::G0, Level::E);
        // Two atoms must move to reach `to`; the one-atom operator gives 0.
        assert_eq!(basis.transition_element(from, to, &t).unwrap(), 0.0);
    }

    #[test]
    fn dimension_matches_brute_force_for_small_n() {
        // dim = number of compositions of N over the levels with total
        // Rydberg occupancy <= 1, checked by direct filtering.
        let levels = [Level::G0, Level::G1, Level::E, Level::R0, Level::R1];
        for n in 1..=6u32 {
            let basis = RegisterBasis::single(scheme(&levels), n).unwrap();
            let brute = compositions(n, levels.len())
                .into_iter()
                .filter(|occ| occ[3] + occ[4] <= 1)
                .count();
            assert_eq!(basis.dim(), brute, "N={n}");
        }
    }

    #[test]
    fn no_blockade_violations_up_to_n10() {
        for n in 1..=10u32 {
            let basis =
                RegisterBasis::single(scheme(&[Level::G0, Level::E, Level::R0, Level::R1]), n)
                    .unwrap();
            for i in 0..basis.dim() {
                assert!(basis.total_rydberg(i) <= 1);
            }
        }
    }

    #[test]
    fn index_roundtrip() {
        let s = scheme(&[Level::G0, Level::G1, Level::R0]);
        let basis = RegisterBasis::enumerate(vec![(s.clone(), 2), (s, 1)], true).unwrap();
        for i in 0..basis.dim() {
            let occ = basis.occupation(i).unwrap().clone();
            assert_eq!(basis.index_of(&occ), Some(i));
        }
    }

    #[test]
    fn coupling_pattern_symmetric() {
        let basis =
            RegisterBasis::single(scheme(&[Level::G0, Level::G1, Level::E, Level::R0]), 3).unwrap();
        let up = Transition::new(0, Level::G0, Level::E);
        let down = Transition::new(0, Level::E, Level::G0);
        for i in 0..basis.dim() {
            for j in 0..basis.dim() {
                let a = basis.transition_element(i, j, &up).unwrap_or(0.0);
                let b = basis.transition_element(j, i, &down).unwrap_or(0.0);
                assert!(
                    (a - b).abs() < 1e-12,
                    "raising {i}->{j} = {a} but lowering {j}->{i} = {b}"
                );
                assert!(a >= 0.0);
            }
        }
    }
}
