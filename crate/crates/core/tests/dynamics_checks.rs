//! Integrator-level physics checks: analytic oracles (Landau–Zener, Rabi),
//! the paper-parameter excitation curves, schedule symmetries and the
//! product-basis oracle.

use std::f64::consts::PI;

use blockade_sim::basis::{Level, LevelScheme, RegisterBasis, Transition};
use blockade_sim::dynamics::{HamiltonianModel, Sampling, StateVector};
use blockade_sim::ode::OdeOptions;
use blockade_sim::oracle::ProductBasis;
use blockade_sim::protocols::{self, ProtocolKind, ProtocolSpec, PulseParams};
use blockade_sim::pulse::{
    make_arp, make_stirap_pair, DetuningLaw, Envelope, PulseSchedule, PulseSegment, StirapPair,
};
use blockade_sim::{analysis, mhz};

fn two_level(n: u32) -> RegisterBasis {
    RegisterBasis::single(LevelScheme::new(vec![Level::G0, Level::R0]).unwrap(), n).unwrap()
}

fn ladder(n: u32) -> RegisterBasis {
    RegisterBasis::single(
        LevelScheme::new(vec![Level::G0, Level::E, Level::R0]).unwrap(),
        n,
    )
    .unwrap()
}

fn ground(basis: &RegisterBasis, t0: f64) -> StateVector {
    StateVector::basis_state(basis, basis.all_ground_index(), t0)
}

/// Constant-envelope chirped drive: transfer probability follows the
/// Landau–Zener formula 1 − exp(−πΩ²/2α). The envelope is constant across
/// the crossing and ramped on and off adiabatically far from resonance
/// (Gaussian shoulders), so the infinite-sweep formula applies to the finite
/// window without edge artifacts.
#[test]
fn landau_zener_oracle() {
    let alpha = mhz(1.0); // α/2π = 1 MHz/µs = 1 THz/s
    let flat = 25.0;
    let tau = 5.0;
    let shoulder = 5.0 * tau;
    let chirp = DetuningLaw::LinearChirp {
        rate: alpha,
        origin: 0.0,
    };
    let transition = Transition::new(0, Level::G0, Level::R0);
    for omega_mhz in [0.2, 0.3, 0.5] {
        let omega = mhz(omega_mhz);
        let basis = two_level(1);
        let rise = PulseSegment::new(
            transition,
            Envelope::Gaussian {
                peak: omega,
                center: -flat,
                tau,
            },
            chirp,
            0.0,
            (-flat - shoulder, -flat),
        )
        .unwrap();
        let core = PulseSegment::new(
            transition,
            Envelope::Constant { value: omega },
            chirp,
            0.0,
            (-flat, flat),
        )
        .unwrap();
        let fall = PulseSegment::new(
            transition,
            Envelope::Gaussian {
                peak: omega,
                center: flat,
                tau,
            },
            chirp,
            0.0,
            (flat, flat + shoulder),
        )
        .unwrap();
        let schedule = PulseSchedule::covering(vec![rise, core, fall]).unwrap();
        let model = HamiltonianModel::new(&basis, &schedule).unwrap();
        let traj = model
            .evolve(
                &ground(&basis, schedule.t0),
                (schedule.t0, schedule.t1),
                Sampling::EndpointsOnly,
            )
            .unwrap();
        let p = traj.final_state.amplitudes[1].norm_sqr();
        let p_lz = 1.0 - (-PI * omega * omega / (2.0 * alpha)).exp();
        assert!(
            (p - p_lz).abs() < 1e-3,
            "Ω/2π = {omega_mhz} MHz: P = {p}, LZ = {p_lz}"
        );
    }
}

/// At the paper's ARP parameters the sweep is deeply adiabatic:
/// 1 − P ≈ e^{−4π²} ≈ 0, so P must be 1 within 1e-3 (and in fact much
/// closer).
#[test]
fn landau_zener_at_paper_parameters() {
    let basis = two_level(1);
    let seg = PulseSegment::new(
        Transition::new(0, Level::G0, Level::R0),
        Envelope::Constant { value: mhz(2.0) },
        DetuningLaw::LinearChirp {
            rate: mhz(1.0),
            origin: 0.0,
        },
        0.0,
        (-60.0, 60.0),
    )
    .unwrap();
    let schedule = PulseSchedule::covering(vec![seg]).unwrap();
    let model = HamiltonianModel::new(&basis, &schedule).unwrap();
    let traj = model
        .evolve(
            &ground(&basis, -60.0),
            (-60.0, 60.0),
            Sampling::EndpointsOnly,
        )
        .unwrap();
    let p = traj.final_state.amplitudes[1].norm_sqr();
    assert!((1.0 - p).abs() < 1e-3, "P = {p}");
}

/// ARP at the reference parameters transfers a single excitation with
/// P > 0.99 for N = 1..3, nearly independent of N.
#[test]
fn arp_excitation_n_independent() {
    let mut finals = Vec::new();
    for n in 1..=3u32 {
        let basis = two_level(n);
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
        let traj = model
            .evolve(
                &ground(&basis, schedule.t0),
                (schedule.t0, schedule.t1),
                Sampling::EndpointsOnly,
            )
            .unwrap();
        let p = analysis::single_excitation_probability(&basis, &traj.final_state.amplitudes);
        assert!(p > 0.99, "N={n}: P = {p}");
        finals.push(p);
    }
    assert!((finals[0] - finals[2]).abs() < 1e-2);
}

/// A forward STIRAP pair followed by the reversed pair returns the
/// population to the ground state.
#[test]
fn reversed_stirap_pair_round_trip() {
    let basis = ladder(1);
    let pump = Transition::new(0, Level::G0, Level::E);
    let stokes = Transition::new(0, Level::E, Level::R0);
    let params = StirapPair::default();
    let forward = make_stirap_pair(pump, stokes, params, false, 0.0).unwrap();
    // Mirror the pair about the end of the forward window.
    let pivot = forward
        .iter()
        .map(|s| s.window.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let reverse = make_stirap_pair(pump, stokes, params, true, pivot).unwrap();
    let mut segments = forward.to_vec();
    segments.extend(reverse);
    let schedule = PulseSchedule::covering(segments).unwrap();
    let model = HamiltonianModel::new(&basis, &schedule).unwrap();
    let traj = model
        .evolve(
            &ground(&basis, schedule.t0),
            (schedule.t0, schedule.t1),
            Sampling::EndpointsOnly,
        )
        .unwrap();
    let p_ground = traj.final_state.amplitudes[0].norm_sqr();
    assert!(1.0 - p_ground < 1e-6, "round-trip error {}", 1.0 - p_ground);
}

fn stirap_final_p(n: u32, delta_mhz: f64) -> f64 {
    let basis = ladder(n);
    let params = StirapPair {
        delta_mhz,
        ..StirapPair::default()
    };
    let segs = make_stirap_pair(
        Transition::new(0, Level::G0, Level::E),
        Transition::new(0, Level::E, Level::R0),
        params,
        false,
        0.0,
    )
    .unwrap();
    let schedule = PulseSchedule::covering(segs.to_vec()).unwrap();
    let model = HamiltonianModel::new(&basis, &schedule).unwrap();
    let traj = model
        .evolve(
            &ground(&basis, schedule.t0),
            (schedule.t0, schedule.t1),
            Sampling::EndpointsOnly,
        )
        .unwrap();
    analysis::single_excitation_probability(&basis, &traj.final_state.amplitudes)
}

/// STIRAP at δ = 0 is deterministic only for a single atom; the transfer
/// breaks down for N > 1. At δ/2π = 200 MHz it is deterministic for all N.
#[test]
fn stirap_breakdown_and_recovery() {
    let p1 = stirap_final_p(1, 0.0);
    let p2 = stirap_final_p(2, 0.0);
    assert!(p1 > 0.99, "N=1, δ=0: P = {p1}");
    assert!(
        (p1 - p2).abs() > 0.1,
        "expected breakdown: P1 = {p1}, P2 = {p2}"
    );

    for n in 1..=3u32 {
        let p = stirap_final_p(n, 200.0);
        assert!(p > 0.99, "N={n}, δ=200 MHz: P = {p}");
    }
}

/// Resonant π pulse inverts the population with error below 1e-9.
#[test]
fn pi_pulse_inversion() {
    let basis = two_level(1);
    let seg =
        blockade_sim::pulse::make_rabi(Transition::new(0, Level::G0, Level::R0), 1.0, PI, 0.0, 0.0)
            .unwrap();
    let schedule = PulseSchedule::covering(vec![seg]).unwrap();
    let model = HamiltonianModel::new(&basis, &schedule).unwrap();
    let traj = model
        .evolve(
            &ground(&basis, 0.0),
            (schedule.t0, schedule.t1),
            Sampling::EndpointsOnly,
        )
        .unwrap();
    let p_excited = traj.final_state.amplitudes[1].norm_sqr();
    assert!(
        (1.0 - p_excited) < 1e-9,
        "inversion error {}",
        1.0 - p_excited
    );
}

/// Evolving forward and then with the time-reversed schedule returns the
/// initial state.
#[test]
fn time_reversal_roundtrip() {
    let basis = ladder(1);
    let segs = make_stirap_pair(
        Transition::new(0, Level::G0, Level::E),
        Transition::new(0, Level::E, Level::R0),
        StirapPair::default(),
        false,
        0.0,
    )
    .unwrap();
    let schedule = PulseSchedule::covering(segs.to_vec()).unwrap();
    let model = HamiltonianModel::new(&basis, &schedule).unwrap();
    let psi0 = ground(&basis, schedule.t0);
    let fwd = model
        .evolve(&psi0, (schedule.t0, schedule.t1), Sampling::EndpointsOnly)
        .unwrap();

    let reversed = schedule.time_reversed();
    let model_rev = HamiltonianModel::new(&basis, &reversed).unwrap();
    let mid = StateVector {
        amplitudes: fwd.final_state.amplitudes.clone(),
        time: reversed.t0,
    };
    let back = model_rev
        .evolve(&mid, (reversed.t0, reversed.t1), Sampling::EndpointsOnly)
        .unwrap();
    let overlap: num_complex::Complex64 = psi0
        .amplitudes
        .iter()
        .zip(back.final_state.amplitudes.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    assert!(
        overlap.norm_sqr() > 1.0 - 1e-6,
        "|⟨ψ0|ψ⟩|² = {}",
        overlap.norm_sqr()
    );
}

/// The ±4τ hard truncation changes final populations by less than 1e-6
/// relative to a ±6τ window.
#[test]
fn window_truncation_error() {
    let mut populations = Vec::new();
    for half_width in [4.0, 6.0] {
        let basis = two_level(1);
        let seg = PulseSegment::new(
            Transition::new(0, Level::G0, Level::R0),
            Envelope::Gaussian {
                peak: mhz(2.0),
                center: 0.0,
                tau: 1.0,
            },
            DetuningLaw::LinearChirp {
                rate: mhz(1.0),
                origin: 0.0,
            },
            0.0,
            (-half_width, half_width),
        )
        .unwrap();
        let schedule = PulseSchedule::covering(vec![seg]).unwrap();
        let model = HamiltonianModel::new(&basis, &schedule).unwrap();
        let traj = model
            .evolve(
                &ground(&basis, schedule.t0),
                (schedule.t0, schedule.t1),
                Sampling::EndpointsOnly,
            )
            .unwrap();
        populations.push(traj.final_state.amplitudes[1].norm_sqr());
    }
    assert!(
        (populations[0] - populations[1]).abs() < 1e-6,
        "±4τ vs ±6τ: {} vs {}",
        populations[0],
        populations[1]
    );
}

/// Shifting the whole schedule in time leaves final amplitudes unchanged.
#[test]
fn time_translation_invariance() {
    let basis = two_level(2);
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
    let shifted = schedule.shifted(17.25);

    let model = HamiltonianModel::new(&basis, &schedule).unwrap();
    let a = model
        .evolve(
            &ground(&basis, schedule.t0),
            (schedule.t0, schedule.t1),
            Sampling::EndpointsOnly,
        )
        .unwrap();
    let model2 = HamiltonianModel::new(&basis, &shifted).unwrap();
    let b = model2
        .evolve(
            &ground(&basis, shifted.t0),
            (shifted.t0, shifted.t1),
            Sampling::EndpointsOnly,
        )
        .unwrap();
    for (x, y) in a
        .final_state
        .amplitudes
        .iter()
        .zip(b.final_state.amplitudes.iter())
    {
        assert!((x - y).norm() < 1e-8, "{x} vs {y}");
    }
}

/// Halving the integrator tolerances moves final populations by less than
/// ten times the tolerance.
#[test]
fn tolerance_convergence() {
    let basis = ladder(2);
    let segs = make_stirap_pair(
        Transition::new(0, Level::G0, Level::E),
        Transition::new(0, Level::E, Level::R0),
        StirapPair::default(),
        false,
        0.0,
    )
    .unwrap();
    let schedule = PulseSchedule::covering(segs.to_vec()).unwrap();
    let model = HamiltonianModel::new(&basis, &schedule).unwrap();
    let psi0 = ground(&basis, schedule.t0);

    let base = OdeOptions::default();
    let tight = OdeOptions {
        rtol: base.rtol / 2.0,
        atol: base.atol / 2.0,
        ..base
    };
    let a = model
        .evolve_with(
            &psi0,
            (schedule.t0, schedule.t1),
            Sampling::EndpointsOnly,
            &base,
        )
        .unwrap();
    let b = model
        .evolve_with(
            &psi0,
            (schedule.t0, schedule.t1),
            Sampling::EndpointsOnly,
            &tight,
        )
        .unwrap();
    for (x, y) in a
        .final_state
        .populations()
        .iter()
        .zip(b.final_state.populations().iter())
    {
        assert!((x - y).abs() < 10.0 * base.rtol, "{x} vs {y}");
    }
    assert!(a.norm_drift < 1e-8, "norm drift {}", a.norm_drift);
}

/// Hermiticity of the assembled Hamiltonian at pseudo-random times.
#[test]
fn hermiticity_sampled() {
    let basis = ladder(3);
    let segs = make_stirap_pair(
        Transition::new(0, Level::G0, Level::E),
        Transition::new(0, Level::E, Level::R0),
        StirapPair::default(),
        false,
        0.0,
    )
    .unwrap();
    let schedule = PulseSchedule::covering(segs.to_vec()).unwrap();
    let model = HamiltonianModel::new(&basis, &schedule).unwrap();
    // Deterministic linear congruential sampling of 100 times.
    let mut x = 0x2545f4914f6cdd1du64;
    for _ in 0..100 {
        x = x
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let u = (x >> 11) as f64 / (1u64 << 53) as f64;
        let t = schedule.t0 + u * (schedule.t1 - schedule.t0);
        let h = model.hamiltonian_at(t);
        for i in 0..basis.dim() {
            for j in 0..basis.dim() {
                assert_eq!(h[(i, j)], h[(j, i)].conj());
            }
        }
    }
}

/// Symmetric-basis evolution matches the distinguishable-atom product-basis
/// oracle amplitude for amplitude (modulus and relative phase) for N ≤ 3.
#[test]
fn product_oracle_equivalence_arp_and_stirap() {
    for n in 1..=3u32 {
        // ARP case.
        let basis = two_level(n);
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
        compare_with_oracle(&basis, &schedule, n);

        // STIRAP case at δ = 0 where collective effects are strongest.
        let basis = ladder(n);
        let segs = make_stirap_pair(
            Transition::new(0, Level::G0, Level::E),
            Transition::new(0, Level::E, Level::R0),
            StirapPair {
                delta_mhz: 0.0,
                ..StirapPair::default()
            },
            false,
            0.0,
        )
        .unwrap();
        let schedule = PulseSchedule::covering(segs.to_vec()).unwrap();
        compare_with_oracle(&basis, &schedule, n);
    }
}

fn compare_with_oracle(basis: &RegisterBasis, schedule: &PulseSchedule, n: u32) {
    let model = HamiltonianModel::new(basis, schedule).unwrap();
    let sym = model
        .evolve(
            &ground(basis, schedule.t0),
            (schedule.t0, schedule.t1),
            Sampling::EndpointsOnly,
        )
        .unwrap();

    let prod = ProductBasis::from_register(basis);
    let final_prod = prod
        .evolve(schedule, prod.all_ground(), &OdeOptions::default())
        .unwrap();
    let projected = prod.project_symmetric(basis, &final_prod);

    for (i, (a, b)) in sym
        .final_state
        .amplitudes
        .iter()
        .zip(projected.iter())
        .enumerate()
    {
        assert!(
            (a - b).norm() < 1e-6,
            "N={n}, state {i}: symmetric {a} vs oracle {b}"
        );
    }
}

/// Collective resonant drive reaches unit single-excitation probability at
/// t = π/(√N Ω).
#[test]
fn collective_rabi_formula() {
    for n in [1u32, 4, 7] {
        let basis = two_level(n);
        let omega = mhz(1.0);
        let seg = PulseSegment::new(
            Transition::new(0, Level::G0, Level::R0),
            Envelope::Constant { value: omega },
            DetuningLaw::resonant(),
            0.0,
            (0.0, 10.0),
        )
        .unwrap();
        let schedule = PulseSchedule::new(vec![seg], 0.0, 10.0).unwrap();
        let model = HamiltonianModel::new(&basis, &schedule).unwrap();
        let t_pi = PI / ((n as f64).sqrt() * omega);
        let traj = model
            .evolve(&ground(&basis, 0.0), (0.0, t_pi), Sampling::EndpointsOnly)
            .unwrap();
        let p = analysis::single_excitation_probability(&basis, &traj.final_state.amplitudes);
        assert!((1.0 - p).abs() < 1e-6, "N={n}: P = {p}");
    }
}

/// Population bookkeeping: ground + intermediate + single-Rydberg equals the
/// squared norm at every sample.
#[test]
fn population_partition_closes() {
    let spec = ProtocolSpec::new(ProtocolKind::StirapSingle, vec![2]);
    let run = protocols::run(&spec, Sampling::Dense { dt: 0.05 }, &OdeOptions::default()).unwrap();
    for psi in &run.trajectory.states {
        let (g, e, r) = analysis::population_partition(&run.built.basis, psi);
        let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        assert!((g + e + r - norm_sq).abs() < 1e-10);
    }
}

/// Norm drift stays below 1e-8 across representative runs.
#[test]
fn norm_drift_bound() {
    for spec in [
        ProtocolSpec::new(ProtocolKind::ArpSingle, vec![3]),
        ProtocolSpec::new(ProtocolKind::StirapSingle, vec![3]),
        ProtocolSpec::new(ProtocolKind::DoubleStirap { sign_switch: true }, vec![2]),
    ] {
        let run = protocols::run(&spec, Sampling::EndpointsOnly, &OdeOptions::default()).unwrap();
        assert!(
            run.trajectory.norm_drift < 1e-8,
            "{:?}: drift {}",
            spec.kind,
            run.trajectory.norm_drift
        );
    }
    let params = PulseParams::default();
    let _ = params;
}
