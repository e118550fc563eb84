//! Time-dependent drive segments and their composition into schedules.
//!
//! A [`PulseSegment`] bundles the envelope, detuning law, carrier phase and
//! active window of one laser or microwave drive on one transition. All
//! user-facing frequencies enter as `value/2π` in MHz (the way experimental
//! parameters are quoted) and are stored as angular rad/µs; the conversion
//! happens here and nowhere else.
//!
//! Envelope conventions follow the chirped-pulse field
//! `E₀ exp(−t²/2τ²) cos(ω₀t + αt²/2)`, whose Rabi envelope is
//! `Ω exp(−t²/2τ²)` with τ the half-width at 1/e *intensity*, and the
//! STIRAP pair `Ω_j exp(−(t+t_j)²/2τ²)`. Rabi pulses are square and
//! resonant, with the rotation convention `R(π, 0)|a⟩ = i|b⟩`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::basis::Transition;
use crate::mhz;

#[derive(Debug, Error, PartialEq)]
pub enum PulseError {
    #[error("gaussian width must be positive (got {0})")]
    NonPositiveWidth(f64),

    #[error("peak Rabi frequency must be non-negative (got {0} MHz)")]
    NegativeAmplitude(f64),

    #[error("Rabi frequency must be positive for a finite pulse duration (got {0} MHz)")]
    ZeroRabi(f64),

    #[error("window must satisfy t_start < t_end (got [{0}, {1}])")]
    EmptyWindow(f64, f64),

    #[error("segment window [{0}, {1}] extends outside the schedule window [{2}, {3}]")]
    WindowOutOfRange(f64, f64, f64, f64),

    #[error("STIRAP pump and Stokes must chain g -> e -> r (got {0} and {1})")]
    BrokenLadder(Transition, Transition),
}

/// Drive amplitude envelope, in angular rad/µs.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Envelope {
    /// `peak · exp(−(t−center)²/2τ²)`.
    Gaussian {
        peak: f64,
        center: f64,
        tau: f64,
    },
    /// Flat amplitude.
    Constant {
        value: f64,
    },
    Zero,
}

impl Envelope {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Envelope::Gaussian { peak, center, tau } => {
                let s = (t - center) / tau;
                peak * (-0.5 * s * s).exp()
            }
            Envelope::Constant { value } => value,
            Envelope::Zero => 0.0,
        }
    }

    pub fn peak(&self) -> f64 {
        match *self {
            Envelope::Gaussian { peak, .. } => peak,
            Envelope::Constant { value } => value,
            Envelope::Zero => 0.0,
        }
    }

    fn shifted(&self, dt: f64) -> Self {
        match *self {
            Envelope::Gaussian { peak, center, tau } => Envelope::Gaussian {
                peak,
                center: center + dt,
                tau,
            },
            other => other,
        }
    }

    fn scaled(&self, factor: f64) -> Self {
        match *self {
            Envelope::Gaussian { peak, center, tau } => Envelope::Gaussian {
                peak: peak * factor,
                center,
                tau,
            },
            Envelope::Constant { value } => Envelope::Constant {
                value: value * factor,
            },
            Envelope::Zero => Envelope::Zero,
        }
    }

    /// Mirror the envelope in time about `pivot`.
    fn mirrored(&self, pivot: f64) -> Self {
        match *self {
            Envelope::Gaussian { peak, center, tau } => Envelope::Gaussian {
                peak,
                center: 2.0 * pivot - center,
                tau,
            },
            other => other,
        }
    }
}

/// Diagonal detuning law carried by a segment, applied to the upper level of
/// its transition while the segment is active. Values in rad/µs.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum DetuningLaw {
    Constant {
        value: f64,
    },
    /// `rate · (t − origin)`: resonant at the pulse center.
    LinearChirp {
        rate: f64,
        origin: f64,
    },
    /// `+value` for `t < switch_time`, `−value` for `t ≥ switch_time`.
    SignSwitch {
        value: f64,
        switch_time: f64,
    },
}

impl DetuningLaw {
    pub fn resonant() -> Self {
        DetuningLaw::Constant { value: 0.0 }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            DetuningLaw::Constant { value } => value,
            DetuningLaw::LinearChirp { rate, origin } => rate * (t - origin),
            DetuningLaw::SignSwitch { value, switch_time } => {
                if t < switch_time {
                    value
                } else {
                    -value
                }
            }
        }
    }

    fn shifted(&self, dt: f64) -> Self {
        match *self {
            DetuningLaw::Constant { value } => DetuningLaw::Constant { value },
            DetuningLaw::LinearChirp { rate, origin } => DetuningLaw::LinearChirp {
                rate,
                origin: origin + dt,
            },
            DetuningLaw::SignSwitch { value, switch_time } => DetuningLaw::SignSwitch {
                value,
                switch_time: switch_time + dt,
            },
        }
    }

    /// The law of the time-reversed drive: `law'(t) = −law(t0+t1−t)`.
    fn time_reversed(&self, t0_plus_t1: f64) -> Self {
        match *self {
            DetuningLaw::Constant { value } => DetuningLaw::Constant { value: -value },
            DetuningLaw::LinearChirp { rate, origin } => DetuningLaw::LinearChirp {
                rate,
                origin: t0_plus_t1 - origin,
            },
            DetuningLaw::SignSwitch { value, switch_time } => DetuningLaw::SignSwitch {
                value,
                switch_time: t0_plus_t1 - switch_time,
            },
        }
    }
}

/// One time-windowed drive term. The drive is identically zero outside
/// `window`; the window is half-open, `t_start <= t < t_end`.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSegment {
    pub transition: Transition,
    pub envelope: Envelope,
    pub detuning: DetuningLaw,
    pub carrier_phase: f64,
    pub window: (f64, f64),
}

impl PulseSegment {
    pub fn new(
        transition: Transition,
        envelope: Envelope,
        detuning: DetuningLaw,
        carrier_phase: f64,
        window: (f64, f64),
    ) -> Result<Self, PulseError> {
        if !window.0.is_finite() || !window.1.is_finite() || window.0 >= window.1 {
            return Err(PulseError::EmptyWindow(window.0, window.1));
        }
        if let Envelope::Gaussian { peak, tau, .. } = envelope {
            if tau <= 0.0 {
                return Err(PulseError::NonPositiveWidth(tau));
            }
            if peak < 0.0 {
                return Err(PulseError::NegativeAmplitude(peak / (2.0 * PI)));
            }
        }
        Ok(Self {
            transition,
            envelope,
            detuning,
            carrier_phase,
            window,
        })
    }

    pub fn is_active(&self, t: f64) -> bool {
        self.window.0 <= t && t < self.window.1
    }

    /// Drive amplitude at `t`, hard-truncated outside the window.
    pub fn amplitude_at(&self, t: f64) -> f64 {
        if self.is_active(t) {
            self.envelope.value(t)
        } else {
            0.0
        }
    }

    /// Translate the whole segment (window, envelope center and detuning
    /// origin) by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            transition: self.transition,
            envelope: self.envelope.shifted(dt),
            detuning: self.detuning.shifted(dt),
            carrier_phase: self.carrier_phase,
            window: (self.window.0 + dt, self.window.1 + dt),
        }
    }

    /// Scale the envelope amplitude by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            envelope: self.envelope.scaled(factor),
            ..self.clone()
        }
    }

    /// Add `dphi` to the carrier phase.
    pub fn with_phase_offset(&self, dphi: f64) -> Self {
        Self {
            carrier_phase: self.carrier_phase + dphi,
            ..self.clone()
        }
    }

    /// Mirror the envelope and window in time about `pivot`, keeping the
    /// detuning law as given.
    pub fn mirrored(&self, pivot: f64, detuning: DetuningLaw) -> Self {
        Self {
            transition: self.transition,
            envelope: self.envelope.mirrored(pivot),
            detuning,
            carrier_phase: self.carrier_phase,
            window: (2.0 * pivot - self.window.1, 2.0 * pivot - self.window.0),
        }
    }
}

/// Ordered list of segments with a global simulation window.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule {
    pub segments: Vec<PulseSegment>,
    pub t0: f64,
    pub t1: f64,
}

impl PulseSchedule {
    pub fn new(segments: Vec<PulseSegment>, t0: f64, t1: f64) -> Result<Self, PulseError> {
        if !t0.is_finite() || !t1.is_finite() || t0 >= t1 {
            return Err(PulseError::EmptyWindow(t0, t1));
        }
        for seg in &segments {
            if seg.window.0 < t0 || seg.window.1 > t1 {
                return Err(PulseError::WindowOutOfRange(
                    seg.window.0,
                    seg.window.1,
                    t0,
                    t1,
                ));
            }
        }
        Ok(Self { segments, t0, t1 })
    }

    /// Schedule spanning exactly the union of the segment windows.
    pub fn covering(segments: Vec<PulseSegment>) -> Result<Self, PulseError> {
        let t0 = segments
            .iter()
            .map(|s| s.window.0)
            .fold(f64::INFINITY, f64::min);
        let t1 = segments
            .iter()
            .map(|s| s.window.1)
            .fold(f64::NEG_INFINITY, f64::max);
        Self::new(segments, t0, t1)
    }

    /// Translate every segment and the global window by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            segments: self.segments.iter().map(|s| s.shifted(dt)).collect(),
            t0: self.t0 + dt,
            t1: self.t1 + dt,
        }
    }

    /// The schedule generating the inverse evolution: envelopes mirrored in
    /// time about the window midpoint, carrier phases offset by π, detuning
    /// laws negated and mirrored. Running the original schedule and then this
    /// one returns any initial state up to integrator error.
    pub fn time_reversed(&self) -> Self {
        let s = self.t0 + self.t1;
        let segments = self
            .segments
            .iter()
            .map(|seg| PulseSegment {
                transition: seg.transition,
                envelope: seg.envelope.mirrored(s / 2.0),
                detuning: seg.detuning.time_reversed(s),
                carrier_phase: seg.carrier_phase + PI,
                window: (s - seg.window.1, s - seg.window.0),
            })
            .collect();
        Self {
            segments,
            t0: self.t0,
            t1: self.t1,
        }
    }

    /// All window edges and detuning switch times inside the global window,
    /// sorted and deduplicated. Integration is split at these points.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = Vec::new();
        for seg in &self.segments {
            pts.push(seg.window.0);
            pts.push(seg.window.1);
            if let DetuningLaw::SignSwitch { switch_time, .. } = seg.detuning {
                pts.push(switch_time);
            }
        }
        pts.retain(|&t| t > self.t0 && t < self.t1);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        pts
    }
}

/// Build a linearly chirped Gaussian pulse (adiabatic rapid passage).
///
/// `omega_mhz` is the peak Rabi frequency Ω/2π in MHz, `chirp_hz_per_s` the
/// chirp rate α/2π in Hz/s (1 THz/s = 1e12), `tau_us` the half-width at 1/e
/// intensity. The instantaneous detuning is `α·(t − center)` on the upper
/// level and the window defaults to `center ± 4τ`.
pub fn make_arp(
    transition: Transition,
    omega_mhz: f64,
    chirp_hz_per_s: f64,
    tau_us: f64,
    center_us: f64,
    phase: f64,
) -> Result<PulseSegment, PulseError> {
    if tau_us <= 0.0 {
        return Err(PulseError::NonPositiveWidth(tau_us));
    }
    if omega_mhz < 0.0 {
        return Err(PulseError::NegativeAmplitude(omega_mhz));
    }
    // Hz/s = 1e-12 MHz/µs, so α (rad/µs²) = 2π · 1e-12 · chirp.
    let rate = mhz(chirp_hz_per_s * 1e-12);
    PulseSegment::new(
        transition,
        Envelope::Gaussian {
            peak: mhz(omega_mhz),
            center: center_us,
            tau: tau_us,
        },
        DetuningLaw::LinearChirp {
            rate,
            origin: center_us,
        },
        phase,
        (center_us - 4.0 * tau_us, center_us + 4.0 * tau_us),
    )
}

/// Parameters of [`make_stirap_pair`].
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct StirapPair {
    /// Pump Rabi frequency Ω₁/2π (MHz), coupling g → e.
    pub omega1_mhz: f64,
    /// Stokes Rabi frequency Ω₂/2π (MHz), coupling e → r.
    pub omega2_mhz: f64,
    /// Pump peak offset t₁ (µs): the pump peaks at −t₁.
    pub t1_us: f64,
    /// Stokes peak offset t₂ (µs): the Stokes peaks at −t₂.
    pub t2_us: f64,
    /// Shared 1/e-intensity half-width τ (µs).
    pub tau_us: f64,
    /// Single-photon detuning δ/2π (MHz) carried by the intermediate level.
    pub delta_mhz: f64,
}

/// Build a STIRAP pulse pair with envelopes `Ω_j exp(−(t+t_j)²/2τ²)`.
///
/// With `t₁ < t₂` the Stokes pulse (peak at −t₂) precedes the pump (peak at
/// −t₁): the counter-intuitive order that transfers g → r through the dark
/// state. The pair is held at two-photon resonance; the pump segment carries
/// the single-photon detuning δ onto the intermediate level and the Stokes
/// segment is marked resonant so the Rydberg level stays at zero diagonal
/// energy.
///
/// `reversed` mirrors the pair in time about `pivot` and flips the sign of δ,
/// producing the r → g passage that undoes the dynamic phase of the forward
/// pair.
pub fn make_stirap_pair(
    pump: Transition,
    stokes: Transition,
    params: StirapPair,
    reversed: bool,
    pivot: f64,
) -> Result<[PulseSegment; 2], PulseError> {
    if params.tau_us <= 0.0 {
        return Err(PulseError::NonPositiveWidth(params.tau_us));
    }
    if pump.to != stokes.from || pump.ensemble != stokes.ensemble {
        return Err(PulseError::BrokenLadder(pump, stokes));
    }
    let w = 4.0 * params.tau_us;
    let pump_seg = PulseSegment::new(
        pump,
        Envelope::Gaussian {
            peak: mhz(params.omega1_mhz),
            center: -params.t1_us,
            tau: params.tau_us,
        },
        DetuningLaw::Constant {
            value: mhz(params.delta_mhz),
        },
        0.0,
        (-params.t1_us - w, -params.t1_us + w),
    )?;
    let stokes_seg = PulseSegment::new(
        stokes,
        Envelope::Gaussian {
            peak: mhz(params.omega2_mhz),
            center: -params.t2_us,
            tau: params.tau_us,
        },
        DetuningLaw::resonant(),
        0.0,
        (-params.t2_us - w, -params.t2_us + w),
    )?;
    if reversed {
        let delta = DetuningLaw::Constant {
            value: -mhz(params.delta_mhz),
        };
        Ok([
            pump_seg.mirrored(pivot, delta),
            stokes_seg.mirrored(pivot, DetuningLaw::resonant()),
        ])
    } else {
        Ok([pump_seg, stokes_seg])
    }
}

/// Build a square resonant Rabi pulse of the given area.
///
/// The pulse starts at `start_us` and lasts `area/Ω`; it implements the
/// rotation `R(θ=area, φ=phase)` on the addressed transition with the
/// convention `R(π, 0)|a⟩ = i|b⟩` (realized by an internal π offset of the
/// carrier relative to the bare coupling term).
pub fn make_rabi(
    transition: Transition,
    omega_mhz: f64,
    area: f64,
    phase: f64,
    start_us: f64,
) -> Result<PulseSegment, PulseError> {
    if omega_mhz <= 0.0 {
        return Err(PulseError::ZeroRabi(omega_mhz));
    }
    let omega = mhz(omega_mhz);
    let duration = area / omega;
    PulseSegment::new(
        transition,
        Envelope::Constant { value: omega },
        DetuningLaw::resonant(),
        phase + PI,
        (start_us, start_us + duration.max(f64::MIN_POSITIVE)),
    )
}
