//! Scenario file schema: a JSON tree describing one simulation, protocol
//! run, truth table, sweep or statistics table.
//!
//! Unknown keys are hard errors. Every scenario is fully validated before
//! any computation starts, and the resolved parameters are echoed into the
//! output metadata header.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use blockade_sim::basis::{Level, Transition};
use blockade_sim::protocols::{
    ArpParams, PassageKind, ProtocolKind, ProtocolSpec, PulseParams, SecondPassageOrder,
};
use blockade_sim::pulse::{DetuningLaw, Envelope, PulseSchedule, PulseSegment, StirapPair};

/// Validation failure: names the offending key and the violated constraint.
#[derive(Debug)]
pub struct ValidationError {
    pub key: String,
    pub constraint: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invalid scenario: key `{}`: {}",
            self.key, self.constraint
        )
    }
}

impl std::error::Error for ValidationError {}

fn invalid(key: &str, constraint: impl Into<String>) -> ValidationError {
    ValidationError {
        key: key.into(),
        constraint: constraint.into(),
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Simulate,
    Protocol,
    TruthTable,
    Sweep,
    Poisson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poisson: Option<PoissonSection>,
    #[serde(default)]
    pub output: OutputSection,
}

/// Explicit register description for raw-schedule scenarios.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    /// Level labels per ensemble, e.g. `[["g0", "e", "r0"]]`.
    pub levels: Vec<Vec<String>>,
    /// Atom count per ensemble.
    pub n_atoms: Vec<u32>,
    #[serde(default)]
    pub cross_blockade: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    /// One of: arp_single, stirap_single, double_arp, double_stirap,
    /// load_single_atom, mw_single_qubit, mw_cnot, mw_cz, opt_single_qubit,
    /// opt_cnot, opt_cz, pi_pulse_reference.
    pub name: String,
    /// Atom count per ensemble for a single run (two-qubit protocols).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_atoms: Option<Vec<u32>>,
    /// Atom counts to scan, one run per entry (single-ensemble protocols).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u32>>,
    /// Rotation angle (rad) for single-qubit protocols.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Rotation axis phase (rad).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    /// Pulse area (rad) for pi_pulse_reference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    /// Detuning sign switch between STIRAP pairs (default true).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_switch: Option<bool>,
    /// Carrier phase flip between ARP pulses (default true).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_flip: Option<bool>,
    /// "stirap" (default) or "arp": passage used inside composite protocols.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passage: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stirap: Option<StirapSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arp: Option<ArpSection>,
    /// Rabi frequency Ω/2π (MHz) of π and rotation pulses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi_mhz: Option<f64>,
    /// Guard gap between sequential pulses (µs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard_us: Option<f64>,
    /// "mirrored" (default) or "repeated" second passage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_order: Option<String>,
    /// Whether the CNOT microwave π addresses both ensembles at once.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simultaneous_microwave: Option<bool>,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StirapSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega1_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega2_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_mhz: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArpSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chirp_hz_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_us: Option<f64>,
}

/// Raw drive schedule; requires a `basis` section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub segments: Vec<SegmentSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_us: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSection {
    /// Ensemble index (0 or 1).
    #[serde(default)]
    pub ensemble: usize,
    /// Lower level label of the driven transition.
    pub from: String,
    /// Upper level label of the driven transition.
    pub to: String,
    pub envelope: EnvelopeSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning: Option<DetuningSection>,
    #[serde(default)]
    pub phase_rad: f64,
    /// Active window `[t_start, t_end]` (µs).
    pub window_us: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum EnvelopeSection {
    Gaussian {
        omega_mhz: f64,
        center_us: f64,
        tau_us: f64,
    },
    Constant {
        omega_mhz: f64,
    },
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum DetuningSection {
    Constant { delta_mhz: f64 },
    LinearChirp { chirp_hz_per_s: f64, origin_us: f64 },
    SignSwitch { delta_mhz: f64, switch_time_us: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum SweepAxis {
    /// Scale the second passage's Rabi amplitude.
    RabiRatio,
    /// Relative microwave phase between two π/2 rotation sequences.
    RelativePhase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub n_list: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonSection {
    pub nbar: f64,
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    /// Also tabulate per-N excitation errors of these protocols.
    #[serde(default)]
    pub loading_protocols: Vec<String>,
    /// Single-atom pulse area of the π-pulse reference (rad); defaults to
    /// π/√5 (optimized for N = 5).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi_area: Option<f64>,
}

fn default_n_max() -> u32 {
    15
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Sample spacing for time series (µs).
    #[serde(default = "default_dt")]
    pub sample_dt_us: f64,
    /// Emit an SVG line plot next to the CSV.
    #[serde(default = "default_true")]
    pub plot: bool,
}

fn default_dt() -> f64 {
    0.02
}

fn default_true() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            sample_dt_us: default_dt(),
            plot: default_true(),
        }
    }
}

impl ProtocolSection {
    /// Resolve the pulse parameters with defaults applied.
    pub fn pulse_params(&self, kind: &ProtocolKind) -> Result<PulseParams, ValidationError> {
        let mut params = if kind.is_gate() {
            PulseParams::gate()
        } else {
            PulseParams::default()
        };
        if let Some(passage) = &self.passage {
            params.passage = match passage.as_str() {
                "stirap" => PassageKind::Stirap,
                "arp" => PassageKind::Arp,
                other => {
                    return Err(invalid(
                        "protocol.passage",
                        format!("unknown passage `{other}` (expected `stirap` or `arp`)"),
                    ))
                }
            };
        }
        if let Some(s) = &self.stirap {
            let d = params.stirap;
            params.stirap = StirapPair {
                omega1_mhz: s.omega1_mhz.unwrap_or(d.omega1_mhz),
                omega2_mhz: s.omega2_mhz.unwrap_or(d.omega2_mhz),
                t1_us: s.t1_us.unwrap_or(d.t1_us),
                t2_us: s.t2_us.unwrap_or(d.t2_us),
                tau_us: s.tau_us.unwrap_or(d.tau_us),
                delta_mhz: s.delta_mhz.unwrap_or(d.delta_mhz),
            };
        }
        if let Some(a) = &self.arp {
            let d = params.arp;
            params.arp = ArpParams {
                omega_mhz: a.omega_mhz.unwrap_or(d.omega_mhz),
                chirp_hz_per_s: a.chirp_hz_per_s.unwrap_or(d.chirp_hz_per_s),
                tau_us: a.tau_us.unwrap_or(d.tau_us),
            };
        }
        if let Some(r) = self.rabi_mhz {
            params.rabi_mhz = r;
        }
        if let Some(g) = self.guard_us {
            params.guard_us = g;
        }
        if let Some(order) = &self.second_order {
            params.second_order = match order.as_str() {
                "mirrored" => SecondPassageOrder::Mirrored,
                "repeated" => SecondPassageOrder::Repeated,
                other => {
                    return Err(invalid(
                        "protocol.second_order",
                        format!("unknown order `{other}` (expected `mirrored` or `repeated`)"),
                    ))
                }
            };
        }
        if let Some(s) = self.simultaneous_microwave {
            params.simultaneous_microwave = s;
        }
        Ok(params)
    }

    /// Resolve the protocol kind (without atom counts).
    pub fn protocol_kind(&self) -> Result<ProtocolKind, ValidationError> {
        let theta = self.theta.unwrap_or(PI);
        let phi = self.phi.unwrap_or(0.0);
        let sign_switch = self.sign_switch.unwrap_or(true);
        let phase_flip = self.phase_flip.unwrap_or(true);
        match self.name.as_str() {
            "arp_single" => Ok(ProtocolKind::ArpSingle),
            "stirap_single" => Ok(ProtocolKind::StirapSingle),
            "double_arp" => Ok(ProtocolKind::DoubleArp { phase_flip }),
            "double_stirap" => Ok(ProtocolKind::DoubleStirap { sign_switch }),
            "load_single_atom" => Ok(ProtocolKind::LoadSingleAtom),
            "mw_single_qubit" => Ok(ProtocolKind::MwSingleQubit {
                theta,
                phi,
                sign_switch,
            }),
            "mw_cnot" => Ok(ProtocolKind::MwCnot),
            "mw_cz" => Ok(ProtocolKind::MwCz),
            "opt_single_qubit" => Ok(ProtocolKind::OptSingleQubit { theta, phi }),
            "opt_cnot" => Ok(ProtocolKind::OptCnot),
            "opt_cz" => Ok(ProtocolKind::OptCz),
            "pi_pulse_reference" => Ok(ProtocolKind::PiPulseReference {
                area: self.area.unwrap_or(PI / 5.0f64.sqrt()),
            }),
            other => Err(invalid(
                "protocol.name",
                format!("unknown protocol `{other}`"),
            )),
        }
    }

    /// Full spec for a given atom-count assignment.
    pub fn spec(&self, n_atoms: Vec<u32>) -> Result<ProtocolSpec, ValidationError> {
        let kind = self.protocol_kind()?;
        let params = self.pulse_params(&kind)?;
        Ok(ProtocolSpec {
            kind,
            n_atoms,
            params,
        })
    }

    /// The per-run atom counts: `n_list` entries for single-ensemble
    /// protocols, a single `n_atoms` assignment otherwise.
    pub fn runs(&self) -> Result<Vec<Vec<u32>>, ValidationError> {
        let kind = self.protocol_kind()?;
        match (kind.ensembles(), &self.n_list, &self.n_atoms) {
            (1, Some(list), None) if !list.is_empty() => {
                Ok(list.iter().map(|&n| vec![n]).collect())
            }
            (1, None, Some(n)) if n.len() == 1 => Ok(vec![n.clone()]),
            (2, None, Some(n)) if n.len() == 2 => Ok(vec![n.clone()]),
            (1, _, _) => Err(invalid(
                "protocol.n_list",
                "single-ensemble protocols take `n_list` (or a one-element `n_atoms`)",
            )),
            (_, _, _) => Err(invalid(
                "protocol.n_atoms",
                "two-qubit protocols take `n_atoms` with exactly two entries",
            )),
        }
    }
}

fn parse_level(label: &str, key: &str) -> Result<Level, ValidationError> {
    Level::parse(label).ok_or_else(|| invalid(key, format!("unknown level label `{label}`")))
}

impl BasisSection {
    pub fn build(&self) -> Result<blockade_sim::RegisterBasis, ValidationError> {
        if self.levels.len() != self.n_atoms.len() {
            return Err(invalid(
                "basis.n_atoms",
                "must have one atom count per ensemble",
            ));
        }
        let mut ensembles = Vec::new();
        for (k, (labels, &n)) in self.levels.iter().zip(&self.n_atoms).enumerate() {
            let levels = labels
                .iter()
                .map(|l| parse_level(l, &format!("basis.levels[{k}]")))
                .collect::<Result<Vec<Level>, ValidationError>>()?;
            let scheme = blockade_sim::LevelScheme::new(levels)
                .map_err(|e| invalid(&format!("basis.levels[{k}]"), e.to_string()))?;
            ensembles.push((scheme, n));
        }
        blockade_sim::RegisterBasis::enumerate(ensembles, self.cross_blockade)
            .map_err(|e| invalid("basis", e.to_string()))
    }
}

impl ScheduleSection {
    pub fn build(&self) -> Result<PulseSchedule, ValidationError> {
        let mut segments = Vec::new();
        for (k, s) in self.segments.iter().enumerate() {
            let key = format!("schedule.segments[{k}]");
            let from = parse_level(&s.from, &format!("{key}.from"))?;
            let to = parse_level(&s.to, &format!("{key}.to"))?;
            let envelope = match s.envelope {
                EnvelopeSection::Gaussian {
                    omega_mhz,
                    center_us,
                    tau_us,
                } => Envelope::Gaussian {
                    peak: blockade_sim::mhz(omega_mhz),
                    center: center_us,
                    tau: tau_us,
                },
                EnvelopeSection::Constant { omega_mhz } => Envelope::Constant {
                    value: blockade_sim::mhz(omega_mhz),
                },
                EnvelopeSection::Zero => Envelope::Zero,
            };
            let detuning = match s.detuning {
                None => DetuningLaw::resonant(),
                Some(DetuningSection::Constant { delta_mhz }) => DetuningLaw::Constant {
                    value: blockade_sim::mhz(delta_mhz),
                },
                Some(DetuningSection::LinearChirp {
                    chirp_hz_per_s,
                    origin_us,
                }) => DetuningLaw::LinearChirp {
                    rate: blockade_sim::mhz(chirp_hz_per_s * 1e-12),
                    origin: origin_us,
                },
                Some(DetuningSection::SignSwitch {
                    delta_mhz,
                    switch_time_us,
                }) => DetuningLaw::SignSwitch {
                    value: blockade_sim::mhz(delta_mhz),
                    switch_time: switch_time_us,
                },
            };
            let seg = PulseSegment::new(
                Transition::new(s.ensemble, from, to),
                envelope,
                detuning,
                s.phase_rad,
                (s.window_us[0], s.window_us[1]),
            )
            .map_err(|e| invalid(&key, e.to_string()))?;
            segments.push(seg);
        }
        let schedule = match (self.t0_us, self.t1_us) {
            (Some(a), Some(b)) => PulseSchedule::new(segments, a, b),
            _ => PulseSchedule::covering(segments),
        }
        .map_err(|e| invalid("schedule", e.to_string()))?;
        Ok(schedule)
    }
}

impl Scenario {
    /// Parse a scenario from JSON text. Unknown keys are rejected by the
    /// schema; structural validation runs afterwards.
    pub fn parse(text: &str) -> Result<Self, anyhow::Error> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| {
            anyhow::anyhow!(
                "parse error at line {}, column {}: {e}",
                e.line(),
                e.column()
            )
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Structural validation beyond the schema: section presence per kind,
    /// parameter ranges, protocol/schedule exclusivity.
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.name.is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        if self.output.sample_dt_us <= 0.0 {
            return Err(invalid("output.sample_dt_us", "must be positive"));
        }
        if self.protocol.is_some() && self.schedule.is_some() {
            return Err(invalid(
                "protocol",
                "`protocol` and `schedule` are mutually exclusive",
            ));
        }
        match self.kind {
            ScenarioKind::Simulate => {
                match (&self.protocol, &self.schedule) {
                    (Some(p), None) => {
                        p.runs()?;
                        p.spec(vec![1; p.protocol_kind()?.ensembles()])?;
                    }
                    (None, Some(s)) => {
                        let basis = self.basis.as_ref().ok_or_else(|| {
                            invalid("basis", "raw schedules need a basis section")
                        })?;
                        basis.build()?;
                        s.build()?;
                    }
                    (None, None) => {
                        return Err(invalid(
                            "protocol",
                            "simulate scenarios need a `protocol` or a `schedule` section",
                        ))
                    }
                    (Some(_), Some(_)) => unreachable!("checked above"),
                }
                if self.sweep.is_some() || self.poisson.is_some() {
                    return Err(invalid("sweep", "not allowed in a simulate scenario"));
                }
            }
            ScenarioKind::Protocol => {
                let p = self.protocol.as_ref().ok_or_else(|| {
                    invalid("protocol", "protocol scenarios need a protocol section")
                })?;
                p.runs()?;
            }
            ScenarioKind::TruthTable => {
                let p = self.protocol.as_ref().ok_or_else(|| {
                    invalid("protocol", "truth-table scenarios need a protocol section")
                })?;
                let kind = p.protocol_kind()?;
                if kind.ensembles() != 2 {
                    return Err(invalid(
                        "protocol.name",
                        "truth tables need a two-qubit protocol (mw_cnot, mw_cz, opt_cnot, opt_cz)",
                    ));
                }
                p.runs()?;
            }
            ScenarioKind::Sweep => {
                let sweep = self
                    .sweep
                    .as_ref()
                    .ok_or_else(|| invalid("sweep", "sweep scenarios need a sweep section"))?;
                if sweep.grid.is_empty() {
                    return Err(invalid("sweep.grid", "must not be empty"));
                }
                if sweep.grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("sweep.grid", "must be strictly increasing"));
                }
                if sweep.n_list.is_empty() {
                    return Err(invalid("sweep.n_list", "must not be empty"));
                }
                match sweep.axis {
                    SweepAxis::RabiRatio => {
                        let p = self.protocol.as_ref().ok_or_else(|| {
                            invalid("protocol", "rabi-ratio sweeps need a protocol section")
                        })?;
                        let kind = p.protocol_kind()?;
                        if !matches!(
                            kind,
                            ProtocolKind::DoubleArp { .. } | ProtocolKind::DoubleStirap { .. }
                        ) {
                            return Err(invalid(
                                "protocol.name",
                                "rabi-ratio sweeps need double_arp or double_stirap",
                            ));
                        }
                        if sweep.grid.iter().any(|&r| r <= 0.0 || r > 2.0) {
                            return Err(invalid("sweep.grid", "ratios must lie in (0, 2]"));
                        }
                    }
                    SweepAxis::RelativePhase => {
                        // The base protocol is implicit (mw_single_qubit π/2
                        // pairs); an explicit protocol section may tune
                        // pulse parameters or the sign switch.
                        if let Some(p) = &self.protocol {
                            let kind = p.protocol_kind()?;
                            if !matches!(kind, ProtocolKind::MwSingleQubit { .. }) {
                                return Err(invalid(
                                    "protocol.name",
                                    "relative-phase sweeps use mw_single_qubit",
                                ));
                            }
                        }
                    }
                }
            }
            ScenarioKind::Poisson => {
                let p = self.poisson.as_ref().ok_or_else(|| {
                    invalid("poisson", "poisson scenarios need a poisson section")
                })?;
                if p.nbar <= 0.0 {
                    return Err(invalid("poisson.nbar", "mean atom number must be positive"));
                }
                for name in &p.loading_protocols {
                    if !matches!(
                        name.as_str(),
                        "pi_pulse_reference" | "arp_single" | "stirap_single"
                    ) {
                        return Err(invalid(
                            "poisson.loading_protocols",
                            format!("unknown loading protocol `{name}`"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The shipped scenario library, one entry per reproduced figure panel.
pub const LIBRARY: &[(&str, &str)] = &[
    ("fig2a_arp", include_str!("../scenarios/fig2a_arp.json")),
    (
        "fig2b_stirap_delta0",
        include_str!("../scenarios/fig2b_stirap_delta0.json"),
    ),
    (
        "fig2c_stirap_delta200",
        include_str!("../scenarios/fig2c_stirap_delta200.json"),
    ),
    (
        "fig3bc_loading",
        include_str!("../scenarios/fig3bc_loading.json"),
    ),
    (
        "fig4c_double_stirap_noswitch",
        include_str!("../scenarios/fig4c_double_stirap_noswitch.json"),
    ),
    (
        "fig4d_double_stirap_switch",
        include_str!("../scenarios/fig4d_double_stirap_switch.json"),
    ),
    (
        "fig4e_double_arp_flip",
        include_str!("../scenarios/fig4e_double_arp_flip.json"),
    ),
    (
        "fig7a_interference",
        include_str!("../scenarios/fig7a_interference.json"),
    ),
    (
        "fig7b_interference_noswitch",
        include_str!("../scenarios/fig7b_interference_noswitch.json"),
    ),
    (
        "fig7c_rabi_ratio",
        include_str!("../scenarios/fig7c_rabi_ratio.json"),
    ),
    (
        "fig7d_cnot_truth_table",
        include_str!("../scenarios/fig7d_cnot_truth_table.json"),
    ),
];

/// Look up a shipped scenario by name.
pub fn library_scenario(name: &str) -> Option<&'static str> {
    LIBRARY
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}
