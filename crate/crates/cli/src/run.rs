//! Scenario execution: dispatch on the scenario kind, write CSV tables and
//! SVG plots.

use std::fs;
use std::path::{Path, PathBuf};

use blockade_sim::analysis;
use blockade_sim::dynamics::{DynamicsError, HamiltonianModel, Sampling, StateVector};
use blockade_sim::ode::OdeOptions;
use blockade_sim::protocols::{self, ProtocolError, ProtocolKind};

use crate::csvout::{Cell, Table};
use crate::plot::{self, Series};
use crate::scenario::{Scenario, ScenarioKind, SweepAxis};

/// Failure modes mapped to process exit codes.
#[derive(Debug)]
pub enum RunError {
    /// Exit 2: the scenario is invalid.
    Validation(String),
    /// Exit 3: the integrator failed.
    Integration(String),
    /// Exit 4: an output path could not be written.
    Output(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 2,
            RunError::Integration(_) => 3,
            RunError::Output(_) => 4,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Validation(m) => write!(f, "validation error: {m}"),
            RunError::Integration(m) => write!(f, "integration failure: {m}"),
            RunError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

fn classify_protocol(e: ProtocolError) -> RunError {
    match e {
        ProtocolError::Dynamics(DynamicsError::Integration(ode)) => {
            RunError::Integration(ode.to_string())
        }
        other => RunError::Validation(other.to_string()),
    }
}

fn classify_analysis(e: analysis::AnalysisError) -> RunError {
    match e {
        analysis::AnalysisError::Protocol(p) => classify_protocol(p),
        other => RunError::Validation(other.to_string()),
    }
}

fn ode_options(rtol: Option<f64>) -> OdeOptions {
    match rtol {
        Some(r) => OdeOptions {
            rtol: r,
            atol: r * 1e-3,
            ..OdeOptions::default()
        },
        None => OdeOptions::default(),
    }
}

fn base_meta(table: &mut Table, sc: &Scenario, opts: &OdeOptions) {
    table.meta("tool", format!("blockade {}", env!("CARGO_PKG_VERSION")));
    table.meta("scenario", &sc.name);
    if let Some(desc) = &sc.description {
        table.meta("description", desc);
    }
    table.meta("kind", format!("{:?}", sc.kind));
    table.meta("integrator", "dormand-prince 5(4)");
    table.meta("rtol", format!("{:e}", opts.rtol));
    table.meta("atol", format!("{:e}", opts.atol));
    table.meta("sample_dt_us", sc.output.sample_dt_us);
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| RunError::Output(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| RunError::Output(format!("{}: {e}", path.display())))
}

/// Execute a validated scenario, writing artifacts into `out_dir`. Returns
/// the paths written.
pub fn run_scenario(
    sc: &Scenario,
    out_dir: &Path,
    plot_enabled: bool,
    rtol: Option<f64>,
) -> Result<Vec<PathBuf>, RunError> {
    sc.validate()
        .map_err(|e| RunError::Validation(e.to_string()))?;
    let opts = ode_options(rtol);
    let plotting = plot_enabled && sc.output.plot;
    match sc.kind {
        ScenarioKind::Simulate => run_simulate(sc, out_dir, plotting, &opts),
        ScenarioKind::Protocol => run_protocol(sc, out_dir, plotting, &opts),
        ScenarioKind::TruthTable => run_truth_table(sc, out_dir, &opts),
        ScenarioKind::Sweep => run_sweep(sc, out_dir, plotting, &opts),
        ScenarioKind::Poisson => run_poisson(sc, out_dir, plotting, &opts),
    }
}

struct SeriesData {
    label: String,
    excitation: Vec<f64>,
    phase: Vec<Option<f64>>,
}

fn run_simulate(
    sc: &Scenario,
    out_dir: &Path,
    plotting: bool,
    opts: &OdeOptions,
) -> Result<Vec<PathBuf>, RunError> {
    let dt = sc.output.sample_dt_us;
    let mut table;
    let mut times: Vec<f64> = Vec::new();
    let mut series: Vec<SeriesData> = Vec::new();
    let mut norm_drifts: Vec<(String, f64)> = Vec::new();

    if let Some(p) = &sc.protocol {
        let runs = p.runs().map_err(|e| RunError::Validation(e.to_string()))?;
        for n_assignment in &runs {
            let spec = p
                .spec(n_assignment.clone())
                .map_err(|e| RunError::Validation(e.to_string()))?;
            let run =
                protocols::run(&spec, Sampling::Dense { dt }, opts).map_err(classify_protocol)?;
            if times.is_empty() {
                times = run.trajectory.times.clone();
            }
            let label = format!("N{}", n_assignment[0]);
            series.push(SeriesData {
                label: label.clone(),
                excitation: analysis::excitation_series(&run.built.basis, &run.trajectory),
                phase: run.ground_phase.clone(),
            });
            norm_drifts.push((label, run.trajectory.norm_drift));
        }
        table = Table::new(columns_for(&series));
        base_meta(&mut table, sc, opts);
        table.meta(
            "protocol",
            format!("{:?}", p.spec(runs[0].clone()).unwrap()),
        );
    } else {
        let basis_section = sc.basis.as_ref().expect("validated");
        let basis = basis_section
            .build()
            .map_err(|e| RunError::Validation(e.to_string()))?;
        let schedule = sc
            .schedule
            .as_ref()
            .expect("validated")
            .build()
            .map_err(|e| RunError::Validation(e.to_string()))?;
        let model = HamiltonianModel::new(&basis, &schedule)
            .map_err(|e| RunError::Validation(e.to_string()))?;
        let psi0 = StateVector::basis_state(&basis, basis.all_ground_index(), schedule.t0);
        let traj = model
            .evolve_with(
                &psi0,
                (schedule.t0, schedule.t1),
                Sampling::Dense { dt },
                opts,
            )
            .map_err(|e| match e {
                DynamicsError::Integration(ode) => RunError::Integration(ode.to_string()),
                other => RunError::Validation(other.to_string()),
            })?;
        times = traj.times.clone();
        series.push(SeriesData {
            label: "run".into(),
            excitation: analysis::excitation_series(&basis, &traj),
            phase: protocols::ground_phase_series(&traj, basis.all_ground_index()),
        });
        norm_drifts.push(("run".into(), traj.norm_drift));
        table = Table::new(columns_for(&series));
        base_meta(&mut table, sc, opts);
        table.meta("basis_dim", basis.dim());
    }

    for (label, drift) in &norm_drifts {
        table.meta(format!("norm_drift_{label}"), format!("{drift:e}"));
    }
    for (k, &t) in times.iter().enumerate() {
        let mut row: Vec<Cell> = vec![t.into()];
        for s in &series {
            row.push(s.excitation[k].into());
        }
        for s in &series {
            row.push(s.phase[k].into());
        }
        table.push_row(row);
    }

    let mut written = vec![write_csv(sc, out_dir, &table)?];
    if plotting {
        let excitation_series: Vec<Series> = series
            .iter()
            .map(|s| Series {
                label: s.label.clone(),
                points: times
                    .iter()
                    .copied()
                    .zip(s.excitation.iter().copied())
                    .collect(),
            })
            .collect();
        written.push(write_svg(
            sc,
            out_dir,
            "excitation",
            &plot::line_chart(
                &format!("{}: single-excitation probability", sc.name),
                "time (us)",
                "P(single Rydberg excitation)",
                &excitation_series,
            ),
        )?);
        let phase_series: Vec<Series> = series
            .iter()
            .map(|s| Series {
                label: s.label.clone(),
                points: times
                    .iter()
                    .copied()
                    .zip(s.phase.iter().map(|p| p.unwrap_or(f64::NAN)))
                    .collect(),
            })
            .collect();
        written.push(write_svg(
            sc,
            out_dir,
            "phase",
            &plot::line_chart(
                &format!("{}: collective ground-state phase", sc.name),
                "time (us)",
                "phase (rad)",
                &phase_series,
            ),
        )?);
    }
    Ok(written)
}

fn columns_for(series: &[SeriesData]) -> Vec<String> {
    let mut columns = vec!["time_us".to_string()];
    for s in series {
        columns.push(format!("p1_{}", s.label));
    }
    for s in series {
        columns.push(format!("phase_rad_{}", s.label));
    }
    columns
}

fn run_protocol(
    sc: &Scenario,
    out_dir: &Path,
    plotting: bool,
    opts: &OdeOptions,
) -> Result<Vec<PathBuf>, RunError> {
    let p = sc.protocol.as_ref().expect("validated");
    let runs = p.runs().map_err(|e| RunError::Validation(e.to_string()))?;
    let dt = sc.output.sample_dt_us;

    struct PartitionSeries {
        ground: Vec<f64>,
        intermediate: Vec<f64>,
        rydberg: Vec<f64>,
        phase: Vec<Option<f64>>,
    }
    let mut columns = vec!["time_us".to_string()];
    let mut all: Vec<PartitionSeries> = Vec::new();
    let mut times = Vec::new();
    let mut meta_lines: Vec<(String, String)> = Vec::new();

    for n_assignment in &runs {
        let spec = p
            .spec(n_assignment.clone())
            .map_err(|e| RunError::Validation(e.to_string()))?;
        let label = n_assignment
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join("x");
        let run = protocols::run(&spec, Sampling::Dense { dt }, opts).map_err(classify_protocol)?;
        if times.is_empty() {
            times = run.trajectory.times.clone();
        }
        let basis = &run.built.basis;
        let mut ground = Vec::with_capacity(run.trajectory.states.len());
        let mut intermediate = Vec::with_capacity(run.trajectory.states.len());
        let mut rydberg = Vec::with_capacity(run.trajectory.states.len());
        for psi in &run.trajectory.states {
            let (g, e, r) = analysis::population_partition(basis, psi);
            ground.push(g);
            intermediate.push(e);
            rydberg.push(r);
        }
        columns.push(format!("p_ground_N{label}"));
        columns.push(format!("p_intermediate_N{label}"));
        columns.push(format!("p_rydberg_N{label}"));
        columns.push(format!("phase_rad_N{label}"));
        meta_lines.push((
            format!("norm_drift_N{label}"),
            format!("{:e}", run.trajectory.norm_drift),
        ));
        if spec.kind == ProtocolKind::LoadSingleAtom {
            let success = protocols::loading_success(&run.built, &run.trajectory);
            meta_lines.push((
                format!("loading_success_N{label}"),
                format!("{success:.12}"),
            ));
        }
        all.push(PartitionSeries {
            ground,
            intermediate,
            rydberg,
            phase: run.ground_phase.clone(),
        });
    }

    let mut table = Table::new(columns);
    base_meta(&mut table, sc, opts);
    table.meta(
        "protocol",
        format!("{:?}", p.spec(runs[0].clone()).unwrap()),
    );
    for (k, v) in meta_lines {
        table.meta(k, v);
    }
    for (k, &t) in times.iter().enumerate() {
        let mut row: Vec<Cell> = vec![t.into()];
        for s in &all {
            row.push(s.ground[k].into());
            row.push(s.intermediate[k].into());
            row.push(s.rydberg[k].into());
            row.push(s.phase[k].into());
        }
        table.push_row(row);
    }

    let mut written = vec![write_csv(sc, out_dir, &table)?];
    if plotting {
        let series: Vec<Series> = all
            .iter()
            .zip(&runs)
            .flat_map(|(s, n_assignment)| {
                let label: String = n_assignment
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join("x");
                [
                    Series {
                        label: format!("ground N{label}"),
                        points: times
                            .iter()
                            .copied()
                            .zip(s.ground.iter().copied())
                            .collect(),
                    },
                    Series {
                        label: format!("rydberg N{label}"),
                        points: times
                            .iter()
                            .copied()
                            .zip(s.rydberg.iter().copied())
                            .collect(),
                    },
                ]
            })
            .collect();
        written.push(write_svg(
            sc,
            out_dir,
            "populations",
            &plot::line_chart(
                &format!("{}: populations", sc.name),
                "time (us)",
                "population",
                &series,
            ),
        )?);
    }
    Ok(written)
}

fn run_truth_table(
    sc: &Scenario,
    out_dir: &Path,
    opts: &OdeOptions,
) -> Result<Vec<PathBuf>, RunError> {
    let p = sc.protocol.as_ref().expect("validated");
    let runs = p.runs().map_err(|e| RunError::Validation(e.to_string()))?;
    let spec = p
        .spec(runs[0].clone())
        .map_err(|e| RunError::Validation(e.to_string()))?;
    let table_result = analysis::truth_table(&spec, opts).map_err(classify_analysis)?;

    let mut table = Table::new(vec![
        "input".into(),
        "p_00".into(),
        "p_01".into(),
        "p_10".into(),
        "p_11".into(),
        "leakage".into(),
        "max_deviation".into(),
    ]);
    base_meta(&mut table, sc, opts);
    table.meta("protocol", format!("{spec:?}"));
    table.meta(
        "max_probability_deviation",
        format!("{:e}", table_result.max_probability_deviation),
    );
    table.meta(
        "unitarity_defect",
        format!("{:e}", table_result.unitarity_defect()),
    );
    table.meta("leakage_flagged", table_result.leakage_flagged);
    for (row, input) in table_result.inputs.iter().enumerate() {
        let mut cells: Vec<Cell> = vec![Cell::Text(input.clone())];
        let mut row_dev = 0.0f64;
        for col in 0..4 {
            let measured = table_result.probabilities[(row, col)];
            let ideal = table_result.target[(col, row)].norm_sqr();
            row_dev = row_dev.max((measured - ideal).abs());
            cells.push(measured.into());
        }
        cells.push(table_result.leakage[row].into());
        cells.push(row_dev.into());
        table.push_row(cells);
    }
    Ok(vec![write_csv(sc, out_dir, &table)?])
}

fn run_sweep(
    sc: &Scenario,
    out_dir: &Path,
    plotting: bool,
    opts: &OdeOptions,
) -> Result<Vec<PathBuf>, RunError> {
    let sweep = sc.sweep.as_ref().expect("validated");
    match sweep.axis {
        SweepAxis::RelativePhase => {
            let (params, sign_switch) = match &sc.protocol {
                Some(p) => {
                    let kind = p
                        .protocol_kind()
                        .map_err(|e| RunError::Validation(e.to_string()))?;
                    let params = p
                        .pulse_params(&kind)
                        .map_err(|e| RunError::Validation(e.to_string()))?;
                    let sign_switch = p.sign_switch.unwrap_or(true);
                    (params, sign_switch)
                }
                None => (protocols::PulseParams::gate(), true),
            };
            let curves = analysis::interference_curves(
                &sweep.n_list,
                &sweep.grid,
                &params,
                sign_switch,
                opts,
            )
            .map_err(classify_analysis)?;

            let mut columns = vec!["phi_rad".to_string()];
            for n in &sweep.n_list {
                columns.push(format!("p1_N{n}"));
            }
            columns.push("rabi_reference".into());
            let mut table = Table::new(columns);
            base_meta(&mut table, sc, opts);
            table.meta("sign_switch", sign_switch);
            table.meta(
                "rotation",
                "two mw_single_qubit(pi/2) sequences, relative phase phi",
            );
            table.meta("reference", "cos^2(phi/2)");
            for (k, &phi) in sweep.grid.iter().enumerate() {
                let mut row: Vec<Cell> = vec![phi.into()];
                for curve in &curves {
                    row.push(curve[k].into());
                }
                row.push((phi / 2.0).cos().powi(2).into());
                table.push_row(row);
            }
            let mut written = vec![write_csv(sc, out_dir, &table)?];
            if plotting {
                let mut series: Vec<Series> = sweep
                    .n_list
                    .iter()
                    .zip(&curves)
                    .map(|(n, curve)| Series {
                        label: format!("N={n}"),
                        points: sweep
                            .grid
                            .iter()
                            .copied()
                            .zip(curve.iter().copied())
                            .collect(),
                    })
                    .collect();
                series.push(Series {
                    label: "cos^2(phi/2)".into(),
                    points: sweep
                        .grid
                        .iter()
                        .map(|&phi| (phi, (phi / 2.0).cos().powi(2)))
                        .collect(),
                });
                written.push(write_svg(
                    sc,
                    out_dir,
                    "interference",
                    &plot::line_chart(
                        &format!("{}: two-rotation interference", sc.name),
                        "relative phase (rad)",
                        "P(|1>)",
                        &series,
                    ),
                )?);
            }
            Ok(written)
        }
        SweepAxis::RabiRatio => {
            let p = sc.protocol.as_ref().expect("validated");
            let spec = p
                .spec(vec![sweep.n_list[0]])
                .map_err(|e| RunError::Validation(e.to_string()))?;
            let result = analysis::rabi_ratio_sweep(&spec, &sweep.grid, &sweep.n_list, opts)
                .map_err(classify_analysis)?;

            let mut columns = vec!["ratio".to_string()];
            for n in &sweep.n_list {
                columns.push(format!("pop_err_N{n}"));
            }
            for n in &sweep.n_list {
                columns.push(format!("phase_err_N{n}"));
            }
            let mut table = Table::new(columns);
            base_meta(&mut table, sc, opts);
            table.meta("protocol", format!("{spec:?}"));
            table.meta(
                "phase_error_metric",
                "absolute final phase of the collective ground-state amplitude (rad)",
            );
            for (g, &ratio) in sweep.grid.iter().enumerate() {
                let mut row: Vec<Cell> = vec![ratio.into()];
                for k in 0..sweep.n_list.len() {
                    let pt = result.point(g, k);
                    row.push(if pt.failed {
                        Cell::Missing
                    } else {
                        pt.population_error.into()
                    });
                }
                for k in 0..sweep.n_list.len() {
                    row.push(result.point(g, k).phase_error.into());
                }
                table.push_row(row);
            }
            let mut written = vec![write_csv(sc, out_dir, &table)?];
            if plotting {
                let series: Vec<Series> = sweep
                    .n_list
                    .iter()
                    .enumerate()
                    .map(|(k, n)| Series {
                        label: format!("N={n}"),
                        points: sweep
                            .grid
                            .iter()
                            .enumerate()
                            .map(|(g, &r)| (r, result.point(g, k).phase_error.unwrap_or(f64::NAN)))
                            .collect(),
                    })
                    .collect();
                written.push(write_svg(
                    sc,
                    out_dir,
                    "phase_error",
                    &plot::line_chart(
                        &format!("{}: phase error vs Rabi ratio", sc.name),
                        "ratio",
                        "|phase error| (rad)",
                        &series,
                    ),
                )?);
            }
            Ok(written)
        }
    }
}

fn run_poisson(
    sc: &Scenario,
    out_dir: &Path,
    plotting: bool,
    opts: &OdeOptions,
) -> Result<Vec<PathBuf>, RunError> {
    let p = sc.poisson.as_ref().expect("validated");
    let poisson = analysis::poisson_distribution(p.nbar, p.n_max);
    let pi_area = p.pi_area.unwrap_or(std::f64::consts::PI / 5.0f64.sqrt());
    let params = protocols::PulseParams::default();

    let mut columns = vec!["n".to_string(), "p_poisson".to_string()];
    let mut error_tables: Vec<(String, protocols::LoadingStats)> = Vec::new();
    for name in &p.loading_protocols {
        let kind = match name.as_str() {
            "pi_pulse_reference" => ProtocolKind::PiPulseReference { area: pi_area },
            "arp_single" => ProtocolKind::ArpSingle,
            "stirap_single" => ProtocolKind::StirapSingle,
            _ => unreachable!("validated"),
        };
        let stats = protocols::single_atom_loading_stats(p.nbar, &kind, &params, p.n_max, opts)
            .map_err(classify_protocol)?;
        let short = match name.as_str() {
            "pi_pulse_reference" => "pi",
            "arp_single" => "arp",
            "stirap_single" => "stirap",
            other => other,
        };
        columns.push(format!("err_{short}"));
        error_tables.push((short.to_string(), stats));
    }

    let mut table = Table::new(columns);
    base_meta(&mut table, sc, opts);
    table.meta("nbar", p.nbar);
    table.meta("n_max", p.n_max);
    if p.loading_protocols
        .iter()
        .any(|n| n == "pi_pulse_reference")
    {
        table.meta("pi_area_rad", pi_area);
    }
    for (short, stats) in &error_tables {
        table.meta(
            format!("weighted_error_{short}"),
            format!("{:e}", stats.weighted_error),
        );
    }
    for (n, &p_n) in poisson.iter().enumerate() {
        let mut row: Vec<Cell> = vec![Cell::Int(n as i64), p_n.into()];
        for (_, stats) in &error_tables {
            row.push(stats.per_n_error[n].into());
        }
        table.push_row(row);
    }

    let mut written = vec![write_csv(sc, out_dir, &table)?];
    if plotting {
        let mut series = vec![Series {
            label: "P(N)".into(),
            points: poisson
                .iter()
                .enumerate()
                .map(|(n, &p)| (n as f64, p))
                .collect(),
        }];
        for (short, stats) in &error_tables {
            series.push(Series {
                label: format!("err {short}"),
                points: stats
                    .per_n_error
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(n, &e)| (n as f64, e.max(1e-12).log10()))
                    .collect(),
            });
        }
        written.push(write_svg(
            sc,
            out_dir,
            "loading",
            &plot::line_chart(
                &format!("{}: loading statistics (errors as log10)", sc.name),
                "N",
                "P(N) / log10(error)",
                &series,
            ),
        )?);
    }
    Ok(written)
}

fn write_csv(sc: &Scenario, out_dir: &Path, table: &Table) -> Result<PathBuf, RunError> {
    let path = out_dir.join(format!("{}.csv", sc.name));
    write_file(&path, &table.to_csv())?;
    Ok(path)
}

fn write_svg(
    sc: &Scenario,
    out_dir: &Path,
    suffix: &str,
    contents: &str,
) -> Result<PathBuf, RunError> {
    let path = out_dir.join(format!("{}_{suffix}.svg", sc.name));
    write_file(&path, contents)?;
    Ok(path)
}
