//! The `forward`, `linearize`, `probe` and `invert` experiments.

use std::path::Path;
use std::time::Instant;

use anomalykit::cascade::{Cascade, CascadeMode, SlopeTolerances};
use anomalykit::forward::{solve_stationary, Boundary, ForwardModel, MeasurementSet, State};
use anomalykit::geometry::{Grid, TruncatedCorner};
use anomalykit::inversion::{
    add_noise, reconstruct_inclusion, recover_boundary_coefficient, ForwardSetup, InverseProblem,
    ReconstructOptions, SimulationMode,
};
use anomalykit::probe::{run_probe, CornerProbeResult, ProbeSpec};
use serde::Serialize;

use crate::artifacts::{num, output_root, ArtifactWriter, RunManifest};
use crate::config::{chemical_index, ExperimentConfig, ForwardMode};
use crate::error::CliError;

pub(crate) fn writer(cfg: &ExperimentConfig, command: &str) -> Result<ArtifactWriter, CliError> {
    ArtifactWriter::create(output_root(&cfg.output_dir).join(command), command, &cfg.hash())
}

fn field_rows(grid: &Grid, s: &State) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (f, values) in s.fields().enumerate() {
        let name = s.field_name(f);
        for (k, v) in values.iter().enumerate() {
            let p = grid.point(k);
            rows.push(vec![num(p[0]), num(p[1]), name.clone(), num(*v)]);
        }
    }
    rows
}

#[derive(Serialize)]
struct ForwardSummary {
    mode: ForwardMode,
    steps: Option<usize>,
    dt: Option<f64>,
    min_value: Option<f64>,
    newton_iterations: Option<usize>,
    newton_residual: Option<f64>,
}

/// Solves the configured forward problem; `stationary` overrides the mode.
pub fn run_forward(cfg: &ExperimentConfig, stationary: bool) -> Result<RunManifest, CliError> {
    let f = cfg.forward()?;
    let grid = cfg.grid()?;
    let params = cfg.params()?;
    let reaction = cfg.reaction()?;
    let init = cfg.initial_state(&grid)?;
    let mode = if stationary { ForwardMode::Stationary } else { f.mode };
    let mut w = writer(cfg, "forward")?;
    let start = Instant::now();
    let (measurements, state, summary) = match mode {
        ForwardMode::Parabolic => {
            let mut m = ForwardModel::new(&grid, &params, &reaction, &Boundary::Neumann)?;
            let run = m.solve_time_dependent(&init, f.dt, f.store_every, false)?;
            let summary = ForwardSummary {
                mode,
                steps: Some(run.steps),
                dt: Some(run.dt),
                min_value: Some(run.min_value),
                newton_iterations: None,
                newton_residual: None,
            };
            (run.measurements, run.final_state, summary)
        }
        ForwardMode::Stationary => {
            let bc = Boundary::dirichlet_from(&grid, &init);
            let run = solve_stationary(&grid, &params, &reaction, &bc, &cfg.solver)?;
            let summary = ForwardSummary {
                mode,
                steps: None,
                dt: None,
                min_value: None,
                newton_iterations: Some(run.iterations),
                newton_residual: Some(run.residual),
            };
            (run.measurements, run.state, summary)
        }
    };
    w.timings.insert("solve".into(), start.elapsed().as_secs_f64());
    w.json("measurements.json", "measurement_set", &measurements)?;
    w.json("forward.json", "forward_summary", &summary)?;
    w.csv("state.csv", &["x", "y", "field", "value"], &field_rows(&grid, &state))?;
    w.finish()
}

/// Cascade solves and the finite-difference consistency report.
pub fn run_linearize(cfg: &ExperimentConfig) -> Result<RunManifest, CliError> {
    let l = cfg.linearize()?;
    let grid = cfg.grid()?;
    let params = cfg.params()?;
    let reaction = cfg.reaction()?;
    let family = cfg.data_family(&grid)?;
    family.validate(&grid)?;
    let mode = match l.mode {
        ForwardMode::Parabolic => CascadeMode::Parabolic { dt: l.dt },
        ForwardMode::Stationary => CascadeMode::Stationary,
    };
    let mut w = writer(cfg, "linearize")?;
    let start = Instant::now();
    let mut cascade = Cascade::new(&grid, &params, &reaction, l.boundary, mode)?;
    cascade.newton = cfg.solver;
    let report = cascade.finite_difference_check(&family, SlopeTolerances::default())?;
    w.timings.insert("cascade".into(), start.elapsed().as_secs_f64());
    w.check("first_order_slope", report.pass1);
    w.check("second_order_slope", report.pass2);
    let rows: Vec<Vec<String>> = (0..report.eps.len())
        .map(|k| vec![num(report.eps[k]), num(report.e1[k]), num(report.e2[k])])
        .collect();
    w.json("convergence.json", "convergence_report", &report)?;
    w.csv("convergence.csv", &["eps", "e1", "e2"], &rows)?;
    w.finish()
}

#[derive(Serialize)]
struct CornerReport<'a> {
    corner: &'a TruncatedCorner,
    large_tau: bool,
    result: &'a CornerProbeResult,
}

/// CGO probe asymptotics on every configured corner.
pub fn run_probe_command(cfg: &ExperimentConfig) -> Result<RunManifest, CliError> {
    let p = cfg.probe()?;
    let corners = cfg.corners()?;
    let mut w = writer(cfg, "probe")?;
    let start = Instant::now();
    let mut specs = Vec::new();
    let mut results = Vec::new();
    for (k, c) in corners.into_iter().enumerate() {
        let spec = ProbeSpec::along_axis(c, p.taus.clone())?;
        if !spec.large_tau() {
            w.warnings.push(format!("corner {k}: τ·ρ·h < 8 at the bottom of the ladder"));
        }
        let r = run_probe(&spec, p.alpha)?;
        w.check(format!("corner_{k}"), r.pass());
        specs.push(spec);
        results.push(r);
    }
    w.timings.insert("probe".into(), start.elapsed().as_secs_f64());
    let reports: Vec<CornerReport> = specs
        .iter()
        .zip(&results)
        .map(|(s, r)| CornerReport {
            corner: &s.corner,
            large_tau: s.large_tau(),
            result: r,
        })
        .collect();
    let mut rows = Vec::new();
    for (k, r) in results.iter().enumerate() {
        for (i, t) in r.taus.iter().enumerate() {
            rows.push(vec![
                k.to_string(),
                num(*t),
                num(r.integrals[i].re),
                num(r.integrals[i].im),
                num(r.integrals[i].norm()),
                num(r.weighted[i].norm()),
                num(r.norms[i].h1_ratio),
                num(r.norms[i].flux_ratio),
            ]);
        }
    }
    w.json("probe.json", "corner_probe_results", &reports)?;
    w.csv(
        "probe.csv",
        &["corner", "tau", "re", "im", "abs", "weighted_abs", "h1_ratio", "flux_ratio"],
        &rows,
    )?;
    w.finish()
}

pub fn forward_setup(cfg: &ExperimentConfig) -> Result<ForwardSetup, CliError> {
    let f = cfg.forward()?;
    let grid = cfg.grid()?;
    Ok(ForwardSetup {
        initial: cfg.initial_state(&grid)?,
        params: cfg.params()?,
        reaction: cfg.reaction()?,
        boundary: Boundary::Neumann,
        mode: match f.mode {
            ForwardMode::Parabolic => SimulationMode::Parabolic {
                dt: f.dt,
                store_every: f.store_every,
            },
            ForwardMode::Stationary => SimulationMode::Stationary,
        },
        grid,
    })
}

/// Reads a measurement file written by `forward` (or a bare measurement set).
pub fn read_measurements(path: &Path) -> Result<MeasurementSet, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let data = match value.get("data") {
        Some(d) => d.clone(),
        None => value,
    };
    let m: MeasurementSet =
        serde_json::from_value(data).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    m.validate()?;
    Ok(m)
}

/// Shape reconstruction from `observed` (or from data simulated with the
/// configured inclusion) and optional coefficient recovery on the estimate.
pub fn run_invert(cfg: &ExperimentConfig, observed: Option<&Path>) -> Result<RunManifest, CliError> {
    let inv = cfg.invert()?;
    let setup = forward_setup(cfg)?;
    let mut w = writer(cfg, "invert")?;
    let start = Instant::now();
    let observed = match observed {
        Some(p) => read_measurements(p)?,
        None => {
            let clean = setup.simulate(&cfg.inclusion)?;
            let data = match &inv.noise {
                Some(n) => add_noise(&clean, n.level, n.seed)?,
                None => clean,
            };
            w.json("observed.json", "measurement_set", &data)?;
            data
        }
    };
    let ip = InverseProblem {
        setup,
        observed,
        candidate: inv.candidate,
        noise: inv.noise.clone(),
    };
    let opts = ReconstructOptions {
        restarts: inv.restarts,
        max_solves: inv.max_solves,
        seed: cfg.seed,
        initial: inv.initial.clone(),
        step: inv.step,
        ..ReconstructOptions::default()
    };
    let result = reconstruct_inclusion(&ip, &opts)?;
    w.timings.insert("reconstruct".into(), start.elapsed().as_secs_f64());
    w.json("reconstruction.json", "reconstruction_result", &result)?;
    if let Some(c) = &inv.coefficient {
        let start = Instant::now();
        let component = chemical_index(&c.component, cfg.model.d.len())
            .map_err(|m| CliError::Config(format!("invert.coefficient.component: {m}")))?;
        let mi = c
            .multi_index
            .parse()
            .map_err(|e| CliError::Config(format!("invert.coefficient.multi_index: {e}")))?;
        let mut setup = ip.setup.clone();
        let h = setup.grid.h_max();
        setup.mode = SimulationMode::Parabolic {
            dt: c.dt.unwrap_or(4.0 * h * h),
            store_every: 1,
        };
        let samples = recover_boundary_coefficient(&setup, &result.inclusion, component, &mi, c.samples)?;
        w.timings.insert("coefficient".into(), start.elapsed().as_secs_f64());
        let rows: Vec<Vec<String>> = samples
            .iter()
            .map(|s| {
                vec![
                    num(s.interface_point[0]),
                    num(s.interface_point[1]),
                    num(s.node_point[0]),
                    num(s.node_point[1]),
                    num(s.value),
                    num(s.factor),
                ]
            })
            .collect();
        w.csv("coefficients.csv", &["x", "y", "node_x", "node_y", "value", "factor"], &rows)?;
    }
    w.finish()
}
