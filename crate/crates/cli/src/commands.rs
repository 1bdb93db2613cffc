//! One function per subcommand. Each writes a `#`-prefixed metadata line
//! followed by CSV, or a `{metadata, data}` JSON document.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use magsphere::atlas::{
    appendix_limit_study, bc_region, default_b_samples, default_q_samples, energy_casimir_diagram, equilibria_at,
    stability_rows, sweep, threshold_curve, type1_stability_table, write_stability_csv, AxisSpec,
};
use magsphere::fullspace::{full_integrate, lift_state};
use magsphere::reconstruction::{rigid_rotation, RigidRotation};
use magsphere::reduced::{integrate, IntegrateOptions};
use magsphere::{cot_potential, Error, Potential, ReducedState, SystemParams, TablePotential, Tolerances};
use serde::Serialize;

use crate::config::{CommandKind, Diagram, Format, PotentialSpec, RunConfig};
use crate::error::CliError;

type Sink = Box<dyn Write>;

#[derive(Serialize)]
struct Metadata<'a> {
    command: CommandKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagram: Option<Diagram>,
    params: &'a SystemParams,
    potential: String,
    tolerances: &'a Tolerances,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    metadata: Metadata<'a>,
    data: T,
}

fn metadata(cfg: &RunConfig) -> Metadata<'_> {
    Metadata {
        command: cfg.command,
        diagram: cfg.diagram,
        params: &cfg.params,
        potential: cfg.potential.to_string(),
        tolerances: &cfg.tolerances,
    }
}

fn open(path: Option<&Path>) -> Result<Sink, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Config(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes either the CSV body (after the metadata line) or the JSON document.
fn emit<T: Serialize>(
    cfg: &RunConfig,
    path: Option<&Path>,
    data: &T,
    csv: impl FnOnce(&mut Sink) -> io::Result<()>,
) -> Result<(), CliError> {
    let mut out = open(path)?;
    match cfg.format {
        Format::Csv => {
            let line = serde_json::to_string(&metadata(cfg)).map_err(io::Error::other)?;
            writeln!(out, "# magsphere {line}")?;
            csv(&mut out)?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &Document { metadata: metadata(cfg), data })
                .map_err(io::Error::other)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn load_potential(cfg: &RunConfig) -> Result<Box<dyn Potential>, CliError> {
    Ok(match &cfg.potential {
        PotentialSpec::Cot => Box::new(cot_potential(&cfg.params)),
        PotentialSpec::Table { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read potential table {}: {e}", path.display())))?;
            Box::new(TablePotential::parse(&text)?)
        }
    })
}

fn q_samples_or(cfg: &RunConfig, default: impl FnOnce() -> Vec<f64>) -> Vec<f64> {
    cfg.grid.q.as_ref().map(AxisSpec::samples).unwrap_or_else(default)
}

pub fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command {
        CommandKind::Simulate => simulate(cfg),
        CommandKind::Equilibria => equilibria(cfg),
        CommandKind::Stability => stability(cfg, cfg.q_axis()?, cfg.b_axis()),
        CommandKind::Atlas => atlas(cfg),
        CommandKind::Reconstruct => reconstruct(cfg),
    }
}

#[derive(Serialize)]
struct TrajectoryJson<'a> {
    t: &'a [f64],
    states: &'a [ReducedState],
    #[serde(rename = "H")]
    energy: &'a [f64],
    #[serde(rename = "C")]
    casimir: &'a [f64],
    #[serde(rename = "dH")]
    drift_h: Vec<f64>,
    #[serde(rename = "dC")]
    drift_c: Vec<f64>,
}

fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let q = cfg.q.ok_or_else(|| CliError::Config("simulate needs --q".into()))?;
    let v = load_potential(cfg)?;
    let m = cfg.initial;
    let initial = ReducedState { m1: m.m1, m2: m.m2, m3: m.m3, q, p: m.p };
    let opts = IntegrateOptions {
        project_casimir: cfg.project_casimir,
        sample_every: cfg.sample_every,
        q_guard: cfg.tolerances.q_guard,
    };
    let traj = integrate(&initial, &cfg.params, &v, cfg.t_end, cfg.dt, &opts)?;
    let drift = traj.max_drift();
    eprintln!("max |dH| = {:.3e}, max |dC| = {:.3e} over {} samples", drift.h, drift.c, traj.len());
    let data = TrajectoryJson {
        t: &traj.times,
        states: &traj.states,
        energy: &traj.energy,
        casimir: &traj.casimir,
        drift_h: traj.invariant_drift.iter().map(|d| d.h).collect(),
        drift_c: traj.invariant_drift.iter().map(|d| d.c).collect(),
    };
    emit(cfg, cfg.output_path.as_deref(), &data, |out| traj.write_csv(out))?;

    if let Some(path) = &cfg.full_output_path {
        let full =
            full_integrate(&lift_state(&initial, &cfg.params), &cfg.params, &v, cfg.t_end, cfg.dt, cfg.sample_every)?;
        eprintln!("max |dPhi| = {:.3e}", full.max_phi_drift());
        let mut out = open(Some(path))?;
        let line = serde_json::to_string(&metadata(cfg)).map_err(io::Error::other)?;
        writeln!(out, "# magsphere {line}")?;
        full.write_csv(&mut out)?;
        out.flush()?;
    }
    Ok(())
}

fn equilibria(cfg: &RunConfig) -> Result<(), CliError> {
    let v = load_potential(cfg)?;
    let closed = cfg.use_closed_form()?;
    let mut grid = sweep(&cfg.params, &v, &v.name(), &cfg.q_axis()?, &cfg.b_axis(), closed)?;
    grid.metadata.tolerances = cfg.tolerances;
    let tol = cfg.tolerances.residual;
    for cell in &mut grid.cells {
        let before = cell.entries.len();
        cell.entries.retain(|e| e.residual <= tol);
        let dropped = before - cell.entries.len();
        if dropped > 0 {
            let msg = format!("{dropped} record(s) above --tol {tol:e} dropped");
            cell.note = Some(match cell.note.take() {
                Some(n) => format!("{n}; {msg}"),
                None => msg,
            });
        }
    }
    emit(cfg, cfg.output_path.as_deref(), &grid, |out| grid.write_csv(out))
}

fn stability(cfg: &RunConfig, q_axis: AxisSpec, b_axis: AxisSpec) -> Result<(), CliError> {
    let v = load_potential(cfg)?;
    let closed = cfg.use_closed_form()?;
    let rows = stability_rows(&cfg.params, &q_axis.samples(), &b_axis.samples(), &v, closed, |_| true)?;
    emit(cfg, cfg.output_path.as_deref(), &rows, |out| write_stability_csv(&rows, out))
}

fn atlas(cfg: &RunConfig) -> Result<(), CliError> {
    let path = cfg.output_path.as_deref();
    let diagram = cfg.diagram.ok_or_else(|| CliError::Config("atlas needs --diagram".into()))?;
    match diagram {
        Diagram::Threshold => {
            let curve = threshold_curve(&q_samples_or(cfg, || default_q_samples(400)))?;
            emit(cfg, path, &curve, |out| {
                writeln!(out, "kind,q,B")?;
                for (q, b) in &curve.points {
                    writeln!(out, "point,{q:.12e},{b:.12e}")?;
                }
                writeln!(out, "minimum,{:.12e},{:.12e}", curve.minimum.0, curve.minimum.1)
            })
        }
        Diagram::Type1Stability => {
            let qs = q_samples_or(cfg, || AxisSpec::new("q", 0.1, 1.5, 50).samples());
            let rows = type1_stability_table(&qs, &cot_potential(&SystemParams::identical(1.0)))?;
            emit(cfg, path, &rows, |out| {
                writeln!(out, "q,boundary,bisected")?;
                for r in &rows {
                    writeln!(out, "{:.12e},{:.12e},{:.12e}", r.q, r.boundary, r.bisected)?;
                }
                Ok(())
            })
        }
        Diagram::Ec => {
            let d = energy_casimir_diagram(cfg.params.b, &q_samples_or(cfg, || default_q_samples(400)))?;
            emit(cfg, path, &d, |out| d.write_csv(out))
        }
        Diagram::Bc => {
            let bs = cfg.grid.b.as_ref().map(AxisSpec::samples).unwrap_or_else(default_b_samples);
            let region = bc_region(&bs, cfg.window_samples)?;
            emit(cfg, path, &region, |out| {
                writeln!(out, "# leftmost B={:.12e} C={:.12e}", region.leftmost.0, region.leftmost.1)?;
                writeln!(out, "B,q0,q1,c_min,q_at_min,c_max,q_at_max,c_threshold_lo,c_threshold_hi")?;
                for r in &region.rows {
                    writeln!(
                        out,
                        "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                        r.b, r.q0, r.q1, r.c_min, r.q_at_min, r.c_max, r.q_at_max, r.c_threshold_lo, r.c_threshold_hi
                    )?;
                }
                Ok(())
            })
        }
        Diagram::Appendix => {
            let ap = &cfg.appendix;
            let studies = ap
                .slopes
                .iter()
                .map(|&a| appendix_limit_study(a, ap.h0, ap.levels))
                .collect::<Result<Vec<_>, Error>>()?;
            emit(cfg, path, &studies, |out| {
                writeln!(
                    out,
                    "a,side,m2_plus,m3_plus,m2_minus,m3_minus,product_plus,product_minus,expected_m2_plus,expected_m3_plus,witness_product"
                )?;
                for s in &studies {
                    for (side, l) in [("above", &s.from_above), ("below", &s.from_below)] {
                        writeln!(
                            out,
                            "{},{side},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                            s.a,
                            l.m2_plus,
                            l.m3_plus,
                            l.m2_minus,
                            l.m3_minus,
                            l.product_plus,
                            l.product_minus,
                            s.expected_plus.0,
                            s.expected_plus.1,
                            s.witness_product
                        )?;
                    }
                }
                Ok(())
            })
        }
        Diagram::Stability => {
            let q_axis = cfg.grid.q.clone().unwrap_or_else(|| AxisSpec::new("q", 0.05, PI - 0.05, 60));
            let b_axis = cfg.grid.b.clone().unwrap_or_else(|| AxisSpec::new("B", 0.1, 10.0, 60));
            stability(cfg, q_axis, b_axis)
        }
    }
}

#[derive(Serialize)]
struct RotationRow {
    #[serde(rename = "B")]
    b: f64,
    family: magsphere::equilibria::Family,
    rotation: RigidRotation,
}

fn reconstruct(cfg: &RunConfig) -> Result<(), CliError> {
    let v = load_potential(cfg)?;
    let closed = cfg.use_closed_form()?;
    let mut rows = Vec::new();
    for q in cfg.q_axis()?.samples() {
        for b in cfg.b_axis().samples() {
            let params = cfg.params.with_field(b);
            for r in equilibria_at(q, &params, &v, closed)? {
                if r.residual > cfg.tolerances.residual {
                    eprintln!("skipping {} at q = {q}, B = {b}: residual {:.2e}", r.family, r.residual);
                    continue;
                }
                match rigid_rotation(&r) {
                    Ok(rotation) => rows.push(RotationRow { b, family: r.family, rotation }),
                    Err(Error::DegenerateConfiguration) => {
                        eprintln!("skipping {} at q = {q}, B = {b}: no rotation", r.family)
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    emit(cfg, cfg.output_path.as_deref(), &rows, |out| {
        writeln!(out, "q,B,family,omega_x,omega_y,omega_z,axis_x,axis_y,axis_z,rate,cos_theta1,cos_theta2")?;
        for r in &rows {
            let (w, a, c) = (r.rotation.omega, r.rotation.axis, r.rotation.cos_theta);
            writeln!(
                out,
                "{:.12e},{:.12e},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                r.rotation.q, r.b, r.family, w[0], w[1], w[2], a[0], a[1], a[2], r.rotation.rate, c[0], c[1]
            )?;
        }
        Ok(())
    })
}
