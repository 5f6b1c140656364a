//! CSV and JSON output. Floats are written in shortest round-trip form, so
//! identical runs give identical bytes and re-reading is exact.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::metrics::Metrics;
use crate::run::{RunDiagnostics, Trajectory, TrajectoryFrame};
use crate::validate::TimoshenkoRow;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("trajectory has no frames")]
    EmptyTrajectory,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ExportError + '_ {
    move |source| ExportError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ExportError + '_ {
    move |source| ExportError::Csv { path: path.to_path_buf(), source }
}

#[derive(Serialize)]
struct PositionRow {
    t: f64,
    layer: usize,
    node: usize,
    x: f64,
    y: f64,
    z: f64,
}

#[derive(Serialize, serde::Deserialize)]
struct EnergyRow {
    t: f64,
    stretch: f64,
    bend: f64,
    twist: f64,
    coupling: f64,
    kinetic: f64,
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, ExportError> {
    let f = File::create(path).map_err(io(path))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

/// `t, layer, node, x, y, z`, one row per node per frame.
pub fn write_trajectory(traj: &Trajectory, path: &Path) -> Result<(), ExportError> {
    if traj.frames.is_empty() {
        return Err(ExportError::EmptyTrajectory);
    }
    let mut w = writer(path)?;
    for f in &traj.frames {
        for (layer, nodes) in f.positions.iter().enumerate() {
            for (node, p) in nodes.iter().enumerate() {
                w.serialize(PositionRow { t: f.t, layer, node, x: p[0], y: p[1], z: p[2] }).map_err(csv_err(path))?;
            }
        }
    }
    w.flush().map_err(io(path))
}

/// `t, stretch, bend, twist, coupling, kinetic`, one row per frame.
pub fn write_energies(traj: &Trajectory, path: &Path) -> Result<(), ExportError> {
    if traj.frames.is_empty() {
        return Err(ExportError::EmptyTrajectory);
    }
    let mut w = writer(path)?;
    for f in &traj.frames {
        let e = &f.energy;
        w.serialize(EnergyRow {
            t: f.t,
            stretch: e.stretch,
            bend: e.bend,
            twist: e.twist,
            coupling: e.coupling,
            kinetic: e.kinetic,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io(path))
}

#[derive(Serialize)]
struct Summary<'a> {
    metrics: &'a Metrics,
    diagnostics: &'a RunDiagnostics,
    completed: bool,
}

pub fn write_metrics(metrics: &Metrics, traj: &Trajectory, path: &Path) -> Result<(), ExportError> {
    let s = Summary { metrics, diagnostics: &traj.diagnostics, completed: traj.completed() };
    let mut text = serde_json::to_string_pretty(&s)
        .map_err(|e| ExportError::Format { path: path.to_path_buf(), message: e.to_string() })?;
    text.push('\n');
    std::fs::write(path, text).map_err(io(path))
}

pub fn write_timoshenko(rows: &[TimoshenkoRow], path: &Path) -> Result<(), ExportError> {
    let mut w = writer(path)?;
    for r in rows {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io(path))
}

/// Writes `trajectory.csv`, `energies.csv` and `metrics.json` into `dir`.
pub fn write_run(dir: &Path, traj: &Trajectory, metrics: &Metrics) -> Result<(), ExportError> {
    if traj.frames.is_empty() {
        return Err(ExportError::EmptyTrajectory);
    }
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    write_trajectory(traj, &dir.join("trajectory.csv"))?;
    write_energies(traj, &dir.join("energies.csv"))?;
    write_metrics(metrics, traj, &dir.join("metrics.json"))
}

#[derive(serde::Deserialize)]
struct PositionIn {
    t: f64,
    layer: usize,
    node: usize,
    x: f64,
    y: f64,
    z: f64,
}

/// Reads positions (and energies, when present alongside) back into frames.
/// Node masses and layer names are not stored in the files and are taken
/// from the caller.
pub fn read_trajectory(
    dir: &Path,
    node_masses: Vec<Vec<f64>>,
    layer_names: Vec<String>,
) -> Result<Trajectory, ExportError> {
    let path = dir.join("trajectory.csv");
    let mut r = csv::Reader::from_path(&path).map_err(csv_err(&path))?;
    let mut frames: Vec<TrajectoryFrame> = Vec::new();
    for row in r.deserialize::<PositionIn>() {
        let row = row.map_err(csv_err(&path))?;
        if frames.last().map_or(true, |f| f.t != row.t) {
            frames.push(TrajectoryFrame {
                t: row.t,
                positions: vec![Vec::new(); node_masses.len()],
                energy: Default::default(),
                min_gap: f64::NAN,
                newton_iterations: 0,
                center_of_mass: [f64::NAN; 3],
            });
        }
        let f = frames.last_mut().unwrap();
        let layer = f.positions.get_mut(row.layer).ok_or_else(|| ExportError::Format {
            path: path.clone(),
            message: format!("layer {} out of range", row.layer),
        })?;
        if layer.len() != row.node {
            return Err(ExportError::Format { path: path.clone(), message: format!("node {} out of order", row.node) });
        }
        layer.push([row.x, row.y, row.z]);
    }
    if frames.is_empty() {
        return Err(ExportError::EmptyTrajectory);
    }
    let epath = dir.join("energies.csv");
    if epath.exists() {
        let mut r = csv::Reader::from_path(&epath).map_err(csv_err(&epath))?;
        for (f, row) in frames.iter_mut().zip(r.deserialize::<EnergyRow>()) {
            let e = row.map_err(csv_err(&epath))?;
            f.energy = crate::run::EnergyRecord {
                stretch: e.stretch,
                bend: e.bend,
                twist: e.twist,
                coupling: e.coupling,
                kinetic: e.kinetic,
            };
        }
    }
    for f in &mut frames {
        f.center_of_mass = crate::run::center_of_mass(&f.positions, &node_masses).into();
    }
    Ok(Trajectory { layer_names, node_masses, frames, diagnostics: RunDiagnostics::default() })
}

/// Plain-text echo of a metrics document for terminals.
pub fn print_metrics(out: &mut impl Write, metrics: &Metrics) -> std::io::Result<()> {
    writeln!(
        out,
        "{} ({}): {} frames to t = {} s",
        metrics.scenario, metrics.kind, metrics.frames, metrics.final_time_s
    )?;
    if let Some(g) = metrics.min_gap_m {
        writeln!(out, "  min_gap_m = {g:.6e}")?;
    }
    for (k, v) in &metrics.values {
        writeln!(out, "  {k} = {v:.6e}")?;
    }
    Ok(())
}
