//! Demo metrics. Everything here is computed from recorded frames and the
//! configuration only, so re-reading exported files reproduces it.

use std::collections::BTreeMap;

use bilayer_core::external::contact_gap;
use nalgebra::Vector3;
use serde::Serialize;

use crate::config::{ScenarioConfig, ScenarioKind};
use crate::fit::{fit_helix, helix_pitch, helix_radius, interface_curvature, middle_span};
use crate::run::{center_of_mass, Trajectory, TrajectoryFrame};
use crate::scenario::environment;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metrics {
    pub scenario: String,
    pub kind: String,
    pub frames: usize,
    pub final_time_s: f64,
    pub min_gap_m: Option<f64>,
    pub values: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
}

fn points(frame: &TrajectoryFrame) -> impl Iterator<Item = Vector3<f64>> + '_ {
    frame.positions.iter().flatten().map(|p| Vector3::from(*p))
}

/// Smallest node gap to surface `k` in one frame.
pub fn frame_gap(frame: &TrajectoryFrame, config: &ScenarioConfig, surface: usize) -> f64 {
    let env = environment(config);
    let prim = &env.surfaces[surface].primitive;
    points(frame).map(|x| contact_gap(&x, prim).0).fold(f64::INFINITY, f64::min)
}

fn com(traj: &Trajectory, f: &TrajectoryFrame) -> Vector3<f64> {
    center_of_mass(&f.positions, &traj.node_masses)
}

/// Frame recorded closest to time `t`.
fn frame_at(traj: &Trajectory, t: f64) -> &TrajectoryFrame {
    traj.frames.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs())).expect("nonempty trajectory")
}

/// Centre-of-mass component `axis` sampled at the start of each complete
/// actuation period, and the per-period increments.
pub fn per_cycle(traj: &Trajectory, config: &ScenarioConfig, axis: usize) -> (Vec<f64>, Vec<f64>) {
    let a = &config.actuation;
    let end = traj.frames.last().map_or(0.0, |f| f.t);
    let mut samples = Vec::new();
    let mut k = 0;
    loop {
        let t = a.start + k as f64 * a.period;
        if t > end + 1e-9 {
            break;
        }
        samples.push(com(traj, frame_at(traj, t))[axis]);
        k += 1;
    }
    let steps = samples.windows(2).map(|w| w[1] - w[0]).collect();
    (samples, steps)
}

/// Longest run of consecutive frames with every node farther than `d̂`
/// from the floor: `(last minus first airborne frame time, frame count)`.
pub fn airborne_interval(traj: &Trajectory, config: &ScenarioConfig) -> (f64, usize) {
    let dhat = config.environment.barrier_distance;
    let (mut best, mut run, mut best_frames) = (0.0f64, 0usize, 0usize);
    let mut start_t = 0.0;
    for f in &traj.frames {
        if frame_gap(f, config, 0) > dhat {
            if run == 0 {
                start_t = f.t;
            }
            run += 1;
            if run > best_frames {
                best_frames = run;
                best = f.t - start_t;
            }
        } else {
            run = 0;
        }
    }
    (best, best_frames)
}

/// Largest polar angle (from `+z`, about the sphere centre) of nodes within
/// `3 d̂` of the sphere surface, in degrees.
pub fn wrap_angle(frame: &TrajectoryFrame, config: &ScenarioConfig, surface: usize) -> f64 {
    let env = environment(config);
    let bilayer_core::external::Primitive::Sphere { center, radius } = env.surfaces[surface].primitive else {
        return 0.0;
    };
    points(frame)
        .filter(|x| (x - center).norm() - radius < 3.0 * env.barrier_distance)
        .map(|x| (x - center).normalize().z.clamp(-1.0, 1.0).acos().to_degrees())
        .fold(0.0, f64::max)
}

pub fn compute(config: &ScenarioConfig, traj: &Trajectory) -> Metrics {
    let env = environment(config);
    let min_gap = if env.surfaces.is_empty() || traj.frames.is_empty() {
        None
    } else {
        Some(
            (0..env.surfaces.len())
                .flat_map(|s| traj.frames.iter().map(move |f| (s, f)))
                .map(|(s, f)| frame_gap(f, config, s))
                .fold(f64::INFINITY, f64::min),
        )
    };
    let mut values = BTreeMap::new();
    let mut series = BTreeMap::new();
    if let (Some(first), Some(last)) = (traj.frames.first(), traj.frames.last()) {
        match config.kind {
            ScenarioKind::Gripping => {
                let k = env.surfaces.len() - 1;
                values.insert(
                    "min_sphere_gap_m".into(),
                    traj.frames.iter().map(|f| frame_gap(f, config, k)).fold(f64::INFINITY, f64::min),
                );
                values.insert("wrap_angle_deg".into(), wrap_angle(last, config, k));
            }
            ScenarioKind::CrawlInchworm | ScenarioKind::CrawlDualleg => {
                let (samples, steps) = per_cycle(traj, config, 0);
                values.insert("net_displacement_m".into(), com(traj, last).x - com(traj, first).x);
                values.insert("cycles".into(), steps.len() as f64);
                if !steps.is_empty() {
                    values
                        .insert("mean_displacement_per_cycle_m".into(), steps.iter().sum::<f64>() / steps.len() as f64);
                }
                series.insert("com_x_at_cycle_start_m".into(), samples);
                series.insert("displacement_per_cycle_m".into(), steps);
            }
            ScenarioKind::Jumping => {
                let clearance = traj.frames.iter().map(|f| frame_gap(f, config, 0)).fold(f64::NEG_INFINITY, f64::max);
                let (interval, frames) = airborne_interval(traj, config);
                values.insert("max_floor_clearance_m".into(), clearance);
                values.insert("ballistic_interval_s".into(), interval);
                values.insert("ballistic_frames".into(), frames as f64);
                values.insert(
                    "max_com_rise_m".into(),
                    traj.frames.iter().map(|f| com(traj, f).z).fold(f64::NEG_INFINITY, f64::max) - com(traj, first).z,
                );
            }
            ScenarioKind::Swimming => {
                let (samples, steps) = per_cycle(traj, config, 2);
                values.insert("net_displacement_m".into(), com(traj, last).z - com(traj, first).z);
                values.insert("cycles".into(), steps.len() as f64);
                if !steps.is_empty() {
                    values
                        .insert("mean_displacement_per_cycle_m".into(), steps.iter().sum::<f64>() / steps.len() as f64);
                }
                series.insert("com_z_at_cycle_start_m".into(), samples);
                series.insert("displacement_per_cycle_m".into(), steps);
            }
            ScenarioKind::Timoshenko => {
                let g = &config.geometry;
                let eta = config.actuation.eta_max;
                if let Some(k) = interface_curvature(&last.positions[0], &last.positions[1], g.h1, g.h2) {
                    values.insert("curvature_1_m".into(), k);
                    if eta != 0.0 {
                        values.insert("normalized_curvature".into(), k * (g.h1 + g.h2) / eta);
                    }
                } else {
                    values.insert("curvature_1_m".into(), 0.0);
                }
            }
            ScenarioKind::Helix => {
                let a = &config.actuation;
                values.insert("natural_pitch_m".into(), helix_pitch(a.natural_curvature, a.natural_twist));
                values.insert("natural_radius_m".into(), helix_radius(a.natural_curvature, a.natural_twist));
                let pts: Vec<Vector3<f64>> =
                    middle_span(&last.positions[0]).iter().map(|p| Vector3::from(*p)).collect();
                if let Some(h) = fit_helix(&pts) {
                    values.insert("pitch_m".into(), h.pitch);
                    values.insert("radius_m".into(), h.radius);
                }
            }
        }
    }
    Metrics {
        scenario: config.name.clone(),
        kind: config.kind.name().into(),
        frames: traj.frames.len(),
        final_time_s: traj.frames.last().map_or(0.0, |f| f.t),
        min_gap_m: min_gap,
        values,
        series,
    }
}
