//! Time integration of a scenario into a recorded trajectory.

use bilayer_core::actuation::Actuator;
use bilayer_core::assembly::Assembly;
use bilayer_core::external::{barrier_normal_force, contact_samples, min_gap};
use bilayer_core::integrator::{Integrator, StaticConfig};
use nalgebra::Vector3;

use crate::scenario::Scenario;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyRecord {
    pub stretch: f64,
    pub bend: f64,
    pub twist: f64,
    pub coupling: f64,
    pub kinetic: f64,
}

/// One recorded instant.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryFrame {
    pub t: f64,
    /// Node positions per layer (rod).
    pub positions: Vec<Vec<[f64; 3]>>,
    pub energy: EnergyRecord,
    pub min_gap: f64,
    pub newton_iterations: usize,
    pub center_of_mass: [f64; 3],
}

/// Run-wide checks accumulated over every step, recorded or not.
#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
pub struct RunDiagnostics {
    pub steps: usize,
    pub newton_iterations: usize,
    pub max_substeps: usize,
    pub min_gap: f64,
    /// Largest friction magnitude over `mu * F_n` at any contact node.
    pub max_friction_ratio: f64,
    /// Largest barrier force seen at a gap of at least `d̂` (should be 0).
    pub max_force_outside_range: f64,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub layer_names: Vec<String>,
    /// Lumped node mass per layer, for centre-of-mass metrics.
    pub node_masses: Vec<Vec<f64>>,
    pub frames: Vec<TrajectoryFrame>,
    pub diagnostics: RunDiagnostics,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.diagnostics.failure.is_none()
    }
}

fn node_masses(asm: &Assembly) -> Vec<Vec<f64>> {
    let m = asm.lumped_mass();
    (0..asm.rods.len()).map(|r| (0..asm.rods[r].node_count()).map(|i| m[asm.node_index(r, i, 0)]).collect()).collect()
}

pub fn center_of_mass(positions: &[Vec<[f64; 3]>], masses: &[Vec<f64>]) -> Vector3<f64> {
    let mut s = Vector3::zeros();
    let mut total = 0.0;
    for (p, m) in positions.iter().zip(masses) {
        for (x, mi) in p.iter().zip(m) {
            s += Vector3::from(*x) * *mi;
            total += mi;
        }
    }
    s / total
}

fn frame(scn: &Scenario, masses: &[Vec<f64>], mass_matrix: &[f64], iterations: usize) -> TrajectoryFrame {
    let asm = &scn.assembly;
    let positions: Vec<Vec<[f64; 3]>> =
        asm.rods.iter().map(|r| (0..r.node_count()).map(|i| r.state.position(i).into()).collect()).collect();
    let e = asm.potential_energy().unwrap_or_default();
    let com = center_of_mass(&positions, masses);
    TrajectoryFrame {
        t: asm.time,
        energy: EnergyRecord {
            stretch: e.stretch,
            bend: e.bend,
            twist: e.twist,
            coupling: e.coupling,
            kinetic: asm.kinetic_energy(mass_matrix),
        },
        min_gap: min_gap(asm, &scn.environment),
        newton_iterations: iterations,
        center_of_mass: com.into(),
        positions,
    }
}

fn check_contacts(scn: &Scenario, d: &mut RunDiagnostics) {
    let env = &scn.environment;
    d.min_gap = d.min_gap.min(min_gap(&scn.assembly, env));
    for s in contact_samples(&scn.assembly, env) {
        if s.normal_force > 0.0 && s.mu > 0.0 {
            d.max_friction_ratio = d.max_friction_ratio.max(s.friction_force / (s.mu * s.normal_force));
        }
    }
    // the barrier must be inert at and beyond d̂
    for rod in &scn.assembly.rods {
        for i in 0..rod.node_count() {
            for surf in &env.surfaces {
                let (gap, n) = bilayer_core::external::contact_gap(&rod.state.position(i), &surf.primitive);
                if gap >= env.barrier_distance {
                    let f = barrier_normal_force(gap, &n, env).map(|f| f.norm()).unwrap_or(f64::INFINITY);
                    d.max_force_outside_range = d.max_force_outside_range.max(f);
                }
            }
        }
    }
}

/// Integrates `scn` for its configured duration, recording a frame every
/// `stride` steps (and the last one). Integration failures end the run;
/// the frames up to the last good step are kept.
pub fn simulate(scn: &mut Scenario, stride: usize) -> Trajectory {
    let stride = stride.max(1);
    let masses = node_masses(&scn.assembly);
    let mut diagnostics = RunDiagnostics { min_gap: f64::INFINITY, ..Default::default() };
    let mut frames = Vec::new();
    let mut integ = match Integrator::new(&scn.assembly, scn.integrator_config()) {
        Ok(i) => i,
        Err(e) => {
            diagnostics.failure = Some(e.to_string());
            return Trajectory { layer_names: scn.layer_names.clone(), node_masses: masses, frames, diagnostics };
        }
    };
    let mass = integ.mass().to_vec();
    check_contacts(scn, &mut diagnostics);
    frames.push(frame(scn, &masses, &mass, 0));
    let steps = scn.config.steps();
    let mut schedule = scn.schedule.clone();
    for k in 1..=steps {
        match integ.step(&mut scn.assembly, &scn.environment, &mut schedule) {
            Ok(report) => {
                diagnostics.steps += 1;
                diagnostics.newton_iterations += report.newton_iterations;
                diagnostics.max_substeps = diagnostics.max_substeps.max(report.substeps);
                check_contacts(scn, &mut diagnostics);
                if k % stride == 0 || k == steps {
                    frames.push(frame(scn, &masses, &mass, report.newton_iterations));
                }
            }
            Err(e) => {
                diagnostics.failure = Some(format!("step {k}: {e}"));
                break;
            }
        }
    }
    Trajectory { layer_names: scn.layer_names.clone(), node_masses: masses, frames, diagnostics }
}

/// Quasi-static settling of `scn` under its schedule, which is taken to be
/// complete by the end of its ramp. Records the initial and final frames.
pub fn settle(scn: &mut Scenario) -> Trajectory {
    let masses = node_masses(&scn.assembly);
    let mut diagnostics = RunDiagnostics { min_gap: f64::INFINITY, ..Default::default() };
    let mut frames = Vec::new();
    let a = &scn.config.actuation;
    let cfg = StaticConfig {
        dt: scn.config.integrator.dt,
        actuation_end: a.start + a.ramp,
        damping: scn.config.integrator.static_damping,
        ..StaticConfig::default()
    };
    let mut integ = match Integrator::new(&scn.assembly, scn.integrator_config()) {
        Ok(i) => i,
        Err(e) => {
            diagnostics.failure = Some(e.to_string());
            return Trajectory { layer_names: scn.layer_names.clone(), node_masses: masses, frames, diagnostics };
        }
    };
    let mass = integ.mass().to_vec();
    frames.push(frame(scn, &masses, &mass, 0));
    let mut schedule = scn.schedule.clone();
    match integ.solve_static(&mut scn.assembly, &scn.environment, &mut schedule, &cfg) {
        Ok(r) => {
            diagnostics.steps = r.steps;
            diagnostics.newton_iterations = r.newton_iterations;
            schedule.apply(scn.assembly.time, &mut scn.assembly);
            let mut last = frame(scn, &masses, &mass, r.newton_iterations);
            if last.t <= frames[0].t {
                last.t = frames[0].t + cfg.dt;
            }
            frames.push(last);
        }
        Err(e) => diagnostics.failure = Some(e.to_string()),
    }
    check_contacts(scn, &mut diagnostics);
    Trajectory { layer_names: scn.layer_names.clone(), node_masses: masses, frames, diagnostics }
}
