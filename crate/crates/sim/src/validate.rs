//! Static validation harnesses: the bimetal curvature sweep and the helical
//! bilayer.

use std::path::Path;

use bilayer_core::actuation::{Profile, Schedule, StrainTarget};
use bilayer_core::beam2d::{
    solve_equilibrium_2d, timoshenko_curvature, Beam2DState, Layers2D, Solve2DOptions, Support2D,
};
use bilayer_core::external::Environment;
use bilayer_core::integrator::{Integrator, IntegratorConfig, StaticConfig};
use bilayer_core::strip::{BilayerStrip, LayerSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, ScenarioConfig, ScenarioKind};
use crate::fit::{fit_helix, helix_pitch, interface_curvature, middle_span};
use crate::run::settle;
use crate::scenario::Scenario;

/// Parameter grid of the curvature sweep. Ratios follow the bottom layer:
/// `E2 = m E1`, `h2 = n h1`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimoshenkoSweep {
    #[serde(default = "default_m")]
    pub modulus_ratios: Vec<f64>,
    #[serde(default = "default_n")]
    pub thickness_ratios: Vec<f64>,
    #[serde(default = "default_length")]
    pub length_m: f64,
    #[serde(default = "default_thickness")]
    pub thickness_mm: f64,
    #[serde(default = "default_width")]
    pub width_mm: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(rename = "E1_MPa", default = "default_e1")]
    pub e1_mpa: f64,
    /// Allowed relative error against the classical formula.
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    /// Allowed relative disagreement with the planar model.
    #[serde(default = "default_planar_tol")]
    pub planar_tolerance: f64,
}

fn default_m() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0, 4.0]
}
fn default_n() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_length() -> f64 {
    0.1
}
fn default_thickness() -> f64 {
    2.0
}
fn default_width() -> f64 {
    10.0
}
fn default_eta() -> f64 {
    0.01
}
fn default_nodes() -> usize {
    51
}
fn default_e1() -> f64 {
    100.0
}
fn default_tol() -> f64 {
    0.05
}
fn default_planar_tol() -> f64 {
    0.02
}

impl Default for TimoshenkoSweep {
    fn default() -> Self {
        toml::from_str::<SweepFile>("[sweep]").unwrap().sweep
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    sweep: TimoshenkoSweep,
}

impl TimoshenkoSweep {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| ConfigError::Parse { key: "<document>".into(), message: e.message().to_string() })?;
        let f: SweepFile = serde_path_to_error::deserialize(de)
            .map_err(|e| ConfigError::Parse { key: e.path().to_string(), message: e.inner().message().to_string() })?;
        f.sweep.validate()?;
        Ok(f.sweep)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |k: &str, m: &str| Err(ConfigError::Range { key: format!("sweep.{k}"), message: m.into() });
        if self.modulus_ratios.is_empty() || self.modulus_ratios.iter().any(|m| !(*m > 0.0)) {
            return bad("modulus_ratios", "needs positive entries");
        }
        if self.thickness_ratios.is_empty() || self.thickness_ratios.iter().any(|n| !(*n > 0.0)) {
            return bad("thickness_ratios", "needs positive entries");
        }
        if !(self.length_m > 0.0 && self.thickness_mm > 0.0 && self.width_mm > 0.0 && self.e1_mpa > 0.0) {
            return bad("length_m", "lengths and modulus must be positive");
        }
        if self.nodes < 11 {
            return bad("nodes", "needs at least 11 nodes");
        }
        if !(self.eta > -1.0) {
            return bad("eta", "strain must exceed -1");
        }
        if !(self.tolerance > 0.0 && self.planar_tolerance > 0.0) {
            return bad("tolerance", "must be positive");
        }
        Ok(())
    }
}

/// One sweep point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimoshenkoRow {
    /// `E2 / E1`.
    pub modulus_ratio: f64,
    /// `h2 / h1`.
    pub thickness_ratio: f64,
    /// `κ h / η` of the coupled-rod equilibrium (NaN if it failed).
    pub simulated: f64,
    /// Classical bimetal value for this layer pair.
    pub classical: f64,
    pub rel_error: f64,
    /// The closed form evaluated with the ratios in the opposite slots.
    pub swapped_arguments: f64,
    pub swapped_rel_error: f64,
    /// `κ h / η` of the planar two-layer beam.
    pub planar: f64,
    pub planar_rel_error: f64,
    pub failure: Option<String>,
}

impl TimoshenkoRow {
    pub fn passes(&self, sweep: &TimoshenkoSweep) -> bool {
        self.failure.is_none() && self.rel_error <= sweep.tolerance && self.planar_rel_error <= sweep.planar_tolerance
    }
}

fn layers(sweep: &TimoshenkoSweep, m: f64, n: f64) -> (f64, f64, f64, f64) {
    let h = sweep.thickness_mm * 1e-3;
    let h1 = h / (1.0 + n);
    let e1 = sweep.e1_mpa * 1e6;
    (e1, m * e1, h1, h - h1)
}

/// `κ h / η` of the coupled 3D strip, from concentric circle fits of the
/// middle spans of both layers.
pub fn simulated_curvature(sweep: &TimoshenkoSweep, m: f64, n: f64) -> bilayer_core::Result<f64> {
    let (e1, e2, h1, h2) = layers(sweep, m, n);
    let (l, nodes) = (sweep.length_m, sweep.nodes);
    let strip = BilayerStrip {
        top: LayerSpec { nodes, length: l, thickness: h1, youngs: e1 },
        bottom: LayerSpec { nodes, length: l, thickness: h2, youngs: e2 },
        ..BilayerStrip::symmetric(l, nodes, h1, e1, sweep.width_mm * 1e-3, 1000.0)
    };
    let mut asm = strip.build()?;
    let edges = asm.rods[0].geometry.edge_count();
    let mut sched = Schedule {
        strains: vec![StrainTarget {
            rod: 0,
            edges: 0..edges,
            profile: Profile::Ramp { from: 0.0, to: sweep.eta, start: 0.0, end: 1.0 },
        }],
        curvatures: vec![],
    };
    let mut integ = Integrator::new(&asm, IntegratorConfig::default())?;
    let cfg = StaticConfig { actuation_end: 1.0, ..StaticConfig::default() };
    integ.solve_static(&mut asm, &Environment::default(), &mut sched, &cfg)?;
    let layer = |r: usize| -> Vec<[f64; 3]> { asm.rods[r].state.positions().iter().map(|p| (*p).into()).collect() };
    let k = interface_curvature(&layer(0), &layer(1), h1, h2).unwrap_or(0.0);
    Ok(k * (h1 + h2) / sweep.eta)
}

/// `κ h / η` of the planar model, averaged over the middle span.
pub fn planar_curvature(sweep: &TimoshenkoSweep, m: f64, n: f64) -> bilayer_core::Result<f64> {
    let (e1, e2, h1, h2) = layers(sweep, m, n);
    let l2 = Layers2D { e1, e2, h1, h2, width: sweep.width_mm * 1e-3 };
    let state = Beam2DState::straight(sweep.length_m, sweep.nodes, l2)?;
    let sol = solve_equilibrium_2d(
        &state,
        &vec![sweep.eta; sweep.nodes],
        &Support2D::clamped_start(),
        &Solve2DOptions::default(),
    )?;
    let mid = middle_span(&sol.curvatures);
    Ok(mid.iter().sum::<f64>() / mid.len() as f64 * (h1 + h2) / sweep.eta)
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

/// Runs every grid point in parallel; rows come back in grid order
/// (modulus ratio outer, thickness ratio inner).
pub fn validate_timoshenko(sweep: &TimoshenkoSweep) -> Vec<TimoshenkoRow> {
    let grid: Vec<(f64, f64)> =
        sweep.modulus_ratios.iter().flat_map(|m| sweep.thickness_ratios.iter().map(move |n| (*m, *n))).collect();
    grid.par_iter()
        .map(|&(m, n)| {
            // the bottom layer carries both ratios, so the classical
            // closed form takes the thickness ratio first
            let classical = timoshenko_curvature(n, m);
            let swapped = timoshenko_curvature(m, n);
            let (simulated, mut failure) = match simulated_curvature(sweep, m, n) {
                Ok(v) => (v, None),
                Err(e) => (f64::NAN, Some(format!("3D statics: {e}"))),
            };
            let planar = match planar_curvature(sweep, m, n) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(format!("planar statics: {e}"));
                    f64::NAN
                }
            };
            TimoshenkoRow {
                modulus_ratio: m,
                thickness_ratio: n,
                simulated,
                classical,
                rel_error: rel(simulated, classical),
                swapped_arguments: swapped,
                swapped_rel_error: rel(simulated, swapped),
                planar,
                planar_rel_error: rel(simulated, planar),
                failure,
            }
        })
        .collect()
}

/// Outcome of the helical bilayer check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HelixReport {
    /// Pitch of the top layer alone in its natural state.
    pub natural_pitch: f64,
    pub pitch: f64,
    pub radius: f64,
    /// `(bottom modulus factor, pitch)` for the stiffness series.
    pub stiffness_series: Vec<(f64, f64)>,
    /// Pitch strictly between the natural pitch and infinity.
    pub bracketed: bool,
    /// Pitch strictly increasing along the stiffness series.
    pub monotone: bool,
    pub failure: Option<String>,
}

impl HelixReport {
    pub fn passes(&self) -> bool {
        self.failure.is_none() && self.bracketed && self.monotone
    }
}

/// Equilibrium pitch and radius of a helix-kind configuration. With
/// `penalties`, the coupling stiffnesses `(K_T, K_R)` are set explicitly
/// instead of following the layer stiffnesses.
pub fn helix_equilibrium(config: &ScenarioConfig, penalties: Option<(f64, f64)>) -> Result<(f64, f64), String> {
    let mut scn = Scenario::build(config).map_err(|e| e.to_string())?;
    if let Some((k_t, k_r)) = penalties {
        for c in &mut scn.assembly.couplings {
            c.k_t = k_t;
            c.k_r = k_r;
        }
    }
    let traj = settle(&mut scn);
    if let Some(f) = traj.diagnostics.failure {
        return Err(f);
    }
    let last = traj.frames.last().ok_or("no frames")?;
    let pts: Vec<_> = middle_span(&last.positions[0]).iter().map(|p| nalgebra::Vector3::from(*p)).collect();
    let h = fit_helix(&pts).ok_or("helix fit failed")?;
    Ok((h.pitch, h.radius))
}

/// Settles the configured bilayer and the same strip with its bottom layer
/// stiffened by each factor in `factors` (in parallel). The series keeps
/// the baseline penalty stiffnesses, so only the bottom material changes.
pub fn validate_helix(config: &ScenarioConfig, factors: &[f64]) -> HelixReport {
    let a = &config.actuation;
    let natural_pitch = helix_pitch(a.natural_curvature, a.natural_twist);
    let mut report = HelixReport {
        natural_pitch,
        pitch: f64::NAN,
        radius: f64::NAN,
        stiffness_series: Vec::new(),
        bracketed: false,
        monotone: false,
        failure: None,
    };
    if config.kind != ScenarioKind::Helix {
        report.failure = Some("configuration is not a helix scenario".into());
        return report;
    }
    let base = match Scenario::build(config) {
        Ok(s) => (s.assembly.couplings[0].k_t, s.assembly.couplings[0].k_r),
        Err(e) => {
            report.failure = Some(e.to_string());
            return report;
        }
    };
    let mut all = vec![1.0];
    all.extend(factors.iter().copied().filter(|f| *f != 1.0));
    let results: Vec<_> = all
        .par_iter()
        .map(|f| {
            let mut c = config.clone();
            c.material.e2 *= f;
            (*f, helix_equilibrium(&c, Some(base)))
        })
        .collect();
    for (f, r) in results {
        match r {
            Ok((pitch, radius)) => {
                if f == 1.0 {
                    report.pitch = pitch;
                    report.radius = radius;
                }
                report.stiffness_series.push((f, pitch));
            }
            Err(e) => {
                report.failure.get_or_insert(format!("bottom factor {f}: {e}"));
            }
        }
    }
    report.stiffness_series.sort_by(|a, b| a.0.total_cmp(&b.0));
    report.bracketed = report.pitch > natural_pitch && report.pitch.is_finite();
    report.monotone = report.stiffness_series.windows(2).all(|w| w[1].1 > w[0].1);
    report
}
