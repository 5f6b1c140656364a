//! Scenario files.
//!
//! A scenario is a TOML document whose dotted keys carry their unit in the
//! name (`material.E1_MPa = 100`, `integrator.dt_ms = 1.0`). Four keys are
//! required: `scenario.kind`, `geometry.length_m`, `actuation.profile` and
//! `integrator.duration_s`. Every other key defaults to the parameter column
//! of the chosen kind; unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{key}: {message}")]
    Parse { key: String, message: String },
    #[error("missing required keys: {}", .0.join(", "))]
    Missing(Vec<String>),
    #[error("{key}: {message}")]
    Range { key: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Gripping,
    CrawlInchworm,
    CrawlDualleg,
    Jumping,
    Swimming,
    Timoshenko,
    Helix,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Gripping => "gripping",
            ScenarioKind::CrawlInchworm => "crawl-inchworm",
            ScenarioKind::CrawlDualleg => "crawl-dualleg",
            ScenarioKind::Jumping => "jumping",
            ScenarioKind::Swimming => "swimming",
            ScenarioKind::Timoshenko => "timoshenko",
            ScenarioKind::Helix => "helix",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    None,
    Ramp,
    Cycle,
    RampRelease,
    Sinusoid,
    Piecewise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layer {
    Top,
    Bottom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clamp {
    None,
    Start,
}

// ---------------------------------------------------------------------------
// Raw file layout

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    scenario: Option<RawScenario>,
    geometry: Option<RawGeometry>,
    material: Option<RawMaterial>,
    coupling: Option<RawCoupling>,
    environment: Option<RawEnvironment>,
    actuation: Option<RawActuation>,
    integrator: Option<RawIntegrator>,
    boundary: Option<RawBoundary>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kind: Option<ScenarioKind>,
    name: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    length_m: Option<f64>,
    bottom_length_m: Option<f64>,
    bottom_offset_m: Option<f64>,
    width_mm: Option<f64>,
    h1_mm: Option<f64>,
    h2_mm: Option<f64>,
    top_nodes: Option<usize>,
    bottom_nodes: Option<usize>,
    leg_length_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    #[serde(rename = "E1_MPa")]
    e1_mpa: Option<f64>,
    #[serde(rename = "E2_MPa")]
    e2_mpa: Option<f64>,
    density_kg_m3: Option<f64>,
    poisson: Option<f64>,
    leg_stiffness_factor: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    #[serde(rename = "KT_over_EA")]
    kt_over_ea: Option<f64>,
    #[serde(rename = "KR_over_EI")]
    kr_over_ei: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvironment {
    gravity_m_s2: Option<f64>,
    floor: Option<bool>,
    sphere_radius_mm: Option<f64>,
    sphere_gap_mm: Option<f64>,
    #[serde(rename = "Kc_MPa")]
    kc_mpa: Option<f64>,
    dhat_m: Option<f64>,
    eps_v_m_s: Option<f64>,
    mu_forward: Option<f64>,
    mu_backward: Option<f64>,
    fluid_density_kg_m3: Option<f64>,
    #[serde(rename = "Cd_parallel")]
    cd_parallel: Option<f64>,
    #[serde(rename = "Cd_normal")]
    cd_normal: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawActuation {
    profile: Option<ProfileKind>,
    layer: Option<Layer>,
    eta_max: Option<f64>,
    eta_min: Option<f64>,
    start_s: Option<f64>,
    ramp_s: Option<f64>,
    hold_s: Option<f64>,
    release_s: Option<f64>,
    period_s: Option<f64>,
    rise_fraction: Option<f64>,
    hold_fraction: Option<f64>,
    fall_fraction: Option<f64>,
    knots_s: Option<Vec<f64>>,
    knots_eta: Option<Vec<f64>>,
    natural_curvature_1_m: Option<f64>,
    natural_twist_1_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    dt_ms: Option<f64>,
    duration_s: Option<f64>,
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
    max_halvings: Option<usize>,
    static_damping_1_s: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    clamp: Option<Clamp>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    frame_interval_s: Option<f64>,
}

// ---------------------------------------------------------------------------
// Resolved configuration (SI units)

#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub length: f64,
    pub bottom_length: f64,
    /// Arc length along the top layer where the bottom layer starts.
    pub bottom_offset: f64,
    pub width: f64,
    pub h1: f64,
    pub h2: f64,
    pub top_nodes: usize,
    pub bottom_nodes: usize,
    /// Dual-leg crawler only: height of each leg.
    pub leg_length: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Material {
    pub e1: f64,
    pub e2: f64,
    pub density: f64,
    pub poisson: f64,
    pub leg_stiffness_factor: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    pub kt_over_ea: f64,
    pub kr_over_ei: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentConfig {
    pub gravity: f64,
    pub floor: bool,
    /// Zero for no sphere.
    pub sphere_radius: f64,
    /// Clearance between the sphere top and the strip interface.
    pub sphere_gap: f64,
    pub contact_stiffness: f64,
    pub barrier_distance: f64,
    pub velocity_tolerance: f64,
    pub mu_forward: f64,
    pub mu_backward: f64,
    pub fluid_density: f64,
    pub drag_parallel: f64,
    pub drag_normal: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Actuation {
    pub profile: ProfileKind,
    pub layer: Layer,
    pub eta_max: f64,
    pub eta_min: f64,
    pub start: f64,
    pub ramp: f64,
    pub hold: f64,
    pub release: f64,
    pub period: f64,
    pub rise_fraction: f64,
    pub hold_fraction: f64,
    pub fall_fraction: f64,
    pub knots: Vec<(f64, f64)>,
    pub natural_curvature: f64,
    pub natural_twist: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorSettings {
    pub dt: f64,
    pub duration: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub static_damping: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub name: String,
    pub geometry: Geometry,
    pub material: Material,
    pub coupling: Coupling,
    pub environment: EnvironmentConfig,
    pub actuation: Actuation,
    pub integrator: IntegratorSettings,
    pub clamp: Clamp,
    pub frame_interval: f64,
}

/// Values of one parameter column.
struct Column {
    top_nodes: usize,
    bottom_nodes: usize,
    gravity: f64,
    floor: bool,
    sphere_radius_mm: f64,
    mu: (f64, f64),
    drag: (f64, f64, f64),
}

fn column(kind: ScenarioKind) -> Column {
    let base = Column {
        top_nodes: 51,
        bottom_nodes: 51,
        gravity: -10.0,
        floor: true,
        sphere_radius_mm: 0.0,
        mu: (0.0, 0.0),
        drag: (0.0, 0.0, 0.0),
    };
    match kind {
        ScenarioKind::Gripping => {
            Column { top_nodes: 201, bottom_nodes: 192, floor: false, sphere_radius_mm: 20.0, ..base }
        }
        ScenarioKind::CrawlInchworm => Column { top_nodes: 80, bottom_nodes: 50, mu: (0.3, 0.6), ..base },
        ScenarioKind::CrawlDualleg => Column { top_nodes: 100, bottom_nodes: 55, mu: (0.3, 0.6), ..base },
        ScenarioKind::Jumping => Column { top_nodes: 100, bottom_nodes: 100, mu: (0.5, 0.5), ..base },
        ScenarioKind::Swimming => {
            Column { top_nodes: 321, bottom_nodes: 288, gravity: 0.0, floor: false, drag: (1000.0, 0.01, 1.0), ..base }
        }
        ScenarioKind::Timoshenko | ScenarioKind::Helix => Column { gravity: 0.0, floor: false, ..base },
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| ConfigError::Parse { key: "<document>".into(), message: e.message().to_string() })?;
        let raw: RawFile = serde_path_to_error::deserialize(de)
            .map_err(|e| ConfigError::Parse { key: e.path().to_string(), message: e.inner().message().to_string() })?;
        resolve(raw)
    }

    pub fn steps(&self) -> usize {
        (self.integrator.duration / self.integrator.dt).round() as usize
    }
}

fn resolve(raw: RawFile) -> Result<ScenarioConfig, ConfigError> {
    let s = raw.scenario.unwrap_or_default();
    let g = raw.geometry.unwrap_or_default();
    let m = raw.material.unwrap_or_default();
    let c = raw.coupling.unwrap_or_default();
    let e = raw.environment.unwrap_or_default();
    let a = raw.actuation.unwrap_or_default();
    let i = raw.integrator.unwrap_or_default();
    let b = raw.boundary.unwrap_or_default();
    let o = raw.output.unwrap_or_default();

    let mut missing = Vec::new();
    if s.kind.is_none() {
        missing.push("scenario.kind".to_string());
    }
    if g.length_m.is_none() {
        missing.push("geometry.length_m".to_string());
    }
    if a.profile.is_none() {
        missing.push("actuation.profile".to_string());
    }
    if i.duration_s.is_none() {
        missing.push("integrator.duration_s".to_string());
    }
    if !missing.is_empty() {
        return Err(ConfigError::Missing(missing));
    }
    let kind = s.kind.unwrap();
    let col = column(kind);

    let length = g.length_m.unwrap();
    let top_nodes = g.top_nodes.unwrap_or(col.top_nodes);
    let bottom_nodes = g.bottom_nodes.unwrap_or(col.bottom_nodes);
    // Without an explicit length the bottom layer keeps the top edge length.
    let bottom_length =
        g.bottom_length_m.unwrap_or(length * (bottom_nodes as f64 - 1.0) / (top_nodes as f64 - 1.0).max(1.0));
    let leg_length = g.leg_length_m.unwrap_or(if kind == ScenarioKind::CrawlDualleg { 0.1 * length } else { 0.0 });
    let body = if kind == ScenarioKind::CrawlDualleg { length - 2.0 * leg_length } else { length };
    let centred = leg_length + 0.5 * (body - bottom_length);
    let bottom_offset = match (g.bottom_offset_m, g.bottom_length_m) {
        (Some(x), _) => x,
        // Equal edge lengths: round down onto the top edge grid so paired
        // edges line up exactly instead of sitting half an edge apart.
        (None, None) if top_nodes > 1 => {
            let dl = length / (top_nodes - 1) as f64;
            (centred / dl + 1e-9).floor() * dl
        }
        (None, _) => centred,
    };

    let (mu_forward, mu_backward) = (e.mu_forward.unwrap_or(col.mu.0), e.mu_backward.unwrap_or(col.mu.1));
    let knots = match (a.knots_s, a.knots_eta) {
        (Some(t), Some(v)) => {
            if t.len() != v.len() {
                return Err(range("actuation.knots_eta", "must have as many entries as actuation.knots_s"));
            }
            t.into_iter().zip(v).collect()
        }
        (None, None) => Vec::new(),
        _ => return Err(range("actuation.knots_s", "knots_s and knots_eta must be given together")),
    };

    let cfg = ScenarioConfig {
        kind,
        name: s.name.unwrap_or_else(|| kind.name().to_string()),
        geometry: Geometry {
            length,
            bottom_length,
            bottom_offset,
            width: g.width_mm.unwrap_or(10.0) * 1e-3,
            h1: g.h1_mm.unwrap_or(1.0) * 1e-3,
            h2: g.h2_mm.unwrap_or(1.0) * 1e-3,
            top_nodes,
            bottom_nodes,
            leg_length,
        },
        material: Material {
            e1: m.e1_mpa.unwrap_or(100.0) * 1e6,
            e2: m.e2_mpa.unwrap_or(100.0) * 1e6,
            density: m.density_kg_m3.unwrap_or(1000.0),
            poisson: m.poisson.unwrap_or(0.5),
            leg_stiffness_factor: m.leg_stiffness_factor.unwrap_or(100.0),
        },
        coupling: Coupling { kt_over_ea: c.kt_over_ea.unwrap_or(100.0), kr_over_ei: c.kr_over_ei.unwrap_or(1000.0) },
        environment: EnvironmentConfig {
            gravity: e.gravity_m_s2.unwrap_or(col.gravity),
            floor: e.floor.unwrap_or(col.floor),
            sphere_radius: e.sphere_radius_mm.unwrap_or(col.sphere_radius_mm) * 1e-3,
            sphere_gap: e.sphere_gap_mm.unwrap_or(1.5) * 1e-3,
            contact_stiffness: e.kc_mpa.unwrap_or(10.0) * 1e6,
            barrier_distance: e.dhat_m.unwrap_or(1e-3),
            velocity_tolerance: e.eps_v_m_s.unwrap_or(1e-4),
            mu_forward,
            mu_backward,
            fluid_density: e.fluid_density_kg_m3.unwrap_or(col.drag.0),
            drag_parallel: e.cd_parallel.unwrap_or(col.drag.1),
            drag_normal: e.cd_normal.unwrap_or(col.drag.2),
        },
        actuation: Actuation {
            profile: a.profile.unwrap(),
            layer: a.layer.unwrap_or(Layer::Top),
            eta_max: a.eta_max.unwrap_or(0.0),
            eta_min: a.eta_min.unwrap_or(0.0),
            start: a.start_s.unwrap_or(0.0),
            ramp: a.ramp_s.unwrap_or(1.0),
            hold: a.hold_s.unwrap_or(0.0),
            release: a.release_s.unwrap_or(0.01),
            period: a.period_s.unwrap_or(1.0),
            rise_fraction: a.rise_fraction.unwrap_or(0.25),
            hold_fraction: a.hold_fraction.unwrap_or(0.25),
            fall_fraction: a.fall_fraction.unwrap_or(0.25),
            knots,
            natural_curvature: a.natural_curvature_1_m.unwrap_or(0.0),
            natural_twist: a.natural_twist_1_m.unwrap_or(0.0),
        },
        integrator: IntegratorSettings {
            dt: i.dt_ms.unwrap_or(1.0) * 1e-3,
            duration: i.duration_s.unwrap(),
            tolerance: i.tolerance.unwrap_or(1e-6),
            max_iterations: i.max_iterations.unwrap_or(30),
            max_halvings: i.max_halvings.unwrap_or(8),
            static_damping: i.static_damping_1_s.unwrap_or(10.0),
        },
        clamp: b.clamp.unwrap_or(Clamp::None),
        frame_interval: o.frame_interval_s.unwrap_or(0.01),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn range(key: &str, message: &str) -> ConfigError {
    ConfigError::Range { key: key.into(), message: message.into() }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(range(key, &format!("must be positive (got {v})")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(range(key, &format!("must be non-negative (got {v})")))
    }
}

impl ScenarioConfig {
    /// Unit and range checks, reported with the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.geometry;
        positive("geometry.length_m", g.length)?;
        positive("geometry.bottom_length_m", g.bottom_length)?;
        positive("geometry.width_mm", g.width)?;
        positive("geometry.h1_mm", g.h1)?;
        positive("geometry.h2_mm", g.h2)?;
        non_negative("geometry.bottom_offset_m", g.bottom_offset)?;
        non_negative("geometry.leg_length_m", g.leg_length)?;
        if g.top_nodes < 3 {
            return Err(range("geometry.top_nodes", "must be at least 3"));
        }
        if g.bottom_nodes < 3 {
            return Err(range("geometry.bottom_nodes", "must be at least 3"));
        }
        if g.bottom_offset + g.bottom_length > g.length * (1.0 + 1e-9) {
            return Err(range("geometry.bottom_offset_m", "bottom layer extends past the top layer"));
        }
        if self.kind == ScenarioKind::CrawlDualleg && !(2.0 * g.leg_length < g.length) {
            return Err(range("geometry.leg_length_m", "legs are longer than the strip"));
        }
        let m = &self.material;
        positive("material.E1_MPa", m.e1)?;
        positive("material.E2_MPa", m.e2)?;
        positive("material.density_kg_m3", m.density)?;
        positive("material.leg_stiffness_factor", m.leg_stiffness_factor)?;
        if !(m.poisson > -1.0 && m.poisson <= 0.5) {
            return Err(range("material.poisson", "must lie in (-1, 0.5]"));
        }
        positive("coupling.KT_over_EA", self.coupling.kt_over_ea)?;
        positive("coupling.KR_over_EI", self.coupling.kr_over_ei)?;
        let e = &self.environment;
        if !e.gravity.is_finite() {
            return Err(range("environment.gravity_m_s2", "must be finite"));
        }
        non_negative("environment.sphere_radius_mm", e.sphere_radius)?;
        non_negative("environment.sphere_gap_mm", e.sphere_gap)?;
        non_negative("environment.Kc_MPa", e.contact_stiffness)?;
        positive("environment.dhat_m", e.barrier_distance)?;
        positive("environment.eps_v_m_s", e.velocity_tolerance)?;
        non_negative("environment.mu_forward", e.mu_forward)?;
        non_negative("environment.mu_backward", e.mu_backward)?;
        non_negative("environment.fluid_density_kg_m3", e.fluid_density)?;
        non_negative("environment.Cd_parallel", e.drag_parallel)?;
        non_negative("environment.Cd_normal", e.drag_normal)?;
        let a = &self.actuation;
        positive("actuation.ramp_s", a.ramp)?;
        positive("actuation.release_s", a.release)?;
        positive("actuation.period_s", a.period)?;
        non_negative("actuation.hold_s", a.hold)?;
        non_negative("actuation.start_s", a.start)?;
        positive("actuation.rise_fraction", a.rise_fraction)?;
        positive("actuation.fall_fraction", a.fall_fraction)?;
        non_negative("actuation.hold_fraction", a.hold_fraction)?;
        if a.rise_fraction + a.hold_fraction + a.fall_fraction > 1.0 {
            return Err(range("actuation.fall_fraction", "rise, hold and fall fractions exceed one period"));
        }
        if a.profile == ProfileKind::Piecewise && a.knots.is_empty() {
            return Err(range("actuation.knots_s", "piecewise profile needs knots"));
        }
        if a.knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(range("actuation.knots_s", "knot times must increase"));
        }
        for (key, v) in [("actuation.eta_max", a.eta_max), ("actuation.eta_min", a.eta_min)] {
            if !(v > -1.0 && v.is_finite()) {
                return Err(range(key, "strain must exceed -1"));
            }
        }
        if a.knots.iter().any(|k| !(k.1 > -1.0)) {
            return Err(range("actuation.knots_eta", "strain must exceed -1"));
        }
        let i = &self.integrator;
        positive("integrator.dt_ms", i.dt)?;
        positive("integrator.duration_s", i.duration)?;
        positive("integrator.tolerance", i.tolerance)?;
        if i.max_iterations == 0 {
            return Err(range("integrator.max_iterations", "must be at least 1"));
        }
        non_negative("integrator.static_damping_1_s", i.static_damping)?;
        positive("output.frame_interval_s", self.frame_interval)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        scenario.kind = "jumping"
        geometry.length_m = 0.05
        actuation.profile = "none"
        integrator.duration_s = 0.1
    "#;

    #[test]
    fn defaults_follow_the_kind() {
        let c = ScenarioConfig::from_toml(MINIMAL).unwrap();
        assert_eq!((c.geometry.top_nodes, c.geometry.bottom_nodes), (100, 100));
        assert_eq!(c.environment.mu_forward, 0.5);
        assert_eq!(c.integrator.dt, 1e-3);
        assert_eq!(c.environment.gravity, -10.0);
    }

    #[test]
    fn default_bottom_layer_sits_on_the_top_edge_grid() {
        let text = format!("{MINIMAL}\ngeometry.top_nodes = 201\ngeometry.bottom_nodes = 192\n");
        let g = ScenarioConfig::from_toml(&text).unwrap().geometry;
        let dl = g.length / 200.0;
        assert!((g.bottom_length - 191.0 * dl).abs() < 1e-15);
        // 4.5 edges when centred, rounded down to 4
        assert!((g.bottom_offset - 4.0 * dl).abs() < 1e-15);
    }

    #[test]
    fn empty_document_lists_required_keys() {
        match ScenarioConfig::from_toml("") {
            Err(ConfigError::Missing(keys)) => {
                assert_eq!(keys, ["scenario.kind", "geometry.length_m", "actuation.profile", "integrator.duration_s"])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_friction_is_a_range_error() {
        let text = format!("{MINIMAL}\nenvironment.mu_forward = -0.1\n");
        match ScenarioConfig::from_toml(&text) {
            Err(ConfigError::Range { key, .. }) => assert_eq!(key, "environment.mu_forward"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_path() {
        let text = format!("{MINIMAL}\nmaterial.E3_MPa = 5\n");
        match ScenarioConfig::from_toml(&text) {
            Err(ConfigError::Parse { key, .. }) => assert!(key.starts_with("material"), "{key}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_types_name_the_key() {
        let text = MINIMAL.replace("0.05", "\"long\"");
        match ScenarioConfig::from_toml(&text) {
            Err(ConfigError::Parse { key, .. }) => assert_eq!(key, "geometry.length_m"),
            other => panic!("{other:?}"),
        }
    }
}
