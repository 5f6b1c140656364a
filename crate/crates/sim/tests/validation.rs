use bilayer_core::beam2d::timoshenko_curvature;
use bilayer_sim::config::ScenarioConfig;
use bilayer_sim::metrics;
use bilayer_sim::run::settle;
use bilayer_sim::scenario::Scenario;
use bilayer_sim::validate::{helix_equilibrium, simulated_curvature, TimoshenkoSweep};
use nalgebra::Vector3;

fn sweep() -> TimoshenkoSweep {
    TimoshenkoSweep::from_toml(include_str!("../configs/timoshenko-sweep.toml")).unwrap()
}

#[test]
fn equal_layers_bend_at_one_and_a_half() {
    let k = simulated_curvature(&sweep(), 1.0, 1.0).unwrap();
    assert!((k - 1.5).abs() <= 0.05 * 1.5, "{k}");
}

#[test]
fn curvature_follows_the_classical_trend_in_modulus() {
    let s = sweep();
    let ks: Vec<f64> = [0.25, 0.5, 1.0, 2.0, 4.0].iter().map(|m| simulated_curvature(&s, *m, 1.0).unwrap()).collect();
    let classical: Vec<f64> = [0.25, 0.5, 1.0, 2.0, 4.0].iter().map(|m| timoshenko_curvature(1.0, *m)).collect();
    // at equal thickness the classical curve peaks at equal moduli
    for (k, c) in ks.iter().zip(&classical) {
        assert!((k - c).abs() <= 0.05 * c, "{k} vs {c}");
    }
    assert!(ks[0] < ks[1] && ks[1] < ks[2] && ks[2] > ks[3] && ks[3] > ks[4], "{ks:?}");
}

fn strip(extra: &str) -> ScenarioConfig {
    ScenarioConfig::from_toml(&format!(
        "scenario.kind = \"timoshenko\"\ngeometry.length_m = 0.1\ngeometry.top_nodes = 21\ngeometry.bottom_nodes = 21\n\
         actuation.profile = \"ramp\"\nactuation.ramp_s = 0.1\nintegrator.duration_s = 0.1\n{extra}"
    ))
    .unwrap()
}

#[test]
fn zero_actuation_gives_zero_curvature() {
    let c = strip("actuation.eta_max = 0.0\n");
    let mut scn = Scenario::build(&c).unwrap();
    let traj = settle(&mut scn);
    assert!(traj.completed());
    assert_eq!(metrics::compute(&c, &traj).values["curvature_1_m"], 0.0);
}

fn helix(extra: &str) -> ScenarioConfig {
    let base = bilayer_sim::demo_source("helix").unwrap();
    let kept: Vec<&str> = base
        .lines()
        .filter(|l| {
            !l.starts_with("actuation.natural")
                && !l.starts_with("geometry.top_nodes")
                && !l.starts_with("geometry.bottom_nodes")
        })
        .collect();
    ScenarioConfig::from_toml(&format!(
        "{}\ngeometry.top_nodes = 31\ngeometry.bottom_nodes = 31\n{extra}",
        kept.join("\n")
    ))
    .unwrap()
}

#[test]
fn helix_without_natural_curvature_stays_straight() {
    let (pitch, radius) = helix_equilibrium(&helix(""), None).unwrap();
    assert!(pitch.is_infinite(), "{pitch}");
    assert_eq!(radius, 0.0);
}

/// End-to-end distance of the settled top layer over its arc length.
fn chord_ratio(config: &ScenarioConfig) -> f64 {
    let mut scn = Scenario::build(config).unwrap();
    let traj = settle(&mut scn);
    assert!(traj.completed(), "{:?}", traj.diagnostics.failure);
    let p: Vec<Vector3<f64>> = traj.frames.last().unwrap().positions[0].iter().map(|x| Vector3::from(*x)).collect();
    let arc: f64 = p.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    (p[p.len() - 1] - p[0]).norm() / arc
}

#[test]
fn stiff_bottom_layer_nearly_straightens_the_helix() {
    let shape = "actuation.natural_curvature_1_m = 80.0\nactuation.natural_twist_1_m = 40.0\n";
    let soft = chord_ratio(&helix(shape));
    let stiff = chord_ratio(&helix(&format!("{shape}material.E2_MPa = 100000.0\n")));
    assert!(soft < 0.9, "{soft}");
    assert!(stiff > 0.999, "{stiff}");
}
