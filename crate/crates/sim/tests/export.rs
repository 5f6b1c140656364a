use bilayer_sim::config::ScenarioConfig;
use bilayer_sim::export::{read_trajectory, write_run, write_trajectory, ExportError};
use bilayer_sim::metrics;
use bilayer_sim::run::{simulate, RunDiagnostics, Trajectory, TrajectoryFrame};
use bilayer_sim::scenario::Scenario;

fn one_frame() -> Trajectory {
    Trajectory {
        layer_names: vec!["top".into()],
        node_masses: vec![vec![1.0; 3]],
        frames: vec![TrajectoryFrame {
            t: 0.5,
            positions: vec![vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.5, -0.25]]],
            energy: Default::default(),
            min_gap: f64::INFINITY,
            newton_iterations: 0,
            center_of_mass: [1.0, 0.5 / 3.0, -0.25 / 3.0],
        }],
        diagnostics: RunDiagnostics::default(),
    }
}

#[test]
fn one_frame_of_three_nodes_gives_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trajectory.csv");
    write_trajectory(&one_frame(), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,layer,node,x,y,z");
    assert_eq!(&lines[1..], ["0.5,0,0,0.0,0.0,0.0", "0.5,0,1,1.0,0.0,0.0", "0.5,0,2,2.0,0.5,-0.25"]);
}

#[test]
fn empty_trajectory_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let mut t = one_frame();
    t.frames.clear();
    assert!(matches!(write_trajectory(&t, &dir.path().join("x.csv")), Err(ExportError::EmptyTrajectory)));
    let m = metrics::compute(&jumper(), &t);
    assert!(matches!(write_run(dir.path(), &t, &m), Err(ExportError::EmptyTrajectory)));
}

#[test]
fn unwritable_path_is_reported() {
    let err = write_trajectory(&one_frame(), std::path::Path::new("/nonexistent/dir/t.csv")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/dir/t.csv"), "{err}");
}

/// A short, coarse jumper run: lands, then curls.
fn jumper() -> ScenarioConfig {
    let text = bilayer_sim::demo_source("jumping")
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("integrator.duration_s") && !l.starts_with("output."))
        .collect::<Vec<_>>()
        .join("\n");
    ScenarioConfig::from_toml(&format!(
        "{text}\ngeometry.top_nodes = 11\ngeometry.bottom_nodes = 11\nintegrator.duration_s = 0.05\noutput.frame_interval_s = 0.005\n"
    ))
    .unwrap()
}

fn run_into(dir: &std::path::Path) -> (Trajectory, metrics::Metrics) {
    let config = jumper();
    let mut scn = Scenario::build(&config).unwrap();
    let traj = simulate(&mut scn, bilayer_sim::stride(&config));
    assert!(traj.completed(), "{:?}", traj.diagnostics.failure);
    let m = metrics::compute(&config, &traj);
    write_run(dir, &traj, &m).unwrap();
    (traj, m)
}

#[test]
fn identical_runs_write_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_into(a.path());
    run_into(b.path());
    for f in ["trajectory.csv", "energies.csv", "metrics.json"] {
        let (x, y) = (std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
        assert!(!x.is_empty());
        assert_eq!(x, y, "{f} differs");
    }
}

#[test]
fn metrics_recomputed_from_files_match() {
    let dir = tempfile::tempdir().unwrap();
    let (traj, m) = run_into(dir.path());
    let back = read_trajectory(dir.path(), traj.node_masses.clone(), traj.layer_names.clone()).unwrap();
    assert_eq!(back.frames.len(), traj.frames.len());
    for (a, b) in back.frames.iter().zip(&traj.frames) {
        assert_eq!(a.t, b.t);
        assert_eq!(a.positions, b.positions);
        assert_eq!(a.energy, b.energy);
    }
    assert_eq!(metrics::compute(&jumper(), &back), m);
}

#[test]
fn frames_are_strictly_increasing_in_time() {
    let dir = tempfile::tempdir().unwrap();
    let (traj, _) = run_into(dir.path());
    assert!(traj.frames.windows(2).all(|w| w[1].t > w[0].t));
}
