use bilayer_core::beam2d::*;

fn layers(e1: f64, e2: f64, h1: f64, h2: f64) -> Layers2D {
    Layers2D { e1, e2, h1, h2, width: 0.01 }
}

fn mid_curvature(sol: &Beam2DSolution) -> f64 {
    let n = sol.curvatures.len();
    let (a, b) = (n / 5, n - n / 5);
    sol.curvatures[a..b].iter().sum::<f64>() / (b - a) as f64
}

fn solve_uniform(p: Layers2D, eta: f64) -> Beam2DSolution {
    let nodes = 51;
    let b = Beam2DState::straight(0.1, nodes, p).unwrap();
    solve_equilibrium_2d(&b, &vec![eta; nodes], &Support2D::clamped_start(), &Solve2DOptions::default()).unwrap()
}

#[test]
fn stationarity_recovers_closed_form_curvature() {
    for m in [0.25, 0.5, 1.0, 2.0, 4.0] {
        for n in [0.5, 1.0, 2.0] {
            // m = h1/h2, n = E1/E2
            let p = layers(n * 1e8, 1e8, m * 1e-3, 1e-3);
            let s = stationary_curvature(&p);
            let t = timoshenko_curvature(m, n);
            assert!(((s - t) / t).abs() < 1e-3, "m={m} n={n}: {s} vs {t}");
        }
    }
}

#[test]
fn uniform_actuation_gives_uniform_curvature() {
    let eta = 0.01;
    let sol = solve_uniform(layers(1e8, 1e8, 1e-3, 1e-3), eta);
    let k = mid_curvature(&sol);
    let ratio = k * 2e-3 / eta;
    assert!((ratio - 1.5).abs() / 1.5 < 0.01, "κh/η = {ratio}");
    let n = sol.curvatures.len();
    for i in n / 5..n - n / 5 {
        assert!((sol.curvatures[i] - k).abs() < 0.01 * k.abs());
    }
}

#[test]
fn thicker_top_layer_matches_four_thirds() {
    let eta = 0.01;
    let sol = solve_uniform(layers(1e8, 1e8, 2e-3, 1e-3), eta);
    let ratio = mid_curvature(&sol) * 3e-3 / eta;
    assert!((ratio - 4.0 / 3.0).abs() / (4.0 / 3.0) < 0.01, "κh/η = {ratio}");
}

#[test]
fn stiffer_top_layer_matches_model_value() {
    let eta = 0.01;
    let sol = solve_uniform(layers(2e8, 1e8, 1e-3, 1e-3), eta);
    let ratio = mid_curvature(&sol) * 2e-3 / eta;
    let expected = timoshenko_curvature(1.0, 2.0);
    assert!((expected - 16.0 / 11.0).abs() < 1e-12);
    assert!((ratio - expected).abs() / expected < 0.01, "κh/η = {ratio}");
}

#[test]
fn swapping_layers_mirrors_curvature() {
    let eta = 0.01;
    let p = layers(2e8, 1e8, 1.5e-3, 1e-3);
    let a = mid_curvature(&solve_uniform(p, eta));
    // Same bilayer upside down, with the mismatch moved to the other layer:
    // an actuation of -η on the new top layer is the bottom layer's
    // relative shortening.
    let swapped = layers(1e8, 2e8, 1e-3, 1.5e-3);
    let b = mid_curvature(&solve_uniform(swapped, -eta));
    assert!(((a + b) / a).abs() < 0.02, "{a} vs {b}");
}

#[test]
fn end_nodes_carry_no_curvature() {
    let p = layers(1e8, 5e7, 1e-3, 2e-3);
    let mut b = Beam2DState::straight(0.1, 9, p).unwrap();
    for (i, x) in b.positions.iter_mut().enumerate() {
        x[1] = 1e-3 * (i as f64).sin();
    }
    b.eta = vec![0.01; 9];
    let e0 = b.energy();
    assert!(e0 > 0.0);
    assert!(b.curvatures()[0] == 0.0 && b.curvatures()[8] == 0.0);
}
