mod common;

use bilayer_core::actuation::Profile;
use bilayer_core::rod::{node_dof, update_frames};
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn potential_energy_is_nonnegative(seed in any::<u64>()) {
        let asm = random_coupled(&mut rng(seed));
        let e = asm.potential_energy().unwrap();
        prop_assert!(e.stretch >= 0.0 && e.bend >= 0.0 && e.twist >= 0.0 && e.coupling >= 0.0);
    }

    #[test]
    fn internal_forces_are_self_equilibrated(seed in any::<u64>()) {
        let asm = random_coupled(&mut rng(seed));
        let (g, _) = gradient_hessian(&asm);
        let mut net = [0.0; 3];
        let mut scale = 0.0f64;
        for (r, rod) in asm.rods.iter().enumerate() {
            for i in 0..rod.node_count() {
                for (c, n) in net.iter_mut().enumerate() {
                    let f = g[asm.node_index(r, i, c)];
                    *n += f;
                    scale = scale.max(f.abs());
                }
            }
        }
        for n in net {
            prop_assert!(n.abs() <= 1e-10 * scale.max(1e-12));
        }
    }

    #[test]
    fn hessian_is_symmetric(seed in any::<u64>()) {
        let asm = random_coupled(&mut rng(seed));
        let (_, h) = gradient_hessian(&asm);
        prop_assert!(h.max_asymmetry() <= 1e-12 * h.max_abs());
    }

    #[test]
    fn transported_frames_stay_orthonormal(seed in any::<u64>(), amp in 0.0f64..0.2) {
        let mut r = rng(seed);
        let asm = random_single(&mut r);
        let rod = &asm.rods[0];
        let mut state = rod.state.clone();
        for i in 0..state.node_count() {
            for c in 0..3 {
                state.q[node_dof(i) + c] += amp * ((i * 3 + c) as f64 + seed as f64 * 1e-3).sin();
            }
        }
        let f = update_frames(&state, &rod.frames).unwrap();
        prop_assert!(f.orthonormality_error() < 1e-12);
        for i in 0..state.edge_count() {
            let t = state.edge(i).normalize();
            prop_assert!((f.tangents[i] - t).norm() < 1e-12);
        }
    }

    #[test]
    fn dof_map_is_a_bijection(seed in any::<u64>()) {
        let asm = random_coupled(&mut rng(seed));
        let mut seen = vec![false; asm.dof_count()];
        for (r, rod) in asm.rods.iter().enumerate() {
            for i in 0..rod.node_count() {
                for c in 0..3 {
                    let g = asm.node_index(r, i, c);
                    prop_assert!(!seen[g]);
                    seen[g] = true;
                    prop_assert_eq!(asm.locate(g), (r, node_dof(i) + c));
                }
                if i + 1 < rod.node_count() {
                    let g = asm.theta_index(r, i);
                    prop_assert!(!seen[g]);
                    seen[g] = true;
                }
            }
        }
        prop_assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn node_masses_telescope_to_layer_mass(seed in any::<u64>()) {
        let asm = random_coupled(&mut rng(seed));
        let m = asm.lumped_mass();
        for (r, rod) in asm.rods.iter().enumerate() {
            let g = &rod.geometry;
            let total: f64 = (0..rod.node_count()).map(|i| m[asm.node_index(r, i, 0)]).sum();
            let expected = g.density * g.width * g.thickness * g.total_reference_length();
            prop_assert!((total - expected).abs() <= 1e-12 * expected);
        }
        prop_assert!(m.iter().all(|x| *x > 0.0));
    }

    #[test]
    fn cycle_profiles_are_continuous(
        rise in 0.05f64..0.4, hold in 0.0f64..0.3, fall in 0.05f64..0.3, period in 0.1f64..3.0,
    ) {
        let p = Profile::Cycle { low: 0.0, high: 0.05, period, rise, hold, fall, start: 0.0 };
        p.validate().unwrap();
        let dt = period * 1e-4;
        let slope = 0.05 * std::f64::consts::PI / (2.0 * rise.min(fall) * period);
        let mut prev = p.value(0.0);
        for k in 1..30000 {
            let v = p.value(k as f64 * dt);
            prop_assert!((v - prev).abs() <= slope * dt * 1.01 + 1e-15);
            prev = v;
        }
    }
}
