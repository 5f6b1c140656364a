//! External force Jacobians against finite differences, and force-law
//! properties.

use bilayer_core::assembly::Assembly;
use bilayer_core::external::*;
use bilayer_core::rod::{node_dof, SectionStiffness};
use bilayer_core::strip::rod_from_centerline;
use nalgebra::Vector3;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn environment() -> Environment {
    Environment {
        gravity: Vector3::new(0.0, 0.0, -10.0),
        surfaces: vec![
            Surface {
                primitive: Primitive::HalfSpace { point: Vector3::zeros(), normal: Vector3::z() },
                friction: FrictionModel::directional(0.3, 0.6, Vector3::x()),
            },
            Surface {
                primitive: Primitive::Sphere { center: Vector3::new(0.05, 0.0, 0.0212), radius: 0.02 },
                friction: FrictionModel::isotropic(0.5),
            },
        ],
        fluid_density: 1000.0,
        drag_parallel: 0.01,
        drag_normal: 1.0,
        ..Environment::default()
    }
}

/// Strip hovering within the barrier range of the floor, with the middle
/// nodes near the sphere, and velocities spanning the sticking and sliding
/// regimes of friction.
fn random_contact_strip(r: &mut StdRng) -> Assembly {
    let n = 11;
    let pts: Vec<_> = (0..n)
        .map(|i| Vector3::new(0.01 * i as f64, r.random_range(-1e-3..1e-3), r.random_range(2e-4..9e-4)))
        .collect();
    let rod = rod_from_centerline(
        &pts,
        |_| Vector3::z(),
        SectionStiffness::thin_strip(1e8, 0.5, 0.01, 1e-3),
        0.01,
        1e-3,
        1000.0,
    )
    .unwrap();
    let mut asm = Assembly::single(rod).unwrap();
    let mut v = vec![0.0; asm.dof_count()];
    for i in 0..n {
        let s = [1e-5, 5e-5, 2e-4, 1e-2][r.random_range(0..4)];
        for c in 0..3 {
            v[node_dof(i) + c] = r.random_range(-s..s);
        }
    }
    asm.set_v(&v);
    asm
}

fn forces(asm: &Assembly, env: &Environment) -> Vec<f64> {
    let mut f = vec![0.0; asm.dof_count()];
    accumulate_external::<bilayer_core::linalg::NullSink>(asm, env, &mut f, None).unwrap();
    f
}

#[test]
fn jacobians_match_finite_differences() {
    let env = environment();
    let mut r = StdRng::seed_from_u64(31);
    for _ in 0..30 {
        let mut asm = random_contact_strip(&mut r);
        let ex = external_force_and_jacobian(&asm, &env).unwrap();
        let (q0, v0) = (asm.q(), asm.v());
        let n = q0.len();
        for (which, base, h) in [("q", &q0, 1e-9), ("v", &v0, 1e-10)] {
            let jac = if which == "q" { &ex.dforce_dq } else { &ex.dforce_dv };
            let scale = jac.max_abs().max(1e-12);
            for k in 0..n {
                let mut p = base.clone();
                p[k] += h;
                if which == "q" {
                    asm.set_q(&p)
                } else {
                    asm.set_v(&p)
                }
                let fp = forces(&asm, &env);
                p[k] -= 2.0 * h;
                if which == "q" {
                    asm.set_q(&p)
                } else {
                    asm.set_v(&p)
                }
                let fm = forces(&asm, &env);
                if which == "q" {
                    asm.set_q(&q0)
                } else {
                    asm.set_v(&v0)
                }
                for row in 0..n {
                    let fd = (fp[row] - fm[row]) / (2.0 * h);
                    let err = (jac.get(row, k) - fd).abs() / scale;
                    assert!(err < 1e-5, "d f[{row}] / d {which}[{k}]: {} vs {fd}", jac.get(row, k));
                }
            }
        }
    }
}

#[test]
fn drop_forces_respect_the_friction_cone() {
    let env = environment();
    let mut r = StdRng::seed_from_u64(32);
    for _ in 0..30 {
        let asm = random_contact_strip(&mut r);
        for s in contact_samples(&asm, &env) {
            assert!(s.gap > 0.0);
            assert!(s.friction_force <= s.mu * s.normal_force * (1.0 + 1e-12));
        }
    }
}

proptest! {
    #[test]
    fn barrier_vanishes_outside_range(d in 1e-3f64..1.0, k in 1e3f64..1e8) {
        let env = Environment { contact_stiffness: k, ..Environment::default() };
        prop_assert_eq!(barrier_normal_force(d, &Vector3::z(), &env).unwrap(), Vector3::zeros());
    }

    #[test]
    fn barrier_repels_inside_range(d in 1e-9f64..0.999e-3) {
        let f = barrier_normal_force(d, &Vector3::z(), &Environment::default()).unwrap();
        prop_assert!(f.z > 0.0 && f.x == 0.0 && f.y == 0.0);
    }

    #[test]
    fn friction_never_exceeds_the_cone(
        vx in -1e-2f64..1e-2, vy in -1e-2f64..1e-2, vz in -1e-2f64..1e-2,
        fwd in 0.0f64..1.0, bwd in 0.0f64..1.0, fn_ in 0.0f64..10.0,
    ) {
        let model = FrictionModel::directional(fwd, bwd, Vector3::x());
        let v = Vector3::new(vx, vy, vz);
        let f = friction_force(&v, &Vector3::z(), fn_, &model, &Environment::default());
        prop_assert!(f.norm() <= model.max_mu() * fn_ * (1.0 + 1e-12));
        prop_assert!(f.z.abs() <= 1e-15 * fn_);
        prop_assert!(f.dot(&v) <= 0.0);
    }

    #[test]
    fn drag_opposes_motion(
        vx in -1.0f64..1.0, vy in -1.0f64..1.0, vz in -1.0f64..1.0,
        tx in -1.0f64..1.0, ty in -1.0f64..1.0, tz in 0.1f64..1.0,
    ) {
        let env = Environment { fluid_density: 1000.0, drag_parallel: 0.01, drag_normal: 1.0, ..Environment::default() };
        let v = Vector3::new(vx, vy, vz);
        let f = drag_force(&v, &Vector3::new(tx, ty, tz).normalize(), 0.01, &env, 0.01);
        prop_assert!(f.dot(&v) <= 0.0);
    }
}
