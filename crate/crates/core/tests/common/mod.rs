#![allow(dead_code)]

use bilayer_core::actuation::NoActuation;
use bilayer_core::assembly::{Assembly, Rod};
use bilayer_core::coupling::CouplingSpec;
use bilayer_core::external::Environment;
use bilayer_core::integrator::{Integrator, IntegratorConfig};
use bilayer_core::linalg::{NullSink, SparseMatrix};
use bilayer_core::rod::{node_dof, theta_dof, RodGeometry, RodState, SectionStiffness};
use bilayer_core::strip::{rod_from_centerline, BilayerStrip};
use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn uniform(rng: &mut StdRng, a: f64, b: f64) -> f64 {
    rng.random_range(a..b)
}

fn random_vec(rng: &mut StdRng, s: f64) -> Vector3<f64> {
    Vector3::new(uniform(rng, -s, s), uniform(rng, -s, s), uniform(rng, -s, s))
}

/// Wavy curve along `x` with edges of roughly unit length and turning
/// angles well below the singular limit.
fn random_curve(rng: &mut StdRng, nodes: usize, origin: Vector3<f64>) -> Vec<Vector3<f64>> {
    let mut pts = vec![origin];
    let mut dir = Vector3::x();
    for _ in 1..nodes {
        dir = (dir + random_vec(rng, 0.5)).normalize();
        let l = uniform(rng, 0.7, 1.3);
        pts.push(pts.last().unwrap() + dir * l);
    }
    pts
}

fn random_stiffness(rng: &mut StdRng) -> SectionStiffness {
    SectionStiffness {
        ea: uniform(rng, 0.5, 2.0),
        ei1: uniform(rng, 0.5, 2.0),
        ei2: uniform(rng, 0.5, 2.0),
        gj: uniform(rng, 0.5, 2.0),
    }
}

/// Rod with random shape, edge angles, rest lengths, natural strains and
/// stiffness; its frames are transported onto a slightly perturbed copy so
/// reference frames do not coincide with the current edges.
pub fn random_rod(rng: &mut StdRng, nodes: usize, origin: Vector3<f64>) -> Rod {
    let pts = random_curve(rng, nodes, origin);
    let thetas: Vec<f64> = (0..nodes - 1).map(|_| uniform(rng, -3.0, 3.0)).collect();
    let state = RodState::new(&pts, &thetas).unwrap();
    let lengths: Vec<f64> = (0..nodes - 1).map(|_| uniform(rng, 0.7, 1.3)).collect();
    let mut geometry = RodGeometry::uniform(lengths, random_stiffness(rng), 0.1, 0.05, 1.0).unwrap();
    for k in 0..nodes - 2 {
        geometry.natural_chi[k] = uniform(rng, -0.3, 0.3);
        geometry.natural_xi[k] = uniform(rng, -0.3, 0.3);
        geometry.natural_tau[k] = uniform(rng, -0.3, 0.3);
        geometry.ei1[k] *= uniform(rng, 0.8, 1.2);
        geometry.gj[k] *= uniform(rng, 0.8, 1.2);
    }
    let mut rod = Rod::new(state, geometry).unwrap();
    for i in 0..nodes {
        let x = rod.state.position(i) + random_vec(rng, 0.05);
        rod.state.set_position(i, &x);
    }
    for i in 0..nodes - 1 {
        rod.state.q[theta_dof(i)] += uniform(rng, -0.2, 0.2);
    }
    rod
}

pub fn random_single(rng: &mut StdRng) -> Assembly {
    let n = rng.random_range(3..10);
    Assembly::single(random_rod(rng, n, Vector3::zeros())).unwrap()
}

/// Two random rods side by side, coupled edge-to-edge over a random
/// overlap with random rest offsets and rest rotations.
pub fn random_coupled(rng: &mut StdRng) -> Assembly {
    let n = rng.random_range(4..9);
    let m = rng.random_range(3..n + 1);
    let top = random_rod(rng, n, Vector3::new(0.0, 0.0, 0.4));
    let bottom = random_rod(rng, m, Vector3::zeros());
    let shift = rng.random_range(0..n - m + 1);
    let pairs: Vec<(usize, usize)> = (0..m - 1).map(|j| (j + shift, j)).collect();
    let mut spec = CouplingSpec::new(0, 1, &pairs, uniform(rng, 1.0, 5.0), uniform(rng, 1.0, 5.0), 0.4).unwrap();
    for p in &mut spec.pairs {
        p.offset = random_vec(rng, 0.3);
        p.natural = [uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3)];
    }
    Assembly::new(vec![top, bottom], vec![spec]).unwrap()
}

pub fn energy_at(asm: &mut Assembly, q: &[f64]) -> f64 {
    asm.set_q(q);
    asm.potential_energy().unwrap().total()
}

pub fn gradient_at(asm: &mut Assembly, q: &[f64]) -> Vec<f64> {
    asm.set_q(q);
    let mut g = vec![0.0; q.len()];
    asm.gradient_hessian(&mut g, &mut NullSink).unwrap();
    g
}

pub fn gradient_hessian(asm: &Assembly) -> (Vec<f64>, SparseMatrix) {
    let n = asm.dof_count();
    let mut g = vec![0.0; n];
    let mut h = SparseMatrix::new(n);
    asm.gradient_hessian(&mut g, &mut h).unwrap();
    (g, h)
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub const FD_STEP: f64 = 1e-6;

/// Largest gradient deviation from central energy differences, relative
/// to the largest gradient entry.
pub fn gradient_error(asm: &mut Assembly) -> f64 {
    let q0 = asm.q();
    let (g, _) = gradient_hessian(asm);
    let mut fd = vec![0.0; q0.len()];
    for k in 0..q0.len() {
        let mut q = q0.clone();
        q[k] = q0[k] + FD_STEP;
        let ep = energy_at(asm, &q);
        q[k] = q0[k] - FD_STEP;
        let em = energy_at(asm, &q);
        fd[k] = (ep - em) / (2.0 * FD_STEP);
    }
    asm.set_q(&q0);
    let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
    inf_norm(&diff) / inf_norm(&g).max(1e-12)
}

/// Largest Hessian deviation from central gradient differences, relative
/// to the largest Hessian entry. Panics if the Hessian is not symmetric.
pub fn hessian_error(asm: &mut Assembly) -> f64 {
    let q0 = asm.q();
    let (_, h) = gradient_hessian(asm);
    let n = q0.len();
    let scale = h.max_abs().max(1e-12);
    let mut worst = 0.0f64;
    for k in 0..n {
        let mut q = q0.clone();
        q[k] = q0[k] + FD_STEP;
        let gp = gradient_at(asm, &q);
        q[k] = q0[k] - FD_STEP;
        let gm = gradient_at(asm, &q);
        for r in 0..n {
            let fd = (gp[r] - gm[r]) / (2.0 * FD_STEP);
            worst = worst.max((h.get(r, k) - fd).abs());
        }
    }
    asm.set_q(&q0);
    assert!(h.max_asymmetry() <= 1e-12 * scale);
    worst / scale
}

pub fn random_motion(r: &mut impl Rng) -> (Matrix3<f64>, Vector3<f64>) {
    let axis = Unit::new_normalize(Vector3::new(
        r.random_range(-1.0..1.0),
        r.random_range(-1.0..1.0),
        r.random_range(-1.0..1.0),
    ));
    let angle = r.random_range(-3.1..3.1);
    let t = Vector3::new(r.random_range(-5.0..5.0), r.random_range(-5.0..5.0), r.random_range(-5.0..5.0));
    (*Rotation3::from_axis_angle(&axis, angle).matrix(), t)
}

/// Largest relative change of the total potential energy of `asm` over
/// `motions` random rigid motions.
pub fn worst_invariance_error(asm: &Assembly, r: &mut impl Rng, motions: usize) -> f64 {
    let e0 = asm.potential_energy().unwrap().total();
    (0..motions)
        .map(|_| {
            let (rot, t) = random_motion(r);
            let mut moved = asm.clone();
            moved.transform(&rot, &t);
            ((moved.potential_energy().unwrap().total() - e0) / e0).abs()
        })
        .fold(0.0, f64::max)
}

pub fn strip_rod(length: f64, nodes: usize, youngs: f64, w: f64, h: f64, rho: f64) -> Rod {
    let dl = length / (nodes - 1) as f64;
    let pts: Vec<_> = (0..nodes).map(|i| Vector3::new(i as f64 * dl, 0.0, 0.0)).collect();
    rod_from_centerline(&pts, |_| Vector3::z(), SectionStiffness::thin_strip(youngs, 0.5, w, h), w, h, rho).unwrap()
}

/// Two-node axial spring integrated to `t_end`: distance from the exact
/// oscillation, after checking every step against the backward-Euler
/// recurrence.
pub fn spring_error(dt: f64, t_end: f64) -> f64 {
    let (youngs, w, h, rho, l) = (1e6, 0.01, 0.001, 1000.0, 0.1);
    let rod = strip_rod(l, 2, youngs, w, h, rho);
    let mut asm = Assembly::single(rod).unwrap();
    let m = 0.5 * rho * w * h * l;
    let k = youngs * w * h / l;
    let omega2 = 2.0 * k / m;
    let u0 = 1e-4;
    let x1 = node_dof(1);
    let mut q = asm.q();
    q[x1] += u0;
    asm.set_q(&q);
    let cfg = IntegratorConfig { dt, tolerance: 1e-12, ..Default::default() };
    let mut integ = Integrator::new(&asm, cfg).unwrap();
    let (mut u, mut v) = (u0, 0.0);
    let steps = (t_end / dt).round() as usize;
    for _ in 0..steps {
        integ.step(&mut asm, &Environment::default(), &mut NoActuation).unwrap();
        let det = 1.0 + omega2 * dt * dt;
        let un = (u + dt * v) / det;
        let vn = (v - omega2 * dt * u) / det;
        u = un;
        v = vn;
        let q = asm.q();
        let sim = q[x1] - q[0] - l;
        assert!((sim - u).abs() < 1e-9 * u0, "recurrence mismatch {sim} vs {u}");
    }
    let exact = u0 * (omega2.sqrt() * steps as f64 * dt).cos();
    (u - exact).abs()
}

/// Total mechanical energy after each of `steps` unforced steps of a bent
/// bilayer released from rest, starting with the initial value.
pub fn released_strip_energies(steps: usize) -> Vec<f64> {
    let mut asm = BilayerStrip::symmetric(0.1, 21, 1e-3, 1e8, 0.01, 1000.0).build().unwrap();
    let mut q = asm.q();
    for r in 0..2 {
        for i in 0..21 {
            let x = q[asm.node_index(r, i, 0)];
            q[asm.node_index(r, i, 2)] += 0.01 * (x / 0.1 * 3.0).sin() * (x / 0.1);
        }
    }
    asm.set_q(&q);
    asm.refresh_frames().unwrap();
    let cfg = IntegratorConfig { dt: 1e-4, tolerance: 1e-10, ..Default::default() };
    let mut integ = Integrator::new(&asm, cfg).unwrap();
    let total = |a: &Assembly, m: &[f64]| a.potential_energy().unwrap().total() + a.kinetic_energy(m);
    let mut out = vec![total(&asm, integ.mass())];
    for _ in 0..steps {
        integ.step(&mut asm, &Environment::default(), &mut NoActuation).unwrap();
        out.push(total(&asm, integ.mass()));
    }
    out
}
