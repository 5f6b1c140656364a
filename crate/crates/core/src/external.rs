//! External loads: gravity, log-barrier contact, smoothed Coulomb friction
//! and quadratic anisotropic drag, with Jacobians for implicit stepping.
//!
//! Contact acts on nodes. The barrier force on a node is scaled by the
//! node's contact area (its length times the strip width), so the contact
//! stiffness has units of pressure.

use alloc::vec::Vec;
use nalgebra::Vector3;

use crate::assembly::Assembly;
use crate::error::{Result, SimError};
use crate::jet::{Dual, Real, V3};
use crate::linalg::{HessianSink, SparseMatrix};

/// Geometric contact target.
#[derive(Clone, Debug, PartialEq)]
pub enum Primitive {
    /// `{x : (x - point) . normal >= 0}` is free space; `normal` is unit.
    HalfSpace {
        point: Vector3<f64>,
        normal: Vector3<f64>,
    },
    Sphere {
        center: Vector3<f64>,
        radius: f64,
    },
}

/// Friction coefficient, optionally different for sliding along `+axis`
/// (`forward`) and `-axis` (`backward`).
#[derive(Clone, Debug, PartialEq)]
pub struct FrictionModel {
    pub mu_forward: f64,
    pub mu_backward: f64,
    pub axis: Vector3<f64>,
}

impl FrictionModel {
    pub fn isotropic(mu: f64) -> Self {
        Self { mu_forward: mu, mu_backward: mu, axis: Vector3::x() }
    }

    pub fn directional(forward: f64, backward: f64, axis: Vector3<f64>) -> Self {
        Self { mu_forward: forward, mu_backward: backward, axis: axis.normalize() }
    }

    pub fn max_mu(&self) -> f64 {
        self.mu_forward.max(self.mu_backward)
    }

    /// Effective coefficient for tangential velocity `vt`. Between
    /// `-eps_v` and `eps_v` of sliding speed along the axis the two values
    /// are blended with a C1 smoothstep.
    pub fn mu<T: Real>(&self, vt: V3<T>, eps_v: f64) -> T {
        if self.mu_forward == self.mu_backward {
            return T::cst(self.mu_forward);
        }
        let y = vt.dot(V3::cst(&self.axis)) / eps_v;
        if y.value() >= 1.0 {
            T::cst(self.mu_forward)
        } else if y.value() <= -1.0 {
            T::cst(self.mu_backward)
        } else {
            let s = y * 0.75 - y * y * y * 0.25 + 0.5;
            s * (self.mu_forward - self.mu_backward) + self.mu_backward
        }
    }
}

/// Shape of the friction force below the sliding-speed scale `eps_v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mollifier {
    /// `f(y) = 2y - y^2`: reaches the kinetic value with zero slope at `y = 1`.
    #[default]
    Quadratic,
    /// `f(y) = y - y^2`, kept for comparison; discontinuous at `y = 1`.
    Printed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Surface {
    pub primitive: Primitive,
    pub friction: FrictionModel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ForceFlags {
    pub gravity: bool,
    pub contact: bool,
    pub friction: bool,
    pub drag: bool,
}

impl ForceFlags {
    pub const ALL: Self = Self { gravity: true, contact: true, friction: true, drag: true };
    pub const NONE: Self = Self { gravity: false, contact: false, friction: false, drag: false };
}

#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    pub gravity: Vector3<f64>,
    pub surfaces: Vec<Surface>,
    /// Barrier activation distance `d̂` (m).
    pub barrier_distance: f64,
    /// Contact stiffness (Pa).
    pub contact_stiffness: f64,
    /// Sliding-speed scale `ε_v` (m/s).
    pub velocity_tolerance: f64,
    pub fluid_density: f64,
    pub drag_parallel: f64,
    pub drag_normal: f64,
    pub mollifier: Mollifier,
    pub flags: ForceFlags,
}

impl Default for Environment {
    fn default() -> Self {
        Self {
            gravity: Vector3::zeros(),
            surfaces: Vec::new(),
            barrier_distance: 1e-3,
            contact_stiffness: 1e7,
            velocity_tolerance: 1e-4,
            fluid_density: 0.0,
            drag_parallel: 0.0,
            drag_normal: 0.0,
            mollifier: Mollifier::Quadratic,
            flags: ForceFlags::ALL,
        }
    }
}

impl Environment {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::InvalidInput(m.into()));
        if !(self.barrier_distance > 0.0) {
            return bad("barrier distance must be positive");
        }
        if !(self.velocity_tolerance > 0.0) {
            return bad("velocity tolerance must be positive");
        }
        if !(self.contact_stiffness >= 0.0) {
            return bad("contact stiffness must be non-negative");
        }
        if !(self.fluid_density >= 0.0 && self.drag_parallel >= 0.0 && self.drag_normal >= 0.0) {
            return bad("fluid density and drag coefficients must be non-negative");
        }
        for s in &self.surfaces {
            if !(s.friction.mu_forward >= 0.0 && s.friction.mu_backward >= 0.0) {
                return bad("friction coefficients must be non-negative");
            }
            match &s.primitive {
                Primitive::HalfSpace { normal, .. } if (normal.norm() - 1.0).abs() > 1e-12 => {
                    return bad("half-space normal must be a unit vector")
                }
                Primitive::Sphere { radius, .. } if !(*radius > 0.0) => return bad("sphere radius must be positive"),
                _ => {}
            }
        }
        Ok(())
    }
}

fn gap_generic<T: Real>(x: V3<T>, primitive: &Primitive) -> (T, V3<T>) {
    match primitive {
        Primitive::HalfSpace { point, normal } => {
            let n = V3::cst(normal);
            ((x - V3::cst(point)).dot(n), n)
        }
        Primitive::Sphere { center, radius } => {
            let r = x - V3::cst(center);
            let l = r.norm();
            (l - *radius, r.scale(T::cst(1.0) / l))
        }
    }
}

/// Signed distance to `primitive` (negative inside) and the outward normal.
pub fn contact_gap(x: &Vector3<f64>, primitive: &Primitive) -> (f64, Vector3<f64>) {
    let (d, n) = gap_generic::<f64>(V3::cst(x), primitive);
    (d, n.values())
}

/// `-b'(d)` of the barrier `b(d) = -(d - d̂)^2 ln(d / d̂)`; positive for
/// `0 < d < d̂`.
fn barrier_generic<T: Real>(d: T, dhat: f64) -> T {
    let s = d - dhat;
    s * (d / dhat).ln() * 2.0 + s * s / d
}

/// Repulsive barrier force per unit contact area along `n`.
pub fn barrier_normal_force(d: f64, n: &Vector3<f64>, env: &Environment) -> Result<Vector3<f64>> {
    if d <= 0.0 {
        return Err(SimError::Penetration { rod: 0, node: 0, gap: d });
    }
    if d >= env.barrier_distance {
        return Ok(Vector3::zeros());
    }
    Ok(n * (env.contact_stiffness * barrier_generic(d, env.barrier_distance)))
}

fn friction_generic<T: Real>(
    v: V3<T>,
    n: V3<T>,
    normal_force: T,
    model: &FrictionModel,
    eps_v: f64,
    mollifier: Mollifier,
) -> V3<T> {
    let vt = v - n.scale(v.dot(n));
    let speed = vt.dot(vt).sqrt_or_zero();
    let mu = model.mu(vt, eps_v);
    let y = speed / eps_v;
    let scale = if y.value() >= 1.0 {
        T::cst(1.0) / speed
    } else {
        match mollifier {
            Mollifier::Quadratic => (T::cst(2.0) - y) / eps_v,
            Mollifier::Printed => (T::cst(1.0) - y) / eps_v,
        }
    };
    vt.scale(-(mu * normal_force * scale))
}

/// Smoothed Coulomb friction for velocity `v` against a surface with normal
/// `n` pressing with `normal_force` (N).
pub fn friction_force(
    v: &Vector3<f64>,
    n: &Vector3<f64>,
    normal_force: f64,
    model: &FrictionModel,
    env: &Environment,
) -> Vector3<f64> {
    friction_generic::<f64>(V3::cst(v), V3::cst(n), normal_force, model, env.velocity_tolerance, env.mollifier).values()
}

fn drag_generic<T: Real>(v: V3<T>, t: V3<T>, coef: f64, env: &Environment) -> V3<T> {
    let s = v.dot(t);
    let vn = v - t.scale(s);
    let vn_mag = vn.dot(vn).sqrt_or_zero();
    let par = t.scale(s.signed_square() * env.drag_parallel);
    let perp = vn.scale(vn_mag * env.drag_normal);
    (par + perp).scale_f(-coef)
}

/// Quadratic drag on a segment of length `dl` and width `w` moving with
/// `v`, split along the unit `tangent` and normal to it.
pub fn drag_force(v: &Vector3<f64>, tangent: &Vector3<f64>, dl: f64, env: &Environment, w: f64) -> Vector3<f64> {
    let coef = 0.5 * env.fluid_density * w * dl;
    drag_generic::<f64>(V3::cst(v), V3::cst(tangent), coef, env).values()
}

/// Total external force with its position and velocity Jacobians.
#[derive(Clone, Debug)]
pub struct ExternalForces {
    pub force: Vec<f64>,
    pub dforce_dq: SparseMatrix,
    pub dforce_dv: SparseMatrix,
}

pub fn external_force_and_jacobian(asm: &Assembly, env: &Environment) -> Result<ExternalForces> {
    let n = asm.dof_count();
    let mut force = alloc::vec![0.0; n];
    let mut dq = SparseMatrix::new(n);
    let mut dv = SparseMatrix::new(n);
    accumulate_external(asm, env, &mut force, Some((&mut dq, 1.0, 0.0)))?;
    let mut scratch = alloc::vec![0.0; n];
    accumulate_external(asm, env, &mut scratch, Some((&mut dv, 0.0, 1.0)))?;
    Ok(ExternalForces { force, dforce_dq: dq, dforce_dv: dv })
}

fn seed<const N: usize>(v: &Vector3<f64>, base: usize) -> V3<Dual<N>> {
    V3::new(Dual::variable(v.x, base), Dual::variable(v.y, base + 1), Dual::variable(v.z, base + 2))
}

/// Adds external forces to `force`. With `jac = Some((sink, a, b))` also
/// adds `a ∂F/∂q + b ∂F/∂v` into `sink`.
pub fn accumulate_external<S: HessianSink + ?Sized>(
    asm: &Assembly,
    env: &Environment,
    force: &mut [f64],
    mut jac: Option<(&mut S, f64, f64)>,
) -> Result<()> {
    let flags = env.flags;
    let dhat = env.barrier_distance;
    for (r, rod) in asm.rods.iter().enumerate() {
        let n = rod.node_count();
        let w = rod.geometry.width;
        let line = rod.geometry.density * w * rod.geometry.thickness;
        for i in 0..n {
            let x = rod.state.position(i);
            let v = rod.state.velocity(i);
            let dl = rod.node_length(i);
            let row = |c: usize| asm.node_index(r, i, c);

            if flags.gravity {
                let g = env.gravity * (line * dl);
                for c in 0..3 {
                    force[row(c)] += g[c];
                }
            }

            if flags.contact {
                for s in &env.surfaces {
                    let (d, _) = contact_gap(&x, &s.primitive);
                    if d <= 0.0 {
                        return Err(SimError::Penetration { rod: r, node: i, gap: d });
                    }
                    if d >= dhat {
                        continue;
                    }
                    // variables: x (0..3), v (3..6)
                    let (dd, nn) = gap_generic(seed::<6>(&x, 0), &s.primitive);
                    let fmag = barrier_generic(dd, dhat) * (env.contact_stiffness * dl * w);
                    let mut f = nn.scale(fmag);
                    if flags.friction && s.friction.max_mu() > 0.0 {
                        let fr = friction_generic(
                            seed::<6>(&v, 3),
                            nn,
                            fmag,
                            &s.friction,
                            env.velocity_tolerance,
                            env.mollifier,
                        );
                        f = f + fr;
                    }
                    let comps = [f.x, f.y, f.z];
                    for (c, fc) in comps.iter().enumerate() {
                        force[row(c)] += fc.v;
                        if let Some((sink, a, b)) = jac.as_mut() {
                            for k in 0..3 {
                                let val = *a * fc.g[k] + *b * fc.g[3 + k];
                                if val != 0.0 {
                                    sink.add(row(c), row(k), val);
                                }
                            }
                        }
                    }
                }
            }

            if flags.drag && env.fluid_density > 0.0 && (env.drag_parallel > 0.0 || env.drag_normal > 0.0) {
                // variables: v (0..3), x_{i-1} (3..6), x_i (6..9), x_{i+1} (9..12)
                let xs = seed::<12>(&x, 6);
                let mut t = V3::new(Dual::cst(0.0), Dual::cst(0.0), Dual::cst(0.0));
                if i > 0 {
                    let e = xs - seed::<12>(&rod.state.position(i - 1), 3);
                    t = t + e.scale(Dual::cst(1.0) / e.norm());
                }
                if i + 1 < n {
                    let e = seed::<12>(&rod.state.position(i + 1), 9) - xs;
                    t = t + e.scale(Dual::cst(1.0) / e.norm());
                }
                let t = t.scale(Dual::cst(1.0) / t.norm());
                let f = drag_generic(seed::<12>(&v, 0), t, 0.5 * env.fluid_density * w * dl, env);
                let comps = [f.x, f.y, f.z];
                for (c, fc) in comps.iter().enumerate() {
                    force[row(c)] += fc.v;
                    if let Some((sink, a, b)) = jac.as_mut() {
                        for k in 0..3 {
                            if *b != 0.0 {
                                sink.add(row(c), row(k), *b * fc.g[k]);
                            }
                            if *a != 0.0 {
                                if i > 0 {
                                    sink.add(row(c), asm.node_index(r, i - 1, k), *a * fc.g[3 + k]);
                                }
                                sink.add(row(c), row(k), *a * fc.g[6 + k]);
                                if i + 1 < n {
                                    sink.add(row(c), asm.node_index(r, i + 1, k), *a * fc.g[9 + k]);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Contact state of one node against one surface within the barrier range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactSample {
    pub rod: usize,
    pub node: usize,
    pub surface: usize,
    pub gap: f64,
    pub normal_force: f64,
    pub friction_force: f64,
    /// Friction coefficient in effect at the sampled velocity.
    pub mu: f64,
}

/// All active contacts (gap below the barrier distance) of `asm`.
pub fn contact_samples(asm: &Assembly, env: &Environment) -> Vec<ContactSample> {
    let mut out = Vec::new();
    for (r, rod) in asm.rods.iter().enumerate() {
        for i in 0..rod.node_count() {
            let x = rod.state.position(i);
            for (k, s) in env.surfaces.iter().enumerate() {
                let (d, n) = contact_gap(&x, &s.primitive);
                if d >= env.barrier_distance {
                    continue;
                }
                let area = rod.node_length(i) * rod.geometry.width;
                let fmag = if d > 0.0 {
                    env.contact_stiffness * area * barrier_generic(d, env.barrier_distance)
                } else {
                    f64::INFINITY
                };
                let v = rod.state.velocity(i);
                let vt = v - n * v.dot(&n);
                let fr = if env.flags.friction && fmag.is_finite() {
                    friction_force(&v, &n, fmag, &s.friction, env).norm()
                } else {
                    0.0
                };
                out.push(ContactSample {
                    rod: r,
                    node: i,
                    surface: k,
                    gap: d,
                    normal_force: fmag,
                    friction_force: fr,
                    mu: s.friction.mu::<f64>(V3::cst(&vt), env.velocity_tolerance),
                });
            }
        }
    }
    out
}

/// Smallest node-to-surface gap over the assembly (infinite without
/// surfaces).
pub fn min_gap(asm: &Assembly, env: &Environment) -> f64 {
    let mut m = f64::INFINITY;
    for rod in &asm.rods {
        for i in 0..rod.node_count() {
            for s in &env.surfaces {
                m = m.min(contact_gap(&rod.state.position(i), &s.primitive).0);
            }
        }
    }
    m
}
