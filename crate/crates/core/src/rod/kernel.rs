// Generic element kernels shared by rods and interface coupling.

use nalgebra::Vector3;

use crate::error::{Result, SimError};
use crate::jet::{Jet, Real, V3};
use crate::linalg::HessianSink;

use super::frames::MAX_TURNING_ANGLE;

/// Tangent and first reference director of an edge at the start of a step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrevEdge {
    pub t: Vector3<f64>,
    pub d1: Vector3<f64>,
}

pub(crate) struct EdgeFrame<T> {
    pub t: V3<T>,
    pub d1: V3<T>,
    pub m1: V3<T>,
    pub m2: V3<T>,
}

/// Minimal rotation taking unit `a` onto unit `b`, applied to `v`.
#[inline]
pub(crate) fn transport<T: Real>(a: V3<T>, b: V3<T>, v: V3<T>) -> V3<T> {
    let w = a.cross(b);
    let c = a.dot(b);
    let k = w.dot(v) / (c + 1.0);
    v.scale(c) + w.cross(v) + w.scale(k)
}

#[inline]
pub(crate) fn edge_frame<T: Real>(e: V3<T>, prev: &PrevEdge, theta: T) -> EdgeFrame<T> {
    let t = e.scale(T::cst(1.0) / e.norm());
    let d1 = transport(V3::cst(&prev.t), t, V3::cst(&prev.d1));
    let d2 = t.cross(d1);
    let (s, c) = (theta.sin(), theta.cos());
    EdgeFrame { t, d1, m1: d1.scale(c) + d2.scale(s), m2: d2.scale(c) - d1.scale(s) }
}

/// Angle from `d1` of `a` (space-transported onto `b`) to `d1` of `b`,
/// chosen on the branch closest to `near`.
#[inline]
pub(crate) fn reference_twist<T: Real>(a: &EdgeFrame<T>, b: &EdgeFrame<T>, near: f64) -> T {
    let u = transport(a.t, b.t, a.d1);
    let raw = u.cross(b.d1).dot(b.t).atan2(u.dot(b.d1));
    let turns = libm::round((near - raw.value()) / core::f64::consts::TAU);
    raw + turns * core::f64::consts::TAU
}

/// `2 t0 x t1 / (1 + t0 . t1)` for unit tangents.
#[inline]
pub(crate) fn binormal<T: Real>(t0: V3<T>, t1: V3<T>) -> V3<T> {
    let d = t0.dot(t1) + 1.0;
    t0.cross(t1).scale(T::cst(2.0) / d)
}

/// Turning-angle guard shared by rods, pairs and time transport.
#[inline]
pub(crate) fn check_turning(a: &Vector3<f64>, b: &Vector3<f64>, rod: usize, index: usize) -> Result<()> {
    let c = a.dot(b) / (a.norm() * b.norm());
    if !(c > libm::cos(MAX_TURNING_ANGLE)) {
        return Err(SimError::CurvatureSingularity { rod, index, turning_angle: libm::acos(c.clamp(-1.0, 1.0)) });
    }
    Ok(())
}

/// Natural strains, stiffness and integration length of one bend/twist
/// element (a rod node, or a coupled edge pair).
#[derive(Clone, Copy, Debug)]
pub(crate) struct BendParams {
    pub dl: f64,
    pub k1: f64,
    pub k2: f64,
    pub kt: f64,
    pub chi: f64,
    pub xi: f64,
    pub tau: f64,
}

/// `(χ, ξ, τ)` of two consecutive edges.
#[inline]
pub(crate) fn strains<T: Real>(
    e0: V3<T>,
    e1: V3<T>,
    th0: T,
    th1: T,
    prev: [&PrevEdge; 2],
    twist_near: f64,
    dl: f64,
) -> [T; 3] {
    let f0 = edge_frame(e0, prev[0], th0);
    let f1 = edge_frame(e1, prev[1], th1);
    strains_of_frames(&f0, &f1, th0, th1, twist_near, dl)
}

#[inline]
pub(crate) fn strains_of_frames<T: Real>(
    f0: &EdgeFrame<T>,
    f1: &EdgeFrame<T>,
    th0: T,
    th1: T,
    twist_near: f64,
    dl: f64,
) -> [T; 3] {
    let kb = binormal(f0.t, f1.t);
    let chi = (f0.m2 + f1.m2).dot(kb) * (0.5 / dl);
    let xi = -((f0.m1 + f1.m1).dot(kb) * (0.5 / dl));
    let tau = (th1 - th0 + reference_twist(f0, f1, twist_near)) / dl;
    [chi, xi, tau]
}

/// `(bend, twist)` energy of one element.
#[inline]
pub(crate) fn bend_twist<T: Real>(
    e0: V3<T>,
    e1: V3<T>,
    th0: T,
    th1: T,
    prev: [&PrevEdge; 2],
    twist_near: f64,
    p: &BendParams,
) -> (T, T) {
    let [chi, xi, tau] = strains(e0, e1, th0, th1, prev, twist_near, p.dl);
    let h = 0.5 * p.dl;
    let bend = (chi - p.chi).square() * (h * p.k1) + (xi - p.xi).square() * (h * p.k2);
    let twist = (tau - p.tau).square() * (h * p.kt);
    (bend, twist)
}

/// Seeds a `Jet<N>` 3-vector with variables `base..base+3`.
#[inline]
pub(crate) fn seed3<const N: usize>(v: &Vector3<f64>, base: usize) -> V3<Jet<N>> {
    V3::new(Jet::variable(v.x, base), Jet::variable(v.y, base + 1), Jet::variable(v.z, base + 2))
}

/// Linear map from jet variables to global DOFs: variable `a` equals
/// `Σ coef * q[dof]` over `map[a]`.
pub(crate) struct Stencil<const N: usize> {
    pub map: [[(usize, f64); 4]; N],
    pub len: [usize; N],
}

impl<const N: usize> Stencil<N> {
    pub fn new() -> Self {
        Self { map: [[(0, 0.0); 4]; N], len: [0; N] }
    }

    #[inline]
    pub fn push(&mut self, var: usize, dof: usize, coef: f64) {
        self.map[var][self.len[var]] = (dof, coef);
        self.len[var] += 1;
    }

    /// Adds `∂E/∂q` and `∂²E/∂q²` of `jet` through this map.
    pub fn scatter<S: HessianSink + ?Sized>(&self, jet: &Jet<N>, grad: &mut [f64], sink: &mut S) {
        for a in 0..N {
            for &(p, cp) in &self.map[a][..self.len[a]] {
                grad[p] += cp * jet.g[a];
            }
        }
        for a in 0..N {
            for b in 0..N {
                let h = jet.hess(a, b);
                if h == 0.0 {
                    continue;
                }
                for &(p, cp) in &self.map[a][..self.len[a]] {
                    for &(r, cr) in &self.map[b][..self.len[b]] {
                        sink.add(p, r, cp * cr * h);
                    }
                }
            }
        }
    }
}
