use alloc::vec::Vec;
use nalgebra::{Matrix3, Vector3};

use super::frames::FrameSet;
use super::kernel::{bend_twist, check_turning, seed3, strains, BendParams, Stencil};
use super::{node_dof, rod_dofs, theta_dof, RodGeometry, RodState};
use crate::error::{Result, SimError};
use crate::jet::{Jet, V3};
use crate::linalg::{HessianSink, SparseMatrix};

/// Uniaxial strain `|x_j - x_i| / rest_len - 1`.
pub fn edge_strain(xi: &Vector3<f64>, xj: &Vector3<f64>, rest_len: f64) -> Result<f64> {
    if !(rest_len > 0.0) {
        return Err(SimError::InvalidInput("rest length must be positive".into()));
    }
    let l = (xj - xi).norm();
    if l == 0.0 {
        return Err(SimError::DegenerateEdge { rod: 0, edge: 0 });
    }
    Ok(l / rest_len - 1.0)
}

pub fn stretching_energy(state: &RodState, geom: &RodGeometry) -> Result<f64> {
    let mut e = 0.0;
    for i in 0..state.edge_count() {
        let eps = edge_strain(&state.position(i), &state.position(i + 1), geom.rest_lengths[i])
            .map_err(|_| SimError::DegenerateEdge { rod: 0, edge: i })?;
        e += 0.5 * geom.ea[i] * eps * eps * geom.rest_lengths[i];
    }
    Ok(e)
}

/// `2 (e_prev x e_next) / (|e_prev||e_next| + e_prev . e_next)`.
pub fn curvature_binormal(e_prev: &Vector3<f64>, e_next: &Vector3<f64>) -> Result<Vector3<f64>> {
    let (a, b) = (e_prev.norm(), e_next.norm());
    if a == 0.0 || b == 0.0 {
        return Err(SimError::DegenerateEdge { rod: 0, edge: if a == 0.0 { 0 } else { 1 } });
    }
    check_turning(e_prev, e_next, 0, 0)?;
    Ok(e_prev.cross(e_next) * (2.0 / (a * b + e_prev.dot(e_next))))
}

/// `(χ, ξ)` from the binormal and the material directors of both edges.
pub fn material_curvatures(kb: &Vector3<f64>, m1: [&Vector3<f64>; 2], m2: [&Vector3<f64>; 2], dl: f64) -> (f64, f64) {
    let chi = 0.5 * (m2[0] + m2[1]).dot(kb) / dl;
    let xi = -0.5 * (m1[0] + m1[1]).dot(kb) / dl;
    (chi, xi)
}

pub fn discrete_twist(theta_prev: f64, theta_next: f64, theta_ref: f64, dl: f64) -> f64 {
    (theta_next - theta_prev + theta_ref) / dl
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BendTwistEnergy {
    pub bend: f64,
    pub twist: f64,
}

impl BendTwistEnergy {
    pub fn total(&self) -> f64 {
        self.bend + self.twist
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ElasticEnergy {
    pub stretch: f64,
    pub bend: f64,
    pub twist: f64,
}

impl ElasticEnergy {
    pub fn total(&self) -> f64 {
        self.stretch + self.bend + self.twist
    }
}

impl core::ops::AddAssign for ElasticEnergy {
    fn add_assign(&mut self, o: Self) {
        self.stretch += o.stretch;
        self.bend += o.bend;
        self.twist += o.twist;
    }
}

fn params(geom: &RodGeometry, k: usize) -> BendParams {
    BendParams {
        dl: geom.voronoi_lengths[k],
        k1: geom.ei1[k],
        k2: geom.ei2[k],
        kt: geom.gj[k],
        chi: geom.natural_chi[k],
        xi: geom.natural_xi[k],
        tau: geom.natural_tau[k],
    }
}

fn check_rod(state: &RodState, frames: &FrameSet, geom: &RodGeometry, rod: usize) -> Result<()> {
    let n = state.edge_count();
    if frames.edge_count() != n || geom.edge_count() != n {
        return Err(SimError::InvalidInput(alloc::format!("rod {rod}: state, frames and geometry sizes differ")));
    }
    for i in 0..n {
        let e = state.edge(i);
        if e.norm_squared() == 0.0 {
            return Err(SimError::DegenerateEdge { rod, edge: i });
        }
        check_turning(&frames.tangents[i], &e, rod, i)?;
        if i > 0 {
            check_turning(&state.edge(i - 1), &e, rod, i)?;
        }
    }
    Ok(())
}

/// Bend and twist energy of `state`, with reference directors transported
/// from `frames` onto the current edges.
pub fn bend_twist_energy(state: &RodState, frames: &FrameSet, geom: &RodGeometry) -> Result<BendTwistEnergy> {
    check_rod(state, frames, geom, 0)?;
    let mut out = BendTwistEnergy::default();
    for k in 0..state.edge_count().saturating_sub(1) {
        let (b, t) = bend_twist::<f64>(
            V3::cst(&state.edge(k)),
            V3::cst(&state.edge(k + 1)),
            state.theta(k),
            state.theta(k + 1),
            [&frames.directors(k), &frames.directors(k + 1)],
            frames.reference_twist[k],
            &params(geom, k),
        );
        out.bend += b;
        out.twist += t;
    }
    Ok(out)
}

pub fn elastic_energy(state: &RodState, frames: &FrameSet, geom: &RodGeometry) -> Result<ElasticEnergy> {
    let bt = bend_twist_energy(state, frames, geom)?;
    Ok(ElasticEnergy { stretch: stretching_energy(state, geom)?, bend: bt.bend, twist: bt.twist })
}

/// `[χ, ξ, τ]` at every interior node.
pub fn node_strains(state: &RodState, frames: &FrameSet, geom: &RodGeometry) -> Result<Vec<[f64; 3]>> {
    check_rod(state, frames, geom, 0)?;
    Ok((0..state.edge_count().saturating_sub(1))
        .map(|k| {
            strains::<f64>(
                V3::cst(&state.edge(k)),
                V3::cst(&state.edge(k + 1)),
                state.theta(k),
                state.theta(k + 1),
                [&frames.directors(k), &frames.directors(k + 1)],
                frames.reference_twist[k],
                geom.voronoi_lengths[k],
            )
        })
        .collect())
}

/// Adds the rod's elastic gradient and Hessian into global storage, with
/// the rod's DOFs starting at `offset`. Returns the energy.
#[allow(clippy::too_many_arguments)]
pub fn accumulate_elastic<S: HessianSink + ?Sized>(
    state: &RodState,
    frames: &FrameSet,
    geom: &RodGeometry,
    rod: usize,
    offset: usize,
    grad: &mut [f64],
    sink: &mut S,
) -> Result<ElasticEnergy> {
    check_rod(state, frames, geom, rod)?;
    let mut energy = ElasticEnergy::default();

    for i in 0..state.edge_count() {
        let e = state.edge(i);
        let l = e.norm();
        let (ea, rest) = (geom.ea[i], geom.rest_lengths[i]);
        let eps = l / rest - 1.0;
        energy.stretch += 0.5 * ea * eps * eps * rest;
        let t = e / l;
        let g = t * (ea * eps);
        let tt = t * t.transpose();
        let h: Matrix3<f64> = tt * (ea / rest) + (Matrix3::identity() - tt) * (ea * eps / l);
        let (a, b) = (offset + node_dof(i), offset + node_dof(i + 1));
        for r in 0..3 {
            grad[a + r] -= g[r];
            grad[b + r] += g[r];
            for c in 0..3 {
                let v = h[(r, c)];
                sink.add(a + r, a + c, v);
                sink.add(b + r, b + c, v);
                sink.add(a + r, b + c, -v);
                sink.add(b + r, a + c, -v);
            }
        }
    }

    for k in 0..state.edge_count().saturating_sub(1) {
        // variables: e^k (0..3), e^{k+1} (3..6), θ^k (6), θ^{k+1} (7)
        let (bend, twist) = bend_twist::<Jet<8>>(
            seed3(&state.edge(k), 0),
            seed3(&state.edge(k + 1), 3),
            Jet::variable(state.theta(k), 6),
            Jet::variable(state.theta(k + 1), 7),
            [&frames.directors(k), &frames.directors(k + 1)],
            frames.reference_twist[k],
            &params(geom, k),
        );
        energy.bend += bend.v;
        energy.twist += twist.v;
        let mut st = Stencil::<8>::new();
        let (x0, x1, x2) = (offset + node_dof(k), offset + node_dof(k + 1), offset + node_dof(k + 2));
        for c in 0..3 {
            st.push(c, x0 + c, -1.0);
            st.push(c, x1 + c, 1.0);
            st.push(3 + c, x1 + c, -1.0);
            st.push(3 + c, x2 + c, 1.0);
        }
        st.push(6, offset + theta_dof(k), 1.0);
        st.push(7, offset + theta_dof(k + 1), 1.0);
        st.scatter(&(bend + twist), grad, sink);
    }
    Ok(energy)
}

/// Gradient and exact second derivative of the rod's elastic energy over
/// its own DOFs.
pub fn elastic_gradient_hessian(
    state: &RodState,
    frames: &FrameSet,
    geom: &RodGeometry,
) -> Result<(Vec<f64>, SparseMatrix)> {
    let n = rod_dofs(state.node_count());
    let mut grad = alloc::vec![0.0; n];
    let mut h = SparseMatrix::new(n);
    accumulate_elastic(state, frames, geom, 0, 0, &mut grad, &mut h)?;
    Ok((grad, h))
}
