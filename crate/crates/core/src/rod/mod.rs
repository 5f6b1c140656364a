//! A single discrete elastic rod: state, rest geometry, frames and energies.
//!
//! DOFs of an `N`-node rod are interleaved as
//! `[x0 (3), θ0, x1 (3), θ1, ..., x_{N-1} (3)]`, `4N - 1` entries in total.

mod energy;
pub(crate) mod frames;
pub(crate) mod kernel;

pub use energy::{
    accumulate_elastic, bend_twist_energy, curvature_binormal, discrete_twist, edge_strain, elastic_energy,
    elastic_gradient_hessian, material_curvatures, node_strains, stretching_energy, BendTwistEnergy, ElasticEnergy,
};
pub use frames::{update_frames, FrameSet, MAX_TURNING_ANGLE};
pub use kernel::PrevEdge as EdgeDirectors;

use alloc::vec::Vec;
use nalgebra::Vector3;

use crate::error::{Result, SimError};

/// Offset of node `i`'s position within a rod's DOF slice.
#[inline]
pub const fn node_dof(i: usize) -> usize {
    4 * i
}

/// Offset of edge `i`'s twist angle within a rod's DOF slice.
#[inline]
pub const fn theta_dof(i: usize) -> usize {
    4 * i + 3
}

/// Number of DOFs of an `n`-node rod.
#[inline]
pub const fn rod_dofs(nodes: usize) -> usize {
    4 * nodes - 1
}

/// Positions, edge angles and velocities of one rod.
#[derive(Clone, Debug, PartialEq)]
pub struct RodState {
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl RodState {
    /// Builds a state at rest from node positions and edge angles.
    pub fn new(positions: &[Vector3<f64>], thetas: &[f64]) -> Result<Self> {
        let n = positions.len();
        if n < 2 || thetas.len() != n - 1 {
            return Err(SimError::InvalidInput(alloc::format!(
                "rod needs >= 2 nodes and one angle per edge (got {n} nodes, {} angles)",
                thetas.len()
            )));
        }
        let mut q = alloc::vec![0.0; rod_dofs(n)];
        for (i, x) in positions.iter().enumerate() {
            q[node_dof(i)..node_dof(i) + 3].copy_from_slice(x.as_slice());
        }
        for (i, t) in thetas.iter().enumerate() {
            q[theta_dof(i)] = *t;
        }
        let v = alloc::vec![0.0; q.len()];
        Ok(Self { q, v })
    }

    pub fn node_count(&self) -> usize {
        (self.q.len() + 1) / 4
    }

    pub fn edge_count(&self) -> usize {
        self.node_count() - 1
    }

    #[inline]
    pub fn position(&self, i: usize) -> Vector3<f64> {
        let k = node_dof(i);
        Vector3::new(self.q[k], self.q[k + 1], self.q[k + 2])
    }

    #[inline]
    pub fn set_position(&mut self, i: usize, x: &Vector3<f64>) {
        let k = node_dof(i);
        self.q[k..k + 3].copy_from_slice(x.as_slice());
    }

    #[inline]
    pub fn velocity(&self, i: usize) -> Vector3<f64> {
        let k = node_dof(i);
        Vector3::new(self.v[k], self.v[k + 1], self.v[k + 2])
    }

    #[inline]
    pub fn theta(&self, i: usize) -> f64 {
        self.q[theta_dof(i)]
    }

    #[inline]
    pub fn edge(&self, i: usize) -> Vector3<f64> {
        self.position(i + 1) - self.position(i)
    }

    pub fn positions(&self) -> Vec<Vector3<f64>> {
        (0..self.node_count()).map(|i| self.position(i)).collect()
    }

    /// Checks that consecutive nodes are distinct and all entries finite.
    pub fn validate(&self, rod: usize) -> Result<()> {
        if self.q.iter().chain(&self.v).any(|x| !x.is_finite()) {
            return Err(SimError::InvalidInput(alloc::format!("rod {rod}: non-finite state")));
        }
        for i in 0..self.edge_count() {
            if self.edge(i).norm_squared() == 0.0 {
                return Err(SimError::DegenerateEdge { rod, edge: i });
            }
        }
        Ok(())
    }
}

/// Cross-section stiffnesses of a uniform strip.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionStiffness {
    pub ea: f64,
    pub ei1: f64,
    pub ei2: f64,
    pub gj: f64,
}

impl SectionStiffness {
    /// Rectangular strip of width `w` and thickness `h`. `ei1` bends about
    /// the width axis (through the thickness); torsion uses the thin-strip
    /// constant `w h^3 / 3`.
    pub fn thin_strip(youngs: f64, poisson: f64, w: f64, h: f64) -> Self {
        let g = youngs / (2.0 * (1.0 + poisson));
        Self {
            ea: youngs * w * h,
            ei1: youngs * w * h * h * h / 12.0,
            ei2: youngs * h * w * w * w / 12.0,
            gj: g * w * h * h * h / 3.0,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self { ea: self.ea * factor, ei1: self.ei1 * factor, ei2: self.ei2 * factor, gj: self.gj * factor }
    }
}

/// Rest geometry, natural strains and stiffness of one rod.
///
/// `reference_lengths` are the unactuated edge lengths and set the mass.
/// `rest_lengths` are the current natural lengths; actuation rewrites them
/// (and the Voronoi lengths) through [`set_rest_lengths`](Self::set_rest_lengths).
#[derive(Clone, Debug, PartialEq)]
pub struct RodGeometry {
    pub reference_lengths: Vec<f64>,
    pub rest_lengths: Vec<f64>,
    pub voronoi_lengths: Vec<f64>,
    pub natural_chi: Vec<f64>,
    pub natural_xi: Vec<f64>,
    pub natural_tau: Vec<f64>,
    /// Per edge.
    pub ea: Vec<f64>,
    /// Per interior node.
    pub ei1: Vec<f64>,
    pub ei2: Vec<f64>,
    pub gj: Vec<f64>,
    pub width: f64,
    pub thickness: f64,
    pub density: f64,
}

impl RodGeometry {
    pub fn uniform(
        reference_lengths: Vec<f64>,
        stiffness: SectionStiffness,
        width: f64,
        thickness: f64,
        density: f64,
    ) -> Result<Self> {
        let edges = reference_lengths.len();
        if edges == 0 {
            return Err(SimError::InvalidInput("rod needs at least one edge".into()));
        }
        if reference_lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(SimError::InvalidInput("rest edge lengths must be positive".into()));
        }
        let s = stiffness;
        if !(s.ea > 0.0 && s.ei1 > 0.0 && s.ei2 > 0.0 && s.gj > 0.0) {
            return Err(SimError::InvalidInput("rod stiffnesses must be positive".into()));
        }
        if !(width > 0.0 && thickness > 0.0 && density > 0.0) {
            return Err(SimError::InvalidInput("width, thickness and density must be positive".into()));
        }
        let interior = edges - 1;
        let mut g = Self {
            rest_lengths: reference_lengths.clone(),
            reference_lengths,
            voronoi_lengths: Vec::new(),
            natural_chi: alloc::vec![0.0; interior],
            natural_xi: alloc::vec![0.0; interior],
            natural_tau: alloc::vec![0.0; interior],
            ea: alloc::vec![s.ea; edges],
            ei1: alloc::vec![s.ei1; interior],
            ei2: alloc::vec![s.ei2; interior],
            gj: alloc::vec![s.gj; interior],
            width,
            thickness,
            density,
        };
        g.refresh_voronoi();
        Ok(g)
    }

    /// Rest lengths taken from the edges of `positions`.
    pub fn from_positions(
        positions: &[Vector3<f64>],
        stiffness: SectionStiffness,
        width: f64,
        thickness: f64,
        density: f64,
    ) -> Result<Self> {
        let lengths = positions.windows(2).map(|p| (p[1] - p[0]).norm()).collect();
        Self::uniform(lengths, stiffness, width, thickness, density)
    }

    pub fn edge_count(&self) -> usize {
        self.rest_lengths.len()
    }

    pub fn node_count(&self) -> usize {
        self.rest_lengths.len() + 1
    }

    /// Installs new natural edge lengths and the matching Voronoi lengths.
    pub fn set_rest_lengths(&mut self, lengths: &[f64]) {
        self.rest_lengths.copy_from_slice(lengths);
        self.refresh_voronoi();
    }

    /// Natural lengths `reference * (1 + eta)` for every edge.
    pub fn apply_uniform_strain(&mut self, eta: f64) {
        for (r, l) in self.rest_lengths.iter_mut().zip(&self.reference_lengths) {
            *r = l * (1.0 + eta);
        }
        self.refresh_voronoi();
    }

    /// Natural lengths `reference * (1 + eta)` on a range of edges.
    pub fn set_edge_strain(&mut self, edges: core::ops::Range<usize>, eta: f64) {
        for e in edges {
            self.rest_lengths[e] = self.reference_lengths[e] * (1.0 + eta);
        }
        self.refresh_voronoi();
    }

    fn refresh_voronoi(&mut self) {
        self.voronoi_lengths = self.rest_lengths.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }

    pub fn total_reference_length(&self) -> f64 {
        self.reference_lengths.iter().sum()
    }

    /// Scales every stiffness touching edges in `edges` by `factor`.
    pub fn stiffen_edges(&mut self, edges: core::ops::Range<usize>, factor: f64) {
        for e in edges.clone() {
            self.ea[e] *= factor;
        }
        for node in 0..self.ei1.len() {
            // interior node k sits between edges k and k+1
            if edges.contains(&node) || edges.contains(&(node + 1)) {
                self.ei1[node] *= factor;
                self.ei2[node] *= factor;
                self.gj[node] *= factor;
            }
        }
    }

    /// Lumped mass per DOF: half of each adjacent edge for nodes, and
    /// `ρ J_polar ē` for edge angles.
    pub fn lumped_mass(&self) -> Vec<f64> {
        let n = self.node_count();
        let (w, h, rho) = (self.width, self.thickness, self.density);
        let line = rho * w * h;
        let polar = w * h * (w * w + h * h) / 12.0;
        let mut m = alloc::vec![0.0; rod_dofs(n)];
        for (e, l) in self.reference_lengths.iter().enumerate() {
            for k in 0..3 {
                m[node_dof(e) + k] += 0.5 * line * l;
                m[node_dof(e + 1) + k] += 0.5 * line * l;
            }
            m[theta_dof(e)] = rho * polar * l;
        }
        m
    }

    /// Adopts the current bend/twist strains of `state` as natural values.
    pub fn set_natural_from(&mut self, state: &RodState, frames: &FrameSet) -> Result<()> {
        let s = node_strains(state, frames, self)?;
        for (k, [chi, xi, tau]) in s.into_iter().enumerate() {
            self.natural_chi[k] = chi;
            self.natural_xi[k] = xi;
            self.natural_tau[k] = tau;
        }
        Ok(())
    }
}
