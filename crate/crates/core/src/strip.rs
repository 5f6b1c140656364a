//! Builders for rods and straight bilayer strips.

use alloc::vec::Vec;
use nalgebra::Vector3;

use crate::assembly::{Assembly, Rod};
use crate::coupling::{pair_interface_edges, CouplingSpec};
use crate::error::{Result, SimError};
use crate::rod::{RodGeometry, RodState, SectionStiffness};

/// Rod through `positions` whose material `m1` on edge `i` is the component
/// of `normals(i)` orthogonal to that edge. Rest lengths are the current
/// edge lengths; natural curvatures are zero.
pub fn rod_from_centerline(
    positions: &[Vector3<f64>],
    normals: impl Fn(usize) -> Vector3<f64>,
    stiffness: SectionStiffness,
    width: f64,
    thickness: f64,
    density: f64,
) -> Result<Rod> {
    let state = RodState::new(positions, &alloc::vec![0.0; positions.len().saturating_sub(1)])?;
    let geometry = RodGeometry::from_positions(positions, stiffness, width, thickness, density)?;
    let mut rod = Rod::new(state, geometry)?;
    for i in 0..rod.state.edge_count() {
        let th = rod.frames.theta_for_normal(i, &normals(i));
        rod.state.q[crate::rod::theta_dof(i)] = th;
    }
    rod.frames.refresh_material(&rod.state);
    Ok(rod)
}

/// One layer of a straight strip.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerSpec {
    pub nodes: usize,
    pub length: f64,
    pub thickness: f64,
    pub youngs: f64,
}

/// A straight bilayer lying along `+x` with its thickness along `+z`.
///
/// The interface plane passes through `origin`; the top layer sits above
/// it, the bottom layer below. The bottom layer begins `bottom_start`
/// metres along the top layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BilayerStrip {
    pub top: LayerSpec,
    pub bottom: LayerSpec,
    pub width: f64,
    pub density: f64,
    pub poisson: f64,
    pub bottom_start: f64,
    /// Translation penalty per unit of the larger layer `EA`.
    pub k_t_ratio: f64,
    /// Rotation penalty per unit of the larger layer bending stiffness.
    pub k_r_ratio: f64,
    pub origin: Vector3<f64>,
}

impl BilayerStrip {
    /// Two coincident layers of equal length and node count.
    pub fn symmetric(length: f64, nodes: usize, thickness: f64, youngs: f64, width: f64, density: f64) -> Self {
        let layer = LayerSpec { nodes, length, thickness, youngs };
        Self {
            top: layer,
            bottom: layer,
            width,
            density,
            poisson: 0.5,
            bottom_start: 0.0,
            k_t_ratio: 100.0,
            k_r_ratio: 1000.0,
            origin: Vector3::zeros(),
        }
    }

    pub fn stiffness(&self, layer: &LayerSpec) -> SectionStiffness {
        SectionStiffness::thin_strip(layer.youngs, self.poisson, self.width, layer.thickness)
    }

    /// Penalty stiffnesses `(K_T, K_R)`.
    pub fn penalties(&self) -> (f64, f64) {
        let (a, b) = (self.stiffness(&self.top), self.stiffness(&self.bottom));
        (self.k_t_ratio * a.ea.max(b.ea), self.k_r_ratio * a.ei1.max(b.ei1))
    }

    fn layer_rod(&self, layer: &LayerSpec, x0: f64, z: f64) -> Result<Rod> {
        if layer.nodes < 3 || !(layer.length > 0.0 && layer.thickness > 0.0 && layer.youngs > 0.0) {
            return Err(SimError::InvalidInput(
                "layer needs >= 3 nodes and positive length, thickness and modulus".into(),
            ));
        }
        let dl = layer.length / (layer.nodes - 1) as f64;
        let pts: Vec<Vector3<f64>> =
            (0..layer.nodes).map(|i| self.origin + Vector3::new(x0 + i as f64 * dl, 0.0, z)).collect();
        rod_from_centerline(&pts, |_| Vector3::z(), self.stiffness(layer), self.width, layer.thickness, self.density)
    }

    /// Assembly with rod 0 the top layer, rod 1 the bottom layer and one
    /// coupling between them.
    pub fn build(&self) -> Result<Assembly> {
        let top = self.layer_rod(&self.top, 0.0, 0.5 * self.top.thickness)?;
        let bottom = self.layer_rod(&self.bottom, self.bottom_start, -0.5 * self.bottom.thickness)?;
        let pairs = pair_interface_edges(&top.geometry, &bottom.geometry, self.bottom_start)?;
        let (k_t, k_r) = self.penalties();
        let d0 = 0.5 * (self.top.thickness + self.bottom.thickness);
        let spec = CouplingSpec::new(0, 1, &pairs, k_t, k_r, d0)?;
        Assembly::new(alloc::vec![top, bottom], alloc::vec![spec])
    }
}
