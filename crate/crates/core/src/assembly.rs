//! Several rods plus the interfaces that couple them, over one global DOF
//! vector.
//!
//! Rod `r` occupies the contiguous slice `offset(r) .. offset(r) + 4N_r - 1`
//! of the global vector. Frames stored with each rod are those of the last
//! accepted configuration; energies of trial configurations are measured by
//! transporting them onto the trial edges.

use alloc::vec::Vec;
use nalgebra::{Matrix3, Vector3};

use crate::coupling::{coupling_energy, coupling_total, CouplingEnergy, CouplingSpec};
use crate::error::{Result, SimError};
use crate::linalg::HessianSink;
use crate::rod::frames::{twist_between, update_frames_for};
use crate::rod::{
    accumulate_elastic, elastic_energy, node_dof, rod_dofs, theta_dof, ElasticEnergy, FrameSet, RodGeometry, RodState,
};

/// One rod with its rest data and current frames.
#[derive(Clone, Debug, PartialEq)]
pub struct Rod {
    pub state: RodState,
    pub geometry: RodGeometry,
    pub frames: FrameSet,
}

impl Rod {
    pub fn new(state: RodState, geometry: RodGeometry) -> Result<Self> {
        if state.node_count() != geometry.node_count() {
            return Err(SimError::InvalidInput("rod state and geometry sizes differ".into()));
        }
        state.validate(0)?;
        let frames = FrameSet::initial(&state)?;
        Ok(Self { state, geometry, frames })
    }

    pub fn node_count(&self) -> usize {
        self.state.node_count()
    }

    /// Length attributed to node `i`: half of each adjacent reference edge.
    pub fn node_length(&self, i: usize) -> f64 {
        let l = &self.geometry.reference_lengths;
        let mut s = 0.0;
        if i > 0 {
            s += 0.5 * l[i - 1];
        }
        if i < l.len() {
            s += 0.5 * l[i];
        }
        s
    }

    /// Unit tangent at node `i`: normalized average of the adjacent edges.
    pub fn node_tangent(&self, i: usize) -> Vector3<f64> {
        let n = self.node_count();
        let mut t = Vector3::zeros();
        if i > 0 {
            t += self.state.edge(i - 1).normalize();
        }
        if i + 1 < n {
            t += self.state.edge(i).normalize();
        }
        t.normalize()
    }
}

/// Energy breakdown of an assembly.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PotentialEnergy {
    pub stretch: f64,
    pub bend: f64,
    pub twist: f64,
    pub coupling: f64,
}

impl PotentialEnergy {
    pub fn elastic(&self) -> f64 {
        self.stretch + self.bend + self.twist
    }

    pub fn total(&self) -> f64 {
        self.elastic() + self.coupling
    }

    fn add_rod(&mut self, e: ElasticEnergy) {
        self.stretch += e.stretch;
        self.bend += e.bend;
        self.twist += e.twist;
    }

    fn add_coupling(&mut self, c: CouplingEnergy) {
        self.coupling += c.total();
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assembly {
    pub rods: Vec<Rod>,
    pub couplings: Vec<CouplingSpec>,
    pub time: f64,
    offsets: Vec<usize>,
    dofs: usize,
}

impl Assembly {
    pub fn new(rods: Vec<Rod>, couplings: Vec<CouplingSpec>) -> Result<Self> {
        if rods.is_empty() {
            return Err(SimError::InvalidInput("assembly needs at least one rod".into()));
        }
        let mut offsets = Vec::with_capacity(rods.len());
        let mut dofs = 0;
        for r in &rods {
            offsets.push(dofs);
            dofs += rod_dofs(r.node_count());
        }
        for c in &couplings {
            if c.top >= rods.len() || c.bottom >= rods.len() || c.top == c.bottom {
                return Err(SimError::InvalidInput("coupling refers to an invalid rod pair".into()));
            }
            let (nt, nb) = (rods[c.top].geometry.edge_count(), rods[c.bottom].geometry.edge_count());
            if c.pairs.iter().any(|p| p.top_edge >= nt || p.bottom_edge >= nb) {
                return Err(SimError::InvalidInput("coupling pair edge out of range".into()));
            }
        }
        let mut asm = Self { rods, couplings, time: 0.0, offsets, dofs };
        for (r, rod) in asm.rods.iter_mut().enumerate() {
            rod.state.validate(r)?;
        }
        asm.init_pair_twist()?;
        Ok(asm)
    }

    pub fn single(rod: Rod) -> Result<Self> {
        Self::new(alloc::vec![rod], Vec::new())
    }

    fn init_pair_twist(&mut self) -> Result<()> {
        for c in 0..self.couplings.len() {
            let (top, bottom) = (self.couplings[c].top, self.couplings[c].bottom);
            for p in 0..self.couplings[c].pairs.len() {
                let (i, j) = (self.couplings[c].pairs[p].top_edge, self.couplings[c].pairs[p].bottom_edge);
                let (ft, fb) = (&self.rods[top].frames, &self.rods[bottom].frames);
                let near = self.couplings[c].pairs[p].reference_twist;
                let tw = twist_between(&ft.tangents[i], &ft.d1[i], &fb.tangents[j], &fb.d1[j], near);
                self.couplings[c].pairs[p].reference_twist = tw;
            }
        }
        Ok(())
    }

    pub fn dof_count(&self) -> usize {
        self.dofs
    }

    pub fn offset(&self, rod: usize) -> usize {
        self.offsets[rod]
    }

    /// Global index of the `k`th coordinate of node `i` of `rod`.
    pub fn node_index(&self, rod: usize, i: usize, k: usize) -> usize {
        self.offsets[rod] + node_dof(i) + k
    }

    pub fn theta_index(&self, rod: usize, i: usize) -> usize {
        self.offsets[rod] + theta_dof(i)
    }

    /// `(rod, local index)` of a global DOF.
    pub fn locate(&self, global: usize) -> (usize, usize) {
        let r = match self.offsets.binary_search(&global) {
            Ok(r) => r,
            Err(r) => r - 1,
        };
        (r, global - self.offsets[r])
    }

    pub fn q(&self) -> Vec<f64> {
        self.rods.iter().flat_map(|r| r.state.q.iter().copied()).collect()
    }

    pub fn v(&self) -> Vec<f64> {
        self.rods.iter().flat_map(|r| r.state.v.iter().copied()).collect()
    }

    pub fn set_q(&mut self, q: &[f64]) {
        for (r, rod) in self.rods.iter_mut().enumerate() {
            let o = self.offsets[r];
            let n = rod.state.q.len();
            rod.state.q.copy_from_slice(&q[o..o + n]);
        }
    }

    pub fn set_v(&mut self, v: &[f64]) {
        for (r, rod) in self.rods.iter_mut().enumerate() {
            let o = self.offsets[r];
            let n = rod.state.v.len();
            rod.state.v.copy_from_slice(&v[o..o + n]);
        }
    }

    /// Lumped mass for every global DOF.
    pub fn lumped_mass(&self) -> Vec<f64> {
        self.rods.iter().flat_map(|r| r.geometry.lumped_mass()).collect()
    }

    pub fn potential_energy(&self) -> Result<PotentialEnergy> {
        let mut e = PotentialEnergy::default();
        for (r, rod) in self.rods.iter().enumerate() {
            let re = elastic_energy(&rod.state, &rod.frames, &rod.geometry).map_err(|err| with_rod(err, r))?;
            e.add_rod(re);
        }
        e.add_coupling(coupling_energy(self)?);
        Ok(e)
    }

    /// Adds the gradient and second derivative of the potential energy
    /// (elastic plus coupling) into `grad` and `sink`.
    pub fn gradient_hessian<S: HessianSink + ?Sized>(&self, grad: &mut [f64], sink: &mut S) -> Result<PotentialEnergy> {
        let mut e = PotentialEnergy::default();
        for (r, rod) in self.rods.iter().enumerate() {
            e.add_rod(accumulate_elastic(&rod.state, &rod.frames, &rod.geometry, r, self.offsets[r], grad, sink)?);
        }
        e.add_coupling(coupling_total(self, grad, sink)?);
        Ok(e)
    }

    pub fn kinetic_energy(&self, mass: &[f64]) -> f64 {
        self.v().iter().zip(mass).map(|(v, m)| 0.5 * m * v * v).sum()
    }

    /// Transports frames (and pair reference twists) onto the current
    /// configuration, making it the new reference for later steps.
    pub fn refresh_frames(&mut self) -> Result<()> {
        for (r, rod) in self.rods.iter_mut().enumerate() {
            rod.frames = update_frames_for(&rod.state, &rod.frames, r)?;
        }
        self.init_pair_twist()
    }

    /// Applies `x -> R x + t` to all nodes, `v -> R v` to velocities and
    /// rotates all stored frames.
    pub fn transform(&mut self, rotation: &Matrix3<f64>, translation: &Vector3<f64>) {
        for rod in &mut self.rods {
            for i in 0..rod.node_count() {
                let x = rotation * rod.state.position(i) + translation;
                rod.state.set_position(i, &x);
                let k = node_dof(i);
                let v = rotation * rod.state.velocity(i);
                rod.state.v[k..k + 3].copy_from_slice(v.as_slice());
            }
            rod.frames = rod.frames.rotated(rotation);
        }
    }

    /// Structural adjacency of the global tangent: every pair of DOFs that
    /// share an element (stretch, bend/twist, coupling pair, or a node's
    /// own external force stencil).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = alloc::vec![Vec::new(); self.dofs];
        let clique = |dofs: &[usize], adj: &mut Vec<Vec<usize>>| {
            for &a in dofs {
                for &b in dofs {
                    if a != b {
                        adj[a].push(b);
                    }
                }
            }
        };
        for (r, rod) in self.rods.iter().enumerate() {
            let n = rod.node_count();
            for k in 0..n.saturating_sub(2) {
                let mut d: Vec<usize> = (0..3)
                    .flat_map(|c| (k..k + 3).map(move |i| (i, c)))
                    .map(|(i, c)| self.node_index(r, i, c))
                    .collect();
                d.push(self.theta_index(r, k));
                d.push(self.theta_index(r, k + 1));
                clique(&d, &mut adj);
            }
            if n == 2 {
                let d: Vec<usize> =
                    (0..2).flat_map(|i| (0..3).map(move |c| (i, c))).map(|(i, c)| self.node_index(r, i, c)).collect();
                clique(&d, &mut adj);
            }
        }
        for c in &self.couplings {
            for p in &c.pairs {
                let mut d = Vec::with_capacity(14);
                for (rod, e) in [(c.top, p.top_edge), (c.bottom, p.bottom_edge)] {
                    for i in e..e + 2 {
                        for k in 0..3 {
                            d.push(self.node_index(rod, i, k));
                        }
                    }
                    d.push(self.theta_index(rod, e));
                }
                clique(&d, &mut adj);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

pub(crate) fn with_rod(err: SimError, rod: usize) -> SimError {
    match err {
        SimError::DegenerateEdge { edge, .. } => SimError::DegenerateEdge { rod, edge },
        SimError::CurvatureSingularity { index, turning_angle, .. } => {
            SimError::CurvatureSingularity { rod, index, turning_angle }
        }
        SimError::Penetration { node, gap, .. } => SimError::Penetration { rod, node, gap },
        other => other,
    }
}
