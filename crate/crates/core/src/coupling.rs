//! Penalty coupling between paired interface edges of two rods.
//!
//! A pair `(i, j)` joins edge `i` of the top rod to edge `j` of the bottom
//! rod. The translation term holds the midpoint offset
//! `p = (x_i + x_{i+1} - x_j - x_{j+1}) / 2` at a rest offset expressed in
//! the averaged material frame; the rotation term treats the two edges as
//! consecutive edges of a virtual bend/twist element and penalizes its
//! relative curvatures and twist.

use alloc::vec::Vec;
use nalgebra::Vector3;

use crate::assembly::Assembly;
use crate::error::{Result, SimError};
use crate::jet::{Dual, Jet, Real, V3};
use crate::linalg::HessianSink;
use crate::rod::kernel::{check_turning, edge_frame, seed3, strains_of_frames, PrevEdge, Stencil};
use crate::rod::{node_dof, theta_dof, RodGeometry};

/// One coupled edge pair.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingPair {
    pub top_edge: usize,
    pub bottom_edge: usize,
    /// Rest offset of `p` along the averaged `m1`, `m2`, `m3`.
    pub offset: Vector3<f64>,
    /// Rest relative `(χ, ξ, τ)`.
    pub natural: [f64; 3],
    pub reference_twist: f64,
}

/// Interface between rods `top` and `bottom` of an [`Assembly`].
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSpec {
    pub top: usize,
    pub bottom: usize,
    /// Translation penalty (N/m).
    pub k_t: f64,
    /// Rotation penalty (N m^2).
    pub k_r: f64,
    pub pairs: Vec<CouplingPair>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CouplingEnergy {
    pub translation: f64,
    pub rotation: f64,
}

impl CouplingEnergy {
    pub fn total(&self) -> f64 {
        self.translation + self.rotation
    }
}

impl CouplingSpec {
    /// Pairs with rest offset `d0` along `m1` and zero rest rotation.
    pub fn new(top: usize, bottom: usize, edges: &[(usize, usize)], k_t: f64, k_r: f64, d0: f64) -> Result<Self> {
        let spec = Self {
            top,
            bottom,
            k_t,
            k_r,
            pairs: edges
                .iter()
                .map(|&(i, j)| CouplingPair {
                    top_edge: i,
                    bottom_edge: j,
                    offset: Vector3::new(d0, 0.0, 0.0),
                    natural: [0.0; 3],
                    reference_twist: 0.0,
                })
                .collect(),
        };
        spec.check_pairs()?;
        Ok(spec)
    }

    fn check_pairs(&self) -> Result<()> {
        if !(self.k_t > 0.0 && self.k_r > 0.0) {
            return Err(SimError::InvalidInput("coupling penalties must be positive".into()));
        }
        let mut top: Vec<usize> = self.pairs.iter().map(|p| p.top_edge).collect();
        let mut bottom: Vec<usize> = self.pairs.iter().map(|p| p.bottom_edge).collect();
        top.sort_unstable();
        bottom.sort_unstable();
        if top.windows(2).any(|w| w[0] == w[1]) || bottom.windows(2).any(|w| w[0] == w[1]) {
            return Err(SimError::InvalidInput("an edge appears in more than one coupling pair".into()));
        }
        Ok(())
    }

    /// `(ē^i + ē^j) / 2` with the current natural lengths.
    pub fn pair_length(&self, pair: &CouplingPair, top: &RodGeometry, bottom: &RodGeometry) -> f64 {
        0.5 * (top.rest_lengths[pair.top_edge] + bottom.rest_lengths[pair.bottom_edge])
    }
}

/// Nearest-midpoint pairing by rest arc length. The bottom rod starts at
/// arc length `bottom_start` along the top rod. Bottom edges whose midpoint
/// falls outside the top rod are left unpaired. Ties go to the lower-index top
/// edge. When two bottom edges pick
/// the same top edge the closer one keeps it.
pub fn pair_interface_edges(top: &RodGeometry, bottom: &RodGeometry, bottom_start: f64) -> Result<Vec<(usize, usize)>> {
    let mids = |lengths: &[f64], start: f64| -> Vec<f64> {
        let mut s = start;
        lengths
            .iter()
            .map(|l| {
                let m = s + 0.5 * l;
                s += l;
                m
            })
            .collect()
    };
    let tm = mids(&top.reference_lengths, 0.0);
    let bm = mids(&bottom.reference_lengths, bottom_start);
    let top_len = top.total_reference_length();
    let mut best: Vec<Option<(usize, f64)>> = alloc::vec![None; tm.len()];
    let tol = 1e-9 * top_len;
    let mut k = 0usize;
    for (j, s) in bm.iter().enumerate() {
        if *s < 0.0 || *s > top_len {
            continue;
        }
        // ties (within roundoff) stay on the lower edge, so a layer offset by
        // half an edge pairs with one uniform shift
        while k + 1 < tm.len() && (tm[k + 1] - s).abs() < (tm[k] - s).abs() - tol {
            k += 1;
        }
        let d = (tm[k] - s).abs();
        match best[k] {
            Some((_, bd)) if bd <= d => {}
            _ => best[k] = Some((j, d)),
        }
    }
    let pairs: Vec<(usize, usize)> = best.iter().enumerate().filter_map(|(i, b)| b.map(|(j, _)| (i, j))).collect();
    if pairs.is_empty() {
        return Err(SimError::InvalidInput("layers do not overlap: no interface pairs".into()));
    }
    Ok(pairs)
}

/// Centered placement of a shorter bottom rod.
pub fn centered_start(top: &RodGeometry, bottom: &RodGeometry) -> f64 {
    0.5 * (top.total_reference_length() - bottom.total_reference_length())
}

/// Everything a single pair element needs.
#[derive(Clone, Copy, Debug)]
pub struct PairInput {
    /// `x_i, x_{i+1}` of the top edge.
    pub top_nodes: [Vector3<f64>; 2],
    /// `x_j, x_{j+1}` of the bottom edge.
    pub bottom_nodes: [Vector3<f64>; 2],
    /// `θ^i, θ^j`.
    pub theta: [f64; 2],
    pub top_directors: PrevEdge,
    pub bottom_directors: PrevEdge,
    pub reference_twist: f64,
    pub length: f64,
}

struct PairTerms<T> {
    translation: T,
    rotation: T,
}

fn pair_terms<T: Real>(
    p: V3<T>,
    ei: V3<T>,
    ej: V3<T>,
    thi: T,
    thj: T,
    input: &PairInput,
    offset: &Vector3<f64>,
    natural: &[f64; 3],
    k_t: f64,
    k_r: f64,
) -> PairTerms<T> {
    let fi = edge_frame(ei, &input.top_directors, thi);
    let fj = edge_frame(ej, &input.bottom_directors, thj);
    let m1 = (fi.m1 + fj.m1).scale_f(0.5);
    let m2 = (fi.m2 + fj.m2).scale_f(0.5);
    let m3 = (fi.t + fj.t).scale_f(0.5);
    let translation =
        ((p.dot(m1) - offset.x).square() + (p.dot(m2) - offset.y).square() + (p.dot(m3) - offset.z).square())
            * (0.5 * k_t);
    let [chi, xi, tau] = strains_of_frames(&fi, &fj, thi, thj, input.reference_twist, input.length);
    let rotation = ((chi - natural[0]).square() + (xi - natural[1]).square() + (tau - natural[2]).square())
        * (0.5 * k_r * input.length);
    PairTerms { translation, rotation }
}

fn check_pair(input: &PairInput) -> Result<()> {
    let ei = input.top_nodes[1] - input.top_nodes[0];
    let ej = input.bottom_nodes[1] - input.bottom_nodes[0];
    if ei.norm_squared() == 0.0 || ej.norm_squared() == 0.0 {
        return Err(SimError::DegenerateEdge { rod: 0, edge: 0 });
    }
    check_turning(&ei, &ej, 0, 0)
}

/// Local DOF order of a pair gradient: `x_i, x_{i+1}, x_j, x_{j+1}`
/// (3 each), then `θ^i, θ^j`.
pub type PairGradient = [f64; 14];

fn local_gradient(g: &[f64; 11]) -> PairGradient {
    let mut out = [0.0; 14];
    for c in 0..3 {
        out[c] = 0.5 * g[c] - g[3 + c];
        out[3 + c] = 0.5 * g[c] + g[3 + c];
        out[6 + c] = -0.5 * g[c] - g[6 + c];
        out[9 + c] = -0.5 * g[c] + g[6 + c];
    }
    out[12] = g[9];
    out[13] = g[10];
    out
}

fn eval_dual(input: &PairInput, offset: &Vector3<f64>, natural: &[f64; 3], k_t: f64, k_r: f64) -> PairTerms<Dual<11>> {
    let p = 0.5 * (input.top_nodes[0] + input.top_nodes[1] - input.bottom_nodes[0] - input.bottom_nodes[1]);
    let ei = input.top_nodes[1] - input.top_nodes[0];
    let ej = input.bottom_nodes[1] - input.bottom_nodes[0];
    let s = |v: &Vector3<f64>, b: usize| {
        V3::new(Dual::variable(v.x, b), Dual::variable(v.y, b + 1), Dual::variable(v.z, b + 2))
    };
    pair_terms(
        s(&p, 0),
        s(&ei, 3),
        s(&ej, 6),
        Dual::variable(input.theta[0], 9),
        Dual::variable(input.theta[1], 10),
        input,
        offset,
        natural,
        k_t,
        k_r,
    )
}

/// Translation penalty energy of one pair and its gradient.
pub fn translation_penalty(input: &PairInput, offset: &Vector3<f64>, k_t: f64) -> Result<(f64, PairGradient)> {
    check_pair(input)?;
    let t = eval_dual(input, offset, &[0.0; 3], k_t, 0.0).translation;
    Ok((t.v, local_gradient(&t.g)))
}

/// Rotation penalty energy of one pair and its gradient.
pub fn rotation_penalty(input: &PairInput, natural: &[f64; 3], k_r: f64) -> Result<(f64, PairGradient)> {
    check_pair(input)?;
    let r = eval_dual(input, &Vector3::zeros(), natural, 0.0, k_r).rotation;
    Ok((r.v, local_gradient(&r.g)))
}

fn pair_input(asm: &Assembly, spec: &CouplingSpec, pair: &CouplingPair) -> PairInput {
    let (top, bottom) = (&asm.rods[spec.top], &asm.rods[spec.bottom]);
    let (i, j) = (pair.top_edge, pair.bottom_edge);
    PairInput {
        top_nodes: [top.state.position(i), top.state.position(i + 1)],
        bottom_nodes: [bottom.state.position(j), bottom.state.position(j + 1)],
        theta: [top.state.theta(i), bottom.state.theta(j)],
        top_directors: top.frames.directors(i),
        bottom_directors: bottom.frames.directors(j),
        reference_twist: pair.reference_twist,
        length: spec.pair_length(pair, &top.geometry, &bottom.geometry),
    }
}

fn check_assembly_pair(asm: &Assembly, spec: &CouplingSpec, index: usize, input: &PairInput) -> Result<()> {
    check_pair(input).map_err(|e| match e {
        SimError::CurvatureSingularity { turning_angle, .. } => {
            SimError::CurvatureSingularity { rod: spec.top, index, turning_angle }
        }
        _ => SimError::DegenerateEdge { rod: spec.top, edge: spec.pairs[index].top_edge },
    })?;
    let _ = asm;
    Ok(())
}

/// Coupling energy of every interface in `asm`.
pub fn coupling_energy(asm: &Assembly) -> Result<CouplingEnergy> {
    let mut out = CouplingEnergy::default();
    for spec in &asm.couplings {
        for (k, pair) in spec.pairs.iter().enumerate() {
            let input = pair_input(asm, spec, pair);
            check_assembly_pair(asm, spec, k, &input)?;
            let p = 0.5 * (input.top_nodes[0] + input.top_nodes[1] - input.bottom_nodes[0] - input.bottom_nodes[1]);
            let ei = input.top_nodes[1] - input.top_nodes[0];
            let ej = input.bottom_nodes[1] - input.bottom_nodes[0];
            let t = pair_terms::<f64>(
                V3::cst(&p),
                V3::cst(&ei),
                V3::cst(&ej),
                input.theta[0],
                input.theta[1],
                &input,
                &pair.offset,
                &pair.natural,
                spec.k_t,
                spec.k_r,
            );
            out.translation += t.translation;
            out.rotation += t.rotation;
        }
    }
    Ok(out)
}

/// Adds coupling gradients and second derivatives of every interface into
/// global storage and returns the energy.
pub fn coupling_total<S: HessianSink + ?Sized>(
    asm: &Assembly,
    grad: &mut [f64],
    sink: &mut S,
) -> Result<CouplingEnergy> {
    let mut out = CouplingEnergy::default();
    for spec in &asm.couplings {
        let (ot, ob) = (asm.offset(spec.top), asm.offset(spec.bottom));
        for (k, pair) in spec.pairs.iter().enumerate() {
            let input = pair_input(asm, spec, pair);
            check_assembly_pair(asm, spec, k, &input)?;
            let p = 0.5 * (input.top_nodes[0] + input.top_nodes[1] - input.bottom_nodes[0] - input.bottom_nodes[1]);
            let ei = input.top_nodes[1] - input.top_nodes[0];
            let ej = input.bottom_nodes[1] - input.bottom_nodes[0];
            // variables: p (0..3), e^i (3..6), e^j (6..9), θ^i (9), θ^j (10)
            let t = pair_terms::<Jet<11>>(
                seed3(&p, 0),
                seed3(&ei, 3),
                seed3(&ej, 6),
                Jet::variable(input.theta[0], 9),
                Jet::variable(input.theta[1], 10),
                &input,
                &pair.offset,
                &pair.natural,
                spec.k_t,
                spec.k_r,
            );
            out.translation += t.translation.v;
            out.rotation += t.rotation.v;
            let (i, j) = (pair.top_edge, pair.bottom_edge);
            let (a0, a1) = (ot + node_dof(i), ot + node_dof(i + 1));
            let (b0, b1) = (ob + node_dof(j), ob + node_dof(j + 1));
            let mut st = Stencil::<11>::new();
            for c in 0..3 {
                st.push(c, a0 + c, 0.5);
                st.push(c, a1 + c, 0.5);
                st.push(c, b0 + c, -0.5);
                st.push(c, b1 + c, -0.5);
                st.push(3 + c, a0 + c, -1.0);
                st.push(3 + c, a1 + c, 1.0);
                st.push(6 + c, b0 + c, -1.0);
                st.push(6 + c, b1 + c, 1.0);
            }
            st.push(9, ot + theta_dof(i), 1.0);
            st.push(10, ob + theta_dof(j), 1.0);
            st.scatter(&(t.translation + t.rotation), grad, sink);
        }
    }
    Ok(out)
}

/// Relative `(χ, ξ, τ)` and offset components `(p·m1, p·m2, p·m3)` of
/// every pair in the current configuration.
pub fn pair_measures(asm: &Assembly, spec: &CouplingSpec) -> Result<Vec<([f64; 3], Vector3<f64>)>> {
    spec.pairs
        .iter()
        .enumerate()
        .map(|(k, pair)| {
            let input = pair_input(asm, spec, pair);
            check_assembly_pair(asm, spec, k, &input)?;
            let ei = input.top_nodes[1] - input.top_nodes[0];
            let ej = input.bottom_nodes[1] - input.bottom_nodes[0];
            let fi = edge_frame(V3::<f64>::cst(&ei), &input.top_directors, input.theta[0]);
            let fj = edge_frame(V3::<f64>::cst(&ej), &input.bottom_directors, input.theta[1]);
            let s = strains_of_frames(&fi, &fj, input.theta[0], input.theta[1], input.reference_twist, input.length);
            let p = 0.5 * (input.top_nodes[0] + input.top_nodes[1] - input.bottom_nodes[0] - input.bottom_nodes[1]);
            let m1 = 0.5 * (fi.m1.values() + fj.m1.values());
            let m2 = 0.5 * (fi.m2.values() + fj.m2.values());
            let m3 = 0.5 * (fi.t.values() + fj.t.values());
            Ok((s, Vector3::new(p.dot(&m1), p.dot(&m2), p.dot(&m3))))
        })
        .collect()
}

/// Makes the current configuration the coupling rest state: offsets and
/// relative curvatures are set to their present values.
pub fn adopt_rest_configuration(asm: &mut Assembly) -> Result<()> {
    for c in 0..asm.couplings.len() {
        let m = pair_measures(asm, &asm.couplings[c])?;
        for (pair, (s, off)) in asm.couplings[c].pairs.iter_mut().zip(m) {
            pair.natural = s;
            pair.offset = off;
        }
    }
    Ok(())
}
