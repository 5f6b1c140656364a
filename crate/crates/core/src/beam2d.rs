//! Planar bilayer beam with the interface as its centerline.
//!
//! Each node carries a stretch `ε_i` (mean of the adjacent edge strains),
//! a signed curvature `κ_i` and an actuation strain `η_i` of the top layer.
//! The top layer occupies `z ∈ [0, h1]` above the interface and the bottom
//! layer `z ∈ [-h2, 0]`, with axial strains `ε - η + κz` and `ε + κz`.
//! Positive `κ` lengthens the top fibres, so with the interface running
//! along `+x` and the top layer on its `+y` side the beam then curves
//! towards `-y`.

use alloc::vec::Vec;

use crate::error::{Result, SimError};
use crate::jet::{Jet, Real};
use crate::linalg::BandMatrix;

/// Materials and cross-section of the two layers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Layers2D {
    pub e1: f64,
    pub e2: f64,
    pub h1: f64,
    pub h2: f64,
    pub width: f64,
}

impl Layers2D {
    pub fn validate(&self) -> Result<()> {
        let ok = self.e1 > 0.0 && self.e2 >= 0.0 && self.h1 > 0.0 && self.h2 >= 0.0 && self.width > 0.0;
        if !ok || [self.e1, self.e2, self.h1, self.h2, self.width].iter().any(|x| !x.is_finite()) {
            return Err(SimError::InvalidInput(
                "layer moduli, thicknesses and width must be finite, top layer positive".into(),
            ));
        }
        Ok(())
    }

    pub fn total_thickness(&self) -> f64 {
        self.h1 + self.h2
    }
}

/// Elastic energy of one node: the through-thickness integral of
/// `½ E w strain²` over both layers, times `dl`.
pub fn node_energy_2d(eps: f64, kappa: f64, eta: f64, layers: &Layers2D, dl: f64) -> f64 {
    node_energy(eps, kappa, eta, layers, dl)
}

fn node_energy<T: Real>(eps: T, kappa: T, eta: f64, p: &Layers2D, dl: f64) -> T {
    let (h1, h2) = (p.h1, p.h2);
    let top = (kappa * kappa) * (h1 * h1) - kappa * (3.0 * h1 * eta) - eps * (6.0 * eta)
        + kappa * eps * (3.0 * h1)
        + eps * eps * 3.0
        + 3.0 * eta * eta;
    let bottom = (kappa * kappa) * (h2 * h2) - eps * kappa * (3.0 * h2) + eps * eps * 3.0;
    top * (p.e1 * p.width * h1 * dl / 6.0) + bottom * (p.e2 * p.width * h2 * dl / 6.0)
}

/// `κh/η` of a uniformly actuated free bilayer, from the stationarity
/// conditions `∂E/∂ε = ∂E/∂κ = 0` of [`node_energy_2d`].
pub fn stationary_curvature(layers: &Layers2D) -> f64 {
    let Layers2D { e1, e2, h1, h2, .. } = *layers;
    let (a, b) = (e1 * h1, e2 * h2);
    // ∂E/∂ε: (6a + 6b) ε + (3a h1 - 3b h2) κ = 6a η
    // ∂E/∂κ: (3a h1 - 3b h2) ε + (2a h1² + 2b h2²) κ = 3a h1 η
    let (m11, m12, m22) = (6.0 * (a + b), 3.0 * (a * h1 - b * h2), 2.0 * (a * h1 * h1 + b * h2 * h2));
    let (r1, r2) = (6.0 * a, 3.0 * a * h1);
    let kappa = (m11 * r2 - m12 * r1) / (m11 * m22 - m12 * m12);
    kappa * (h1 + h2)
}

/// Classical bimetal curvature `6(1+m)² / [3(1+m)² + (1+mn)(m² + 1/(mn))]`.
///
/// The through-thickness energy of this module (and the coupled rod model)
/// reproduces it with `m = h1/h2` and `n = E1/E2`; see
/// [`stationary_curvature`].
pub fn timoshenko_curvature(m: f64, n: f64) -> f64 {
    let a = (1.0 + m) * (1.0 + m);
    6.0 * a / (3.0 * a + (1.0 + m * n) * (m * m + 1.0 / (m * n)))
}

/// Interface nodes, rest lengths and per-node actuation.
#[derive(Clone, Debug, PartialEq)]
pub struct Beam2DState {
    pub positions: Vec<[f64; 2]>,
    pub rest_lengths: Vec<f64>,
    pub eta: Vec<f64>,
    /// Dead load on each node (N).
    pub loads: Vec<[f64; 2]>,
    pub layers: Layers2D,
}

impl Beam2DState {
    /// Straight beam of `nodes` nodes along `+x`, unactuated and unloaded.
    pub fn straight(length: f64, nodes: usize, layers: Layers2D) -> Result<Self> {
        layers.validate()?;
        if nodes < 3 || !(length > 0.0) {
            return Err(SimError::InvalidInput("beam needs >= 3 nodes and positive length".into()));
        }
        let dl = length / (nodes - 1) as f64;
        Ok(Self {
            positions: (0..nodes).map(|i| [i as f64 * dl, 0.0]).collect(),
            rest_lengths: alloc::vec![dl; nodes - 1],
            eta: alloc::vec![0.0; nodes],
            loads: alloc::vec![[0.0; 2]; nodes],
            layers,
        })
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    fn check(&self) -> Result<()> {
        self.layers.validate()?;
        let n = self.node_count();
        if n < 3 || self.rest_lengths.len() != n - 1 || self.eta.len() != n || self.loads.len() != n {
            return Err(SimError::InvalidInput("beam arrays have inconsistent sizes".into()));
        }
        if self.rest_lengths.iter().any(|l| !(*l > 0.0)) {
            return Err(SimError::InvalidInput("beam rest lengths must be positive".into()));
        }
        if self.eta.iter().any(|e| !(*e > -1.0)) {
            return Err(SimError::InvalidInput("actuation strain must exceed -1".into()));
        }
        Ok(())
    }

    /// Length attributed to node `i` (half of each adjacent rest edge).
    pub fn voronoi_length(&self, i: usize) -> f64 {
        let l = &self.rest_lengths;
        let mut s = 0.0;
        if i > 0 {
            s += 0.5 * l[i - 1];
        }
        if i < l.len() {
            s += 0.5 * l[i];
        }
        s
    }

    pub fn edge_strains(&self) -> Vec<f64> {
        (0..self.rest_lengths.len())
            .map(|e| {
                let (a, b) = (self.positions[e], self.positions[e + 1]);
                libm::hypot(b[0] - a[0], b[1] - a[1]) / self.rest_lengths[e] - 1.0
            })
            .collect()
    }

    /// `κ_i` at every node (zero at the ends).
    pub fn curvatures(&self) -> Vec<f64> {
        let n = self.node_count();
        let mut k = alloc::vec![0.0; n];
        for (i, ki) in k.iter_mut().enumerate().take(n - 1).skip(1) {
            let x: [f64; 6] = core::array::from_fn(|j| self.positions[i - 1 + j / 2][j % 2]);
            *ki = curvature(&x, self.voronoi_length(i));
        }
        k
    }

    /// Total elastic energy minus the work of the dead loads.
    pub fn energy(&self) -> f64 {
        let n = self.node_count();
        let mut e = 0.0;
        for i in 0..n {
            e += self.node_terms::<f64>(i, |j| self.positions[j / 2][j % 2]);
            e -= self.loads[i][0] * self.positions[i][0] + self.loads[i][1] * self.positions[i][1];
        }
        e
    }

    /// First DOF of the 3-node stencil used for node `i`.
    fn stencil_start(&self, i: usize) -> usize {
        i.saturating_sub(1).min(self.node_count() - 3)
    }

    /// Energy of node `i`, reading coordinates through `x(global_dof)`.
    fn node_terms<T: Real>(&self, i: usize, x: impl Fn(usize) -> T) -> T {
        let n = self.node_count();
        let dl = self.voronoi_length(i);
        let edge = |e: usize| {
            let dx = x(2 * e + 2) - x(2 * e);
            let dy = x(2 * e + 3) - x(2 * e + 1);
            (dx, dy)
        };
        let strain = |e: usize| {
            let (dx, dy) = edge(e);
            (dx * dx + dy * dy).sqrt() / self.rest_lengths[e] - 1.0
        };
        let eta = self.eta[i];
        if i == 0 || i == n - 1 {
            let eps = strain(if i == 0 { 0 } else { n - 2 });
            return node_energy(eps, T::cst(0.0), eta, &self.layers, dl);
        }
        let eps = (strain(i - 1) + strain(i)) * 0.5;
        let (ax, ay) = edge(i - 1);
        let (bx, by) = edge(i);
        let la = (ax * ax + ay * ay).sqrt();
        let lb = (bx * bx + by * by).sqrt();
        let tan2 = (ax * by - ay * bx) * 2.0 / (la * lb + ax * bx + ay * by);
        let kappa = -tan2 / dl;
        node_energy(eps, kappa, eta, &self.layers, dl)
    }

    /// Gradient and banded Hessian of [`energy`](Self::energy) in the DOF
    /// order `[x0, y0, x1, y1, ...]`.
    fn gradient_hessian(&self, grad: &mut [f64], band: &mut BandMatrix) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        band.clear();
        let mut e = 0.0;
        for i in 0..self.node_count() {
            let s = 2 * self.stencil_start(i);
            let jet: Jet<6> = self.node_terms(i, |d| {
                let v = self.positions[d / 2][d % 2];
                if d >= s && d < s + 6 {
                    Jet::variable(v, d - s)
                } else {
                    Jet::constant(v)
                }
            });
            e += jet.v;
            for a in 0..6 {
                grad[s + a] += jet.g[a];
                for b in 0..6 {
                    band.add(s + a, s + b, jet.hess(a, b));
                }
            }
            e -= self.loads[i][0] * self.positions[i][0] + self.loads[i][1] * self.positions[i][1];
            grad[2 * i] -= self.loads[i][0];
            grad[2 * i + 1] -= self.loads[i][1];
        }
        e
    }
}

fn curvature(x: &[f64; 6], dl: f64) -> f64 {
    let (ax, ay, bx, by) = (x[2] - x[0], x[3] - x[1], x[4] - x[2], x[5] - x[3]);
    let tan2 = 2.0 * (ax * by - ay * bx) / (libm::hypot(ax, ay) * libm::hypot(bx, by) + ax * bx + ay * by);
    -tan2 / dl
}

/// Fixed DOFs of the planar problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Support2D {
    pub fixed: Vec<usize>,
}

impl Support2D {
    /// Node 0 fully and node 1 vertically: a clamp at the start that still
    /// lets the first edge stretch.
    pub fn clamped_start() -> Self {
        Self { fixed: alloc::vec![0, 1, 3] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Solve2DOptions {
    /// Equal increments of the actuation and loads.
    pub increments: usize,
    pub max_iterations: usize,
    /// Convergence on `|∇E|∞` relative to `max(E_i h_i) w · max(|η|, 1e-3)`.
    pub tolerance: f64,
}

impl Default for Solve2DOptions {
    fn default() -> Self {
        Self { increments: 10, max_iterations: 100, tolerance: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Beam2DSolution {
    pub state: Beam2DState,
    pub curvatures: Vec<f64>,
    pub iterations: usize,
}

/// Minimizes the energy of `initial` with the actuation `eta` and its own
/// dead loads, both ramped from zero in `options.increments` steps. Each
/// increment runs damped Newton with a backtracking energy decrease.
pub fn solve_equilibrium_2d(
    initial: &Beam2DState,
    eta: &[f64],
    support: &Support2D,
    options: &Solve2DOptions,
) -> Result<Beam2DSolution> {
    initial.check()?;
    let n = initial.node_count();
    if eta.len() != n || eta.iter().any(|e| !(*e > -1.0)) {
        return Err(SimError::InvalidInput("actuation profile must give one value > -1 per node".into()));
    }
    let dofs = 2 * n;
    let mut fixed = alloc::vec![false; dofs];
    for &d in &support.fixed {
        if d >= dofs {
            return Err(SimError::InvalidInput("fixed DOF out of range".into()));
        }
        fixed[d] = true;
    }
    let p = initial.layers;
    let eta_scale = eta.iter().fold(0.0f64, |a, e| a.max(e.abs())).max(1e-3);
    let load_scale = initial.loads.iter().flat_map(|l| l.iter()).fold(0.0f64, |a, f| a.max(f.abs()));
    let force_scale = (p.e1 * p.h1).max(p.e2 * p.h2) * p.width * eta_scale + load_scale;
    let tol = options.tolerance * force_scale;

    let mut state = initial.clone();
    let loads = initial.loads.clone();
    let mut grad = alloc::vec![0.0; dofs];
    let mut band = BandMatrix::new(dofs, 5, 5);
    let mut iterations = 0;
    let steps = options.increments.max(1);
    for k in 1..=steps {
        let s = k as f64 / steps as f64;
        for i in 0..n {
            state.eta[i] = s * eta[i];
            state.loads[i] = [s * loads[i][0], s * loads[i][1]];
        }
        let mut lambda = 0.0;
        let mut converged = false;
        for _ in 0..options.max_iterations {
            let e0 = state.gradient_hessian(&mut grad, &mut band);
            let mut res = 0.0f64;
            for d in 0..dofs {
                if !fixed[d] {
                    res = res.max(grad[d].abs());
                }
            }
            if res <= tol {
                converged = true;
                break;
            }
            iterations += 1;
            let stiff = (0..dofs).fold(0.0f64, |a, d| a.max(band.get(d, d).abs()));
            let mut accepted = false;
            for _ in 0..30 {
                let mut m = band.clone();
                let mut rhs = alloc::vec![0.0; dofs];
                for d in 0..dofs {
                    if fixed[d] {
                        for j in d.saturating_sub(5)..(d + 6).min(dofs) {
                            m.add(d, j, -m.get(d, j));
                            m.add(j, d, -m.get(j, d));
                        }
                        m.add(d, d, 1.0);
                    } else {
                        m.add(d, d, lambda * stiff);
                        rhs[d] = -grad[d];
                    }
                }
                if m.factor().is_ok() {
                    m.solve(&mut rhs);
                    let trial = displaced(&state, &rhs, 1.0);
                    let e1 = trial.energy();
                    let decrease: f64 = rhs.iter().zip(&grad).map(|(a, b)| a * b).sum();
                    if e1.is_finite() && e1 <= e0 + 1e-4 * decrease + 1e-15 * e0.abs() {
                        state = trial;
                        accepted = true;
                        lambda *= 0.1;
                        if lambda < 1e-12 {
                            lambda = 0.0;
                        }
                        break;
                    }
                }
                lambda = if lambda == 0.0 { 1e-8 } else { lambda * 10.0 };
            }
            if !accepted {
                break;
            }
        }
        if !converged {
            let mut res = 0.0f64;
            state.gradient_hessian(&mut grad, &mut band);
            for d in 0..dofs {
                if !fixed[d] {
                    res = res.max(grad[d].abs());
                }
            }
            return Err(SimError::NewtonDiverged { iterations, residual: res / force_scale });
        }
    }
    let curvatures = state.curvatures();
    Ok(Beam2DSolution { state, curvatures, iterations })
}

fn displaced(state: &Beam2DState, dx: &[f64], alpha: f64) -> Beam2DState {
    let mut s = state.clone();
    for (i, p) in s.positions.iter_mut().enumerate() {
        p[0] += alpha * dx[2 * i];
        p[1] += alpha * dx[2 * i + 1];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Layers2D {
        Layers2D { e1: 1.0, e2: 1.0, h1: 1.0, h2: 1.0, width: 1.0 }
    }

    #[test]
    fn energy_examples() {
        assert_eq!(node_energy_2d(0.0, 0.0, 0.0, &unit(), 1.0), 0.0);
        assert!((node_energy_2d(0.1, 0.0, 0.0, &unit(), 1.0) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let p = Layers2D { e1: 3.0, e2: 1.7, h1: 0.4, h2: 0.9, width: 0.6 };
        let (eps, kappa, eta, dl) = (0.013, -0.31, 0.02, 0.7);
        // Gauss-Legendre with 3 points is exact for the quadratic integrand.
        let gl = [(-libm::sqrt(0.6), 5.0 / 9.0), (0.0, 8.0 / 9.0), (libm::sqrt(0.6), 5.0 / 9.0)];
        let integrate = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| {
            gl.iter().map(|(x, w)| w * f(0.5 * (a + b) + 0.5 * (b - a) * x)).sum::<f64>() * 0.5 * (b - a)
        };
        let top = integrate(0.0, p.h1, &|z| 0.5 * p.e1 * p.width * (eps - eta + kappa * z).powi(2));
        let bottom = integrate(-p.h2, 0.0, &|z| 0.5 * p.e2 * p.width * (eps + kappa * z).powi(2));
        let closed = node_energy_2d(eps, kappa, eta, &p, dl);
        assert!((closed - (top + bottom) * dl).abs() < 1e-10);
    }

    #[test]
    fn timoshenko_examples() {
        assert!((timoshenko_curvature(1.0, 1.0) - 1.5).abs() < 1e-15);
        assert!((timoshenko_curvature(2.0, 1.0) - 4.0 / 3.0).abs() < 1e-14);
        assert!(timoshenko_curvature(1.0, 1e9) < 1e-6);
    }

    #[test]
    fn straight_when_unactuated() {
        let b = Beam2DState::straight(1.0, 11, unit()).unwrap();
        let s = solve_equilibrium_2d(&b, &[0.0; 11], &Support2D::clamped_start(), &Solve2DOptions::default()).unwrap();
        assert!(s.curvatures.iter().all(|k| k.abs() < 1e-14));
    }
}
