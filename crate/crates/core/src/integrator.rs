//! Implicit Euler with Newton iterations on the end-of-step positions.
//!
//! For a step of size `h` from `(q_k, v_k)` the unknown `q` solves
//!
//! ```text
//! M (q - q_k - h v_k) / h^2 + ∇E(q) - F(q, v) + c M v = 0,   v = (q - q_k) / h
//! ```
//!
//! with `c` a mass-proportional damping rate used only by [`Integrator::solve_static`].
//! The tangent is assembled on free DOFs, reordered with reverse
//! Cuthill-McKee and factored as a banded LU. Failed steps are retried as
//! two half steps, recursively.

use alloc::vec::Vec;

use crate::actuation::Actuator;
use crate::assembly::Assembly;
use crate::error::{Result, SimError};
use crate::external::{accumulate_external, contact_gap, Environment};
use crate::linalg::{reverse_cuthill_mckee, BandMatrix, PermutedBandSink};
use crate::rod::MAX_TURNING_ANGLE;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    /// Time step (s).
    pub dt: f64,
    /// Newton tolerance on the scaled residual.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Recursive halvings allowed per step.
    pub max_halvings: usize,
    /// Global DOFs held at their current values.
    pub fixed: Vec<usize>,
    /// Mass-proportional damping rate (1/s).
    pub damping: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { dt: 1e-3, tolerance: 1e-6, max_iterations: 30, max_halvings: 8, fixed: Vec::new(), damping: 0.0 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.tolerance > 0.0 && self.max_iterations > 0) {
            return Err(SimError::InvalidInput("time step, tolerance and iteration cap must be positive".into()));
        }
        if !(self.damping >= 0.0) {
            return Err(SimError::InvalidInput("damping must be non-negative".into()));
        }
        Ok(())
    }
}

/// Outcome of one call to [`Integrator::step`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    pub newton_iterations: usize,
    pub substeps: usize,
    pub smallest_dt: f64,
    pub residual: f64,
}

/// Settings for quasi-static relaxation.
#[derive(Clone, Debug, PartialEq)]
pub struct StaticConfig {
    /// First pseudo-time step; grows after easy steps.
    pub dt: f64,
    pub dt_max: f64,
    /// Step cap while `t < actuation_end`, so a ramp is followed in
    /// increments.
    pub ramp_dt: f64,
    pub actuation_end: f64,
    pub damping: f64,
    pub max_steps: usize,
    /// Absolute kinetic energy threshold (J).
    pub kinetic_tolerance: f64,
    pub residual_tolerance: f64,
}

impl Default for StaticConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            dt_max: 1e3,
            ramp_dt: 0.1,
            actuation_end: 0.0,
            damping: 10.0,
            max_steps: 2000,
            kinetic_tolerance: 1e-12,
            residual_tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StaticReport {
    pub steps: usize,
    pub newton_iterations: usize,
    pub residual: f64,
    pub kinetic: f64,
}

/// Lumped mass for every DOF of `asm`.
pub fn build_mass_matrix(asm: &Assembly) -> Vec<f64> {
    asm.lumped_mass()
}

/// Stepper with cached mass, DOF ordering and band storage.
pub struct Integrator {
    pub config: IntegratorConfig,
    mass: Vec<f64>,
    free: Vec<Option<usize>>,
    band: BandMatrix,
    force_scale: f64,
}

struct Attempt {
    iterations: usize,
    residual: f64,
}

impl Integrator {
    pub fn new(asm: &Assembly, config: IntegratorConfig) -> Result<Self> {
        config.validate()?;
        let n = asm.dof_count();
        let mut is_fixed = alloc::vec![false; n];
        for &d in &config.fixed {
            if d >= n {
                return Err(SimError::InvalidInput(alloc::format!("fixed DOF {d} out of range")));
            }
            is_fixed[d] = true;
        }
        let free_list: Vec<usize> = (0..n).filter(|&d| !is_fixed[d]).collect();
        let mut local = alloc::vec![usize::MAX; n];
        for (k, &d) in free_list.iter().enumerate() {
            local[d] = k;
        }
        let full = asm.adjacency();
        let adj: Vec<Vec<usize>> =
            free_list.iter().map(|&d| full[d].iter().filter(|&&e| !is_fixed[e]).map(|&e| local[e]).collect()).collect();
        let perm = reverse_cuthill_mckee(&adj);
        let mut bw = 0;
        for (a, nb) in adj.iter().enumerate() {
            for &b in nb {
                bw = bw.max(perm[a].abs_diff(perm[b]));
            }
        }
        let mut free = alloc::vec![None; n];
        for (k, &d) in free_list.iter().enumerate() {
            free[d] = Some(perm[k]);
        }
        let mass = build_mass_matrix(asm);
        if free_list.iter().any(|&d| !(mass[d] > 0.0)) {
            return Err(SimError::InvalidInput("free DOF without mass".into()));
        }
        let force_scale = asm.rods.iter().flat_map(|r| r.geometry.ea.iter().copied()).fold(0.0, f64::max) * 1e-6;
        Ok(Self { config, mass, free, band: BandMatrix::new(free_list.len(), bw, bw), force_scale })
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Half bandwidth of the reordered tangent.
    pub fn bandwidth(&self) -> usize {
        self.band.bandwidths().0
    }

    /// Advances `asm` by `config.dt`.
    pub fn step(&mut self, asm: &mut Assembly, env: &Environment, actuator: &mut dyn Actuator) -> Result<StepReport> {
        let mut report = StepReport { smallest_dt: self.config.dt, ..Default::default() };
        let damping = self.config.damping;
        let dt = self.config.dt;
        self.advance(asm, env, actuator, dt, 0, damping, &mut report)?;
        Ok(report)
    }

    #[allow(clippy::too_many_arguments)]
    fn advance(
        &mut self,
        asm: &mut Assembly,
        env: &Environment,
        actuator: &mut dyn Actuator,
        h: f64,
        depth: usize,
        damping: f64,
        report: &mut StepReport,
    ) -> Result<()> {
        let t0 = asm.time;
        actuator.apply(t0 + h, asm);
        let q0 = asm.q();
        let v0 = asm.v();
        match self.newton(asm, env, h, damping, &q0, &v0) {
            Ok(a) => {
                asm.refresh_frames()?;
                asm.time = t0 + h;
                report.newton_iterations += a.iterations;
                report.substeps += 1;
                report.smallest_dt = report.smallest_dt.min(h);
                report.residual = report.residual.max(a.residual);
                Ok(())
            }
            Err(err) => {
                asm.set_q(&q0);
                asm.set_v(&v0);
                actuator.apply(t0, asm);
                if depth >= self.config.max_halvings {
                    return Err(SimError::StepFailed { time: t0, dt: h, cause: alloc::format!("{err}") });
                }
                self.advance(asm, env, actuator, 0.5 * h, depth + 1, damping, report)?;
                self.advance(asm, env, actuator, 0.5 * h, depth + 1, damping, report)
            }
        }
    }

    fn newton(
        &mut self,
        asm: &mut Assembly,
        env: &Environment,
        h: f64,
        damping: f64,
        q0: &[f64],
        v0: &[f64],
    ) -> Result<Attempt> {
        let n = q0.len();
        let mut q: Vec<f64> = q0.to_vec();
        let predictor: Vec<f64> = (0..n).map(|d| if self.free[d].is_some() { h * v0[d] } else { 0.0 }).collect();
        let alpha = self.feasible_fraction(asm, env, &q, &predictor);
        for d in 0..n {
            q[d] += alpha * predictor[d];
        }
        let mut grad = alloc::vec![0.0; n];
        let mut fext = alloc::vec![0.0; n];
        let mut rhs = alloc::vec![0.0; self.band.dim()];
        let mut v = alloc::vec![0.0; n];
        let inv_h = 1.0 / h;
        for it in 0..=self.config.max_iterations {
            for d in 0..n {
                v[d] = if self.free[d].is_some() { (q[d] - q0[d]) * inv_h } else { 0.0 };
            }
            asm.set_q(&q);
            asm.set_v(&v);
            grad.iter_mut().for_each(|g| *g = 0.0);
            fext.iter_mut().for_each(|f| *f = 0.0);
            self.band.clear();
            {
                let mut sink = PermutedBandSink { band: &mut self.band, perm: &self.free };
                asm.gradient_hessian(&mut grad, &mut sink)?;
                accumulate_external(asm, env, &mut fext, Some((&mut sink, -1.0, -inv_h)))?;
            }
            let (mut res, mut inertial_max, mut grad_max) = (0.0f64, 0.0f64, 0.0f64);
            for d in 0..n {
                if let Some(k) = self.free[d] {
                    let m = self.mass[d];
                    let inertial = m * (q[d] - q0[d] - h * v0[d]) * inv_h * inv_h;
                    let r = inertial + grad[d] - fext[d] + damping * m * v[d];
                    rhs[k] = -r;
                    res = res.max(r.abs());
                    inertial_max = inertial_max.max(inertial.abs());
                    grad_max = grad_max.max(grad[d].abs());
                    self.band.add(k, k, m * inv_h * inv_h + damping * m * inv_h);
                }
            }
            let scale = inertial_max.max(grad_max).max(self.force_scale).max(f64::MIN_POSITIVE);
            let scaled = res / scale;
            if !scaled.is_finite() {
                return Err(SimError::NewtonDiverged { iterations: it, residual: scaled });
            }
            if scaled <= self.config.tolerance {
                return Ok(Attempt { iterations: it, residual: scaled });
            }
            if it == self.config.max_iterations {
                return Err(SimError::NewtonDiverged { iterations: it, residual: scaled });
            }
            self.band.factor()?;
            self.band.solve(&mut rhs);
            let mut dq = alloc::vec![0.0; n];
            for d in 0..n {
                if let Some(k) = self.free[d] {
                    dq[d] = rhs[k];
                }
            }
            // A correction at the rounding level of q cannot reduce the
            // residual further.
            let step_max = dq.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let q_max = q.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            if step_max <= 8.0 * f64::EPSILON * q_max.max(1e-3) {
                return Ok(Attempt { iterations: it + 1, residual: scaled });
            }
            let alpha = self.feasible_fraction(asm, env, &q, &dq);
            if alpha == 0.0 {
                return Err(SimError::NewtonDiverged { iterations: it, residual: scaled });
            }
            for d in 0..n {
                q[d] += alpha * dq[d];
            }
        }
        unreachable!()
    }

    /// Largest `α = 2^-k <= 1` such that `q + α dq` keeps every contact gap
    /// above a fifth of its current value (for nodes inside the barrier
    /// range) and leaves every edge valid. Returns 0 if none is found.
    fn feasible_fraction(&self, asm: &Assembly, env: &Environment, q: &[f64], dq: &[f64]) -> f64 {
        let mut alpha = 1.0;
        let check_contact = env.flags.contact && !env.surfaces.is_empty();
        let cos_max = libm::cos(MAX_TURNING_ANGLE);
        'outer: for _ in 0..40 {
            for (r, rod) in asm.rods.iter().enumerate() {
                let o = asm.offset(r);
                let pos = |qq: &[f64], i: usize, a: f64| {
                    let k = o + 4 * i;
                    nalgebra::Vector3::new(qq[k] + a * dq[k], qq[k + 1] + a * dq[k + 1], qq[k + 2] + a * dq[k + 2])
                };
                let nn = rod.node_count();
                for i in 0..nn {
                    let x_new = pos(q, i, alpha);
                    if check_contact {
                        let x_old = pos(q, i, 0.0);
                        for s in &env.surfaces {
                            let (g_new, _) = contact_gap(&x_new, &s.primitive);
                            if g_new >= env.barrier_distance {
                                continue;
                            }
                            let (g_old, _) = contact_gap(&x_old, &s.primitive);
                            if g_new <= 0.2 * g_old.min(env.barrier_distance) {
                                alpha *= 0.5;
                                continue 'outer;
                            }
                        }
                    }
                    if i + 1 < nn {
                        let e = pos(q, i + 1, alpha) - x_new;
                        let l = e.norm();
                        let t_prev = rod.frames.tangents[i];
                        let ok = l > 0.0 && e.dot(&t_prev) > cos_max * l;
                        let ok = ok
                            && (i == 0 || {
                                let ep = x_new - pos(q, i - 1, alpha);
                                e.dot(&ep) > cos_max * l * ep.norm()
                            });
                        if !ok {
                            alpha *= 0.5;
                            continue 'outer;
                        }
                    }
                }
            }
            return alpha;
        }
        0.0
    }

    /// Scaled residual of the static equations `∇E = F(q, 0)` at the
    /// current configuration.
    pub fn static_residual(&self, asm: &mut Assembly, env: &Environment) -> Result<f64> {
        let n = asm.dof_count();
        let v = asm.v();
        asm.set_v(&alloc::vec![0.0; n]);
        let mut grad = alloc::vec![0.0; n];
        let mut fext = alloc::vec![0.0; n];
        let mut sink = crate::linalg::NullSink;
        let out = asm
            .gradient_hessian(&mut grad, &mut sink)
            .and_then(|_| accumulate_external::<crate::linalg::NullSink>(asm, env, &mut fext, None));
        asm.set_v(&v);
        out?;
        let (mut res, mut scale) = (0.0f64, self.force_scale);
        for d in 0..n {
            if self.free[d].is_some() {
                res = res.max((grad[d] - fext[d]).abs());
                scale = scale.max(grad[d].abs()).max(fext[d].abs());
            }
        }
        Ok(res / scale)
    }

    /// Damped pseudo-time stepping until the configuration is static.
    ///
    /// Steps start at `cfg.dt`, double after steps needing few Newton
    /// iterations (capped by `cfg.ramp_dt` while actuation is still
    /// changing, and by `cfg.dt_max`), and halve on failure.
    pub fn solve_static(
        &mut self,
        asm: &mut Assembly,
        env: &Environment,
        actuator: &mut dyn Actuator,
        cfg: &StaticConfig,
    ) -> Result<StaticReport> {
        let mut report = StaticReport::default();
        let settled = |this: &Self, asm: &mut Assembly| -> Result<(bool, f64, f64)> {
            let kinetic = asm.kinetic_energy(&this.mass);
            let residual = this.static_residual(asm, env)?;
            Ok((kinetic <= cfg.kinetic_tolerance && residual <= cfg.residual_tolerance, residual, kinetic))
        };
        actuator.apply(asm.time, asm);
        if asm.time >= cfg.actuation_end {
            let (ok, residual, kinetic) = settled(self, asm)?;
            if ok {
                report.residual = residual;
                report.kinetic = kinetic;
                return Ok(report);
            }
        }
        let mut h = cfg.dt;
        let h_min = cfg.dt * libm::pow(0.5, self.config.max_halvings as f64);
        while report.steps < cfg.max_steps {
            let mut hh = h;
            if asm.time < cfg.actuation_end {
                hh = hh.min(cfg.ramp_dt).min(cfg.actuation_end - asm.time);
            }
            let t0 = asm.time;
            actuator.apply(t0 + hh, asm);
            let q0 = asm.q();
            let v0 = asm.v();
            match self.newton(asm, env, hh, cfg.damping, &q0, &v0) {
                Ok(a) => {
                    asm.refresh_frames()?;
                    asm.time = t0 + hh;
                    report.steps += 1;
                    report.newton_iterations += a.iterations;
                    if a.iterations <= 6 {
                        h = (2.0 * h).min(cfg.dt_max);
                    }
                    if asm.time >= cfg.actuation_end {
                        let (ok, residual, kinetic) = settled(self, asm)?;
                        report.residual = residual;
                        report.kinetic = kinetic;
                        if ok {
                            return Ok(report);
                        }
                    }
                }
                Err(_) => {
                    asm.set_q(&q0);
                    asm.set_v(&v0);
                    actuator.apply(t0, asm);
                    h = 0.5 * hh;
                    if h < h_min {
                        return Err(SimError::StaticNotConverged {
                            steps: report.steps,
                            kinetic: asm.kinetic_energy(&self.mass),
                            residual: report.residual,
                        });
                    }
                }
            }
        }
        Err(SimError::StaticNotConverged { steps: report.steps, kinetic: report.kinetic, residual: report.residual })
    }
}

/// One step of `config.dt` with a freshly built [`Integrator`].
pub fn step(
    asm: &mut Assembly,
    env: &Environment,
    actuator: &mut dyn Actuator,
    config: &IntegratorConfig,
) -> Result<StepReport> {
    Integrator::new(asm, config.clone())?.step(asm, env, actuator)
}
