//! Prescribed natural-strain schedules.
//!
//! Actuation rewrites natural edge lengths (`ē = ē_ref (1 + η(t))`) and
//! natural curvatures of selected elements before each implicit solve.

use alloc::vec::Vec;
use core::ops::Range;

use crate::assembly::Assembly;
use crate::error::{Result, SimError};

/// Hook called with the end time of every (sub)step before it is solved.
pub trait Actuator {
    fn apply(&mut self, t: f64, asm: &mut Assembly);
}

impl<F: FnMut(f64, &mut Assembly)> Actuator for F {
    fn apply(&mut self, t: f64, asm: &mut Assembly) {
        self(t, asm)
    }
}

/// Leaves the assembly untouched.
pub struct NoActuation;

impl Actuator for NoActuation {
    fn apply(&mut self, _: f64, _: &mut Assembly) {}
}

/// Scalar time profile.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// Linear from `from` at `start` to `to` at `end`, held outside.
    Ramp {
        from: f64,
        to: f64,
        start: f64,
        end: f64,
    },
    /// Linear interpolation through `(t, value)` knots, held outside.
    PiecewiseLinear(Vec<(f64, f64)>),
    Sinusoid {
        mean: f64,
        amplitude: f64,
        period: f64,
        phase: f64,
    },
    /// Periodic cycle between `low` and `high` starting at `start`. Each
    /// period spends the fractions `rise`, `hold`, `fall` rising, holding
    /// high and falling (raised-cosine transitions), and rests low for the
    /// remainder.
    Cycle {
        low: f64,
        high: f64,
        period: f64,
        rise: f64,
        hold: f64,
        fall: f64,
        start: f64,
    },
}

fn raised(x: f64) -> f64 {
    0.5 * (1.0 - libm::cos(core::f64::consts::PI * x))
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Profile::Constant(v) => *v,
            Profile::Ramp { from, to, start, end } => {
                if t <= *start {
                    *from
                } else if t >= *end {
                    *to
                } else {
                    from + (to - from) * (t - start) / (end - start)
                }
            }
            Profile::PiecewiseLinear(knots) => {
                let first = knots[0];
                if t <= first.0 {
                    return first.1;
                }
                for w in knots.windows(2) {
                    let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                    if t <= t1 {
                        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
                    }
                }
                knots[knots.len() - 1].1
            }
            Profile::Sinusoid { mean, amplitude, period, phase } => {
                mean + amplitude * libm::sin(core::f64::consts::TAU * t / period + phase)
            }
            Profile::Cycle { low, high, period, rise, hold, fall, start } => {
                if t <= *start {
                    return *low;
                }
                let phi = libm::fmod(t - start, *period) / period;
                let a = if phi < *rise {
                    raised(phi / rise)
                } else if phi < rise + hold {
                    1.0
                } else if phi < rise + hold + fall {
                    1.0 - raised((phi - rise - hold) / fall)
                } else {
                    0.0
                };
                low + (high - low) * a
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::InvalidInput(m.into()));
        match self {
            Profile::Ramp { start, end, .. } if !(end > start) => bad("ramp end must follow its start"),
            Profile::PiecewiseLinear(k) if k.is_empty() || k.windows(2).any(|w| !(w[1].0 > w[0].0)) => {
                bad("piecewise-linear knots must be non-empty with increasing times")
            }
            Profile::Sinusoid { period, .. } if !(*period > 0.0) => bad("sinusoid period must be positive"),
            Profile::Cycle { period, rise, hold, fall, .. }
                if !(*period > 0.0 && *rise > 0.0 && *fall > 0.0 && *hold >= 0.0 && rise + hold + fall <= 1.0) =>
            {
                bad("cycle fractions must be positive and sum to at most one")
            }
            _ => Ok(()),
        }
    }

    /// Smallest value over `[0, horizon]`, sampled finely; used to reject
    /// schedules with `η <= -1`.
    pub fn sampled_min(&self, horizon: f64) -> f64 {
        (0..=1000).map(|k| self.value(horizon * k as f64 / 1000.0)).fold(f64::INFINITY, f64::min)
    }
}

/// Natural strain `η(t)` on a range of edges of one rod.
#[derive(Clone, Debug, PartialEq)]
pub struct StrainTarget {
    pub rod: usize,
    pub edges: Range<usize>,
    pub profile: Profile,
}

/// Natural curvature and twist `s(t) (χ, ξ, τ)` on a range of interior
/// nodes (interior node `k` joins edges `k` and `k + 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTarget {
    pub rod: usize,
    pub nodes: Range<usize>,
    pub curvature: [f64; 3],
    pub profile: Profile,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Schedule {
    pub strains: Vec<StrainTarget>,
    pub curvatures: Vec<CurvatureTarget>,
}

impl Schedule {
    pub fn validate(&self, asm: &Assembly) -> Result<()> {
        for s in &self.strains {
            s.profile.validate()?;
            if s.rod >= asm.rods.len() || s.edges.end > asm.rods[s.rod].geometry.edge_count() {
                return Err(SimError::InvalidInput("strain target out of range".into()));
            }
        }
        for c in &self.curvatures {
            c.profile.validate()?;
            if c.rod >= asm.rods.len() || c.nodes.end > asm.rods[c.rod].geometry.natural_chi.len() {
                return Err(SimError::InvalidInput("curvature target out of range".into()));
            }
        }
        Ok(())
    }
}

impl Actuator for Schedule {
    fn apply(&mut self, t: f64, asm: &mut Assembly) {
        for s in &self.strains {
            let eta = s.profile.value(t);
            asm.rods[s.rod].geometry.set_edge_strain(s.edges.clone(), eta);
        }
        for c in &self.curvatures {
            let a = c.profile.value(t);
            let g = &mut asm.rods[c.rod].geometry;
            for k in c.nodes.clone() {
                g.natural_chi[k] = a * c.curvature[0];
                g.natural_xi[k] = a * c.curvature[1];
                g.natural_tau[k] = a * c.curvature[2];
            }
        }
    }
}
