//! Assemblies, environments and schedules built from a [`ScenarioConfig`].

use bilayer_core::actuation::{CurvatureTarget, Profile, Schedule, StrainTarget};
use bilayer_core::assembly::{Assembly, Rod};
use bilayer_core::coupling::{adopt_rest_configuration, pair_interface_edges, CouplingSpec};
use bilayer_core::external::{barrier_normal_force, Environment, FrictionModel, Primitive, Surface};
use bilayer_core::integrator::IntegratorConfig;
use bilayer_core::rod::SectionStiffness;
use bilayer_core::strip::rod_from_centerline;
use bilayer_core::{Result, SimError};
use nalgebra::Vector3;

use crate::config::{Clamp, Layer, ProfileKind, ScenarioConfig, ScenarioKind};

/// Everything needed to integrate one configured run.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub assembly: Assembly,
    pub environment: Environment,
    pub schedule: Schedule,
    /// Global DOF indices held fixed.
    pub fixed: Vec<usize>,
    /// One name per rod, in rod order.
    pub layer_names: Vec<String>,
}

impl Scenario {
    pub fn build(config: &ScenarioConfig) -> Result<Self> {
        let environment = environment(config);
        environment.validate()?;
        let (mut assembly, layer_names, top_rods, actuated) = match config.kind {
            ScenarioKind::Gripping => gripper(config)?,
            ScenarioKind::CrawlDualleg => dual_leg(config, &environment)?,
            _ => {
                let asm = single_strip(config, &environment)?;
                let edges = asm.rods[0].geometry.edge_count();
                (asm, vec!["top".into(), "bottom".into()], vec![0], 0..edges)
            }
        };
        let schedule = schedule(config, &assembly, &top_rods, actuated);
        schedule.validate(&assembly)?;
        // t = 0 natural state
        let mut s = schedule.clone();
        bilayer_core::actuation::Actuator::apply(&mut s, 0.0, &mut assembly);
        let mut fixed = clamp_dofs(config, &assembly);
        if config.kind == ScenarioKind::CrawlDualleg {
            // Each foot touches the floor at one centerline node, so nothing
            // resists rolling about the body axis. A real strip's width does;
            // here the walker is held in its plane instead.
            fixed.extend(in_plane_dofs(&assembly));
        }
        Ok(Self { config: config.clone(), assembly, environment, schedule, fixed, layer_names })
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        let i = &self.config.integrator;
        IntegratorConfig {
            dt: i.dt,
            tolerance: i.tolerance,
            max_iterations: i.max_iterations,
            max_halvings: i.max_halvings,
            fixed: self.fixed.clone(),
            damping: 0.0,
        }
    }
}

/// Surfaces and fields of a configuration. The floor, when present, is the
/// plane `z = 0`.
pub fn environment(config: &ScenarioConfig) -> Environment {
    let e = &config.environment;
    let mut surfaces = Vec::new();
    if e.floor {
        surfaces.push(Surface {
            primitive: Primitive::HalfSpace { point: Vector3::zeros(), normal: Vector3::z() },
            friction: FrictionModel::directional(e.mu_forward, e.mu_backward, Vector3::x()),
        });
    }
    if e.sphere_radius > 0.0 {
        surfaces.push(Surface {
            primitive: Primitive::Sphere { center: sphere_center(config), radius: e.sphere_radius },
            friction: FrictionModel::directional(e.mu_forward, e.mu_backward, Vector3::x()),
        });
    }
    Environment {
        gravity: Vector3::new(0.0, 0.0, e.gravity),
        surfaces,
        barrier_distance: e.barrier_distance,
        contact_stiffness: e.contact_stiffness,
        velocity_tolerance: e.velocity_tolerance,
        fluid_density: e.fluid_density,
        drag_parallel: e.drag_parallel,
        drag_normal: e.drag_normal,
        ..Environment::default()
    }
}

/// The sphere sits under the strip centre with `sphere_gap` between its top
/// and the bottom-layer centerline of the lower strip.
pub fn sphere_center(config: &ScenarioConfig) -> Vector3<f64> {
    let g = &config.geometry;
    let e = &config.environment;
    Vector3::new(0.5 * g.length, 0.0, -0.5 * g.h2 - e.sphere_gap - e.sphere_radius)
}

/// Gap at which the barrier alone carries a contact pressure `p` (Pa).
pub fn resting_gap(pressure: f64, env: &Environment) -> f64 {
    let (mut lo, mut hi) = (1e-9 * env.barrier_distance, env.barrier_distance);
    if pressure <= 0.0 || env.contact_stiffness == 0.0 {
        return 0.97 * env.barrier_distance;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = barrier_normal_force(mid, &Vector3::z(), env).map(|f| f.z).unwrap_or(f64::INFINITY);
        if f > pressure {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn stiffness(config: &ScenarioConfig, layer: Layer) -> SectionStiffness {
    let (g, m) = (&config.geometry, &config.material);
    match layer {
        Layer::Top => SectionStiffness::thin_strip(m.e1, m.poisson, g.width, g.h1),
        Layer::Bottom => SectionStiffness::thin_strip(m.e2, m.poisson, g.width, g.h2),
    }
}

fn penalties(config: &ScenarioConfig) -> (f64, f64) {
    let (a, b) = (stiffness(config, Layer::Top), stiffness(config, Layer::Bottom));
    (config.coupling.kt_over_ea * a.ea.max(b.ea), config.coupling.kr_over_ei * a.ei1.max(b.ei1))
}

fn straight_rod(
    config: &ScenarioConfig,
    layer: Layer,
    start: Vector3<f64>,
    dir: Vector3<f64>,
    nodes: usize,
    length: f64,
) -> Result<Rod> {
    let g = &config.geometry;
    let h = if layer == Layer::Top { g.h1 } else { g.h2 };
    let dl = length / (nodes - 1) as f64;
    let pts: Vec<_> = (0..nodes).map(|i| start + dir * (i as f64 * dl)).collect();
    rod_from_centerline(&pts, |_| Vector3::z(), stiffness(config, layer), g.width, h, config.material.density)
}

fn couple(config: &ScenarioConfig, asm_rods: &[Rod], top: usize, bottom: usize, start: f64) -> Result<CouplingSpec> {
    let g = &config.geometry;
    let pairs = pair_interface_edges(&asm_rods[top].geometry, &asm_rods[bottom].geometry, start)?;
    let (k_t, k_r) = penalties(config);
    CouplingSpec::new(top, bottom, &pairs, k_t, k_r, 0.5 * (g.h1 + g.h2))
}

type Built = (Assembly, Vec<String>, Vec<usize>, core::ops::Range<usize>);

/// One strip along `+x`, interface at height `z0`.
fn strip_at(config: &ScenarioConfig, z0: f64, dir: Vector3<f64>, origin: Vector3<f64>) -> Result<(Rod, Rod)> {
    let g = &config.geometry;
    let base = origin + Vector3::new(0.0, 0.0, z0);
    let top = straight_rod(config, Layer::Top, base + Vector3::new(0.0, 0.0, 0.5 * g.h1), dir, g.top_nodes, g.length)?;
    let bottom = straight_rod(
        config,
        Layer::Bottom,
        base + dir * g.bottom_offset - Vector3::new(0.0, 0.0, 0.5 * g.h2),
        dir,
        g.bottom_nodes,
        g.bottom_length,
    )?;
    Ok((top, bottom))
}

fn single_strip(config: &ScenarioConfig, env: &Environment) -> Result<Assembly> {
    let g = &config.geometry;
    let z0 = if config.environment.floor {
        let pressure = config.material.density * config.environment.gravity.abs() * (g.h1 + g.h2);
        0.5 * g.h2 + resting_gap(pressure, env)
    } else {
        0.0
    };
    let (top, bottom) = strip_at(config, z0, Vector3::x(), Vector3::zeros())?;
    let rods = vec![top, bottom];
    let spec = couple(config, &rods, 0, 1, g.bottom_offset)?;
    Assembly::new(rods, vec![spec])
}

/// Two strips crossing at their midpoints: strip A along `x` below strip
/// B along `y`. The junction couples the middle edges of A's top layer to
/// those of B's bottom layer in their as-built relative pose.
fn gripper(config: &ScenarioConfig) -> Result<Built> {
    let g = &config.geometry;
    let half = 0.5 * g.length;
    let (a_top, a_bottom) = strip_at(config, 0.0, Vector3::x(), Vector3::zeros())?;
    let lift = g.h1 + g.h2;
    let (b_top, b_bottom) = strip_at(config, lift, Vector3::y(), Vector3::new(half, -half, 0.0))?;
    let rods = vec![a_top, a_bottom, b_top, b_bottom];
    let mut couplings =
        vec![couple(config, &rods, 0, 1, g.bottom_offset)?, couple(config, &rods, 2, 3, g.bottom_offset)?];
    let centre = Vector3::new(half, 0.0, 0.0);
    let a = middle_edges(&rods[0], &centre);
    let b = middle_edges(&rods[3], &centre);
    let (k_t, k_r) = penalties(config);
    couplings.push(CouplingSpec::new(0, 3, &[(a[0], b[0]), (a[1], b[1])], k_t, k_r, lift)?);
    let mut asm = Assembly::new(rods, couplings)?;
    adopt_rest_configuration(&mut asm)?;
    let names = ["a-top", "a-bottom", "b-top", "b-bottom"].map(String::from).to_vec();
    let edges = asm.rods[0].geometry.edge_count();
    Ok((asm, names, vec![0, 2], 0..edges))
}

/// The two edges whose midpoints lie closest to `p` (horizontally), in
/// edge order.
fn middle_edges(rod: &Rod, p: &Vector3<f64>) -> [usize; 2] {
    let dist = |e: usize| {
        let m = 0.5 * (rod.state.position(e) + rod.state.position(e + 1)) - p;
        m.x * m.x + m.y * m.y
    };
    let mut idx: Vec<usize> = (0..rod.state.edge_count()).collect();
    idx.sort_by(|a, b| dist(*a).total_cmp(&dist(*b)));
    let mut two = [idx[0], idx[1]];
    two.sort();
    two
}

/// Number of top-layer edges in each leg of the dual-leg crawler.
pub fn leg_edges(config: &ScenarioConfig) -> usize {
    let g = &config.geometry;
    let dl = g.length / (g.top_nodes - 1) as f64;
    ((g.leg_length / dl).round() as usize).max(1)
}

/// Strip whose top layer continues into two downward legs at its ends.
/// The legs are passive and `leg_stiffness_factor` times stiffer; the
/// bottom layer spans the body only.
fn dual_leg(config: &ScenarioConfig, env: &Environment) -> Result<Built> {
    let g = &config.geometry;
    let n = g.top_nodes;
    let dl = g.length / (n - 1) as f64;
    let k = leg_edges(config);
    let body_edges = n - 1 - 2 * k;
    if body_edges < 2 {
        return Err(SimError::InvalidInput("legs leave no body".into()));
    }
    let leg = k as f64 * dl;
    let body = body_edges as f64 * dl;
    // foot load: half the weight on one node of area dl/2 * w
    let mass = config.material.density * g.width * (g.h1 * g.length + g.h2 * g.bottom_length);
    let pressure = 0.5 * mass * config.environment.gravity.abs() / (0.5 * dl * g.width);
    let foot = resting_gap(pressure, env);
    let z_top = foot + leg;
    let mut pts = Vec::with_capacity(n);
    for i in 0..=k {
        pts.push(Vector3::new(0.0, 0.0, z_top - (k - i) as f64 * dl));
    }
    for i in 1..=body_edges {
        pts.push(Vector3::new(i as f64 * dl, 0.0, z_top));
    }
    for i in 1..=k {
        pts.push(Vector3::new(body, 0.0, z_top - i as f64 * dl));
    }
    let normal = |e: usize| {
        if e < k {
            -Vector3::x()
        } else if e >= k + body_edges {
            Vector3::x()
        } else {
            Vector3::z()
        }
    };
    let mut top =
        rod_from_centerline(&pts, normal, stiffness(config, Layer::Top), g.width, g.h1, config.material.density)?;
    let edges = top.state.edge_count();
    top.geometry.set_natural_from(&top.state, &top.frames)?;
    top.geometry.stiffen_edges(0..k, config.material.leg_stiffness_factor);
    top.geometry.stiffen_edges(edges - k..edges, config.material.leg_stiffness_factor);
    let start = g.bottom_offset;
    let z_interface = z_top - 0.5 * g.h1;
    let bottom = straight_rod(
        config,
        Layer::Bottom,
        Vector3::new(start - leg, 0.0, z_interface - 0.5 * g.h2),
        Vector3::x(),
        g.bottom_nodes,
        g.bottom_length,
    )?;
    if start < leg || start + g.bottom_length > leg + body + 1e-12 {
        return Err(SimError::InvalidInput("bottom layer must lie under the body".into()));
    }
    let rods = vec![top, bottom];
    let spec = couple(config, &rods, 0, 1, start)?;
    let mut asm = Assembly::new(rods, vec![spec])?;
    adopt_rest_configuration(&mut asm)?;
    Ok((asm, vec!["top".into(), "bottom".into()], vec![0], k..edges - k))
}

/// Scalar actuation profile of a configuration.
pub fn profile(config: &ScenarioConfig) -> Profile {
    let a = &config.actuation;
    match a.profile {
        ProfileKind::None => Profile::Constant(0.0),
        ProfileKind::Ramp => Profile::Ramp { from: 0.0, to: a.eta_max, start: a.start, end: a.start + a.ramp },
        ProfileKind::Cycle => Profile::Cycle {
            low: a.eta_min,
            high: a.eta_max,
            period: a.period,
            rise: a.rise_fraction,
            hold: a.hold_fraction,
            fall: a.fall_fraction,
            start: a.start,
        },
        ProfileKind::RampRelease => {
            let t1 = a.start + a.ramp;
            let t2 = t1 + a.hold;
            Profile::PiecewiseLinear(vec![(a.start, 0.0), (t1, a.eta_max), (t2, a.eta_max), (t2 + a.release, 0.0)])
        }
        ProfileKind::Sinusoid => Profile::Sinusoid {
            mean: 0.5 * (a.eta_max + a.eta_min),
            amplitude: 0.5 * (a.eta_max - a.eta_min),
            period: a.period,
            phase: 0.0,
        },
        ProfileKind::Piecewise => Profile::PiecewiseLinear(a.knots.clone()),
    }
}

fn schedule(config: &ScenarioConfig, asm: &Assembly, top_rods: &[usize], edges: core::ops::Range<usize>) -> Schedule {
    let a = &config.actuation;
    let p = profile(config);
    let mut s = Schedule::default();
    if a.profile != ProfileKind::None {
        for &t in top_rods {
            let (rod, range) = match a.layer {
                Layer::Top => (t, edges.clone()),
                Layer::Bottom => (t + 1, 0..asm.rods[t + 1].geometry.edge_count()),
            };
            s.strains.push(StrainTarget { rod, edges: range, profile: p.clone() });
        }
    }
    if a.natural_curvature != 0.0 || a.natural_twist != 0.0 {
        for &t in top_rods {
            let nodes = asm.rods[t].geometry.natural_chi.len();
            s.curvatures.push(CurvatureTarget {
                rod: t,
                nodes: 0..nodes,
                curvature: [a.natural_curvature, 0.0, a.natural_twist],
                profile: Profile::Ramp { from: 0.0, to: 1.0, start: a.start, end: a.start + a.ramp },
            });
        }
    }
    s
}

/// Lateral (`y`) coordinate of every node.
fn in_plane_dofs(asm: &Assembly) -> Vec<usize> {
    (0..asm.rods.len())
        .flat_map(|r| (0..asm.rods[r].node_count()).map(move |i| (r, i)))
        .map(|(r, i)| asm.node_index(r, i, 1))
        .collect()
}

fn clamp_dofs(config: &ScenarioConfig, asm: &Assembly) -> Vec<usize> {
    match config.clamp {
        Clamp::None => Vec::new(),
        Clamp::Start => {
            let mut out = Vec::new();
            for r in 0..asm.rods.len() {
                // only layers that reach the clamped end
                let first = asm.rods[r].state.position(0);
                if (first - asm.rods[0].state.position(0)).x.abs() > 1e-12 {
                    continue;
                }
                for i in 0..2 {
                    for c in 0..3 {
                        out.push(asm.node_index(r, i, c));
                    }
                }
                out.push(asm.theta_index(r, 0));
            }
            out
        }
    }
}
