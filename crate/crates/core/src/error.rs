use alloc::string::String;
use core::fmt;

/// Failures raised by the mechanics kernels and the time integrator.
#[derive(Clone, Debug, PartialEq)]
pub enum SimError {
    /// Two consecutive nodes coincide, so the edge has no direction.
    DegenerateEdge { rod: usize, edge: usize },
    /// Consecutive (or paired) edges are too close to antiparallel for the
    /// curvature binormal or for parallel transport.
    CurvatureSingularity { rod: usize, index: usize, turning_angle: f64 },
    /// A node reached or crossed a contact surface.
    Penetration { rod: usize, node: usize, gap: f64 },
    /// Newton iterations did not reach the residual tolerance.
    NewtonDiverged { iterations: usize, residual: f64 },
    /// The step could not be completed even after the allowed halvings.
    StepFailed { time: f64, dt: f64, cause: String },
    /// The linear system had a zero pivot.
    SingularMatrix { column: usize },
    /// Static relaxation ran out of its step budget.
    StaticNotConverged { steps: usize, kinetic: f64, residual: f64 },
    /// Malformed input data.
    InvalidInput(String),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::DegenerateEdge { rod, edge } => {
                write!(f, "rod {rod}: edge {edge} has zero length")
            }
            SimError::CurvatureSingularity { rod, index, turning_angle } => write!(
                f,
                "rod {rod}: turning angle {:.3} deg at {index} exceeds the singularity limit",
                turning_angle.to_degrees()
            ),
            SimError::Penetration { rod, node, gap } => {
                write!(f, "rod {rod}: node {node} penetrates a contact surface (gap {gap:e} m)")
            }
            SimError::NewtonDiverged { iterations, residual } => {
                write!(f, "Newton iteration failed after {iterations} iterations (scaled residual {residual:e})")
            }
            SimError::StepFailed { time, dt, cause } => {
                write!(f, "time step at t = {time} s failed with dt = {dt:e} s: {cause}")
            }
            SimError::SingularMatrix { column } => {
                write!(f, "singular tangent matrix (zero pivot in column {column})")
            }
            SimError::StaticNotConverged { steps, kinetic, residual } => write!(
                f,
                "static relaxation did not settle in {steps} steps (kinetic {kinetic:e} J, residual {residual:e})"
            ),
            SimError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

impl core::error::Error for SimError {}

pub type Result<T> = core::result::Result<T, SimError>;
