use alloc::vec::Vec;
use nalgebra::{Matrix3, Vector3};

use super::kernel::{check_turning, transport, PrevEdge};
use super::RodState;
use crate::error::{Result, SimError};
use crate::jet::V3;

/// Largest turning angle between consecutive (or paired) edges, and the
/// largest per-step tangent rotation, accepted by the kernels: 179 degrees.
pub const MAX_TURNING_ANGLE: f64 = 179.0 * core::f64::consts::PI / 180.0;

/// Per-edge reference and material directors plus per-node reference twist.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSet {
    /// `d3 = m3`, the unit edge tangents.
    pub tangents: Vec<Vector3<f64>>,
    pub d1: Vec<Vector3<f64>>,
    pub d2: Vec<Vector3<f64>>,
    pub m1: Vec<Vector3<f64>>,
    pub m2: Vec<Vector3<f64>>,
    /// One entry per interior node.
    pub reference_twist: Vec<f64>,
}

fn v3(v: &Vector3<f64>) -> V3<f64> {
    V3::cst(v)
}

fn tangents(state: &RodState, rod: usize) -> Result<Vec<Vector3<f64>>> {
    (0..state.edge_count())
        .map(|i| {
            let e = state.edge(i);
            let n = e.norm();
            if n == 0.0 {
                Err(SimError::DegenerateEdge { rod, edge: i })
            } else {
                Ok(e / n)
            }
        })
        .collect()
}

/// Signed angle from `d1` of edge `a`, space-transported onto `b`, to `d1`
/// of `b`, on the branch closest to `near`.
pub(crate) fn twist_between(
    ta: &Vector3<f64>,
    da: &Vector3<f64>,
    tb: &Vector3<f64>,
    db: &Vector3<f64>,
    near: f64,
) -> f64 {
    let u = transport(v3(ta), v3(tb), v3(da)).values();
    let raw = libm::atan2(u.cross(db).dot(tb), u.dot(db));
    raw + libm::round((near - raw) / core::f64::consts::TAU) * core::f64::consts::TAU
}

impl FrameSet {
    /// Space-parallel frames for `state`, starting from `d1 = t0 x z`
    /// (or `t0 x y` when the first edge is along `z`).
    pub fn initial(state: &RodState) -> Result<Self> {
        Self::initial_for(state, 0)
    }

    pub(crate) fn initial_for(state: &RodState, rod: usize) -> Result<Self> {
        let t = tangents(state, rod)?;
        let mut d1 = Vec::with_capacity(t.len());
        let mut first = t[0].cross(&Vector3::z());
        if first.norm() < 1e-6 {
            first = t[0].cross(&Vector3::y());
        }
        d1.push(first.normalize());
        for i in 1..t.len() {
            check_turning(&t[i - 1], &t[i], rod, i)?;
            let d = transport(v3(&t[i - 1]), v3(&t[i]), v3(&d1[i - 1])).values();
            d1.push(orthonormalize(&d, &t[i]));
        }
        let reference_twist = (1..t.len()).map(|i| twist_between(&t[i - 1], &d1[i - 1], &t[i], &d1[i], 0.0)).collect();
        let mut f = Self {
            d2: t.iter().zip(&d1).map(|(t, d)| t.cross(d)).collect(),
            m1: Vec::new(),
            m2: Vec::new(),
            tangents: t,
            d1,
            reference_twist,
        };
        f.refresh_material(state);
        Ok(f)
    }

    pub fn edge_count(&self) -> usize {
        self.tangents.len()
    }

    /// Rebuilds `m1`, `m2` from the reference directors and edge angles.
    pub fn refresh_material(&mut self, state: &RodState) {
        let n = self.tangents.len();
        self.m1.clear();
        self.m2.clear();
        for i in 0..n {
            let (s, c) = (libm::sin(state.theta(i)), libm::cos(state.theta(i)));
            self.m1.push(self.d1[i] * c + self.d2[i] * s);
            self.m2.push(self.d2[i] * c - self.d1[i] * s);
        }
    }

    /// Tangent and `d1` of edge `i`.
    pub fn directors(&self, i: usize) -> PrevEdge {
        PrevEdge { t: self.tangents[i], d1: self.d1[i] }
    }

    /// Edge angle that puts `m1` of edge `i` along `normal` (projected
    /// onto the cross-section plane).
    pub fn theta_for_normal(&self, i: usize, normal: &Vector3<f64>) -> f64 {
        libm::atan2(normal.dot(&self.d2[i]), normal.dot(&self.d1[i]))
    }

    /// Applies a rotation to every director; reference twist is unchanged.
    pub fn rotated(&self, r: &Matrix3<f64>) -> Self {
        let map = |v: &Vec<Vector3<f64>>| v.iter().map(|x| r * x).collect();
        Self {
            tangents: map(&self.tangents),
            d1: map(&self.d1),
            d2: map(&self.d2),
            m1: map(&self.m1),
            m2: map(&self.m2),
            reference_twist: self.reference_twist.clone(),
        }
    }

    /// Largest deviation from orthonormality over both triads.
    pub fn orthonormality_error(&self) -> f64 {
        let mut err = 0.0f64;
        for i in 0..self.tangents.len() {
            for triad in [[self.d1[i], self.d2[i], self.tangents[i]], [self.m1[i], self.m2[i], self.tangents[i]]] {
                for a in 0..3 {
                    for b in 0..3 {
                        let target = if a == b { 1.0 } else { 0.0 };
                        err = err.max((triad[a].dot(&triad[b]) - target).abs());
                    }
                }
            }
        }
        err
    }
}

fn orthonormalize(d: &Vector3<f64>, t: &Vector3<f64>) -> Vector3<f64> {
    (d - t * t.dot(d)).normalize()
}

/// Time-parallel transport of `previous` onto the edges of `state`, with
/// material directors rebuilt from the edge angles and reference twist
/// recomputed (kept on the branch of the previous value).
pub fn update_frames(state: &RodState, previous: &FrameSet) -> Result<FrameSet> {
    update_frames_for(state, previous, 0)
}

pub(crate) fn update_frames_for(state: &RodState, previous: &FrameSet, rod: usize) -> Result<FrameSet> {
    if state.edge_count() != previous.edge_count() {
        return Err(SimError::InvalidInput("frame set does not match rod".into()));
    }
    let t = tangents(state, rod)?;
    let mut d1 = Vec::with_capacity(t.len());
    for (i, tn) in t.iter().enumerate() {
        let to = &previous.tangents[i];
        check_turning(to, tn, rod, i)?;
        let d = transport(v3(to), v3(tn), v3(&previous.d1[i])).values();
        d1.push(orthonormalize(&d, tn));
    }
    for i in 1..t.len() {
        check_turning(&t[i - 1], &t[i], rod, i)?;
    }
    let reference_twist = (1..t.len())
        .map(|i| twist_between(&t[i - 1], &d1[i - 1], &t[i], &d1[i], previous.reference_twist[i - 1]))
        .collect();
    let mut f = FrameSet {
        d2: t.iter().zip(&d1).map(|(t, d)| t.cross(d)).collect(),
        m1: Vec::new(),
        m2: Vec::new(),
        tangents: t,
        d1,
        reference_twist,
    };
    f.refresh_material(state);
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight(n: usize) -> RodState {
        let x: Vec<_> = (0..n).map(|i| Vector3::new(i as f64, 0.0, 0.0)).collect();
        RodState::new(&x, &alloc::vec![0.3; n - 1]).unwrap()
    }

    #[test]
    fn initial_frame_rule() {
        let f = FrameSet::initial(&straight(3)).unwrap();
        assert!((f.d1[0] - Vector3::new(0.0, -1.0, 0.0)).norm() < 1e-15);
        assert!(f.orthonormality_error() < 1e-12);
        assert!(f.reference_twist.iter().all(|t| t.abs() < 1e-15));
        let up = RodState::new(&[Vector3::zeros(), Vector3::z()], &[0.0]).unwrap();
        let f = FrameSet::initial(&up).unwrap();
        assert!((f.d1[0].norm() - 1.0).abs() < 1e-15 && f.d1[0].dot(&Vector3::z()).abs() < 1e-15);
    }

    #[test]
    fn unchanged_state_keeps_frames() {
        let s = straight(5);
        let f = FrameSet::initial(&s).unwrap();
        let g = update_frames(&s, &f).unwrap();
        for i in 0..4 {
            assert!((f.d1[i] - g.d1[i]).norm() < 1e-15);
            assert!((f.m1[i] - g.m1[i]).norm() < 1e-15);
        }
        assert_eq!(f.reference_twist, g.reference_twist);
    }

    #[test]
    fn minimal_rotation_fixes_rotation_axis() {
        let s = RodState::new(&[Vector3::zeros(), Vector3::x()], &[0.0]).unwrap();
        let mut f = FrameSet::initial(&s).unwrap();
        f.d1[0] = Vector3::y();
        f.d2[0] = Vector3::x().cross(&Vector3::y());
        // x rotated 90 degrees about y is -z
        let r = RodState::new(&[Vector3::zeros(), -Vector3::z()], &[0.0]).unwrap();
        let g = update_frames(&r, &f).unwrap();
        assert!((g.d1[0] - Vector3::y()).norm() < 1e-15);
        assert!((g.tangents[0] + Vector3::z()).norm() < 1e-15);
    }

    #[test]
    fn tangent_reversal_is_rejected() {
        let s = RodState::new(&[Vector3::zeros(), Vector3::x()], &[0.0]).unwrap();
        let f = FrameSet::initial(&s).unwrap();
        let r = RodState::new(&[Vector3::zeros(), Vector3::new(-1.0, 1e-4, 0.0)], &[0.0]).unwrap();
        assert!(matches!(update_frames(&r, &f), Err(SimError::CurvatureSingularity { .. })));
    }

    #[test]
    fn theta_for_normal_aligns_m1() {
        let s = straight(3);
        let f = FrameSet::initial(&s).unwrap();
        let th = f.theta_for_normal(0, &Vector3::z());
        assert!((th + core::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
