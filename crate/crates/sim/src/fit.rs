//! Shape fits for deformed centerlines.

use nalgebra::{Matrix3, SymmetricEigen, Vector2, Vector3};

/// Algebraic least-squares circle through planar points: `(centre, radius)`.
/// `None` for fewer than three points or (near-)collinear input.
pub fn fit_circle(points: &[Vector2<f64>]) -> Option<(Vector2<f64>, f64)> {
    if points.len() < 3 {
        return None;
    }
    // shift to the centroid for conditioning
    let c0 = points.iter().sum::<Vector2<f64>>() / points.len() as f64;
    let mut m = Matrix3::<f64>::zeros();
    let mut r = Vector3::<f64>::zeros();
    for p in points {
        let d = p - c0;
        let row = Vector3::new(d.x, d.y, 1.0);
        m += row * row.transpose();
        r -= row * d.norm_squared();
    }
    let s = m.lu().solve(&r)?;
    let centre = Vector2::new(-0.5 * s[0], -0.5 * s[1]);
    let r2 = centre.norm_squared() - s[2];
    if !(r2 > 0.0) || !r2.is_finite() {
        return None;
    }
    let scale = points.iter().map(|p| (p - c0).norm()).fold(0.0, f64::max);
    // a line fits as a circle of enormous radius
    if r2.sqrt() > 1e6 * scale {
        return None;
    }
    Some((centre + c0, r2.sqrt()))
}

/// Middle 60% of a node list.
pub fn middle_span<T: Copy>(nodes: &[T]) -> Vec<T> {
    let n = nodes.len();
    nodes[n / 5..n - n / 5].to_vec()
}

/// Bending curvature of a bilayer deformed in the `x`-`z` plane, measured at
/// the interface from concentric circle fits of both layers' middle spans.
/// Positive when the strip bends towards `-z` (top layer convex).
pub fn interface_curvature(top: &[[f64; 3]], bottom: &[[f64; 3]], h1: f64, h2: f64) -> Option<f64> {
    let planar =
        |p: &[[f64; 3]]| -> Vec<Vector2<f64>> { middle_span(p).iter().map(|x| Vector2::new(x[0], x[2])).collect() };
    let (pt, pb) = (planar(top), planar(bottom));
    let (ct, rt) = fit_circle(&pt)?;
    let (_, rb) = fit_circle(&pb)?;
    let ri = (h2 * rt + h1 * rb) / (h1 + h2);
    let mid = pt[pt.len() / 2];
    let sign = if ct.y < mid.y { 1.0 } else { -1.0 };
    Some(sign / ri)
}

/// Helix parameters of a fitted centerline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HelixFit {
    pub axis: Vector3<f64>,
    pub radius: f64,
    /// Rise per turn; infinite for a straight line, zero for a planar
    /// circle.
    pub pitch: f64,
    pub curvature: f64,
    pub torsion: f64,
}

/// Pitch of the helix with curvature `kappa` and torsion `tau`.
pub fn helix_pitch(kappa: f64, tau: f64) -> f64 {
    if kappa == 0.0 {
        return f64::INFINITY;
    }
    2.0 * std::f64::consts::PI * tau.abs() / (kappa * kappa + tau * tau)
}

pub fn helix_radius(kappa: f64, tau: f64) -> f64 {
    if kappa == 0.0 {
        return 0.0;
    }
    kappa.abs() / (kappa * kappa + tau * tau)
}

/// Fits a circular helix to an ordered polyline.
///
/// Tangents of a helix all make the same angle with its axis, so the axis
/// is the direction along which the tangents do not vary. Points projected
/// across the axis give the radius by a circle fit, and the rise per unit
/// of unwrapped polar angle gives the pitch.
pub fn fit_helix(points: &[Vector3<f64>]) -> Option<HelixFit> {
    if points.len() < 4 {
        return None;
    }
    let tangents: Vec<Vector3<f64>> = points.windows(2).map(|w| (w[1] - w[0]).normalize()).collect();
    let mean = tangents.iter().sum::<Vector3<f64>>() / tangents.len() as f64;
    let mut cov = Matrix3::<f64>::zeros();
    for t in &tangents {
        let d = t - mean;
        cov += d * d.transpose();
    }
    cov /= tangents.len() as f64;
    let straight = HelixFit { axis: mean.normalize(), radius: 0.0, pitch: f64::INFINITY, curvature: 0.0, torsion: 0.0 };
    if cov.trace() < 1e-16 {
        return Some(straight);
    }
    let eig = SymmetricEigen::new(cov);
    let k = eig.eigenvalues.imin();
    let mut axis: Vector3<f64> = eig.eigenvectors.column(k).into();
    if axis.dot(&mean) < 0.0 {
        axis = -axis;
    }
    let u = axis.cross(&if axis.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() }).normalize();
    let v = axis.cross(&u);
    let planar: Vec<Vector2<f64>> = points.iter().map(|p| Vector2::new(p.dot(&u), p.dot(&v))).collect();
    let Some((c, radius)) = fit_circle(&planar) else {
        return Some(straight);
    };
    // unwrapped polar angle against height along the axis
    let mut phi = Vec::with_capacity(points.len());
    let mut prev = 0.0;
    for (i, p) in planar.iter().enumerate() {
        let d = p - c;
        let mut a = d.y.atan2(d.x);
        if i > 0 {
            a += ((prev - a) / std::f64::consts::TAU).round() * std::f64::consts::TAU;
        }
        phi.push(a);
        prev = a;
    }
    let z: Vec<f64> = points.iter().map(|p| p.dot(&axis)).collect();
    let n = phi.len() as f64;
    let (pm, zm) = (phi.iter().sum::<f64>() / n, z.iter().sum::<f64>() / n);
    let sxx: f64 = phi.iter().map(|p| (p - pm) * (p - pm)).sum();
    let sxz: f64 = phi.iter().zip(&z).map(|(p, z)| (p - pm) * (z - zm)).sum();
    if sxx <= 0.0 {
        return Some(straight);
    }
    let rise = sxz / sxx; // per radian
    let d = radius * radius + rise * rise;
    Some(HelixFit { axis, radius, pitch: std::f64::consts::TAU * rise.abs(), curvature: radius / d, torsion: rise / d })
}
