//! Forward-mode automatic differentiation scalars.
//!
//! [`Dual`] carries a value and its gradient with respect to `N` seeded
//! variables; [`Jet`] additionally carries the Hessian. Element energies in
//! this crate are written once, generically over [`Real`], and evaluated with
//! `f64` for energies, `Dual` for force Jacobians, and `Jet` for exact
//! second derivatives.
//!
//! Only the upper triangle (`j >= i`) of a `Jet` Hessian is maintained.

use core::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar abstraction shared by `f64`, [`Dual`] and [`Jet`].
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(self) -> f64;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn ln(self) -> Self;
    fn atan2(self, x: Self) -> Self;
    /// `self * |self|`, differentiable at zero.
    fn signed_square(self) -> Self;

    #[inline]
    fn square(self) -> Self {
        self * self
    }

    /// Square root that returns an exact zero (with zero derivatives) for a
    /// zero argument instead of an infinite slope.
    #[inline]
    fn sqrt_or_zero(self) -> Self {
        if self.value() <= 0.0 {
            Self::cst(0.0)
        } else {
            self.sqrt()
        }
    }
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    #[inline]
    fn sin(self) -> Self {
        libm::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        libm::cos(self)
    }
    #[inline]
    fn ln(self) -> Self {
        libm::log(self)
    }
    #[inline]
    fn atan2(self, x: Self) -> Self {
        libm::atan2(self, x)
    }
    #[inline]
    fn signed_square(self) -> Self {
        self * libm::fabs(self)
    }
}

// ---------------------------------------------------------------------------
// First order
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const N: usize> {
    pub v: f64,
    pub g: [f64; N],
}

impl<const N: usize> Dual<N> {
    #[inline]
    pub fn constant(v: f64) -> Self {
        Self { v, g: [0.0; N] }
    }

    #[inline]
    pub fn variable(v: f64, index: usize) -> Self {
        let mut g = [0.0; N];
        g[index] = 1.0;
        Self { v, g }
    }

    #[inline]
    fn chain(self, f: f64, df: f64) -> Self {
        let mut g = self.g;
        for gi in g.iter_mut() {
            *gi *= df;
        }
        Self { v: f, g }
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for i in 0..N {
            self.g[i] += o.g[i];
        }
        self
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: Self) -> Self {
        self.v -= o.v;
        for i in 0..N {
            self.g[i] -= o.g[i];
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut g = [0.0; N];
        for i in 0..N {
            g[i] = self.v * o.g[i] + o.v * self.g[i];
        }
        Self { v: self.v * o.v, g }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.v;
        let v = self.v * inv;
        let mut g = [0.0; N];
        for i in 0..N {
            g[i] = (self.g[i] - v * o.g[i]) * inv;
        }
        Self { v, g }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    #[inline]
    fn neg(mut self) -> Self {
        self.v = -self.v;
        for gi in self.g.iter_mut() {
            *gi = -*gi;
        }
        self
    }
}

impl<const N: usize> Add<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: f64) -> Self {
        self.v += o;
        self
    }
}

impl<const N: usize> Sub<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: f64) -> Self {
        self.v -= o;
        self
    }
}

impl<const N: usize> Mul<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(mut self, o: f64) -> Self {
        self.v *= o;
        for gi in self.g.iter_mut() {
            *gi *= o;
        }
        self
    }
}

impl<const N: usize> Div<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, o: f64) -> Self {
        self * (1.0 / o)
    }
}

impl<const N: usize> Real for Dual<N> {
    #[inline]
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
    #[inline]
    fn value(self) -> f64 {
        self.v
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = libm::sqrt(self.v);
        self.chain(s, 0.5 / s)
    }
    #[inline]
    fn sin(self) -> Self {
        self.chain(libm::sin(self.v), libm::cos(self.v))
    }
    #[inline]
    fn cos(self) -> Self {
        self.chain(libm::cos(self.v), -libm::sin(self.v))
    }
    #[inline]
    fn ln(self) -> Self {
        self.chain(libm::log(self.v), 1.0 / self.v)
    }
    #[inline]
    fn atan2(self, x: Self) -> Self {
        let r2 = self.v * self.v + x.v * x.v;
        let dy = x.v / r2;
        let dx = -self.v / r2;
        let mut g = [0.0; N];
        for i in 0..N {
            g[i] = dy * self.g[i] + dx * x.g[i];
        }
        Self { v: libm::atan2(self.v, x.v), g }
    }
    #[inline]
    fn signed_square(self) -> Self {
        let a = libm::fabs(self.v);
        self.chain(self.v * a, 2.0 * a)
    }
}

// ---------------------------------------------------------------------------
// Second order
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    pub v: f64,
    pub g: [f64; N],
    /// Upper triangle of the Hessian; entries with `j < i` are unused.
    pub h: [[f64; N]; N],
}

impl<const N: usize> Jet<N> {
    #[inline]
    pub fn constant(v: f64) -> Self {
        Self { v, g: [0.0; N], h: [[0.0; N]; N] }
    }

    #[inline]
    pub fn variable(v: f64, index: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[index] = 1.0;
        j
    }

    /// Symmetric Hessian entry.
    #[inline]
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        if i <= j {
            self.h[i][j]
        } else {
            self.h[j][i]
        }
    }

    /// `f(self)` given `f`, `f'` and `f''` at `self.v`.
    #[inline]
    fn chain(self, f: f64, df: f64, ddf: f64) -> Self {
        let mut out = Self::constant(f);
        for i in 0..N {
            out.g[i] = df * self.g[i];
            let gi = self.g[i];
            for j in i..N {
                out.h[i][j] = df * self.h[i][j] + ddf * gi * self.g[j];
            }
        }
        out
    }

    /// `f(a, b)` given the value, gradient and Hessian of `f` at `(a.v, b.v)`.
    #[inline]
    #[allow(clippy::too_many_arguments)]
    fn chain2(a: Self, b: Self, f: f64, fa: f64, fb: f64, faa: f64, fbb: f64, fab: f64) -> Self {
        let mut out = Self::constant(f);
        for i in 0..N {
            out.g[i] = fa * a.g[i] + fb * b.g[i];
            let (ai, bi) = (a.g[i], b.g[i]);
            for j in i..N {
                let (aj, bj) = (a.g[j], b.g[j]);
                out.h[i][j] =
                    fa * a.h[i][j] + fb * b.h[i][j] + faa * ai * aj + fbb * bi * bj + fab * (ai * bj + bi * aj);
            }
        }
        out
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for i in 0..N {
            self.g[i] += o.g[i];
            for j in i..N {
                self.h[i][j] += o.h[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: Self) -> Self {
        self.v -= o.v;
        for i in 0..N {
            self.g[i] -= o.g[i];
            for j in i..N {
                self.h[i][j] -= o.h[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut out = Self::constant(self.v * o.v);
        for i in 0..N {
            out.g[i] = self.v * o.g[i] + o.v * self.g[i];
            let (ai, bi) = (self.g[i], o.g[i]);
            for j in i..N {
                out.h[i][j] = self.v * o.h[i][j] + o.v * self.h[i][j] + ai * o.g[j] + bi * self.g[j];
            }
        }
        out
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.v;
        self * o.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: f64) -> Self {
        self.v += o;
        self
    }
}

impl<const N: usize> Sub<f64> for Jet<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: f64) -> Self {
        self.v -= o;
        self
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    #[inline]
    fn mul(mut self, o: f64) -> Self {
        self.v *= o;
        for i in 0..N {
            self.g[i] *= o;
            for j in i..N {
                self.h[i][j] *= o;
            }
        }
        self
    }
}

impl<const N: usize> Div<f64> for Jet<N> {
    type Output = Self;
    #[inline]
    fn div(self, o: f64) -> Self {
        self * (1.0 / o)
    }
}

impl<const N: usize> Real for Jet<N> {
    #[inline]
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
    #[inline]
    fn value(self) -> f64 {
        self.v
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = libm::sqrt(self.v);
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }
    #[inline]
    fn sin(self) -> Self {
        let (s, c) = (libm::sin(self.v), libm::cos(self.v));
        self.chain(s, c, -s)
    }
    #[inline]
    fn cos(self) -> Self {
        let (s, c) = (libm::sin(self.v), libm::cos(self.v));
        self.chain(c, -s, -c)
    }
    #[inline]
    fn ln(self) -> Self {
        let inv = 1.0 / self.v;
        self.chain(libm::log(self.v), inv, -inv * inv)
    }
    #[inline]
    fn atan2(self, x: Self) -> Self {
        let (yv, xv) = (self.v, x.v);
        let r2 = yv * yv + xv * xv;
        let r4 = r2 * r2;
        Self::chain2(
            self,
            x,
            libm::atan2(yv, xv),
            xv / r2,
            -yv / r2,
            -2.0 * xv * yv / r4,
            2.0 * xv * yv / r4,
            (yv * yv - xv * xv) / r4,
        )
    }
    #[inline]
    fn signed_square(self) -> Self {
        let a = libm::fabs(self.v);
        let sign = if self.v < 0.0 { -1.0 } else { 1.0 };
        self.chain(self.v * a, 2.0 * a, 2.0 * sign)
    }
}

// ---------------------------------------------------------------------------
// 3-vectors over a generic scalar
// ---------------------------------------------------------------------------

/// Minimal 3-vector used inside differentiated kernels.
#[derive(Clone, Copy, Debug)]
pub struct V3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> V3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn cst(v: &nalgebra::Vector3<f64>) -> Self {
        Self::new(T::cst(v.x), T::cst(v.y), T::cst(v.z))
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    #[inline]
    pub fn scale_f(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    #[inline]
    pub fn values(self) -> nalgebra::Vector3<f64> {
        nalgebra::Vector3::new(self.x.value(), self.y.value(), self.z.value())
    }
}

impl<T: Real> Add for V3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for V3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for V3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}
