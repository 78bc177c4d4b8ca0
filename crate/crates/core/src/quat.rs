//! Quaternion scalars, imaginary units and spectral spheres.
//!
//! Multiplication follows the Hamilton table `e1 e2 = e3`, `e2 e3 = e1`,
//! `e3 e1 = e2`, `ei^2 = -1`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element `w + x e1 + y e2 + z e3` of the real quaternions.
///
/// Serialized as the 4-array `[w, x, y, z]`.
#[derive(Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 4]> for Quaternion {
    fn from(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        [q.w, q.x, q.y, q.z]
    }
}

impl From<f64> for Quaternion {
    fn from(r: f64) -> Self {
        Quaternion::real(r)
    }
}

impl fmt::Debug for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} + {:?}e1 + {:?}e2 + {:?}e3)", self.w, self.x, self.y, self.z)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}e1 {:+}e2 {:+}e3", self.w, self.x, self.y, self.z)
    }
}

pub const ZERO: Quaternion = Quaternion { w: 0.0, x: 0.0, y: 0.0, z: 0.0 };
pub const ONE: Quaternion = Quaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };
pub const E1: Quaternion = Quaternion { w: 0.0, x: 1.0, y: 0.0, z: 0.0 };
pub const E2: Quaternion = Quaternion { w: 0.0, x: 0.0, y: 1.0, z: 0.0 };
pub const E3: Quaternion = Quaternion { w: 0.0, x: 0.0, y: 0.0, z: 1.0 };

impl Quaternion {
    #[inline]
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    #[inline]
    pub const fn real(r: f64) -> Self {
        Self { w: r, x: 0.0, y: 0.0, z: 0.0 }
    }

    /// Unit `e_i` for `i` in 1..=3; `e_0` is 1.
    pub fn unit(i: usize) -> Self {
        match i {
            0 => ONE,
            1 => E1,
            2 => E2,
            3 => E3,
            _ => panic!("quaternion unit index {i} out of range"),
        }
    }

    #[inline]
    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Real part `q0`.
    #[inline]
    pub fn re(self) -> f64 {
        self.w
    }

    /// Vector part `q1 e1 + q2 e2 + q3 e3`.
    #[inline]
    pub fn vector(self) -> Self {
        Self::new(0.0, self.x, self.y, self.z)
    }

    #[inline]
    pub fn vector_norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn inv(self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 || !n2.is_finite() {
            return Err(Error::Domain(format!("cannot invert quaternion {self:?}")));
        }
        Ok(self.conj() / n2)
    }

    /// Non-negative integer power by repeated squaring.
    pub fn powi(self, n: u32) -> Self {
        let mut acc = ONE;
        let mut base = self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    /// Integer power allowing negative exponents.
    pub fn powz(self, n: i32) -> Result<Self> {
        if n >= 0 {
            Ok(self.powi(n as u32))
        } else {
            Ok(self.inv()?.powi(n.unsigned_abs()))
        }
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Writes `q = q0 + J_q |q_v|`; real quaternions have no `J_q`.
    pub fn decompose(self) -> SliceDecomposition {
        let r = self.vector_norm();
        if r == 0.0 {
            SliceDecomposition::Real(self.w)
        } else {
            SliceDecomposition::Slice {
                u: self.w,
                v: r,
                unit: ImaginaryUnit(self.vector() / r),
            }
        }
    }

    /// The sphere `[q]` containing this quaternion.
    pub fn sphere(self) -> SpectralSphere {
        SpectralSphere::new(self.w, self.vector_norm(), 1)
    }

    /// Distance to the sphere `[s]` measured in the `(u, v)` half-plane.
    pub fn sphere_distance(self, s: &SpectralSphere) -> f64 {
        s.distance_uv(self.w, self.vector_norm())
    }
}

/// Outcome of [`Quaternion::decompose`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SliceDecomposition {
    Real(f64),
    Slice { u: f64, v: f64, unit: ImaginaryUnit },
}

impl SliceDecomposition {
    pub fn embed(self) -> Quaternion {
        match self {
            SliceDecomposition::Real(r) => Quaternion::real(r),
            SliceDecomposition::Slice { u, v, unit } => unit.complex(u, v),
        }
    }
}

impl Add for Quaternion {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Add<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn add(self, r: f64) -> Self {
        Self::new(self.w + r, self.x, self.y, self.z)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Sub<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn sub(self, r: f64) -> Self {
        Self::new(self.w - r, self.x, self.y, self.z)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let a = self;
        Self::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, r: f64) -> Self {
        Self::new(self.w * r, self.x * r, self.y * r, self.z * r)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn div(self, r: f64) -> Self {
        Self::new(self.w / r, self.x / r, self.y / r, self.z / r)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl MulAssign for Quaternion {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ZERO, |a, b| a + b)
    }
}

/// Hamilton product.
#[inline]
pub fn qmul(a: Quaternion, b: Quaternion) -> Quaternion {
    a * b
}

#[inline]
pub fn qinv(a: Quaternion) -> Result<Quaternion> {
    a.inv()
}

/// `Q_s(p) = p^2 - 2 Re(s) p + |s|^2`; vanishes exactly on `p in [s]`.
#[inline]
pub fn qs_poly(s: Quaternion, p: Quaternion) -> Quaternion {
    p * p - p * (2.0 * s.re()) + s.norm_sqr()
}

/// A purely imaginary unit quaternion `J`, so `J^2 = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct ImaginaryUnit(Quaternion);

impl ImaginaryUnit {
    /// Normalizes `(x, y, z)`; fails for the zero vector.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let r = (x * x + y * y + z * z).sqrt();
        if r == 0.0 || !r.is_finite() {
            return Err(Error::Domain("imaginary unit needs a nonzero vector".into()));
        }
        Ok(Self(Quaternion::new(0.0, x / r, y / r, z / r)))
    }

    pub fn e1() -> Self {
        Self(E1)
    }

    #[inline]
    pub fn as_quat(self) -> Quaternion {
        self.0
    }

    /// `u + J v`.
    #[inline]
    pub fn complex(self, u: f64, v: f64) -> Quaternion {
        Quaternion::new(u, self.0.x * v, self.0.y * v, self.0.z * v)
    }

    /// `exp(J theta)`.
    #[inline]
    pub fn exp(self, theta: f64) -> Quaternion {
        let (s, c) = theta.sin_cos();
        self.complex(c, s)
    }
}

impl TryFrom<[f64; 4]> for ImaginaryUnit {
    type Error = Error;
    fn try_from(a: [f64; 4]) -> Result<Self> {
        if a[0] != 0.0 {
            return Err(Error::Domain("imaginary unit must have zero real part".into()));
        }
        let v = Self::new(a[1], a[2], a[3])?;
        let r = (a[1] * a[1] + a[2] * a[2] + a[3] * a[3]).sqrt();
        if (r - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("imaginary unit has modulus {r}")));
        }
        Ok(v)
    }
}

impl From<ImaginaryUnit> for [f64; 4] {
    fn from(j: ImaginaryUnit) -> Self {
        j.0.into()
    }
}

/// A point of the S-spectrum: the 2-sphere `[u + J v]`, or the real point
/// `u` when `v == 0`. Multiplicity counts conjugate root pairs of the
/// quadratic pencil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSphere {
    pub u: f64,
    pub v: f64,
    pub multiplicity: usize,
}

impl SpectralSphere {
    pub fn new(u: f64, v: f64, multiplicity: usize) -> Self {
        Self { u, v: v.abs(), multiplicity }
    }

    pub fn is_real(&self) -> bool {
        self.v == 0.0
    }

    /// Euclidean distance in the closed upper half-plane `(u, v >= 0)`.
    pub fn distance_uv(&self, u: f64, v: f64) -> f64 {
        ((self.u - u).powi(2) + (self.v - v.abs()).powi(2)).sqrt()
    }

    pub fn distance(&self, other: &SpectralSphere) -> f64 {
        self.distance_uv(other.u, other.v)
    }

    /// The sphere's trace `u + J v` in the plane `C_J`.
    pub fn trace(&self, j: ImaginaryUnit) -> Quaternion {
        j.complex(self.u, self.v)
    }

    pub fn contains(&self, q: Quaternion, tol: f64) -> bool {
        q.sphere_distance(self) <= tol
    }
}
