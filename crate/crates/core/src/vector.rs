//! Complex and real 3-vectors and the two bilinears every coupling is built from.

use core::ops::{Add, Index, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::Tolerances;

/// A complex 3-vector, typically one element `⟨x|m̂|y⟩` of a dipole operator (A·m²).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CVec3(pub [Complex64; 3]);

impl CVec3 {
    pub const ZERO: Self = Self([Complex64::new(0.0, 0.0); 3]);

    pub const fn new(x: Complex64, y: Complex64, z: Complex64) -> Self {
        Self([x, y, z])
    }

    pub const fn real(v: [f64; 3]) -> Self {
        Self([
            Complex64::new(v[0], 0.0),
            Complex64::new(v[1], 0.0),
            Complex64::new(v[2], 0.0),
        ])
    }

    pub const fn from_parts(re: [f64; 3], im: [f64; 3]) -> Self {
        Self([
            Complex64::new(re[0], im[0]),
            Complex64::new(re[1], im[1]),
            Complex64::new(re[2], im[2]),
        ])
    }

    /// Unconjugated dot product `Σ aᵢ bᵢ`.
    #[inline]
    pub fn dot(&self, other: &Self) -> Complex64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    #[inline]
    pub fn dot_real(&self, e: &[f64; 3]) -> Complex64 {
        self.0[0] * e[0] + self.0[1] * e[1] + self.0[2] * e[2]
    }

    pub fn conj(&self) -> Self {
        Self([self.0[0].conj(), self.0[1].conj(), self.0[2].conj()])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    /// Euclidean norm `sqrt(Σ |aᵢ|²)`.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest component modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Applies a real 3×3 matrix.
    pub fn transformed(&self, m: &[[f64; 3]; 3]) -> Self {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (i, row) in m.iter().enumerate() {
            out[i] = self.dot_real(row);
        }
        Self(out)
    }
}

impl Index<usize> for CVec3 {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl Add for CVec3 {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl Sub for CVec3 {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1], self.0[2] - rhs.0[2]])
    }
}

impl Neg for CVec3 {
    type Output = Self;

    fn neg(self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<Complex64> for CVec3 {
    type Output = Self;

    fn mul(self, s: Complex64) -> Self {
        Self([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

/// A real unit 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3([f64; 3]);

impl UnitVec3 {
    pub const X: Self = Self([1.0, 0.0, 0.0]);
    pub const Y: Self = Self([0.0, 1.0, 0.0]);
    pub const Z: Self = Self([0.0, 0.0, 1.0]);

    /// Accepts `v` only if `| |v| - 1 | <= 1e-12`.
    pub fn new(v: [f64; 3]) -> Result<Self> {
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("direction"));
        }
        let norm = norm3(&v);
        if (norm - 1.0).abs() > Tolerances::DEFAULT.validation {
            return Err(Error::NonUnitDirection { norm });
        }
        Ok(Self(v))
    }

    pub fn normalize(v: [f64; 3]) -> Result<Self> {
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("direction"));
        }
        let norm = norm3(&v);
        if norm == 0.0 {
            return Err(Error::NonUnitDirection { norm });
        }
        Ok(Self([v[0] / norm, v[1] / norm, v[2] / norm]))
    }

    #[inline]
    pub fn as_array(&self) -> &[f64; 3] {
        &self.0
    }

    pub fn reversed(&self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn cross(&self, other: &Self) -> [f64; 3] {
        let (a, b) = (&self.0, &other.0);
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    /// Rotation matrix for angle `theta` about this axis (Rodrigues).
    pub fn rotation(&self, theta: f64) -> [[f64; 3]; 3] {
        let [x, y, z] = self.0;
        let (s, c) = theta.sin_cos();
        let t = 1.0 - c;
        [
            [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
            [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
            [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
        ]
    }
}

pub(crate) fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// The pair `(m₁·m₂, (m₁·ê)(m₂·ê))`, no complex conjugation on either factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bilinear {
    pub dot: Complex64,
    pub radial: Complex64,
}

impl Bilinear {
    #[inline]
    pub fn new(m1: &CVec3, m2: &CVec3, e: &UnitVec3) -> Self {
        Self {
            dot: m1.dot(m2),
            radial: m1.dot_real(e.as_array()) * m2.dot_real(e.as_array()),
        }
    }

    /// `dot·a − 3·radial·b`, the shape shared by `J` and `K`.
    #[inline]
    pub fn combine(&self, dot_coeff: f64, radial_coeff: f64) -> Complex64 {
        self.dot * dot_coeff - self.radial * (3.0 * radial_coeff)
    }
}

/// Validating form of [`Bilinear::new`] for a raw direction.
pub fn bilinear_form(m1: &CVec3, m2: &CVec3, e_r: [f64; 3]) -> Result<Bilinear> {
    let e = UnitVec3::new(e_r)?;
    Ok(Bilinear::new(m1, m2, &e))
}
