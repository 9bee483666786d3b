//! Validated dipole and geometry descriptions.

use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::units::{PhysicalConstants, Tolerances};
use crate::vector::{norm3, CVec3, UnitVec3};

/// Level energies and the full moment matrix `m^{xy} = ⟨x|m̂|y⟩` of one dipole.
///
/// The moment matrix is stored row-major and is Hermitian by construction:
/// `m^{xy} = conj(m^{yx})` component-wise, so diagonal elements are real.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleSpec {
    energies: Vec<f64>,
    moments: Vec<CVec3>,
}

impl DipoleSpec {
    /// `moments` is the `d×d` matrix in row-major order.
    pub fn new(energies: Vec<f64>, moments: Vec<CVec3>) -> Result<Self> {
        let dim = energies.len();
        if dim < 2 {
            return Err(Error::TooFewLevels(dim));
        }
        if moments.len() != dim * dim {
            return Err(Error::MomentShape { dim, expected: dim * dim, got: moments.len() });
        }
        if !energies.iter().all(|e| e.is_finite()) {
            return Err(Error::NonFinite("level energies"));
        }
        if !moments.iter().all(CVec3::is_finite) {
            return Err(Error::NonFinite("moment matrix"));
        }

        let scale = moments.iter().map(CVec3::max_abs).fold(0.0, f64::max);
        let tol = Tolerances::DEFAULT.validation * scale;
        for row in 0..dim {
            for col in row..dim {
                let a = moments[row * dim + col];
                let b = moments[col * dim + row].conj();
                let deviation = (a - b).max_abs();
                if deviation > tol {
                    return Err(Error::NotHermitian { row, col, deviation });
                }
            }
        }
        Ok(Self { energies, moments })
    }

    /// Two-level dipole with ground `g = 0` at zero energy and `e = 1` at `ħΩ`.
    ///
    /// `transition` is `m^{eg}`; `m^{ge}` is its conjugate.
    pub fn two_level(
        omega: f64,
        consts: &PhysicalConstants,
        permanent_g: [f64; 3],
        permanent_e: [f64; 3],
        transition: CVec3,
    ) -> Result<Self> {
        let moments = alloc::vec![
            CVec3::real(permanent_g),
            transition.conj(),
            transition,
            CVec3::real(permanent_e),
        ];
        Self::new(alloc::vec![0.0, consts.hbar() * omega], moments)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    #[inline]
    pub fn energy(&self, x: usize) -> f64 {
        self.energies[x]
    }

    /// `m^{xy}`. Panics on out-of-range indices.
    #[inline]
    pub fn moment(&self, x: usize, y: usize) -> &CVec3 {
        &self.moments[x * self.dim() + y]
    }

    pub fn moments(&self) -> &[CVec3] {
        &self.moments
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.dim() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, dim: self.dim() })
        }
    }

    /// Rebuilds the dipole with every energy and every moment element transformed.
    pub fn map(&self, energy: impl Fn(f64) -> f64, moment: impl Fn(&CVec3) -> CVec3) -> Result<Self> {
        Self::new(
            self.energies.iter().map(|&e| energy(e)).collect(),
            self.moments.iter().map(moment).collect(),
        )
    }

    pub fn with_energies(&self, energies: Vec<f64>) -> Result<Self> {
        Self::new(energies, self.moments.clone())
    }

    /// Every moment element multiplied by a real factor.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        self.map(|e| e, |m| m.scale(lambda))
    }

    /// Every moment element rotated by a real orthogonal matrix.
    pub fn rotated(&self, rot: &[[f64; 3]; 3]) -> Result<Self> {
        self.map(|e| e, |m| m.transformed(rot))
    }

    /// Unchecked transition frequency `(E^{(y)} − E^{(x)})/ħ`.
    #[inline]
    pub(crate) fn omega(&self, y: usize, x: usize, consts: &PhysicalConstants) -> f64 {
        (self.energies[y] - self.energies[x]) / consts.hbar()
    }
}

/// `Ω^{yx} = (E^{(y)} − E^{(x)})/ħ` in rad/s.
pub fn transition_frequency(
    spec: &DipoleSpec,
    y: usize,
    x: usize,
    consts: &PhysicalConstants,
) -> Result<f64> {
    spec.check_index(y)?;
    spec.check_index(x)?;
    Ok(spec.omega(y, x, consts))
}

/// Separation `r > 0` and unit direction `ê_r` from dipole 1 to dipole 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    r: f64,
    e_r: UnitVec3,
}

impl PairGeometry {
    pub fn new(r: f64, e_r: UnitVec3) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::NonFinite("separation"));
        }
        if r <= 0.0 {
            return Err(Error::NonPositiveSeparation(r));
        }
        Ok(Self { r, e_r })
    }

    /// `r = |x₂ − x₁|`, `ê_r = (x₂ − x₁)/r`.
    pub fn from_positions(x1: [f64; 3], x2: [f64; 3]) -> Result<Self> {
        let d = [x2[0] - x1[0], x2[1] - x1[1], x2[2] - x1[2]];
        let r = norm3(&d);
        if r == 0.0 {
            return Err(Error::NonPositiveSeparation(r));
        }
        Self::new(r, UnitVec3::normalize(d)?)
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn direction(&self) -> UnitVec3 {
        self.e_r
    }

    /// The same pair seen from dipole 2.
    pub fn reversed(&self) -> Self {
        Self { r: self.r, e_r: self.e_r.reversed() }
    }

    pub fn with_distance(&self, r: f64) -> Result<Self> {
        Self::new(r, self.e_r)
    }
}
