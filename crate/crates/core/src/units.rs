//! Physical constants, natural units and the shared tolerance record.


use crate::dipole::{DipoleSpec, PairGeometry};
use crate::error::{Error, Result};

/// Vacuum permeability, reduced Planck constant and speed of light.
///
/// SI values are CODATA 2018. In dimensionless mode all three are 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    mu0: f64,
    hbar: f64,
    c: f64,
}

impl PhysicalConstants {
    pub const SI_MU0: f64 = 1.256_637_062_12e-6;
    pub const SI_HBAR: f64 = 1.054_571_817e-34;
    pub const SI_C: f64 = 299_792_458.0;

    pub fn new(mu0: f64, hbar: f64, c: f64) -> Result<Self> {
        for (name, value) in [("mu0", mu0), ("hbar", hbar), ("c", c)] {
            if !value.is_finite() {
                return Err(Error::NonFinite(name));
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveConstant { name, value });
            }
        }
        Ok(Self { mu0, hbar, c })
    }

    pub const fn si() -> Self {
        Self { mu0: Self::SI_MU0, hbar: Self::SI_HBAR, c: Self::SI_C }
    }

    pub const fn dimensionless() -> Self {
        Self { mu0: 1.0, hbar: 1.0, c: 1.0 }
    }

    #[inline]
    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    #[inline]
    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }

    /// `μ₀ / (4π r³ ħ)`: the strength scale of the `1/r³` interaction in rad/s
    /// per unit squared moment.
    #[inline]
    pub fn strength(&self, r: f64) -> f64 {
        self.mu0 / (4.0 * core::f64::consts::PI * r * r * r * self.hbar)
    }

    /// Retardation parameter `η = ωr/c`.
    #[inline]
    pub fn eta(&self, omega: f64, r: f64) -> f64 {
        omega * r / self.c
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::si()
    }
}

/// Every numerical tolerance used by validation, invariant checks and oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Hermiticity of moment matrices, unit-vector norms, tensor pairing.
    pub validation: f64,
    /// Relative frequency tolerance for calling two transitions resonant.
    pub resonance: f64,
    /// Closed-form `J` vs angular quadrature.
    pub angular_oracle: f64,
    /// Closed-form `K` (and Λ) vs regulated principal-value quadrature.
    pub pv_oracle: f64,
    /// Odd (sine) part of the angular integral, relative to its scale.
    pub oracle_structure: f64,
}

impl Tolerances {
    pub const DEFAULT: Self = Self {
        validation: 1e-12,
        resonance: 1e-9,
        angular_oracle: 1e-8,
        pv_oracle: 1e-4,
        oracle_structure: 1e-10,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Natural units built on a reference length `L` with `μ₀ = ħ = c = 1`.
///
/// Frequency unit `c/L`, energy unit `ħc/L`, moment unit `L·sqrt(ħc/μ₀)`.
/// In these units `μ₀m²/(r³ħ)` measured in `c/L` is unchanged, so every
/// coupling converts by a single frequency factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalUnits {
    length: f64,
    consts: PhysicalConstants,
}

impl NaturalUnits {
    pub fn new(length: f64, consts: PhysicalConstants) -> Result<Self> {
        if !length.is_finite() {
            return Err(Error::NonFinite("reference length"));
        }
        if length <= 0.0 {
            return Err(Error::NonPositiveSeparation(length));
        }
        Ok(Self { length, consts })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn frequency(&self) -> f64 {
        self.consts.c() / self.length
    }

    pub fn energy(&self) -> f64 {
        self.consts.hbar() * self.consts.c() / self.length
    }

    pub fn moment(&self) -> f64 {
        self.length * (self.consts.hbar() * self.consts.c() / self.consts.mu0()).sqrt()
    }

    pub fn spec_to_natural(&self, spec: &DipoleSpec) -> Result<DipoleSpec> {
        let e = self.energy();
        let m = 1.0 / self.moment();
        spec.map(|x| x / e, |v| v.scale(m))
    }

    pub fn spec_from_natural(&self, spec: &DipoleSpec) -> Result<DipoleSpec> {
        let e = self.energy();
        let m = self.moment();
        spec.map(|x| x * e, |v| v.scale(m))
    }

    pub fn geometry_to_natural(&self, geom: &PairGeometry) -> Result<PairGeometry> {
        PairGeometry::new(geom.r() / self.length, geom.direction())
    }

    pub fn geometry_from_natural(&self, geom: &PairGeometry) -> Result<PairGeometry> {
        PairGeometry::new(geom.r() * self.length, geom.direction())
    }
}
