//! Free-space coupling spectral density `J(ω)` and its angular-quadrature oracle.
//!
//! ```text
//! J(ω) = μ₀/(2πr³ħ) { m₁·m₂ [η² sin η + η cos η − sin η]
//!                   − 3 (m₁·ê_r)(m₂·ê_r) [η² sin η/3 + η cos η − sin η] },   η = ωr/c
//! ```
//!
//! `J` is odd in `ω`, vanishes like `η³` at the origin, and is returned in
//! rad/s (energy/ħ).

use num_complex::Complex64;

use crate::dipole::PairGeometry;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::units::{PhysicalConstants, Tolerances};
use crate::vector::{Bilinear, CVec3};

/// Minimum number of angular nodes per dimension accepted by the oracle.
pub const MIN_QUAD_POINTS: usize = 32;

/// Below this `|η|` the `J` brackets are summed from their Taylor series.
const SERIES_CUTOFF: f64 = 0.5;
const SERIES_TERMS: usize = 8;

/// The two real factors multiplying `m₁·m₂` and `3(m₁·ê)(m₂·ê)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketPair {
    pub eta: f64,
    pub dot: f64,
    pub radial: f64,
}

/// `J` brackets at `η`: `η² sin η + η cos η − sin η` and
/// `η² sin η/3 + η cos η − sin η`. Odd in `η`.
pub fn j_brackets(eta: f64) -> BracketPair {
    let a = eta.abs();
    let (dot, radial) = if a < SERIES_CUTOFF { j_series(a) } else { j_direct(a) };
    let s = if eta < 0.0 { -1.0 } else { 1.0 };
    BracketPair { eta, dot: s * dot, radial: s * radial }
}

fn j_direct(a: f64) -> (f64, f64) {
    let (s, c) = a.sin_cos();
    let common = a * c - s;
    (a * a * s + common, a * a * s / 3.0 + common)
}

/// Both brackets cancel to `O(η³)` (dot) and `O(η⁵)` (radial); the series
/// coefficient of `η^{2n+1}` is `(-1)^n [1/(2n)! − 1/(2n+1)! − w/(2n−1)!]`
/// with `w = 1` or `1/3`.
fn j_series(a: f64) -> (f64, f64) {
    let x2 = a * a;
    let mut dot = 0.0;
    let mut radial = 0.0;
    // factorials (2n-1)!, (2n)!, (2n+1)! for n = 1
    let mut f_odd_lo = 1.0;
    let mut f_even = 2.0;
    let mut f_odd_hi = 6.0;
    let mut power = a * x2;
    for n in 1..=SERIES_TERMS {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let base = 1.0 / f_even - 1.0 / f_odd_hi;
        dot += sign * (base - 1.0 / f_odd_lo) * power;
        radial += sign * (base - 1.0 / (3.0 * f_odd_lo)) * power;
        let m = 2.0 * n as f64;
        f_odd_lo = f_odd_hi;
        f_even = f_odd_hi * (m + 2.0);
        f_odd_hi = f_even * (m + 3.0);
        power *= x2;
    }
    (dot, radial)
}

/// `J` from a precomputed bilinear.
#[inline]
pub(crate) fn j_from_bilinear(omega: f64, r: f64, bil: &Bilinear, consts: &PhysicalConstants) -> Complex64 {
    let b = j_brackets(consts.eta(omega, r));
    bil.combine(b.dot, b.radial) * (2.0 * consts.strength(r))
}

/// `J_{1→2}(ω)` for the moment elements `m1 = m₁^{yx}`, `m2 = m₂^{uv}` (rad/s).
pub fn j_coupling(
    omega: f64,
    geom: &PairGeometry,
    m1: &CVec3,
    m2: &CVec3,
    consts: &PhysicalConstants,
) -> Complex64 {
    let bil = Bilinear::new(m1, m2, &geom.direction());
    j_from_bilinear(omega, geom.r(), &bil, consts)
}

/// Brute-force `J` from the mode integral over the direction of `k`:
///
/// ```text
/// J(ω) = μ₀ω³/(8π²c³ħ) ∮ dΩ_k e^{ik·r} [m₁·m₂ − (m₁·ê_k)(m₂·ê_k)]
/// ```
///
/// Product rule: Gauss–Legendre in `θ` and periodic trapezoid in `φ`, both
/// with `quad_points` nodes (rounded up to even in `φ` so the grid is
/// antipodally symmetric). The sine part of `e^{ik·r}` must integrate to zero
/// because the bracket is even in `ê_k`; a violation is reported rather than
/// discarded.
pub fn j_coupling_oracle(
    omega: f64,
    geom: &PairGeometry,
    m1: &CVec3,
    m2: &CVec3,
    consts: &PhysicalConstants,
    quad_points: usize,
) -> Result<Complex64> {
    if quad_points < MIN_QUAD_POINTS {
        return Err(Error::TooFewQuadPoints { min: MIN_QUAD_POINTS, got: quad_points });
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::NonPositiveOracleFrequency(omega));
    }
    let eta = consts.eta(omega, geom.r());
    let e_r = geom.direction();
    let e_r = e_r.as_array();
    let dot = m1.dot(m2);

    let theta_rule = GaussLegendre::new(quad_points);
    let n_phi = quad_points + quad_points % 2;
    let d_phi = core::f64::consts::TAU / n_phi as f64;
    let half_pi = core::f64::consts::FRAC_PI_2;

    let mut even = Complex64::new(0.0, 0.0);
    let mut odd = Complex64::new(0.0, 0.0);
    for (x, w) in theta_rule.nodes().iter().zip(theta_rule.weights()) {
        let theta = half_pi * (1.0 + x);
        let (st, ct) = theta.sin_cos();
        let weight = w * half_pi * st * d_phi;
        for j in 0..n_phi {
            let (sp, cp) = (d_phi * j as f64).sin_cos();
            let e_k = [st * cp, st * sp, ct];
            let bracket = dot - m1.dot_real(&e_k) * m2.dot_real(&e_k);
            let phase = eta * (e_k[0] * e_r[0] + e_k[1] * e_r[1] + e_k[2] * e_r[2]);
            let (s, c) = phase.sin_cos();
            even += bracket * (weight * c);
            odd += bracket * (weight * s);
        }
    }

    let scale = 4.0 * core::f64::consts::PI * m1.norm() * m2.norm();
    let tolerance = Tolerances::DEFAULT.oracle_structure;
    if odd.norm() > tolerance * scale {
        return Err(Error::OracleStructure { odd: odd.norm() / scale, tolerance });
    }
    let angular = even + Complex64::new(0.0, 1.0) * odd;
    let prefactor = consts.strength(geom.r()) * eta * eta * eta / core::f64::consts::TAU;
    Ok(angular * prefactor)
}
