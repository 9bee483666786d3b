//! Principal-value kernel `K(Ω)`, the `ξ` and `Λ` coefficients and the
//! memory kernel `D(s)`.
//!
//! Closed form (even in `Ω`, `η = |Ω|r/c`):
//!
//! ```text
//! K(Ω) = μ₀/(4πr³ħ) { m₁·m₂ [cos η + η sin η − η² cos η]
//!                   − 3 (m₁·ê_r)(m₂·ê_r) [cos η + η sin η − η² cos η/3] }
//! ```
//!
//! which is `P∫ dω/2π J(ω)/(Ω−ω)` over the whole real line. The oracles
//! evaluate such integrals directly: the integrand grows like `ω² sin(ωr/c)`,
//! so each integral is damped by the Abel regulator `e^{-εωr/c}`, computed
//! for a decreasing sequence of `ε`, and extrapolated polynomially to `ε = 0`.
//! The pole at `ω = |Ω|` is removed by subtracting its residue over a
//! symmetric window.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dipole::PairGeometry;
use crate::error::{Error, Result};
use crate::quadrature::{extrapolate_to_zero, graded_edges, GaussLegendre};
use crate::spectral::{j_brackets, j_coupling, BracketPair};
use crate::units::PhysicalConstants;
use crate::vector::{Bilinear, CVec3};

const TAU: f64 = core::f64::consts::TAU;
const NODES_PER_PANEL: usize = 20;
/// Past `εη = 60` the regulated integrands are below `1e-26·η²`.
const NEGLIGIBLE_DECAY: f64 = 60.0;

#[inline]
fn cutoff(eps: f64, eta_max: f64) -> f64 {
    eta_max.min(NEGLIGIBLE_DECAY / eps)
}

/// Regulator sequence and integration cutoff for the principal-value oracles.
///
/// `epsilons` are dimensionless (the regulator is `e^{-εη}`) and strictly
/// decreasing; `eta_max` is the upper integration limit in `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegulatorPlan {
    epsilons: Vec<f64>,
    eta_max: f64,
    extrapolation_order: usize,
    rel_tol: f64,
}

impl RegulatorPlan {
    pub const DEFAULT_EPSILONS: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
    /// `eta_max · min(ε)` used by [`RegulatorPlan::with_epsilons`].
    pub const DEFAULT_CUTOFF_DECAY: f64 = 48.0;
    /// Plans with `eta_max ≥ WASTE_GUARD / min(ε)` are rejected.
    pub const WASTE_GUARD: f64 = 50.0;
    /// Plans with `eta_max < TRUNCATION_GUARD / min(ε)` are rejected.
    pub const TRUNCATION_GUARD: f64 = 20.0;

    pub fn new(epsilons: Vec<f64>, eta_max: f64, extrapolation_order: usize, rel_tol: f64) -> Result<Self> {
        if epsilons.is_empty() {
            return Err(Error::InvalidPlan("no regulator values"));
        }
        if !epsilons.iter().all(|e| e.is_finite() && *e > 0.0) {
            return Err(Error::InvalidPlan("regulator values must be positive and finite"));
        }
        if !epsilons.windows(2).all(|w| w[1] < w[0]) {
            return Err(Error::InvalidPlan("regulator values must be strictly decreasing"));
        }
        if extrapolation_order < 2 {
            return Err(Error::InvalidPlan("extrapolation order must be at least 2"));
        }
        if extrapolation_order + 1 > epsilons.len() {
            return Err(Error::InvalidPlan("extrapolation order needs order + 1 regulator values"));
        }
        if !(rel_tol > 0.0) || !rel_tol.is_finite() {
            return Err(Error::InvalidPlan("tolerance must be positive"));
        }
        let eps_min = epsilons[epsilons.len() - 1];
        if !eta_max.is_finite() || eta_max * eps_min >= Self::WASTE_GUARD {
            return Err(Error::InvalidPlan("eta_max >= 50/min(epsilon) is wasteful"));
        }
        if eta_max * eps_min < Self::TRUNCATION_GUARD {
            return Err(Error::InvalidPlan("eta_max < 20/min(epsilon) truncates the regulated tail"));
        }
        Ok(Self { epsilons, eta_max, extrapolation_order, rel_tol })
    }

    /// Plan with `eta_max = 48/min(ε)` and the highest order the sequence supports.
    pub fn with_epsilons(epsilons: Vec<f64>, rel_tol: f64) -> Result<Self> {
        let eps_min = epsilons.last().copied().unwrap_or(0.0);
        let order = epsilons.len().saturating_sub(1);
        Self::new(epsilons, Self::DEFAULT_CUTOFF_DECAY / eps_min, order, rel_tol)
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn eta_max(&self) -> f64 {
        self.eta_max
    }

    pub fn extrapolation_order(&self) -> usize {
        self.extrapolation_order
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    /// Neville-extrapolates the per-`ε` values. `scale` is the natural
    /// magnitude of the quantity; it sets an absolute floor so values that
    /// pass through zero are not judged on relative error alone.
    fn extrapolate(&self, regulated: Vec<Complex64>, scale: f64) -> Result<Regulated> {
        let used = self.extrapolation_order + 1;
        let start = self.epsilons.len() - used;
        let estimates = extrapolate_to_zero(&self.epsilons[start..], &regulated[start..]);
        let value = estimates[used - 1];
        let error_estimate = (value - estimates[used - 2]).norm();
        let tolerance = self.rel_tol * value.norm().max(1e-3 * scale);
        if !(error_estimate <= tolerance) {
            return Err(Error::NonConvergence { error_estimate, tolerance, regulated, estimates });
        }
        Ok(Regulated {
            value,
            error_estimate,
            regulated: self.epsilons.iter().copied().zip(regulated).collect(),
            estimates,
        })
    }
}

impl Default for RegulatorPlan {
    fn default() -> Self {
        Self::with_epsilons(Self::DEFAULT_EPSILONS.to_vec(), 1e-4).expect("default plan is valid")
    }
}

/// Result of a regulated, extrapolated integral.
#[derive(Debug, Clone, PartialEq)]
pub struct Regulated {
    /// Extrapolated value at `ε = 0`.
    pub value: Complex64,
    /// Difference between the two highest-order extrapolants.
    pub error_estimate: f64,
    /// `(ε, value at ε)` for every regulator in the plan.
    pub regulated: Vec<(f64, Complex64)>,
    /// Extrapolants of increasing order; the last one is `value`.
    pub estimates: Vec<Complex64>,
}

/// `K` brackets: `cos η + η sin η − η² cos η` and `cos η + η sin η − η² cos η/3`.
/// Even in `η`; both equal 1 at `η = 0`.
pub fn k_brackets(eta: f64) -> BracketPair {
    let a = eta.abs();
    let (s, c) = a.sin_cos();
    let common = c + a * s;
    BracketPair { eta, dot: common - a * a * c, radial: common - a * a * c / 3.0 }
}

#[inline]
pub(crate) fn k_from_bilinear(omega: f64, r: f64, bil: &Bilinear, consts: &PhysicalConstants) -> Complex64 {
    let b = k_brackets(consts.eta(omega, r));
    bil.combine(b.dot, b.radial) * consts.strength(r)
}

/// `K_{1→2}(Ω)` for `m1 = m₁^{yx}`, `m2 = m₂^{uv}` (rad/s).
pub fn k_kernel(
    omega: f64,
    geom: &PairGeometry,
    m1: &CVec3,
    m2: &CVec3,
    consts: &PhysicalConstants,
) -> Complex64 {
    let bil = Bilinear::new(m1, m2, &geom.direction());
    k_from_bilinear(omega, geom.r(), &bil, consts)
}

/// `Λ(Ω) = K(Ω) − (i/2) J(Ω)` from the closed forms.
pub fn lambda_coefficient(
    omega: f64,
    geom: &PairGeometry,
    m1: &CVec3,
    m2: &CVec3,
    consts: &PhysicalConstants,
) -> Complex64 {
    k_kernel(omega, geom, m1, m2, consts)
        - Complex64::new(0.0, 0.5) * j_coupling(omega, geom, m1, m2, consts)
}

/// `J` as a function of `η` for a fixed pair of moment elements.
struct Spectral {
    bil: Bilinear,
    j_scale: f64,
    strength: f64,
    moment_scale: f64,
}

impl Spectral {
    fn new(geom: &PairGeometry, m1: &CVec3, m2: &CVec3, consts: &PhysicalConstants) -> Self {
        let strength = consts.strength(geom.r());
        Self {
            bil: Bilinear::new(m1, m2, &geom.direction()),
            j_scale: 2.0 * strength,
            strength,
            moment_scale: m1.norm() * m2.norm(),
        }
    }

    #[inline]
    fn at(&self, eta: f64) -> Complex64 {
        let b = j_brackets(eta);
        self.bil.combine(b.dot, b.radial) * self.j_scale
    }

    /// Typical magnitude of `K` near `η₀`.
    fn scale(&self, eta0: f64) -> f64 {
        self.strength * self.moment_scale * eta0.abs().powi(2).max(1.0)
    }
}

/// `∫₀^{η_max} g(η) [1/(p−η) − f/(p+η)] dη` with `g = J·e^{-εη}` and `f = 1`
/// when `folded`, taken as a principal value when `p > 0`.
fn principal_value(
    rule: &GaussLegendre,
    spectral: &Spectral,
    pole: f64,
    folded: bool,
    eps: f64,
    eta_max: f64,
) -> Complex64 {
    let width = TAU / 3.0;
    let eta_max = cutoff(eps, eta_max);
    let g = |eta: f64| spectral.at(eta) * (-eps * eta).exp();
    let mirror = |eta: f64| if folded { 1.0 / (pole + eta) } else { 0.0 };
    let full = |eta: f64| g(eta) * (1.0 / (pole - eta) - mirror(eta));

    if pole <= 0.0 {
        let first = width.min(pole.abs().max(0.05));
        let edges = graded_edges(0.0, eta_max, first, width);
        return rule.integrate_edges(&edges, full);
    }

    let delta = (0.5 * pole).min(1.0);
    let g_pole = g(pole);
    let window = |eta: f64| (g(eta) - g_pole) / (pole - eta) - g(eta) * mirror(eta);
    let mut acc = rule.integrate(pole - delta, pole, window) + rule.integrate(pole, pole + delta, window);
    acc += rule.integrate_edges(&graded_edges(pole - delta, 0.0, delta, width), full)
        * -1.0;
    acc += rule.integrate_edges(&graded_edges(pole + delta, eta_max, delta, width), full);
    acc
}

fn check_pole(eta0: f64, eta_max: f64) -> Result<()> {
    if !eta0.is_finite() {
        return Err(Error::NonFinite("frequency"));
    }
    if eta0.abs() > 0.5 * eta_max {
        return Err(Error::InvalidPlan("evaluation frequency is beyond half the plan cutoff"));
    }
    Ok(())
}

/// `P∫₀^∞ (dω/2π) J(ω)·2ω/(Ω²−ω²)·e^{-εωr/c}` at a single regulator value.
pub fn regulated_k(
    omega: f64,
    eps: f64,
    eta_max: f64,
    geom: &PairGeometry,
    m1: &CVec3,
    m2: &CVec3,
    consts: &PhysicalConstants,
) -> Result<Complex64> {
    let eta0 = consts.eta(omega, geom.r()).abs();
    check_pole(eta0, eta_max)?;
    let spectral = Spectral::new(geom, m1, m2, consts);
    let rule = GaussLegendre::new(NODES_PER_PANEL);
    Ok(principal_value(&rule, &spectral, eta0, true, eps, eta_max) / TAU)
}

/// Principal-value oracle for [`k_kernel`]: the full-line integral folded onto
/// `ω > 0` using the oddness of `J`, regulated and extrapolated to `ε = 0`.
pub fn k_kernel_oracle(
    omega: f64,
    geom: &PairGeometry,
    m1: &CVec3,
    m2: &CVec3,
    consts: &PhysicalConstants,
    plan: &RegulatorPlan,
) -> Result<Regulated> {
    let eta0 = consts.eta(omega, geom.r()).abs();
    check_pole(eta0, plan.eta_max)?;
    let spectral = Spectral::new(geom, m1, m2, consts);
    let rule = GaussLegendre::new(NODES_PER_PANEL);
    let values = plan
        .epsilons
        .iter()
        .map(|&eps| principal_value(&rule, &spectral, eta0, true, eps, plan.eta_max) / TAU)
        .collect();
    plan.extrapolate(values, spectral.scale(eta0))
}

fn xi_at(rule: &GaussLegendre, spectral: &Spectral, eta0: f64, eps: f64, eta_max: f64) -> Complex64 {
    let principal = principal_value(rule, spectral, eta0, false, eps, eta_max) / TAU;
    if eta0 > 0.0 {
        principal - Complex64::new(0.0, 0.5) * spectral.at(eta0) * (-eps * eta0).exp()
    } else {
        principal
    }
}

/// `ξ_ε(Ω) = P∫₀^∞ (dω/2π) J_ε(ω)/(Ω−ω) − (i/2) J_ε(Ω) θ(Ω)` with
/// `J_ε = J e^{-εωr/c}`: the exact time integral `∫₀^∞ ds e^{iΩs} D_ε(s)`.
pub fn regulated_xi(
    omega: f64,
    eps: f64,
    eta_max: f64,
    geom: &PairGeometry,
    m1: &CVec3,
    m2: &CVec3,
    consts: &PhysicalConstants,
) -> Result<Complex64> {
    let eta0 = consts.eta(omega, geom.r());
    check_pole(eta0, eta_max)?;
    let spectral = Spectral::new(geom, m1, m2, consts);
    let rule = GaussLegendre::new(NODES_PER_PANEL);
    Ok(xi_at(&rule, &spectral, eta0, eps, eta_max))
}

/// `ξ(Ω) = P∫₀^∞ (dω/2π) J(ω)/(Ω−ω) − (i/2) J(Ω) θ(Ω)`.
///
/// The half-line principal part has no closed form; it is checked through
/// `ξ^{yx,uv}(Ω) + conj(ξ^{xy,vu}(−Ω)) = Λ(Ω)`.
pub fn xi_coefficient(
    omega: f64,
    geom: &PairGeometry,
    m1: &CVec3,
    m2: &CVec3,
    consts: &PhysicalConstants,
    plan: &RegulatorPlan,
) -> Result<Regulated> {
    let eta0 = consts.eta(omega, geom.r());
    check_pole(eta0, plan.eta_max)?;
    let spectral = Spectral::new(geom, m1, m2, consts);
    let rule = GaussLegendre::new(NODES_PER_PANEL);
    let values = plan
        .epsilons
        .iter()
        .map(|&eps| xi_at(&rule, &spectral, eta0, eps, plan.eta_max))
        .collect();
    plan.extrapolate(values, spectral.scale(eta0))
}

fn memory_at(rule: &GaussLegendre, spectral: &Spectral, tau: f64, eps: f64, eta_max: f64, rate: f64) -> Complex64 {
    let width = TAU / (3.0 * (1.0 + tau));
    let eta_max = cutoff(eps, eta_max);
    let integral = rule.integrate_panels(0.0, eta_max, width, |eta| {
        spectral.at(eta) * Complex64::new(-eps * eta, -eta * tau).exp()
    });
    Complex64::new(0.0, -rate / TAU) * integral
}

/// `D_ε(s) = −i ∫₀^∞ (dω/2π) J(ω) e^{-εωr/c} e^{-iωs}` (rad/s²).
pub fn regulated_memory_kernel(
    s: f64,
    eps: f64,
    eta_max: f64,
    geom: &PairGeometry,
    m1: &CVec3,
    m2: &CVec3,
    consts: &PhysicalConstants,
) -> Result<Complex64> {
    if !(s >= 0.0) {
        return Err(Error::NegativeTime(s));
    }
    let spectral = Spectral::new(geom, m1, m2, consts);
    let rule = GaussLegendre::new(NODES_PER_PANEL);
    let rate = consts.c() / geom.r();
    Ok(memory_at(&rule, &spectral, s * rate, eps, eta_max, rate))
}

/// Memory kernel `D(s) = −i ∫₀^∞ (dω/2π) J(ω) e^{-iωs}`, regulated and
/// extrapolated to `ε = 0`.
///
/// `D` is distribution-valued on the light cone `s = r/c`; there the
/// regulated values grow like `ε⁻³` and the extrapolation reports
/// [`Error::NonConvergence`] with the per-`ε` values attached.
pub fn memory_kernel(
    s: f64,
    geom: &PairGeometry,
    m1: &CVec3,
    m2: &CVec3,
    consts: &PhysicalConstants,
    plan: &RegulatorPlan,
) -> Result<Regulated> {
    if !(s >= 0.0) {
        return Err(Error::NegativeTime(s));
    }
    let spectral = Spectral::new(geom, m1, m2, consts);
    let rule = GaussLegendre::new(NODES_PER_PANEL);
    let rate = consts.c() / geom.r();
    let tau = s * rate;
    let values = plan
        .epsilons
        .iter()
        .map(|&eps| memory_at(&rule, &spectral, tau, eps, plan.eta_max, rate))
        .collect();
    plan.extrapolate(values, spectral.strength * spectral.moment_scale * rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::UnitVec3;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn bracket_values() {
        let b = k_brackets(0.0);
        assert_eq!((b.dot, b.radial), (1.0, 1.0));
        let b = k_brackets(FRAC_PI_2);
        assert!(close(b.dot, FRAC_PI_2, 1e-14) && close(b.radial, FRAC_PI_2, 1e-14));
        let b = k_brackets(PI);
        assert!(close(b.dot, PI * PI - 1.0, 1e-14));
        assert!(close(b.radial, PI * PI / 3.0 - 1.0, 1e-14));
        assert_eq!(k_brackets(-1.7), BracketPair { eta: -1.7, ..k_brackets(1.7) });
    }

    #[test]
    fn collinear_static_and_quarter_wave() {
        let consts = PhysicalConstants::si();
        let (r, m) = (5e-9, 9.274e-24);
        let geom = PairGeometry::new(r, UnitVec3::Z).unwrap();
        let v = CVec3::real([0.0, 0.0, m]);
        let pref = consts.mu0() * m * m / (r * r * r * consts.hbar());

        let k0 = k_kernel(0.0, &geom, &v, &v, &consts);
        assert!(close(k0.re / pref, -2.0 / (4.0 * PI), 1e-14));

        let omega = FRAC_PI_2 * consts.c() / r;
        let k = k_kernel(omega, &geom, &v, &v, &consts);
        assert!(close(k.re / pref, -0.25, 1e-13), "{}", k.re / pref);
    }

    #[test]
    fn lambda_at_zero_is_real() {
        let consts = PhysicalConstants::dimensionless();
        let geom = PairGeometry::new(1.0, UnitVec3::normalize([0.2, -1.0, 0.4]).unwrap()).unwrap();
        let m1 = CVec3::real([1.0, 0.5, -0.2]);
        let m2 = CVec3::real([0.3, 0.0, 1.1]);
        let l = lambda_coefficient(0.0, &geom, &m1, &m2, &consts);
        assert_eq!(l.im, 0.0);
        assert_eq!(l, k_kernel(0.0, &geom, &m1, &m2, &consts));
    }

    #[test]
    fn plan_validation() {
        assert!(RegulatorPlan::new(alloc::vec![0.1, 0.2, 0.05], 400.0, 2, 1e-4).is_err());
        assert!(RegulatorPlan::new(alloc::vec![0.1, 0.05], 400.0, 2, 1e-4).is_err());
        assert!(RegulatorPlan::new(alloc::vec![0.2, 0.1, 0.05], 1000.0, 2, 1e-4).is_err());
        assert!(RegulatorPlan::new(alloc::vec![0.2, 0.1, 0.05], 300.0, 2, 1e-4).is_err());
        assert!(RegulatorPlan::new(alloc::vec![0.2, 0.1, 0.05], 800.0, 2, 1e-4).is_ok());
        assert!(RegulatorPlan::new(alloc::vec![0.2, 0.1, -0.05], 800.0, 2, 1e-4).is_err());
        let d = RegulatorPlan::default();
        assert_eq!(d.epsilons(), &RegulatorPlan::DEFAULT_EPSILONS);
        assert_eq!(d.extrapolation_order(), 3);
        assert!(RegulatorPlan::with_epsilons(alloc::vec![0.2, 0.1, 0.05, 0.025], 1e-4).is_ok());
    }

    #[test]
    fn orthogonal_triad_oracles_vanish() {
        let consts = PhysicalConstants::dimensionless();
        let geom = PairGeometry::new(1.0, UnitVec3::Z).unwrap();
        let m1 = CVec3::real([1.0, 0.0, 0.0]);
        let m2 = CVec3::real([0.0, 1.0, 0.0]);
        let plan = RegulatorPlan::default();
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(k_kernel_oracle(0.7, &geom, &m1, &m2, &consts, &plan).unwrap().value, zero);
        assert_eq!(xi_coefficient(0.7, &geom, &m1, &m2, &consts, &plan).unwrap().value, zero);
        assert_eq!(memory_kernel(0.3, &geom, &m1, &m2, &consts, &plan).unwrap().value, zero);
    }

    #[test]
    fn xi_negative_frequency_has_no_delta_part() {
        let consts = PhysicalConstants::dimensionless();
        let geom = PairGeometry::new(1.0, UnitVec3::Z).unwrap();
        let v = CVec3::real([0.0, 0.0, 1.0]);
        let eps = 0.1;
        let xi = regulated_xi(-0.8, eps, 400.0, &geom, &v, &v, &consts).unwrap();
        let spectral = Spectral::new(&geom, &v, &v, &consts);
        let rule = GaussLegendre::new(NODES_PER_PANEL);
        let principal = principal_value(&rule, &spectral, -0.8, false, eps, 400.0) / TAU;
        assert_eq!(xi, principal);
        // real moments: J real, so the half-line principal part is real
        assert_eq!(xi.im, 0.0);
    }

    #[test]
    fn light_cone_is_reported() {
        let consts = PhysicalConstants::dimensionless();
        let geom = PairGeometry::new(1.0, UnitVec3::Z).unwrap();
        let v = CVec3::real([1.0, 0.0, 0.0]);
        match memory_kernel(1.0, &geom, &v, &v, &consts, &RegulatorPlan::default()) {
            Err(Error::NonConvergence { regulated, estimates, .. }) => {
                assert_eq!(regulated.len(), 4);
                assert_eq!(estimates.len(), 4);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
        assert!(matches!(
            memory_kernel(-1.0, &geom, &v, &v, &consts, &RegulatorPlan::default()),
            Err(Error::NegativeTime(_))
        ));
    }
}
