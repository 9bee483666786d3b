//! Assembly of the interaction matrix on the two-dipole product space.
//!
//! Composite basis: the state `|x₁⟩ ⊗ |x₂⟩` has index `x₁·d₂ + x₂`
//! (dipole 1 major). The term `|y⟩⟨x| ⊗ |u⟩⟨v|` therefore lands at row
//! `y·d₂ + u`, column `x·d₂ + v`, and each matrix element receives exactly one
//! coefficient. Entries are in rad/s (energy divided by ħ).

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Sub};

use num_complex::Complex64;

use crate::coupling::{CouplingTensor, TermIndex};
use crate::dipole::{DipoleSpec, PairGeometry};
use crate::error::{Error, Result};
use crate::units::PhysicalConstants;
use crate::vector::{CVec3, UnitVec3};

/// Dense square complex matrix on the `d₁·d₂` composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    d1: usize,
    d2: usize,
    entries: Vec<Complex64>,
}

impl HamiltonianMatrix {
    pub fn zeros(d1: usize, d2: usize) -> Self {
        let n = d1 * d2;
        Self { d1, d2, entries: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    /// Wraps row-major entries of an `(d₁·d₂)²` matrix.
    pub fn from_entries(d1: usize, d2: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != (d1 * d2) * (d1 * d2) {
            return Err(Error::Invalid("matrix entries do not match the composite dimension"));
        }
        Ok(Self { d1, d2, entries })
    }

    pub fn dim(&self) -> usize {
        self.d1 * self.d2
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    /// Composite index of `|x₁⟩ ⊗ |x₂⟩`.
    pub fn index(&self, x1: usize, x2: usize) -> usize {
        x1 * self.d2 + x2
    }

    /// Inverse of [`index`](Self::index).
    pub fn basis(&self, k: usize) -> (usize, usize) {
        (k / self.d2, k % self.d2)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    fn get_mut(&mut self, row: usize, col: usize) -> &mut Complex64 {
        let n = self.dim();
        &mut self.entries[row * n + col]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Coefficient multiplying `|y⟩⟨x| ⊗ |u⟩⟨v|`.
    pub fn coefficient(&self, idx: TermIndex) -> Complex64 {
        self.get(self.index(idx.y, idx.u), self.index(idx.x, idx.v))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim();
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.entries[i * n + j] = self.entries[j * n + i].conj();
            }
        }
        out
    }

    /// `max |H − H†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entries[i * n + j] - self.entries[j * n + i].conj()).norm());
            }
        }
        worst
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { d1: self.d1, d2: self.d2, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.dims(), other.dims(), "matrix dimensions differ");
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| f(*a, *b)).collect();
        Self { d1: self.d1, d2: self.d2, entries }
    }
}

impl Add for &HamiltonianMatrix {
    type Output = HamiltonianMatrix;

    fn add(self, rhs: Self) -> HamiltonianMatrix {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &HamiltonianMatrix {
    type Output = HamiltonianMatrix;

    fn sub(self, rhs: Self) -> HamiltonianMatrix {
        self.zip(rhs, |a, b| a - b)
    }
}

/// `H = Σ (G^(P) + G^(D)) |y⟩⟨x| ⊗ |u⟩⟨v|`.
pub fn assemble(tensor: &CouplingTensor) -> HamiltonianMatrix {
    assemble_with(tensor, true)
}

/// As [`assemble`], optionally leaving out the `G^(D)` part.
pub fn assemble_with(tensor: &CouplingTensor, include_dissipative: bool) -> HamiltonianMatrix {
    let (d1, d2) = tensor.dims();
    let mut h = HamiltonianMatrix::zeros(d1, d2);
    for idx in tensor.terms() {
        let g = if include_dissipative { tensor.total(idx) } else { tensor.principal(idx) };
        let (row, col) = (h.index(idx.y, idx.u), h.index(idx.x, idx.v));
        *h.get_mut(row, col) = g;
    }
    h
}

/// Reads the per-term coefficients back out of a matrix, in tensor storage order.
pub fn decompose(h: &HamiltonianMatrix) -> Vec<(TermIndex, Complex64)> {
    let (d1, d2) = h.dims();
    let mut out = Vec::with_capacity(h.entries.len());
    for y in 0..d1 {
        for x in 0..d1 {
            for u in 0..d2 {
                for v in 0..d2 {
                    let idx = TermIndex::new(y, x, u, v);
                    out.push((idx, h.coefficient(idx)));
                }
            }
        }
    }
    out
}

/// Static coefficient `μ₀/(4πr³ħ) [m₁·m₂ − 3(m₁·ê_r)(m₂·ê_r)]` (rad/s).
pub fn classical_coefficient(m1: &CVec3, m2: &CVec3, geom: &PairGeometry, consts: &PhysicalConstants) -> Complex64 {
    let e = geom.direction();
    let e = e.as_array();
    let mut dot = Complex64::new(0.0, 0.0);
    let mut p1 = Complex64::new(0.0, 0.0);
    let mut p2 = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        dot += m1[i] * m2[i];
        p1 += m1[i] * e[i];
        p2 += m2[i] * e[i];
    }
    (dot - p1 * p2 * 3.0) * consts.strength(geom.r())
}

/// Component matrix `(M_i)[y][x] = m^{yx}_i` contracted with `w`.
fn contracted(spec: &DipoleSpec, w: &[f64; 3]) -> Vec<Complex64> {
    spec.moments().iter().map(|m| m.dot_real(w)).collect()
}

/// Adds `s · A ⊗ B` into `h`.
fn add_kron(h: &mut HamiltonianMatrix, a: &[Complex64], b: &[Complex64], s: f64) {
    let (d1, d2) = h.dims();
    for y in 0..d1 {
        for x in 0..d1 {
            let ayx = a[y * d1 + x] * s;
            for u in 0..d2 {
                for v in 0..d2 {
                    let (row, col) = (h.index(y, u), h.index(x, v));
                    *h.get_mut(row, col) += ayx * b[u * d2 + v];
                }
            }
        }
    }
}

/// Operator form of the static interaction, `(μ₀/4πr³ħ)[m̂₁·m̂₂ − 3(m̂₁·ê_r)(m̂₂·ê_r)]`,
/// built as Kronecker products of the moment component matrices.
pub fn classical_hamiltonian(
    spec1: &DipoleSpec,
    spec2: &DipoleSpec,
    geom: &PairGeometry,
    consts: &PhysicalConstants,
) -> HamiltonianMatrix {
    let mut h = HamiltonianMatrix::zeros(spec1.dim(), spec2.dim());
    let s = consts.strength(geom.r());
    for axis in [UnitVec3::X, UnitVec3::Y, UnitVec3::Z] {
        let w = axis.as_array();
        add_kron(&mut h, &contracted(spec1, w), &contracted(spec2, w), s);
    }
    let e = geom.direction();
    add_kron(&mut h, &contracted(spec1, e.as_array()), &contracted(spec2, e.as_array()), -3.0 * s);
    h
}

/// Copy of `tensor` with counter-rotating and mixed terms removed.
pub fn rwa_filter(tensor: &CouplingTensor, resonance_tol: f64) -> CouplingTensor {
    tensor.zeroed_where(|idx| !tensor.class(idx, resonance_tol).kept_by_rwa())
}

/// Deviation of the full interaction from the static one at a single separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DickePoint {
    pub r: f64,
    /// Largest `|Ω| r / c` over all transitions of both dipoles.
    pub eta_max: f64,
    /// `‖H − H_cl‖_F / ‖H_cl‖_F`.
    pub frobenius: f64,
    /// `‖H − H_cl‖_max / ‖H_cl‖_max`.
    pub max_entry: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DickeReport {
    pub points: Vec<DickePoint>,
    /// Least-squares slope of `ln(frobenius)` against `ln r` over the points
    /// with `r ≤ 10·r_min`; `None` with fewer than two usable points.
    pub slope: Option<f64>,
}

/// Compares `assemble(coupling_tensor(..))` with [`classical_hamiltonian`]
/// across the given separations (positive, ascending).
pub fn dicke_deviation(
    spec1: &DipoleSpec,
    spec2: &DipoleSpec,
    direction: UnitVec3,
    r_values: &[f64],
    consts: &PhysicalConstants,
) -> Result<DickeReport> {
    if r_values.is_empty() {
        return Err(Error::Invalid("no separations given"));
    }
    if r_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("separations must be strictly ascending"));
    }
    let omega_max = [spec1, spec2]
        .iter()
        .flat_map(|s| s.energies().iter().flat_map(move |a| s.energies().iter().map(move |b| (a - b).abs())))
        .fold(0.0, f64::max)
        / consts.hbar();
    let mut points = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let geom = PairGeometry::new(r, direction)?;
        let full = assemble(&crate::coupling::coupling_tensor(spec1, spec2, &geom, consts)?);
        let classical = classical_hamiltonian(spec1, spec2, &geom, consts);
        let (nf, nm) = (classical.frobenius_norm(), classical.max_abs());
        if nf == 0.0 {
            return Err(Error::UndefinedDeviation);
        }
        let diff = &full - &classical;
        points.push(DickePoint {
            r,
            eta_max: consts.eta(omega_max, r),
            frobenius: diff.frobenius_norm() / nf,
            max_entry: diff.max_abs() / nm,
        });
    }
    let r_min = r_values[0];
    let fit: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.r <= 10.0 * r_min * (1.0 + 1e-12) && p.frobenius > 0.0)
        .map(|p| (p.r.ln(), p.frobenius.ln()))
        .collect();
    Ok(DickeReport { points, slope: least_squares_slope(&fit) })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::coupling_tensor;
    use crate::kernel::k_kernel;

    const G: usize = 0;
    const E: usize = 1;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::dimensionless()
    }

    fn resonant_pair(omega: f64) -> (DipoleSpec, DipoleSpec) {
        let t = CVec3::from_parts([0.0, 0.0, 1.0], [0.0, 0.3, 0.0]);
        let a = DipoleSpec::two_level(omega, &consts(), [0.0; 3], [0.0; 3], t).unwrap();
        (a.clone(), a)
    }

    #[test]
    fn basis_round_trip() {
        let h = HamiltonianMatrix::zeros(3, 2);
        for k in 0..h.dim() {
            let (a, b) = h.basis(k);
            assert_eq!(h.index(a, b), k);
        }
        assert_eq!(h.basis(3), (1, 1));
    }

    #[test]
    fn zero_tensor_gives_zero_matrix() {
        let z = DipoleSpec::new(vec![0.0, 1.0], vec![CVec3::ZERO; 4]).unwrap();
        let geom = PairGeometry::new(1.0, UnitVec3::Z).unwrap();
        let h = assemble(&coupling_tensor(&z, &z, &geom, &consts()).unwrap());
        assert_eq!(h.max_abs(), 0.0);
    }

    #[test]
    fn single_permanent_entry_is_diagonal() {
        let mut m = vec![CVec3::ZERO; 4];
        m[E * 2 + E] = CVec3::real([0.0, 0.0, 1.0]);
        let a = DipoleSpec::new(vec![0.0, 1.0], m).unwrap();
        let geom = PairGeometry::new(1.0, UnitVec3::Z).unwrap();
        let h = assemble(&coupling_tensor(&a, &a, &geom, &consts()).unwrap());
        let k = h.index(E, E);
        for i in 0..4 {
            for j in 0..4 {
                if (i, j) != (k, k) {
                    assert_eq!(h.get(i, j), Complex64::new(0.0, 0.0));
                }
            }
        }
        assert_eq!(h.get(k, k), Complex64::new(-2.0 / (4.0 * core::f64::consts::PI), 0.0));
    }

    #[test]
    fn resonant_pair_hand_assembled() {
        let (a, b) = resonant_pair(1.7);
        let geom = PairGeometry::new(0.9, UnitVec3::normalize([0.2, 0.5, 1.0]).unwrap()).unwrap();
        let h = assemble(&coupling_tensor(&a, &b, &geom, &consts()).unwrap());
        let k = k_kernel(1.7, &geom, a.moment(E, G), b.moment(G, E), &consts());
        let (eg, ge) = (h.index(E, G), h.index(G, E));
        assert!((h.get(eg, ge) - k).norm() <= 1e-15 * k.norm());
        assert!((h.get(ge, eg) - k.conj()).norm() <= 1e-15 * k.norm());
    }

    #[test]
    fn classical_matches_zero_frequency_assembly() {
        let t = CVec3::from_parts([0.4, 0.0, 1.0], [0.0, -0.7, 0.1]);
        let a = DipoleSpec::two_level(0.0, &consts(), [0.1, 0.2, 0.3], [0.0, -0.5, 0.9], t).unwrap();
        let b = DipoleSpec::two_level(0.0, &consts(), [0.0, 0.0, 1.0], [0.3, 0.0, 0.0], t.conj()).unwrap();
        let geom = PairGeometry::new(1.3, UnitVec3::normalize([1.0, 2.0, -0.4]).unwrap()).unwrap();
        let full = assemble(&coupling_tensor(&a, &b, &geom, &consts()).unwrap());
        let cl = classical_hamiltonian(&a, &b, &geom, &consts());
        assert!((&full - &cl).max_abs() <= 1e-14 * cl.max_abs());
    }

    #[test]
    fn collinear_permanent_diagonal() {
        let a = DipoleSpec::two_level(1.0, &consts(), [0.0, 0.0, 0.5], [0.0, 0.0, 2.0], CVec3::ZERO).unwrap();
        let geom = PairGeometry::new(2.0, UnitVec3::Z).unwrap();
        let h = classical_hamiltonian(&a, &a, &geom, &consts());
        let s = consts().strength(2.0);
        for x in [G, E] {
            for y in [G, E] {
                let k = h.index(x, y);
                let expected = -2.0 * s * a.moment(x, x)[2].re * a.moment(y, y)[2].re;
                assert!((h.get(k, k).re - expected).abs() <= 1e-15 * expected.abs());
            }
        }
        assert!(h.hermiticity_defect() == 0.0);
    }

    #[test]
    fn dicke_permanent_only_is_exact() {
        let a = DipoleSpec::two_level(1.0, &consts(), [0.0, 0.0, 0.5], [0.0, 0.3, 2.0], CVec3::ZERO).unwrap();
        let rep = dicke_deviation(&a, &a, UnitVec3::Z, &[0.1, 0.5, 1.0], &consts()).unwrap();
        assert!(rep.points.iter().all(|p| p.frobenius <= 1e-15));
        
    }

    #[test]
    fn dicke_slope_resonant() {
        let (a, b) = resonant_pair(1.0);
        let rs: Vec<f64> = (0..=8).map(|k| 1e-3 * 10f64.powf(k as f64 / 4.0)).collect();
        let rep = dicke_deviation(&a, &b, UnitVec3::Z, &rs, &consts()).unwrap();
        assert!((rep.slope.unwrap() - 2.0).abs() < 0.02, "{:?}", rep.slope);
        for w in rep.points.windows(2) {
            assert!(w[1].frobenius > w[0].frobenius);
        }
    }

    #[test]
    fn dicke_errors() {
        let z = DipoleSpec::new(vec![0.0, 1.0], vec![CVec3::ZERO; 4]).unwrap();
        assert_eq!(dicke_deviation(&z, &z, UnitVec3::Z, &[1.0], &consts()), Err(Error::UndefinedDeviation));
        let (a, b) = resonant_pair(1.0);
        assert!(dicke_deviation(&a, &b, UnitVec3::Z, &[1.0, 0.5], &consts()).is_err());
        assert!(dicke_deviation(&a, &b, UnitVec3::Z, &[], &consts()).is_err());
    }

    #[test]
    fn rwa_on_resonant_pair() {
        let (a, b) = resonant_pair(1.2);
        let geom = PairGeometry::new(0.7, UnitVec3::X).unwrap();
        let t = coupling_tensor(&a, &b, &geom, &consts()).unwrap();
        let f = rwa_filter(&t, 1e-9);
        for idx in [TermIndex::new(E, G, E, G), TermIndex::new(G, E, G, E)] {
            assert_ne!(t.total(idx), Complex64::new(0.0, 0.0));
            assert_eq!(f.total(idx), Complex64::new(0.0, 0.0));
        }
        let keep = TermIndex::new(E, G, G, E);
        assert_eq!(f.total(keep), t.total(keep));
        assert!(assemble(&f).hermiticity_defect() <= 1e-15 * assemble(&f).max_abs());
    }

    #[test]
    fn decompose_recovers_tensor() {
        let (a, b) = resonant_pair(0.8);
        let geom = PairGeometry::new(1.1, UnitVec3::normalize([0.0, 1.0, 1.0]).unwrap()).unwrap();
        let t = coupling_tensor(&a, &b, &geom, &consts()).unwrap();
        let h = assemble(&t);
        let parts = decompose(&h);
        assert_eq!(parts.len(), 16);
        for (idx, g) in parts {
            assert_eq!(g, t.total(idx));
        }
        let p = assemble_with(&t, false);
        let keep = TermIndex::new(E, G, E, G);
        assert_eq!(p.coefficient(keep), t.principal(keep));
    }
}
