//! Per-term coupling coefficients `G^(P)`, `G^(D)` and interaction classes.
//!
//! For the term `τ₁^{yx} τ₂^{uv}` with `Ω₁ = Ω₁^{yx}`, `Ω₂ = Ω₂^{uv}` and the
//! bilinear of `(m₁^{yx}, m₂^{uv})`:
//!
//! ```text
//! G^(P) = ½ [K(Ω₁) + K(Ω₂)]
//! G^(D) = (1/4i) [J(Ω₁) + J(Ω₂)]
//! ```
//!
//! The 2→1 kernels reduce to the 1→2 forms with the same bilinear
//! (`J₂→₁^{uv,yx}(ω) = J₁→₂^{yx,uv}(ω)`), so only the frequency differs
//! between the two halves of each average.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dipole::{DipoleSpec, PairGeometry};
use crate::error::{Error, Result};
use crate::kernel::k_from_bilinear;
use crate::spectral::j_from_bilinear;
use crate::units::{PhysicalConstants, Tolerances};
use crate::vector::Bilinear;

/// Above this composite dimension, terms with a vanishing moment element are skipped.
const DENSE_LIMIT: usize = 64;

/// Index tuple `(y, x, u, v)` of the term `τ₁^{yx} τ₂^{uv}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermIndex {
    pub y: usize,
    pub x: usize,
    pub u: usize,
    pub v: usize,
}

impl TermIndex {
    pub const fn new(y: usize, x: usize, u: usize, v: usize) -> Self {
        Self { y, x, u, v }
    }

    /// The Hermitian-conjugate partner `(x, y, v, u)`.
    pub const fn conjugate(&self) -> Self {
        Self { y: self.x, x: self.y, u: self.v, v: self.u }
    }

    /// The same term with the dipoles exchanged, `(u, v, y, x)`.
    pub const fn swapped(&self) -> Self {
        Self { y: self.u, x: self.v, u: self.y, v: self.x }
    }
}

/// Physical type of an interaction term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InteractionClass {
    PermanentPermanent,
    ResonantTransition,
    NonResonantTransition,
    CounterRotating,
    MixedPermanentTransition,
}

impl InteractionClass {
    pub const ALL: [Self; 5] = [
        Self::PermanentPermanent,
        Self::ResonantTransition,
        Self::NonResonantTransition,
        Self::CounterRotating,
        Self::MixedPermanentTransition,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Self::PermanentPermanent => "permanent",
            Self::ResonantTransition => "resonant",
            Self::NonResonantTransition => "non-resonant",
            Self::CounterRotating => "counter-rotating",
            Self::MixedPermanentTransition => "mixed",
        }
    }

    /// Whether the rotating-wave approximation keeps terms of this class.
    pub fn kept_by_rwa(&self) -> bool {
        !matches!(self, Self::CounterRotating | Self::MixedPermanentTransition)
    }
}

impl core::fmt::Display for InteractionClass {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.label())
    }
}

/// Classification from the diagonal flags and the two transition frequencies
/// (any common scale; only signs and ratios matter).
pub(crate) fn classify_frequencies(
    diag1: bool,
    diag2: bool,
    w1: f64,
    w2: f64,
    resonance_tol: f64,
) -> InteractionClass {
    match (diag1, diag2) {
        (true, true) => InteractionClass::PermanentPermanent,
        (true, false) | (false, true) => InteractionClass::MixedPermanentTransition,
        (false, false) if w1 * w2 > 0.0 => InteractionClass::CounterRotating,
        (false, false) => {
            if (w1 + w2).abs() <= resonance_tol * w1.abs().max(w2.abs()) {
                InteractionClass::ResonantTransition
            } else {
                InteractionClass::NonResonantTransition
            }
        }
    }
}

fn check_term(spec1: &DipoleSpec, spec2: &DipoleSpec, idx: TermIndex) -> Result<()> {
    spec1.check_index(idx.y)?;
    spec1.check_index(idx.x)?;
    spec2.check_index(idx.u)?;
    spec2.check_index(idx.v)
}

/// Classifies the term `idx`; `resonance_tol` is relative to the larger frequency.
pub fn classify(
    spec1: &DipoleSpec,
    spec2: &DipoleSpec,
    idx: TermIndex,
    resonance_tol: f64,
) -> Result<InteractionClass> {
    check_term(spec1, spec2, idx)?;
    let w1 = spec1.energy(idx.y) - spec1.energy(idx.x);
    let w2 = spec2.energy(idx.u) - spec2.energy(idx.v);
    Ok(classify_frequencies(idx.y == idx.x, idx.u == idx.v, w1, w2, resonance_tol))
}

struct Term {
    bil: Bilinear,
    w1: f64,
    w2: f64,
}

impl Term {
    fn new(spec1: &DipoleSpec, spec2: &DipoleSpec, geom: &PairGeometry, consts: &PhysicalConstants, idx: TermIndex) -> Self {
        Self {
            bil: Bilinear::new(spec1.moment(idx.y, idx.x), spec2.moment(idx.u, idx.v), &geom.direction()),
            w1: spec1.omega(idx.y, idx.x, consts),
            w2: spec2.omega(idx.u, idx.v, consts),
        }
    }

    fn principal(&self, r: f64, consts: &PhysicalConstants) -> Complex64 {
        (k_from_bilinear(self.w1, r, &self.bil, consts) + k_from_bilinear(self.w2, r, &self.bil, consts)) * 0.5
    }

    fn dissipative(&self, r: f64, consts: &PhysicalConstants) -> Complex64 {
        (j_from_bilinear(self.w1, r, &self.bil, consts) + j_from_bilinear(self.w2, r, &self.bil, consts))
            * Complex64::new(0.0, -0.25)
    }
}

/// `G^(P)_{yx,uv} = ½ [K(Ω₁^{yx}) + K(Ω₂^{uv})]` (rad/s).
pub fn g_principal(
    spec1: &DipoleSpec,
    spec2: &DipoleSpec,
    geom: &PairGeometry,
    consts: &PhysicalConstants,
    idx: TermIndex,
) -> Result<Complex64> {
    check_term(spec1, spec2, idx)?;
    Ok(Term::new(spec1, spec2, geom, consts, idx).principal(geom.r(), consts))
}

/// `G^(D)_{yx,uv} = (1/4i) [J(Ω₁^{yx}) + J(Ω₂^{uv})]` (rad/s).
pub fn g_dissipative(
    spec1: &DipoleSpec,
    spec2: &DipoleSpec,
    geom: &PairGeometry,
    consts: &PhysicalConstants,
    idx: TermIndex,
) -> Result<Complex64> {
    check_term(spec1, spec2, idx)?;
    Ok(Term::new(spec1, spec2, geom, consts, idx).dissipative(geom.r(), consts))
}

/// Dense `G^(P)` and `G^(D)` over all `d₁²·d₂²` index tuples, plus the
/// transition frequencies they were evaluated at.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTensor {
    d1: usize,
    d2: usize,
    principal: Vec<Complex64>,
    dissipative: Vec<Complex64>,
    omega1: Vec<f64>,
    omega2: Vec<f64>,
}

impl CouplingTensor {
    /// Builds a tensor from raw parts and checks its invariants.
    ///
    /// `omega1[y·d₁ + x] = Ω₁^{yx}`, `omega2[u·d₂ + v] = Ω₂^{uv}`; coefficient
    /// arrays are indexed `((y·d₁ + x)·d₂ + u)·d₂ + v`.
    pub fn new(
        d1: usize,
        d2: usize,
        principal: Vec<Complex64>,
        dissipative: Vec<Complex64>,
        omega1: Vec<f64>,
        omega2: Vec<f64>,
    ) -> Result<Self> {
        let n = d1 * d1 * d2 * d2;
        if principal.len() != n || dissipative.len() != n || omega1.len() != d1 * d1 || omega2.len() != d2 * d2 {
            return Err(Error::Invalid("coupling tensor arrays do not match the dimensions"));
        }
        let tensor = Self { d1, d2, principal, dissipative, omega1, omega2 };
        tensor.check_invariants(Tolerances::DEFAULT.validation)?;
        Ok(tensor)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    #[inline]
    fn offset(&self, idx: TermIndex) -> usize {
        ((idx.y * self.d1 + idx.x) * self.d2 + idx.u) * self.d2 + idx.v
    }

    pub fn principal(&self, idx: TermIndex) -> Complex64 {
        self.principal[self.offset(idx)]
    }

    pub fn dissipative(&self, idx: TermIndex) -> Complex64 {
        self.dissipative[self.offset(idx)]
    }

    /// `G^(P) + G^(D)`.
    pub fn total(&self, idx: TermIndex) -> Complex64 {
        let k = self.offset(idx);
        self.principal[k] + self.dissipative[k]
    }

    pub fn omega1(&self, y: usize, x: usize) -> f64 {
        self.omega1[y * self.d1 + x]
    }

    pub fn omega2(&self, u: usize, v: usize) -> f64 {
        self.omega2[u * self.d2 + v]
    }

    pub fn class(&self, idx: TermIndex, resonance_tol: f64) -> InteractionClass {
        classify_frequencies(
            idx.y == idx.x,
            idx.u == idx.v,
            self.omega1(idx.y, idx.x),
            self.omega2(idx.u, idx.v),
            resonance_tol,
        )
    }

    /// All index tuples in storage order.
    pub fn terms(&self) -> impl Iterator<Item = TermIndex> + '_ {
        let (d1, d2) = (self.d1, self.d2);
        (0..d1).flat_map(move |y| {
            (0..d1).flat_map(move |x| (0..d2).flat_map(move |u| (0..d2).map(move |v| TermIndex::new(y, x, u, v))))
        })
    }

    /// Largest coefficient modulus over both arrays.
    pub fn max_abs(&self) -> f64 {
        self.principal.iter().chain(&self.dissipative).map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Copy with every term for which `drop` returns true set to zero.
    pub fn zeroed_where(&self, mut drop: impl FnMut(TermIndex) -> bool) -> Self {
        let mut out = self.clone();
        for idx in self.terms() {
            if drop(idx) {
                let k = self.offset(idx);
                out.principal[k] = Complex64::new(0.0, 0.0);
                out.dissipative[k] = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// The tensor of the exchanged pair: entry `(u,v,y,x)` of the result is
    /// entry `(y,x,u,v)` of `self`.
    pub fn transposed(&self) -> Self {
        let mut out = Self {
            d1: self.d2,
            d2: self.d1,
            principal: alloc::vec![Complex64::new(0.0, 0.0); self.principal.len()],
            dissipative: alloc::vec![Complex64::new(0.0, 0.0); self.dissipative.len()],
            omega1: self.omega2.clone(),
            omega2: self.omega1.clone(),
        };
        for idx in self.terms() {
            let k = out.offset(idx.swapped());
            out.principal[k] = self.principal(idx);
            out.dissipative[k] = self.dissipative(idx);
        }
        out
    }

    /// Hermitian pairing `conj(G[x,y,v,u]) = G[y,x,u,v]` for both arrays (to
    /// `tol` relative to the largest entry), and exact vanishing of `G^(D)`
    /// wherever `Ω₁^{yx} = −Ω₂^{uv}`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let limit = tol * self.max_abs();
        let mut pairing = 0.0f64;
        for idx in self.terms() {
            let (k, kc) = (self.offset(idx), self.offset(idx.conjugate()));
            pairing = pairing
                .max((self.principal[kc].conj() - self.principal[k]).norm())
                .max((self.dissipative[kc].conj() - self.dissipative[k]).norm());
            if self.omega1(idx.y, idx.x) == -self.omega2(idx.u, idx.v) && self.dissipative[k].norm() != 0.0 {
                return Err(Error::Inconsistent {
                    what: "dissipative coefficient does not cancel at exact resonance",
                    defect: self.dissipative[k].norm(),
                });
            }
        }
        if pairing > limit {
            return Err(Error::Inconsistent { what: "coupling tensor is not Hermitian-paired", defect: pairing });
        }
        Ok(())
    }
}

/// Fills `G^(P)` and `G^(D)` for every term of the pair.
pub fn coupling_tensor(
    spec1: &DipoleSpec,
    spec2: &DipoleSpec,
    geom: &PairGeometry,
    consts: &PhysicalConstants,
) -> Result<CouplingTensor> {
    let (d1, d2) = (spec1.dim(), spec2.dim());
    let skip_zero = d1 * d2 > DENSE_LIMIT;
    let omega1: Vec<f64> = (0..d1 * d1).map(|k| spec1.omega(k / d1, k % d1, consts)).collect();
    let omega2: Vec<f64> = (0..d2 * d2).map(|k| spec2.omega(k / d2, k % d2, consts)).collect();
    let n = d1 * d1 * d2 * d2;
    let mut principal = Vec::with_capacity(n);
    let mut dissipative = Vec::with_capacity(n);
    for y in 0..d1 {
        for x in 0..d1 {
            for u in 0..d2 {
                for v in 0..d2 {
                    let idx = TermIndex::new(y, x, u, v);
                    if skip_zero && (spec1.moment(y, x).is_zero() || spec2.moment(u, v).is_zero()) {
                        principal.push(Complex64::new(0.0, 0.0));
                        dissipative.push(Complex64::new(0.0, 0.0));
                        continue;
                    }
                    let term = Term::new(spec1, spec2, geom, consts, idx);
                    principal.push(term.principal(geom.r(), consts));
                    dissipative.push(term.dissipative(geom.r(), consts));
                }
            }
        }
    }
    CouplingTensor::new(d1, d2, principal, dissipative, omega1, omega2)
}
