//! Field-induced magnetic dipole-dipole coupling between two multi-level dipoles.
//!
//! The crate evaluates the free-space coupling spectral density `J(ω)` and the
//! principal-value kernel `K(Ω)` in closed form, checks both against
//! independent quadratures, and assembles the effective interaction
//!
//! ```text
//! H = Σ_{yx,uv} (G^(P)_{yx,uv} + G^(D)_{yx,uv}) |y⟩⟨x|₁ ⊗ |u⟩⟨v|₂
//! G^(P) = ½ [K(Ω₁^{yx}) + K(Ω₂^{uv})]
//! G^(D) = (1/4i) [J(Ω₁^{yx}) + J(Ω₂^{uv})]
//! ```
//!
//! All distance dependence beyond the `1/r³` prefactor enters through the
//! retardation parameter `η = Ωr/c`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod coupling;
pub mod dipole;
pub mod error;
pub mod hamiltonian;
pub mod kernel;
pub mod quadrature;
pub mod spectral;
pub mod units;
pub mod vector;

pub use coupling::{
    classify, coupling_tensor, g_dissipative, g_principal, CouplingTensor, InteractionClass,
    TermIndex,
};
pub use dipole::{transition_frequency, DipoleSpec, PairGeometry};
pub use error::{Error, Result};
pub use hamiltonian::{
    assemble, assemble_with, classical_coefficient, classical_hamiltonian, decompose,
    dicke_deviation, rwa_filter, DickePoint, DickeReport, HamiltonianMatrix,
};
pub use kernel::{
    k_brackets, k_kernel, k_kernel_oracle, lambda_coefficient, memory_kernel, xi_coefficient,
    Regulated, RegulatorPlan,
};
pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use spectral::{j_brackets, j_coupling, j_coupling_oracle, BracketPair};
pub use units::{NaturalUnits, PhysicalConstants, Tolerances};
pub use vector::{bilinear_form, Bilinear, CVec3, UnitVec3};
