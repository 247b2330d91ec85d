//! Reduced state of the field: second-moment dynamics for multimode
//! bosonic fields.
//!
//! A multimode field with modes k = 1…n is tracked by the couple
//!
//! * r — the n×n single-particle density matrix, r_kk' = Tr[ρ̂ â†_k' â_k],
//!   normalized to the particle number tr r = N, and
//! * α — the coherence vector, α_k = Tr[ρ̂ â_k].
//!
//! The couple evolves under closed equations for quasi-free generators:
//! free evolution at mode frequencies ω_k, coherent drives ζ_k, thermal
//! damping with Hermitian rate matrices γ↑ and γ↓, and random unitary
//! scattering channels (w_j, u_j). The correlation matrix r^α = r − |α⟩⟨α|
//! carries all the thermodynamics: entropy, internal energy, heat and
//! entropy rates, and free energies are functionals of (r^α, ω).
//!
//! Module map:
//!
//! * [`linalg`] — dense complex Hermitian kernel (Jacobi eigensolver,
//!   spectral functions, unitary logarithm),
//! * [`state`] — the (r, α) couple, its correlation matrix, mode sets,
//! * [`generator`] — drive/bath/scattering specifications and the
//!   right-hand sides of the moment equations,
//! * [`integrate`] — fixed-step RK4 propagation, closed-form propagators,
//!   steady states,
//! * [`thermo`] — entropy, energy, heat/entropy rates, free energies,
//! * [`fock`] — brute-force truncated number-basis master equation used as
//!   an independent cross-check,
//! * [`sweep`] — batch and grid evaluation, data-parallel when the
//!   `parallel` feature (default) is enabled.

pub mod error;
pub mod fock;
pub mod generator;
pub mod integrate;
pub mod linalg;
pub mod state;
pub mod sweep;
pub mod thermo;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
