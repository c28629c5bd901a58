//! Ground states of the zero-mass Schrödinger–Bopp–Podolsky system.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernel`] evaluates the Bopp–Podolsky kernel `K(r) = (1 - e^{-r/a}) / r`
//!   together with its Coulomb and Yukawa pieces and their derivatives.
//! * [`grid`] holds the radial and box discretisations, norms, the Dirichlet
//!   form and the fibering rescaling `u ↦ t² u(t·)`.
//! * [`potential`] solves `-Δφ + a²Δ²φ = 4πρ` on the whole space, once by exact
//!   radial reductions and once by a truncated-kernel spectral convolution.
//! * [`bp_energy`] is the energy `V(f, g)` with its brute-force oracle and the
//!   functional inequalities it satisfies.
//! * [`functionals`] evaluates `I`, `I_ε`, `P_ε`, `J_ε`, their first variation
//!   and maximises the fibering map.
//! * [`solver`] minimises over the Nehari–Pohozaev set for fixed `ε` and
//!   continues the ground state towards `ε = 0`.

pub mod bp_energy;
pub mod ddreal;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod kernel;
pub mod potential;
pub mod quad;
pub mod solver;

pub use error::{Error, Result};
