//! Entropy-rate decomposition for open quantum and classical diffusive dynamics.
//!
//! The crate splits the von Neumann entropy rate of a Lindblad semigroup into
//! a fluctuation (noise) part and a dissipation part, evaluates the noise part
//! as a sum of divergence-based quantum Fisher informations, and mirrors the
//! same split for Gaussian semigroups in phase space and for classical
//! Ornstein-Uhlenbeck diffusions. A truncated Fock-space module cross-checks
//! the Gaussian closed forms against dense finite-dimensional evolution.
//!
//! Module map:
//! - [`matrix_kernel`]: dense complex linear algebra shared by everything else.
//! - [`lindblad_core`]: generator decomposition, entropy rates, Spohn production.
//! - [`dqfi`]: divergence-based quantum Fisher information.
//! - [`gaussian_gds`]: Gaussian dynamical semigroups in covariance form.
//! - [`classical_ou`]: Ornstein-Uhlenbeck counterpart and de Bruijn identity.
//! - [`fock_bridge`]: truncated Fock-space lift for cross-validation.

pub mod classical_ou;
pub mod dqfi;
pub mod fock_bridge;
pub mod gaussian_gds;
pub mod lindblad_core;
pub mod matrix_kernel;
pub mod testkit;

pub use matrix_kernel::{CMat, CVec, KernelError, RMat, RVec, C64};
