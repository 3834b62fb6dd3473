//! Deterministic pseudo-random model generators for tests and benchmarks.
//!
//! Every generator takes an explicit RNG so a fixed seed reproduces the same
//! model on every platform. Not intended for statistical work; the samples
//! only need to be generic (full rank, no accidental symmetry).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::lindblad_core::LindbladModel;
use crate::matrix_kernel::{self, CMat, CVec, RMat, RVec, C64};

/// Seeded RNG used across the test suite.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Dense complex matrix with entries uniform in the square [-scale, scale]².
pub fn random_complex_matrix(rng: &mut impl Rng, dim: usize, scale: f64) -> CMat {
    CMat::from_fn(dim, dim, |_, _| {
        C64::new(
            scale * rng.gen_range(-1.0..1.0),
            scale * rng.gen_range(-1.0..1.0),
        )
    })
}

/// Random Hermitian matrix Ĥ = (G + G†)/2.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize, scale: f64) -> CMat {
    let g = random_complex_matrix(rng, dim, scale);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Random full-rank density matrix; the smallest eigenvalue is bounded below
/// by roughly 0.05/dim so matrix logarithms stay well conditioned.
pub fn random_density_full_rank(rng: &mut impl Rng, dim: usize) -> CMat {
    let g = random_complex_matrix(rng, dim, 1.0);
    let w = &g * g.adjoint();
    let tr = matrix_kernel::trace(&w).re;
    let lifted = w + CMat::identity(dim, dim) * C64::new(0.05 * tr / dim as f64, 0.0);
    let total = matrix_kernel::trace(&lifted).re;
    lifted * C64::new(1.0 / total, 0.0)
}

/// Random Lindblad model with `k` generic (non-Hermitian) Lindblad operators.
pub fn random_lindblad_model(rng: &mut impl Rng, dim: usize, k: usize, hbar: f64) -> LindbladModel {
    let h = random_hermitian(rng, dim, 1.0);
    let ls = (0..k)
        .map(|_| random_complex_matrix(rng, dim, 0.7))
        .collect();
    LindbladModel::new(hbar, h, ls).expect("generated model is well formed")
}

/// Random real matrix with all eigenvalue real parts ≤ -margin.
pub fn random_stable_matrix(rng: &mut impl Rng, dim: usize, margin: f64) -> RMat {
    let m = RMat::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    let max_re = matrix_kernel::max_real_eigenvalue(&m).expect("eigenvalues of random matrix");
    &m - RMat::identity(dim, dim) * (max_re + margin)
}

/// Random symmetric positive definite matrix GG^T + floor·I.
pub fn random_spd(rng: &mut impl Rng, dim: usize, floor: f64) -> RMat {
    let g = RMat::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    &g * g.transpose() + RMat::identity(dim, dim) * floor
}

/// Random quantum covariance for n modes with every symplectic eigenvalue at
/// least `floor` (uses ν_min ≥ λ_min(V); pass floor > 1/2 for mixed states).
pub fn random_quantum_covariance(rng: &mut impl Rng, n_modes: usize, floor: f64) -> RMat {
    let d = 2 * n_modes;
    let g = RMat::from_fn(d, d, |_, _| rng.gen_range(-0.4..0.4));
    let sym = (&g + g.transpose()) * 0.5;
    let mut eig = nalgebra::SymmetricEigen::new(sym);
    for v in eig.eigenvalues.iter_mut() {
        *v = v.abs().max(floor) + floor * 0.2;
    }
    let rebuilt = &eig.eigenvectors * RMat::from_diagonal(&eig.eigenvalues) * eig.eigenvectors.transpose();
    (&rebuilt + rebuilt.transpose()) * 0.5
}

/// Random n-mode Gaussian semigroup: SPD 𝔹, random drive ξ, k complex jump
/// vectors of moderate norm.
pub fn random_gds_model(
    rng: &mut impl Rng,
    n_modes: usize,
    k: usize,
    hbar: f64,
) -> crate::gaussian_gds::GdsModel {
    let d = 2 * n_modes;
    let b = random_spd(rng, d, 0.1) * 0.4;
    let xi = RVec::from_fn(d, |_, _| rng.gen_range(-0.5..0.5));
    let ls = (0..k)
        .map(|_| {
            CVec::from_fn(d, |_, _| {
                C64::new(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7))
            })
        })
        .collect();
    crate::gaussian_gds::GdsModel::new(n_modes, hbar, b, xi, ls).expect("random model is valid")
}
