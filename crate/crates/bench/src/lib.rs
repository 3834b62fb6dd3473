//! Shared fixtures for the criterion benchmarks: deterministic models and
//! states sized like the heaviest realistic scenario inputs.

use entroflux::classical_ou::{GaussianDensity, OuModel};
use entroflux::gaussian_gds::{GaussianState, GdsModel};
use entroflux::lindblad_core::LindbladModel;
use entroflux::testkit;
use entroflux::{CMat, RVec};

pub fn finite_model(dim: usize) -> (LindbladModel, CMat) {
    let mut r = testkit::rng(0xBE + dim as u64);
    let model = testkit::random_lindblad_model(&mut r, dim, 2, 1.0);
    let rho = testkit::random_density_full_rank(&mut r, dim);
    (model, rho)
}

pub fn gds_model(n_modes: usize) -> (GdsModel, GaussianState) {
    let mut r = testkit::rng(0xBD + n_modes as u64);
    let model = testkit::random_gds_model(&mut r, n_modes, 2, 1.0);
    let cov = testkit::random_quantum_covariance(&mut r, n_modes, 0.8);
    let state = GaussianState::new(RVec::zeros(2 * n_modes), cov).expect("valid state");
    (model, state)
}

pub fn ou_model(dim: usize) -> (OuModel, GaussianDensity) {
    let mut r = testkit::rng(0xBC + dim as u64);
    let drift = testkit::random_stable_matrix(&mut r, dim, 0.2);
    let noise = testkit::random_spd(&mut r, dim, 0.2);
    let model = OuModel::new(drift, noise, RVec::zeros(dim)).expect("valid model");
    let g = GaussianDensity::new(RVec::zeros(dim), testkit::random_spd(&mut r, dim, 0.3))
        .expect("valid density");
    (model, g)
}
