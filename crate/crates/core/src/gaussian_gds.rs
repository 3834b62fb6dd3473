//! Gaussian dynamical semigroups on n bosonic modes: models built from a
//! quadratic Hamiltonian ½x̂ᵀ𝔹x̂ + x̂ᵀJξ and linear jump operators
//! L̂_k = l_kᵀJx̂, first/second moment evolution, Gaussian entropies, the
//! quantum de Bruijn split of the entropy rate, and stationary covariances.
//!
//! Conventions: x̂ = (q̂_1..q̂_n, p̂_1..p̂_n); J = [[0, I], [−I, 0]] so J² = −1;
//! the covariance V_ij = (1/2ħ)⟨{Δx̂_i, Δx̂_j}⟩ is dimensionless with vacuum
//! V = I/2. Derived matrices: Γ = Σ_k l_k l_k†, D = ħ·Re Γ, C = Im Γ,
//! drift A = J𝔹 − CJ.

use crate::matrix_kernel::{
    self, complexify, herm_eig, max_real_eigenvalue, solve_sylvester_lyapunov, CMat, KernelError,
    RMat, RVec, C64,
};
use thiserror::Error;

/// Eigenvalue floor below which V + (i/2)J counts as violating the quantum
/// covariance condition at construction.
pub const COVARIANCE_EIG_TOL: f64 = 1e-9;
/// Symplectic spectra closer to 1/2 than this make U-dependent formulas
/// singular; this is a domain boundary, not a defect to patch around.
pub const NEAR_PURE_MARGIN: f64 = 1e-7;
/// Residual allowed when matching the ±ν eigenvalue pairs of iJV.
pub const PAIRING_TOL: f64 = 1e-9;
/// Step-halving target for moment integration.
pub const MOMENT_ODE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GdsError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("expected {expected} rows for {what}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("hbar must be positive, got {0}")]
    NonPositiveHbar(f64),
    #[error("fluctuation-dissipation violation: min eigenvalue of D - i*hbar*C is {min_eigenvalue:.3e}")]
    FluctuationDissipation { min_eigenvalue: f64 },
    #[error("not a quantum covariance: min eigenvalue of V + (i/2)J is {min_eigenvalue:.3e}")]
    InvalidCovariance { min_eigenvalue: f64 },
    #[error("state too close to pure (nu_min = {nu_min:.9}); U-dependent formulas are singular at nu = 1/2")]
    NearPure { nu_min: f64 },
    #[error("eigenvalues of iJV failed to pair as +/-nu (residual {residual:.3e})")]
    PairingFailure { residual: f64 },
    #[error("covariance is numerically singular")]
    SingularCovariance,
    #[error("drift matrix is not asymptotically stable (max Re eigenvalue {max_real_part:.3e})")]
    Unstable { max_real_part: f64 },
    #[error("moment integration failed to reach tolerance (estimate {estimate:.3e})")]
    ToleranceNotMet { estimate: f64 },
}

/// The symplectic form J = [[0, I], [-I, 0]] for n modes.
pub fn symplectic_form(n: usize) -> RMat {
    let mut j = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// Gaussian dynamical semigroup fixed by (𝔹, ξ, {l_k}) at a given ħ.
#[derive(Debug, Clone)]
pub struct GdsModel {
    n_modes: usize,
    hbar: f64,
    b_matrix: RMat,
    xi: RVec,
    lindblad_vectors: Vec<CVecAlias>,
    gamma: CMat,
    d_matrix: RMat,
    c_matrix: RMat,
    a_matrix: RMat,
    j: RMat,
}

type CVecAlias = crate::matrix_kernel::CVec;

/// First and second moments of a Gaussian state (dimensionless covariance).
#[derive(Debug, Clone)]
pub struct GaussianState {
    mean: RVec,
    covariance: RMat,
}

/// Real Langevin force directions Σ_k = √ħ·Re l_k, Σ̄_k = √ħ·Im l_k.
#[derive(Debug, Clone)]
pub struct LangevinSet {
    pub sigma: Vec<RVec>,
    pub sigma_bar: Vec<RVec>,
}

/// Entropy rate and its fluctuation (delta) and dissipation (psi) parts.
#[derive(Debug, Clone, Copy)]
pub struct GdsEntropyRate {
    pub rate: f64,
    pub delta: f64,
    pub psi: f64,
}

impl GdsModel {
    pub fn new(
        n_modes: usize,
        hbar: f64,
        b_matrix: RMat,
        xi: RVec,
        lindblad_vectors: Vec<CVecAlias>,
    ) -> Result<Self, GdsError> {
        if hbar <= 0.0 {
            return Err(GdsError::NonPositiveHbar(hbar));
        }
        let d = 2 * n_modes;
        if b_matrix.nrows() != d || b_matrix.ncols() != d {
            return Err(GdsError::DimensionMismatch {
                what: "b_matrix",
                expected: d,
                got: b_matrix.nrows(),
            });
        }
        if xi.len() != d {
            return Err(GdsError::DimensionMismatch {
                what: "xi",
                expected: d,
                got: xi.len(),
            });
        }
        for l in &lindblad_vectors {
            if l.len() != d {
                return Err(GdsError::DimensionMismatch {
                    what: "lindblad vector",
                    expected: d,
                    got: l.len(),
                });
            }
        }
        matrix_kernel::check_symmetric(&b_matrix, 1e-12 * (1.0 + b_matrix.amax()))?;
        let mut gamma = CMat::zeros(d, d);
        for l in &lindblad_vectors {
            gamma += l * l.adjoint();
        }
        let d_matrix = gamma.map(|z| z.re) * hbar;
        let c_matrix = gamma.map(|z| z.im);
        // D - i*hbar*C = hbar*conj(Gamma) is Hermitian PSD for exact
        // arithmetic; enforce it on the rounded matrices.
        let fd = complexify(&d_matrix) - complexify(&c_matrix) * C64::new(0.0, hbar);
        let (fd_vals, _) = herm_eig(&fd)?;
        if fd_vals[0] < -1e-8 {
            return Err(GdsError::FluctuationDissipation {
                min_eigenvalue: fd_vals[0],
            });
        }
        let j = symplectic_form(n_modes);
        let a_matrix = &j * &b_matrix - &c_matrix * &j;
        Ok(Self {
            n_modes,
            hbar,
            b_matrix,
            xi,
            lindblad_vectors,
            gamma,
            d_matrix,
            c_matrix,
            a_matrix,
            j,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn b_matrix(&self) -> &RMat {
        &self.b_matrix
    }

    pub fn xi(&self) -> &RVec {
        &self.xi
    }

    pub fn lindblad_vectors(&self) -> &[CVecAlias] {
        &self.lindblad_vectors
    }

    pub fn gamma(&self) -> &CMat {
        &self.gamma
    }

    /// Diffusion matrix D = ħ·Re Γ.
    pub fn d_matrix(&self) -> &RMat {
        &self.d_matrix
    }

    /// Commutator matrix C = Im Γ (antisymmetric).
    pub fn c_matrix(&self) -> &RMat {
        &self.c_matrix
    }

    /// Drift matrix A = J𝔹 − CJ.
    pub fn a_matrix(&self) -> &RMat {
        &self.a_matrix
    }

    pub fn symplectic(&self) -> &RMat {
        &self.j
    }

    pub fn rank_d(&self) -> usize {
        numerical_rank(&self.d_matrix)
    }

    pub fn rank_c(&self) -> usize {
        numerical_rank(&self.c_matrix)
    }

    /// Langevin force decomposition; Σ_k(Σ_kΣ_kᵀ + Σ̄_kΣ̄_kᵀ) = D.
    pub fn langevin_set(&self) -> LangevinSet {
        let root = self.hbar.sqrt();
        LangevinSet {
            sigma: self
                .lindblad_vectors
                .iter()
                .map(|l| l.map(|z| z.re * root))
                .collect(),
            sigma_bar: self
                .lindblad_vectors
                .iter()
                .map(|l| l.map(|z| z.im * root))
                .collect(),
        }
    }

    /// Right-hand side of the covariance equation: dV/dt = D/ħ + VAᵀ + AV.
    pub fn covariance_velocity(&self, v: &RMat) -> RMat {
        &self.d_matrix / self.hbar + v * self.a_matrix.transpose() + &self.a_matrix * v
    }

    /// Right-hand side of the mean equation: d⟨x̂⟩/dt = A⟨x̂⟩ − ξ.
    pub fn mean_velocity(&self, mean: &RVec) -> RVec {
        &self.a_matrix * mean - &self.xi
    }
}

impl GaussianState {
    pub fn new(mean: RVec, covariance: RMat) -> Result<Self, GdsError> {
        Self::with_floor(mean, covariance, COVARIANCE_EIG_TOL)
    }

    fn with_floor(mean: RVec, covariance: RMat, floor: f64) -> Result<Self, GdsError> {
        let d = covariance.nrows();
        if !d.is_multiple_of(2) || covariance.ncols() != d {
            return Err(GdsError::DimensionMismatch {
                what: "covariance",
                expected: covariance.ncols(),
                got: d,
            });
        }
        if mean.len() != d {
            return Err(GdsError::DimensionMismatch {
                what: "mean",
                expected: d,
                got: mean.len(),
            });
        }
        matrix_kernel::check_symmetric(&covariance, 1e-10 * (1.0 + covariance.amax()))?;
        let n = d / 2;
        let q = complexify(&covariance) + complexify(&symplectic_form(n)) * C64::new(0.0, 0.5);
        let (vals, _) = herm_eig(&q)?;
        if vals[0] < -floor {
            return Err(GdsError::InvalidCovariance {
                min_eigenvalue: vals[0],
            });
        }
        Ok(Self { mean, covariance })
    }

    /// Centered state with isotropic covariance ν·I (vacuum at ν = 1/2).
    pub fn isotropic(n_modes: usize, nu: f64) -> Result<Self, GdsError> {
        Self::new(
            RVec::zeros(2 * n_modes),
            RMat::identity(2 * n_modes, 2 * n_modes) * nu,
        )
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &RVec {
        &self.mean
    }

    pub fn covariance(&self) -> &RMat {
        &self.covariance
    }
}

fn numerical_rank(m: &RMat) -> usize {
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    svd.singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(1.0))
        .count()
}

/// Symmetric square root and its inverse for a positive definite matrix.
fn sym_sqrt(v: &RMat) -> Result<(RMat, RMat), GdsError> {
    let eig = nalgebra::SymmetricEigen::new(v.clone());
    let mut root = RVec::zeros(v.nrows());
    let mut inv_root = RVec::zeros(v.nrows());
    for (i, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev <= 1e-12 {
            return Err(GdsError::SingularCovariance);
        }
        root[i] = ev.sqrt();
        inv_root[i] = 1.0 / ev.sqrt();
    }
    let q = &eig.eigenvectors;
    let r = q * RMat::from_diagonal(&root) * q.transpose();
    let r_inv = q * RMat::from_diagonal(&inv_root) * q.transpose();
    Ok((r, r_inv))
}

// iJV is similar to the Hermitian matrix i·V^{1/2}JV^{1/2}; its eigenvalues
// are the +/-nu pairs. Returns (nu ascending, hermitian eigendecomposition,
// V^{1/2}, V^{-1/2}).
struct SymplecticSpectrum {
    nu: Vec<f64>,
    vals: RVec,
    vecs: CMat,
    root: RMat,
    inv_root: RMat,
}

fn symplectic_spectrum(s: &GaussianState) -> Result<SymplecticSpectrum, GdsError> {
    let n = s.n_modes();
    let (root, inv_root) = sym_sqrt(s.covariance())?;
    let j = symplectic_form(n);
    let core = complexify(&(&root * &j * &root)) * C64::new(0.0, 1.0);
    let (vals, vecs) = herm_eig(&core)?;
    let scale = vals[2 * n - 1].abs().max(1.0);
    let mut nu = Vec::with_capacity(n);
    for i in 0..n {
        let residual = (vals[i] + vals[2 * n - 1 - i]).abs();
        if residual > PAIRING_TOL * scale {
            return Err(GdsError::PairingFailure { residual });
        }
        nu.push(vals[n + i]);
    }
    Ok(SymplecticSpectrum {
        nu,
        vals,
        vecs,
        root,
        inv_root,
    })
}

/// The n symplectic eigenvalues of the covariance, ascending; all ≥ 1/2 for
/// a bona-fide quantum state.
pub fn symplectic_eigenvalues(s: &GaussianState) -> Result<Vec<f64>, GdsError> {
    Ok(symplectic_spectrum(s)?.nu)
}

/// The matrix U = 2iJ·arccoth(2iVJ) entering ln of a Gaussian density
/// operator; real symmetric, satisfies UVJ = JVU, and for V = ν·I reduces to
/// ln((2ν+1)/(2ν−1))·I. Requires a strictly mixed state.
pub fn u_matrix(s: &GaussianState, hbar: f64) -> Result<RMat, GdsError> {
    if hbar <= 0.0 {
        return Err(GdsError::NonPositiveHbar(hbar));
    }
    let spec = symplectic_spectrum(s)?;
    let nu_min = spec.nu[0];
    if nu_min <= 0.5 + NEAR_PURE_MARGIN {
        return Err(GdsError::NearPure { nu_min });
    }
    let dim = s.mean.len();
    // arccoth(2m) = (1/2)ln((2m+1)/(2m-1)) on the Hermitian core's spectrum.
    let mut g = crate::matrix_kernel::CVec::zeros(dim);
    for (i, &m) in spec.vals.iter().enumerate() {
        let t = 2.0 * m;
        g[i] = C64::new(0.5 * ((t + 1.0) / (t - 1.0)).ln(), 0.0);
    }
    let arccoth_core = &spec.vecs * CMat::from_diagonal(&g) * spec.vecs.adjoint();
    // Undo the similarity: arccoth(2iVJ) = V^{1/2}·arccoth(core)·V^{-1/2}.
    let n = s.n_modes();
    let jc = complexify(&symplectic_form(n));
    let u_complex = jc * complexify(&spec.root) * arccoth_core * complexify(&spec.inv_root)
        * C64::new(0.0, 2.0);
    let imag_norm = u_complex.map(|z| z.im).norm();
    let real = u_complex.map(|z| z.re);
    let asym = (&real - real.transpose()).norm();
    let scale = real.norm().max(1.0);
    if imag_norm > 1e-9 * scale || asym > 1e-9 * scale {
        return Err(GdsError::PairingFailure {
            residual: imag_norm.max(asym),
        });
    }
    Ok((&real + real.transpose()) * 0.5)
}

/// Von Neumann entropy of a Gaussian state in nats:
/// Σ_j [(ν_j + ½)ln(ν_j + ½) − (ν_j − ½)ln(ν_j − ½)], 0 at the vacuum.
pub fn vn_entropy_gaussian(s: &GaussianState) -> Result<f64, GdsError> {
    let nus = symplectic_eigenvalues(s)?;
    Ok(nus
        .iter()
        .map(|&nu| {
            let plus = (nu + 0.5) * (nu + 0.5).ln();
            let minus = if nu - 0.5 > 1e-14 {
                (nu - 0.5) * (nu - 0.5).ln()
            } else {
                0.0
            };
            plus - minus
        })
        .sum())
}

/// Shannon differential entropy of the Wigner function:
/// h = ½·ln det V + n·ln(2πe).
pub fn shannon_entropy_wigner(s: &GaussianState) -> Result<f64, GdsError> {
    let det = s.covariance().determinant();
    if det <= 0.0 {
        return Err(GdsError::SingularCovariance);
    }
    let n = s.n_modes() as f64;
    Ok(0.5 * det.ln() + n * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln())
}

/// Quantum de Bruijn identity: dS/dt = Δ − Ψ with Δ = ½tr(DU/ħ) and
/// Ψ = tr(JCUV), evaluated on a strictly mixed Gaussian state.
pub fn quantum_debruijn_rate(m: &GdsModel, s: &GaussianState) -> Result<GdsEntropyRate, GdsError> {
    let u = u_matrix(s, m.hbar)?;
    let delta = 0.5 * (&m.d_matrix * &u).trace() / m.hbar;
    let psi = (&m.j * &m.c_matrix * &u * s.covariance()).trace();
    Ok(GdsEntropyRate {
        rate: delta - psi,
        delta,
        psi,
    })
}

/// DQFI matrix of a Gaussian state: U/ħ (positive semidefinite).
pub fn dqfi_matrix_gaussian(s: &GaussianState, hbar: f64) -> Result<RMat, GdsError> {
    Ok(u_matrix(s, hbar)? / hbar)
}

/// State-change matrix of a Gaussian state: −VU − (i/2)JU. Its contraction
/// tr(CJ·𝕄) equals −Ψ; the (i/2)JU part drops there because tr(CU) = 0.
pub fn m_matrix_gaussian(s: &GaussianState, hbar: f64) -> Result<CMat, GdsError> {
    let u = u_matrix(s, hbar)?;
    let n = s.n_modes();
    let vu = complexify(&(s.covariance() * &u));
    let ju = complexify(&(symplectic_form(n) * &u));
    Ok(vu * C64::new(-1.0, 0.0) + ju * C64::new(0.0, -0.5))
}

/// Rate of the Wigner (Shannon) entropy: dh/dt = ½tr(DV⁻¹/ħ) − tr(JC).
pub fn shannon_debruijn_rate(m: &GdsModel, s: &GaussianState) -> Result<f64, GdsError> {
    let v_inv = s
        .covariance()
        .clone()
        .try_inverse()
        .ok_or(GdsError::SingularCovariance)?;
    let diffusion = 0.5 * (&m.d_matrix * &v_inv).trace() / m.hbar;
    let drift = (&m.j * &m.c_matrix).trace();
    Ok(diffusion - drift)
}

/// Difference between the quantum and Wigner entropy rates, evaluated as
/// ½tr(Θ·dV/dt) with Θ = U − V⁻¹. Vanishes at stationarity.
pub fn entropy_rate_gap(m: &GdsModel, s: &GaussianState) -> Result<f64, GdsError> {
    let u = u_matrix(s, m.hbar)?;
    let v_inv = s
        .covariance()
        .clone()
        .try_inverse()
        .ok_or(GdsError::SingularCovariance)?;
    let theta = u - v_inv;
    Ok(0.5 * (theta * m.covariance_velocity(s.covariance())).trace())
}

/// Series form of Θ = U − V⁻¹: Σ_{m≥1} (2iJ/(2m+1))·(iJV⁻¹/2)^{2m+1}.
/// Converges for strictly mixed states; independent check on `u_matrix`.
pub fn theta_series(s: &GaussianState, terms: usize) -> Result<RMat, GdsError> {
    let v_inv = s
        .covariance()
        .clone()
        .try_inverse()
        .ok_or(GdsError::SingularCovariance)?;
    let n = s.n_modes();
    let j = complexify(&symplectic_form(n));
    let base = &j * complexify(&v_inv) * C64::new(0.0, 0.5);
    let base_sq = &base * &base;
    let mut power = base.clone() * base_sq.clone();
    let mut sum = CMat::zeros(2 * n, 2 * n);
    for m in 1..=terms {
        sum += &j * &power * C64::new(0.0, 2.0 / (2.0 * m as f64 + 1.0));
        power *= &base_sq;
    }
    Ok(sum.map(|z| z.re))
}

/// Integrates the moment equations dV/dt = D/ħ + VAᵀ + AV and
/// d⟨x̂⟩/dt = A⟨x̂⟩ − ξ forward by t with step-halving RK4 to 1e-9.
pub fn evolve_moments(m: &GdsModel, s0: &GaussianState, t: f64) -> Result<GaussianState, GdsError> {
    assert!(t >= 0.0, "time must be nonnegative");
    if s0.n_modes() != m.n_modes {
        return Err(GdsError::DimensionMismatch {
            what: "state",
            expected: 2 * m.n_modes,
            got: s0.mean.len(),
        });
    }
    if t == 0.0 {
        return Ok(s0.clone());
    }
    let scale = 1.0 + m.a_matrix.norm();
    let mut steps = (t * scale / 0.1).ceil() as usize;
    steps = steps.max(1);
    let mut coarse = rk4_moments(m, s0, t, steps);
    for _ in 0..24 {
        let fine = rk4_moments(m, s0, t, steps * 2);
        let estimate = ((&coarse.1 - &fine.1).norm() + (&coarse.0 - &fine.0).norm()) / 15.0;
        if estimate <= MOMENT_ODE_TOL * (1.0 + fine.1.norm()) {
            let sym = (&fine.1 + fine.1.transpose()) * 0.5;
            // Allow singular-limit drift of 1e-8 on the purity boundary.
            return GaussianState::with_floor(fine.0, sym, 1e-8);
        }
        coarse = fine;
        steps *= 2;
    }
    Err(GdsError::ToleranceNotMet {
        estimate: coarse.1.norm().max(1.0) * MOMENT_ODE_TOL,
    })
}

fn rk4_moments(m: &GdsModel, s0: &GaussianState, t: f64, steps: usize) -> (RVec, RMat) {
    let h = t / steps as f64;
    let mut mean = s0.mean.clone();
    let mut v = s0.covariance.clone();
    for _ in 0..steps {
        let k1m = m.mean_velocity(&mean);
        let k1v = m.covariance_velocity(&v);
        let k2m = m.mean_velocity(&(&mean + &k1m * (h / 2.0)));
        let k2v = m.covariance_velocity(&(&v + &k1v * (h / 2.0)));
        let k3m = m.mean_velocity(&(&mean + &k2m * (h / 2.0)));
        let k3v = m.covariance_velocity(&(&v + &k2v * (h / 2.0)));
        let k4m = m.mean_velocity(&(&mean + &k3m * h));
        let k4v = m.covariance_velocity(&(&v + &k3v * h));
        mean += (k1m + k2m * 2.0 + k3m * 2.0 + k4m) * (h / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
    }
    (mean, v)
}

/// Stationary state: V^S solves D/ħ + AV^S + V^S·Aᵀ = 0 and the mean solves
/// A⟨x̂⟩ = ξ. Requires an asymptotically stable drift.
pub fn stationary_covariance(m: &GdsModel) -> Result<GaussianState, GdsError> {
    let max_re = max_real_eigenvalue(&m.a_matrix)?;
    if max_re >= -1e-12 {
        return Err(GdsError::Unstable {
            max_real_part: max_re,
        });
    }
    let q = &m.d_matrix / m.hbar;
    let v = solve_sylvester_lyapunov(&m.a_matrix, &q)?;
    let mean = m
        .a_matrix
        .clone()
        .lu()
        .solve(&m.xi)
        .ok_or(GdsError::SingularCovariance)?;
    GaussianState::new(mean, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_kernel::CVec;
    use crate::testkit;

    fn cv(entries: &[(f64, f64)]) -> CVec {
        CVec::from_vec(entries.iter().map(|&(re, im)| C64::new(re, im)).collect())
    }

    /// D = d·I, C = 0 on one mode (quantum diffusion when d = 1/2).
    fn diffusion_model(hbar: f64, d: f64) -> GdsModel {
        let s = (d / hbar).sqrt();
        GdsModel::new(
            1,
            hbar,
            RMat::zeros(2, 2),
            RVec::zeros(2),
            vec![cv(&[(s, 0.0), (0.0, 0.0)]), cv(&[(0.0, 0.0), (s, 0.0)])],
        )
        .unwrap()
    }

    /// Damped optical mode: l1 = a(1, i), l2 = b(1, -i), 𝔹 = ω·I.
    /// D = ħ(a²+b²)·I, JC = (a²−b²)·I.
    fn optical_model(hbar: f64, a: f64, b: f64, omega: f64) -> GdsModel {
        GdsModel::new(
            1,
            hbar,
            RMat::identity(2, 2) * omega,
            RVec::zeros(2),
            vec![
                cv(&[(a, 0.0), (0.0, a)]),
                cv(&[(b, 0.0), (0.0, -b)]),
            ],
        )
        .unwrap()
    }

    fn random_state(rng: &mut impl rand::Rng, n: usize, floor: f64) -> GaussianState {
        let v = testkit::random_quantum_covariance(rng, n, floor);
        let mean = RVec::from_fn(2 * n, |_, _| rng.gen_range(-1.0..1.0));
        GaussianState::new(mean, v).unwrap()
    }

    #[test]
    fn hand_computed_single_vector_model() {
        // l = (1, i): Gamma = [[1, -i], [i, 1]], D = ħ·I, C = -J.
        let m = GdsModel::new(
            1,
            1.0,
            RMat::zeros(2, 2),
            RVec::zeros(2),
            vec![cv(&[(1.0, 0.0), (0.0, 1.0)])],
        )
        .unwrap();
        assert!((m.d_matrix() - RMat::identity(2, 2)).norm() < 1e-14);
        assert!((m.c_matrix() + symplectic_form(1)).norm() < 1e-14);
        let jc = symplectic_form(1) * m.c_matrix();
        assert!((jc - RMat::identity(2, 2)).norm() < 1e-14);
        assert_eq!(m.rank_d(), 2);
        assert_eq!(m.rank_c(), 2);
    }

    #[test]
    fn quantum_diffusion_model_shape() {
        let m = diffusion_model(1.0, 0.5);
        assert!((m.d_matrix() - RMat::identity(2, 2) * 0.5).norm() < 1e-14);
        assert!(m.c_matrix().norm() < 1e-14);
        // A = J*B with B = 0 here.
        assert!(m.a_matrix().norm() < 1e-14);
    }

    #[test]
    fn fluctuation_dissipation_inequality_holds() {
        // D - i*hbar*C = hbar*conj(Gamma) is PSD for every vector set; the
        // constructor check is defensive against rounding. Assert the
        // invariant (and D ⪰ 0 with C antisymmetric) on random models.
        let mut rng = testkit::rng(40);
        for n in [1usize, 2] {
            let m = testkit::random_gds_model(&mut rng, n, 2, 1.7);
            let fd = complexify(m.d_matrix())
                - complexify(m.c_matrix()) * C64::new(0.0, m.hbar());
            let (vals, _) = herm_eig(&fd).unwrap();
            assert!(vals[0] >= -1e-10);
            let deig = nalgebra::SymmetricEigen::new(m.d_matrix().clone());
            assert!(deig.eigenvalues.min() >= -1e-12);
            assert!((m.c_matrix() + m.c_matrix().transpose()).norm() < 1e-12);
        }
    }

    #[test]
    fn constructor_rejects_malformed_input() {
        let mut b = RMat::zeros(2, 2);
        b[(0, 1)] = 1.0; // not symmetric
        assert!(matches!(
            GdsModel::new(1, 1.0, b, RVec::zeros(2), vec![]),
            Err(GdsError::Kernel(KernelError::NotSymmetric { .. }))
        ));
        assert!(matches!(
            GdsModel::new(1, 1.0, RMat::zeros(2, 2), RVec::zeros(3), vec![]),
            Err(GdsError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            GdsModel::new(1, 0.0, RMat::zeros(2, 2), RVec::zeros(2), vec![]),
            Err(GdsError::NonPositiveHbar(_))
        ));
    }

    #[test]
    fn langevin_decomposition_reassembles_d() {
        let mut rng = testkit::rng(41);
        for n in [1usize, 2] {
            let m = testkit::random_gds_model(&mut rng, n, 3, 1.3);
            let set = m.langevin_set();
            let mut d = RMat::zeros(2 * n, 2 * n);
            for (s, sb) in set.sigma.iter().zip(&set.sigma_bar) {
                d += s * s.transpose() + sb * sb.transpose();
            }
            assert!((d - m.d_matrix()).norm() < 1e-12 * (1.0 + m.d_matrix().norm()));
            let k = m.lindblad_vectors().len();
            assert!(m.rank_d() <= (2 * n).min(2 * k));
        }
    }

    #[test]
    fn drift_trace_equals_minus_tr_jc() {
        let mut rng = testkit::rng(42);
        for _ in 0..5 {
            let m = testkit::random_gds_model(&mut rng, 2, 2, 0.8);
            let tr_jc = (m.symplectic() * m.c_matrix()).trace();
            assert!((m.a_matrix().trace() + tr_jc).abs() < 1e-12 * (1.0 + tr_jc.abs()));
        }
    }

    #[test]
    fn symplectic_eigenvalue_examples() {
        let vac = GaussianState::isotropic(1, 0.5).unwrap();
        let nus = symplectic_eigenvalues(&vac).unwrap();
        assert!((nus[0] - 0.5).abs() < 1e-12);
        let one = GaussianState::isotropic(1, 1.0).unwrap();
        assert!((symplectic_eigenvalues(&one).unwrap()[0] - 1.0).abs() < 1e-12);
        // diag(a, b) has nu = sqrt(ab).
        let mut v = RMat::zeros(2, 2);
        v[(0, 0)] = 2.0;
        v[(1, 1)] = 0.5;
        let s = GaussianState::new(RVec::zeros(2), v).unwrap();
        assert!((symplectic_eigenvalues(&s).unwrap()[0] - 1.0).abs() < 1e-12);
        let mut v2 = RMat::zeros(2, 2);
        v2[(0, 0)] = 3.0;
        v2[(1, 1)] = 0.75;
        let s2 = GaussianState::new(RVec::zeros(2), v2).unwrap();
        assert!((symplectic_eigenvalues(&s2).unwrap()[0] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn covariance_validation_rejects_sub_vacuum() {
        let err = GaussianState::isotropic(1, 0.4);
        assert!(matches!(err, Err(GdsError::InvalidCovariance { .. })));
    }

    #[test]
    fn u_matrix_isotropic_and_identity() {
        let s = GaussianState::isotropic(1, 1.0).unwrap();
        let u = u_matrix(&s, 1.0).unwrap();
        let expect = RMat::identity(2, 2) * 3.0_f64.ln();
        assert!((u - &expect).norm() < 1e-10);
        // UVJ = JVU on random states.
        let mut rng = testkit::rng(43);
        for n in [1usize, 2] {
            let st = random_state(&mut rng, n, 0.6);
            let u = u_matrix(&st, 1.0).unwrap();
            let v = st.covariance();
            let j = symplectic_form(n);
            let lhs = &u * v * &j;
            let rhs = &j * v * &u;
            assert!((lhs - rhs).norm() < 1e-9 * (1.0 + u.norm()));
            assert!((&j * &u).trace().abs() < 1e-10 * (1.0 + u.norm()));
        }
    }

    #[test]
    fn u_matrix_matches_theta_series() {
        let mut rng = testkit::rng(44);
        for n in [1usize, 2] {
            let st = random_state(&mut rng, n, 0.75);
            let u = u_matrix(&st, 1.0).unwrap();
            let v_inv = st.covariance().clone().try_inverse().unwrap();
            let theta = theta_series(&st, 200).unwrap();
            assert!(
                (&u - v_inv - theta).norm() < 1e-9 * (1.0 + u.norm()),
                "series and arccoth forms disagree"
            );
        }
    }

    #[test]
    fn u_matrix_near_pure_is_an_error() {
        let s = GaussianState::isotropic(1, 0.5).unwrap();
        assert!(matches!(
            u_matrix(&s, 1.0),
            Err(GdsError::NearPure { .. })
        ));
    }

    #[test]
    fn gaussian_entropy_examples() {
        let vac = GaussianState::isotropic(1, 0.5).unwrap();
        assert!(vn_entropy_gaussian(&vac).unwrap().abs() < 1e-12);
        let one = GaussianState::isotropic(1, 1.0).unwrap();
        let expect = 1.5 * 1.5_f64.ln() - 0.5 * 0.5_f64.ln();
        assert!((vn_entropy_gaussian(&one).unwrap() - expect).abs() < 1e-12);
        // Shannon-Wigner entropy: vacuum gives ln(pi*e); scaling V -> 4V adds n·ln4.
        let h0 = shannon_entropy_wigner(&vac).unwrap();
        assert!((h0 - (std::f64::consts::PI * std::f64::consts::E).ln()).abs() < 1e-12);
        let scaled = GaussianState::isotropic(1, 2.0).unwrap();
        assert!((shannon_entropy_wigner(&scaled).unwrap() - h0 - 4.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn evolve_examples() {
        let m = diffusion_model(1.0, 1.0);
        let s0 = GaussianState::isotropic(1, 0.8).unwrap();
        // t = 0 returns the input.
        let same = evolve_moments(&m, &s0, 0.0).unwrap();
        assert!((same.covariance() - s0.covariance()).norm() < 1e-15);
        // Pure diffusion: V(t) = V0 + t·I.
        let t = 0.7;
        let out = evolve_moments(&m, &s0, t).unwrap();
        let expect = s0.covariance() + RMat::identity(2, 2) * t;
        assert!((out.covariance() - expect).norm() < 1e-8);
        assert!(out.mean().norm() < 1e-12);
    }

    #[test]
    fn evolve_approaches_lyapunov_solution() {
        let m = optical_model(1.0, 2.0_f64.sqrt(), 1.0, 0.9);
        let stat = stationary_covariance(&m).unwrap();
        let s0 = GaussianState::isotropic(1, 3.0).unwrap();
        let alpha_eff = 1.0; // a² − b² = 2 − 1
        let t = 10.0 / alpha_eff;
        let out = evolve_moments(&m, &s0, t).unwrap();
        assert!((out.covariance() - stat.covariance()).norm() < 1e-6);
    }

    #[test]
    fn evolve_preserves_quantum_covariance() {
        let mut rng = testkit::rng(45);
        for _ in 0..4 {
            let m = testkit::random_gds_model(&mut rng, 1, 2, 1.0);
            let s0 = random_state(&mut rng, 1, 0.55);
            let out = evolve_moments(&m, &s0, 0.4).unwrap();
            let nus = symplectic_eigenvalues(&out).unwrap();
            assert!(nus[0] >= 0.5 - 1e-8);
        }
    }

    #[test]
    fn stationary_optical_closed_form() {
        // ħ=1, γ = a²+b² = 3, α = a²−b² = 1 → V^S = 1.5·I.
        let m = optical_model(1.0, 2.0_f64.sqrt(), 1.0, 0.0);
        let stat = stationary_covariance(&m).unwrap();
        assert!((stat.covariance() - RMat::identity(2, 2) * 1.5).norm() < 1e-10);
        // Rotation 𝔹 = ω·I leaves the isotropic solution unchanged.
        let m_rot = optical_model(1.0, 2.0_f64.sqrt(), 1.0, 2.3);
        let stat_rot = stationary_covariance(&m_rot).unwrap();
        assert!((stat_rot.covariance() - stat.covariance()).norm() < 1e-10);
        // Thermal condition DJC = CJD and the closed form -(1/2ħ)DC⁻¹J.
        let d = m.d_matrix();
        let c = m.c_matrix();
        let j = m.symplectic();
        assert!((d * j * c - c * j * d).norm() < 1e-12);
        let c_inv = c.clone().try_inverse().unwrap();
        let closed = -(d * c_inv * j) * (0.5 / m.hbar());
        assert!((closed - stat.covariance()).norm() < 1e-10);
    }

    #[test]
    fn stationary_rejects_unstable_drift() {
        // b > a: net gain, A has positive real part.
        let m = optical_model(1.0, 1.0, 2.0_f64.sqrt(), 0.0);
        assert!(matches!(
            stationary_covariance(&m),
            Err(GdsError::Unstable { .. })
        ));
    }

    #[test]
    fn debruijn_rate_scalar_example() {
        // D = d·I, C = 0, V = ν·I: Δ = (d/ħ)·ln((2ν+1)/(2ν−1)), Ψ = 0.
        for (hbar, d, nu) in [(1.0_f64, 0.5_f64, 1.0_f64), (2.0, 1.3, 1.7)] {
            let m = diffusion_model(hbar, d);
            let s = GaussianState::isotropic(1, nu).unwrap();
            let r = quantum_debruijn_rate(&m, &s).unwrap();
            let expect = (d / hbar) * ((2.0 * nu + 1.0) / (2.0 * nu - 1.0)).ln();
            assert!((r.delta - expect).abs() < 1e-12);
            assert!(r.psi.abs() < 1e-12);
            assert!((r.rate - expect).abs() < 1e-12);
            assert!(r.rate > 0.0);
        }
    }

    #[test]
    fn debruijn_rate_matches_entropy_finite_difference() {
        let mut rng = testkit::rng(46);
        for n in [1usize, 2] {
            for _ in 0..5 {
                let m = testkit::random_gds_model(&mut rng, n, 2, 1.0);
                let s0 = random_state(&mut rng, n, 0.8);
                let base = evolve_moments(&m, &s0, 0.05).unwrap();
                let r = quantum_debruijn_rate(&m, &base).unwrap();
                let h = 1e-4;
                let sp = vn_entropy_gaussian(&evolve_moments(&m, &base, 2.0 * h).unwrap()).unwrap();
                let sm = vn_entropy_gaussian(&base).unwrap();
                let mid = vn_entropy_gaussian(&evolve_moments(&m, &base, h).unwrap()).unwrap();
                // centered at t = h using the three forward samples
                let fd = (sp - sm) / (2.0 * h);
                let rate_mid = quantum_debruijn_rate(
                    &m,
                    &evolve_moments(&m, &base, h).unwrap(),
                )
                .unwrap()
                .rate;
                let curvature = (sp - 2.0 * mid + sm).abs() / (h * h);
                assert!(
                    (fd - rate_mid).abs() <= (curvature * h * h).max(1e-6),
                    "rate {rate_mid} vs fd {fd}"
                );
                // Triangle check at the base point too.
                assert!((r.rate - 0.5 * (u_matrix(&base, m.hbar()).unwrap()
                    * m.covariance_velocity(base.covariance()))
                .trace())
                .abs()
                    < 1e-9 * (1.0 + r.rate.abs()));
            }
        }
    }

    #[test]
    fn debruijn_rate_vanishes_at_stationarity() {
        let m = optical_model(1.0, 2.0_f64.sqrt(), 1.0, 0.7);
        let stat = stationary_covariance(&m).unwrap();
        let r = quantum_debruijn_rate(&m, &stat).unwrap();
        assert!(r.rate.abs() < 1e-9);
        assert!((r.delta - r.psi).abs() < 1e-9);
        assert!(r.delta > 0.1, "balance holds at finite throughput");
    }

    #[test]
    fn delta_is_mean_independent() {
        let m = optical_model(1.0, 1.3, 0.4, 0.2);
        let v = testkit::random_quantum_covariance(&mut testkit::rng(47), 1, 0.7);
        let s1 = GaussianState::new(RVec::zeros(2), v.clone()).unwrap();
        let s2 = GaussianState::new(RVec::from_vec(vec![2.0, -1.0]), v).unwrap();
        let r1 = quantum_debruijn_rate(&m, &s1).unwrap();
        let r2 = quantum_debruijn_rate(&m, &s2).unwrap();
        assert_eq!(r1.delta, r2.delta);
        assert_eq!(r1.psi, r2.psi);
    }

    #[test]
    fn dqfi_matrix_is_psd_and_scales() {
        let s = GaussianState::isotropic(1, 1.0).unwrap();
        let jq = dqfi_matrix_gaussian(&s, 2.0).unwrap();
        assert!((jq - RMat::identity(2, 2) * (3.0_f64.ln() / 2.0)).norm() < 1e-10);
        let mut rng = testkit::rng(48);
        let st = random_state(&mut rng, 2, 0.6);
        let jq = dqfi_matrix_gaussian(&st, 1.0).unwrap();
        let eig = nalgebra::SymmetricEigen::new(jq);
        assert!(eig.eigenvalues.min() > -1e-10);
    }

    #[test]
    fn m_matrix_contraction_reproduces_minus_psi() {
        let mut rng = testkit::rng(49);
        for n in [1usize, 2] {
            let m = testkit::random_gds_model(&mut rng, n, 2, 1.0);
            let s = random_state(&mut rng, n, 0.7);
            let mm = m_matrix_gaussian(&s, m.hbar()).unwrap();
            let cj = complexify(&(m.c_matrix() * m.symplectic()));
            let contraction = matrix_kernel::trace(&(cj * mm));
            let psi = quantum_debruijn_rate(&m, &s).unwrap().psi;
            assert!(contraction.im.abs() < 1e-10 * (1.0 + psi.abs()));
            assert!((contraction.re + psi).abs() < 1e-9 * (1.0 + psi.abs()));
        }
    }

    #[test]
    fn shannon_rate_examples_and_fisher_split() {
        // D = I, C = 0, V = ν·I, ħ=1 → rate = 1/ν.
        let m = diffusion_model(1.0, 1.0);
        for nu in [0.8, 2.0] {
            let s = GaussianState::isotropic(1, nu).unwrap();
            assert!((shannon_debruijn_rate(&m, &s).unwrap() - 1.0 / nu).abs() < 1e-12);
        }
        // At the stationary state the rate vanishes.
        let opt = optical_model(1.0, 2.0_f64.sqrt(), 1.0, 0.3);
        let stat = stationary_covariance(&opt).unwrap();
        assert!(shannon_debruijn_rate(&opt, &stat).unwrap().abs() < 1e-10);
        // Fisher split: ½tr(DV⁻¹/ħ) = ½Σ_k(Σᵀ V⁻¹ Σ + Σ̄ᵀ V⁻¹ Σ̄)/ħ.
        let mut rng = testkit::rng(50);
        let model = testkit::random_gds_model(&mut rng, 2, 3, 1.4);
        let s = random_state(&mut rng, 2, 0.7);
        let v_inv = s.covariance().clone().try_inverse().unwrap();
        let lhs = 0.5 * (model.d_matrix() * &v_inv).trace() / model.hbar();
        let set = model.langevin_set();
        let mut rhs = 0.0;
        for (sg, sb) in set.sigma.iter().zip(&set.sigma_bar) {
            rhs += 0.5 * ((sg.transpose() * &v_inv * sg)[(0, 0)]
                + (sb.transpose() * &v_inv * sb)[(0, 0)])
                / model.hbar();
        }
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn shannon_rate_matches_finite_difference() {
        let mut rng = testkit::rng(51);
        let m = testkit::random_gds_model(&mut rng, 1, 2, 1.0);
        let s0 = random_state(&mut rng, 1, 0.8);
        let h = 1e-5;
        let base = evolve_moments(&m, &s0, h).unwrap();
        let hp = shannon_entropy_wigner(&evolve_moments(&m, &s0, 2.0 * h).unwrap()).unwrap();
        let hm = shannon_entropy_wigner(&s0).unwrap();
        let fd = (hp - hm) / (2.0 * h);
        assert!((shannon_debruijn_rate(&m, &base).unwrap() - fd).abs() < 1e-6);
    }

    #[test]
    fn gap_identity_and_high_temperature_suppression() {
        let mut rng = testkit::rng(52);
        for _ in 0..5 {
            let m = testkit::random_gds_model(&mut rng, 1, 2, 1.0);
            let s = random_state(&mut rng, 1, 0.8);
            let gap = entropy_rate_gap(&m, &s).unwrap();
            let diff = quantum_debruijn_rate(&m, &s).unwrap().rate
                - shannon_debruijn_rate(&m, &s).unwrap();
            assert!((gap - diff).abs() < 1e-8 * (1.0 + diff.abs()));
        }
        // At stationarity dV/dt = 0 so the gap vanishes.
        let opt = optical_model(1.0, 2.0_f64.sqrt(), 1.0, 0.0);
        let stat = stationary_covariance(&opt).unwrap();
        assert!(entropy_rate_gap(&opt, &stat).unwrap().abs() < 1e-10);
        // ν = 10: Θ = O(ν⁻³) makes the gap tiny against the rate.
        let m = diffusion_model(1.0, 1.0);
        let hot = GaussianState::isotropic(1, 10.0).unwrap();
        let gap = entropy_rate_gap(&m, &hot).unwrap().abs();
        let rate = quantum_debruijn_rate(&m, &hot).unwrap().rate.abs();
        assert!(gap < 1e-2 * rate);
    }
}
