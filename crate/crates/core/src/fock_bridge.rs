//! Truncated Fock-space bridge: lifts an n-mode Gaussian model and state to
//! dense matrices on (C^{N_c})^{⊗n} so every Gaussian-module formula can be
//! cross-checked against the generic finite-dimensional machinery.
//!
//! Conventions match the Gaussian module: x̂ = (q̂_1..q̂_n, p̂_1..p̂_n) with
//! q̂ = √(ħ/2)(â + â†), p̂ = i√(ħ/2)(â† − â), vacuum covariance I/2, and
//! mode 1 the leftmost Kronecker factor. Truncating the ladder corrupts the
//! canonical commutators only on the top Fock level of each mode, so every
//! operator identity is compared on the sub-block that excludes the top two
//! levels per mode; on that block the residuals are pure roundoff.

use crate::gaussian_gds::{
    dqfi_matrix_gaussian, m_matrix_gaussian, quantum_debruijn_rate, symplectic_eigenvalues,
    u_matrix, GaussianState, GdsError, GdsModel,
};
use crate::lindblad_core::{LindbladError, LindbladModel};
use crate::matrix_kernel::{
    self, commutator, complexify, herm_eig, trace, CMat, KernelError, RMat, RVec, C64,
    LOG_EIG_FLOOR,
};
use crate::testkit;
use thiserror::Error;

/// Hard cap on the lifted Hilbert-space dimension N_c^n.
pub const MAX_FOCK_DIM: usize = 4096;
/// Largest admissible trace deficit of a lifted state before renormalization.
pub const TAIL_MASS_LIMIT: f64 = 1e-8;
/// Canonical commutator residual allowed on the interior sub-block.
pub const CCR_BLOCK_TOL: f64 = 1e-10;
/// Frobenius residual allowed for the generator identities on the sub-block.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Floor under the truncation-driven tolerance used by cross-validation.
pub const CROSS_VALIDATION_FLOOR: f64 = 1e-5;

// Fixed draw for the randomized identity probes so reports are reproducible.
const PROBE_SEED: u64 = 0x0f0c_b21d;

#[derive(Debug, Error)]
pub enum FockError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Gaussian(#[from] GdsError),
    #[error(transparent)]
    Lindblad(#[from] LindbladError),
    #[error("Fock cutoff {cutoff} is too small; this operation needs N_c >= {required}")]
    CutoffTooSmall { cutoff: usize, required: usize },
    #[error("lifted dimension {dim} exceeds the cap of {max}")]
    DimensionOverflow { dim: usize, max: usize },
    #[error("at least one mode is required")]
    ZeroModes,
    #[error("model has {model} modes but the truncation has {truncation}")]
    MismatchedModes { model: usize, truncation: usize },
    #[error("model uses hbar = {model} but the truncation uses {truncation}")]
    MismatchedHbar { model: f64, truncation: f64 },
    #[error("hbar must be positive, got {0}")]
    NonPositiveHbar(f64),
    #[error(
        "state leaves tail mass {tail_mass:.3e} beyond cutoff {cutoff}; \
         estimated required N_c >= {required_cutoff}"
    )]
    TailMassExceeded {
        tail_mass: f64,
        cutoff: usize,
        required_cutoff: usize,
    },
    #[error(
        "cross-validation identity '{identity}' deviates by {deviation:.3e} \
         (tolerance {tolerance:.3e})"
    )]
    IdentityMismatch {
        identity: &'static str,
        deviation: f64,
        tolerance: f64,
    },
}

/// An n-mode bosonic Hilbert space with every mode cut at occupation N_c − 1.
#[derive(Debug, Clone, Copy)]
pub struct FockTruncation {
    n_modes: usize,
    cutoff: usize,
    hbar: f64,
}

impl FockTruncation {
    pub fn new(n_modes: usize, cutoff: usize, hbar: f64) -> Result<Self, FockError> {
        if hbar <= 0.0 || !hbar.is_finite() {
            return Err(FockError::NonPositiveHbar(hbar));
        }
        if n_modes == 0 {
            return Err(FockError::ZeroModes);
        }
        if cutoff < 2 {
            return Err(FockError::CutoffTooSmall {
                cutoff,
                required: 2,
            });
        }
        let dim = (0..n_modes)
            .try_fold(1usize, |acc, _| acc.checked_mul(cutoff))
            .ok_or(FockError::DimensionOverflow {
                dim: usize::MAX,
                max: MAX_FOCK_DIM,
            })?;
        if dim > MAX_FOCK_DIM {
            return Err(FockError::DimensionOverflow {
                dim,
                max: MAX_FOCK_DIM,
            });
        }
        Ok(Self {
            n_modes,
            cutoff,
            hbar,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.cutoff.pow(self.n_modes as u32)
    }
}

/// Truncated annihilation operator: â|m⟩ = √m |m−1⟩ for m < N_c.
pub fn ladder_operator(cutoff: usize) -> CMat {
    let mut a = CMat::zeros(cutoff, cutoff);
    for m in 1..cutoff {
        a[(m - 1, m)] = C64::new((m as f64).sqrt(), 0.0);
    }
    a
}

/// q̂ and p̂ for one mode. N_c = 2 collapses them to √(ħ/2)·σ_x and √(ħ/2)·σ_y.
pub fn single_mode_quadratures(cutoff: usize, hbar: f64) -> Result<(CMat, CMat), FockError> {
    if hbar <= 0.0 || !hbar.is_finite() {
        return Err(FockError::NonPositiveHbar(hbar));
    }
    if cutoff < 2 {
        return Err(FockError::CutoffTooSmall {
            cutoff,
            required: 2,
        });
    }
    let a = ladder_operator(cutoff);
    let adag = a.adjoint();
    let s = (hbar / 2.0).sqrt();
    let q = (&a + &adag) * C64::new(s, 0.0);
    let p = (&adag - &a) * C64::new(0.0, s);
    Ok((q, p))
}

fn embed_single_mode(op: &CMat, mode: usize, n_modes: usize, cutoff: usize) -> CMat {
    let left = cutoff.pow(mode as u32);
    let right = cutoff.pow((n_modes - 1 - mode) as u32);
    CMat::identity(left, left)
        .kronecker(op)
        .kronecker(&CMat::identity(right, right))
}

/// The 2n quadratures (q̂_1..q̂_n, p̂_1..p̂_n) on the full tensor space.
/// Requires N_c ≥ 3 so the commutator-clean interior block is nonempty.
pub fn quadrature_operators(t: &FockTruncation) -> Result<Vec<CMat>, FockError> {
    if t.cutoff < 3 {
        return Err(FockError::CutoffTooSmall {
            cutoff: t.cutoff,
            required: 3,
        });
    }
    let (q, p) = single_mode_quadratures(t.cutoff, t.hbar)?;
    let mut ops = Vec::with_capacity(2 * t.n_modes);
    for mode in 0..t.n_modes {
        ops.push(embed_single_mode(&q, mode, t.n_modes, t.cutoff));
    }
    for mode in 0..t.n_modes {
        ops.push(embed_single_mode(&p, mode, t.n_modes, t.cutoff));
    }
    Ok(ops)
}

/// Projector onto the sub-block excluding the top two Fock levels per mode.
pub fn edge_projector(t: &FockTruncation) -> CMat {
    let mut single = CMat::zeros(t.cutoff, t.cutoff);
    for m in 0..t.cutoff.saturating_sub(2) {
        single[(m, m)] = C64::new(1.0, 0.0);
    }
    let mut p = CMat::identity(1, 1);
    for _ in 0..t.n_modes {
        p = p.kronecker(&single);
    }
    p
}

/// Largest entry of P([x̂_j, x̂_k] − iħJ_jk)P over all quadrature pairs.
pub fn ccr_residual(t: &FockTruncation) -> Result<f64, FockError> {
    let ops = quadrature_operators(t)?;
    let p = edge_projector(t);
    let j = crate::gaussian_gds::symplectic_form(t.n_modes);
    let dim = t.dim();
    let mut worst: f64 = 0.0;
    for a in 0..ops.len() {
        for b in 0..ops.len() {
            let target = CMat::identity(dim, dim) * C64::new(0.0, t.hbar * j[(a, b)]);
            let resid = &p * (commutator(&ops[a], &ops[b]) - target) * &p;
            worst = worst.max(resid.camax());
        }
    }
    Ok(worst)
}

fn check_compatible(g: &GdsModel, t: &FockTruncation) -> Result<(), FockError> {
    if g.n_modes() != t.n_modes {
        return Err(FockError::MismatchedModes {
            model: g.n_modes(),
            truncation: t.n_modes,
        });
    }
    let scale = g.hbar().abs().max(t.hbar.abs());
    if (g.hbar() - t.hbar).abs() > 1e-12 * scale {
        return Err(FockError::MismatchedHbar {
            model: g.hbar(),
            truncation: t.hbar,
        });
    }
    Ok(())
}

/// Lift a Gaussian model to a dense Lindblad model: Ĥ = ½x̂ᵀ𝔹x̂ + x̂ᵀJξ and
/// L̂_k = l_kᵀJx̂.
pub fn lift_model(g: &GdsModel, t: &FockTruncation) -> Result<LindbladModel, FockError> {
    check_compatible(g, t)?;
    let ops = quadrature_operators(t)?;
    let d = t.dim();
    let two_n = 2 * t.n_modes;
    let b = g.b_matrix();
    let j = g.symplectic();
    let jxi = j * g.xi();

    let mut h = CMat::zeros(d, d);
    for i in 0..two_n {
        for k in 0..two_n {
            if b[(i, k)] != 0.0 {
                h += &ops[i] * &ops[k] * C64::new(0.5 * b[(i, k)], 0.0);
            }
        }
        if jxi[i] != 0.0 {
            h += &ops[i] * C64::new(jxi[i], 0.0);
        }
    }
    // 𝔹 symmetric makes the double sum Hermitian already; fold roundoff.
    h = (&h + h.adjoint()) * C64::new(0.5, 0.0);

    let lindblads = g
        .lindblad_vectors()
        .iter()
        .map(|l| {
            let mut op = CMat::zeros(d, d);
            for i in 0..two_n {
                // (l_kᵀJ)_i = Σ_a l_a J_ai
                let coeff: C64 = (0..two_n).map(|a| l[a] * j[(a, i)]).sum();
                if coeff != C64::new(0.0, 0.0) {
                    op += &ops[i] * coeff;
                }
            }
            op
        })
        .collect();

    Ok(LindbladModel::new(t.hbar, h, lindblads)?)
}

/// A lifted Gaussian state together with its truncation-quality proxy.
#[derive(Debug, Clone)]
pub struct LiftedState {
    /// Renormalized density matrix on the truncated space.
    pub rho: CMat,
    /// Relative trace deficit before renormalization; reported as ε_trunc.
    pub epsilon_trunc: f64,
}

fn tr_prod(a: &CMat, b: &CMat) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

fn shifted_quadratures(t: &FockTruncation, mean: &RVec) -> Result<Vec<CMat>, FockError> {
    let ops = quadrature_operators(t)?;
    let d = t.dim();
    Ok(ops
        .into_iter()
        .enumerate()
        .map(|(i, x)| x - CMat::identity(d, d) * C64::new(mean[i], 0.0))
        .collect())
}

// Map each index of the N_c-truncated tensor space to the index carrying the
// same per-mode occupations in the padded-base space.
fn kept_indices(t: &FockTruncation, padded_cutoff: usize) -> Vec<usize> {
    let n = t.n_modes;
    (0..t.dim())
        .map(|idx| {
            let mut digits = vec![0usize; n];
            let mut rem = idx;
            for k in (0..n).rev() {
                digits[k] = rem % t.cutoff;
                rem /= t.cutoff;
            }
            digits.iter().fold(0usize, |acc, &d| acc * padded_cutoff + d)
        })
        .collect()
}

fn estimated_required_cutoff(s: &GaussianState, t: &FockTruncation) -> usize {
    let r = symplectic_eigenvalues(s)
        .map(|nus| {
            nus.iter()
                .map(|nu| (nu - 0.5) / (nu + 0.5))
                .fold(0.0f64, f64::max)
        })
        .unwrap_or(0.5);
    let occupancy = s.mean().norm_squared() / (2.0 * t.hbar);
    let geometric = if r > 0.0 && r < 1.0 {
        ((TAIL_MASS_LIMIT * 0.1).ln() / r.ln()).ceil() as usize
    } else {
        3
    };
    (geometric + occupancy.ceil() as usize + 2).max(3)
}

/// Lift a Gaussian state: σ̂ ∝ exp(−(1/2ħ)(x̂−μ)ᵀU(x̂−μ)) with U from the
/// symplectic spectrum, renormalized after checking the trace deficit.
///
/// Exponentiating quadratures truncated at N_c corrupts the top level of the
/// exponent itself and plants spurious weight of order √(tail) there, so the
/// exponential is built with every mode cut at 2N_c and only then projected
/// onto the requested block; the padded dimension (2N_c)^n must also respect
/// the dimension cap.
pub fn lift_state(s: &GaussianState, t: &FockTruncation) -> Result<LiftedState, FockError> {
    if s.n_modes() != t.n_modes {
        return Err(FockError::MismatchedModes {
            model: s.n_modes(),
            truncation: t.n_modes,
        });
    }
    let u = u_matrix(s, t.hbar)?;
    let padded = FockTruncation {
        n_modes: t.n_modes,
        cutoff: 2 * t.cutoff,
        hbar: t.hbar,
    };
    let padded_dim = padded
        .cutoff
        .checked_pow(padded.n_modes as u32)
        .filter(|&d| d <= MAX_FOCK_DIM)
        .ok_or(FockError::DimensionOverflow {
            dim: padded.cutoff.pow(padded.n_modes as u32),
            max: MAX_FOCK_DIM,
        })?;

    let y = shifted_quadratures(&padded, s.mean())?;
    let two_n = 2 * t.n_modes;
    let mut exponent = CMat::zeros(padded_dim, padded_dim);
    for i in 0..two_n {
        for k in 0..two_n {
            if u[(i, k)] != 0.0 {
                exponent += &y[i] * &y[k] * C64::new(u[(i, k)] / (2.0 * t.hbar), 0.0);
            }
        }
    }
    exponent = (&exponent + exponent.adjoint()) * C64::new(0.5, 0.0);

    // Eigenbasis exponentiation keeps the deep tail of e^{−Q} relatively
    // accurate where a Pade pass would leave absolute-scale noise.
    let (vals, vecs) = herm_eig(&exponent)?;
    let weights = RVec::from_iterator(padded_dim, vals.iter().map(|v| (-v).exp()));
    let big = &vecs * CMat::from_diagonal(&weights.map(|w| C64::new(w, 0.0))) * vecs.adjoint();

    // Keep the sub-block whose every per-mode occupation is below N_c.
    let keep = kept_indices(t, padded.cutoff);
    let d = t.dim();
    let raw = CMat::from_fn(d, d, |i, k| big[(keep[i], keep[k])]);

    // Untruncated normalization: Tr e^{−Q} = √det(V + (i/2)J).
    let mut vj = complexify(s.covariance());
    let j = crate::gaussian_gds::symplectic_form(t.n_modes);
    for a in 0..two_n {
        for b in 0..two_n {
            vj[(a, b)] += C64::new(0.0, 0.5 * j[(a, b)]);
        }
    }
    let det = vj.determinant();
    let z_analytic = det.re.max(0.0).sqrt();

    let trace_raw = trace(&raw).re;
    let epsilon = ((z_analytic - trace_raw) / z_analytic).max(0.0);
    if epsilon > TAIL_MASS_LIMIT {
        return Err(FockError::TailMassExceeded {
            tail_mass: epsilon,
            cutoff: t.cutoff,
            required_cutoff: estimated_required_cutoff(s, t),
        });
    }

    let rho_scaled = raw * C64::new(1.0 / trace_raw, 0.0);
    let rho = (&rho_scaled + rho_scaled.adjoint()) * C64::new(0.5, 0.0);

    // Roundtrip guard: the lifted state must hand back the moments it encodes.
    let (mean_back, cov_back) = extract_moments(&rho, t)?;
    let tol = 1e-7f64.max(epsilon * 10.0);
    let mean_dev = (mean_back - s.mean()).amax();
    let cov_dev = (cov_back - s.covariance()).amax();
    if mean_dev.max(cov_dev) > tol {
        return Err(FockError::IdentityMismatch {
            identity: "moment roundtrip of the lifted state",
            deviation: mean_dev.max(cov_dev),
            tolerance: tol,
        });
    }

    Ok(LiftedState {
        rho,
        epsilon_trunc: epsilon,
    })
}

/// First and second moments of a density matrix in Gaussian normalization:
/// mean_i = ⟨x̂_i⟩ and V_ij = (1/2ħ)⟨{Δx̂_i, Δx̂_j}⟩.
pub fn extract_moments(rho: &CMat, t: &FockTruncation) -> Result<(RVec, RMat), FockError> {
    let ops = quadrature_operators(t)?;
    let two_n = 2 * t.n_modes;
    let mean = RVec::from_iterator(two_n, ops.iter().map(|x| tr_prod(rho, x).re));
    let y = shifted_quadratures(t, &mean)?;
    let w: Vec<CMat> = y.iter().map(|yi| rho * yi).collect();
    let mut cov = RMat::zeros(two_n, two_n);
    for i in 0..two_n {
        for k in 0..two_n {
            // Re tr(ρ y_i y_k) = ½⟨{y_i, y_k}⟩ = ħV_ik
            cov[(i, k)] = tr_prod(&w[i], &y[k]).re / t.hbar;
        }
    }
    Ok((mean, (&cov + cov.transpose()) * 0.5))
}

/// Half the trace norm of the difference of two Hermitian matrices.
pub fn trace_distance(a: &CMat, b: &CMat) -> Result<f64, FockError> {
    let (vals, _) = herm_eig(&(a - b))?;
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// Side-by-side entropy fluxes plus the worst deviation seen in each of the
/// structural identities the lift is supposed to satisfy.
#[derive(Debug, Clone)]
pub struct CrossValidationReport {
    pub delta_gaussian: f64,
    pub psi_gaussian: f64,
    pub delta_fock: f64,
    pub psi_fock: f64,
    /// Relative trace deficit of the lifted state.
    pub epsilon_trunc: f64,
    /// max(CROSS_VALIDATION_FLOOR, ε_trunc); bound enforced on the fluxes
    /// and on the Fisher/M matrix comparisons.
    pub tolerance: f64,
    /// Entrywise gap between the lifted Fisher matrix and U/ħ.
    pub dqfi_matrix_deviation: f64,
    /// Entrywise gap between the lifted M matrix and −VU − (i/2)JU.
    pub m_matrix_deviation: f64,
    /// Sub-block Frobenius residual of L₁[ô] = ½tr(D·Ĥ[ô]).
    pub l1_contraction_deviation: f64,
    /// Sub-block Frobenius residual of L₂[ô] = ½tr(JC)·ô.
    pub l2_scalar_deviation: f64,
    /// Sub-block Frobenius residual of L₃[ô] = tr(CJ·M̂[ô]) + L₂[ô].
    pub l3_contraction_deviation: f64,
    /// Sub-block residual of reassembling the full generator from the pieces.
    pub assembly_deviation: f64,
    /// Largest norm-scaled bound applied to the probe identities above
    /// (the per-probe checks themselves run at IDENTITY_TOL·(1 + ‖lhs‖)).
    pub probe_tolerance: f64,
}

// ½tr(D·Ĥ[o]) with Ĥ[o]_ij = −(1/ħ²)[(Jx̂)_i, [(Jx̂)_j, o]].
fn h_contraction(dmat: &RMat, jx: &[CMat], o: &CMat, hbar: f64) -> CMat {
    let dim = o.nrows();
    let mut acc = CMat::zeros(dim, dim);
    for col in 0..jx.len() {
        let inner = commutator(&jx[col], o);
        for row in 0..jx.len() {
            let w = dmat[(row, col)];
            if w != 0.0 {
                acc += commutator(&jx[row], &inner) * C64::new(-0.5 * w / (hbar * hbar), 0.0);
            }
        }
    }
    acc
}

// Σ_ij (CJ)_ij M̂[o]_ji with M̂[o]_ji = (i/ħ)x̂_j[(Jx̂)_i, o].
fn m_contraction(cj: &RMat, x: &[CMat], jx: &[CMat], o: &CMat, hbar: f64) -> CMat {
    let dim = o.nrows();
    let mut acc = CMat::zeros(dim, dim);
    for row in 0..jx.len() {
        let inner = commutator(&jx[row], o);
        for col in 0..x.len() {
            let w = cj[(row, col)];
            if w != 0.0 {
                acc += &x[col] * &inner * C64::new(0.0, w / hbar);
            }
        }
    }
    acc
}

fn projected_residual(p: &CMat, lhs: &CMat, rhs: &CMat) -> f64 {
    (p * (lhs - rhs) * p).norm()
}

/// Lift the model and state, recompute every Gaussian quantity with the
/// dense finite-dimensional machinery, and verify they agree. Any identity
/// outside its tolerance is returned as an error naming it.
pub fn cross_validate_rates(
    g: &GdsModel,
    s: &GaussianState,
    t: &FockTruncation,
) -> Result<CrossValidationReport, FockError> {
    let model = lift_model(g, t)?;
    let lifted = lift_state(s, t)?;
    let rho = &lifted.rho;
    let ln_rho = matrix_kernel::matrix_log_psd(rho, LOG_EIG_FLOOR)?;

    let (delta_fock, psi_fock) = model.delta_psi(rho, &ln_rho);
    let gauss = quantum_debruijn_rate(g, s)?;
    let tolerance = CROSS_VALIDATION_FLOOR.max(lifted.epsilon_trunc);

    let delta_gap = (delta_fock - gauss.delta).abs();
    if delta_gap > tolerance {
        return Err(FockError::IdentityMismatch {
            identity: "fluctuation flux delta (lifted vs Gaussian)",
            deviation: delta_gap,
            tolerance,
        });
    }
    let psi_gap = (psi_fock - gauss.psi).abs();
    if psi_gap > tolerance {
        return Err(FockError::IdentityMismatch {
            identity: "dissipation flux psi (lifted vs Gaussian)",
            deviation: psi_gap,
            tolerance,
        });
    }

    let hbar = t.hbar;
    let two_n = 2 * t.n_modes;
    let x = quadrature_operators(t)?;
    let j = g.symplectic();
    let jx: Vec<CMat> = (0..two_n)
        .map(|i| {
            let mut acc = CMat::zeros(t.dim(), t.dim());
            for a in 0..two_n {
                if j[(i, a)] != 0.0 {
                    acc += &x[a] * C64::new(j[(i, a)], 0.0);
                }
            }
            acc
        })
        .collect();

    // Fisher matrix: (1/ħ²)Tr(ρ[(Jx̂)_i, [(Jx̂)_j, ln ρ]]) against U/ħ.
    let u_over_hbar = dqfi_matrix_gaussian(s, hbar)?;
    let mut dqfi_matrix_deviation: f64 = 0.0;
    for col in 0..two_n {
        let inner = commutator(&jx[col], &ln_rho);
        for row in 0..two_n {
            let lifted_entry = tr_prod(rho, &commutator(&jx[row], &inner)).re / (hbar * hbar);
            dqfi_matrix_deviation =
                dqfi_matrix_deviation.max((lifted_entry - u_over_hbar[(row, col)]).abs());
        }
    }
    if dqfi_matrix_deviation > tolerance {
        return Err(FockError::IdentityMismatch {
            identity: "divergence Fisher information matrix",
            deviation: dqfi_matrix_deviation,
            tolerance,
        });
    }

    // M matrix: (i/ħ)Tr(ρ x̂_i [(Jx̂)_j, ln ρ]) against −VU − (i/2)JU.
    let m_gauss = m_matrix_gaussian(s, hbar)?;
    let mut m_matrix_deviation: f64 = 0.0;
    for col in 0..two_n {
        let inner = commutator(&jx[col], &ln_rho);
        for row in 0..two_n {
            let lifted_entry = tr_prod(rho, &(&x[row] * &inner)) * C64::new(0.0, 1.0 / hbar);
            m_matrix_deviation =
                m_matrix_deviation.max((lifted_entry - m_gauss[(row, col)]).norm());
        }
    }
    if m_matrix_deviation > tolerance {
        return Err(FockError::IdentityMismatch {
            identity: "phase-space transport matrix M",
            deviation: m_matrix_deviation,
            tolerance,
        });
    }

    // Generator identities on the interior sub-block, probed with random
    // Hermitian observables plus one random density matrix.
    let p = edge_projector(t);
    let dmat = g.d_matrix();
    let cj = g.c_matrix() * j;
    let jc = j * g.c_matrix();
    let l2_scalar = 0.5 * jc.trace();
    let dim = t.dim();

    let mut rng = testkit::rng(PROBE_SEED);
    let mut probes: Vec<CMat> = (0..2)
        .map(|_| {
            let o = testkit::random_hermitian(&mut rng, dim, 1.0);
            let norm = o.norm();
            o * C64::new(1.0 / norm.max(1e-300), 0.0)
        })
        .collect();
    let rho_probe = testkit::random_density_full_rank(&mut rng, dim);
    probes.push(rho_probe.clone());

    let mut l1_contraction_deviation: f64 = 0.0;
    let mut l2_scalar_deviation: f64 = 0.0;
    let mut l3_contraction_deviation: f64 = 0.0;
    let mut probe_tolerance: f64 = 0.0;
    for o in &probes {
        let l1 = model.apply_l1(o);
        let rhs1 = h_contraction(dmat, &jx, o, hbar);
        let dev1 = projected_residual(&p, &l1, &rhs1);
        l1_contraction_deviation = l1_contraction_deviation.max(dev1);
        probe_tolerance = probe_tolerance.max(IDENTITY_TOL * (1.0 + l1.norm()));
        if dev1 > IDENTITY_TOL * (1.0 + l1.norm()) {
            return Err(FockError::IdentityMismatch {
                identity: "noise generator contraction L1 = (1/2)tr(D H[.])",
                deviation: dev1,
                tolerance: IDENTITY_TOL * (1.0 + l1.norm()),
            });
        }

        let l2 = model.apply_l2(o);
        let rhs2 = o * C64::new(l2_scalar, 0.0);
        let dev2 = projected_residual(&p, &l2, &rhs2);
        l2_scalar_deviation = l2_scalar_deviation.max(dev2);
        probe_tolerance = probe_tolerance.max(IDENTITY_TOL * (1.0 + l2.norm()));
        if dev2 > IDENTITY_TOL * (1.0 + l2.norm()) {
            return Err(FockError::IdentityMismatch {
                identity: "balance scalar L2 = (1/2)tr(JC)",
                deviation: dev2,
                tolerance: IDENTITY_TOL * (1.0 + l2.norm()),
            });
        }

        let l3 = model.apply_l3(o);
        let rhs3 = m_contraction(&cj, &x, &jx, o, hbar) + rhs2;
        let dev3 = projected_residual(&p, &l3, &rhs3);
        l3_contraction_deviation = l3_contraction_deviation.max(dev3);
        probe_tolerance = probe_tolerance.max(IDENTITY_TOL * (1.0 + l3.norm()));
        if dev3 > IDENTITY_TOL * (1.0 + l3.norm()) {
            return Err(FockError::IdentityMismatch {
                identity: "transport contraction L3 = tr(CJ M[.]) + L2",
                deviation: dev3,
                tolerance: IDENTITY_TOL * (1.0 + l3.norm()),
            });
        }
    }

    // Reassemble the full generator from the contracted pieces on a state.
    let lhs_total = model.apply_total(&rho_probe);
    let rhs_total = model.apply_lu(&rho_probe)
        + h_contraction(dmat, &jx, &rho_probe, hbar)
        + &rho_probe * C64::new(jc.trace(), 0.0)
        + m_contraction(&cj, &x, &jx, &rho_probe, hbar);
    let assembly_deviation = projected_residual(&p, &lhs_total, &rhs_total);
    probe_tolerance = probe_tolerance.max(IDENTITY_TOL * (1.0 + lhs_total.norm()));
    if assembly_deviation > IDENTITY_TOL * (1.0 + lhs_total.norm()) {
        return Err(FockError::IdentityMismatch {
            identity: "four-term generator reassembly",
            deviation: assembly_deviation,
            tolerance: IDENTITY_TOL * (1.0 + lhs_total.norm()),
        });
    }

    Ok(CrossValidationReport {
        delta_gaussian: gauss.delta,
        psi_gaussian: gauss.psi,
        delta_fock,
        psi_fock,
        epsilon_trunc: lifted.epsilon_trunc,
        tolerance,
        dqfi_matrix_deviation,
        m_matrix_deviation,
        l1_contraction_deviation,
        l2_scalar_deviation,
        l3_contraction_deviation,
        assembly_deviation,
        probe_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian_gds::{
        stationary_covariance, symplectic_form, vn_entropy_gaussian,
    };
    use crate::lindblad_core::von_neumann_entropy;
    use crate::matrix_kernel::CVec;

    macro_rules! assert_close {
        ($a:expr, $b:expr, $tol:expr) => {{
            let (a, b) = ($a, $b);
            assert!((a - b).abs() <= $tol, "expected {a} ~ {b} within {}", $tol);
        }};
    }

    fn optical_model(hbar: f64, a: f64, b: f64, omega: f64) -> GdsModel {
        let bmat = RMat::identity(2, 2) * omega;
        let l1 = CVec::from_vec(vec![C64::new(a, 0.0), C64::new(0.0, a)]);
        let l2 = CVec::from_vec(vec![C64::new(b, 0.0), C64::new(0.0, -b)]);
        GdsModel::new(1, hbar, bmat, RVec::zeros(2), vec![l1, l2]).unwrap()
    }

    fn diffusion_model(hbar: f64, d: f64, omega: f64) -> GdsModel {
        let s = (d / hbar).sqrt();
        let l1 = CVec::from_vec(vec![C64::new(s, 0.0), C64::new(0.0, 0.0)]);
        let l2 = CVec::from_vec(vec![C64::new(0.0, 0.0), C64::new(s, 0.0)]);
        GdsModel::new(
            1,
            hbar,
            RMat::identity(2, 2) * omega,
            RVec::zeros(2),
            vec![l1, l2],
        )
        .unwrap()
    }

    fn thermal_state(nu: f64, mean: (f64, f64)) -> GaussianState {
        GaussianState::new(
            RVec::from_vec(vec![mean.0, mean.1]),
            RMat::identity(2, 2) * nu,
        )
        .unwrap()
    }

    #[test]
    fn truncation_validates_inputs() {
        assert!(matches!(
            FockTruncation::new(1, 1, 1.0),
            Err(FockError::CutoffTooSmall { required: 2, .. })
        ));
        assert!(matches!(
            FockTruncation::new(3, 20, 1.0),
            Err(FockError::DimensionOverflow { dim: 8000, .. })
        ));
        assert!(matches!(
            FockTruncation::new(1, 8, 0.0),
            Err(FockError::NonPositiveHbar(_))
        ));
        // 4^6 = 4096 sits exactly on the cap.
        assert_eq!(FockTruncation::new(6, 4, 1.0).unwrap().dim(), 4096);
    }

    #[test]
    fn qubit_truncation_gives_pauli_quadratures() {
        let hbar: f64 = 0.8;
        let s = (hbar / 2.0).sqrt();
        let (q, p) = single_mode_quadratures(2, hbar).unwrap();
        let sigma_x = CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        );
        let sigma_y = CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            ],
        );
        assert!((q - sigma_x * C64::new(s, 0.0)).camax() < 1e-15);
        assert!((p - sigma_y * C64::new(s, 0.0)).camax() < 1e-15);

        // The tensor-space constructor insists on a commutator-clean interior.
        let t = FockTruncation::new(1, 2, hbar).unwrap();
        assert!(matches!(
            quadrature_operators(&t),
            Err(FockError::CutoffTooSmall { required: 3, .. })
        ));
    }

    #[test]
    fn vacuum_quadrature_variance_is_half_hbar() {
        let hbar = 0.7;
        let t = FockTruncation::new(1, 8, hbar).unwrap();
        let ops = quadrature_operators(&t).unwrap();
        let q2 = &ops[0] * &ops[0];
        let p2 = &ops[1] * &ops[1];
        assert_close!(q2[(0, 0)].re, hbar / 2.0, 1e-12);
        assert_close!(p2[(0, 0)].re, hbar / 2.0, 1e-12);
    }

    #[test]
    fn canonical_commutators_hold_on_interior_block() {
        let t = FockTruncation::new(1, 12, 1.3).unwrap();
        assert!(ccr_residual(&t).unwrap() <= CCR_BLOCK_TOL);

        let t2 = FockTruncation::new(2, 5, 1.0).unwrap();
        assert!(ccr_residual(&t2).unwrap() <= CCR_BLOCK_TOL);
        // The projector keeps (N_c − 2)^n levels per mode.
        let p = edge_projector(&t2);
        assert_close!(trace(&p).re, 9.0, 1e-12);

        // Unprojected, the truncation error at the top level is order N_c·ħ.
        let ops = quadrature_operators(&t).unwrap();
        let target = CMat::identity(12, 12) * C64::new(0.0, 1.3);
        let raw = (commutator(&ops[0], &ops[1]) - target).camax();
        assert!(raw > 1.0, "edge defect should be macroscopic, got {raw}");
    }

    #[test]
    fn harmonic_hamiltonian_lifts_to_number_operator_form() {
        let (hbar, omega) = (1.0, 1.7);
        let t = FockTruncation::new(1, 10, hbar).unwrap();
        let g = GdsModel::new(
            1,
            hbar,
            RMat::identity(2, 2) * omega,
            RVec::zeros(2),
            vec![],
        )
        .unwrap();
        let model = lift_model(&g, &t).unwrap();
        // ω/2 (q² + p²) = ωħ(n̂ + ½) away from the truncation edge.
        let p = edge_projector(&t);
        let mut expected = CMat::zeros(10, 10);
        for m in 0..10 {
            expected[(m, m)] = C64::new(omega * hbar * (m as f64 + 0.5), 0.0);
        }
        let resid = (&p * (model.hamiltonian() - expected) * &p).camax();
        assert!(resid < 1e-12, "interior Hamiltonian residual {resid}");

        // A linear drive adds x̂ᵀJξ on top of the quadratic part.
        let xi = RVec::from_vec(vec![0.4, -0.3]);
        let g2 = GdsModel::new(
            1,
            hbar,
            RMat::identity(2, 2) * omega,
            xi.clone(),
            vec![],
        )
        .unwrap();
        let model2 = lift_model(&g2, &t).unwrap();
        let ops = quadrature_operators(&t).unwrap();
        let j = symplectic_form(1);
        let jxi = &j * &xi;
        let drive = &ops[0] * C64::new(jxi[0], 0.0) + &ops[1] * C64::new(jxi[1], 0.0);
        let gap = (model2.hamiltonian() - model.hamiltonian() - drive).camax();
        assert!(gap < 1e-12);
    }

    #[test]
    fn optical_jumps_lift_to_ladder_operators() {
        let hbar = 1.0;
        let t = FockTruncation::new(1, 6, hbar).unwrap();
        let g = optical_model(hbar, 0.9, 0.4, 1.0);
        let model = lift_model(&g, &t).unwrap();
        let a = embed_single_mode(&ladder_operator(6), 0, 1, 6);

        // l = a(1, i)ᵀ gives L̂ = −ia√(2ħ)·â.
        let damp = &model.lindblads()[0];
        let expected = &a * C64::new(0.0, -0.9 * (2.0 * hbar).sqrt());
        assert!((damp - expected).camax() < 1e-12);

        // l = b(1, −i)ᵀ gives L̂ ∝ â†.
        let gain = &model.lindblads()[1];
        let expected_gain = a.adjoint() * C64::new(0.0, 0.4 * (2.0 * hbar).sqrt());
        assert!((gain - expected_gain).camax() < 1e-12);
    }

    #[test]
    fn lift_model_rejects_incompatible_truncations() {
        let g = optical_model(1.0, 1.0, 0.3, 1.0);
        let wrong_modes = FockTruncation::new(2, 4, 1.0).unwrap();
        assert!(matches!(
            lift_model(&g, &wrong_modes),
            Err(FockError::MismatchedModes { .. })
        ));
        let wrong_hbar = FockTruncation::new(1, 4, 2.0).unwrap();
        assert!(matches!(
            lift_model(&g, &wrong_hbar),
            Err(FockError::MismatchedHbar { .. })
        ));
    }

    #[test]
    fn lifted_generator_reproduces_moment_odes() {
        let hbar = 1.0;
        let bmat = RMat::identity(2, 2);
        let xi = RVec::from_vec(vec![0.4, -0.3]);
        let l1 = CVec::from_vec(vec![
            C64::new(2f64.sqrt(), 0.0),
            C64::new(0.0, 2f64.sqrt()),
        ]);
        let l2 = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, -1.0)]);
        let g = GdsModel::new(1, hbar, bmat, xi, vec![l1, l2]).unwrap();
        let t = FockTruncation::new(1, 36, hbar).unwrap();
        let s = thermal_state(1.0, (0.5, 0.2));
        let model = lift_model(&g, &t).unwrap();
        let rho = lift_state(&s, &t).unwrap().rho;
        let drho = model.apply_total(&rho);

        let ops = quadrature_operators(&t).unwrap();
        let mean_rate_expected = g.mean_velocity(s.mean());
        for i in 0..2 {
            let lifted_rate = tr_prod(&drho, &ops[i]).re;
            assert_close!(lifted_rate, mean_rate_expected[i], 1e-8);
        }

        // d/dt of the centered second moments needs no mean-motion correction
        // because tr(ρ Δx̂) = 0.
        let y = shifted_quadratures(&t, s.mean()).unwrap();
        let cov_rate_expected = g.covariance_velocity(s.covariance());
        for i in 0..2 {
            for k in 0..2 {
                let sym = (&y[i] * &y[k] + &y[k] * &y[i]) * C64::new(0.5 / hbar, 0.0);
                let lifted_rate = tr_prod(&drho, &sym).re;
                assert_close!(lifted_rate, cov_rate_expected[(i, k)], 1e-8);
            }
        }
    }

    #[test]
    fn thermal_lift_is_geometric_and_normalized() {
        let t = FockTruncation::new(1, 30, 1.0).unwrap();
        let s = thermal_state(1.0, (0.0, 0.0));
        let lifted = lift_state(&s, &t).unwrap();
        assert!(lifted.epsilon_trunc < 1e-12);
        assert_close!(trace(&lifted.rho).re, 1.0, 1e-13);

        // ν = 1 thermal state: p_m = (2/3)(1/3)^m, diagonal in Fock basis.
        let mut off_diag: f64 = 0.0;
        for i in 0..30 {
            for k in 0..30 {
                if i != k {
                    off_diag = off_diag.max(lifted.rho[(i, k)].norm());
                }
            }
        }
        assert!(off_diag < 1e-13);
        for m in 0..20 {
            let expected = (2.0 / 3.0) * (1.0f64 / 3.0).powi(m as i32);
            let got = lifted.rho[(m, m)].re;
            assert!(
                (got - expected).abs() < 1e-9 * expected,
                "p_{m} = {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn lifted_entropy_matches_gaussian_value() {
        let t = FockTruncation::new(1, 40, 1.0).unwrap();
        let s = thermal_state(1.0, (0.0, 0.0));
        let lifted = lift_state(&s, &t).unwrap();
        let s_fock = von_neumann_entropy(&lifted.rho).unwrap();
        let s_gauss = vn_entropy_gaussian(&s).unwrap();
        assert_close!(s_fock, s_gauss, 1e-6);
        assert_close!(s_fock, 0.9547712524422734, 1e-6);
    }

    #[test]
    fn displaced_state_shifts_occupation_not_covariance() {
        let hbar = 1.0;
        let t = FockTruncation::new(1, 40, hbar).unwrap();
        let s = thermal_state(1.0, (1.2, -0.7));
        let lifted = lift_state(&s, &t).unwrap();

        let (mean, cov) = extract_moments(&lifted.rho, &t).unwrap();
        assert_close!(mean[0], 1.2, 1e-9);
        assert_close!(mean[1], -0.7, 1e-9);
        assert!((cov - RMat::identity(2, 2)).amax() < 1e-9);

        // ⟨n̂⟩ = ν − ½ + |μ|²/2ħ for an isotropic thermal state.
        let a = embed_single_mode(&ladder_operator(40), 0, 1, 40);
        let n_op = a.adjoint() * &a;
        let occupation = tr_prod(&lifted.rho, &n_op).re;
        let expected = 0.5 + (1.2f64.powi(2) + 0.7f64.powi(2)) / (2.0 * hbar);
        assert_close!(occupation, expected, 1e-8);
    }

    #[test]
    fn tail_mass_error_names_required_cutoff() {
        let t = FockTruncation::new(1, 12, 1.0).unwrap();
        let s = thermal_state(3.0, (0.0, 0.0));
        match lift_state(&s, &t) {
            Err(FockError::TailMassExceeded {
                tail_mass,
                cutoff,
                required_cutoff,
            }) => {
                assert!(tail_mass > 1e-3);
                assert_eq!(cutoff, 12);
                // (ν−½)/(ν+½) = 5/7 needs ~60+ levels for a 1e-9 tail.
                assert!(required_cutoff > 50, "estimate {required_cutoff}");
            }
            other => panic!("expected tail-mass error, got {other:?}"),
        }
    }

    #[test]
    fn moment_roundtrip_on_correlated_two_mode_state() {
        let t = FockTruncation::new(2, 10, 1.0).unwrap();
        // Gentle eigenvalues keep every symplectic value well under the
        // level where a 10-level cutoff would clip the tail.
        let q_raw = RMat::from_fn(4, 4, |i, k| ((i * 7 + k * 3 + 1) as f64 * 0.37).sin());
        let qr = q_raw.qr();
        let q = qr.q();
        let lam = RMat::from_diagonal(&RVec::from_vec(vec![0.54, 0.57, 0.59, 0.62]));
        let v = &q * lam * q.transpose();
        let v = (&v + v.transpose()) * 0.5;
        let mean = RVec::from_vec(vec![0.15, -0.1, 0.05, 0.12]);
        let s = GaussianState::new(mean.clone(), v.clone()).unwrap();

        let lifted = lift_state(&s, &t).unwrap();
        let (mean_back, cov_back) = extract_moments(&lifted.rho, &t).unwrap();
        assert!((mean_back - mean).amax() < 1e-7);
        assert!((cov_back - v).amax() < 1e-7);
    }

    #[test]
    fn cross_validates_quantum_diffusion_on_thermal_state() {
        let g = diffusion_model(1.0, 0.5, 0.3);
        let s = thermal_state(1.0, (0.0, 0.0));
        let t = FockTruncation::new(1, 40, 1.0).unwrap();
        let report = cross_validate_rates(&g, &s, &t).unwrap();

        // Hermitian jump operators cannot dissipate: Ψ vanishes on both sides.
        assert!(report.psi_gaussian.abs() < 1e-12);
        assert!(report.psi_fock.abs() < 1e-12);
        // Δ = ½tr(DU)/ħ = d·ln3 at ν = 1.
        assert_close!(report.delta_gaussian, 0.5 * 3f64.ln(), 1e-12);
        assert_close!(report.delta_fock, report.delta_gaussian, 1e-7);
        assert!(report.l1_contraction_deviation < IDENTITY_TOL);
        assert!(report.assembly_deviation < IDENTITY_TOL);
    }

    #[test]
    fn cross_validates_optical_model_at_stationarity() {
        let g = optical_model(1.0, 2f64.sqrt(), 1.0, 1.0);
        let s = stationary_covariance(&g).unwrap();
        let t = FockTruncation::new(1, 40, 1.0).unwrap();
        let report = cross_validate_rates(&g, &s, &t).unwrap();

        // At V^S both decompositions must balance: rate = Δ − Ψ = 0 with a
        // genuinely nonzero throughput.
        assert!(report.delta_gaussian > 0.1);
        assert!((report.delta_gaussian - report.psi_gaussian).abs() < 1e-10);
        assert!((report.delta_fock - report.psi_fock).abs() < 1e-6);
        assert!(report.m_matrix_deviation <= report.tolerance);
    }

    #[test]
    fn cross_validates_random_single_mode_models() {
        let mut rng = testkit::rng(0xf0c1);
        let t = FockTruncation::new(1, 40, 1.0).unwrap();
        for trial in 0..3 {
            let g = testkit::random_gds_model(&mut rng, 1, 2, 1.0);
            let cov = testkit::random_quantum_covariance(&mut rng, 1, 0.75);
            let mean = RVec::from_fn(2, |_, _| 0.3 * ((trial + 1) as f64 * 0.41).sin());
            let s = GaussianState::new(mean, cov).unwrap();
            let report = cross_validate_rates(&g, &s, &t).unwrap();
            assert!(
                report.l1_contraction_deviation < IDENTITY_TOL,
                "trial {trial}: l1 {}",
                report.l1_contraction_deviation
            );
            assert!(report.l2_scalar_deviation < IDENTITY_TOL);
            assert!(report.l3_contraction_deviation < IDENTITY_TOL);
            assert!(report.assembly_deviation < IDENTITY_TOL);
            assert!(report.dqfi_matrix_deviation <= report.tolerance);
            assert!(report.m_matrix_deviation <= report.tolerance);
        }
    }

    #[test]
    fn cross_validates_random_two_mode_model() {
        let mut rng = testkit::rng(0xf0c2);
        let g = testkit::random_gds_model(&mut rng, 2, 2, 1.0);
        let t = FockTruncation::new(2, 10, 1.0).unwrap();
        let q_raw = RMat::from_fn(4, 4, |i, k| ((i * 5 + k * 11 + 2) as f64 * 0.29).cos());
        let q = q_raw.qr().q();
        let lam = RMat::from_diagonal(&RVec::from_vec(vec![0.54, 0.57, 0.6, 0.62]));
        let v = &q * lam * q.transpose();
        let s = GaussianState::new(
            RVec::from_vec(vec![0.1, -0.08, 0.06, 0.0]),
            (&v + v.transpose()) * 0.5,
        )
        .unwrap();
        let report = cross_validate_rates(&g, &s, &t).unwrap();
        assert!((report.delta_fock - report.delta_gaussian).abs() <= report.tolerance);
        assert!((report.psi_fock - report.psi_gaussian).abs() <= report.tolerance);
        assert!(report.assembly_deviation < IDENTITY_TOL);
    }

    #[test]
    fn generator_identities_need_the_interior_projection() {
        // Away from the sub-block the truncation defect is macroscopic; this
        // guards against the projector accidentally trivializing the checks.
        let g = optical_model(1.0, 1.0, 0.3, 0.8);
        let t = FockTruncation::new(1, 14, 1.0).unwrap();
        let model = lift_model(&g, &t).unwrap();
        let mut rng = testkit::rng(7);
        let o = testkit::random_hermitian(&mut rng, 14, 1.0);
        let o = &o * C64::new(1.0 / o.norm(), 0.0);

        let jc = symplectic_form(1) * g.c_matrix();
        let rhs = &o * C64::new(0.5 * jc.trace(), 0.0);
        let unprojected = (model.apply_l2(&o) - &rhs).norm();
        assert!(unprojected > 1e-3, "edge defect too small: {unprojected}");
        let p = edge_projector(&t);
        assert!(projected_residual(&p, &model.apply_l2(&o), &rhs) < IDENTITY_TOL);
    }

    #[test]
    fn doubling_the_cutoff_shrinks_every_discrepancy() {
        let g = optical_model(1.0, 2f64.sqrt(), 1.0, 1.0);
        // ν = 2 at N_c = 40 leaves a ~1e-9 tail: large enough to dominate
        // every discrepancy, small enough to stay within the lift guards.
        let s = thermal_state(2.0, (0.2, -0.1));
        let coarse = cross_validate_rates(
            &g,
            &s,
            &FockTruncation::new(1, 40, 1.0).unwrap(),
        )
        .unwrap();
        let fine = cross_validate_rates(
            &g,
            &s,
            &FockTruncation::new(1, 80, 1.0).unwrap(),
        )
        .unwrap();

        assert!(coarse.epsilon_trunc > 1e-10, "coarse run should feel the cutoff");
        assert!(fine.epsilon_trunc < coarse.epsilon_trunc * 1e-3);

        let coarse_delta = (coarse.delta_fock - coarse.delta_gaussian).abs();
        let fine_delta = (fine.delta_fock - fine.delta_gaussian).abs();
        assert!(fine_delta < coarse_delta);
        let coarse_psi = (coarse.psi_fock - coarse.psi_gaussian).abs();
        let fine_psi = (fine.psi_fock - fine.psi_gaussian).abs();
        assert!(fine_psi < coarse_psi);
        assert!(fine.dqfi_matrix_deviation < coarse.dqfi_matrix_deviation);
        assert!(fine.m_matrix_deviation < coarse.m_matrix_deviation);
    }

    #[test]
    fn lifted_dynamics_contract_toward_the_stationary_lift() {
        // Start from a deliberately non-Gaussian state (thermal background
        // plus a Fock-level spike) and watch the lifted optical dynamics pull
        // it toward the lifted stationary Gaussian. Asymptotic convergence is
        // expected physics; the decreasing trace distance is reported here,
        // monotonicity is not asserted.
        let g = optical_model(1.0, 2f64.sqrt(), 1.0, 1.0);
        let t = FockTruncation::new(1, 32, 1.0).unwrap();
        let model = lift_model(&g, &t).unwrap();
        let target = lift_state(&stationary_covariance(&g).unwrap(), &t)
            .unwrap()
            .rho;

        let background = lift_state(&thermal_state(0.8, (0.0, 0.0)), &t).unwrap().rho;
        let mut spike = CMat::zeros(32, 32);
        spike[(2, 2)] = C64::new(1.0, 0.0);
        let rho0 = background * C64::new(0.7, 0.0) + spike * C64::new(0.3, 0.0);

        // Plain fixed-step RK4: the metric only needs percent-level accuracy,
        // not the tolerance-driven halving of the production integrator.
        let h = C64::new(5e-3, 0.0);
        let half = C64::new(0.5, 0.0);
        let sixth = C64::new(1.0 / 6.0, 0.0);
        let mut rho = rho0.clone();
        let mut distances = vec![trace_distance(&rho, &target).unwrap()];
        for _ in 0..3 {
            for _ in 0..200 {
                let k1 = model.apply_total(&rho);
                let k2 = model.apply_total(&(&rho + &k1 * (h * half)));
                let k3 = model.apply_total(&(&rho + &k2 * (h * half)));
                let k4 = model.apply_total(&(&rho + &k3 * h));
                rho += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * (h * sixth);
            }
            distances.push(trace_distance(&rho, &target).unwrap());
        }
        assert!(distances[0] > 0.2, "initial displacement {:?}", distances);
        assert!(
            distances[3] < 0.5 * distances[0],
            "no contraction: {distances:?}"
        );
        assert!(distances.iter().all(|d| d.is_finite()));
    }
}
