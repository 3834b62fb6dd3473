//! Divergence-based quantum Fisher information (DQFI): quantum relative
//! entropy, the double-commutator formula, its finite-difference oracle along
//! unitary orbits, and the reassembly of the entropy-rate noise term as a sum
//! of DQFIs.
//!
//! The DQFI of a family ρ_δθ = e^{−iδθC/ħ} ρ e^{+iδθC/ħ} is the second
//! derivative of S[ρ_δθ‖ρ] at δθ = 0 and equals (1/ħ²)·Tr(ρ[C,[C,ln ρ]]).
//! `dqfi_commutator` returns the bare trace Tr(ρ[C,[C,ln ρ]]); the 1/ħ²
//! belongs to the parameterization and is applied where a family is in play.

use crate::lindblad_core::{LindbladModel, FULL_RANK_EIG_MIN};
use crate::matrix_kernel::{
    check_density, check_hermitian, commutator, herm_eig, matrix_exp, matrix_log_psd, trace, CMat,
    KernelError, C64, HERMITICITY_TOL, LOG_EIG_FLOOR,
};
use thiserror::Error;

/// Eigenvalues of σ at or below this floor count as outside its support.
pub const SUPPORT_FLOOR: f64 = 1e-10;
/// Probability mass of ρ tolerated on the null space of σ before the
/// relative entropy is reported as divergent.
pub const SUPPORT_LEAK_TOL: f64 = 1e-9;
/// Default step for the finite-difference DQFI oracle.
pub const DEFAULT_FD_THETA: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum DqfiError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("state is effectively singular (eigenvalue {min_eigenvalue:.3e}); the commutator formula requires ln ρ")]
    SingularState { min_eigenvalue: f64 },
    #[error("relative entropy diverges (+inf): ρ carries mass {leaked_mass:.3e} outside the support of σ")]
    Divergent { leaked_mass: f64 },
    #[error("finite-difference step {h:.3e} is roundoff-dominated: halving changed the result by {change:.3e} (limit {limit:.3e})")]
    RoundoffDominated { h: f64, change: f64, limit: f64 },
}

/// Family of states swept out of a base state by a fixed Hermitian generator:
/// ρ_δθ = e^{−iδθC/ħ} ρ e^{+iδθC/ħ}. Spectrum and trace are θ-independent.
#[derive(Debug, Clone)]
pub struct UnitaryOrbitFamily {
    base_state: CMat,
    generator: CMat,
    hbar: f64,
}

impl UnitaryOrbitFamily {
    pub fn new(base_state: CMat, generator: CMat, hbar: f64) -> Result<Self, DqfiError> {
        check_density(&base_state)?;
        check_hermitian(&generator, HERMITICITY_TOL)?;
        assert!(hbar > 0.0, "hbar must be positive");
        Ok(Self {
            base_state,
            generator,
            hbar,
        })
    }

    pub fn base_state(&self) -> &CMat {
        &self.base_state
    }

    pub fn generator(&self) -> &CMat {
        &self.generator
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// State at parameter offset δθ.
    pub fn state_at(&self, dtheta: f64) -> CMat {
        let u = matrix_exp(&(&self.generator * C64::new(0.0, -dtheta / self.hbar)));
        let out = &u * &self.base_state * u.adjoint();
        (&out + out.adjoint()) * C64::new(0.5, 0.0)
    }
}

/// Quantum relative entropy S[ρ‖σ] = Tr ρ(ln ρ − ln σ).
///
/// σ may be rank deficient as long as ρ lives inside its support; mass of ρ
/// beyond `SUPPORT_LEAK_TOL` on the null space of σ reports divergence
/// (the +inf case) as an error instead of a number.
pub fn relative_entropy(rho: &CMat, sigma: &CMat) -> Result<f64, DqfiError> {
    check_density(rho)?;
    check_density(sigma)?;
    let (rvals, _) = herm_eig(rho)?;
    // Tr(ρ ln ρ) with the 0·ln 0 = 0 convention.
    let rho_term: f64 = rvals
        .iter()
        .filter(|&&v| v > LOG_EIG_FLOOR)
        .map(|&v| v * v.ln())
        .sum();
    let (svals, svecs) = herm_eig(sigma)?;
    let mut sigma_term = 0.0;
    let mut leaked = 0.0;
    for i in 0..svals.len() {
        let v = svecs.column(i);
        let p = (v.adjoint() * rho * v)[(0, 0)].re;
        if svals[i] > SUPPORT_FLOOR {
            sigma_term += p * svals[i].ln();
        } else {
            leaked += p.max(0.0);
        }
    }
    if leaked > SUPPORT_LEAK_TOL {
        return Err(DqfiError::Divergent {
            leaked_mass: leaked,
        });
    }
    Ok(rho_term - sigma_term)
}

/// The double-commutator trace Tr(ρ[C,[C,ln ρ]]).
///
/// Nonnegative for every full-rank ρ and Hermitian C: in the eigenbasis of ρ
/// it is Σ_jk |C_jk|² (λ_j − λ_k)(ln λ_j − ln λ_k).
pub fn dqfi_commutator(rho: &CMat, c: &CMat) -> Result<f64, DqfiError> {
    check_density(rho)?;
    check_hermitian(c, HERMITICITY_TOL)?;
    let (vals, _) = herm_eig(rho)?;
    if vals[0] <= FULL_RANK_EIG_MIN {
        return Err(DqfiError::SingularState {
            min_eigenvalue: vals[0],
        });
    }
    let ln_rho = matrix_log_psd(rho, LOG_EIG_FLOOR)?;
    let nested = commutator(c, &commutator(c, &ln_rho));
    Ok(trace(&(rho * nested)).re)
}

/// Second central difference of δθ ↦ S[ρ_δθ‖ρ] at 0, Richardson-extrapolated
/// over one halving. Agrees with `dqfi_commutator`/ħ² up to O(h²) curvature.
pub fn dqfi_finite_difference(family: &UnitaryOrbitFamily, h: f64) -> Result<f64, DqfiError> {
    Ok(dqfi_fd_with_curvature(family, h)?.0)
}

/// As `dqfi_finite_difference`, additionally returning the estimated
/// fourth-order curvature bound C₄ (so callers can form the agreement
/// tolerance max(1e-5, C₄h²)).
///
/// Roundoff detection: with a healthy step, halving contracts the change in
/// the raw second difference by ~4×. Two roundoff signatures raise an error
/// instead of returning a noise-valued estimate: the changes stop
/// contracting while exceeding 10·h², or every stencil value sits below the
/// eigendecomposition noise floor even though the orbit visibly moves the
/// state (the relative entropies underflowed).
pub fn dqfi_fd_with_curvature(
    family: &UnitaryOrbitFamily,
    h: f64,
) -> Result<(f64, f64), DqfiError> {
    assert!(h > 0.0, "step must be positive");
    let d1 = second_difference(family, h)?;
    let d2 = second_difference(family, h / 2.0)?;
    let d4 = second_difference(family, h / 4.0)?;
    let c1 = (d1 - d2).abs();
    let c2 = (d2 - d4).abs();
    let limit = 10.0 * h * h;
    if c2 > 0.4 * c1 && c2 > limit {
        return Err(DqfiError::RoundoffDominated {
            h,
            change: c2,
            limit,
        });
    }
    let (base_vals, _) = herm_eig(family.base_state())?;
    let s_scale: f64 = 1.0
        + base_vals
            .iter()
            .filter(|&&v| v > LOG_EIG_FLOOR)
            .map(|&v| (v * v.ln()).abs())
            .sum::<f64>();
    let fine = h / 4.0;
    let noise_floor = 48.0 * f64::EPSILON * s_scale / (fine * fine);
    let motion = commutator(family.generator(), family.base_state()).norm()
        / (1e-300 + family.generator().norm() * family.base_state().norm());
    if motion > 1e-12 && d1.abs().max(d2.abs()).max(d4.abs()) < noise_floor {
        return Err(DqfiError::RoundoffDominated {
            h,
            change: c2,
            limit: noise_floor,
        });
    }
    // D(h) − D(h/2) ≈ (3/4)·C₄·h² for truncation-dominated steps.
    let c4 = (4.0 / 3.0) * c1 / (h * h);
    Ok(((4.0 * d4 - d2) / 3.0, c4))
}

fn second_difference(family: &UnitaryOrbitFamily, h: f64) -> Result<f64, DqfiError> {
    let s_plus = relative_entropy(&family.state_at(h), family.base_state())?;
    let s_minus = relative_entropy(&family.state_at(-h), family.base_state())?;
    // S(0) = 0 exactly, so the stencil reduces to (S(+h) + S(−h))/h².
    Ok((s_plus + s_minus) / (h * h))
}

/// Noise term of the entropy rate as a sum of DQFIs:
/// Δ = ½ Σ_k (J_q[ρ; √ħ A_k] + J_q[ρ; √ħ B_k]) with J_q[ρ; C] =
/// (1/ħ²)·Tr(ρ[C,[C,ln ρ]]). Equals −Tr(ρ L₁[ln ρ]) identically.
pub fn delta_from_dqfi(model: &LindbladModel, rho: &CMat) -> Result<f64, DqfiError> {
    let hbar = model.hbar();
    let sqrt_hbar = C64::new(hbar.sqrt(), 0.0);
    let mut total = 0.0;
    let split = model.split();
    for (a, b) in split.a_ops.iter().zip(&split.b_ops) {
        let ja = dqfi_commutator(rho, &(a * sqrt_hbar))? / (hbar * hbar);
        let jb = dqfi_commutator(rho, &(b * sqrt_hbar))? / (hbar * hbar);
        total += 0.5 * (ja + jb);
    }
    Ok(total)
}
