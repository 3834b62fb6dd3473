//! Finite-dimensional Lindblad master equation: generators, the
//! noise/anticommutator/hopping decomposition of the dissipator, time
//! evolution, stationary states, and entropy-rate reports.
//!
//! Conventions used throughout:
//!
//! dρ/dt = (1/iħ)[H, ρ] + (1/2ħ) Σ_k (2 L_k ρ L_k† − L_k†L_k ρ − ρ L_k†L_k)
//!
//! Writing each Lindblad operator through its Hermitian components
//! L_k = A_k + i B_k, the non-unitary generator splits into three parts:
//! a double-commutator (noise) part built from A_k and B_k, an
//! anticommutator part driven by [L_k, L_k†], and a hopping part.
//! The three sum back to the non-unitary generator; the noise part is the
//! one that pairs with quantum Fisher information in the entropy rate.

use crate::matrix_kernel::{
    self, check_density, check_hermitian, herm_eig, matrix_exp, matrix_log_psd, CMat, CVec,
    KernelError, RVec, C64, HERMITICITY_TOL, LOG_EIG_FLOOR,
};
use thiserror::Error;

/// States with an eigenvalue at or below this bound are rejected by the
/// entropy-rate operations (their matrix logarithm is not trustworthy).
pub const FULL_RANK_EIG_MIN: f64 = 1e-10;
/// Residual bound ‖L[ρ]‖_F under which a state counts as stationary.
pub const STATIONARY_RESIDUAL_TOL: f64 = 1e-8;
/// Trace drift beyond this aborts a fixed-step integration as diverged.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Default admixture used to regularize pure initial states, ρ → (1-ε)ρ + ε·I/d.
pub const DEFAULT_PURE_STATE_MIX: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum LindbladError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("{what} must be {dim}x{dim}, got {rows}x{cols}")]
    DimensionMismatch {
        what: &'static str,
        dim: usize,
        rows: usize,
        cols: usize,
    },
    #[error("hbar must be positive, got {hbar}")]
    NonPositiveHbar { hbar: f64 },
    #[error("expected {expected} gauge shifts, got {found}")]
    WrongAlphaCount { expected: usize, found: usize },
    #[error("evolution time must be nonnegative, got {t}")]
    NegativeTime { t: f64 },
    #[error("integration step must be positive, got {step}")]
    NonPositiveStep { step: f64 },
    #[error("fixed-step integration diverged: trace drift {trace_drift:.3e}")]
    StepDiverged { trace_drift: f64 },
    #[error("state is effectively singular (eigenvalue {min_eigenvalue:.3e}); entropy-rate formulas require ln ρ, mix with ε·identity first")]
    SingularState { min_eigenvalue: f64 },
    #[error("claimed stationary state has generator residual {residual:.3e} (limit {limit:.0e})")]
    NotStationary { residual: f64, limit: f64 },
    #[error("no stationary direction found: smallest singular value {sigma_min:.3e}")]
    NoStationaryState { sigma_min: f64 },
    #[error("stationary state is not unique: generator null space has dimension {null_dim}")]
    AmbiguousStationaryState { null_dim: usize },
    #[error("stationary null direction has zero trace; cannot normalize to a state")]
    TracelessStationaryDirection,
}

/// Identifies one of the generators acting on operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    /// (1/iħ)[H, ·]
    Unitary,
    /// The full dissipator.
    NonUnitary,
    /// Double-commutator (noise) part of the dissipator.
    L1,
    /// Anticommutator part driven by [L_k, L_k†].
    L2,
    /// Hopping part (L_k · L_k† − L_k† · L_k)/2ħ.
    L3,
    /// Unitary + non-unitary.
    Total,
}

/// Hermitian components A_k = (L_k + L_k†)/2, B_k = (L_k − L_k†)/(2i).
#[derive(Debug, Clone)]
pub struct CartesianSplit {
    pub a_ops: Vec<CMat>,
    pub b_ops: Vec<CMat>,
}

/// Time-independent Lindblad model; immutable after construction, with the
/// operator caches needed by the generator applications.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    dim: usize,
    hbar: f64,
    hamiltonian: CMat,
    lindblads: Vec<CMat>,
    split: CartesianSplit,
    l_dag: Vec<CMat>,
    l_dag_l: Vec<CMat>,
    /// [L_k, L_k†], Hermitian.
    comm_l_ldag: Vec<CMat>,
}

/// How `evolve` integrates the master equation.
#[derive(Debug, Clone, Copy)]
pub enum EvolveMethod {
    /// Exponential of the d²×d² vectorized generator; exact up to roundoff.
    SuperopExp,
    /// Classical fixed-step RK4 with Richardson step-halving control.
    Rk4 { step: f64 },
}

impl EvolveMethod {
    /// Superoperator exponential up to dim 16, RK4 beyond (the d²×d²
    /// exponential stops being the cheap option there).
    pub fn auto(dim: usize, fallback_step: f64) -> Self {
        if dim <= 16 {
            EvolveMethod::SuperopExp
        } else {
            EvolveMethod::Rk4 {
                step: fallback_step,
            }
        }
    }
}

/// Entropy bookkeeping at one instant along a trajectory.
#[derive(Debug, Clone)]
pub struct EntropyRateReport {
    /// Time label, set by the caller driving the trajectory.
    pub t: f64,
    /// Von Neumann entropy S[ρ] in nats.
    pub entropy: f64,
    /// Noise (fluctuation) contribution to dS/dt; a sum of quantum Fisher
    /// informations, nonnegative up to roundoff.
    pub delta: f64,
    /// Dissipation contribution; dS/dt = delta − psi.
    pub psi: f64,
    /// Central finite difference of S along the evolution.
    pub rate_fd: f64,
    /// Tolerance within which rate_fd must match delta − psi.
    pub rate_tol: f64,
    /// Entropy production −d/dt S[ρ_t‖ρ_s], when a stationary state was given.
    pub spohn_pi: Option<f64>,
    /// Entropy flux Π − (Δ − Ψ), when a stationary state was given.
    pub flux_phi_dot: Option<f64>,
}

impl LindbladModel {
    /// Build a model from ħ, a Hermitian Hamiltonian, and Lindblad operators.
    /// All operators must be square and of equal dimension.
    pub fn new(hbar: f64, hamiltonian: CMat, lindblads: Vec<CMat>) -> Result<Self, LindbladError> {
        if hbar <= 0.0 || hbar.is_nan() {
            return Err(LindbladError::NonPositiveHbar { hbar });
        }
        let dim = hamiltonian.nrows();
        if hamiltonian.ncols() != dim {
            return Err(LindbladError::DimensionMismatch {
                what: "hamiltonian",
                dim,
                rows: hamiltonian.nrows(),
                cols: hamiltonian.ncols(),
            });
        }
        check_hermitian(&hamiltonian, HERMITICITY_TOL)?;
        for l in &lindblads {
            if l.nrows() != dim || l.ncols() != dim {
                return Err(LindbladError::DimensionMismatch {
                    what: "lindblad operator",
                    dim,
                    rows: l.nrows(),
                    cols: l.ncols(),
                });
            }
        }
        let half = C64::new(0.5, 0.0);
        let half_over_i = C64::new(0.0, -0.5); // 1/(2i)
        let a_ops: Vec<CMat> = lindblads
            .iter()
            .map(|l| (l + l.adjoint()) * half)
            .collect();
        let b_ops: Vec<CMat> = lindblads
            .iter()
            .map(|l| (l - l.adjoint()) * half_over_i)
            .collect();
        let l_dag: Vec<CMat> = lindblads.iter().map(|l| l.adjoint()).collect();
        let l_dag_l: Vec<CMat> = lindblads
            .iter()
            .zip(&l_dag)
            .map(|(l, ld)| ld * l)
            .collect();
        let comm_l_ldag: Vec<CMat> = lindblads
            .iter()
            .zip(&l_dag)
            .map(|(l, ld)| l * ld - ld * l)
            .collect();
        Ok(Self {
            dim,
            hbar,
            hamiltonian,
            lindblads,
            split: CartesianSplit { a_ops, b_ops },
            l_dag,
            l_dag_l,
            comm_l_ldag,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn hamiltonian(&self) -> &CMat {
        &self.hamiltonian
    }

    pub fn lindblads(&self) -> &[CMat] {
        &self.lindblads
    }

    pub fn split(&self) -> &CartesianSplit {
        &self.split
    }

    fn assert_dim(&self, o: &CMat) {
        assert!(
            o.nrows() == self.dim && o.ncols() == self.dim,
            "operator must be {}x{}, got {}x{}",
            self.dim,
            self.dim,
            o.nrows(),
            o.ncols()
        );
    }

    /// Unitary generator (1/iħ)[H, o].
    pub fn apply_lu(&self, o: &CMat) -> CMat {
        self.assert_dim(o);
        matrix_kernel::commutator(&self.hamiltonian, o) * C64::new(0.0, -1.0 / self.hbar)
    }

    /// Dissipator (1/2ħ) Σ_k (2 L_k o L_k† − L_k†L_k o − o L_k†L_k).
    pub fn apply_lnu(&self, o: &CMat) -> CMat {
        self.assert_dim(o);
        let mut acc = CMat::zeros(self.dim, self.dim);
        for (k, l) in self.lindblads.iter().enumerate() {
            let ld = &self.l_dag[k];
            let ldl = &self.l_dag_l[k];
            acc += (l * o * ld) * C64::new(2.0, 0.0) - ldl * o - o * ldl;
        }
        acc * C64::new(0.5 / self.hbar, 0.0)
    }

    /// Noise part −(1/2ħ) Σ_k ([A_k,[A_k,o]] + [B_k,[B_k,o]]).
    pub fn apply_l1(&self, o: &CMat) -> CMat {
        self.assert_dim(o);
        let mut acc = CMat::zeros(self.dim, self.dim);
        for (a, b) in self.split.a_ops.iter().zip(&self.split.b_ops) {
            acc += matrix_kernel::commutator(a, &matrix_kernel::commutator(a, o));
            acc += matrix_kernel::commutator(b, &matrix_kernel::commutator(b, o));
        }
        acc * C64::new(-0.5 / self.hbar, 0.0)
    }

    /// Anticommutator part (1/4ħ) Σ_k {[L_k, L_k†], o}.
    pub fn apply_l2(&self, o: &CMat) -> CMat {
        self.assert_dim(o);
        let mut acc = CMat::zeros(self.dim, self.dim);
        for c in &self.comm_l_ldag {
            acc += matrix_kernel::anticommutator(c, o);
        }
        acc * C64::new(0.25 / self.hbar, 0.0)
    }

    /// Hopping part (1/2ħ) Σ_k (L_k o L_k† − L_k† o L_k).
    pub fn apply_l3(&self, o: &CMat) -> CMat {
        self.assert_dim(o);
        let mut acc = CMat::zeros(self.dim, self.dim);
        for (k, l) in self.lindblads.iter().enumerate() {
            let ld = &self.l_dag[k];
            acc += l * o * ld - ld * o * l;
        }
        acc * C64::new(0.5 / self.hbar, 0.0)
    }

    /// Unitary plus non-unitary generator; the right-hand side of the master equation.
    pub fn apply_total(&self, o: &CMat) -> CMat {
        self.apply_lu(o) + self.apply_lnu(o)
    }

    /// Apply the selected generator in the Schrödinger picture.
    pub fn apply(&self, which: Generator, o: &CMat) -> CMat {
        match which {
            Generator::Unitary => self.apply_lu(o),
            Generator::NonUnitary => self.apply_lnu(o),
            Generator::L1 => self.apply_l1(o),
            Generator::L2 => self.apply_l2(o),
            Generator::L3 => self.apply_l3(o),
            Generator::Total => self.apply_total(o),
        }
    }

    /// Apply the Hilbert-Schmidt adjoint of the selected generator
    /// (⟨L[a], b⟩ = ⟨a, adjoint-L[b]⟩ with ⟨a,b⟩ = Tr(b†a)). The noise and
    /// anticommutator parts are self-adjoint, the hopping part flips sign,
    /// and the unitary generator goes to the Heisenberg form (i/ħ)[H, o].
    pub fn adjoint_apply(&self, which: Generator, o: &CMat) -> CMat {
        self.assert_dim(o);
        match which {
            Generator::Unitary => {
                matrix_kernel::commutator(&self.hamiltonian, o) * C64::new(0.0, 1.0 / self.hbar)
            }
            Generator::NonUnitary => {
                let mut acc = CMat::zeros(self.dim, self.dim);
                for (k, l) in self.lindblads.iter().enumerate() {
                    let ld = &self.l_dag[k];
                    let ldl = &self.l_dag_l[k];
                    acc += (ld * o * l) * C64::new(2.0, 0.0) - ldl * o - o * ldl;
                }
                acc * C64::new(0.5 / self.hbar, 0.0)
            }
            Generator::L1 => self.apply_l1(o),
            Generator::L2 => self.apply_l2(o),
            Generator::L3 => self.apply_l3(o) * C64::new(-1.0, 0.0),
            Generator::Total => {
                self.adjoint_apply(Generator::Unitary, o)
                    + self.adjoint_apply(Generator::NonUnitary, o)
            }
        }
    }

    /// Shift every Lindblad operator by a constant, L_k → L_k + α_k·1, and
    /// absorb the induced drift into the Hamiltonian,
    /// H → H + (1/2i) Σ_k (α_k* L_k − α_k L_k†), so the total generator is
    /// unchanged. The noise and anticommutator parts are individually
    /// invariant; the hopping part picks up the compensating unitary piece.
    pub fn gauge_transform(&self, alphas: &[C64]) -> Result<Self, LindbladError> {
        if alphas.len() != self.lindblads.len() {
            return Err(LindbladError::WrongAlphaCount {
                expected: self.lindblads.len(),
                found: alphas.len(),
            });
        }
        let eye = CMat::identity(self.dim, self.dim);
        let mut shift = CMat::zeros(self.dim, self.dim);
        for (alpha, l) in alphas.iter().zip(&self.lindblads) {
            shift += l * alpha.conj() - l.adjoint() * *alpha;
        }
        // (1/2i)(α*L − αL†) is Hermitian in exact arithmetic; symmetrize roundoff.
        let h_prime = shift * C64::new(0.0, -0.5);
        let h_prime = (&h_prime + h_prime.adjoint()) * C64::new(0.5, 0.0);
        let new_ls = alphas
            .iter()
            .zip(&self.lindblads)
            .map(|(alpha, l)| l + &eye * *alpha)
            .collect();
        Self::new(self.hbar, &self.hamiltonian + h_prime, new_ls)
    }

    /// Matrix of the total generator acting on column-stacked operators
    /// (vec(AXB) = (Bᵀ⊗A) vec(X)). Size d²×d².
    pub fn vectorized_generator(&self) -> CMat {
        let d = self.dim;
        let eye = CMat::identity(d, d);
        let h_t = self.hamiltonian.transpose();
        let mut s = (eye.kronecker(&self.hamiltonian) - h_t.kronecker(&eye))
            * C64::new(0.0, -1.0 / self.hbar);
        let pref = C64::new(0.5 / self.hbar, 0.0);
        for (k, l) in self.lindblads.iter().enumerate() {
            let ldl = &self.l_dag_l[k];
            let l_conj = l.map(|z| z.conj());
            let term = l_conj.kronecker(l) * C64::new(2.0, 0.0)
                - eye.kronecker(ldl)
                - ldl.transpose().kronecker(&eye);
            s += term * pref;
        }
        s
    }

    /// Spectral-norm estimate of the generator. Power iteration on the
    /// vectorized generator up to dim 16; a Frobenius upper bound
    /// 2‖H‖_F/ħ + (2/ħ)Σ‖L_k‖_F² beyond that.
    pub fn generator_norm_estimate(&self) -> f64 {
        if self.dim <= 16 {
            let s = self.vectorized_generator();
            let n = s.nrows();
            let mut x = CVec::from_fn(n, |i, _| {
                C64::new(1.0 + (0.7 * i as f64).sin(), (1.3 * i as f64).cos())
            });
            let xn = x.norm();
            x /= C64::new(xn, 0.0);
            let mut sigma = 0.0;
            for _ in 0..40 {
                let sx = &s * &x;
                sigma = sx.norm();
                let y = s.adjoint() * sx;
                let yn = y.norm();
                if yn < 1e-300 {
                    return 0.0;
                }
                x = y / C64::new(yn, 0.0);
            }
            sigma
        } else {
            let sum_l: f64 = self.lindblads.iter().map(|l| l.norm().powi(2)).sum();
            (2.0 * self.hamiltonian.norm() + 2.0 * sum_l) / self.hbar
        }
    }

    /// Default finite-difference step: 1e-4 in units of one over the
    /// generator norm (balances truncation against roundoff at f64).
    pub fn default_fd_step(&self) -> f64 {
        let scale = self.generator_norm_estimate();
        if scale > 1e-12 {
            1e-4 / scale
        } else {
            1e-4
        }
    }

    /// Evolve a density matrix for time t ≥ 0.
    pub fn evolve(&self, rho0: &CMat, t: f64, method: EvolveMethod) -> Result<CMat, LindbladError> {
        check_density(rho0)?;
        if t < 0.0 {
            return Err(LindbladError::NegativeTime { t });
        }
        self.evolve_signed(rho0, t, method)
    }

    /// Internal evolution that also accepts negative times (used for central
    /// finite differences; the semigroup exponential and RK4 both extend).
    pub(crate) fn evolve_signed(
        &self,
        rho0: &CMat,
        t: f64,
        method: EvolveMethod,
    ) -> Result<CMat, LindbladError> {
        self.assert_dim(rho0);
        if t == 0.0 {
            return Ok(rho0.clone());
        }
        let rho_t = match method {
            EvolveMethod::SuperopExp => {
                let s = self.vectorized_generator();
                let prop = matrix_exp(&(s * C64::new(t, 0.0)));
                let x0 = CVec::from_column_slice(rho0.as_slice());
                let xt = prop * x0;
                CMat::from_column_slice(self.dim, self.dim, xt.as_slice())
            }
            EvolveMethod::Rk4 { step } => {
                if step <= 0.0 || step.is_nan() {
                    return Err(LindbladError::NonPositiveStep { step });
                }
                let mut h = step.min(t.abs());
                let mut current = self.rk4_integrate(rho0, t, h);
                // Richardson control: halve until the RK4 error estimate
                // ‖ρ_h − ρ_{h/2}‖/15 drops below 1e-9.
                for _ in 0..8 {
                    let fine = self.rk4_integrate(rho0, t, h / 2.0);
                    let est = (&fine - &current).norm() / 15.0;
                    current = fine;
                    h /= 2.0;
                    if est <= 1e-9 {
                        break;
                    }
                }
                current
            }
        };
        let drift = (matrix_kernel::trace(&rho_t).re - matrix_kernel::trace(rho0).re).abs();
        if !drift.is_finite() || drift > TRACE_DRIFT_LIMIT {
            return Err(LindbladError::StepDiverged { trace_drift: drift });
        }
        // Exact evolution preserves Hermiticity; strip roundoff.
        Ok((&rho_t + rho_t.adjoint()) * C64::new(0.5, 0.0))
    }

    fn rk4_integrate(&self, rho0: &CMat, t: f64, step: f64) -> CMat {
        let n = ((t.abs() / step).ceil() as usize).max(1);
        let h = C64::new(t / n as f64, 0.0);
        let half = C64::new(0.5, 0.0);
        let two = C64::new(2.0, 0.0);
        let sixth = C64::new(1.0 / 6.0, 0.0);
        let mut rho = rho0.clone();
        for _ in 0..n {
            let k1 = self.apply_total(&rho);
            let k2 = self.apply_total(&(&rho + &k1 * (h * half)));
            let k3 = self.apply_total(&(&rho + &k2 * (h * half)));
            let k4 = self.apply_total(&(&rho + &k3 * h));
            rho += (k1 + k2 * two + k3 * two + k4) * (h * sixth);
        }
        rho
    }

    /// Stationary state from the null space of the vectorized generator.
    /// Errors if the null space is empty, has dimension > 1, or carries no
    /// trace; the unique direction is Hermitized and normalized to trace 1.
    pub fn stationary_state(&self) -> Result<CMat, LindbladError> {
        let s = self.vectorized_generator();
        let svd = s.svd(false, true);
        let sigma = &svd.singular_values;
        let smax = sigma.iter().cloned().fold(0.0_f64, f64::max);
        let tol = (1e-10 * smax).max(1e-14);
        let null_idx: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] <= tol).collect();
        if null_idx.is_empty() {
            let smin = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
            return Err(LindbladError::NoStationaryState { sigma_min: smin });
        }
        if null_idx.len() > 1 {
            return Err(LindbladError::AmbiguousStationaryState {
                null_dim: null_idx.len(),
            });
        }
        let v_t = svd.v_t.expect("right singular vectors requested");
        let x = v_t.row(null_idx[0]).adjoint();
        let cand = CMat::from_column_slice(self.dim, self.dim, x.as_slice());
        let tr = matrix_kernel::trace(&cand);
        if tr.norm() < 1e-10 {
            return Err(LindbladError::TracelessStationaryDirection);
        }
        let rho = cand * (C64::new(1.0, 0.0) / tr);
        Ok((&rho + rho.adjoint()) * C64::new(0.5, 0.0))
    }

    fn require_full_rank(&self, rho: &CMat) -> Result<(RVec, CMat), LindbladError> {
        check_density(rho)?;
        let (vals, vecs) = herm_eig(rho)?;
        if vals[0] <= FULL_RANK_EIG_MIN {
            return Err(LindbladError::SingularState {
                min_eigenvalue: vals[0],
            });
        }
        Ok((vals, vecs))
    }

    pub(crate) fn delta_psi(&self, rho: &CMat, ln_rho: &CMat) -> (f64, f64) {
        let l1 = self.apply_l1(ln_rho);
        let l23 = self.apply_l2(ln_rho) - self.apply_l3(ln_rho);
        let delta = -matrix_kernel::trace(&(rho * l1)).re;
        let psi = matrix_kernel::trace(&(rho * l23)).re;
        (delta, psi)
    }

    /// Evaluate the entropy split at the given state: S, Δ (noise), Ψ
    /// (dissipation), and a central-finite-difference check of dS/dt.
    /// The state must be full rank.
    pub fn entropy_rate_report(
        &self,
        rho: &CMat,
        fd_step: f64,
    ) -> Result<EntropyRateReport, LindbladError> {
        assert!(fd_step > 0.0, "fd_step must be positive");
        let (vals, _) = self.require_full_rank(rho)?;
        let entropy = entropy_from_eigenvalues(&vals);
        let ln_rho = matrix_log_psd(rho, LOG_EIG_FLOOR)?;
        let (delta, psi) = self.delta_psi(rho, &ln_rho);
        let method = EvolveMethod::auto(self.dim, fd_step);
        let s_plus = von_neumann_entropy(&self.evolve_signed(rho, fd_step, method)?)?;
        let s_minus = von_neumann_entropy(&self.evolve_signed(rho, -fd_step, method)?)?;
        let rate_fd = (s_plus - s_minus) / (2.0 * fd_step);
        // Central-difference truncation is O(h²·S'''). S''' carries the
        // generator norm cubed against three kinds of state factors: ln λ
        // from Tr(L³[ρ] ln ρ), and first/second divided differences of ln
        // from differentiating ln ρ along the flow, bounded by 1/λ_min and
        // 1/λ_min² for the smallest eigenvalue λ_min.
        let lam_min = vals[0];
        let scale = self.generator_norm_estimate().powi(3)
            * (1.0 + lam_min.ln().abs() + 1.0 / (lam_min * lam_min));
        let rate_tol = (10.0 * fd_step.powi(2) * scale).max(1e-6);
        Ok(EntropyRateReport {
            t: 0.0,
            entropy,
            delta,
            psi,
            rate_fd,
            rate_tol,
            spohn_pi: None,
            flux_phi_dot: None,
        })
    }

    /// Entropy production Π = −d/dt S[ρ_t‖ρ_s] (central finite difference
    /// along the evolution) and the flux Π − (Δ − Ψ). `rho_stationary` must
    /// actually be stationary and full rank.
    pub fn spohn_production(
        &self,
        rho: &CMat,
        rho_stationary: &CMat,
        fd_step: f64,
    ) -> Result<(f64, f64), LindbladError> {
        assert!(fd_step > 0.0, "fd_step must be positive");
        self.require_full_rank(rho)?;
        self.require_full_rank(rho_stationary)?;
        let residual = self.apply_total(rho_stationary).norm();
        if residual > STATIONARY_RESIDUAL_TOL {
            return Err(LindbladError::NotStationary {
                residual,
                limit: STATIONARY_RESIDUAL_TOL,
            });
        }
        let method = EvolveMethod::auto(self.dim, fd_step);
        let r_plus = relative_entropy(&self.evolve_signed(rho, fd_step, method)?, rho_stationary)?;
        let r_minus =
            relative_entropy(&self.evolve_signed(rho, -fd_step, method)?, rho_stationary)?;
        let pi = -(r_plus - r_minus) / (2.0 * fd_step);
        let ln_rho = matrix_log_psd(rho, LOG_EIG_FLOOR)?;
        let (delta, psi) = self.delta_psi(rho, &ln_rho);
        Ok((pi, pi - (delta - psi)))
    }
}

/// Von Neumann entropy S[ρ] = −Tr(ρ ln ρ) in nats, with 0·ln 0 = 0.
pub fn von_neumann_entropy(rho: &CMat) -> Result<f64, LindbladError> {
    check_hermitian(rho, HERMITICITY_TOL)?;
    let (vals, _) = herm_eig(rho)?;
    if vals[0] < -crate::matrix_kernel::PSD_EIG_TOL {
        return Err(KernelError::NotPositiveSemidefinite {
            min_eigenvalue: vals[0],
            tol: crate::matrix_kernel::PSD_EIG_TOL,
        }
        .into());
    }
    Ok(entropy_from_eigenvalues(&vals))
}

fn entropy_from_eigenvalues(vals: &RVec) -> f64 {
    vals.iter()
        .filter(|&&v| v > LOG_EIG_FLOOR)
        .map(|&v| -v * v.ln())
        .sum()
}

// Fast relative-entropy path for the production-rate derivative. σ is the
// stationary state and must be full rank; the support-aware variant lives in
// the dqfi module.
fn relative_entropy(rho: &CMat, sigma: &CMat) -> Result<f64, LindbladError> {
    check_hermitian(rho, HERMITICITY_TOL)?;
    let (svals, _) = herm_eig(sigma)?;
    if svals[0] <= FULL_RANK_EIG_MIN {
        return Err(LindbladError::SingularState {
            min_eigenvalue: svals[0],
        });
    }
    let ln_rho = matrix_log_psd(rho, LOG_EIG_FLOOR)?;
    let ln_sigma = matrix_log_psd(sigma, LOG_EIG_FLOOR)?;
    Ok(matrix_kernel::trace(&(rho * (ln_rho - ln_sigma))).re)
}

/// Blend a state toward the maximally mixed one: (1−ε)ρ + ε·I/d. Used to
/// regularize pure or near-pure seeds before entropy-rate evaluation.
pub fn mix_with_identity(rho: &CMat, eps: f64) -> CMat {
    let d = rho.nrows();
    rho * C64::new(1.0 - eps, 0.0) + CMat::identity(d, d) * C64::new(eps / d as f64, 0.0)
}
