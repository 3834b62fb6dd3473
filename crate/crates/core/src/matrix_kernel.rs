//! Dense complex linear-algebra primitives shared by all other modules:
//! Hermitian eigendecomposition, matrix functions, commutators, the
//! Hilbert-Schmidt inner product, and Kronecker-vectorized Lyapunov solves.
//!
//! Everything here is a pure function on immutable values; dimensions stay
//! small (a few tens), so dense algorithms are used throughout.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// Per-entry tolerance for accepting a matrix as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues above this bound count as nonnegative for PSD checks.
pub const PSD_EIG_TOL: f64 = 1e-10;
/// Default eigenvalue floor inside `matrix_log_psd`. Directions floored here
/// carry weight ~0 in the state, so entropy-like traces stay finite (the
/// 0·ln 0 = 0 convention).
pub const LOG_EIG_FLOOR: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    ShapeMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error(
        "matrix is not Hermitian: entries ({row},{col})/({col},{row}) differ by {deviation:.3e}"
    )]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },
    #[error("matrix is not symmetric: entries ({row},{col})/({col},{row}) differ by {deviation:.3e}")]
    NotSymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },
    #[error("matrix is not positive semidefinite: eigenvalue {min_eigenvalue:.3e} below -{tol:.0e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64, tol: f64 },
    #[error("trace is {trace:.15e}, expected 1 within {tol:.0e}")]
    NotUnitTrace { trace: f64, tol: f64 },
    #[error("drift matrix is not asymptotically stable: eigenvalue real part {max_real_part:.3e}")]
    NotStable { max_real_part: f64 },
    #[error("Kronecker-vectorized system is singular")]
    SingularSystem,
    #[error("eigenvalue iteration failed to converge")]
    EigenConvergence,
}

/// Check Hermiticity entrywise; on failure names the worst offending pair.
pub fn check_hermitian(m: &CMat, tol: f64) -> Result<(), KernelError> {
    if m.nrows() != m.ncols() {
        return Err(KernelError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let mut worst = 0.0_f64;
    let mut at = (0usize, 0usize);
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let dev = (m[(i, j)] - m[(j, i)].conj()).norm();
            if dev > worst {
                worst = dev;
                at = (i, j);
            }
        }
    }
    if worst > tol {
        return Err(KernelError::NotHermitian {
            row: at.0,
            col: at.1,
            deviation: worst,
        });
    }
    Ok(())
}

/// Validate a density matrix: Hermitian, spectrum ≥ -1e-10, unit trace within 1e-10.
pub fn check_density(m: &CMat) -> Result<(), KernelError> {
    check_hermitian(m, HERMITICITY_TOL)?;
    let (vals, _) = herm_eig(m)?;
    let min = vals[0];
    if min < -PSD_EIG_TOL {
        return Err(KernelError::NotPositiveSemidefinite {
            min_eigenvalue: min,
            tol: PSD_EIG_TOL,
        });
    }
    let tr = trace(m);
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(KernelError::NotUnitTrace {
            trace: tr.re,
            tol: 1e-10,
        });
    }
    Ok(())
}

/// Hermitian eigendecomposition, eigenvalues ascending.
///
/// Returns (λ, U) with m = U diag(λ) U† and U unitary; reconstruction error
/// is bounded by 1e-10·dim in Frobenius norm for well-formed input.
pub fn herm_eig(m: &CMat) -> Result<(RVec, CMat), KernelError> {
    check_hermitian(m, HERMITICITY_TOL)?;
    // Symmetrize before factoring so roundoff in the input cannot leak
    // non-Hermitian parts into the iteration.
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(h, 1e-14, 0).ok_or(KernelError::EigenConvergence)?;
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = RVec::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((vals, vecs))
}

/// Matrix logarithm of a positive semidefinite (density) matrix.
///
/// Eigenvalues are clamped from below at `floor` before taking logs, so
/// rank-deficient states yield a finite Hermitian result; for full-rank input
/// the floor is inert. Spectrum below -1e-10 is rejected.
pub fn matrix_log_psd(m: &CMat, floor: f64) -> Result<CMat, KernelError> {
    assert!(floor > 0.0, "eigenvalue floor must be positive");
    let (vals, vecs) = herm_eig(m)?;
    if vals[0] < -PSD_EIG_TOL {
        return Err(KernelError::NotPositiveSemidefinite {
            min_eigenvalue: vals[0],
            tol: PSD_EIG_TOL,
        });
    }
    let log_diag = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&v| C64::new(v.max(floor).ln(), 0.0)),
    ));
    let out = &vecs * log_diag * vecs.adjoint();
    // The exact result is Hermitian; strip roundoff asymmetry.
    Ok((&out + out.adjoint()) * C64::new(0.5, 0.0))
}

/// Matrix exponential by Padé approximation with scaling and squaring.
pub fn matrix_exp(m: &CMat) -> CMat {
    assert_eq!(m.nrows(), m.ncols(), "matrix_exp requires a square matrix");
    m.clone().exp()
}

/// Commutator ab - ba.
pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    assert_conformable(a, b);
    a * b - b * a
}

/// Anticommutator ab + ba.
pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    assert_conformable(a, b);
    a * b + b * a
}

fn assert_conformable(a: &CMat, b: &CMat) {
    assert!(
        a.nrows() == a.ncols() && b.nrows() == b.ncols() && a.nrows() == b.nrows(),
        "operands must be square and of equal dimension ({}x{} vs {}x{})",
        a.nrows(),
        a.ncols(),
        b.nrows(),
        b.ncols()
    );
}

/// Hilbert-Schmidt inner product ⟨a,b⟩ = Tr(b†a).
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    assert!(
        a.nrows() == b.nrows() && a.ncols() == b.ncols(),
        "hs_inner requires equal shapes ({}x{} vs {}x{})",
        a.nrows(),
        a.ncols(),
        b.nrows(),
        b.ncols()
    );
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        acc += y.conj() * x;
    }
    acc
}

/// Matrix trace.
pub fn trace(m: &CMat) -> C64 {
    m.diagonal().sum()
}

/// Solve the continuous-time Lyapunov equation aV + Va^T + q = 0 for
/// symmetric V via the Kronecker-vectorized linear system.
///
/// `a` must be asymptotically stable (all eigenvalue real parts < 0) and `q`
/// symmetric; the residual satisfies ‖aV + Va^T + q‖_F ≤ 1e-10·‖q‖_F.
pub fn solve_sylvester_lyapunov(a: &RMat, q: &RMat) -> Result<RMat, KernelError> {
    if a.nrows() != a.ncols() {
        return Err(KernelError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if q.nrows() != a.nrows() || q.ncols() != a.ncols() {
        return Err(KernelError::ShapeMismatch {
            left_rows: a.nrows(),
            left_cols: a.ncols(),
            right_rows: q.nrows(),
            right_cols: q.ncols(),
        });
    }
    check_symmetric(q, 1e-10 * (1.0 + q.amax()))?;
    let max_re = max_real_eigenvalue(a)?;
    if max_re >= -1e-12 {
        return Err(KernelError::NotStable {
            max_real_part: max_re,
        });
    }
    let n = a.nrows();
    // Column-stacking vec: vec(aV) = (I ⊗ a) vec(V), vec(V a^T) = (a ⊗ I) vec(V).
    let eye = RMat::identity(n, n);
    let k = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = RVec::from_column_slice(q.as_slice()) * -1.0;
    let sol = k.lu().solve(&rhs).ok_or(KernelError::SingularSystem)?;
    let v = RMat::from_column_slice(n, n, sol.as_slice());
    // The exact solution is symmetric; strip roundoff asymmetry.
    Ok((&v + v.transpose()) * 0.5)
}

/// Largest real part among the eigenvalues of a real square matrix.
pub fn max_real_eigenvalue(a: &RMat) -> Result<f64, KernelError> {
    let eigs = a
        .clone()
        .try_schur(1e-12, 0)
        .ok_or(KernelError::EigenConvergence)?
        .complex_eigenvalues();
    Ok(eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

pub fn check_symmetric(m: &RMat, tol: f64) -> Result<(), KernelError> {
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let dev = (m[(i, j)] - m[(j, i)]).abs();
            if dev > tol {
                return Err(KernelError::NotSymmetric {
                    row: i,
                    col: j,
                    deviation: dev,
                });
            }
        }
    }
    Ok(())
}

/// Promote a real matrix to a complex one.
pub fn complexify(m: &RMat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)], 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> CMat {
        CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        )
    }

    fn pauli_y() -> CMat {
        CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            ],
        )
    }

    fn pauli_z() -> CMat {
        CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(-1.0, 0.0),
            ],
        )
    }

    #[test]
    fn herm_eig_identity() {
        let (vals, vecs) = herm_eig(&CMat::identity(2, 2)).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let gram = vecs.adjoint() * &vecs;
        assert!((gram - CMat::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn herm_eig_diagonal_sorted() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(3.0, 0.0), C64::new(-1.0, 0.0)]));
        let (vals, _) = herm_eig(&m).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn herm_eig_pauli_x() {
        let (vals, vecs) = herm_eig(&pauli_x()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
        let recon = &vecs * CMat::from_diagonal(&CVec::from_vec(vec![
            C64::new(vals[0], 0.0),
            C64::new(vals[1], 0.0),
        ])) * vecs.adjoint();
        assert!((recon - pauli_x()).norm() <= 1e-10 * 2.0);
        // Eigenvectors of σ_x are (1, ∓1)/√2 up to phase: check componentwise ratio.
        let minus = vecs.column(0);
        assert!((minus[0] + minus[1]).norm() < 1e-12);
        let plus = vecs.column(1);
        assert!((plus[0] - plus[1]).norm() < 1e-12);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let mut m = pauli_x();
        m[(0, 1)] = C64::new(2.0, 0.0);
        match herm_eig(&m) {
            Err(KernelError::NotHermitian { row, col, .. }) => assert_eq!((row, col), (0, 1)),
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn log_psd_maximally_mixed() {
        let rho = CMat::identity(2, 2) * C64::new(0.5, 0.0);
        let log = matrix_log_psd(&rho, LOG_EIG_FLOOR).unwrap();
        let expect = CMat::identity(2, 2) * C64::new(-(2.0_f64.ln()), 0.0);
        assert!((log - expect).norm() < 1e-12);
    }

    #[test]
    fn log_psd_diagonal() {
        let rho = CMat::from_diagonal(&CVec::from_vec(vec![
            C64::new(0.75, 0.0),
            C64::new(0.25, 0.0),
        ]));
        let log = matrix_log_psd(&rho, LOG_EIG_FLOOR).unwrap();
        assert!((log[(0, 0)].re - 0.75_f64.ln()).abs() < 1e-14);
        assert!((log[(1, 1)].re - 0.25_f64.ln()).abs() < 1e-14);
        assert!(log[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn log_psd_offdiagonal_roundtrip() {
        // (I + σ_x/2)/2 has spectrum {3/4, 1/4} in the ±x basis.
        let rho = (CMat::identity(2, 2) + pauli_x() * C64::new(0.5, 0.0)) * C64::new(0.5, 0.0);
        let log = matrix_log_psd(&rho, LOG_EIG_FLOOR).unwrap();
        let (vals, _) = herm_eig(&log).unwrap();
        assert!((vals[0] - 0.25_f64.ln()).abs() < 1e-12);
        assert!((vals[1] - 0.75_f64.ln()).abs() < 1e-12);
        let back = matrix_exp(&log);
        assert!((back - rho).norm() < 1e-9);
    }

    #[test]
    fn log_psd_rejects_negative_spectrum() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![
            C64::new(1.5, 0.0),
            C64::new(-0.5, 0.0),
        ]));
        assert!(matches!(
            matrix_log_psd(&m, LOG_EIG_FLOOR),
            Err(KernelError::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn exp_zero_and_diagonal() {
        assert!((matrix_exp(&CMat::zeros(3, 3)) - CMat::identity(3, 3)).norm() < 1e-14);
        let d = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)]));
        let e = matrix_exp(&d);
        assert!((e[(0, 0)].re - 1.0_f64.exp()).abs() < 1e-12);
        assert!((e[(1, 1)].re - 2.0_f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn exp_rotation_identity() {
        // exp(iπσ_x) = -I.
        let m = pauli_x() * C64::new(0.0, std::f64::consts::PI);
        let e = matrix_exp(&m);
        assert!((e + CMat::identity(2, 2)).norm() < 1e-10);
    }

    #[test]
    fn exp_inverse_check() {
        let m = pauli_y() * C64::new(0.3, 0.1) + pauli_z() * C64::new(-0.2, 0.4);
        let prod = matrix_exp(&m) * matrix_exp(&(-&m));
        assert!((prod - CMat::identity(2, 2)).norm() < 1e-10);
    }

    #[test]
    fn pauli_commutators() {
        let c = commutator(&pauli_x(), &pauli_y());
        let expect = pauli_z() * C64::new(0.0, 2.0);
        assert!((c - expect).norm() < 1e-14);
        let m = pauli_y() * C64::new(1.7, -0.3);
        assert_eq!(commutator(&m, &m).norm(), 0.0);
        let ac = anticommutator(&pauli_z(), &pauli_z());
        assert!((ac - CMat::identity(2, 2) * C64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn hs_inner_values() {
        let d = 3;
        let id = CMat::identity(d, d);
        assert!((hs_inner(&id, &id) - C64::new(d as f64, 0.0)).norm() < 1e-14);
        assert!(hs_inner(&pauli_x(), &pauli_y()).norm() < 1e-14);
        assert!((hs_inner(&pauli_x(), &pauli_x()) - C64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn lyapunov_scalar_balance() {
        let a = RMat::identity(2, 2) * -1.0;
        let q = RMat::identity(2, 2);
        let v = solve_sylvester_lyapunov(&a, &q).unwrap();
        assert!((v - RMat::identity(2, 2) * 0.5).norm() < 1e-12);
    }

    #[test]
    fn lyapunov_componentwise() {
        let a = RMat::from_diagonal(&RVec::from_vec(vec![-1.0, -2.0]));
        let q = RMat::from_diagonal(&RVec::from_vec(vec![2.0, 4.0]));
        let v = solve_sylvester_lyapunov(&a, &q).unwrap();
        assert!((v - RMat::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn lyapunov_rotation_drops() {
        // a = -I + J with J antisymmetric: JV + VJ^T cancels for V ∝ I.
        let a = RMat::from_row_slice(2, 2, &[-1.0, 1.0, -1.0, -1.0]);
        let q = RMat::identity(2, 2);
        let v = solve_sylvester_lyapunov(&a, &q).unwrap();
        assert!((v - RMat::identity(2, 2) * 0.5).norm() < 1e-12);
    }

    #[test]
    fn lyapunov_rejects_unstable() {
        let a = RMat::from_diagonal(&RVec::from_vec(vec![0.5, -1.0]));
        assert!(matches!(
            solve_sylvester_lyapunov(&a, &RMat::identity(2, 2)),
            Err(KernelError::NotStable { .. })
        ));
    }
}
