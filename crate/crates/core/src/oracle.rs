//! Ground-truth stabilizer dimensions from the tangent space at the
//! identity, and membership verification for sampled stabilizer elements.
//!
//! For the similarity action the tangent space is
//! `{K : K^T = -K, KS - SK = 0}` (complex nullity); for *-conjugation it is
//! `{K : K^T = -K, K^* H + H K = 0}` (real nullity). Both are measured as
//! nullities of realified linear systems through the shared rank kernel.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::rank_nullity_real;
use crate::mat::{c, Mat};
use crate::solution_space::Field;
use crate::tol::TolPolicy;

/// Tangent-space dimension measurement.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub nullity: usize,
    pub field: Field,
    pub gap_ratio: f64,
    pub cutoff: f64,
}

/// Complex antisymmetric basis directions (unit entries, then i-entries).
fn antisym_directions(n: usize) -> Vec<Mat> {
    let mut dirs = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in i + 1..n {
            for phase in [c(1.0, 0.0), c(0.0, 1.0)] {
                let mut m = Mat::zeros(n, n);
                m[(i, j)] = phase;
                m[(j, i)] = -phase;
                dirs.push(m);
            }
        }
    }
    dirs
}

/// Assembles the realified system matrix of a real-linear map evaluated on
/// the given directions.
fn system_matrix(dirs: &[Mat], apply: impl Fn(&Mat) -> Mat) -> DMatrix<f64> {
    if dirs.is_empty() {
        return DMatrix::zeros(0, 0);
    }
    let first = apply(&dirs[0]);
    let rows = 2 * first.rows() * first.cols();
    let mut m = DMatrix::zeros(rows, dirs.len());
    for (k, d) in dirs.iter().enumerate() {
        let out = if k == 0 { first.clone() } else { apply(d) };
        for (r, v) in out.to_real_vec().into_iter().enumerate() {
            m[(r, k)] = v;
        }
    }
    m
}

/// Complex dimension of `{K : K^T = -K, KS = SK}` for symmetric `S`.
pub fn oracle_dim_sym(s: &Mat, policy: &TolPolicy) -> Result<OracleResult> {
    s.check_finite()?;
    if !s.is_square() {
        return Err(Error::DimensionMismatch("oracle needs a square matrix".into()));
    }
    let scale = s.norm().max(1.0);
    if s.symmetry_error() > 1e-8 * scale {
        return Err(Error::NotSymmetric(s.symmetry_error() / scale));
    }
    let n = s.rows();
    if n < 2 {
        return Ok(OracleResult { nullity: 0, field: Field::Complex, gap_ratio: f64::INFINITY, cutoff: 0.0 });
    }
    let dirs = antisym_directions(n);
    let sys = system_matrix(&dirs, |k| &(k * s) - &(s * k));
    let rep = rank_nullity_real(&sys, policy)?;
    if rep.nullity % 2 != 0 {
        return Err(Error::RankAmbiguous { gap: rep.gap_ratio, required: policy.min_gap_ratio });
    }
    Ok(OracleResult {
        nullity: rep.nullity / 2,
        field: Field::Complex,
        gap_ratio: rep.gap_ratio,
        cutoff: rep.cutoff,
    })
}

/// Real dimension of `{K : K^T = -K, K^* H + H K = 0}` for Hermitian `H`.
pub fn oracle_dim_herm(h: &Mat, policy: &TolPolicy) -> Result<OracleResult> {
    h.check_finite()?;
    if !h.is_square() {
        return Err(Error::DimensionMismatch("oracle needs a square matrix".into()));
    }
    let scale = h.norm().max(1.0);
    if h.hermitian_error() > 1e-8 * scale {
        return Err(Error::NotHermitian(h.hermitian_error() / scale));
    }
    let n = h.rows();
    if n < 2 {
        return Ok(OracleResult { nullity: 0, field: Field::Real, gap_ratio: f64::INFINITY, cutoff: 0.0 });
    }
    let dirs = antisym_directions(n);
    let sys = system_matrix(&dirs, |k| &(&k.adjoint() * h) + &(h * k));
    let rep = rank_nullity_real(&sys, policy)?;
    Ok(OracleResult {
        nullity: rep.nullity,
        field: Field::Real,
        gap_ratio: rep.gap_ratio,
        cutoff: rep.cutoff,
    })
}

/// Full matrix-unit directions (unit entries, then i-entries).
fn full_directions(rows: usize, cols: usize) -> Vec<Mat> {
    let mut dirs = Vec::with_capacity(2 * rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            for phase in [c(1.0, 0.0), c(0.0, 1.0)] {
                let mut m = Mat::zeros(rows, cols);
                m[(i, j)] = phase;
                dirs.push(m);
            }
        }
    }
    dirs
}

/// Complex dimension of `{X : A X = X B}` from the vectorized system.
pub fn commutation_solution_dim(a: &Mat, b: &Mat, policy: &TolPolicy) -> Result<usize> {
    let dirs = full_directions(a.rows(), b.rows());
    let sys = system_matrix(&dirs, |x| &(a * x) - &(x * b));
    let rep = rank_nullity_real(&sys, policy)?;
    if rep.nullity % 2 != 0 {
        return Err(Error::RankAmbiguous { gap: rep.gap_ratio, required: policy.min_gap_ratio });
    }
    Ok(rep.nullity / 2)
}

/// Real dimension of `{X : A conj(X) = X B}` from the vectorized
/// real-linear system.
pub fn consim_solution_dim(a: &Mat, b: &Mat, policy: &TolPolicy) -> Result<usize> {
    let dirs = full_directions(a.rows(), b.rows());
    let sys = system_matrix(&dirs, |x| &(a * &x.conj()) - &(x * b));
    Ok(rank_nullity_real(&sys, policy)?.nullity)
}

/// Which action a stabilizer element is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Sym,
    Herm,
}

/// Residuals of a candidate stabilizer element.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub orthogonality_residual: f64,
    pub action_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Reports `||Q^T Q - I||` and `||Q^{-1} M Q - M||` (sym) or
/// `||Q^* M Q - M||` (herm); passes iff both are at most `tol`.
pub fn verify_stab_element(q: &Mat, m: &Mat, action: Action, tol: f64) -> Result<VerifyReport> {
    q.check_finite()?;
    m.check_finite()?;
    if !q.is_square() || !m.is_square() || q.rows() != m.rows() {
        return Err(Error::DimensionMismatch("verify needs matching square matrices".into()));
    }
    let id = Mat::identity(q.rows());
    let orth = (&(&q.transpose() * q) - &id).norm();
    let act = match action {
        Action::Sym => {
            let qinv = q.inverse()?;
            (&(&(&qinv * m) * q) - m).norm()
        }
        Action::Herm => (&(&(&q.adjoint() * m) * q) - m).norm(),
    };
    Ok(VerifyReport {
        orthogonality_residual: orth,
        action_residual: act,
        tol,
        pass: orth <= tol && act <= tol,
    })
}
