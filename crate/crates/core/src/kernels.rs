//! Numerical kernels: rank/nullity with an explicit ambiguity guard, inertia,
//! and the Takagi-type factorization `B = C^T C` of a nonsingular complex
//! symmetric matrix.
//!
//! Rank decisions are made on singular values of realified operators, so the
//! complex and real-linear cases share one code path and one tolerance policy.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mat::{c, Mat};
use crate::tol::TolPolicy;

/// Outcome of a rank decision.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub nullity: usize,
    /// `sigma_rank / sigma_{rank+1}` across the cutoff; infinite when clean.
    pub gap_ratio: f64,
    pub cutoff: f64,
}

fn singular_values_desc(m: &DMatrix<f64>) -> Vec<f64> {
    let svd = nalgebra::linalg::SVD::new(m.clone(), false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Rank and nullity of a real matrix under the given policy.
pub fn rank_nullity_real(m: &DMatrix<f64>, policy: &TolPolicy) -> Result<RankReport> {
    rank_nullity_real_scaled(m, policy, None)
}

/// Like [`rank_nullity_real`] but with an explicit scale reference for the
/// cutoff (needed when the matrix itself may be numerically zero, e.g.
/// powers of nilpotent operators).
pub fn rank_nullity_real_scaled(
    m: &DMatrix<f64>,
    policy: &TolPolicy,
    sigma_ref: Option<f64>,
) -> Result<RankReport> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(RankReport { rank: 0, nullity: m.ncols(), gap_ratio: f64::INFINITY, cutoff: 0.0 });
    }
    let sv = singular_values_desc(m);
    let sigma_max = sigma_ref.unwrap_or(sv[0]);
    let cutoff = policy.rank_cutoff(m.nrows(), m.ncols(), sigma_max);
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    let gap_ratio = if rank == 0 || rank == sv.len() {
        f64::INFINITY
    } else if sv[rank] == 0.0 {
        f64::INFINITY
    } else {
        sv[rank - 1] / sv[rank]
    };
    if gap_ratio < policy.min_gap_ratio {
        return Err(Error::RankAmbiguous { gap: gap_ratio, required: policy.min_gap_ratio });
    }
    Ok(RankReport { rank, nullity: m.ncols() - rank, gap_ratio, cutoff })
}

/// Complex rank and nullity of `m`, computed on the realified operator
/// (real rank is exactly twice the complex rank).
pub fn rank_nullity(m: &Mat, policy: &TolPolicy) -> Result<RankReport> {
    m.check_finite()?;
    let rep = rank_nullity_real(&m.realify(), policy)?;
    debug_assert!(rep.rank % 2 == 0, "realified rank must be even");
    Ok(RankReport {
        rank: rep.rank / 2,
        nullity: m.cols() - rep.rank / 2,
        gap_ratio: rep.gap_ratio,
        cutoff: rep.cutoff,
    })
}

/// Orthonormal basis of the kernel of a real matrix, from the SVD right
/// vectors past the rank cutoff.
pub fn nullspace_real(m: &DMatrix<f64>, policy: &TolPolicy) -> Result<Vec<nalgebra::DVector<f64>>> {
    let rep = rank_nullity_real(m, policy)?;
    if rep.nullity == 0 {
        return Ok(vec![]);
    }
    let svd = nalgebra::linalg::SVD::new(m.clone(), false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let mut basis: Vec<nalgebra::DVector<f64>> = order
        .into_iter()
        .skip(rep.rank)
        .map(|k| vt.row(k).transpose())
        .collect();
    // rows of V^T past min(r,c) do not exist; pad from the complement when
    // cols exceed rows
    if basis.len() < rep.nullity {
        // extend with vectors orthogonal to the row space and to the basis so far
        let mut have: Vec<nalgebra::DVector<f64>> = Vec::new();
        for i in 0..vt.nrows() {
            have.push(vt.row(i).transpose());
        }
        have.extend(basis.iter().cloned());
        for j in 0..m.ncols() {
            if basis.len() == rep.nullity {
                break;
            }
            let mut v = nalgebra::DVector::zeros(m.ncols());
            v[j] = 1.0;
            for h in &have {
                let d = h.dot(&v);
                v -= h * d;
            }
            if v.norm() > 1e-8 {
                v /= v.norm();
                have.push(v.clone());
                basis.push(v);
            }
        }
    }
    Ok(basis)
}

/// Signature of a Hermitian matrix: eigenvalue counts above, below and
/// within the rank cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Inertia {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

impl Inertia {
    pub fn order(&self) -> usize {
        self.n_plus + self.n_minus + self.n_zero
    }
}

const HERMITIAN_REL_TOL: f64 = 1e-8;

/// Inertia of a Hermitian matrix via the realified symmetric eigenproblem.
pub fn inertia_of(h: &Mat, policy: &TolPolicy) -> Result<Inertia> {
    h.check_finite()?;
    if !h.is_square() {
        return Err(Error::DimensionMismatch("inertia_of needs a square matrix".into()));
    }
    let scale = h.norm().max(1.0);
    let herm_err = h.hermitian_error();
    if herm_err > HERMITIAN_REL_TOL * scale {
        return Err(Error::NotHermitian(herm_err / scale));
    }
    // For Hermitian h the realification is real symmetric with each
    // eigenvalue doubled.
    let eig = nalgebra::linalg::SymmetricEigen::new(h.realify());
    let lam_max = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let cutoff = policy.rank_cutoff(2 * h.rows(), 2 * h.cols(), lam_max);
    let (mut p, mut m, mut z) = (0usize, 0usize, 0usize);
    for &l in eig.eigenvalues.iter() {
        if l > cutoff {
            p += 1;
        } else if l < -cutoff {
            m += 1;
        } else {
            z += 1;
        }
    }
    if p % 2 != 0 || m % 2 != 0 || z % 2 != 0 {
        return Err(Error::RankAmbiguous { gap: 1.0, required: policy.min_gap_ratio });
    }
    Ok(Inertia { n_plus: p / 2, n_minus: m / 2, n_zero: z / 2 })
}

const SYMMETRY_REL_TOL: f64 = 1e-9;

/// Any nonsingular `C` with `C^T C = B` for symmetric nonsingular `B`.
///
/// The antilinear map `x -> B conj(x)` realifies to a real symmetric matrix
/// whose positive-eigenvalue eigenvectors give a unitary `U` with
/// `B = U diag(sigma) U^T`; then `C = diag(sqrt(sigma)) U^T`.
pub fn takagi_factor(b: &Mat, policy: &TolPolicy) -> Result<Mat> {
    b.check_finite()?;
    if !b.is_square() {
        return Err(Error::DimensionMismatch("takagi_factor needs a square matrix".into()));
    }
    let scale = b.norm().max(f64::MIN_POSITIVE);
    let sym_err = b.symmetry_error();
    if sym_err > SYMMETRY_REL_TOL * (1.0 + scale) {
        return Err(Error::NotSymmetric(sym_err / scale));
    }
    let n = b.rows();
    let eig = nalgebra::linalg::SymmetricEigen::new(b.realify_antilinear());
    let sigma_max = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let cutoff = policy.rank_cutoff(2 * n, 2 * n, sigma_max).max(f64::MIN_POSITIVE);
    let mut pos: Vec<usize> = (0..2 * n).filter(|&k| eig.eigenvalues[k] > cutoff).collect();
    if pos.len() != n {
        let sigma_min = eig.eigenvalues.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        return Err(Error::SingularInput { sigma_min, tol: cutoff });
    }
    pos.sort_by(|&a, &b2| eig.eigenvalues[b2].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut u = Mat::zeros(n, n);
    let mut root = Mat::zeros(n, n);
    for (col, &k) in pos.iter().enumerate() {
        for i in 0..n {
            u[(i, col)] = c(eig.eigenvectors[(i, k)], eig.eigenvectors[(n + i, k)]);
        }
        root[(col, col)] = c(eig.eigenvalues[k].sqrt(), 0.0);
    }
    let ct = &root * &u.transpose();
    let resid = (&(&ct.transpose() * &ct) - b).norm();
    if resid > 1e-10 * scale {
        return Err(Error::InternalCheck(format!(
            "takagi reconstruction residual {resid:.3e} exceeds 1e-10 * ||B||"
        )));
    }
    Ok(ct)
}

/// Real symmetric indefinite factorization `B = H^T J H` with `J = diag(signs)`
/// and signs sorted `+1` first. Used by the real and *-congruence branches of
/// the stabilizer solver.
pub fn real_sym_signed_factor(b: &Mat, policy: &TolPolicy) -> Result<(Mat, Vec<i8>)> {
    b.check_finite()?;
    let n = b.rows();
    let scale = b.norm().max(f64::MIN_POSITIVE);
    if b.symmetry_error() > SYMMETRY_REL_TOL * (1.0 + scale) {
        return Err(Error::NotSymmetric(b.symmetry_error() / scale));
    }
    let max_im = b.as_dmatrix().iter().map(|e| e.im.abs()).fold(0.0, f64::max);
    if max_im > SYMMETRY_REL_TOL * (1.0 + scale) {
        return Err(Error::InvalidInput("real_sym_signed_factor needs a real matrix".into()));
    }
    let br = DMatrix::from_fn(n, n, |i, j| b[(i, j)].re);
    let eig = nalgebra::linalg::SymmetricEigen::new(br);
    let lam_max = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let cutoff = policy.rank_cutoff(n, n, lam_max).max(f64::MIN_POSITIVE);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b2| eig.eigenvalues[b2].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut h = Mat::zeros(n, n);
    let mut signs = Vec::with_capacity(n);
    for (row, &k) in idx.iter().enumerate() {
        let lam = eig.eigenvalues[k];
        if lam.abs() <= cutoff {
            return Err(Error::SingularInput { sigma_min: lam.abs(), tol: cutoff });
        }
        signs.push(if lam > 0.0 { 1 } else { -1 });
        let w = lam.abs().sqrt();
        for i in 0..n {
            h[(row, i)] = c(w * eig.eigenvectors[(i, k)], 0.0);
        }
    }
    Ok((h, signs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Mat {
        let mut b = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                b[(i, j)] = v;
                b[(j, i)] = v;
            }
        }
        b
    }

    #[test]
    fn rank_nullity_basics() {
        let policy = TolPolicy::default();
        let z = Mat::zeros(3, 4);
        let r = rank_nullity(&z, &policy).unwrap();
        assert_eq!((r.rank, r.nullity), (0, 4));
        let id = Mat::identity(5);
        let r = rank_nullity(&id, &policy).unwrap();
        assert_eq!((r.rank, r.nullity), (5, 0));
        let ones = Mat::from_fn(2, 2, |_, _| c(1.0, 0.0));
        let r = rank_nullity(&ones, &policy).unwrap();
        assert_eq!((r.rank, r.nullity), (1, 1));
    }

    #[test]
    fn rank_ambiguity_guard_fires() {
        let policy = TolPolicy::default();
        // singular values 1 and 1e-2: once the cutoff is pushed between them
        // the crossing ratio is only 100, below the required 1e3
        let m = Mat::from_fn(2, 2, |i, j| if i == j && i == 0 { c(1.0, 0.0) } else if i == 1 && j == 1 { c(1e-2, 0.0) } else { c(0.0, 0.0) });
        let strict = TolPolicy { rank_multiplier: 1e14, ..Default::default() };
        match rank_nullity(&m, &strict) {
            Err(Error::RankAmbiguous { .. }) => {}
            other => panic!("expected RankAmbiguous, got {other:?}"),
        }
        // with the default multiplier the same matrix has rank 2
        assert_eq!(rank_nullity(&m, &policy).unwrap().rank, 2);
    }

    #[test]
    fn inertia_examples() {
        let policy = TolPolicy::default();
        let d = Mat::from_fn(2, 2, |i, j| if i == j { c(if i == 0 { 1.0 } else { -1.0 }, 0.0) } else { c(0.0, 0.0) });
        assert_eq!(inertia_of(&d, &policy).unwrap(), Inertia { n_plus: 1, n_minus: 1, n_zero: 0 });
        let z = Mat::zeros(2, 2);
        assert_eq!(inertia_of(&z, &policy).unwrap(), Inertia { n_plus: 0, n_minus: 0, n_zero: 2 });
        let diag = [3.0, 2.0, -5.0, 0.0];
        let d4 = Mat::from_fn(4, 4, |i, j| if i == j { c(diag[i], 0.0) } else { c(0.0, 0.0) });
        assert_eq!(inertia_of(&d4, &policy).unwrap(), Inertia { n_plus: 2, n_minus: 1, n_zero: 1 });
    }

    #[test]
    fn inertia_invariant_under_star_congruence() {
        let policy = TolPolicy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let n = rng.gen_range(1..=6);
            let mut h = Mat::zeros(n, n);
            for i in 0..n {
                h[(i, i)] = c(rng.gen_range(-2.0..2.0f64), 0.0);
                for j in i + 1..n {
                    let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    h[(i, j)] = v;
                    h[(j, i)] = v.conj();
                }
            }
            let mut q = Mat::zeros(n, n);
            loop {
                for i in 0..n {
                    for j in 0..n {
                        q[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    }
                }
                if q.condition_estimate() < 1e3 {
                    break;
                }
            }
            let h2 = &(&q.adjoint() * &h) * &q;
            let a = inertia_of(&h, &policy).unwrap();
            let b = inertia_of(&h2, &policy).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn takagi_examples_and_random_suite() {
        let policy = TolPolicy::default();
        let id = Mat::identity(4);
        let ct = takagi_factor(&id, &policy).unwrap();
        assert!((&(&ct.transpose() * &ct) - &id).norm() <= 1e-10);

        let four = Mat::from_row_slice(1, 1, &[c(4.0, 0.0)]);
        let ct = takagi_factor(&four, &policy).unwrap();
        assert!((ct[(0, 0)] * ct[(0, 0)] - c(4.0, 0.0)).norm() < 1e-12);

        let e2 = Mat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let ct = takagi_factor(&e2, &policy).unwrap();
        assert!((&(&ct.transpose() * &ct) - &e2).norm() <= 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut done = 0;
        while done < 200 {
            let n = rng.gen_range(1..=20);
            let b = random_symmetric(&mut rng, n);
            match takagi_factor(&b, &policy) {
                Ok(ct) => {
                    assert!((&(&ct.transpose() * &ct) - &b).norm() <= 1e-10 * b.norm());
                    done += 1;
                }
                Err(Error::SingularInput { .. }) => {} // skip the measure-zero degenerates
                Err(e) => panic!("unexpected takagi error: {e}"),
            }
        }
    }

    #[test]
    fn takagi_rejects_asymmetric_and_singular() {
        let policy = TolPolicy::default();
        let m = Mat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(takagi_factor(&m, &policy), Err(Error::NotSymmetric(_))));
        let z = Mat::zeros(2, 2);
        assert!(matches!(takagi_factor(&z, &policy), Err(Error::SingularInput { .. })));
    }

    #[test]
    fn signed_factor_reconstructs() {
        let policy = TolPolicy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(1..=6);
            let mut b = Mat::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = c(rng.gen_range(-1.0..1.0f64), 0.0);
                    b[(i, j)] = v;
                    b[(j, i)] = v;
                }
            }
            match real_sym_signed_factor(&b, &policy) {
                Ok((h, signs)) => {
                    let j = Mat::from_fn(n, n, |a, b2| {
                        if a == b2 { c(signs[a] as f64, 0.0) } else { c(0.0, 0.0) }
                    });
                    let rec = &(&h.transpose() * &j) * &h;
                    assert!((&rec - &b).norm() < 1e-12 * (1.0 + b.norm()));
                    // signs sorted +1 first
                    let first_minus = signs.iter().position(|&s| s == -1).unwrap_or(signs.len());
                    assert!(signs[first_minus..].iter().all(|&s| s == -1));
                }
                Err(Error::SingularInput { .. }) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }
}
