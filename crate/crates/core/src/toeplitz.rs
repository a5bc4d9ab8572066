//! Upper-triangular Toeplitz and complex-alternating Toeplitz values (scalar
//! and block), and the permutation reshuffle exchanging "blocks of Toeplitz
//! matrices" with "Toeplitz matrices of blocks".

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::Part;
use crate::mat::{C64, Mat};

/// Plain vs complex-alternating upper-triangular Toeplitz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ToeplitzKind {
    Plain,
    Alternating,
}

/// Coefficient sequence defining `T(a)` or `T_c(a)`; scalar coefficients are
/// 1x1 blocks. This is the canonical compressed form; realization to a dense
/// matrix is explicit and one-way.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzCoeffs {
    pub kind: ToeplitzKind,
    pub coeffs: Vec<Mat>,
}

impl ToeplitzCoeffs {
    pub fn scalar(kind: ToeplitzKind, coeffs: &[C64]) -> Self {
        ToeplitzCoeffs {
            kind,
            coeffs: coeffs.iter().map(|&a| Mat::from_row_slice(1, 1, &[a])).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeffs.is_empty() {
            return Err(Error::InvalidInput("Toeplitz needs at least one coefficient".into()));
        }
        let (r, c) = (self.coeffs[0].rows(), self.coeffs[0].cols());
        if self.coeffs.iter().any(|m| m.rows() != r || m.cols() != c) {
            return Err(Error::InvalidInput("Toeplitz blocks must share one shape".into()));
        }
        Ok(())
    }

    /// Dense realization. For the alternating kind the entries on and above
    /// the diagonal satisfy `t_{jk} = conj(t_{(j+1)(k+1)})`: odd block rows
    /// (0-indexed) carry conjugated coefficients.
    pub fn realize(&self) -> Result<Mat> {
        self.validate()?;
        let beta = self.coeffs.len();
        let (br, bc) = (self.coeffs[0].rows(), self.coeffs[0].cols());
        let mut out = Mat::zeros(beta * br, beta * bc);
        for i in 0..beta {
            for j in i..beta {
                let a = &self.coeffs[j - i];
                let cell = if self.kind == ToeplitzKind::Alternating && i % 2 == 1 {
                    a.conj()
                } else {
                    a.clone()
                };
                out.set_block(i * br, j * bc, &cell);
            }
        }
        Ok(out)
    }
}

/// A quasi-diagonal structure: parts `(alpha_r, m_r)` with strictly
/// decreasing `alpha`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    pub parts: Vec<Part>,
}

impl Structure {
    pub fn new(parts: Vec<(usize, usize)>) -> Self {
        Structure { parts: parts.into_iter().map(|(size, mult)| Part { size, mult }).collect() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.parts.is_empty() {
            return Err(Error::InvalidInput("structure has no parts".into()));
        }
        if self.parts.iter().any(|p| p.size == 0 || p.mult == 0) {
            return Err(Error::InvalidInput("structure parts must be positive".into()));
        }
        for w in self.parts.windows(2) {
            if w[0].size <= w[1].size {
                return Err(Error::InvalidInput("structure sizes must strictly decrease".into()));
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.parts.iter().map(|p| p.size * p.mult).sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

/// A permutation kept as an explicit index map for exactness: column `k` of
/// the matrix view is `e_{fwd[k]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Perm {
    fwd: Vec<usize>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm { fwd: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    /// Dense matrix view (for tests and reports).
    pub fn to_mat(&self) -> Mat {
        let n = self.fwd.len();
        let mut m = Mat::zeros(n, n);
        for (k, &r) in self.fwd.iter().enumerate() {
            m[(r, k)] = crate::mat::c(1.0, 0.0);
        }
        m
    }

    /// Direct sum of permutations.
    pub fn direct_sum(perms: &[&Perm]) -> Perm {
        let mut fwd = Vec::new();
        let mut off = 0;
        for p in perms {
            fwd.extend(p.fwd.iter().map(|&i| i + off));
            off += p.fwd.len();
        }
        Perm { fwd }
    }

    /// `P^T Y Q` for permutations `P`, `Q`: pure entry repositioning.
    pub fn conjugate(y: &Mat, left: &Perm, right: &Perm) -> Result<Mat> {
        if y.rows() != left.len() || y.cols() != right.len() {
            return Err(Error::DimensionMismatch("permutation conjugation shapes".into()));
        }
        Ok(Mat::from_fn(y.rows(), y.cols(), |a, b| y[(left.fwd[a], right.fwd[b])]))
    }

    /// `P Y Q^T`, the inverse repositioning of `conjugate`.
    pub fn conjugate_inv(y: &Mat, left: &Perm, right: &Perm) -> Result<Mat> {
        if y.rows() != left.len() || y.cols() != right.len() {
            return Err(Error::DimensionMismatch("permutation conjugation shapes".into()));
        }
        let mut out = Mat::zeros(y.rows(), y.cols());
        for a in 0..y.rows() {
            for b in 0..y.cols() {
                out[(left.fwd[a], right.fwd[b])] = y[(a, b)];
            }
        }
        Ok(out)
    }
}

/// The interleaving permutation: columns
/// `e_1, e_{alpha+1}, ..., e_{(m-1)alpha+1}, e_2, e_{alpha+2}, ...`.
/// Conjugation by it turns an m x m grid of alpha-size Toeplitz blocks into
/// an alpha x alpha Toeplitz grid of m-size blocks.
pub fn build_omega(alpha: usize, m: usize) -> Perm {
    assert!(alpha >= 1 && m >= 1);
    let mut fwd = Vec::with_capacity(alpha * m);
    for i in 0..alpha {
        for j in 0..m {
            fwd.push(j * alpha + i);
        }
    }
    Perm { fwd }
}

/// The paired variant for K/L-type blocks of half-size `beta`: columns
/// `e_1, e_{2b+1}, ..., e_{2(m-1)b+1}, e_{b+1}, e_{3b+1}, ..., e_2, ...`,
/// collecting for each Toeplitz index first the m "upper half" columns and
/// then the m "lower half" columns.
pub fn build_omega_paired(beta: usize, m: usize) -> Perm {
    assert!(beta >= 1 && m >= 1);
    let mut fwd = Vec::with_capacity(2 * beta * m);
    for i in 0..beta {
        for j in 0..m {
            fwd.push(2 * j * beta + i);
        }
        for j in 0..m {
            fwd.push((2 * j + 1) * beta + i);
        }
    }
    Perm { fwd }
}

/// `Omega = direct sum of per-part interleavers` for a whole structure.
pub fn omega_for_structure(structure: &Structure) -> Perm {
    let parts: Vec<Perm> = structure.parts.iter().map(|p| build_omega(p.size, p.mult)).collect();
    let refs: Vec<&Perm> = parts.iter().collect();
    Perm::direct_sum(&refs)
}

/// Paired variant over a structure (sizes are the half-sizes `beta_r`).
pub fn omega_paired_for_structure(structure: &Structure) -> Perm {
    let parts: Vec<Perm> =
        structure.parts.iter().map(|p| build_omega_paired(p.size, p.mult)).collect();
    let refs: Vec<&Perm> = parts.iter().collect();
    Perm::direct_sum(&refs)
}

/// `Omega^T Y Omega` over the structure's direct-sum interleaver; entries are
/// repositioned bit-identically.
pub fn reshuffle(y: &Mat, structure: &Structure) -> Result<Mat> {
    structure.validate()?;
    if y.rows() != structure.order() || y.cols() != structure.order() {
        return Err(Error::DimensionMismatch(format!(
            "reshuffle needs order {}, got {}x{}",
            structure.order(),
            y.rows(),
            y.cols()
        )));
    }
    let omega = omega_for_structure(structure);
    Perm::conjugate(y, &omega, &omega)
}

/// Inverse of [`reshuffle`].
pub fn reshuffle_inv(y: &Mat, structure: &Structure) -> Result<Mat> {
    structure.validate()?;
    if y.rows() != structure.order() || y.cols() != structure.order() {
        return Err(Error::DimensionMismatch("reshuffle shapes".into()));
    }
    let omega = omega_for_structure(structure);
    Perm::conjugate_inv(y, &omega, &omega)
}

/// One off-diagonal block reshuffle `Omega_r^T Y_{rs} Omega_s`.
pub fn reshuffle_block(y: &Mat, row_part: (usize, usize), col_part: (usize, usize)) -> Result<Mat> {
    let left = build_omega(row_part.0, row_part.1);
    let right = build_omega(col_part.0, col_part.1);
    Perm::conjugate(y, &left, &right)
}
