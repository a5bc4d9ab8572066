//! Elementary block constructors: Jordan blocks, the backward identity, the
//! transition matrices `P`, and the symmetric / Hermitian canonical blocks
//! `S_m(z)`, `H_m(z)`, `K_m(z)`, `L_m(z)`.

use crate::error::{Error, Result};
use crate::mat::{c, C64, Mat};

/// The elementary m x m Jordan block `J_m(z)`.
pub fn build_jordan(m: usize, z: C64) -> Mat {
    assert!(m >= 1);
    let mut j = Mat::zeros(m, m);
    for k in 0..m {
        j[(k, k)] = z;
    }
    for k in 0..m - 1 {
        j[(k, k + 1)] = c(1.0, 0.0);
    }
    j
}

/// The backward identity `E_m` (ones on the anti-diagonal).
pub fn build_e(m: usize) -> Mat {
    assert!(m >= 1);
    let mut e = Mat::zeros(m, m);
    for k in 0..m {
        e[(k, m - 1 - k)] = c(1.0, 0.0);
    }
    e
}

/// `P_m = (I + iE)/sqrt(2)`, with `P^2 = iE`.
pub fn build_p(m: usize) -> Mat {
    let s = 1.0 / 2f64.sqrt();
    Mat::from_fn(m, m, |i, j| {
        let mut v = c(0.0, 0.0);
        if i == j {
            v += c(s, 0.0);
        }
        if j == m - 1 - i {
            v += c(0.0, s);
        }
        v
    })
}

/// `P_m = e^{-i pi/4}/sqrt(2) (I + iE)`, with `P^2 = E`.
pub fn build_p_quarter(m: usize) -> Mat {
    let phase = C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
    build_p(m).scale(phase)
}

/// The symmetric canonical block `S_m(z)`, built so that
/// `S_m(z) = P_m J_m(z) P_m^{-1}` holds to rounding error and the matrix is
/// symmetric exactly.
pub fn build_sym_block(m: usize, z: C64) -> Mat {
    assert!(m >= 1);
    // Expanding P J P^{-1}: z I + (N + N^T)/2 + (i/2)(EN - NE), where EN has
    // ones at (k+1, m-1-k) and NE at (k, m-2-k), 0-indexed.
    let mut s = Mat::zeros(m, m);
    for k in 0..m {
        s[(k, k)] += z;
    }
    for k in 0..m - 1 {
        s[(k, k + 1)] += c(0.5, 0.0);
        s[(k + 1, k)] += c(0.5, 0.0);
        s[(k + 1, m - 1 - k)] += c(0.0, 0.5);
        s[(k, m - 2 - k)] += c(0.0, -0.5);
    }
    s
}

/// The Hermitian-pencil elementary block `H_m(z)`:
/// `z E + (NE + EN)/2 + (i/2)(N - N^T)`. Hermitian exactly for real `z`.
pub fn build_h(m: usize, z: C64) -> Mat {
    assert!(m >= 1);
    let mut h = Mat::zeros(m, m);
    for k in 0..m {
        h[(k, m - 1 - k)] += z;
    }
    for k in 0..m - 1 {
        h[(k, m - 2 - k)] += c(0.5, 0.0);
        h[(k + 1, m - 1 - k)] += c(0.5, 0.0);
        h[(k, k + 1)] += c(0.0, 0.5);
        h[(k + 1, k)] += c(0.0, -0.5);
    }
    h
}

/// Which Hermitian canonical block to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HermKind {
    /// `H_m(lambda)`, `lambda` real.
    H,
    /// `K_m(mu) = [[0, -iH],[iH, 0]]`, `mu` real positive.
    K,
    /// `L_m(xi) = [[0, H],[H^*, 0]]`, `xi^2` not real.
    L,
}

const CROSS_CHECK_TOL: f64 = 1e-12;

/// Builds `H_m`, `K_m` or `L_m` and cross-validates the entrywise
/// construction against the conjugation identity with the consimilarity
/// normal form (the authoritative definition); disagreement is an error.
pub fn build_herm_block(kind: HermKind, m: usize, z: C64) -> Result<Mat> {
    assert!(m >= 1);
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidInput("non-finite block parameter".into()));
    }
    let block = match kind {
        HermKind::H => {
            if z.im != 0.0 {
                return Err(Error::InvalidInput("H block needs a real parameter".into()));
            }
            build_h(m, z)
        }
        HermKind::K => {
            if z.im != 0.0 || z.re <= 0.0 {
                return Err(Error::InvalidInput("K block needs a positive real parameter".into()));
            }
            let h = build_h(m, z);
            let mih = h.scale(c(0.0, -1.0));
            let ih = h.scale(c(0.0, 1.0));
            let zeros = Mat::zeros(m, m);
            Mat::from_quadrants(&zeros, &mih, &ih, &zeros)
        }
        HermKind::L => {
            let z2 = z * z;
            if z2.im == 0.0 {
                return Err(Error::InvalidInput("L block needs z^2 not real".into()));
            }
            let h = build_h(m, z);
            let zeros = Mat::zeros(m, m);
            Mat::from_quadrants(&zeros, &h, &h.adjoint(), &zeros)
        }
    };
    let reference = herm_block_via_conjugation(kind, m, z);
    let resid = (&block - &reference).norm();
    if resid > CROSS_CHECK_TOL * (1.0 + z.norm()) * m as f64 {
        return Err(Error::InternalCheck(format!(
            "Hermitian block display disagrees with the conjugation identity: {resid:.3e}"
        )));
    }
    Ok(block)
}

/// The consimilarity normal-form block paired with each Hermitian block.
pub fn consim_block(kind: HermKind, m: usize, z: C64) -> Mat {
    match kind {
        HermKind::H => build_jordan(m, z),
        HermKind::K => {
            let j = build_jordan(m, z);
            let zeros = Mat::zeros(m, m);
            Mat::from_quadrants(&zeros, &j, &j.scale(c(-1.0, 0.0)), &zeros)
        }
        HermKind::L => {
            let j = build_jordan(m, z);
            let jbar = build_jordan(m, z.conj());
            let zeros = Mat::zeros(m, m);
            Mat::from_quadrants(&zeros, &j, &jbar, &zeros)
        }
    }
}

/// The transition block of the conjugation identity for each kind.
pub fn transition_block(kind: HermKind, m: usize) -> Mat {
    let p = build_p_quarter(m);
    match kind {
        HermKind::H => p,
        HermKind::K => {
            let phase = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
            Mat::direct_sum(&[&p, &p]).scale(phase)
        }
        HermKind::L => Mat::direct_sum(&[&p, &p]),
    }
}

/// `P^{-1} Jq conj(P)` for the block kind: the authoritative definition of
/// the Hermitian canonical blocks.
pub fn herm_block_via_conjugation(kind: HermKind, m: usize, z: C64) -> Mat {
    let p = transition_block(kind, m);
    let jq = consim_block(kind, m, z);
    let pinv = p.inverse().expect("transition blocks are unitary multiples");
    &(&pinv * &jq) * &p.conj()
}
