//! Parameterized solution spaces of `AX = XB` and `A conj(X) = XB` for the
//! canonical block pairings, and the auxiliary `V`, `S`, `U_beta(i mu)`
//! constructions used by the paired (K-type) classes.

use crate::blocks::{build_e, build_jordan, build_p, build_p_quarter};
use crate::error::{Error, Result};
use crate::forms::{HermClass, SymSpec};
use crate::mat::{c, C64, Mat};
use crate::solution_space::{Field, ParamSlot, SlotShape, SolutionSpace};
use crate::toeplitz::{ToeplitzCoeffs, ToeplitzKind};

/// Embeds a p x p Toeplitz realization into the m x n padded shape:
/// `[0 T]` for m < n, `[T; 0]` for m > n, `T` for m = n.
pub(crate) fn pad_block(t: &Mat, m: usize, n: usize) -> Mat {
    let p = m.min(n);
    debug_assert_eq!(t.rows(), p);
    debug_assert_eq!(t.cols(), p);
    let mut out = Mat::zeros(m, n);
    if m < n {
        out.set_block(0, n - p, t);
    } else {
        out.set_block(0, 0, t);
    }
    out
}

fn toeplitz_from_params(kind: ToeplitzKind, p: usize, field: Field, params: &[f64]) -> Result<Mat> {
    let mut coeffs = Vec::with_capacity(p);
    let mut k = 0;
    for _ in 0..p {
        let z = match field {
            Field::Complex => {
                let z = c(params[k], params[k + 1]);
                k += 2;
                z
            }
            Field::Real => {
                let z = c(params[k], 0.0);
                k += 1;
                z
            }
        };
        coeffs.push(z);
    }
    ToeplitzCoeffs::scalar(kind, &coeffs).realize()
}

/// Solution space of `J_m(l1) X = X J_n(l2)`: zero for distinct eigenvalues,
/// otherwise the padded Toeplitz shape with `min(m, n)` free complex
/// coefficients.
pub fn commutant_pair(m: usize, n: usize, l1: C64, l2: C64) -> Result<SolutionSpace> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("block sizes must be positive".into()));
    }
    if l1 != l2 {
        return Ok(SolutionSpace::fixed(Mat::zeros(m, n)));
    }
    let p = m.min(n);
    let slot = ParamSlot::new("toeplitz", SlotShape::Matrix { rows: 1, cols: p, field: Field::Complex });
    SolutionSpace::new(
        vec![slot],
        Box::new(move |params| {
            let t = toeplitz_from_params(ToeplitzKind::Plain, p, Field::Complex, params)?;
            Ok(pad_block(&t, m, n))
        }),
    )
}

/// One block of the consimilarity normal form `J_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConsimKind {
    /// `J_m(lambda)` with `lambda` real nonnegative.
    Jordan { size: usize, lambda: f64 },
    /// `[[0, I],[J_n(eta), 0]]` with `eta` outside the nonnegative reals.
    Paired { size: usize, eta: C64 },
}

impl ConsimKind {
    fn order(&self) -> usize {
        match *self {
            ConsimKind::Jordan { size, .. } => size,
            ConsimKind::Paired { size, .. } => 2 * size,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ConsimKind::Jordan { size, lambda } => {
                if size == 0 {
                    return Err(Error::InvalidInput("block size must be positive".into()));
                }
                if !(lambda >= 0.0) || !lambda.is_finite() {
                    return Err(Error::InvalidInput("Jordan consim block needs lambda >= 0".into()));
                }
                Ok(())
            }
            ConsimKind::Paired { size, eta } => {
                if size == 0 {
                    return Err(Error::InvalidInput("block size must be positive".into()));
                }
                if !eta.re.is_finite() || !eta.im.is_finite() {
                    return Err(Error::InvalidInput("non-finite eta".into()));
                }
                if eta.im == 0.0 && eta.re >= 0.0 {
                    return Err(Error::InvalidInput("paired block needs eta outside R>=0".into()));
                }
                Ok(())
            }
        }
    }
}

/// Solution space of `M conj(X) = X N` for the canonical block pairings of
/// the consimilarity normal form.
pub fn consim_pair(mk: ConsimKind, nk: ConsimKind) -> Result<SolutionSpace> {
    mk.validate()?;
    nk.validate()?;
    match (mk, nk) {
        (ConsimKind::Jordan { size: m, lambda: l1 }, ConsimKind::Jordan { size: n, lambda: l2 }) => {
            if l1 != l2 {
                return Ok(SolutionSpace::fixed(Mat::zeros(m, n)));
            }
            let p = m.min(n);
            if l1 > 0.0 {
                // real upper-triangular Toeplitz
                let slot = ParamSlot::new(
                    "toeplitz",
                    SlotShape::Matrix { rows: 1, cols: p, field: Field::Real },
                );
                SolutionSpace::new(
                    vec![slot],
                    Box::new(move |params| {
                        let t = toeplitz_from_params(ToeplitzKind::Plain, p, Field::Real, params)?;
                        Ok(pad_block(&t, m, n))
                    }),
                )
            } else {
                // complex-alternating, each coefficient a free complex scalar
                let slot = ParamSlot::new(
                    "alt_toeplitz",
                    SlotShape::Matrix { rows: 1, cols: p, field: Field::Complex },
                );
                SolutionSpace::new(
                    vec![slot],
                    Box::new(move |params| {
                        let t =
                            toeplitz_from_params(ToeplitzKind::Alternating, p, Field::Complex, params)?;
                        Ok(pad_block(&t, m, n))
                    }),
                )
            }
        }
        (ConsimKind::Paired { size: m, eta: e1 }, ConsimKind::Paired { size: n, eta: e2 }) => {
            if e1 != e2 {
                return Ok(SolutionSpace::fixed(Mat::zeros(2 * m, 2 * n)));
            }
            let p = m.min(n);
            let keep_t2 = e1.im == 0.0; // negative real eta keeps the T2 leg
            let jm = build_jordan(m, e1);
            let mut slots =
                vec![ParamSlot::new("t1", SlotShape::Matrix { rows: 1, cols: p, field: Field::Complex })];
            if keep_t2 {
                slots.push(ParamSlot::new(
                    "t2",
                    SlotShape::Matrix { rows: 1, cols: p, field: Field::Complex },
                ));
            }
            SolutionSpace::new(
                slots,
                Box::new(move |params| {
                    let t1 = toeplitz_from_params(ToeplitzKind::Plain, p, Field::Complex, &params[..2 * p])?;
                    let t1p = pad_block(&t1, m, n);
                    let t2p = if keep_t2 {
                        let t2 =
                            toeplitz_from_params(ToeplitzKind::Plain, p, Field::Complex, &params[2 * p..])?;
                        pad_block(&t2, m, n)
                    } else {
                        Mat::zeros(m, n)
                    };
                    let bl = &jm * &t2p.conj();
                    Ok(Mat::from_quadrants(&t1p, &t2p, &bl, &t1p.conj()))
                }),
            )
        }
        (a, b) => {
            // mixed kinds never share a consimilarity invariant
            Ok(SolutionSpace::fixed(Mat::zeros(a.order(), b.order())))
        }
    }
}

/// Assembles a grid of block spaces into one space over the full matrix.
pub(crate) fn grid_space(
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
    blocks: Vec<Vec<SolutionSpace>>,
    label: &str,
) -> Result<SolutionSpace> {
    let mut slots = Vec::new();
    for (j, row) in blocks.iter().enumerate() {
        for (k, sp) in row.iter().enumerate() {
            for slot in sp.slots() {
                let mut named = slot.clone();
                named.name = format!("{label}[{},{}].{}", j + 1, k + 1, slot.name);
                slots.push(named);
            }
        }
    }
    let rows: usize = row_dims.iter().sum();
    let cols: usize = col_dims.iter().sum();
    SolutionSpace::new(
        slots,
        Box::new(move |params| {
            let mut out = Mat::zeros(rows, cols);
            let mut off = 0;
            let mut r0 = 0;
            for (j, row) in blocks.iter().enumerate() {
                let mut c0 = 0;
                for (k, sp) in row.iter().enumerate() {
                    let d = sp.realdim();
                    let b = sp.evaluate(&params[off..off + d])?;
                    off += d;
                    out.set_block(r0, c0, &b);
                    c0 += col_dims[k];
                }
                debug_assert_eq!(c0, cols);
                r0 += row_dims[j];
                let _ = j;
            }
            Ok(out)
        }),
    )
}

/// Commutant of the assembled symmetric normal form: block-diagonal across
/// eigenvalue classes, conjugated Toeplitz grids within a class.
pub fn commutant_sym_spec(spec: &SymSpec) -> Result<SolutionSpace> {
    spec.validate()?;
    let mut class_spaces = Vec::new();
    for cl in &spec.classes {
        let sizes: Vec<usize> = cl
            .parts
            .iter()
            .flat_map(|p| std::iter::repeat(p.size).take(p.mult))
            .collect();
        let mut rows = Vec::new();
        for &aj in &sizes {
            let mut row = Vec::new();
            for &ak in &sizes {
                row.push(commutant_pair(aj, ak, cl.eigenvalue, cl.eigenvalue)?);
            }
            rows.push(row);
        }
        let y = grid_space(sizes.clone(), sizes.clone(), rows, "Y")?;
        let p_blocks: Vec<Mat> = sizes.iter().map(|&a| build_p(a)).collect();
        let p_refs: Vec<&Mat> = p_blocks.iter().collect();
        let p = Mat::direct_sum(&p_refs);
        let pinv = p.inverse()?;
        class_spaces.push(y.sandwich(p, pinv)?);
    }
    SolutionSpace::direct_sum(class_spaces)
}

/// Nonsingular `U` with `U J_beta(-mu^2) = (J_beta(i mu))^2 U`, normalized so
/// odd rows are real and even rows purely imaginary: the first column is a
/// real kernel vector and the recursion `((J(i mu))^2 + mu^2) v_{k+1} = v_k`
/// fills the rest by back-substitution with zero kernel component.
pub fn solve_u_mu(beta: usize, mu: f64) -> Result<Mat> {
    if beta == 0 {
        return Err(Error::InvalidInput("beta must be positive".into()));
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidInput("mu must be positive".into()));
    }
    let mut u = Mat::zeros(beta, beta);
    let mut v = vec![c(0.0, 0.0); beta];
    v[0] = c(1.0, 0.0);
    u[(0, 0)] = v[0];
    let two_imu = c(0.0, 2.0 * mu);
    for col in 1..beta {
        // (2 i mu N + N^2) w = v, componentwise 2 i mu w[j+1] + w[j+2] = v[j]
        let mut w = vec![c(0.0, 0.0); beta];
        for j in (0..beta - 1).rev() {
            let w2 = if j + 2 < beta { w[j + 2] } else { c(0.0, 0.0) };
            w[j + 1] = (v[j] - w2) / two_imu;
        }
        for (i, &wi) in w.iter().enumerate() {
            u[(i, col)] = wi;
        }
        v = w;
    }
    Ok(u)
}

/// Real Toeplitz coefficients `u_0..u_{beta-1}` with
/// `E U^T E U = i^{beta+1} T(u)`, extracted and checked.
pub fn u_toeplitz_coeffs(beta: usize, mu: f64) -> Result<Vec<f64>> {
    let u = solve_u_mu(beta, mu)?;
    let e = build_e(beta);
    let m = &(&(&e * &u.transpose()) * &e) * &u;
    let phase = c(0.0, 1.0).powu((beta + 1) as u32);
    let t = m.map(|x| x / phase);
    let tol = 1e-10 * (1.0 + t.norm());
    let mut coeffs = Vec::with_capacity(beta);
    for n in 0..beta {
        let v = t[(0, n)];
        if v.im.abs() > tol {
            return Err(Error::InternalCheck(format!(
                "U-product coefficient {n} not real: {v}"
            )));
        }
        coeffs.push(v.re);
    }
    for i in 0..beta {
        for j in 0..beta {
            let expect = if j >= i { c(coeffs[j - i], 0.0) } else { c(0.0, 0.0) };
            if (t[(i, j)] - expect).norm() > tol {
                return Err(Error::InternalCheck("U-product is not upper Toeplitz".into()));
            }
        }
    }
    Ok(coeffs)
}

/// Transition data of the paired class: `P`, `V`, `S` with
/// `X = P^{-1} V^{-1} S Y S^{-1} V P`.
pub struct PairedTransition {
    pub p: Mat,
    pub v: Mat,
    pub s: Mat,
}

pub fn paired_transition(sizes: &[usize], mu: f64) -> Result<PairedTransition> {
    let quarter = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let mut pb = Vec::new();
    let mut vb = Vec::new();
    let mut sb = Vec::new();
    for &beta in sizes {
        let pq = build_p_quarter(beta);
        pb.push(Mat::direct_sum(&[&pq, &pq]).scale(quarter));
        let w = Mat::from_fn(beta, beta, |i, j| {
            if i == j { c(0.0, 1.0).powu(i as u32) } else { c(0.0, 0.0) }
        });
        vb.push(Mat::direct_sum(&[&w, &w.conj()]).scale(quarter));
        let u = solve_u_mu(beta, mu)?;
        let lower = &build_jordan(beta, c(0.0, -mu)) * &u.conj();
        let zeros = Mat::zeros(beta, beta);
        sb.push(Mat::from_quadrants(&zeros, &u, &lower, &zeros));
    }
    fn sum(v: &[Mat]) -> Mat {
        let refs: Vec<&Mat> = v.iter().collect();
        Mat::direct_sum(&refs)
    }
    Ok(PairedTransition { p: sum(&pb), v: sum(&vb), s: sum(&sb) })
}

/// Solution space of `H1 conj(X) = X H1` for a single eigenvalue class of
/// the Hermitian normal form (signs forced +1).
pub fn consim_herm_spec(class: &HermClass) -> Result<SolutionSpace> {
    class.validate()?;
    match class {
        HermClass::Zero { parts } | HermClass::Pos { parts, .. } => {
            let lambda = match class {
                HermClass::Pos { lambda, .. } => *lambda,
                _ => 0.0,
            };
            let sizes: Vec<usize> = parts
                .iter()
                .flat_map(|p| std::iter::repeat(p.size).take(p.mult))
                .collect();
            let mut rows = Vec::new();
            for &aj in &sizes {
                let mut row = Vec::new();
                for &ak in &sizes {
                    row.push(consim_pair(
                        ConsimKind::Jordan { size: aj, lambda },
                        ConsimKind::Jordan { size: ak, lambda },
                    )?);
                }
                rows.push(row);
            }
            let y = grid_space(sizes.clone(), sizes.clone(), rows, "Y")?;
            let p_blocks: Vec<Mat> = sizes.iter().map(|&a| build_p_quarter(a)).collect();
            let p_refs: Vec<&Mat> = p_blocks.iter().collect();
            let p = Mat::direct_sum(&p_refs);
            let pinv = p.inverse()?;
            y.sandwich(pinv, p)
        }
        HermClass::NegPair { mu, parts } => {
            let sizes: Vec<usize> = parts
                .iter()
                .flat_map(|p| std::iter::repeat(p.size).take(p.mult))
                .collect();
            let eta = c(-mu * mu, 0.0);
            let mut rows = Vec::new();
            for &bj in &sizes {
                let mut row = Vec::new();
                for &bk in &sizes {
                    row.push(consim_pair(
                        ConsimKind::Paired { size: bj, eta },
                        ConsimKind::Paired { size: bk, eta },
                    )?);
                }
                rows.push(row);
            }
            let dims: Vec<usize> = sizes.iter().map(|&b| 2 * b).collect();
            let y = grid_space(dims.clone(), dims, rows, "Y")?;
            let tr = paired_transition(&sizes, *mu)?;
            let left = &(&tr.p.inverse()? * &tr.v.inverse()?) * &tr.s;
            let right = &(&tr.s.inverse()? * &tr.v) * &tr.p;
            y.sandwich(left, right)
        }
        HermClass::Complex { xi, parts } => {
            let sizes: Vec<usize> = parts
                .iter()
                .flat_map(|p| std::iter::repeat(p.size).take(p.mult))
                .collect();
            let mut rows = Vec::new();
            for &gj in &sizes {
                let mut row = Vec::new();
                for &gk in &sizes {
                    row.push(consim_pair(
                        ConsimKind::Paired { size: gj, eta: *xi },
                        ConsimKind::Paired { size: gk, eta: *xi },
                    )?);
                }
                rows.push(row);
            }
            let dims: Vec<usize> = sizes.iter().map(|&g| 2 * g).collect();
            let y = grid_space(dims.clone(), dims, rows, "Y")?;
            let p_blocks: Vec<Mat> = sizes
                .iter()
                .map(|&g| {
                    let pq = build_p_quarter(g);
                    Mat::direct_sum(&[&pq, &pq])
                })
                .collect();
            let p_refs: Vec<&Mat> = p_blocks.iter().collect();
            let p = Mat::direct_sum(&p_refs);
            let pinv = p.inverse()?;
            y.sandwich(pinv, p)
        }
    }
}

/// The Hermitian normal form of a class with all signs +1 (the `H^1` slice
/// the consimilarity solutions commute with).
pub fn class_h1(class: &HermClass) -> Result<Mat> {
    let unsigned = match class {
        HermClass::Zero { parts } => HermClass::Zero {
            parts: parts
                .iter()
                .map(|p| crate::forms::SignedPart { size: p.size, mult: p.mult, signs: vec![1; p.mult] })
                .collect(),
        },
        HermClass::Pos { lambda, parts } => HermClass::Pos {
            lambda: *lambda,
            parts: parts
                .iter()
                .map(|p| crate::forms::SignedPart { size: p.size, mult: p.mult, signs: vec![1; p.mult] })
                .collect(),
        },
        other => other.clone(),
    };
    unsigned.assemble()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{Part, SignedPart, SymClass};
    use crate::oracle::{commutation_solution_dim, consim_solution_dim};
    use crate::tol::TolPolicy;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const X2: C64 = C64 { re: 1.3, im: 0.4 };

    fn sample_residual(
        space: &SolutionSpace,
        rng: &mut ChaCha8Rng,
        scale: f64,
        resid: impl Fn(&Mat) -> f64,
    ) -> f64 {
        let p = space.sample_params(rng, scale);
        let x = space.evaluate(&p).unwrap();
        resid(&x)
    }

    #[test]
    fn commutant_pair_examples() {
        let policy = TolPolicy::default();
        let zero = commutant_pair(2, 2, c(1.0, 0.0), c(3.0, 0.0)).unwrap();
        assert_eq!(zero.realdim(), 0);
        assert_eq!(zero.base().norm(), 0.0);

        let lam = c(0.5, -2.0);
        let sq = commutant_pair(2, 2, lam, lam).unwrap();
        assert_eq!(sq.realdim(), 4, "two complex parameters");

        let rect = commutant_pair(2, 3, lam, lam).unwrap();
        assert_eq!(rect.realdim(), 4);
        // every evaluation satisfies J_2 X = X J_3, and the span equals the
        // independent Kronecker nullspace count
        let j2 = build_jordan(2, lam);
        let j3 = build_jordan(3, lam);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let r = sample_residual(&rect, &mut rng, 1.0, |x| (&(&j2 * x) - &(x * &j3)).norm());
            assert!(r <= 1e-12);
        }
        assert_eq!(commutation_solution_dim(&j2, &j3, &policy).unwrap(), 2);
        // zero block sits on the left for m < n
        let x = rect.evaluate(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(x[(0, 0)], c(0.0, 0.0));
        assert_eq!(x[(0, 1)], c(1.0, 0.0));
    }

    #[test]
    fn consim_pair_jordan_cases() {
        let policy = TolPolicy::default();
        // distinct invariants
        let z = consim_pair(
            ConsimKind::Jordan { size: 2, lambda: 1.0 },
            ConsimKind::Jordan { size: 2, lambda: 2.0 },
        )
        .unwrap();
        assert_eq!(z.realdim(), 0);

        // lambda > 0: real Toeplitz
        let s = consim_pair(
            ConsimKind::Jordan { size: 2, lambda: 0.8 },
            ConsimKind::Jordan { size: 2, lambda: 0.8 },
        )
        .unwrap();
        assert_eq!(s.realdim(), 2);
        let j = build_jordan(2, c(0.8, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let r = sample_residual(&s, &mut rng, 1.0, |x| (&(&j * &x.conj()) - &(x * &j)).norm());
            assert!(r <= 1e-12);
        }
        assert_eq!(consim_solution_dim(&j, &j, &policy).unwrap(), 2);

        // lambda = 0: complex-alternating, 2 min(m,n) real parameters
        let s = consim_pair(
            ConsimKind::Jordan { size: 3, lambda: 0.0 },
            ConsimKind::Jordan { size: 2, lambda: 0.0 },
        )
        .unwrap();
        assert_eq!(s.realdim(), 4);
        let j3 = build_jordan(3, c(0.0, 0.0));
        let j2 = build_jordan(2, c(0.0, 0.0));
        for _ in 0..50 {
            let r = sample_residual(&s, &mut rng, 1.0, |x| (&(&j3 * &x.conj()) - &(x * &j2)).norm());
            assert!(r <= 1e-12);
        }
        assert_eq!(consim_solution_dim(&j3, &j2, &policy).unwrap(), 4);
    }

    #[test]
    fn consim_pair_paired_cases() {
        let policy = TolPolicy::default();
        // eta complex non-real: T2 = 0, X = diag(t, conj t) at size 1
        let sp = consim_pair(
            ConsimKind::Paired { size: 1, eta: X2 },
            ConsimKind::Paired { size: 1, eta: X2 },
        )
        .unwrap();
        assert_eq!(sp.realdim(), 2);
        let x = sp.evaluate(&[0.3, 0.9]).unwrap();
        assert_eq!(x[(0, 0)], c(0.3, 0.9));
        assert_eq!(x[(1, 1)], c(0.3, -0.9));
        assert_eq!(x[(0, 1)], c(0.0, 0.0));
        let m = crate::blocks::consim_block(crate::blocks::HermKind::L, 1, X2);
        // the paired normal-form block [[0, I],[J(eta), 0]]
        let block = |n: usize, eta: C64| {
            let zeros = Mat::zeros(n, n);
            Mat::from_quadrants(&zeros, &Mat::identity(n), &build_jordan(n, eta), &zeros)
        };
        let _ = m;
        let b1 = block(1, X2 * X2);
        let _ = b1;
        let bm = block(1, X2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let r = sample_residual(&sp, &mut rng, 1.0, |x| (&(&bm * &x.conj()) - &(x * &bm)).norm());
            assert!(r <= 1e-12);
        }
        assert_eq!(consim_solution_dim(&bm, &bm, &policy).unwrap(), 2);

        // eta negative real keeps both Toeplitz legs
        let eta = c(-1.69, 0.0);
        let sp = consim_pair(
            ConsimKind::Paired { size: 2, eta },
            ConsimKind::Paired { size: 2, eta },
        )
        .unwrap();
        assert_eq!(sp.realdim(), 8);
        let bm = block(2, eta);
        for _ in 0..50 {
            let r = sample_residual(&sp, &mut rng, 1.0, |x| (&(&bm * &x.conj()) - &(x * &bm)).norm());
            assert!(r <= 1e-11);
        }
        assert_eq!(consim_solution_dim(&bm, &bm, &policy).unwrap(), 8);

        // mixed sizes
        let sp = consim_pair(
            ConsimKind::Paired { size: 2, eta },
            ConsimKind::Paired { size: 1, eta },
        )
        .unwrap();
        assert_eq!(sp.realdim(), 4);
        let b2 = block(2, eta);
        let b1 = block(1, eta);
        for _ in 0..50 {
            let r = sample_residual(&sp, &mut rng, 1.0, |x| (&(&b2 * &x.conj()) - &(x * &b1)).norm());
            assert!(r <= 1e-11);
        }
        assert_eq!(consim_solution_dim(&b2, &b1, &policy).unwrap(), 4);
    }

    #[test]
    fn commutant_sym_spec_counts_and_residuals() {
        let policy = TolPolicy::default();
        // two distinct eigenvalues, one 1x1 block each: diagonal commutant
        let spec = SymSpec {
            classes: vec![
                SymClass { eigenvalue: c(1.0, 0.0), parts: vec![Part { size: 1, mult: 1 }] },
                SymClass { eigenvalue: c(2.0, 0.0), parts: vec![Part { size: 1, mult: 1 }] },
            ],
        };
        let sp = commutant_sym_spec(&spec).unwrap();
        assert_eq!(sp.realdim(), 4, "two complex parameters");

        // single 2-block: Toeplitz in the S_2 basis
        let spec = SymSpec {
            classes: vec![SymClass { eigenvalue: c(0.7, -0.1), parts: vec![Part { size: 2, mult: 1 }] }],
        };
        let sp = commutant_sym_spec(&spec).unwrap();
        assert_eq!(sp.realdim(), 4);
        let s = spec.assemble().unwrap();
        assert_eq!(commutation_solution_dim(&s, &s, &policy).unwrap(), 2);

        // full commutant of lambda I_2
        let spec = SymSpec {
            classes: vec![SymClass { eigenvalue: c(0.3, 0.0), parts: vec![Part { size: 1, mult: 2 }] }],
        };
        let sp = commutant_sym_spec(&spec).unwrap();
        assert_eq!(sp.realdim(), 8);

        // residuals on a mixed spec
        let spec = SymSpec {
            classes: vec![
                SymClass { eigenvalue: c(0.4, 0.9), parts: vec![Part { size: 3, mult: 1 }, Part { size: 1, mult: 2 }] },
                SymClass { eigenvalue: c(-1.0, 0.0), parts: vec![Part { size: 2, mult: 1 }] },
            ],
        };
        let sp = commutant_sym_spec(&spec).unwrap();
        let s = spec.assemble().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let p = sp.sample_params(&mut rng, 1.0);
            let x = sp.evaluate(&p).unwrap();
            let r = (&(&s * &x) - &(&x * &s)).norm();
            assert!(r <= 1e-10 * (1.0 + x.norm()) * (1.0 + s.norm()));
        }
        // parameter count agrees with the Kronecker oracle
        assert_eq!(2 * commutation_solution_dim(&s, &s, &policy).unwrap(), sp.realdim());
        // chart injectivity at the base point
        assert_eq!(sp.jacobian_rank(&policy).unwrap(), sp.realdim());
    }

    #[test]
    fn solve_u_mu_properties() {
        for beta in 1..=6 {
            for &mu in &[0.3, 1.0, 2.6] {
                let u = solve_u_mu(beta, mu).unwrap();
                let lhs = &u * &build_jordan(beta, c(-mu * mu, 0.0));
                let j = build_jordan(beta, c(0.0, mu));
                let rhs = &(&j * &j) * &u;
                assert!((&lhs - &rhs).norm() <= 1e-10 * (1.0 + u.norm()));
                // row parity: odd rows real, even rows imaginary (1-indexed)
                for i in 0..beta {
                    for j in 0..beta {
                        let e = u[(i, j)];
                        if i % 2 == 0 {
                            assert_eq!(e.im, 0.0);
                        } else {
                            assert_eq!(e.re, 0.0);
                        }
                    }
                }
                // nonsingular
                assert!(u.condition_estimate().is_finite());
                let _ = u_toeplitz_coeffs(beta, mu).unwrap();
            }
        }
        assert_eq!(solve_u_mu(1, 2.0).unwrap()[(0, 0)], c(1.0, 0.0));
    }

    #[test]
    fn consim_herm_spec_counts_and_residuals() {
        let policy = TolPolicy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);

        // pos class, single 1x1 block: one real parameter
        let cl = HermClass::Pos { lambda: 1.2, parts: vec![SignedPart { size: 1, mult: 1, signs: vec![1] }] };
        let sp = consim_herm_spec(&cl).unwrap();
        assert_eq!(sp.realdim(), 1);
        let x = sp.evaluate(&[0.7]).unwrap();
        assert!(x[(0, 0)].im.abs() < 1e-14);

        // zero class, single 2-block: 4 real parameters
        let cl = HermClass::Zero { parts: vec![SignedPart { size: 2, mult: 1, signs: vec![1] }] };
        let sp = consim_herm_spec(&cl).unwrap();
        assert_eq!(sp.realdim(), 4);

        // complex class, single 1-block: 2 real parameters
        let cl = HermClass::Complex { xi: c(1.0, 1.0), parts: vec![Part { size: 1, mult: 1 }] };
        let sp = consim_herm_spec(&cl).unwrap();
        assert_eq!(sp.realdim(), 2);

        // residuals + oracle counts across one class of each kind
        let classes = vec![
            HermClass::Zero {
                parts: vec![SignedPart { size: 2, mult: 1, signs: vec![1] }, SignedPart { size: 1, mult: 2, signs: vec![1, 1] }],
            },
            HermClass::Pos { lambda: 0.9, parts: vec![SignedPart { size: 2, mult: 2, signs: vec![1; 2] }] },
            HermClass::NegPair { mu: 1.1, parts: vec![Part { size: 2, mult: 1 }, Part { size: 1, mult: 1 }] },
            HermClass::Complex { xi: c(0.6, 1.1), parts: vec![Part { size: 2, mult: 1 }] },
        ];
        for cl in &classes {
            let sp = consim_herm_spec(cl).unwrap();
            let h1 = class_h1(cl).unwrap();
            for _ in 0..500 {
                let p = sp.sample_params(&mut rng, 0.8);
                let x = sp.evaluate(&p).unwrap();
                let r = (&(&h1 * &x.conj()) - &(&x * &h1)).norm();
                assert!(
                    r <= 1e-9 * (1.0 + x.norm()) * (1.0 + h1.norm()),
                    "residual {r:.2e} for {cl:?}"
                );
            }
            let want = consim_solution_dim(&h1, &h1, &policy).unwrap();
            assert_eq!(sp.realdim(), want, "dimension for {cl:?}");
            assert_eq!(sp.jacobian_rank(&policy).unwrap(), sp.realdim());
        }
    }
}
