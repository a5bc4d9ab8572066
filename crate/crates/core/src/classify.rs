//! Structural classification of a Hermitian matrix into a normal-form
//! skeleton via the Jordan structure of `A conj(A)`, and the reduction of a
//! Hermitian/symmetric pair `(A, B)` to `(A~, I)` through a Takagi factor
//! of `B`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{HermClass, HermSpec, Part};
use crate::kernels::{inertia_of, takagi_factor, Inertia};
use crate::mat::{c, C64, Mat};
use crate::tol::TolPolicy;

/// One eigenvalue class of `A conj(A)` with its Jordan data.
#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassSkeleton {
    /// Eigenvalue `lambda^2 >= 0` of `A conj(A)`, H-type blocks.
    NonNeg { lambda: f64, parts: Vec<Part> },
    /// Eigenvalue `-mu^2 < 0`, paired K-type blocks (`mult` counts pairs).
    NegPair { mu: f64, parts: Vec<Part> },
    /// Conjugate pair `xi^2`, `conj(xi)^2`, L-type blocks.
    ComplexPair {
        #[serde(serialize_with = "ser_c")]
        xi: C64,
        parts: Vec<Part>,
    },
}

fn ser_c<S: serde::Serializer>(v: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize as _;
    [v.re, v.im].serialize(s)
}

/// Status of the sign characteristic: the classification reports inertia
/// constraints only, never a guessed sign pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonStatus {
    /// No sign-carrying blocks exist (only paired classes, or only odd-size
    /// zero blocks).
    DeterminedTrivially,
    Undetermined,
}

/// Result of classifying a Hermitian matrix.
#[derive(Debug, Clone, Serialize)]
pub struct StructuralClass {
    pub classes: Vec<ClassSkeleton>,
    pub inertia: Inertia,
    pub epsilon: EpsilonStatus,
}

const HERM_REL_TOL: f64 = 1e-8;

struct Cluster {
    center: C64,
    mult: usize,
}

/// Eigenvalues of `m` via its realification (each eigenvalue of the complex
/// matrix appears twice among the 2n real-Schur eigenvalues), clustered by
/// single linkage. A positive spectral shift keeps the QR iteration away
/// from its zero-norm degeneracy.
fn clustered_eigenvalues(m: &Mat, link: f64) -> Result<Vec<Cluster>> {
    let real = m.realify();
    let n2 = real.nrows();
    // varied spectral shifts steer the QR iteration away from the zero-norm
    // and defective-cluster failure modes; accept the first finite spectrum
    let mut vals: Option<Vec<C64>> = None;
    for k in 0..6 {
        let sigma = (1.0 + real.norm()) * (1.0 + 0.37 * k as f64);
        let shifted = &real + nalgebra::DMatrix::<f64>::identity(n2, n2) * sigma;
        let Some(schur) = nalgebra::linalg::Schur::try_new(shifted, 1e-14, 100_000) else {
            continue;
        };
        let eigs = schur.complex_eigenvalues();
        if eigs.iter().all(|e| e.re.is_finite() && e.im.is_finite()) {
            vals = Some(eigs.iter().map(|e| c(e.re - sigma, e.im)).collect());
            break;
        }
    }
    let vals = vals.ok_or_else(|| {
        Error::EigenvalueClusterAmbiguous("eigenvalue iteration did not converge".into())
    })?;
    let n = vals.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..n {
        for j in i + 1..n {
            if (vals[i] - vals[j]).norm() <= link {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut clusters: Vec<Cluster> = groups
        .values()
        .map(|idx| {
            let mut sum = c(0.0, 0.0);
            for &i in idx {
                sum += vals[i];
            }
            Cluster { center: sum / c(idx.len() as f64, 0.0), mult: idx.len() }
        })
        .collect();
    // realified spectrum doubles every multiplicity
    for cl in &mut clusters {
        if cl.mult % 2 != 0 {
            return Err(Error::EigenvalueClusterAmbiguous(format!(
                "odd realified multiplicity after clustering: centers {:?}",
                clusters.iter().map(|c| format!("{:.4}{:+.4}i x{}", c.center.re, c.center.im, c.mult)).collect::<Vec<_>>()
            )));
        }
        cl.mult /= 2;
    }
    clusters.sort_by(|a, b| {
        (b.center.re, b.center.im)
            .partial_cmp(&(a.center.re, a.center.im))
            .unwrap()
    });
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            let d = (clusters[i].center - clusters[j].center).norm();
            if d < 10.0 * link {
                return Err(Error::EigenvalueClusterAmbiguous(format!(
                    "cluster centers {:.4e} apart, need at least {:.4e}",
                    d,
                    10.0 * link
                )));
            }
        }
    }
    Ok(clusters)
}

/// Jordan block sizes (with multiplicities, sizes descending) of eigenvalue
/// `rho` of `m`, from the nullity chain of `(m - rho I)^k`.
///
/// The shifted operator is normalized once and the rank cutoffs refer to
/// that fixed scale: powers may be numerically zero and must not be
/// renormalized against their own noise.
fn jordan_sizes(
    m: &Mat,
    rho: C64,
    algebraic_mult: usize,
    ambient: f64,
    policy: &TolPolicy,
) -> Result<Vec<Part>> {
    let n = m.rows();
    let mut shifted =
        Mat::from_fn(n, n, |i, j| m[(i, j)] - if i == j { rho } else { c(0.0, 0.0) });
    // the ambient scale of the producing computation, not the shifted
    // operator's own (possibly zero) norm
    let base_norm = (ambient + rho.norm()).max(f64::MIN_POSITIVE);
    shifted = shifted.scale(c(1.0 / base_norm, 0.0));
    let mut power = Mat::identity(n);
    let mut prev_nullity = 0usize;
    let mut blocks_ge: Vec<usize> = Vec::new(); // blocks of size >= k
    loop {
        power = &power * &shifted;
        let nullity = crate::kernels::rank_nullity_real_scaled(
            &power.realify(),
            policy,
            Some(1.0),
        )?
        .nullity
            / 2;
        if nullity < prev_nullity || nullity > algebraic_mult {
            return Err(Error::EigenvalueClusterAmbiguous(format!(
                "nullity chain at {rho} moved from {prev_nullity} to {nullity} (multiplicity {algebraic_mult})"
            )));
        }
        let new_blocks = nullity - prev_nullity;
        if new_blocks == 0 {
            break;
        }
        blocks_ge.push(new_blocks);
        prev_nullity = nullity;
        if nullity == algebraic_mult || blocks_ge.len() > n {
            break;
        }
    }
    if prev_nullity != algebraic_mult {
        return Err(Error::EigenvalueClusterAmbiguous(format!(
            "nullity chain reached {prev_nullity}, expected multiplicity {algebraic_mult}"
        )));
    }
    let mut parts = Vec::new();
    for size in (1..=blocks_ge.len()).rev() {
        let ge_this = blocks_ge[size - 1];
        let ge_next = if size < blocks_ge.len() { blocks_ge[size] } else { 0 };
        let count = ge_this - ge_next;
        if count > 0 {
            parts.push(Part { size, mult: count });
        }
    }
    Ok(parts)
}

/// Classifies a Hermitian matrix into the three-way eigenvalue taxonomy of
/// `A conj(A)` with the Jordan sizes of `A conj(A)` per class. For the zero
/// eigenvalue these are the squares of the consimilarity blocks (recovering
/// the original nilpotent sizes needs alternating product ranks, which are
/// out of scope); all other classes carry their sizes over unchanged. The
/// sign characteristic is not reconstructed; only the inertia constraint is
/// reported.
pub fn classify_hermitian(a: &Mat, policy: &TolPolicy) -> Result<StructuralClass> {
    a.check_finite()?;
    if !a.is_square() {
        return Err(Error::DimensionMismatch("classification needs a square matrix".into()));
    }
    let scale = a.norm().max(1.0);
    if a.hermitian_error() > HERM_REL_TOL * scale {
        return Err(Error::NotHermitian(a.hermitian_error() / scale));
    }
    let inertia = inertia_of(a, policy)?;
    let m = a * &a.conj();
    let ambient = a.norm() * a.norm();
    let eig_scale = 1.0 + m.norm();
    let link = 1e-3 * eig_scale;
    let clusters = clustered_eigenvalues(&m, link)?;
    // Rank chains of matrix powers see the backward error amplified well
    // above machine epsilon; the chain cutoff absorbs that while staying far
    // below the genuine singular values of separated eigenvalues.
    let policy = &TolPolicy {
        rank_multiplier: policy.rank_multiplier * 1e4,
        min_gap_ratio: policy.min_gap_ratio,
    };

    let mut classes = Vec::new();
    let mut consumed = vec![false; clusters.len()];
    let mut total = 0usize;
    for (i, cl) in clusters.iter().enumerate() {
        if consumed[i] {
            continue;
        }
        let rho = cl.center;
        if rho.im.abs() <= link {
            let parts = jordan_sizes(&m, c(rho.re, 0.0), cl.mult, ambient, policy)?;
            if rho.re > link {
                total += parts.iter().map(|p| p.size * p.mult).sum::<usize>();
                classes.push(ClassSkeleton::NonNeg { lambda: rho.re.sqrt(), parts });
            } else if rho.re >= -link {
                total += parts.iter().map(|p| p.size * p.mult).sum::<usize>();
                classes.push(ClassSkeleton::NonNeg { lambda: 0.0, parts });
            } else {
                // negative eigenvalues of A conj(A) come in block pairs
                let mut paired = Vec::new();
                for p in &parts {
                    if p.mult % 2 != 0 {
                        return Err(Error::EigenvalueClusterAmbiguous(format!(
                            "negative eigenvalue {:.4} has odd block count at size {}",
                            rho.re, p.size
                        )));
                    }
                    paired.push(Part { size: p.size, mult: p.mult / 2 });
                }
                total += paired.iter().map(|p| 2 * p.size * p.mult).sum::<usize>();
                classes.push(ClassSkeleton::NegPair { mu: (-rho.re).sqrt(), parts: paired });
            }
            consumed[i] = true;
        } else {
            // find the conjugate partner cluster
            let partner = clusters.iter().enumerate().find(|(j, other)| {
                !consumed[*j] && *j != i && (other.center - rho.conj()).norm() <= 10.0 * link
            });
            let Some((j, other)) = partner else {
                return Err(Error::EigenvalueClusterAmbiguous(format!(
                    "no conjugate partner for eigenvalue {rho}"
                )));
            };
            if other.mult != cl.mult {
                return Err(Error::EigenvalueClusterAmbiguous(
                    "conjugate clusters have different multiplicities".into(),
                ));
            }
            let rep = if rho.im > 0.0 { rho } else { rho.conj() };
            let parts = jordan_sizes(&m, rep, cl.mult, ambient, policy)?;
            let partner_parts = jordan_sizes(&m, rep.conj(), cl.mult, ambient, policy)?;
            if parts != partner_parts {
                return Err(Error::EigenvalueClusterAmbiguous(
                    "conjugate clusters have different Jordan structure".into(),
                ));
            }
            let xi = rep.sqrt(); // principal root of Im > 0 has Im > 0
            total += parts.iter().map(|p| 2 * p.size * p.mult).sum::<usize>();
            classes.push(ClassSkeleton::ComplexPair { xi, parts });
            consumed[i] = true;
            consumed[j] = true;
        }
    }
    if total != a.rows() {
        return Err(Error::EigenvalueClusterAmbiguous(format!(
            "class sizes sum to {total}, expected {}",
            a.rows()
        )));
    }
    let has_signed = classes.iter().any(|cl| match cl {
        ClassSkeleton::NonNeg { lambda, parts } => {
            *lambda > 0.0 || parts.iter().any(|p| p.size % 2 == 0)
        }
        _ => false,
    });
    Ok(StructuralClass {
        classes,
        inertia,
        epsilon: if has_signed { EpsilonStatus::Undetermined } else { EpsilonStatus::DeterminedTrivially },
    })
}

/// Result of reducing a pair `(A, B)` to `(A~, I)`.
#[derive(Debug, Clone, Serialize)]
pub struct Reduction {
    pub a_tilde: Mat,
    pub p: Mat,
    pub c: i8,
    /// The sign-flip companion `-A~` (the `c = -1` alternative).
    pub a_tilde_flipped: Mat,
    /// `||P^T B P - I||`.
    pub certificate: f64,
    /// Deviation of `A~` from Hermitian.
    pub hermitian_residual: f64,
}

/// Takagi-reduces `B` to the identity and transports `A` by *-congruence:
/// `A~ = P^* A P` with `P = C^{-1}`, `C^T C = B`.
pub fn reduce_pair_to_identity(a: &Mat, b: &Mat, policy: &TolPolicy) -> Result<Reduction> {
    a.check_finite()?;
    b.check_finite()?;
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::DimensionMismatch("reduction needs matching square matrices".into()));
    }
    let scale = a.norm().max(1.0);
    if a.hermitian_error() > HERM_REL_TOL * scale {
        return Err(Error::NotHermitian(a.hermitian_error() / scale));
    }
    let ct = takagi_factor(b, policy)?;
    let p = ct.inverse()?;
    let a_tilde = &(&p.adjoint() * a) * &p;
    let certificate = (&(&(&p.transpose() * b) * &p) - &Mat::identity(b.rows())).norm();
    let hermitian_residual = a_tilde.hermitian_error();
    if certificate > 1e-9 * (1.0 + b.norm()) {
        return Err(Error::InternalCheck(format!(
            "reduction certificate {certificate:.3e} too large"
        )));
    }
    Ok(Reduction {
        a_tilde_flipped: a_tilde.scale(c(-1.0, 0.0)),
        a_tilde,
        p,
        c: 1,
        certificate,
        hermitian_residual,
    })
}

/// Skeleton of a Hermitian spec in terms of the Jordan structure of
/// `A conj(A)`, for round-trip comparisons.
///
/// Zero-class blocks square down: a nilpotent block of order `alpha`
/// contributes nilpotent `A conj(A)` blocks of sizes `ceil(alpha/2)` and
/// `floor(alpha/2)`. (Their original sizes are pinned by the alternating
/// product ranks, which this classifier does not compute.)
pub fn skeleton_of_spec(spec: &HermSpec) -> Result<Vec<ClassSkeleton>> {
    spec.validate()?;
    Ok(spec
        .classes
        .iter()
        .map(|cl| match cl {
            HermClass::Zero { parts } => {
                let mut counts: std::collections::BTreeMap<usize, usize> = Default::default();
                for p in parts {
                    *counts.entry(p.size.div_ceil(2)).or_default() += p.mult;
                    if p.size / 2 > 0 {
                        *counts.entry(p.size / 2).or_default() += p.mult;
                    }
                }
                ClassSkeleton::NonNeg {
                    lambda: 0.0,
                    parts: counts
                        .into_iter()
                        .rev()
                        .map(|(size, mult)| Part { size, mult })
                        .collect(),
                }
            }
            HermClass::Pos { lambda, parts } => ClassSkeleton::NonNeg {
                lambda: *lambda,
                parts: parts.iter().map(|p| Part { size: p.size, mult: p.mult }).collect(),
            },
            HermClass::NegPair { mu, parts } => ClassSkeleton::NegPair { mu: *mu, parts: parts.clone() },
            HermClass::Complex { xi, parts } => ClassSkeleton::ComplexPair { xi: *xi, parts: parts.clone() },
        })
        .collect())
}

/// Compares two skeletons up to class reordering, with invariants matched to
/// the given absolute tolerance.
pub fn skeletons_match(a: &[ClassSkeleton], b: &[ClassSkeleton], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    'outer: for ca in a {
        for (j, cb) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let ok = match (ca, cb) {
                (
                    ClassSkeleton::NonNeg { lambda: la, parts: pa },
                    ClassSkeleton::NonNeg { lambda: lb, parts: pb },
                ) => (la - lb).abs() <= tol && pa == pb,
                (
                    ClassSkeleton::NegPair { mu: ma, parts: pa },
                    ClassSkeleton::NegPair { mu: mb, parts: pb },
                ) => (ma - mb).abs() <= tol && pa == pb,
                (
                    ClassSkeleton::ComplexPair { xi: xa, parts: pa },
                    ClassSkeleton::ComplexPair { xi: xb, parts: pb },
                ) => {
                    // the class invariant is xi^2 up to conjugation
                    let (sa, sb) = (xa * xa, xb * xb);
                    ((sa - sb).norm() <= tol || (sa - sb.conj()).norm() <= tol) && pa == pb
                }
                _ => false,
            };
            if ok {
                used[j] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Scrambles the assembled normal form by an orthogonal *-congruence and
/// checks that re-classification recovers the skeleton.
pub fn roundtrip_check(spec: &HermSpec, q: &Mat, policy: &TolPolicy) -> Result<bool> {
    let m = spec.assemble()?;
    if q.rows() != m.rows() || !q.is_square() {
        return Err(Error::DimensionMismatch("scrambler must match the spec order".into()));
    }
    let orth = (&(&q.transpose() * q) - &Mat::identity(q.rows())).norm();
    if orth > 1e-8 * (1.0 + q.norm()) {
        return Err(Error::InvalidInput("scrambler is not orthogonal".into()));
    }
    let scrambled = &(&q.adjoint() * &m) * q;
    let got = classify_hermitian(&scrambled, policy)?;
    let want = skeleton_of_spec(spec)?;
    let tol = 1e-5 * (1.0 + m.norm());
    Ok(skeletons_match(&got.classes, &want, tol))
}
