//! The recursive solver for the quasi-diagonal block-Toeplitz equation
//! `B' = F Y^T F B Y` in its four flavors (complex, real, paired-structured,
//! complex-alternating), the closed-form dimension evaluators, and the
//! end-to-end stabilizer parameterizations of the canonical forms.
//!
//! The solver walks the induction ladder of the underlying proof: below-
//! diagonal blocks are free, the leading diagonal coefficients solve
//! congruence equations (with a group chart worth of freedom), and every
//! later coefficient solves a linear equation whose right-hand side only
//! involves earlier unknowns. Each step reads one block cell of the residual,
//! so the code stays close to the derivation and every solved cell is
//! re-checked numerically before moving on.

use serde::Serialize;

use crate::blocks::{build_e, build_p, build_p_quarter};
use crate::error::{Error, Result};
use crate::forms::{HermClass, HermSpec, SymSpec};
use crate::kernels::{takagi_factor, real_sym_signed_factor, Inertia};
use crate::mat::{c, C64, Mat};
use crate::solution_space::{
    antisym_from_params, Field, ParamSlot, SlotShape, SolutionSpace,
};
use crate::sylvester::{paired_transition, u_toeplitz_coeffs};
use crate::toeplitz::{
    build_omega_paired, omega_for_structure, Perm, Structure, ToeplitzKind,
};
use crate::tol::TolPolicy;

/// Which flavor of the block equation is being solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StabCase {
    /// Complex upper-triangular block Toeplitz unknowns.
    I,
    /// Real data, real unknowns.
    Ia,
    /// Paired structured unknowns (the K-class shape), `B' = B`.
    Ib,
    /// Complex-alternating unknowns over real data.
    II,
}

/// Extra data for the paired case.
#[derive(Debug, Clone)]
pub struct IbData {
    pub mu: f64,
    /// Per part: the real Toeplitz coefficients `u_0..u_{beta-1}`.
    pub u_seqs: Vec<Vec<f64>>,
}

/// A concrete instance of the block equation.
#[derive(Debug, Clone)]
pub struct StabProblem {
    pub structure: Structure,
    pub case: StabCase,
    /// Per part `r`: coefficients `B_0^r .. B_{alpha_r-1}^r`.
    pub b: Vec<Vec<Mat>>,
    /// Per part `r`: target coefficients `G_0^r .. G_{alpha_r-1}^r`.
    pub g: Vec<Vec<Mat>>,
    pub ib: Option<IbData>,
}

const SYM_TOL: f64 = 1e-9;

impl StabProblem {
    /// Identity targets: `B = B' = I` (every `B_0^r = I`, higher coefficients
    /// zero).
    pub fn identity(structure: Structure, case: StabCase) -> Result<StabProblem> {
        structure.validate()?;
        let b: Vec<Vec<Mat>> = structure
            .parts
            .iter()
            .map(|p| {
                (0..p.size)
                    .map(|n| if n == 0 { Mat::identity(p.mult) } else { Mat::zeros(p.mult, p.mult) })
                    .collect()
            })
            .collect();
        Ok(StabProblem { structure, case, g: b.clone(), b, ib: None })
    }

    /// Diagonal-sign targets `B_0^r = diag(b_signs_r)`, `G_0^r = diag(g_signs_r)`.
    pub fn signed(
        structure: Structure,
        case: StabCase,
        b_signs: &[Vec<i8>],
        g_signs: &[Vec<i8>],
    ) -> Result<StabProblem> {
        structure.validate()?;
        if b_signs.len() != structure.len() || g_signs.len() != structure.len() {
            return Err(Error::InvalidProblem("one sign vector per part required".into()));
        }
        let build = |signs: &[Vec<i8>]| -> Result<Vec<Vec<Mat>>> {
            structure
                .parts
                .iter()
                .zip(signs)
                .map(|(p, s)| {
                    if s.len() != p.mult {
                        return Err(Error::InvalidProblem("sign count must equal multiplicity".into()));
                    }
                    Ok((0..p.size)
                        .map(|n| {
                            if n == 0 {
                                Mat::from_fn(p.mult, p.mult, |i, j| {
                                    if i == j { c(s[i] as f64, 0.0) } else { c(0.0, 0.0) }
                                })
                            } else {
                                Mat::zeros(p.mult, p.mult)
                            }
                        })
                        .collect())
                })
                .collect()
        };
        Ok(StabProblem { b: build(b_signs)?, g: build(g_signs)?, structure, case, ib: None })
    }

    /// The paired problem of a K-class: parts `(beta_r, n_blocks_r)` with
    /// solver-structure multiplicity `2 * n_blocks_r`, coefficients built from
    /// the `U`-product Toeplitz data.
    pub fn paired(parts: &[(usize, usize)], mu: f64) -> Result<StabProblem> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidProblem("paired case needs mu > 0".into()));
        }
        let structure = Structure::new(parts.iter().map(|&(b, m)| (b, 2 * m)).collect());
        structure.validate()?;
        let mut u_seqs = Vec::new();
        let mut b = Vec::new();
        for &(beta, m) in parts {
            let u = u_toeplitz_coeffs(beta, mu)?;
            let coeffs = ib_coeffs(beta, m, mu, &u);
            u_seqs.push(u);
            b.push(coeffs);
        }
        Ok(StabProblem {
            structure,
            case: StabCase::Ib,
            g: b.clone(),
            b,
            ib: Some(IbData { mu, u_seqs }),
        })
    }

    fn validate(&self) -> Result<()> {
        self.structure.validate()?;
        let n = self.structure.len();
        if self.b.len() != n || self.g.len() != n {
            return Err(Error::InvalidProblem("one coefficient list per part required".into()));
        }
        for (r, p) in self.structure.parts.iter().enumerate() {
            for coeffs in [&self.b[r], &self.g[r]] {
                if coeffs.len() != p.size {
                    return Err(Error::InvalidProblem(format!(
                        "part {} needs {} coefficients",
                        r + 1,
                        p.size
                    )));
                }
                for m in coeffs {
                    m.check_finite()?;
                    if m.rows() != p.mult || m.cols() != p.mult {
                        return Err(Error::InvalidProblem("coefficient shape mismatch".into()));
                    }
                    let scale = 1.0 + m.norm();
                    if m.symmetry_error() > SYM_TOL * scale {
                        return Err(Error::InvalidProblem("coefficients must be symmetric".into()));
                    }
                    if matches!(self.case, StabCase::Ia | StabCase::II) {
                        let max_im =
                            m.as_dmatrix().iter().map(|e| e.im.abs()).fold(0.0, f64::max);
                        if max_im > SYM_TOL * scale {
                            return Err(Error::InvalidProblem(
                                "this case needs real coefficients".into(),
                            ));
                        }
                    }
                }
            }
        }
        if self.case == StabCase::Ib {
            let ib = self
                .ib
                .as_ref()
                .ok_or_else(|| Error::InvalidProblem("paired case needs mu and u data".into()))?;
            if ib.u_seqs.len() != n {
                return Err(Error::InvalidProblem("one u-sequence per part required".into()));
            }
            for (r, p) in self.structure.parts.iter().enumerate() {
                if p.mult % 2 != 0 {
                    return Err(Error::OddMultiplicity(format!(
                        "paired case needs even multiplicities, part {} has {}",
                        r + 1,
                        p.mult
                    )));
                }
                if ib.u_seqs[r].len() != p.size {
                    return Err(Error::InvalidProblem("u-sequence length mismatch".into()));
                }
                let expect = ib_coeffs(p.size, p.mult / 2, ib.mu, &ib.u_seqs[r]);
                for (nn, (have, want)) in self.b[r].iter().zip(&expect).enumerate() {
                    if (have - want).norm() > 1e-9 * (1.0 + want.norm()) {
                        return Err(Error::InvalidProblem(format!(
                            "B coefficient {nn} of part {} is not of the paired form",
                            r + 1
                        )));
                    }
                }
                for (have, want) in self.g[r].iter().zip(&self.b[r]) {
                    if (have - want).norm() > 1e-9 * (1.0 + want.norm()) {
                        return Err(Error::InvalidProblem(
                            "paired case is only supported for B' = B".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `B_n` blocks of the paired form: `B_0 = u_0 (-mu^2 I + I)`,
/// `B_n = (-mu^2 u_n + u_{n-1}) I + u_n I` on half-blocks of size `m`.
fn ib_coeffs(beta: usize, m: usize, mu: f64, u: &[f64]) -> Vec<Mat> {
    (0..beta)
        .map(|n| {
            let upper = -mu * mu * u[n] + if n > 0 { u[n - 1] } else { 0.0 };
            let mut b = Mat::zeros(2 * m, 2 * m);
            for i in 0..m {
                b[(i, i)] = c(upper, 0.0);
                b[(m + i, m + i)] = c(u[n], 0.0);
            }
            b
        })
        .collect()
}

/// How one unknown was produced, for the audit ledger.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepKind {
    FreeBelowDiagonal,
    OrthogonalFactorChart { field: Field },
    IndefiniteOrthogonalChart { plus: usize, minus: usize },
    IndefiniteUnitaryChart { plus: usize, minus: usize },
    PairedOrthogonalChart,
    UniqueLinearSolve,
    SymmetricSolveWithAntisymmetricSlot,
    HermitianSolveWithSkewHermitianSlot,
    PairedSymmetricSolve,
}

/// One ledger row: which unknown, solved by which equation type, adding how
/// many real dimensions.
#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub step: String,
    pub unknown: String,
    pub part_row: usize,
    pub part_col: usize,
    pub coeff: usize,
    #[serde(flatten)]
    pub kind: StepKind,
    pub realdim: usize,
}

/// Inertia mismatch that makes a problem unsolvable.
#[derive(Debug, Clone, Serialize)]
pub struct InfeasibilityWitness {
    pub part: usize,
    pub b_inertia: Inertia,
    pub g_inertia: Inertia,
}

/// Outcome of `solve_stab`.
pub struct StabSolution {
    pub feasible: bool,
    pub witness: Option<InfeasibilityWitness>,
    /// Chart of the solution manifold over the block matrix `Y`.
    pub space: Option<SolutionSpace>,
    pub ledger: Vec<StepRecord>,
    pub base_residual: f64,
    pub b_norm: f64,
}

const COND_LIMIT: f64 = 1e12;

fn guard_condition(m: &Mat, what: &str) -> Result<()> {
    let cond = m.condition_estimate();
    if !(cond < COND_LIMIT) {
        return Err(Error::RankAmbiguous { gap: cond, required: COND_LIMIT });
    }
    let _ = what;
    Ok(())
}

/// Per-part leading-coefficient factorization data.
enum Step00 {
    /// `A_0 = Hb^{-1} W Hg`, `W` complex orthogonal.
    Complex { hb_inv: Mat, hg: Mat },
    /// Real data, `W = exp(J K)` real `J`-orthogonal.
    RealIndef { hb_inv: Mat, hg: Mat, j_signs: Vec<i8> },
    /// Real data in the alternating case with even size: `W` in `U(p, q)`.
    StarIndef { hb_inv: Mat, hg: Mat, j_signs: Vec<i8> },
    /// Paired chart conjugated by `N = (i mu I) + I`.
    Paired { n_mat: Mat, n_inv: Mat },
}

struct Prep {
    step00: Vec<Step00>,
    bmat: Mat,
    gmat: Mat,
    fmat: Mat,
    b_norm: f64,
    offsets: Vec<usize>,
    order: usize,
}

fn signs_to_inertia(signs: &[i8]) -> Inertia {
    Inertia {
        n_plus: signs.iter().filter(|&&s| s == 1).count(),
        n_minus: signs.iter().filter(|&&s| s == -1).count(),
        n_zero: 0,
    }
}

enum PrepOutcome {
    Ready(Prep),
    Infeasible(InfeasibilityWitness),
}

fn prepare(problem: &StabProblem, policy: &TolPolicy) -> Result<PrepOutcome> {
    problem.validate()?;
    let st = &problem.structure;
    let n = st.len();
    let mut step00 = Vec::with_capacity(n);
    for r in 0..n {
        let alpha = st.parts[r].size;
        let b0 = &problem.b[r][0];
        let g0 = &problem.g[r][0];
        guard_condition(b0, "B0")?;
        guard_condition(g0, "G0")?;
        let entry = match problem.case {
            StabCase::I => Step00::Complex {
                hb_inv: takagi_factor(b0, policy)?.inverse()?,
                hg: takagi_factor(g0, policy)?,
            },
            StabCase::Ia => {
                let (hb, jb) = real_sym_signed_factor(b0, policy)?;
                let (hg, jg) = real_sym_signed_factor(g0, policy)?;
                if jb != jg {
                    return Ok(PrepOutcome::Infeasible(InfeasibilityWitness {
                        part: r + 1,
                        b_inertia: signs_to_inertia(&jb),
                        g_inertia: signs_to_inertia(&jg),
                    }));
                }
                Step00::RealIndef { hb_inv: hb.inverse()?, hg, j_signs: jb }
            }
            StabCase::II => {
                if alpha % 2 == 1 {
                    Step00::Complex {
                        hb_inv: takagi_factor(b0, policy)?.inverse()?,
                        hg: takagi_factor(g0, policy)?,
                    }
                } else {
                    let (hb, jb) = real_sym_signed_factor(b0, policy)?;
                    let (hg, jg) = real_sym_signed_factor(g0, policy)?;
                    if jb != jg {
                        return Ok(PrepOutcome::Infeasible(InfeasibilityWitness {
                            part: r + 1,
                            b_inertia: signs_to_inertia(&jb),
                            g_inertia: signs_to_inertia(&jg),
                        }));
                    }
                    Step00::StarIndef { hb_inv: hb.inverse()?, hg, j_signs: jb }
                }
            }
            StabCase::Ib => {
                let mu = problem.ib.as_ref().unwrap().mu;
                let half = st.parts[r].mult / 2;
                let mut nm = Mat::zeros(2 * half, 2 * half);
                for i in 0..half {
                    nm[(i, i)] = c(0.0, mu);
                    nm[(half + i, half + i)] = c(1.0, 0.0);
                }
                let n_inv = nm.inverse()?;
                Step00::Paired { n_mat: nm, n_inv }
            }
        };
        step00.push(entry);
    }
    // dense operands
    let alternating = problem.case == StabCase::II;
    let bmat = quasi_diagonal(st, &problem.b, alternating)?;
    let gmat = quasi_diagonal(st, &problem.g, alternating)?;
    let e_blocks: Vec<Mat> = st
        .parts
        .iter()
        .map(|p| {
            let mut e = Mat::zeros(p.size * p.mult, p.size * p.mult);
            for i in 0..p.size {
                for k in 0..p.mult {
                    e[(i * p.mult + k, (p.size - 1 - i) * p.mult + k)] = c(1.0, 0.0);
                }
            }
            e
        })
        .collect();
    let e_refs: Vec<&Mat> = e_blocks.iter().collect();
    let fmat = Mat::direct_sum(&e_refs);
    let mut offsets = Vec::with_capacity(n);
    let mut off = 0;
    for p in &st.parts {
        offsets.push(off);
        off += p.size * p.mult;
    }
    let b_norm = bmat.norm();
    Ok(PrepOutcome::Ready(Prep { step00, bmat, gmat, fmat, b_norm, offsets, order: off }))
}

/// Realizes the quasi-diagonal operand `direct-sum of T(B_0^r, ...)`.
fn quasi_diagonal(st: &Structure, coeffs: &[Vec<Mat>], alternating: bool) -> Result<Mat> {
    let blocks: Vec<Mat> = st
        .parts
        .iter()
        .zip(coeffs)
        .map(|(_, cs)| {
            crate::toeplitz::ToeplitzCoeffs {
                kind: if alternating { ToeplitzKind::Alternating } else { ToeplitzKind::Plain },
                coeffs: cs.clone(),
            }
            .realize()
        })
        .collect::<Result<_>>()?;
    let refs: Vec<&Mat> = blocks.iter().collect();
    Ok(Mat::direct_sum(&refs))
}

/// Parameter cursor shared by the recording and evaluation passes.
struct Cursor<'a> {
    values: Option<&'a [f64]>,
    pos: usize,
    slots: Vec<ParamSlot>,
    ledger: Vec<StepRecord>,
}

impl<'a> Cursor<'a> {
    fn new(values: Option<&'a [f64]>) -> Self {
        Cursor { values, pos: 0, slots: vec![], ledger: vec![] }
    }

    fn take(&mut self, name: &str, shape: SlotShape) -> Result<Vec<f64>> {
        let d = shape.realdim();
        let vals = match self.values {
            Some(v) => {
                if self.pos + d > v.len() {
                    return Err(Error::DimensionMismatch("parameter vector too short".into()));
                }
                v[self.pos..self.pos + d].to_vec()
            }
            None => vec![0.0; d],
        };
        self.pos += d;
        if self.values.is_none() {
            self.slots.push(ParamSlot::new(name.to_string(), shape));
        }
        Ok(vals)
    }

    fn log(&mut self, rec: StepRecord) {
        if self.values.is_none() {
            self.ledger.push(rec);
        }
    }
}

/// Coefficient store for the unknown `Y`: `co[r][s][n]`.
type CoeffStore = Vec<Vec<Vec<Option<Mat>>>>;

struct Ladder<'a> {
    problem: &'a StabProblem,
    prep: &'a Prep,
}

impl Ladder<'_> {
    fn n(&self) -> usize {
        self.problem.structure.len()
    }

    fn alpha(&self, r: usize) -> usize {
        self.problem.structure.parts[r].size
    }

    fn mult(&self, r: usize) -> usize {
        self.problem.structure.parts[r].mult
    }

    fn b_rs(&self, r: usize, s: usize) -> usize {
        self.alpha(r).min(self.alpha(s))
    }

    fn empty_store(&self) -> CoeffStore {
        (0..self.n())
            .map(|r| (0..self.n()).map(|s| vec![None; self.b_rs(r, s)]).collect())
            .collect()
    }

    /// Dense `Y` with missing coefficients as zero blocks.
    fn materialize(&self, co: &CoeffStore) -> Mat {
        let q = self.prep.order;
        let mut y = Mat::zeros(q, q);
        let alternating = self.problem.case == StabCase::II;
        for r in 0..self.n() {
            for s in 0..self.n() {
                let (ar, as_) = (self.alpha(r), self.alpha(s));
                let b = ar.min(as_);
                // the Toeplitz body occupies the top rows (ar >= as_) or the
                // right columns (ar < as_)
                let col_shift = as_.saturating_sub(ar);
                for (nn, opt) in co[r][s].iter().enumerate() {
                    let Some(a) = opt else { continue };
                    for i in 0..b - nn {
                        let j = i + nn;
                        let cell = if alternating && i % 2 == 1 { a.conj() } else { a.clone() };
                        let row0 = self.prep.offsets[r] + i * self.mult(r);
                        let col0 = self.prep.offsets[s] + (j + col_shift) * self.mult(s);
                        y.set_block(row0, col0, &cell);
                    }
                }
            }
        }
        y
    }

    /// Left-hand side `F Y^T F B Y`.
    fn lhs(&self, y: &Mat) -> Mat {
        let f = &self.prep.fmat;
        let yt = y.transpose();
        &(&(&(f * &yt) * f) * &self.prep.bmat) * y
    }

    /// Cell `(1, j+1)` of grid block `(r, s)` of a dense operand.
    fn cell(&self, m: &Mat, r: usize, s: usize, j: usize) -> Mat {
        let row0 = self.prep.offsets[r];
        let col0 = self.prep.offsets[s] + j * self.mult(s);
        m.block(row0, col0, self.mult(r), self.mult(s))
    }

    fn target_cell(&self, r: usize, s: usize, j: usize) -> Mat {
        if r == s {
            self.problem.g[r][j].clone()
        } else {
            Mat::zeros(self.mult(r), self.mult(s))
        }
    }

    /// The left solve operand `D = B_0^r conj^{c1}(A_0^{rr})` with `c1` set
    /// for even-size parts of the alternating case.
    fn solve_operand(&self, co: &CoeffStore, r: usize) -> Mat {
        let a0 = co[r][r][0].as_ref().expect("leading coefficient solved first");
        let a0c = if self.problem.case == StabCase::II && self.alpha(r) % 2 == 0 {
            a0.conj()
        } else {
            a0.clone()
        };
        &self.problem.b[r][0] * &a0c
    }

    fn run(&self, values: Option<&[f64]>) -> Result<(Mat, Vec<ParamSlot>, Vec<StepRecord>, f64)> {
        let mut cur = Cursor::new(values);
        let mut co = self.empty_store();
        let nparts = self.n();
        let mu = self.problem.ib.as_ref().map(|d| d.mu).unwrap_or(0.0);

        // Leading diagonal coefficients: congruence charts.
        for r in 0..nparts {
            let m = self.mult(r);
            let name = format!("A_0^{{{},{}}}", r + 1, r + 1);
            let (a0, kind, dim) = match &self.prep.step00[r] {
                Step00::Complex { hb_inv, hg } => {
                    let shape = SlotShape::OrthogonalChart { n: m, field: Field::Complex };
                    let dim = shape.realdim();
                    let p = cur.take(&name, shape)?;
                    let w = antisym_from_params(m, Field::Complex, &p).expm();
                    (
                        &(hb_inv * &w) * hg,
                        StepKind::OrthogonalFactorChart { field: Field::Complex },
                        dim,
                    )
                }
                Step00::RealIndef { hb_inv, hg, j_signs } => {
                    let shape = SlotShape::OrthogonalChart { n: m, field: Field::Real };
                    let dim = shape.realdim();
                    let p = cur.take(&name, shape)?;
                    let k = antisym_from_params(m, Field::Real, &p);
                    let jk = Mat::from_fn(m, m, |i, j| k[(i, j)] * c(j_signs[i] as f64, 0.0));
                    let w = jk.expm();
                    let inert = signs_to_inertia(j_signs);
                    (
                        &(hb_inv * &w) * hg,
                        StepKind::IndefiniteOrthogonalChart { plus: inert.n_plus, minus: inert.n_minus },
                        dim,
                    )
                }
                Step00::StarIndef { hb_inv, hg, j_signs } => {
                    let shape = SlotShape::IndefiniteUnitaryChart { n: m };
                    let dim = shape.realdim();
                    let p = cur.take(&name, shape)?;
                    let s = crate::solution_space::materialize_simple(
                        &SlotShape::SkewHermitian { n: m },
                        &p,
                    );
                    let js = Mat::from_fn(m, m, |i, j| s[(i, j)] * c(j_signs[i] as f64, 0.0));
                    let w = js.expm();
                    let inert = signs_to_inertia(j_signs);
                    (
                        &(hb_inv * &w) * hg,
                        StepKind::IndefiniteUnitaryChart { plus: inert.n_plus, minus: inert.n_minus },
                        dim,
                    )
                }
                Step00::Paired { n_mat, n_inv } => {
                    let half = m / 2;
                    let shape = SlotShape::PairedOrthogonalChart { half };
                    let dim = shape.realdim();
                    let p = cur.take(&name, shape)?;
                    let k = paired_orthogonal_generator(half, &p);
                    let w = k.expm();
                    (&(n_inv * &w) * n_mat, StepKind::PairedOrthogonalChart, dim)
                }
            };
            co[r][r][0] = Some(a0);
            cur.log(StepRecord {
                step: "0.0".into(),
                unknown: name,
                part_row: r + 1,
                part_col: r + 1,
                coeff: 0,
                kind,
                realdim: dim,
            });
        }

        // Below-diagonal blocks are free.
        for r in 1..nparts {
            for s in 0..r {
                let b = self.b_rs(r, s);
                let (mr, ms) = (self.mult(r), self.mult(s));
                let mut w_prev: Option<Mat> = None;
                for nn in 0..b {
                    let name = format!("A_{}^{{{},{}}}", nn, r + 1, s + 1);
                    let a = match self.problem.case {
                        StabCase::I | StabCase::II => {
                            let shape = SlotShape::Matrix { rows: mr, cols: ms, field: Field::Complex };
                            let p = cur.take(&name, shape.clone())?;
                            cur.log(free_record(&name, r, s, nn, shape.realdim()));
                            crate::solution_space::materialize_simple(&shape, &p)
                        }
                        StabCase::Ia => {
                            let shape = SlotShape::Matrix { rows: mr, cols: ms, field: Field::Real };
                            let p = cur.take(&name, shape.clone())?;
                            cur.log(free_record(&name, r, s, nn, shape.realdim()));
                            crate::solution_space::materialize_simple(&shape, &p)
                        }
                        StabCase::Ib => {
                            let (hr, hs) = (mr / 2, ms / 2);
                            let shape = SlotShape::PairedMatrix { half_rows: hr, half_cols: hs };
                            let p = cur.take(&name, shape.clone())?;
                            cur.log(free_record(&name, r, s, nn, shape.realdim()));
                            let v = crate::solution_space::materialize_simple(
                                &SlotShape::Matrix { rows: hr, cols: hs, field: Field::Complex },
                                &p[..2 * hr * hs],
                            );
                            let w = crate::solution_space::materialize_simple(
                                &SlotShape::Matrix { rows: hr, cols: hs, field: Field::Complex },
                                &p[2 * hr * hs..],
                            );
                            let a = paired_assemble(&v, &w, w_prev.as_ref(), mu);
                            w_prev = Some(w);
                            a
                        }
                    };
                    co[r][s][nn] = Some(a);
                }
            }
        }

        // Remaining coefficients in ladder order.
        let alpha_max = self.alpha(0);
        let cell_tol = |scale: f64| 1e-7 * (1.0 + scale);
        for j in 0..alpha_max {
            for p in 0..nparts {
                for r in 0..nparts - p {
                    let s = r + p;
                    if p == 0 && j == 0 {
                        continue;
                    }
                    if j >= self.b_rs(r, s) {
                        continue;
                    }
                    let name = format!("A_{}^{{{},{}}}", j, r + 1, s + 1);
                    let y0 = self.materialize(&co);
                    let e0 = self.cell(&self.lhs(&y0), r, s, j);
                    let target = self.target_cell(r, s, j);
                    let rhs = &target - &e0;
                    let d = self.solve_operand(&co, r);
                    guard_condition(&d, "step operand")?;
                    let dt = d.transpose();
                    let scale = self.prep.b_norm * (1.0 + y0.norm()) * (1.0 + y0.norm());
                    let a = if p >= 1 {
                        // unique: D^T X = rhs
                        let x = dt.lu_solve(&rhs)?;
                        cur.log(StepRecord {
                            step: format!("{j}.{p}"),
                            unknown: name.clone(),
                            part_row: r + 1,
                            part_col: s + 1,
                            coeff: j,
                            kind: StepKind::UniqueLinearSolve,
                            realdim: 0,
                        });
                        if self.problem.case == StabCase::Ib {
                            let w_prev = if j == 0 {
                                Mat::zeros(self.mult(r) / 2, self.mult(s) / 2)
                            } else {
                                paired_w(co[r][s][j - 1].as_ref().unwrap())
                            };
                            check_paired_shifted(&x, &w_prev, mu, scale)?;
                        }
                        x
                    } else {
                        // diagonal: a congruence-type solve with a free slot
                        let m = self.mult(r);
                        let star = self.problem.case == StabCase::II && (self.alpha(r) - j) % 2 == 0;
                        if star {
                            let herm_err = rhs.hermitian_error();
                            if herm_err > 1e-10 * (1.0 + scale) {
                                return Err(Error::InternalCheck(format!(
                                    "step {j}.0 right-hand side not Hermitian: {herm_err:.3e}"
                                )));
                            }
                            let shape = SlotShape::SkewHermitian { n: m };
                            let dim = shape.realdim();
                            let pvals = cur.take(&name, shape.clone())?;
                            let cmat = crate::solution_space::materialize_simple(&shape, &pvals);
                            let z = &rhs.scale(c(0.5, 0.0)) + &cmat;
                            cur.log(StepRecord {
                                step: format!("{j}.0"),
                                unknown: name.clone(),
                                part_row: r + 1,
                                part_col: s + 1,
                                coeff: j,
                                kind: StepKind::HermitianSolveWithSkewHermitianSlot,
                                realdim: dim,
                            });
                            dt.lu_solve(&z)?
                        } else {
                            let sym_err = rhs.symmetry_error();
                            if sym_err > 1e-10 * (1.0 + scale) {
                                return Err(Error::InternalCheck(format!(
                                    "step {j}.0 right-hand side not symmetric: {sym_err:.3e}"
                                )));
                            }
                            match self.problem.case {
                                StabCase::Ib => {
                                    let half = m / 2;
                                    let w_prev = paired_w(co[r][r][j - 1].as_ref().unwrap());
                                    let f = paired_shift(&w_prev, m);
                                    let rhs2 = &rhs - &(&(&dt * &f) + &(&f.transpose() * &d));
                                    let shape = SlotShape::PairedAntisymmetric { half };
                                    let dim = shape.realdim();
                                    let pvals = cur.take(&name, shape.clone())?;
                                    let cmat = paired_antisym(half, mu, &pvals);
                                    let z = &rhs2.scale(c(0.5, 0.0)) + &cmat;
                                    let x = &dt.lu_solve(&z)? + &f;
                                    cur.log(StepRecord {
                                        step: format!("{j}.0"),
                                        unknown: name.clone(),
                                        part_row: r + 1,
                                        part_col: s + 1,
                                        coeff: j,
                                        kind: StepKind::PairedSymmetricSolve,
                                        realdim: dim,
                                    });
                                    check_paired_shifted(&x, &w_prev, mu, scale)?;
                                    x
                                }
                                _ => {
                                    let field = if self.problem.case == StabCase::Ia {
                                        Field::Real
                                    } else {
                                        Field::Complex
                                    };
                                    let shape = SlotShape::Antisymmetric { n: m, field };
                                    let dim = shape.realdim();
                                    let pvals = cur.take(&name, shape.clone())?;
                                    let cmat = antisym_from_params(m, field, &pvals);
                                    let z = &rhs.scale(c(0.5, 0.0)) + &cmat;
                                    cur.log(StepRecord {
                                        step: format!("{j}.0"),
                                        unknown: name.clone(),
                                        part_row: r + 1,
                                        part_col: s + 1,
                                        coeff: j,
                                        kind: StepKind::SymmetricSolveWithAntisymmetricSlot,
                                        realdim: dim,
                                    });
                                    dt.lu_solve(&z)?
                                }
                            }
                        }
                    };
                    co[r][s][j] = Some(a);
                    // the solved cell must now match its target
                    let y1 = self.materialize(&co);
                    let achieved = self.cell(&self.lhs(&y1), r, s, j);
                    let miss = (&achieved - &target).norm();
                    if miss > cell_tol(scale) {
                        return Err(Error::InternalCheck(format!(
                            "step {j}.{p} cell residual {miss:.3e} after solve"
                        )));
                    }
                }
            }
        }

        let y = self.materialize(&co);
        let residual = (&self.lhs(&y) - &self.prep.gmat).norm();
        Ok((y, cur.slots, cur.ledger, residual))
    }
}

fn free_record(name: &str, r: usize, s: usize, nn: usize, dim: usize) -> StepRecord {
    StepRecord {
        step: "a.a".into(),
        unknown: name.to_string(),
        part_row: r + 1,
        part_col: s + 1,
        coeff: nn,
        kind: StepKind::FreeBelowDiagonal,
        realdim: dim,
    }
}

/// `[[A, B],[-conj B, conj A]]` with `A` antisymmetric complex and `B`
/// Hermitian: the Lie algebra of the structured orthogonal group.
fn paired_orthogonal_generator(half: usize, params: &[f64]) -> Mat {
    let na = half * (half - 1);
    let a = antisym_from_params(half, Field::Complex, &params[..na]);
    let b = hermitian_from_params(half, &params[na..]);
    Mat::from_quadrants(&a, &b, &b.conj().scale(c(-1.0, 0.0)), &a.conj())
}

fn hermitian_from_params(n: usize, params: &[f64]) -> Mat {
    assert_eq!(params.len(), n * n);
    let mut m = Mat::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        m[(i, i)] = c(params[k], 0.0);
        k += 1;
    }
    for i in 0..n {
        for j in i + 1..n {
            let z = c(params[k], params[k + 1]);
            k += 2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// `[[-mu^2 V, -mu^2 W],[-mu^2 conj W, conj V]]` with `V` antisymmetric
/// complex and `W` skew-Hermitian: the structured antisymmetric slot.
fn paired_antisym(half: usize, mu: f64, params: &[f64]) -> Mat {
    let nv = half * (half - 1);
    let v = antisym_from_params(half, Field::Complex, &params[..nv]);
    let w = crate::solution_space::materialize_simple(&SlotShape::SkewHermitian { n: half }, &params[nv..]);
    let m2 = c(-mu * mu, 0.0);
    Mat::from_quadrants(&v.scale(m2), &w.scale(m2), &w.conj().scale(m2), &v.conj())
}

/// `[[V, W],[-mu^2 conj W + conj W_prev, conj V]]`.
fn paired_assemble(v: &Mat, w: &Mat, w_prev: Option<&Mat>, mu: f64) -> Mat {
    let mut bl = w.conj().scale(c(-mu * mu, 0.0));
    if let Some(wp) = w_prev {
        bl = &bl + &wp.conj();
    }
    Mat::from_quadrants(v, w, &bl, &v.conj())
}

/// Top-right quadrant of a paired block.
fn paired_w(a: &Mat) -> Mat {
    let (hr, hc) = (a.rows() / 2, a.cols() / 2);
    a.block(0, hc, hr, hc)
}

fn paired_shift(w_prev: &Mat, rows: usize) -> Mat {
    let (hr, hc) = (w_prev.rows(), w_prev.cols());
    let mut f = Mat::zeros(rows, 2 * hc);
    f.set_block(rows / 2, 0, &w_prev.conj());
    let _ = hr;
    f
}

/// Asserts that a solved paired-case block has the structured shifted form.
fn check_paired_shifted(x: &Mat, w_prev: &Mat, mu: f64, scale: f64) -> Result<()> {
    let (hr, hc) = (x.rows() / 2, x.cols() / 2);
    let v = x.block(0, 0, hr, hc);
    let w = x.block(0, hc, hr, hc);
    let rebuilt = paired_assemble(&v, &w, Some(w_prev), mu);
    let err = (x - &rebuilt).norm();
    if err > 1e-7 * (1.0 + scale) {
        return Err(Error::InternalCheck(format!(
            "paired-case block left the structured form: {err:.3e}"
        )));
    }
    Ok(())
}

/// Solves the block equation, returning the chart, audit ledger and
/// residual, or an inertia witness when no solution exists.
pub fn solve_stab(problem: &StabProblem, policy: &TolPolicy) -> Result<StabSolution> {
    let prep = match prepare(problem, policy)? {
        PrepOutcome::Infeasible(w) => {
            return Ok(StabSolution {
                feasible: false,
                witness: Some(w),
                space: None,
                ledger: vec![],
                base_residual: f64::NAN,
                b_norm: f64::NAN,
            })
        }
        PrepOutcome::Ready(p) => p,
    };
    let ladder = Ladder { problem, prep: &prep };
    let (y, slots, ledger, residual) = ladder.run(None)?;
    let b_norm = prep.b_norm;
    if residual > 1e-9 * b_norm.max(1.0) {
        return Err(Error::InternalCheck(format!(
            "base-point residual {residual:.3e} exceeds 1e-9 * ||B||"
        )));
    }
    let _ = y;
    let problem = problem.clone();
    let space = SolutionSpace::new(
        slots,
        Box::new(move |params| {
            let prep = match prepare(&problem, &TolPolicy::default())? {
                PrepOutcome::Ready(p) => p,
                PrepOutcome::Infeasible(_) => {
                    return Err(Error::InvalidProblem("space of an infeasible problem".into()))
                }
            };
            let ladder = Ladder { problem: &problem, prep: &prep };
            let (y, _, _, resid) = ladder.run(Some(params))?;
            let tol = 1e-9 * prep.b_norm.max(1.0) * (1.0 + y.norm()) * (1.0 + y.norm());
            if resid > tol {
                return Err(Error::InternalCheck(format!(
                    "sampled-point residual {resid:.3e} exceeds tolerance"
                )));
            }
            Ok(y)
        }),
    )?;
    Ok(StabSolution {
        feasible: true,
        witness: None,
        space: Some(space),
        ledger,
        base_residual: residual,
        b_norm,
    })
}

/// Complex dimension of the case-I solution manifold:
/// `sum_r alpha_r m_r ((m_r - 1)/2 + sum_{s<r} m_s)`, exact.
pub fn dim_case_i(st: &Structure) -> Result<u64> {
    st.validate()?;
    let mut doubled: u64 = 0;
    let mut prefix: u64 = 0;
    for p in &st.parts {
        let (a, m) = (p.size as u64, p.mult as u64);
        doubled += a * m * (m - 1 + 2 * prefix);
        prefix += m;
    }
    debug_assert!(doubled % 2 == 0);
    Ok(doubled / 2)
}

/// The published closed form of the alternating case (real dimension).
/// Known to disagree with the realized solver dimension on some inputs; the
/// discrepancy machinery compares it against the oracle.
pub fn dim_case_ii(st: &Structure) -> Result<i64> {
    st.validate()?;
    let mut doubled: i64 = 0;
    let mut prefix: i64 = 0;
    for p in &st.parts {
        let (a, m) = (p.size as i64, p.mult as i64);
        if a % 2 == 0 {
            doubled += 3 * m * a;
        } else {
            doubled -= m * (a + 1);
        }
        doubled += 4 * a * m * (m + 2 * prefix);
        prefix += m;
    }
    debug_assert!(doubled % 2 == 0);
    Ok(doubled / 2)
}

/// The published paired-case lower bound
/// `sum_r m' (4 a m' - a - 2 m' + 8 a sum_{s<r} m'_s)` with `m' = m/2`.
pub fn dim_case_ib(st: &Structure) -> Result<i64> {
    st.validate()?;
    let mut total: i64 = 0;
    let mut prefix: i64 = 0;
    for p in &st.parts {
        if p.mult % 2 != 0 {
            return Err(Error::OddMultiplicity(format!(
                "paired dimension needs even multiplicities, got {}",
                p.mult
            )));
        }
        let (a, mp) = (p.size as i64, (p.mult / 2) as i64);
        total += mp * (4 * a * mp - a - 2 * mp + 8 * a * prefix);
        prefix += mp;
    }
    Ok(total)
}

/// Ledger and chart of one eigenvalue class of a stabilizer.
#[derive(Debug, Clone, Serialize)]
pub struct ClassStabReport {
    pub label: String,
    pub realdim: usize,
    pub base_residual: f64,
    pub ledger: Vec<StepRecord>,
}

/// A parameterized stabilizer: per-class audit reports plus the assembled
/// chart of orthogonal stabilizer elements.
pub struct StabilizerSpace {
    pub classes: Vec<ClassStabReport>,
    pub space: SolutionSpace,
}

fn class_structure(parts: &[(usize, usize)]) -> Structure {
    Structure::new(parts.to_vec())
}

/// Stabilizer of the assembled symmetric normal form under orthogonal
/// similarity.
pub fn stabilizer_sym(spec: &SymSpec, policy: &TolPolicy) -> Result<StabilizerSpace> {
    spec.validate()?;
    let mut reports = Vec::new();
    let mut spaces = Vec::new();
    for (ci, cl) in spec.classes.iter().enumerate() {
        let parts: Vec<(usize, usize)> = cl.parts.iter().map(|p| (p.size, p.mult)).collect();
        let st = class_structure(&parts);
        let problem = StabProblem::identity(st.clone(), StabCase::I)?;
        let sol = solve_stab(&problem, policy)?;
        let space = sol.space.expect("identity targets are always feasible");
        // Y = Omega Ycal Omega^T, Q = P Y P^{-1}
        let omega = omega_for_structure(&st).to_mat();
        let p_blocks: Vec<Mat> = cl
            .parts
            .iter()
            .flat_map(|p| std::iter::repeat_with(move || build_p(p.size)).take(p.mult))
            .collect();
        let p_refs: Vec<&Mat> = p_blocks.iter().collect();
        let pfull = Mat::direct_sum(&p_refs);
        let left = &pfull * &omega;
        let right = &omega.transpose() * &pfull.inverse()?;
        let qspace = space.sandwich(left, right)?;
        reports.push(ClassStabReport {
            label: format!("class {} (lambda = {})", ci + 1, cl.eigenvalue),
            realdim: qspace.realdim(),
            base_residual: sol.base_residual,
            ledger: sol.ledger,
        });
        spaces.push(qspace);
    }
    Ok(StabilizerSpace { classes: reports, space: SolutionSpace::direct_sum(spaces)? })
}

fn sign_phase(sign: i8) -> C64 {
    if sign == 1 {
        c(1.0, 0.0)
    } else {
        c(0.0, 1.0)
    }
}

/// Stabilizer of the assembled Hermitian normal form under orthogonal
/// *-conjugation.
pub fn stabilizer_herm(spec: &HermSpec, policy: &TolPolicy) -> Result<StabilizerSpace> {
    spec.validate()?;
    let mut reports = Vec::new();
    let mut spaces = Vec::new();
    for (ci, cl) in spec.classes.iter().enumerate() {
        let (qspace, report) = herm_class_stabilizer(ci, cl, policy)?;
        reports.push(report);
        spaces.push(qspace);
    }
    Ok(StabilizerSpace { classes: reports, space: SolutionSpace::direct_sum(spaces)? })
}

fn herm_class_stabilizer(
    ci: usize,
    cl: &HermClass,
    policy: &TolPolicy,
) -> Result<(SolutionSpace, ClassStabReport)> {
    match cl {
        HermClass::Zero { parts } | HermClass::Pos { parts, .. } => {
            let case = match cl {
                HermClass::Pos { .. } => StabCase::Ia,
                _ => StabCase::II,
            };
            let st = class_structure(&parts.iter().map(|p| (p.size, p.mult)).collect::<Vec<_>>());
            let signs: Vec<Vec<i8>> = parts.iter().map(|p| p.signs.clone()).collect();
            let problem = StabProblem::signed(st.clone(), case, &signs, &signs)?;
            let sol = solve_stab(&problem, policy)?;
            let space = sol.space.expect("equal sign patterns are always feasible");
            let omega = omega_for_structure(&st).to_mat();
            let mut p_blocks = Vec::new();
            let mut s_blocks = Vec::new();
            for p in parts {
                for &sg in &p.signs {
                    p_blocks.push(build_p_quarter(p.size));
                    s_blocks.push(Mat::identity(p.size).scale(sign_phase(sg)));
                }
            }
            let prefs: Vec<&Mat> = p_blocks.iter().collect();
            let srefs: Vec<&Mat> = s_blocks.iter().collect();
            let pfull = Mat::direct_sum(&prefs);
            let sfull = Mat::direct_sum(&srefs);
            // Q = conj(S^{-1} P^{-1} Y P S), Y = Omega Ycal Omega^T
            let left = &(&sfull.inverse()? * &pfull.inverse()?) * &omega;
            let right = &(&omega.transpose() * &pfull) * &sfull;
            let qspace = space.sandwich(left, right)?.mapped(|m| Ok(m.conj()))?;
            let label = match cl {
                HermClass::Pos { lambda, .. } => format!("class {} (lambda = {lambda})", ci + 1),
                _ => format!("class {} (zero)", ci + 1),
            };
            let report = ClassStabReport {
                label,
                realdim: qspace.realdim(),
                base_residual: sol.base_residual,
                ledger: sol.ledger,
            };
            Ok((qspace, report))
        }
        HermClass::NegPair { mu, parts } => {
            let pairs: Vec<(usize, usize)> = parts.iter().map(|p| (p.size, p.mult)).collect();
            let problem = StabProblem::paired(&pairs, *mu)?;
            let sol = solve_stab(&problem, policy)?;
            let space = sol.space.expect("B' = B paired problems are feasible");
            let omega_parts: Vec<Perm> =
                parts.iter().map(|p| build_omega_paired(p.size, p.mult)).collect();
            let omega_refs: Vec<&Perm> = omega_parts.iter().collect();
            let omega = Perm::direct_sum(&omega_refs).to_mat();
            let sizes: Vec<usize> = parts
                .iter()
                .flat_map(|p| std::iter::repeat(p.size).take(p.mult))
                .collect();
            let tr = paired_transition(&sizes, *mu)?;
            // Q = conj(P^{-1} V^{-1} S Y S^{-1} V P)
            let left = &(&(&tr.p.inverse()? * &tr.v.inverse()?) * &tr.s) * &omega;
            let right = &(&(&omega.transpose() * &tr.s.inverse()?) * &tr.v) * &tr.p;
            let qspace = space.sandwich(left, right)?.mapped(|m| Ok(m.conj()))?;
            let report = ClassStabReport {
                label: format!("class {} (mu = {mu})", ci + 1),
                realdim: qspace.realdim(),
                base_residual: sol.base_residual,
                ledger: sol.ledger,
            };
            Ok((qspace, report))
        }
        HermClass::Complex { xi, parts } => {
            let st = class_structure(&parts.iter().map(|p| (p.size, p.mult)).collect::<Vec<_>>());
            let problem = StabProblem::identity(st.clone(), StabCase::I)?;
            let sol = solve_stab(&problem, policy)?;
            let space = sol.space.expect("identity targets are always feasible");
            let omega = omega_for_structure(&st);
            let sizes: Vec<usize> = parts
                .iter()
                .flat_map(|p| std::iter::repeat(p.size).take(p.mult))
                .collect();
            let mut p_blocks = Vec::new();
            for &g in &sizes {
                let pq = build_p_quarter(g);
                p_blocks.push(Mat::direct_sum(&[&pq, &pq]));
            }
            let prefs: Vec<&Mat> = p_blocks.iter().collect();
            let pfull = Mat::direct_sum(&prefs);
            let pinv = pfull.inverse()?;
            let slots = space.slots().to_vec();
            let sizes2 = sizes.clone();
            let qspace = SolutionSpace::new(
                slots,
                Box::new(move |params| {
                    let ycal = space.evaluate(params)?;
                    let yhalf = Perm::conjugate_inv(&ycal, &omega, &omega)?;
                    // interleave the half solution with its conjugate over
                    // the doubled block grid
                    let mut offs_half = vec![0usize];
                    for &g in &sizes2 {
                        offs_half.push(offs_half.last().unwrap() + g);
                    }
                    let total: usize = sizes2.iter().map(|&g| 2 * g).sum();
                    let mut y = Mat::zeros(total, total);
                    let mut offs_full = vec![0usize];
                    for &g in &sizes2 {
                        offs_full.push(offs_full.last().unwrap() + 2 * g);
                    }
                    for (j, &gj) in sizes2.iter().enumerate() {
                        for (k, &gk) in sizes2.iter().enumerate() {
                            let h = yhalf.block(offs_half[j], offs_half[k], gj, gk);
                            y.set_block(offs_full[j], offs_full[k], &h);
                            y.set_block(offs_full[j] + gj, offs_full[k] + gk, &h.conj());
                        }
                    }
                    let x = &(&pinv * &y) * &pfull;
                    Ok(x.conj())
                }),
            )?;
            let report = ClassStabReport {
                label: format!("class {} (xi = {xi})", ci + 1),
                realdim: qspace.realdim(),
                base_residual: sol.base_residual,
                ledger: sol.ledger,
            };
            Ok((qspace, report))
        }
    }
}

/// The dense `E` factor of the paired class (per K-block `E_beta + E_beta`),
/// exposed for the identity checks in tests.
pub fn paired_e(sizes: &[usize]) -> Mat {
    let blocks: Vec<Mat> = sizes
        .iter()
        .map(|&b| {
            let e = build_e(b);
            Mat::direct_sum(&[&e, &e])
        })
        .collect();
    let refs: Vec<&Mat> = blocks.iter().collect();
    Mat::direct_sum(&refs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{Part, SignedPart, SymClass};
    use crate::oracle::{oracle_dim_herm, oracle_dim_sym, verify_stab_element, Action};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn policy() -> TolPolicy {
        TolPolicy::default()
    }

    fn random_symmetric_nonsingular(rng: &mut ChaCha8Rng, n: usize, real: bool) -> Mat {
        loop {
            let mut b = Mat::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = if real {
                        c(rng.gen_range(-1.0..1.0), 0.0)
                    } else {
                        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    };
                    b[(i, j)] = v;
                    b[(j, i)] = v;
                }
            }
            if b.condition_estimate() < 1e4 {
                return b;
            }
        }
    }

    #[test]
    fn scalar_case_i() {
        let st = Structure::new(vec![(1, 1)]);
        let problem = StabProblem::identity(st, StabCase::I).unwrap();
        let sol = solve_stab(&problem, &policy()).unwrap();
        assert!(sol.feasible);
        let space = sol.space.unwrap();
        assert_eq!(space.realdim(), 0, "scalar a^2 = 1 is discrete");
        assert!((space.base()[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn case_ii_inertia_infeasibility() {
        let st = Structure::new(vec![(2, 1)]);
        let problem =
            StabProblem::signed(st, StabCase::II, &[vec![1]], &[vec![-1]]).unwrap();
        let sol = solve_stab(&problem, &policy()).unwrap();
        assert!(!sol.feasible);
        let w = sol.witness.unwrap();
        assert_eq!(w.part, 1);
        assert_eq!((w.b_inertia.n_plus, w.b_inertia.n_minus), (1, 0));
        assert_eq!((w.g_inertia.n_plus, w.g_inertia.n_minus), (0, 1));
    }

    #[test]
    fn case_i_dimension_matches_formula_and_samples_satisfy_equation() {
        let pol = policy();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let structures = [
            vec![(1, 2)],
            vec![(2, 1)],
            vec![(3, 2)],
            vec![(2, 2), (1, 1)],
            vec![(3, 1), (2, 2)],
            vec![(4, 1), (2, 1), (1, 2)],
        ];
        for parts in structures {
            let st = Structure::new(parts.clone());
            let mut problem = StabProblem::identity(st.clone(), StabCase::I).unwrap();
            // random nonsingular symmetric data exercises the Takagi charts
            for (r, p) in st.parts.iter().enumerate() {
                problem.b[r][0] = random_symmetric_nonsingular(&mut rng, p.mult, false);
                problem.g[r][0] = random_symmetric_nonsingular(&mut rng, p.mult, false);
                for nn in 1..p.size {
                    problem.b[r][nn] = random_symmetric_nonsingular(&mut rng, p.mult, false);
                    problem.g[r][nn] = random_symmetric_nonsingular(&mut rng, p.mult, false);
                }
            }
            let sol = solve_stab(&problem, &pol).unwrap();
            assert!(sol.feasible);
            assert!(sol.base_residual <= 1e-9 * sol.b_norm.max(1.0));
            let space = sol.space.unwrap();
            assert_eq!(
                space.realdim() as u64,
                2 * dim_case_i(&st).unwrap(),
                "real dim is twice the complex dimension for {parts:?}"
            );
            for _ in 0..20 {
                let p = space.sample_params(&mut rng, 0.4);
                space.evaluate(&p).unwrap(); // sampled-point residual enforced inside
            }
            assert_eq!(space.jacobian_rank(&pol).unwrap(), space.realdim());
        }
    }

    #[test]
    fn case_ia_feasibility_is_inertia_equality() {
        let pol = policy();
        // exhaustive sweep of sign patterns for one part, m <= 3
        for m in 1..=3usize {
            let patterns: Vec<Vec<i8>> = (0..(1 << m))
                .map(|mask| (0..m).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect())
                .collect();
            for bs in &patterns {
                for gs in &patterns {
                    let st = Structure::new(vec![(2, m)]);
                    let problem =
                        StabProblem::signed(st, StabCase::Ia, &[bs.clone()], &[gs.clone()])
                            .unwrap();
                    let sol = solve_stab(&problem, &pol).unwrap();
                    let same_inertia = bs.iter().filter(|&&s| s == 1).count()
                        == gs.iter().filter(|&&s| s == 1).count();
                    assert_eq!(sol.feasible, same_inertia, "b={bs:?} g={gs:?}");
                }
            }
        }
    }

    #[test]
    fn example_3_3_ledger_and_residual() {
        // F = E_4(I) + E_2(I) + I, B = B' = I, alternating unknowns
        let st = Structure::new(vec![(4, 1), (2, 1), (1, 1)]);
        let problem = StabProblem::identity(st, StabCase::II).unwrap();
        let sol = solve_stab(&problem, &policy()).unwrap();
        assert!(sol.feasible);
        assert!(sol.base_residual <= 1e-10);
        let names: Vec<(&str, &str)> =
            sol.ledger.iter().map(|r| (r.step.as_str(), r.unknown.as_str())).collect();
        let expect = [
            ("0.0", "A_0^{1,1}"),
            ("0.0", "A_0^{2,2}"),
            ("0.0", "A_0^{3,3}"),
            ("a.a", "A_0^{2,1}"),
            ("a.a", "A_1^{2,1}"),
            ("a.a", "A_0^{3,1}"),
            ("a.a", "A_0^{3,2}"),
            ("0.1", "A_0^{1,2}"),
            ("0.1", "A_0^{2,3}"),
            ("0.2", "A_0^{1,3}"),
            ("1.0", "A_1^{1,1}"),
            ("1.0", "A_1^{2,2}"),
            ("1.1", "A_1^{1,2}"),
            ("2.0", "A_2^{1,1}"),
            ("3.0", "A_3^{1,1}"),
        ];
        assert_eq!(names.len(), expect.len());
        for (have, want) in names.iter().zip(&expect) {
            assert_eq!(have, want);
        }
        // the diagonal leading unknowns are congruence charts, the
        // off-diagonal ones unique solves, the higher diagonal coefficients
        // congruence-with-slot solves
        let kind_of = |name: &str| {
            sol.ledger.iter().find(|r| r.unknown == name).map(|r| r.kind.clone()).unwrap()
        };
        assert!(matches!(kind_of("A_0^{1,1}"), StepKind::IndefiniteUnitaryChart { plus: 1, minus: 0 }));
        assert!(matches!(kind_of("A_0^{2,2}"), StepKind::IndefiniteUnitaryChart { .. }));
        assert!(matches!(kind_of("A_0^{3,3}"), StepKind::OrthogonalFactorChart { .. }));
        for n in ["A_0^{1,2}", "A_0^{2,3}", "A_0^{1,3}", "A_1^{1,2}"] {
            assert!(matches!(kind_of(n), StepKind::UniqueLinearSolve));
        }
        for n in ["A_1^{1,1}", "A_1^{2,2}", "A_3^{1,1}"] {
            assert!(matches!(kind_of(n), StepKind::SymmetricSolveWithAntisymmetricSlot));
        }
        assert!(matches!(kind_of("A_2^{1,1}"), StepKind::HermitianSolveWithSkewHermitianSlot));
        // free parameters: the four below-diagonal unknowns
        let free: Vec<&str> = sol
            .ledger
            .iter()
            .filter(|r| r.kind == StepKind::FreeBelowDiagonal)
            .map(|r| r.unknown.as_str())
            .collect();
        assert_eq!(free, vec!["A_0^{2,1}", "A_1^{2,1}", "A_0^{3,1}", "A_0^{3,2}"]);
        // total realized dimension: 1 + 1 + 0 charts, 8 free, 1 slot
        assert_eq!(sol.space.unwrap().realdim(), 11);
    }

    #[test]
    fn dimension_formula_values() {
        assert_eq!(dim_case_i(&Structure::new(vec![(1, 1)])).unwrap(), 0);
        assert_eq!(dim_case_i(&Structure::new(vec![(1, 2)])).unwrap(), 1);
        assert_eq!(dim_case_i(&Structure::new(vec![(3, 2), (1, 3)])).unwrap(), 12);

        assert_eq!(dim_case_ii(&Structure::new(vec![(2, 1)])).unwrap(), 7);
        assert_eq!(dim_case_ii(&Structure::new(vec![(1, 1)])).unwrap(), 1);
        assert_eq!(dim_case_ii(&Structure::new(vec![(1, 2)])).unwrap(), 6);

        assert_eq!(dim_case_ib(&Structure::new(vec![(1, 2)])).unwrap(), 1);
        assert_eq!(dim_case_ib(&Structure::new(vec![(2, 2)])).unwrap(), 4);
        assert!(dim_case_ib(&Structure::new(vec![(2, 3)])).is_err());
        assert!(Structure::new(vec![(1, 2), (1, 2)]).validate().is_err());
    }

    #[test]
    fn sym_stabilizer_matches_oracle_and_verifies() {
        let pol = policy();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let specs = [
            SymSpec {
                classes: vec![SymClass { eigenvalue: c(0.9, -0.2), parts: vec![Part { size: 1, mult: 2 }] }],
            },
            SymSpec {
                classes: vec![
                    SymClass { eigenvalue: c(1.4, 0.3), parts: vec![Part { size: 2, mult: 1 }, Part { size: 1, mult: 2 }] },
                    SymClass { eigenvalue: c(-0.7, 0.0), parts: vec![Part { size: 2, mult: 1 }] },
                ],
            },
        ];
        for spec in &specs {
            let stab = stabilizer_sym(spec, &pol).unwrap();
            let s = spec.assemble().unwrap();
            let oracle = oracle_dim_sym(&s, &pol).unwrap().nullity;
            assert_eq!(stab.space.realdim(), 2 * oracle, "complex dim vs oracle");
            for _ in 0..10 {
                let p = stab.space.sample_params(&mut rng, 0.3);
                let q = stab.space.evaluate(&p).unwrap();
                let rep = verify_stab_element(&q, &s, Action::Sym, 1e-8).unwrap();
                assert!(rep.pass, "orth {:.2e} act {:.2e}", rep.orthogonality_residual, rep.action_residual);
            }
        }
        // the trivial O_2(C) case has exactly one complex parameter
        let stab = stabilizer_sym(&specs[0], &pol).unwrap();
        assert_eq!(stab.space.realdim(), 2);
    }

    #[test]
    fn herm_stabilizers_match_oracle_and_verify() {
        let pol = policy();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let specs = [
            HermSpec {
                classes: vec![HermClass::Pos {
                    lambda: 1.1,
                    parts: vec![SignedPart { size: 1, mult: 2, signs: vec![1, 1] }],
                }],
            },
            HermSpec {
                classes: vec![HermClass::Pos {
                    lambda: 0.6,
                    parts: vec![SignedPart { size: 2, mult: 1, signs: vec![-1] }, SignedPart { size: 1, mult: 1, signs: vec![1] }],
                }],
            },
            HermSpec {
                classes: vec![HermClass::Zero {
                    parts: vec![SignedPart { size: 2, mult: 2, signs: vec![1, -1] }],
                }],
            },
            HermSpec {
                classes: vec![HermClass::Zero {
                    parts: vec![SignedPart { size: 3, mult: 1, signs: vec![1] }, SignedPart { size: 1, mult: 2, signs: vec![1, 1] }],
                }],
            },
            HermSpec {
                classes: vec![HermClass::NegPair { mu: 0.8, parts: vec![Part { size: 1, mult: 2 }] }],
            },
            HermSpec {
                classes: vec![HermClass::NegPair { mu: 1.3, parts: vec![Part { size: 2, mult: 1 }] }],
            },
            HermSpec {
                classes: vec![HermClass::Complex { xi: c(0.8, 0.9), parts: vec![Part { size: 1, mult: 2 }] }],
            },
            HermSpec {
                classes: vec![
                    HermClass::Pos { lambda: 2.0, parts: vec![SignedPart { size: 1, mult: 1, signs: vec![1] }] },
                    HermClass::NegPair { mu: 1.0, parts: vec![Part { size: 1, mult: 1 }] },
                    HermClass::Complex { xi: c(1.0, 1.0), parts: vec![Part { size: 1, mult: 1 }] },
                ],
            },
        ];
        for spec in &specs {
            let stab = stabilizer_herm(spec, &pol).unwrap();
            let h = spec.assemble().unwrap();
            let oracle = oracle_dim_herm(&h, &pol).unwrap().nullity;
            assert_eq!(stab.space.realdim(), oracle, "realized dim vs oracle for {spec:?}");
            let mut samples = Vec::new();
            for _ in 0..8 {
                let p = stab.space.sample_params(&mut rng, 0.3);
                let q = stab.space.evaluate(&p).unwrap();
                let rep = verify_stab_element(&q, &h, Action::Herm, 1e-8).unwrap();
                assert!(
                    rep.pass,
                    "orth {:.2e} act {:.2e} for {spec:?}",
                    rep.orthogonality_residual,
                    rep.action_residual
                );
                samples.push(q);
            }
            // group closure
            let prod = &samples[0] * &samples[1];
            let rep = verify_stab_element(&prod, &h, Action::Herm, 1e-7).unwrap();
            assert!(rep.pass, "group closure for {spec:?}");
        }
    }

    #[test]
    fn pos_class_samples_are_real_orthogonal() {
        let pol = policy();
        let spec = HermSpec {
            classes: vec![HermClass::Pos {
                lambda: 1.5,
                parts: vec![SignedPart { size: 1, mult: 2, signs: vec![1, 1] }],
            }],
        };
        let stab = stabilizer_herm(&spec, &pol).unwrap();
        assert_eq!(stab.space.realdim(), 1, "O_2(R)");
        let q = stab.space.evaluate(&[0.4]).unwrap();
        let max_im = q.as_dmatrix().iter().map(|e| e.im.abs()).fold(0.0, f64::max);
        assert!(max_im < 1e-12, "real samples, got imag {max_im:.2e}");
    }

    #[test]
    fn paired_data_identity() {
        // the quasi-diagonal operand of the paired pipeline equals
        // -i Omega^T (E S^T V^{-T} E V^{-1} S) Omega
        for (beta, m, mu) in [(1usize, 1usize, 0.9), (2, 1, 1.4), (3, 2, 0.7), (2, 2, 1.1)] {
            let sizes: Vec<usize> = std::iter::repeat(beta).take(m).collect();
            let tr = paired_transition(&sizes, mu).unwrap();
            let e = paired_e(&sizes);
            let vinv_t = tr.v.inverse().unwrap().transpose();
            let icap = &(&(&(&e * &tr.s.transpose()) * &vinv_t) * &e) * &(&tr.v.inverse().unwrap() * &tr.s);
            let omega = build_omega_paired(beta, m).to_mat();
            let reshuffled = &(&omega.transpose() * &icap.scale(c(0.0, -1.0))) * &omega;
            let problem = StabProblem::paired(&[(beta, m)], mu).unwrap();
            let u = &problem.ib.as_ref().unwrap().u_seqs[0];
            let bref = quasi_diagonal(
                &problem.structure,
                &problem.b,
                false,
            )
            .unwrap();
            assert!(
                (&reshuffled - &bref).norm() <= 1e-10 * (1.0 + bref.norm()),
                "paired operand identity at beta={beta} m={m} (u = {u:?})"
            );
        }
    }

    #[test]
    fn paired_solver_realized_dimensions() {
        let pol = policy();
        // single part: alpha * m'(2m' - 1); frozen against the brute-force
        // oracle values
        for ((beta, m), expect) in [((1usize, 1usize), 1usize), ((2, 1), 2), ((3, 1), 3), ((1, 2), 6)] {
            let problem = StabProblem::paired(&[(beta, m)], 1.7).unwrap();
            let sol = solve_stab(&problem, &pol).unwrap();
            assert!(sol.feasible);
            let space = sol.space.unwrap();
            assert_eq!(space.realdim(), expect, "beta={beta} m={m}");
            assert_eq!(space.jacobian_rank(&pol).unwrap(), space.realdim());
        }
        // two parts
        let problem = StabProblem::paired(&[(2, 1), (1, 1)], 1.7).unwrap();
        let sol = solve_stab(&problem, &pol).unwrap();
        assert_eq!(sol.space.unwrap().realdim(), 7);
    }
}
