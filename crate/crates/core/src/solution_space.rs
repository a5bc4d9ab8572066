//! Charts for solution manifolds: a base point, typed free-parameter slots,
//! and an evaluator mapping a full real parameter assignment to a matrix.

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::rank_nullity_real;
use crate::mat::{c, Mat};
use crate::tol::TolPolicy;

/// Field of a free slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Real,
    Complex,
}

/// Shape of one free-parameter slot.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum SlotShape {
    ScalarComplex,
    ScalarReal,
    Matrix { rows: usize, cols: usize, field: Field },
    Antisymmetric { n: usize, field: Field },
    SkewHermitian { n: usize },
    OrthogonalChart { n: usize, field: Field },
    /// Chart of `{W : W^* J W = J}` (indefinite unitary), real dim n^2.
    IndefiniteUnitaryChart { n: usize },
    /// Paired-block chart `exp([[A,B],[-conj B, conj A]])`, A antisymmetric
    /// complex, B Hermitian, of real dim h(2h-1) for half-size h.
    PairedOrthogonalChart { half: usize },
    /// Paired antisymmetric slot of real dim h(2h-1).
    PairedAntisymmetric { half: usize },
    /// Free pair (V, W) of complex half x half matrices, real dim 4 h_r h_c.
    PairedMatrix { half_rows: usize, half_cols: usize },
}

impl SlotShape {
    pub fn realdim(&self) -> usize {
        match *self {
            SlotShape::ScalarComplex => 2,
            SlotShape::ScalarReal => 1,
            SlotShape::Matrix { rows, cols, field } => {
                rows * cols * if field == Field::Complex { 2 } else { 1 }
            }
            SlotShape::Antisymmetric { n, field } => {
                n * (n - 1) / 2 * if field == Field::Complex { 2 } else { 1 }
            }
            SlotShape::SkewHermitian { n } => n * n,
            SlotShape::OrthogonalChart { n, field } => {
                n * (n - 1) / 2 * if field == Field::Complex { 2 } else { 1 }
            }
            SlotShape::IndefiniteUnitaryChart { n } => n * n,
            SlotShape::PairedOrthogonalChart { half } | SlotShape::PairedAntisymmetric { half } => {
                half * (2 * half).saturating_sub(1)
            }
            SlotShape::PairedMatrix { half_rows, half_cols } => 4 * half_rows * half_cols,
        }
    }
}

/// One named free-parameter slot.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ParamSlot {
    pub name: String,
    #[serde(flatten)]
    pub shape: SlotShape,
    pub realdim: usize,
}

impl ParamSlot {
    pub fn new(name: impl Into<String>, shape: SlotShape) -> Self {
        let realdim = shape.realdim();
        ParamSlot { name: name.into(), shape, realdim }
    }
}

/// Materializes the simple slot shapes into matrices. The chart shapes that
/// depend on solver context (indefinite/paired) are materialized where the
/// context lives.
pub fn materialize_simple(shape: &SlotShape, params: &[f64]) -> Mat {
    assert_eq!(params.len(), shape.realdim());
    match *shape {
        SlotShape::ScalarComplex => Mat::from_row_slice(1, 1, &[c(params[0], params[1])]),
        SlotShape::ScalarReal => Mat::from_row_slice(1, 1, &[c(params[0], 0.0)]),
        SlotShape::Matrix { rows, cols, field } => {
            let mut m = Mat::zeros(rows, cols);
            let mut k = 0;
            for i in 0..rows {
                for j in 0..cols {
                    if field == Field::Complex {
                        m[(i, j)] = c(params[k], params[k + 1]);
                        k += 2;
                    } else {
                        m[(i, j)] = c(params[k], 0.0);
                        k += 1;
                    }
                }
            }
            m
        }
        SlotShape::Antisymmetric { n, field } => antisym_from_params(n, field, params),
        SlotShape::SkewHermitian { n } => {
            let mut m = Mat::zeros(n, n);
            let mut k = 0;
            for i in 0..n {
                m[(i, i)] = c(0.0, params[k]);
                k += 1;
            }
            for i in 0..n {
                for j in i + 1..n {
                    let z = c(params[k], params[k + 1]);
                    k += 2;
                    m[(i, j)] = z;
                    m[(j, i)] = -z.conj();
                }
            }
            m
        }
        SlotShape::OrthogonalChart { n, field } => antisym_from_params(n, field, params).expm(),
        _ => panic!("context-dependent slot shape materialized without context"),
    }
}

pub fn antisym_from_params(n: usize, field: Field, params: &[f64]) -> Mat {
    let mut m = Mat::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            let z = if field == Field::Complex {
                let z = c(params[k], params[k + 1]);
                k += 2;
                z
            } else {
                let z = c(params[k], 0.0);
                k += 1;
                z
            };
            m[(i, j)] = z;
            m[(j, i)] = -z;
        }
    }
    m
}

type Evaluator = Box<dyn Fn(&[f64]) -> Result<Mat> + Send + Sync>;

/// A chart for a solution manifold: `evaluate(zeros) == base`, and every
/// evaluated point satisfies the defining equation of the space it came
/// from (enforced by that constructor's tests).
pub struct SolutionSpace {
    rows: usize,
    cols: usize,
    slots: Vec<ParamSlot>,
    base: Mat,
    eval: Evaluator,
}

impl std::fmt::Debug for SolutionSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolutionSpace")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("realdim", &self.realdim())
            .field("slots", &self.slots.len())
            .finish()
    }
}

impl SolutionSpace {
    pub fn new(slots: Vec<ParamSlot>, eval: Evaluator) -> Result<Self> {
        let zeros = vec![0.0; slots.iter().map(|s| s.realdim).sum()];
        let base = eval(&zeros)?;
        Ok(SolutionSpace { rows: base.rows(), cols: base.cols(), slots, base, eval })
    }

    /// The zero-dimensional space containing only `base`.
    pub fn fixed(base: Mat) -> Self {
        let b = base.clone();
        SolutionSpace {
            rows: base.rows(),
            cols: base.cols(),
            slots: vec![],
            base,
            eval: Box::new(move |_| Ok(b.clone())),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn slots(&self) -> &[ParamSlot] {
        &self.slots
    }

    pub fn realdim(&self) -> usize {
        self.slots.iter().map(|s| s.realdim).sum()
    }

    pub fn base(&self) -> &Mat {
        &self.base
    }

    pub fn zero_params(&self) -> Vec<f64> {
        vec![0.0; self.realdim()]
    }

    pub fn evaluate(&self, params: &[f64]) -> Result<Mat> {
        if params.len() != self.realdim() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} parameters, got {}",
                self.realdim(),
                params.len()
            )));
        }
        (self.eval)(params)
    }

    pub fn sample_params(&self, rng: &mut impl Rng, scale: f64) -> Vec<f64> {
        (0..self.realdim()).map(|_| rng.gen_range(-scale..=scale)).collect()
    }

    /// `left * X * right` for every point of the space.
    pub fn sandwich(self, left: Mat, right: Mat) -> Result<SolutionSpace> {
        if left.cols() != self.rows || self.cols != right.rows() {
            return Err(Error::DimensionMismatch("sandwich shapes".into()));
        }
        let SolutionSpace { slots, eval, .. } = self;
        SolutionSpace::new(
            slots,
            Box::new(move |p| Ok(&(&left * &eval(p)?) * &right)),
        )
    }

    /// Post-composes the evaluator with a pointwise matrix map.
    pub fn mapped(
        self,
        f: impl Fn(Mat) -> Result<Mat> + Send + Sync + 'static,
    ) -> Result<SolutionSpace> {
        let SolutionSpace { slots, eval, .. } = self;
        SolutionSpace::new(slots, Box::new(move |p| f(eval(p)?)))
    }

    /// Block-diagonal direct sum; parameters concatenate in order.
    pub fn direct_sum(spaces: Vec<SolutionSpace>) -> Result<SolutionSpace> {
        let mut slots = Vec::new();
        let mut dims = Vec::new();
        for (i, s) in spaces.iter().enumerate() {
            dims.push(s.realdim());
            for slot in &s.slots {
                let mut named = slot.clone();
                named.name = format!("b{}.{}", i + 1, slot.name);
                slots.push(named);
            }
        }
        SolutionSpace::new(
            slots,
            Box::new(move |p| {
                let mut mats = Vec::with_capacity(spaces.len());
                let mut off = 0;
                for (s, &d) in spaces.iter().zip(&dims) {
                    mats.push(s.evaluate(&p[off..off + d])?);
                    off += d;
                }
                let refs: Vec<&Mat> = mats.iter().collect();
                Ok(Mat::direct_sum(&refs))
            }),
        )
    }

    /// Numerical rank of the parameter-to-matrix Jacobian at the base point,
    /// central differences with step 1e-6.
    pub fn jacobian_rank(&self, policy: &TolPolicy) -> Result<usize> {
        let dim = self.realdim();
        if dim == 0 {
            return Ok(0);
        }
        let h = 1e-6;
        let rows = 2 * self.rows * self.cols;
        let mut jac = nalgebra::DMatrix::<f64>::zeros(rows, dim);
        for k in 0..dim {
            let mut plus = self.zero_params();
            plus[k] = h;
            let mut minus = self.zero_params();
            minus[k] = -h;
            let fp = self.evaluate(&plus)?.to_real_vec();
            let fm = self.evaluate(&minus)?.to_real_vec();
            for r in 0..rows {
                jac[(r, k)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        Ok(rank_nullity_real(&jac, policy)?.rank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_realdims() {
        assert_eq!(SlotShape::ScalarComplex.realdim(), 2);
        assert_eq!(SlotShape::Antisymmetric { n: 4, field: Field::Complex }.realdim(), 12);
        assert_eq!(SlotShape::Antisymmetric { n: 4, field: Field::Real }.realdim(), 6);
        assert_eq!(SlotShape::OrthogonalChart { n: 3, field: Field::Complex }.realdim(), 6);
        assert_eq!(SlotShape::SkewHermitian { n: 3 }.realdim(), 9);
        assert_eq!(SlotShape::PairedOrthogonalChart { half: 2 }.realdim(), 6);
        assert_eq!(SlotShape::PairedMatrix { half_rows: 2, half_cols: 3 }.realdim(), 24);
    }

    #[test]
    fn orthogonal_chart_lands_in_the_group() {
        let shape = SlotShape::OrthogonalChart { n: 3, field: Field::Complex };
        let p: Vec<f64> = (0..shape.realdim()).map(|k| 0.1 * (k as f64 + 1.0)).collect();
        let w = materialize_simple(&shape, &p);
        let id = Mat::identity(3);
        assert!((&(&w.transpose() * &w) - &id).norm() < 1e-12);
    }

    #[test]
    fn skew_hermitian_materialization() {
        let shape = SlotShape::SkewHermitian { n: 2 };
        let m = materialize_simple(&shape, &[1.0, -2.0, 0.5, 0.25]);
        assert!((&m + &m.adjoint()).norm() == 0.0);
    }

    #[test]
    fn direct_sum_concatenates() {
        let s1 = SolutionSpace::new(
            vec![ParamSlot::new("x", SlotShape::ScalarReal)],
            Box::new(|p| Ok(Mat::from_row_slice(1, 1, &[c(p[0], 0.0)]))),
        )
        .unwrap();
        let s2 = SolutionSpace::new(
            vec![ParamSlot::new("y", SlotShape::ScalarComplex)],
            Box::new(|p| Ok(Mat::from_row_slice(1, 1, &[c(p[0], p[1])]))),
        )
        .unwrap();
        let s = SolutionSpace::direct_sum(vec![s1, s2]).unwrap();
        assert_eq!(s.realdim(), 3);
        let m = s.evaluate(&[2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m[(0, 0)], c(2.0, 0.0));
        assert_eq!(m[(1, 1)], c(3.0, 4.0));
        assert_eq!(s.jacobian_rank(&TolPolicy::default()).unwrap(), 3);
    }
}
