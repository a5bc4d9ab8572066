//! Dense complex matrix values: the universal carrier for every matrix in
//! the crate, plus realification maps and the shared JSON interchange format
//! `{"rows": n, "cols": m, "data": [[re, im], ...]}` (row-major).

use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex<f64>;

/// Builds a complex scalar.
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    inner: DMatrix<C64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { inner: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        Mat { inner: DMatrix::identity(n, n) }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Mat { inner: DMatrix::from_fn(rows, cols, f) }
    }

    pub fn from_row_slice(rows: usize, cols: usize, data: &[C64]) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { inner: DMatrix::from_row_slice(rows, cols, data) }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Self {
        Mat { inner: m.map(|x| c(x, 0.0)) }
    }

    pub fn from_dmatrix(inner: DMatrix<C64>) -> Self {
        Mat { inner }
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Rejects non-finite entries; every public operation calls this on input.
    pub fn check_finite(&self) -> Result<()> {
        for e in self.inner.iter() {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(Error::InvalidInput("non-finite matrix entry".into()));
            }
        }
        Ok(())
    }

    pub fn transpose(&self) -> Mat {
        Mat { inner: self.inner.transpose() }
    }

    pub fn conj(&self) -> Mat {
        Mat { inner: self.inner.map(|e| e.conj()) }
    }

    pub fn adjoint(&self) -> Mat {
        Mat { inner: self.inner.adjoint() }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Mat {
        Mat { inner: self.inner.map(f) }
    }

    pub fn scale(&self, s: C64) -> Mat {
        Mat { inner: self.inner.map(|e| e * s) }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.inner.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn symmetry_error(&self) -> f64 {
        (self - &self.transpose()).norm()
    }

    pub fn hermitian_error(&self) -> f64 {
        (self - &self.adjoint()).norm()
    }

    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Mat {
        Mat { inner: self.inner.view((row0, col0), (rows, cols)).into_owned() }
    }

    pub fn set_block(&mut self, row0: usize, col0: usize, b: &Mat) {
        self.inner.view_mut((row0, col0), (b.rows(), b.cols())).copy_from(&b.inner);
    }

    /// Block-diagonal direct sum, in the given order.
    pub fn direct_sum(blocks: &[&Mat]) -> Mat {
        let rows = blocks.iter().map(|b| b.rows()).sum();
        let cols = blocks.iter().map(|b| b.cols()).sum();
        let mut out = Mat::zeros(rows, cols);
        let (mut r, mut cpos) = (0, 0);
        for b in blocks {
            out.set_block(r, cpos, b);
            r += b.rows();
            cpos += b.cols();
        }
        out
    }

    /// 2x2 block assembly from equally partitioned quadrants.
    pub fn from_quadrants(a: &Mat, b: &Mat, c_: &Mat, d: &Mat) -> Mat {
        assert_eq!(a.rows(), b.rows());
        assert_eq!(c_.rows(), d.rows());
        assert_eq!(a.cols(), c_.cols());
        assert_eq!(b.cols(), d.cols());
        let mut out = Mat::zeros(a.rows() + c_.rows(), a.cols() + b.cols());
        out.set_block(0, 0, a);
        out.set_block(0, a.cols(), b);
        out.set_block(a.rows(), 0, c_);
        out.set_block(a.rows(), a.cols(), d);
        out
    }

    /// Realification of the C-linear map `x -> M x`: `[[Re, -Im], [Im, Re]]`.
    pub fn realify(&self) -> DMatrix<f64> {
        let (r, cc) = (self.rows(), self.cols());
        let mut out = DMatrix::zeros(2 * r, 2 * cc);
        for i in 0..r {
            for j in 0..cc {
                let e = self.inner[(i, j)];
                out[(i, j)] = e.re;
                out[(i, cc + j)] = -e.im;
                out[(r + i, j)] = e.im;
                out[(r + i, cc + j)] = e.re;
            }
        }
        out
    }

    /// Realification of the antilinear map `x -> M conj(x)`: `[[Re, Im], [Im, -Re]]`.
    pub fn realify_antilinear(&self) -> DMatrix<f64> {
        let (r, cc) = (self.rows(), self.cols());
        let mut out = DMatrix::zeros(2 * r, 2 * cc);
        for i in 0..r {
            for j in 0..cc {
                let e = self.inner[(i, j)];
                out[(i, j)] = e.re;
                out[(i, cc + j)] = e.im;
                out[(r + i, j)] = e.im;
                out[(r + i, cc + j)] = -e.re;
            }
        }
        out
    }

    /// Stacks the entries as a real vector `(re, im)` pairs, row-major.
    pub fn to_real_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let e = self.inner[(i, j)];
                v.push(e.re);
                v.push(e.im);
            }
        }
        v
    }

    /// Solves `self * X = rhs` by LU with partial pivoting.
    pub fn lu_solve(&self, rhs: &Mat) -> Result<Mat> {
        if !self.is_square() || self.rows() != rhs.rows() {
            return Err(Error::DimensionMismatch("lu_solve shapes".into()));
        }
        let lu = self.inner.clone().lu();
        match lu.solve(&rhs.inner) {
            Some(x) => Ok(Mat { inner: x }),
            None => Err(Error::SingularInput { sigma_min: 0.0, tol: 0.0 }),
        }
    }

    pub fn inverse(&self) -> Result<Mat> {
        self.lu_solve(&Mat::identity(self.rows()))
    }

    /// `sigma_max / sigma_min` via the realified singular values.
    pub fn condition_estimate(&self) -> f64 {
        let svd = nalgebra::linalg::SVD::new(self.realify(), false, false);
        let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 { f64::INFINITY } else { max / min }
    }

    /// Matrix exponential by scaling-and-squaring with a Taylor kernel.
    pub fn expm(&self) -> Mat {
        assert!(self.is_square());
        let n = self.rows();
        let norm = self.norm();
        let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let t = self.scale(c(1.0 / 2f64.powi(s as i32), 0.0));
        let mut acc = Mat::identity(n);
        let mut term = Mat::identity(n);
        for k in 1..=24 {
            term = &(&term * &t) * &Mat::from_fn(n, n, |i, j| if i == j { c(1.0 / k as f64, 0.0) } else { c(0.0, 0.0) });
            acc = &acc + &term;
            if term.norm() < 1e-18 * acc.norm().max(1.0) {
                break;
            }
        }
        for _ in 0..s {
            acc = &acc * &acc;
        }
        acc
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.inner[idx]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.inner[idx]
    }
}

impl std::ops::Add for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        Mat { inner: &self.inner + &rhs.inner }
    }
}

impl std::ops::Sub for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        Mat { inner: &self.inner - &rhs.inner }
    }
}

impl std::ops::Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        Mat { inner: &self.inner * &rhs.inner }
    }
}

impl std::ops::Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        Mat { inner: -self.inner.clone() }
    }
}

impl Serialize for Mat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            rows: usize,
            cols: usize,
            data: Vec<[f64; 2]>,
        }
        let mut data = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let e = self.inner[(i, j)];
                data.push([e.re, e.im]);
            }
        }
        Wire { rows: self.rows(), cols: self.cols(), data }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            rows: usize,
            cols: usize,
            data: Vec<[f64; 2]>,
        }
        let w = Wire::deserialize(deserializer)?;
        if w.rows == 0 || w.cols == 0 {
            return Err(D::Error::custom("matrix dimensions must be positive"));
        }
        if w.data.len() != w.rows * w.cols {
            return Err(D::Error::custom(format!(
                "data length {} does not match {}x{}",
                w.data.len(),
                w.rows,
                w.cols
            )));
        }
        let mut m = Mat::zeros(w.rows, w.cols);
        for (k, [re, im]) in w.data.into_iter().enumerate() {
            m[(k / w.cols, k % w.cols)] = c(re, im);
        }
        m.check_finite().map_err(|e| D::Error::custom(e.to_string()))?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_row_major() {
        let m = Mat::from_row_slice(2, 3, &[
            c(1.0, 0.0), c(2.0, -1.0), c(0.0, 3.0),
            c(4.0, 4.0), c(5.0, 0.5), c(6.0, 0.0),
        ]);
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.starts_with(r#"{"rows":2,"cols":3,"data":[[1.0,0.0],[2.0,-1.0]"#));
        let back: Mat = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn rejects_bad_lengths_and_nan() {
        let bad: std::result::Result<Mat, _> =
            serde_json::from_str(r#"{"rows":2,"cols":2,"data":[[1.0,0.0]]}"#);
        assert!(bad.is_err());
        let nan: std::result::Result<Mat, _> =
            serde_json::from_str(r#"{"rows":1,"cols":1,"data":[[null,0.0]]}"#);
        assert!(nan.is_err());
    }

    #[test]
    fn expm_matches_rotation() {
        // exp of [[0, t],[-t, 0]] is the rotation by t
        let t = 0.7;
        let k = Mat::from_row_slice(2, 2, &[c(0.0, 0.0), c(t, 0.0), c(-t, 0.0), c(0.0, 0.0)]);
        let e = k.expm();
        let expect = Mat::from_row_slice(2, 2, &[
            c(t.cos(), 0.0), c(t.sin(), 0.0),
            c(-t.sin(), 0.0), c(t.cos(), 0.0),
        ]);
        assert!((&e - &expect).norm() < 1e-14);
    }

    #[test]
    fn realify_consistency() {
        let m = Mat::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.0), c(-2.0, 1.0)]);
        let x = Mat::from_row_slice(2, 1, &[c(0.5, -0.25), c(1.5, 2.0)]);
        // linear: stacked (re; im) of x maps to stacked (re; im) of m*x
        let r = m.realify();
        let xr = nalgebra::DVector::from_vec(vec![0.5, 1.5, -0.25, 2.0]);
        let y = &m * &x;
        let yr = r * xr;
        assert!((yr[0] - y[(0, 0)].re).abs() < 1e-15);
        assert!((yr[2] - y[(0, 0)].im).abs() < 1e-15);
        // antilinear: same with conj(x)
        let ra = m.realify_antilinear();
        let xr = nalgebra::DVector::from_vec(vec![0.5, 1.5, -0.25, 2.0]);
        let y = &m * &x.conj();
        let yr = ra * xr;
        assert!((yr[1] - y[(1, 0)].re).abs() < 1e-15);
        assert!((yr[3] - y[(1, 0)].im).abs() < 1e-15);
    }
}
