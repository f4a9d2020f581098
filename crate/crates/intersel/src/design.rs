//! Fixed-design data and on-demand expanded columns.
//!
//! The expanded design (main effects, pointwise-product interaction columns
//! and optionally squared columns) is never materialized in full; columns are
//! produced on demand so memory scales with the selected model size.
//!
//! ```
//! use intersel::design::{Dataset, DesignView};
//! use nalgebra::{DMatrix, DVector};
//!
//! let x = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 4.0]);
//! let data = Dataset::new(x, DVector::zeros(2), 1.0)?;
//! let view = DesignView::new(&data);
//! assert_eq!(view.inter_column(1, 2).as_slice(), &[3.0, 8.0]);
//! # Ok::<(), intersel::error::Error>(())
//! ```

use crate::error::{Error, Result};
use crate::model::ModelIndex;
use nalgebra::{DMatrix, DVector};

/// A fixed design X with response y and known noise variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub sigma2: f64,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, sigma2: f64) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::Domain("design matrix must be nonempty".into()));
        }
        if x.nrows() != y.len() {
            return Err(Error::Domain(format!(
                "X has {} rows but y has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if sigma2 <= 0.0 {
            return Err(Error::Domain("sigma2 must be positive".into()));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite entries in data".into()));
        }
        Ok(Dataset { x, y, sigma2 })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Rescales every column of X to Euclidean norm sqrt(n). Columns that are
    /// identically zero are left untouched.
    pub fn normalize_columns(&mut self) {
        let n = self.n() as f64;
        for mut col in self.x.column_iter_mut() {
            let norm = col.norm();
            if norm > 0.0 {
                col *= n.sqrt() / norm;
            }
        }
    }
}

/// A view of a dataset exposing expanded-design columns.
#[derive(Debug, Clone, Copy)]
pub struct DesignView<'a> {
    pub data: &'a Dataset,
    pub quadratic_enabled: bool,
}

impl<'a> DesignView<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        DesignView { data, quadratic_enabled: false }
    }

    pub fn with_quadratic(data: &'a Dataset) -> Self {
        DesignView { data, quadratic_enabled: true }
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn p(&self) -> usize {
        self.data.p()
    }

    /// Main-effect column j (1-based).
    pub fn main_column(&self, j: usize) -> DVector<f64> {
        self.data.x.column(j - 1).into_owned()
    }

    /// Interaction column for the pair (i, j): the pointwise product.
    pub fn inter_column(&self, i: usize, j: usize) -> DVector<f64> {
        let a = self.data.x.column(i - 1);
        let b = self.data.x.column(j - 1);
        DVector::from_iterator(self.n(), a.iter().zip(b.iter()).map(|(u, v)| u * v))
    }

    /// Quadratic column for index i: the pointwise square.
    pub fn quad_column(&self, i: usize) -> DVector<f64> {
        let a = self.data.x.column(i - 1);
        DVector::from_iterator(self.n(), a.iter().map(|u| u * u))
    }

    /// The n x |m| submatrix for model `m`: main columns ascending, then
    /// interaction columns in lexicographic pair order, then quadratics.
    pub fn materialize_columns(&self, m: &ModelIndex) -> Result<DMatrix<f64>> {
        let p = self.p();
        let ok = m.main.iter().all(|&i| i >= 1 && i <= p)
            && m.inter.iter().all(|&(i, j)| i >= 1 && i < j && j <= p)
            && m.quad.iter().all(|&i| i >= 1 && i <= p);
        if !ok {
            return Err(Error::Domain(format!("model index out of range for p = {p}")));
        }
        let n = self.n();
        let mut cols = DMatrix::zeros(n, m.len());
        let mut c = 0;
        for &i in &m.main {
            cols.set_column(c, &self.main_column(i));
            c += 1;
        }
        for &(i, j) in &m.inter {
            cols.set_column(c, &self.inter_column(i, j));
            c += 1;
        }
        for &i in &m.quad {
            cols.set_column(c, &self.quad_column(i));
            c += 1;
        }
        Ok(cols)
    }

    /// Z beta for a sparse coefficient vector, accumulated over the support
    /// only.
    pub fn apply_coefficients(&self, beta: &crate::model::CoefficientVector) -> DVector<f64> {
        let mut out = DVector::zeros(self.n());
        for (idx, &v) in beta.beta_main.iter().enumerate() {
            if v != 0.0 {
                out += self.main_column(idx + 1) * v;
            }
        }
        let mut slot = 0;
        for i in 1..=beta.p {
            for j in (i + 1)..=beta.p {
                let v = beta.beta_inter[slot];
                if v != 0.0 {
                    out += self.inter_column(i, j) * v;
                }
                slot += 1;
            }
        }
        for (idx, &v) in beta.beta_quad.iter().enumerate() {
            if v != 0.0 {
                out += self.quad_column(idx + 1) * v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CoefficientVector;
    use approx::assert_relative_eq;

    fn dataset(x: DMatrix<f64>) -> Dataset {
        let n = x.nrows();
        Dataset::new(x, DVector::zeros(n), 1.0).unwrap()
    }

    #[test]
    fn interaction_of_orthogonal_indicators_is_zero() {
        let d = dataset(DMatrix::identity(2, 2));
        let view = DesignView::new(&d);
        let m = ModelIndex::new(vec![1, 2], vec![(1, 2)], vec![], 2).unwrap();
        let z = view.materialize_columns(&m).unwrap();
        assert_eq!(z.column(2).as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn interaction_is_pointwise_product() {
        let x = DMatrix::from_columns(&[
            DVector::from_vec(vec![1.0, 2.0]),
            DVector::from_vec(vec![3.0, 4.0]),
        ]);
        let d = dataset(x);
        let view = DesignView::new(&d);
        assert_eq!(view.inter_column(1, 2).as_slice(), &[3.0, 8.0]);
        assert_eq!(view.quad_column(1).as_slice(), &[1.0, 4.0]);
    }

    #[test]
    fn out_of_range_model_is_rejected() {
        let d = dataset(DMatrix::identity(3, 2));
        let view = DesignView::new(&d);
        let m = ModelIndex { main: vec![3], inter: vec![], quad: vec![] };
        assert!(view.materialize_columns(&m).is_err());
    }

    #[test]
    fn apply_coefficients_matches_dense_product() {
        let x = DMatrix::from_fn(4, 3, |i, j| (i + 1) as f64 * 0.3 - (j as f64) * 0.7);
        let d = dataset(x);
        let view = DesignView::new(&d);
        let mut beta = CoefficientVector::zeros(3);
        beta.set_main(1, 2.0);
        beta.set_inter(1, 3, -1.5);
        beta.set_inter(2, 3, 0.25);
        let got = view.apply_coefficients(&beta);
        let want = view.main_column(1) * 2.0 + view.inter_column(1, 3) * -1.5
            + view.inter_column(2, 3) * 0.25;
        assert_relative_eq!(got, want, epsilon = 1e-14);
    }

    #[test]
    fn normalization_scales_columns_to_sqrt_n() {
        let mut d = dataset(DMatrix::from_fn(5, 3, |i, j| (i * 3 + j + 1) as f64));
        d.normalize_columns();
        for col in d.x.column_iter() {
            assert_relative_eq!(col.norm(), (5.0f64).sqrt(), epsilon = 1e-12);
        }
    }
}
