//! Least-squares projection onto a model's column space.

use crate::design::DesignView;
use crate::error::{Error, Result};
use crate::model::{CoefficientVector, ModelIndex};
use nalgebra::{DMatrix, DVector};

/// Result of projecting a response onto a model's columns.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: ModelIndex,
    /// Minimum-norm least-squares coefficients on the model's columns.
    pub coef: DVector<f64>,
    pub yhat: DVector<f64>,
    pub rss: f64,
    /// Numerical rank of the model submatrix.
    pub rank: usize,
}

/// Rank tolerance: max(n, s) * eps * sigma_max.
pub fn rank_tolerance(n: usize, s: usize, sigma_max: f64) -> f64 {
    n.max(s) as f64 * f64::EPSILON * sigma_max
}

/// Minimum-norm least-squares fit of `y` on the columns of model `m`.
///
/// Rank deficiency is handled through the singular value decomposition; the
/// empty model projects onto the zero subspace.
pub fn project(view: &DesignView, m: &ModelIndex, y: &DVector<f64>) -> Result<FitResult> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite response".into()));
    }
    let n = view.n();
    if y.len() != n {
        return Err(Error::Domain("response length mismatch".into()));
    }
    if m.is_empty() {
        return Ok(FitResult {
            model: m.clone(),
            coef: DVector::zeros(0),
            yhat: DVector::zeros(n),
            rss: y.norm_squared(),
            rank: 0,
        });
    }
    let z = view.materialize_columns(m)?;
    let (coef, rank) = min_norm_lstsq(&z, y);
    let yhat = &z * &coef;
    let rss = (y - &yhat).norm_squared();
    Ok(FitResult { model: m.clone(), coef, yhat, rss, rank })
}

/// Minimum-norm least-squares solution and numerical rank via SVD.
pub fn min_norm_lstsq(z: &DMatrix<f64>, y: &DVector<f64>) -> (DVector<f64>, usize) {
    let s = z.ncols();
    let svd = z.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = rank_tolerance(z.nrows(), s, sigma_max);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut coef = DVector::zeros(s);
    let mut rank = 0;
    for (k, &sv) in svd.singular_values.iter().enumerate() {
        if sv > tol {
            rank += 1;
            let proj = u.column(k).dot(y) / sv;
            coef += vt.row(k).transpose() * proj;
        }
    }
    (coef, rank)
}

/// Fast (rss, rank) evaluation for search scoring: solve the normal
/// equations by Cholesky when the Gram matrix is comfortably positive
/// definite, falling back to the SVD path on wide, singular or
/// ill-conditioned systems. Agrees with [`project`] up to roundoff.
pub fn quick_rss_rank(view: &DesignView, m: &ModelIndex, y: &DVector<f64>) -> Result<(f64, usize)> {
    let n = view.n();
    let s = m.len();
    if s == 0 {
        return Ok((y.norm_squared(), 0));
    }
    if s < n {
        let z = view.materialize_columns(m)?;
        let gram = z.transpose() * &z;
        if let Some(chol) = gram.clone().cholesky() {
            let l = chol.l();
            let mut dmin = f64::INFINITY;
            let mut dmax = 0.0f64;
            for i in 0..s {
                dmin = dmin.min(l[(i, i)]);
                dmax = dmax.max(l[(i, i)]);
            }
            // conservative conditioning guard; sqrt scale since L L^T = G
            if dmin > 1e-7 * dmax {
                let zty = z.transpose() * y;
                let coef = chol.solve(&zty);
                let rss = (y.norm_squared() - zty.dot(&coef)).max(0.0);
                return Ok((rss, s));
            }
        }
    }
    let fit = project(view, m, y)?;
    Ok((fit.rss, fit.rank))
}

/// Prediction loss (1/n) || yhat - Z beta_true ||^2, with Z beta_true
/// accumulated over the true support only.
pub fn loss(view: &DesignView, fit: &FitResult, beta_true: &CoefficientVector) -> f64 {
    let mean = view.apply_coefficients(beta_true);
    (&fit.yhat - mean).norm_squared() / view.n() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::Dataset;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let y = DVector::from_fn(n, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        Dataset::new(x, y, 1.0).unwrap()
    }

    #[test]
    fn full_rank_square_system_interpolates() {
        let d = random_dataset(3, 3, 1);
        let view = DesignView::new(&d);
        let m = ModelIndex::new(vec![1, 2, 3], vec![], vec![], 3).unwrap();
        let fit = project(&view, &m, &d.y).unwrap();
        assert!(fit.rss < 1e-18 * d.y.norm_squared().max(1.0));
        assert_relative_eq!(fit.yhat, d.y, epsilon = 1e-9);
    }

    #[test]
    fn empty_model_projects_to_zero() {
        let d = random_dataset(5, 2, 2);
        let view = DesignView::new(&d);
        let fit = project(&view, &ModelIndex::empty(), &d.y).unwrap();
        assert_eq!(fit.rank, 0);
        assert_relative_eq!(fit.rss, d.y.norm_squared(), max_relative = 1e-12);
    }

    #[test]
    fn coefficients_match_normal_equations_oracle() {
        let d = random_dataset(6, 2, 3);
        let view = DesignView::new(&d);
        let m = ModelIndex::new(vec![1, 2], vec![], vec![], 2).unwrap();
        let fit = project(&view, &m, &d.y).unwrap();
        let z = view.materialize_columns(&m).unwrap();
        let gram = z.transpose() * &z;
        let oracle = gram.try_inverse().unwrap() * z.transpose() * &d.y;
        assert_relative_eq!(fit.coef, oracle, epsilon = 1e-10);
    }

    #[test]
    fn residual_is_orthogonal_to_columns() {
        let d = random_dataset(8, 3, 4);
        let view = DesignView::new(&d);
        let m = ModelIndex::new(vec![1, 2, 3], vec![(1, 2)], vec![], 3).unwrap();
        let fit = project(&view, &m, &d.y).unwrap();
        let z = view.materialize_columns(&m).unwrap();
        let resid = &d.y - &fit.yhat;
        for col in z.column_iter() {
            assert!(col.dot(&resid).abs() <= 1e-8 * d.y.norm());
        }
        // Pythagoras
        assert_relative_eq!(
            d.y.norm_squared(),
            fit.yhat.norm_squared() + fit.rss,
            max_relative = 1e-8
        );
    }

    #[test]
    fn projection_is_idempotent() {
        let d = random_dataset(7, 3, 5);
        let view = DesignView::new(&d);
        let m = ModelIndex::new(vec![1, 3], vec![(1, 3)], vec![], 3).unwrap();
        let fit = project(&view, &m, &d.y).unwrap();
        let again = project(&view, &m, &fit.yhat).unwrap();
        assert_relative_eq!(again.yhat, fit.yhat, max_relative = 1e-8);
    }

    #[test]
    fn rank_deficiency_detected() {
        // duplicated column: main 1 appears also as an interaction of an
        // all-ones column with itself is not expressible, so just duplicate X
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = DVector::from_fn(5, |_, _| rng.gen::<f64>());
        let x = DMatrix::from_columns(&[c.clone(), c.clone()]);
        let y = DVector::from_fn(5, |_, _| rng.gen::<f64>());
        let d = Dataset::new(x, y, 1.0).unwrap();
        let view = DesignView::new(&d);
        let m = ModelIndex::new(vec![1, 2], vec![], vec![], 2).unwrap();
        let fit = project(&view, &m, &d.y).unwrap();
        assert_eq!(fit.rank, 1);
    }

    #[test]
    fn adding_columns_never_increases_rss() {
        let d = random_dataset(10, 4, 7);
        let view = DesignView::new(&d);
        use crate::model::{enumerate_models, HeredityCondition};
        for k1 in 1..=4usize {
            for model in enumerate_models(4, k1, 0, HeredityCondition::Strong) {
                let fit = project(&view, &model, &d.y).unwrap();
                for extra in 1..=4usize {
                    if model.main.contains(&extra) {
                        continue;
                    }
                    let mut bigger = model.main.clone();
                    bigger.push(extra);
                    let big = ModelIndex::new(bigger, vec![], vec![], 4).unwrap();
                    let fit2 = project(&view, &big, &d.y).unwrap();
                    assert!(fit2.rss <= fit.rss + 1e-10 * d.y.norm_squared());
                }
            }
        }
    }

    #[test]
    fn quick_rss_rank_agrees_with_projection() {
        let d = random_dataset(12, 4, 11);
        let view = DesignView::new(&d);
        use crate::model::{enumerate_models, HeredityCondition};
        for k1 in 0..=4usize {
            let k2max = k1 * k1.saturating_sub(1) / 2;
            for k2 in 0..=k2max {
                for model in enumerate_models(4, k1.max(1), k2, HeredityCondition::Strong) {
                    let fit = project(&view, &model, &d.y).unwrap();
                    let (rss, rank) = quick_rss_rank(&view, &model, &d.y).unwrap();
                    assert_relative_eq!(rss, fit.rss, max_relative = 1e-9, epsilon = 1e-9);
                    assert_eq!(rank, fit.rank);
                }
            }
        }
        // rank-deficient duplicate columns go through the SVD fallback
        let c = DVector::from_fn(5, |i, _| i as f64 + 1.0);
        let x = DMatrix::from_columns(&[c.clone(), c.clone()]);
        let dd = Dataset::new(x, DVector::from_element(5, 1.0), 1.0).unwrap();
        let vv = DesignView::new(&dd);
        let m = ModelIndex::new(vec![1, 2], vec![], vec![], 2).unwrap();
        let (_, rank) = quick_rss_rank(&vv, &m, &dd.y).unwrap();
        assert_eq!(rank, 1);
    }

    #[test]
    fn loss_examples() {
        let d = random_dataset(6, 3, 8);
        let view = DesignView::new(&d);
        let mut beta = CoefficientVector::zeros(3);
        beta.set_main(1, 1.0);
        beta.set_inter(1, 2, 0.5);
        // fit on the true support: if y equals the mean exactly, loss is 0
        let mean = view.apply_coefficients(&beta);
        let m = beta.support();
        let fit = project(&view, &m, &mean).unwrap();
        assert!(loss(&view, &fit, &beta) < 1e-20);
        // beta_true = 0: loss is ||yhat||^2 / n
        let zero = CoefficientVector::zeros(3);
        let fit2 = project(&view, &m, &d.y).unwrap();
        assert_relative_eq!(
            loss(&view, &fit2, &zero),
            fit2.yhat.norm_squared() / 6.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn loss_matches_dense_oracle() {
        let d = random_dataset(9, 4, 9);
        let view = DesignView::new(&d);
        let mut beta = CoefficientVector::zeros(4);
        beta.set_main(2, 0.7);
        beta.set_inter(2, 4, -1.1);
        let m = ModelIndex::new(vec![1, 2], vec![(1, 2)], vec![], 4).unwrap();
        let fit = project(&view, &m, &d.y).unwrap();
        // dense oracle: build the whole expanded design explicitly
        let full = ModelIndex::full(4);
        let z_full = view.materialize_columns(&full).unwrap();
        let mut dense_beta = DVector::zeros(z_full.ncols());
        dense_beta[1] = 0.7; // main 2
        dense_beta[4 + CoefficientVector::pair_slot(4, 2, 4)] = -1.1;
        let mean = z_full * dense_beta;
        let oracle = (&fit.yhat - mean).norm_squared() / 9.0;
        assert_relative_eq!(loss(&view, &fit, &beta), oracle, max_relative = 1e-12);
    }
}
