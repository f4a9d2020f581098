//! Sparse Riesz Condition certification and refutation.
//!
//! The two-sided condition b1 ||beta||_2 <= ||Z beta||_2 / sqrt(n) <= b2
//! ||beta||_2 over all sparse supports is certified by computing extremal
//! singular values of the scaled submatrices Z_I / sqrt(n).
//!
//! ```
//! use intersel::design::{Dataset, DesignView};
//! use intersel::spectral::{src_check, SrcMode};
//! use nalgebra::{DMatrix, DVector};
//!
//! // an orthogonal design: b1_hat = b2_hat = 1 at the main-effect level
//! let x = DMatrix::<f64>::identity(4, 2) * 2.0;
//! let data = Dataset::new(x, DVector::zeros(4), 1.0)?;
//! let view = DesignView::new(&data);
//! let cert = src_check(&view, 1, 0, 0, SrcMode::Exhaustive, 0, 0)?;
//! assert!(cert.b1_hat > 0.0 && cert.b2_hat >= cert.b1_hat);
//! # Ok::<(), intersel::error::Error>(())
//! ```

use crate::design::DesignView;
use crate::error::{Error, Result};
use crate::model::{all_pairs, ModelIndex};
use itertools::Itertools;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SrcMode {
    Exhaustive,
    Sampled,
}

/// Outcome of an SRC scan over sparse supports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SrcCertificate {
    pub l1: usize,
    pub l2: usize,
    pub l3: usize,
    /// Minimum over tested supports of sigma_min(Z_I / sqrt(n)).
    pub b1_hat: f64,
    /// Maximum over tested supports of sigma_max(Z_I / sqrt(n)).
    pub b2_hat: f64,
    pub mode: SrcMode,
    /// Worst-case support (the one attaining b1_hat).
    pub witness: ModelIndex,
    pub supports_tested: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Default number of supports in sampled mode.
pub const DEFAULT_SAMPLE_BUDGET: usize = 10_000;

fn singular_extremes(z: &DMatrix<f64>) -> (f64, f64) {
    let (n, s) = (z.nrows(), z.ncols());
    let sv = z.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    // a support wider than n cannot be injective
    let smin = if s > n { 0.0 } else { sv.iter().cloned().fold(f64::INFINITY, f64::min) };
    (smin, smax)
}

fn evaluate_support(
    view: &DesignView,
    support: &ModelIndex,
    best: &mut (f64, f64, ModelIndex),
) -> Result<()> {
    let z = view.materialize_columns(support)? / (view.n() as f64).sqrt();
    let (smin, smax) = singular_extremes(&z);
    if smin < best.0 {
        best.0 = smin;
        best.2 = support.clone();
    }
    if smax > best.1 {
        best.1 = smax;
    }
    Ok(())
}

/// Scans supports within the budgets (min(2*l, cap) per block, following the
/// SRC statement) and records extremal singular values of Z_I / sqrt(n).
///
/// In exhaustive mode every nonempty support within budget is visited; in
/// sampled mode `budget` supports are drawn from a seeded stream and the
/// certificate is flagged non-exhaustive.
pub fn src_check(
    view: &DesignView,
    l1: usize,
    l2: usize,
    l3: usize,
    mode: SrcMode,
    budget: usize,
    seed: u64,
) -> Result<SrcCertificate> {
    let p = view.p();
    let np = p * (p - 1) / 2;
    let cap1 = (2 * l1).min(p);
    let cap2 = (2 * l2).min(np);
    let cap3 = if view.quadratic_enabled { (2 * l3).min(p) } else { 0 };
    if cap1 + cap2 + cap3 == 0 {
        return Err(Error::Domain("all support budgets are zero".into()));
    }
    let mut best = (f64::INFINITY, 0.0_f64, ModelIndex::empty());
    let mut tested = 0usize;
    match mode {
        SrcMode::Exhaustive => {
            let pair_pool = all_pairs(p);
            for k1 in 0..=cap1 {
                for main in (1..=p).combinations(k1) {
                    for k2 in 0..=cap2 {
                        for inter in pair_pool.iter().cloned().combinations(k2) {
                            for k3 in 0..=cap3 {
                                for quad in (1..=p).combinations(k3) {
                                    if k1 + k2 + k3 == 0 {
                                        continue;
                                    }
                                    let support = ModelIndex {
                                        main: main.clone(),
                                        inter: inter.clone(),
                                        quad,
                                    };
                                    evaluate_support(view, &support, &mut best)?;
                                    tested += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        SrcMode::Sampled => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pair_pool = all_pairs(p);
            let idx_pool: Vec<usize> = (1..=p).collect();
            while tested < budget {
                let k1 = rng.gen_range(0..=cap1);
                let k2 = rng.gen_range(0..=cap2);
                let k3 = if cap3 > 0 { rng.gen_range(0..=cap3) } else { 0 };
                if k1 + k2 + k3 == 0 {
                    continue;
                }
                let mut main: Vec<usize> =
                    idx_pool.choose_multiple(&mut rng, k1).cloned().collect();
                main.sort_unstable();
                let mut inter: Vec<(usize, usize)> =
                    pair_pool.choose_multiple(&mut rng, k2).cloned().collect();
                inter.sort_unstable();
                let mut quad: Vec<usize> =
                    idx_pool.choose_multiple(&mut rng, k3).cloned().collect();
                quad.sort_unstable();
                let support = ModelIndex { main, inter, quad };
                evaluate_support(view, &support, &mut best)?;
                tested += 1;
            }
        }
    }
    Ok(SrcCertificate {
        l1,
        l2,
        l3,
        b1_hat: best.0,
        b2_hat: best.1,
        mode,
        witness: best.2,
        supports_tested: tested,
        seed: match mode {
            SrcMode::Sampled => Some(seed),
            SrcMode::Exhaustive => None,
        },
    })
}

/// Looks for a pair of main-effect columns whose angle refutes a 2-sparse SRC
/// with the given b1: |cos theta| > 1 - b1^2.
///
/// Requires every column to be normalized to norm sqrt(n).
pub fn src_failure_witness(view: &DesignView, b1: f64) -> Result<Option<(usize, usize)>> {
    let n = view.n() as f64;
    let target = n.sqrt();
    for j in 1..=view.p() {
        let norm = view.main_column(j).norm();
        if (norm - target).abs() > 1e-8 * target {
            return Err(Error::Precondition(format!(
                "column {j} has norm {norm:.6}, expected sqrt(n) = {target:.6}"
            )));
        }
    }
    let threshold = 1.0 - b1 * b1;
    for i in 1..=view.p() {
        let ci = view.main_column(i);
        for j in (i + 1)..=view.p() {
            let cj = view.main_column(j);
            let cos = ci.dot(&cj) / (ci.norm() * cj.norm());
            if cos.abs() > threshold {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::Dataset;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::Rng;

    fn dataset(x: DMatrix<f64>) -> Dataset {
        let n = x.nrows();
        Dataset::new(x, DVector::zeros(n), 1.0).unwrap()
    }

    #[test]
    fn orthonormal_scaled_columns_give_unit_bounds() {
        let n = 4;
        let x = DMatrix::<f64>::identity(n, n) * (n as f64).sqrt();
        let d = dataset(x);
        let view = DesignView::new(&d);
        let cert = src_check(&view, 1, 0, 0, SrcMode::Exhaustive, 0, 0).unwrap();
        assert_relative_eq!(cert.b1_hat, 1.0, epsilon = 1e-12);
        assert_relative_eq!(cert.b2_hat, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn duplicated_column_yields_zero_b1_with_witness() {
        let c = DVector::from_vec(vec![1.0, 2.0, -1.0, 0.5]);
        let x = DMatrix::from_columns(&[c.clone(), c.clone()]);
        let d = dataset(x);
        let view = DesignView::new(&d);
        let cert = src_check(&view, 1, 0, 0, SrcMode::Exhaustive, 0, 0).unwrap();
        assert!(cert.b1_hat < 1e-12);
        assert_eq!(cert.witness.main, vec![1, 2]);
    }

    #[test]
    fn exhaustive_matches_per_support_svd_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let x = DMatrix::from_fn(8, 4, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let d = dataset(x);
        let view = DesignView::new(&d);
        let cert = src_check(&view, 2, 1, 0, SrcMode::Exhaustive, 0, 0).unwrap();

        // independent oracle: loop supports, SVD each
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        let pairs = all_pairs(4);
        for k1 in 0..=4usize {
            for main in (1..=4usize).combinations(k1) {
                for k2 in 0..=2usize {
                    for inter in pairs.iter().cloned().combinations(k2) {
                        if k1 + k2 == 0 {
                            continue;
                        }
                        let m = ModelIndex { main: main.clone(), inter, quad: vec![] };
                        let z = view.materialize_columns(&m).unwrap() / (8.0f64).sqrt();
                        let sv = z.singular_values();
                        lo = lo.min(sv.min());
                        hi = hi.max(sv.max());
                    }
                }
            }
        }
        assert_relative_eq!(cert.b1_hat, lo, max_relative = 1e-10);
        assert_relative_eq!(cert.b2_hat, hi, max_relative = 1e-10);
    }

    #[test]
    fn certificate_bounds_hold_on_random_beta() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = DMatrix::from_fn(10, 3, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let d = dataset(x);
        let view = DesignView::new(&d);
        let cert = src_check(&view, 1, 1, 0, SrcMode::Exhaustive, 0, 0).unwrap();
        // random beta on a tested support
        for _ in 0..50 {
            let m = ModelIndex { main: vec![1, 3], inter: vec![(1, 2)], quad: vec![] };
            let z = view.materialize_columns(&m).unwrap();
            let beta = DVector::from_fn(3, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
            let lhs = (z * &beta).norm() / (10.0f64).sqrt();
            let norm = beta.norm();
            assert!(cert.b1_hat * norm <= lhs + 1e-10);
            assert!(lhs <= cert.b2_hat * norm + 1e-10);
        }
    }

    #[test]
    fn sampled_mode_is_deterministic_and_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = DMatrix::from_fn(6, 4, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let d = dataset(x);
        let view = DesignView::new(&d);
        let a = src_check(&view, 1, 1, 0, SrcMode::Sampled, 200, 3).unwrap();
        let b = src_check(&view, 1, 1, 0, SrcMode::Sampled, 200, 3).unwrap();
        assert_eq!(a.b1_hat, b.b1_hat);
        assert_eq!(a.witness, b.witness);
        assert_eq!(a.seed, Some(3));
        assert_eq!(a.mode, SrcMode::Sampled);
    }

    #[test]
    fn witness_examples() {
        // two orthogonal sqrt(n)-normalized columns: no violation at b1 = 0.5
        let n = 2;
        let x = DMatrix::<f64>::identity(n, n) * (n as f64).sqrt();
        let d = dataset(x);
        let view = DesignView::new(&d);
        assert!(src_failure_witness(&view, 0.5).unwrap().is_none());

        // duplicated column: witness for any b1 > 0
        let c = DVector::from_vec(vec![1.0, 1.0]);
        let x = DMatrix::from_columns(&[c.clone(), c.clone()]);
        let d = dataset(x);
        let view = DesignView::new(&d);
        assert_eq!(src_failure_witness(&view, 0.1).unwrap(), Some((1, 2)));
    }

    #[test]
    fn witness_agrees_with_src_check() {
        // 10 unit columns in a rank-2 span: a 2-sparse violation at b1 = 0.9
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 16;
        let p = 10;
        let mut x = DMatrix::zeros(n, p);
        for j in 0..p {
            let angle = rng.gen::<f64>() * std::f64::consts::PI;
            x[(0, j)] = angle.cos();
            x[(1, j)] = angle.sin();
        }
        let mut d = dataset(x);
        d.normalize_columns();
        let view = DesignView::new(&d);
        let b1 = 0.9;
        let witness = src_failure_witness(&view, b1).unwrap();
        assert!(witness.is_some(), "expected a violating pair at this density");
        let cert = src_check(&view, 1, 0, 0, SrcMode::Exhaustive, 0, 0).unwrap();
        assert!(cert.b1_hat < b1);
    }

    #[test]
    fn unnormalized_columns_are_rejected() {
        let x = DMatrix::from_columns(&[
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![0.0, 3.0]),
        ]);
        let d = dataset(x);
        let view = DesignView::new(&d);
        assert!(src_failure_witness(&view, 0.5).is_err());
    }
}
