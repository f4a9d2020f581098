//! Monte-Carlo machinery: data generation, risk estimation over seeded
//! replications, and the rate-scaling experiment grid.
//!
//! ```
//! use intersel::harness::{estimate_risk, ExperimentConfig, SelectorMode, RNG_ALGORITHM};
//! use intersel::model::HeredityCondition;
//!
//! let cfg = ExperimentConfig {
//!     n_grid: vec![100], p_grid: vec![4], r1: 2, r2: 1,
//!     heredity: HeredityCondition::Strong,
//!     c_beta: 3.0, sigma2: 1.0, replications: 200, seed: 42,
//!     selector: SelectorMode::Fixed, redraw_design: false,
//!     lambda: None, rng: RNG_ALGORITHM.to_string(),
//! };
//! let est = estimate_risk(&cfg, 100, 4)?;
//! let analytic = 3.0 / 100.0; // sigma^2 (r1 + r2) / n
//! assert!((est.mean - analytic).abs() < 4.0 * est.se.max(1e-4));
//! # Ok::<(), intersel::error::Error>(())
//! ```

use crate::combinat::compensated_sum;
use crate::criterion::{ComplexityConfig, ComplexityTable};
use crate::design::{Dataset, DesignView};
use crate::error::{Error, Result};
use crate::fit::{loss, project};
use crate::model::{CoefficientVector, HeredityCondition, ModelIndex};
use crate::rates::minimax_rate;
use crate::search::{select_exhaustive, select_stochastic, DEFAULT_BUDGET_CAP};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Name of the env var that caps worker threads for replications.
pub const THREADS_ENV: &str = "HEREDITY_SELECT_THREADS";

/// RNG algorithm recorded in output metadata.
pub const RNG_ALGORITHM: &str = "chacha8";

/// How each replication selects a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum SelectorMode {
    Exhaustive,
    Stochastic { iters: u64, restarts: u64 },
    /// Skip selection and project onto the true model (analytic baseline).
    Fixed,
}

/// Full configuration of a rate-scaling experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_grid: Vec<usize>,
    pub p_grid: Vec<usize>,
    pub r1: usize,
    pub r2: usize,
    pub heredity: HeredityCondition,
    /// Nonzero coefficients are set to `c_beta * sigma`.
    #[serde(default = "default_c_beta")]
    pub c_beta: f64,
    pub sigma2: f64,
    pub replications: u64,
    pub seed: u64,
    pub selector: SelectorMode,
    /// Redraw X each replication instead of fixing it per cell.
    #[serde(default)]
    pub redraw_design: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Recorded in the JSON sidecar.
    #[serde(default = "default_rng")]
    pub rng: String,
}

fn default_c_beta() -> f64 {
    3.0
}

fn default_rng() -> String {
    RNG_ALGORITHM.to_string()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::Domain("replications must be >= 1".into()));
        }
        if !(self.sigma2 > 0.0) {
            return Err(Error::Domain("sigma2 must be positive".into()));
        }
        if self.n_grid.is_empty() || self.p_grid.is_empty() {
            return Err(Error::Domain("n-grid and p-grid must be nonempty".into()));
        }
        for &n in &self.n_grid {
            if self.r1 + self.r2 > n {
                return Err(Error::Domain(format!(
                    "r1 + r2 = {} exceeds n = {n}",
                    self.r1 + self.r2
                )));
            }
        }
        for &p in &self.p_grid {
            if self.r1 > p {
                return Err(Error::Domain(format!("r1 = {} exceeds p = {p}", self.r1)));
            }
            true_model(p, self.r1, self.r2, self.heredity)?;
        }
        Ok(())
    }
}

/// Aggregated Monte-Carlo risk for one experiment cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub se: f64,
    pub losses: Vec<f64>,
    /// Frequencies of (family, k1, k2) among selected models.
    pub histogram: BTreeMap<String, u64>,
}

/// Draws X with i.i.d. standard normal entries and y = Zβ + ε, fully
/// determined by the seed. The mean uses only the true support of β.
pub fn generate(n: usize, p: usize, beta: &CoefficientVector, sigma2: f64, seed: u64) -> Result<Dataset> {
    if beta.p != p {
        return Err(Error::Domain(format!(
            "coefficient vector is for p = {}, dataset has p = {p}",
            beta.p
        )));
    }
    if sigma2 < 0.0 {
        return Err(Error::Domain("sigma2 must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let x = DMatrix::from_fn(n, p, |_, _| normal.sample(&mut rng));
    let d0 = Dataset::new(x.clone(), DVector::zeros(n), 1.0)?;
    let mean = DesignView::new(&d0).apply_coefficients(beta);
    let sigma = sigma2.sqrt();
    let y = if sigma > 0.0 {
        let eps = DVector::from_fn(n, |_, _| {
            let e: f64 = normal.sample(&mut rng);
            e * sigma
        });
        mean + eps
    } else {
        mean
    };
    Dataset::new(x, y, sigma2.max(f64::MIN_POSITIVE))
}

/// Noise-only redraw on a fixed design: y = Zβ + ε with fresh ε.
fn redraw_noise(x: &DMatrix<f64>, beta: &CoefficientVector, sigma2: f64, rng: &mut ChaCha8Rng) -> Result<Dataset> {
    let n = x.nrows();
    let d0 = Dataset::new(x.clone(), DVector::zeros(n), 1.0)?;
    let mean = DesignView::new(&d0).apply_coefficients(beta);
    let sigma = sigma2.sqrt();
    let normal = StandardNormal;
    let eps = DVector::from_fn(n, |_, _| {
        let e: f64 = normal.sample(rng);
        e * sigma
    });
    Dataset::new(x.clone(), mean + eps, sigma2)
}

/// Canonical true model with r1 main effects 1..r1 and r2 interactions
/// placed according to the truth's heredity condition.
pub fn true_model(p: usize, r1: usize, r2: usize, h: HeredityCondition) -> Result<ModelIndex> {
    if r1 > p || r1 == 0 {
        return Err(Error::Domain(format!("need 1 <= r1 <= p, got r1 = {r1}, p = {p}")));
    }
    let main: Vec<usize> = (1..=r1).collect();
    let pairs: Vec<(usize, usize)> = match h {
        // both parents among the mains
        HeredityCondition::Strong => (1..=r1)
            .flat_map(|i| ((i + 1)..=r1).map(move |j| (i, j)))
            .collect(),
        // exactly one parent among the mains
        HeredityCondition::Weak => (1..=r1)
            .flat_map(|i| ((r1 + 1)..=p).map(move |j| (i, j)))
            .collect(),
        // no parent among the mains
        HeredityCondition::None => ((r1 + 1)..=p)
            .flat_map(|i| ((i + 1)..=p).map(move |j| (i, j)))
            .collect(),
    };
    if r2 > pairs.len() {
        return Err(Error::Domain(format!(
            "r2 = {r2} exceeds the {} pairs available under {h} placement",
            pairs.len()
        )));
    }
    ModelIndex::new(main, pairs[..r2].to_vec(), vec![], p)
}

/// Coefficient vector supported on `true_model` with all nonzero entries
/// equal to `c_beta * sigma`.
pub fn true_beta(p: usize, model: &ModelIndex, c_beta: f64, sigma2: f64) -> CoefficientVector {
    let v = c_beta * sigma2.sqrt();
    let mut beta = CoefficientVector::zeros(p);
    for &j in &model.main {
        beta.set_main(j, v);
    }
    for &(i, j) in &model.inter {
        beta.set_inter(i, j, v);
    }
    beta
}

/// Builds a rayon pool honoring the HEREDITY_SELECT_THREADS cap.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let t: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        if t == 0 {
            return Err(Error::Domain(format!("{THREADS_ENV} must be >= 1")));
        }
        builder = builder.num_threads(t);
    }
    builder
        .build()
        .map_err(|e| Error::Domain(format!("failed to build thread pool: {e}")))
}

fn replication_loss(
    cfg: &ExperimentConfig,
    n: usize,
    p: usize,
    x_fixed: &DMatrix<f64>,
    beta: &CoefficientVector,
    model_true: &ModelIndex,
    table: &ComplexityTable,
    rep: u64,
) -> Result<(f64, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep + 1);
    let data = if cfg.redraw_design {
        let normal = StandardNormal;
        let x = DMatrix::from_fn(n, p, |_, _| normal.sample(&mut rng));
        redraw_noise(&x, beta, cfg.sigma2, &mut rng)?
    } else {
        redraw_noise(x_fixed, beta, cfg.sigma2, &mut rng)?
    };
    let view = DesignView::new(&data);
    let (model, label) = match &cfg.selector {
        SelectorMode::Fixed => (model_true.clone(), "fixed:truth".to_string()),
        SelectorMode::Exhaustive => {
            let res = select_exhaustive(&view, table, DEFAULT_BUDGET_CAP).map_err(|e| match e {
                Error::BudgetExceeded { count, cap } => Error::Domain(format!(
                    "replication {rep}: exhaustive budget exceeded ({count} > {cap})"
                )),
                other => other,
            })?;
            let label = format!("{:?}:k1={},k2={}", res.family, res.k1, res.k2);
            (res.model, label)
        }
        SelectorMode::Stochastic { iters, restarts } => {
            // replication-specific seed keeps restart streams disjoint
            let rep_seed = cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(rep);
            let res = select_stochastic(&view, table, *iters, *restarts, rep_seed)?;
            let label = format!("{:?}:k1={},k2={}", res.family, res.k1, res.k2);
            (res.model, label)
        }
    };
    let fit = project(&view, &model, &data.y)?;
    Ok((loss(&view, &fit, beta), label))
}

/// Monte-Carlo risk of the selected estimator at one (n, p) cell.
/// Replication r draws from stream (seed, r), so the result is independent
/// of the parallel schedule; the reduction is a sequential compensated sum
/// over the replication-indexed loss vector.
pub fn estimate_risk(cfg: &ExperimentConfig, n: usize, p: usize) -> Result<RiskEstimate> {
    cfg.validate()?;
    let model_true = true_model(p, cfg.r1, cfg.r2, cfg.heredity)?;
    let beta = true_beta(p, &model_true, cfg.c_beta, cfg.sigma2);
    let mut config = ComplexityConfig::new(p, n);
    let table = match cfg.lambda {
        Some(l) => {
            config.lambda = l;
            ComplexityTable::new_unchecked_lambda(config)?
        }
        None => ComplexityTable::new(config)?,
    };

    // fixed design drawn from stream 0
    let mut rng0 = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng0.set_stream(0);
    let normal = StandardNormal;
    let x_fixed = DMatrix::from_fn(n, p, |_, _| normal.sample(&mut rng0));

    let pool = thread_pool()?;
    let results: Vec<Result<(f64, String)>> = pool.install(|| {
        use rayon::prelude::*;
        (0..cfg.replications)
            .into_par_iter()
            .map(|rep| replication_loss(cfg, n, p, &x_fixed, &beta, &model_true, &table, rep))
            .collect()
    });

    let mut losses = Vec::with_capacity(cfg.replications as usize);
    let mut histogram: BTreeMap<String, u64> = BTreeMap::new();
    for r in results {
        let (l, label) = r?;
        losses.push(l);
        *histogram.entry(label).or_insert(0) += 1;
    }
    let r = losses.len() as f64;
    let mean = compensated_sum(losses.iter().copied()) / r;
    let var = if losses.len() > 1 {
        compensated_sum(losses.iter().map(|l| (l - mean) * (l - mean))) / (r - 1.0)
    } else {
        0.0
    };
    Ok(RiskEstimate {
        mean,
        se: (var / r).sqrt(),
        losses,
        histogram,
    })
}

/// One row of the rate-scaling table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateScalingRow {
    pub n: usize,
    pub p: usize,
    pub r1: usize,
    pub r2: usize,
    pub heredity: HeredityCondition,
    pub risk: f64,
    pub se: f64,
    pub rate: f64,
    pub ratio: f64,
    pub seed: u64,
}

/// Runs `estimate_risk` on every (n, p) grid cell and pairs the empirical
/// risk with the theoretical minimax rate.
pub fn rate_scaling_experiment(cfg: &ExperimentConfig) -> Result<Vec<RateScalingRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &p in &cfg.p_grid {
        for &n in &cfg.n_grid {
            let est = estimate_risk(cfg, n, p)?;
            let rate = minimax_rate(cfg.heredity, n, p, cfg.r1, cfg.r2, cfg.sigma2)?;
            rows.push(RateScalingRow {
                n,
                p,
                r1: cfg.r1,
                r2: cfg.r2,
                heredity: cfg.heredity,
                risk: est.mean,
                se: est.se,
                rate,
                ratio: est.mean / rate,
                seed: cfg.seed,
            });
        }
    }
    Ok(rows)
}

/// Least-squares slope of log(risk) on log(rate) across rows.
pub fn log_log_slope(rows: &[RateScalingRow]) -> f64 {
    let xs: Vec<f64> = rows.iter().map(|r| r.rate.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.risk.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
