//! Minimax rate formulas, scenario classification and improvement ratios.
//!
//! The central quantity is xi(b, a) = b (1 + log(a/b)): the total price
//! (search plus estimation) of fitting b terms chosen from a candidates.
//! Every rate here is sigma^2 / n times the maximum of the main-effect price
//! xi(r1, p) and the interaction price xi(r2 ^ K, K), where K is the number
//! of eligible interaction slots under the heredity condition.
//!
//! ```
//! use intersel::model::HeredityCondition;
//! use intersel::rates::minimax_rate;
//!
//! let (n, p, r1, r2, s2) = (100, 50, 3, 2, 1.0);
//! let strong = minimax_rate(HeredityCondition::Strong, n, p, r1, r2, s2)?;
//! let weak = minimax_rate(HeredityCondition::Weak, n, p, r1, r2, s2)?;
//! let none = minimax_rate(HeredityCondition::None, n, p, r1, r2, s2)?;
//! assert!(strong <= weak && weak <= none);
//! # Ok::<(), intersel::error::Error>(())
//! ```

use crate::combinat::pairs;
use crate::error::{Error, Result};
use crate::model::HeredityCondition;
use serde::{Deserialize, Serialize};

/// xi(b, a) = b (1 + log(a/b)); xi(0, a) = 0 by continuity.
pub fn xi(b: f64, a: f64) -> Result<f64> {
    if !(a >= b) || b < 0.0 {
        return Err(Error::Domain(format!("xi requires a >= b >= 0, got a={a}, b={b}")));
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    Ok(b * (1.0 + (a / b).ln()))
}

/// Number of eligible interaction slots K_S given r1 active main effects:
/// C(r1, 2) under strong heredity, r1 (p - (r1 + 1)/2) under weak heredity
/// and C(p, 2) with no heredity. The weak count is the exact number of pairs
/// touching the active set, which keeps K_strong <= K_weak <= K_none at
/// every finite size.
pub fn interaction_slots(h: HeredityCondition, p: usize, r1: usize) -> u64 {
    match h {
        HeredityCondition::Strong => pairs(r1 as u64),
        HeredityCondition::Weak => {
            let (r1, p) = (r1 as u64, p as u64);
            r1 * p - pairs(r1) - r1
        }
        HeredityCondition::None => pairs(p as u64),
    }
}

fn check_budgets(n: usize, p: usize, r1: usize, r2: usize) -> Result<()> {
    if r1 < 2 || r1 > p {
        return Err(Error::Domain(format!("require 2 <= r1 <= p, got r1={r1}, p={p}")));
    }
    if r2 < 1 {
        return Err(Error::Domain("require r2 >= 1".into()));
    }
    if r1 + r2 > n {
        return Err(Error::Domain(format!("require r1 + r2 <= n, got {} > {n}", r1 + r2)));
    }
    Ok(())
}

/// Minimax rate shape (sigma^2/n) * max(xi(r1, p), xi(r2 ^ K, K)).
///
/// An r2 exceeding the slot count K is inactive and is clamped to K.
pub fn minimax_rate(
    h: HeredityCondition,
    n: usize,
    p: usize,
    r1: usize,
    r2: usize,
    sigma2: f64,
) -> Result<f64> {
    check_budgets(n, p, r1, r2)?;
    let k = interaction_slots(h, p, r1);
    let xi_main = xi(r1 as f64, p as f64)?;
    let r2_eff = (r2 as u64).min(k);
    let xi_inter = xi(r2_eff as f64, k as f64)?;
    Ok(sigma2 / n as f64 * xi_main.max(xi_inter))
}

/// Quadratic-model rate. Under strong or weak heredity the interaction-only
/// strong rate applies unchanged; under no heredity the main-effect price
/// uses rbar = max(r1, r3).
pub fn minimax_rate_quadratic(
    h: HeredityCondition,
    n: usize,
    p: usize,
    r1: usize,
    r2: usize,
    r3: usize,
    sigma2: f64,
) -> Result<f64> {
    check_budgets(n, p, r1, r2)?;
    if r3 > p {
        return Err(Error::Domain(format!("require r3 <= p, got r3={r3}, p={p}")));
    }
    match h {
        HeredityCondition::Strong | HeredityCondition::Weak => {
            minimax_rate(HeredityCondition::Strong, n, p, r1, r2, sigma2)
        }
        HeredityCondition::None => {
            let rbar = r1.max(r3);
            let k = interaction_slots(HeredityCondition::None, p, r1);
            let xi_main = xi(rbar as f64, p as f64)?;
            let xi_inter = xi((r2 as u64).min(k) as f64, k as f64)?;
            Ok(sigma2 / n as f64 * xi_main.max(xi_inter))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// r2 <= r1: heredity does not move the rate.
    S1,
    /// r1 <= r2 and log p <= r1.
    S2,
    /// r1 <= r2 and log p > r1.
    S3,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scenario::S1 => write!(f, "S1"),
            Scenario::S2 => write!(f, "S2"),
            Scenario::S3 => write!(f, "S3"),
        }
    }
}

/// Scenario classification with finite-sample boundary flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    /// Which price dominates under strong heredity.
    pub interaction_dominates: bool,
    /// Root of xi(r, r1^2) = xi(r1, p) in r, clamped to [0, r1^2].
    pub crossover_raw: f64,
    pub crossover_rounded: u64,
    /// Set when r2 and r1 are within 10% of each other.
    pub near_r1_r2_boundary: bool,
    /// Set when log p and r1 are within 10% of each other.
    pub near_logp_r1_boundary: bool,
}

/// Classifies (n, p, r1, r2) into the finite-sample surrogate of the three
/// asymptotic scenarios and reports the crossover sparsity r_* at which the
/// interaction price overtakes the main-effect price.
pub fn classify_scenario(_n: usize, p: usize, r1: usize, r2: usize) -> ScenarioReport {
    let scenario = if r2 <= r1 {
        Scenario::S1
    } else if (p as f64).ln() <= r1 as f64 {
        Scenario::S2
    } else {
        Scenario::S3
    };
    let a = (r1 * r1) as f64;
    let target = xi(r1 as f64, p as f64).expect("p >= r1 by construction");
    // xi(., a) is strictly increasing on (0, a], so bisection applies; when
    // even xi(a, a) = a falls short of the target the root is clamped at a.
    let crossover_raw = if xi(a, a).unwrap() <= target {
        a
    } else {
        let mut lo = 0.0f64;
        let mut hi = a;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if xi(mid, a).unwrap() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let k_strong = interaction_slots(HeredityCondition::Strong, p, r1) as f64;
    let xi_inter = xi((r2 as f64).min(k_strong), k_strong).unwrap();
    let within = |a: f64, b: f64| (a - b).abs() <= 0.1 * a.abs().max(b.abs());
    ScenarioReport {
        scenario,
        interaction_dominates: xi_inter > target,
        crossover_raw,
        crossover_rounded: crossover_raw.round() as u64,
        near_r1_r2_boundary: within(r1 as f64, r2 as f64),
        near_logp_r1_boundary: within((p as f64).ln(), r1 as f64),
    }
}

/// Exact finite-sample ratios M(strong)/M(weak) and M(strong)/M(none).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ImprovementRatios {
    pub strong_vs_weak: f64,
    pub strong_vs_none: f64,
}

pub fn improvement_ratios(
    n: usize,
    p: usize,
    r1: usize,
    r2: usize,
    sigma2: f64,
) -> Result<ImprovementRatios> {
    let strong = minimax_rate(HeredityCondition::Strong, n, p, r1, r2, sigma2)?;
    let weak = minimax_rate(HeredityCondition::Weak, n, p, r1, r2, sigma2)?;
    let none = minimax_rate(HeredityCondition::None, n, p, r1, r2, sigma2)?;
    Ok(ImprovementRatios { strong_vs_weak: strong / weak, strong_vs_none: strong / none })
}

/// Full per-parameter report emitted by the `rates` CLI command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport {
    pub n: usize,
    pub p: usize,
    pub r1: usize,
    pub r2: usize,
    pub sigma2: f64,
    pub xi_main: f64,
    pub xi_inter_strong: f64,
    pub xi_inter_weak: f64,
    pub xi_inter_none: f64,
    pub rate_strong: f64,
    pub rate_weak: f64,
    pub rate_none: f64,
    pub scenario: Scenario,
    pub interaction_dominates: bool,
    pub crossover_raw: f64,
    pub crossover_rounded: u64,
    pub near_r1_r2_boundary: bool,
    pub near_logp_r1_boundary: bool,
    pub strong_vs_weak: f64,
    pub strong_vs_none: f64,
}

pub fn rate_report(n: usize, p: usize, r1: usize, r2: usize, sigma2: f64) -> Result<RateReport> {
    check_budgets(n, p, r1, r2)?;
    let xi_of = |h: HeredityCondition| -> Result<f64> {
        let k = interaction_slots(h, p, r1);
        xi((r2 as u64).min(k) as f64, k as f64)
    };
    let sc = classify_scenario(n, p, r1, r2);
    let ratios = improvement_ratios(n, p, r1, r2, sigma2)?;
    Ok(RateReport {
        n,
        p,
        r1,
        r2,
        sigma2,
        xi_main: xi(r1 as f64, p as f64)?,
        xi_inter_strong: xi_of(HeredityCondition::Strong)?,
        xi_inter_weak: xi_of(HeredityCondition::Weak)?,
        xi_inter_none: xi_of(HeredityCondition::None)?,
        rate_strong: minimax_rate(HeredityCondition::Strong, n, p, r1, r2, sigma2)?,
        rate_weak: minimax_rate(HeredityCondition::Weak, n, p, r1, r2, sigma2)?,
        rate_none: minimax_rate(HeredityCondition::None, n, p, r1, r2, sigma2)?,
        scenario: sc.scenario,
        interaction_dominates: sc.interaction_dominates,
        crossover_raw: sc.crossover_raw,
        crossover_rounded: sc.crossover_rounded,
        near_r1_r2_boundary: sc.near_r1_r2_boundary,
        near_logp_r1_boundary: sc.near_logp_r1_boundary,
        strong_vs_weak: ratios.strong_vs_weak,
        strong_vs_none: ratios.strong_vs_none,
    })
}
