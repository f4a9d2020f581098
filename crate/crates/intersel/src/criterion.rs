//! The ABC model-selection criterion and model descriptive complexities.
//!
//! Each candidate model is scored as rss + 2 * rank * sigma^2 + lambda *
//! sigma^2 * C, where C is a code-length-style complexity. The complexities
//! of the four model families must jointly satisfy the Kraft inequality
//! sum exp(-C) <= 1; when the raw assignment exceeds 1 a constant `renorm`
//! is added to every C, which shifts all criterion values per family
//! uniformly and restores the inequality without changing any argmin.
//!
//! ```
//! use intersel::criterion::{ComplexityConfig, ComplexityTable};
//!
//! let table = ComplexityTable::new(ComplexityConfig::new(6, 20))?;
//! let report = table.kraft_check();
//! assert!(report.ok); // sum <= 1 + 1e-12 after renormalization
//! # Ok::<(), intersel::error::Error>(())
//! ```

use crate::combinat::{compensated_sum, ln_binomial, log_sum_exp, pairs};
use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::model::{eligible_interaction_count, HeredityCondition};
use serde::{Deserialize, Serialize};

/// Smallest lambda with a risk guarantee.
pub const LAMBDA_THEORY: f64 = 5.1 / std::f64::consts::LN_2;

/// The candidate-family label of a scored model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// The single full model (and, by convention, the empty model).
    Full,
    Strong,
    Weak,
    None,
}

impl Family {
    pub const HEREDITY: [Family; 3] = [Family::Strong, Family::Weak, Family::None];

    pub fn heredity(self) -> Option<HeredityCondition> {
        match self {
            Family::Full => None,
            Family::Strong => Some(HeredityCondition::Strong),
            Family::Weak => Some(HeredityCondition::Weak),
            Family::None => Some(HeredityCondition::None),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Full => write!(f, "full"),
            Family::Strong => write!(f, "strong"),
            Family::Weak => write!(f, "weak"),
            Family::None => write!(f, "none"),
        }
    }
}

/// Configuration of the complexity assignment.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexityConfig {
    pub lambda: f64,
    pub pi0: f64,
    pub pi1: f64,
    pub pi2: f64,
    pub pi3: f64,
    pub p: usize,
    pub n: usize,
}

impl ComplexityConfig {
    /// Defaults: lambda at the theory boundary, equal prior mass on the four
    /// family slots.
    pub fn new(p: usize, n: usize) -> Self {
        ComplexityConfig {
            lambda: LAMBDA_THEORY,
            pi0: 0.25,
            pi1: 0.25,
            pi2: 0.25,
            pi3: 0.25,
            p,
            n,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    fn validate(&self, theory_mode: bool) -> Result<()> {
        if self.p == 0 || self.n == 0 {
            return Err(Error::Domain("p and n must be positive".into()));
        }
        let s = self.pi0 + self.pi1 + self.pi2 + self.pi3;
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("prior weights sum to {s}, expected 1")));
        }
        if [self.pi0, self.pi1, self.pi2, self.pi3].iter().any(|&pi| pi <= 0.0) {
            return Err(Error::Domain("prior weights must be positive".into()));
        }
        if theory_mode && self.lambda < LAMBDA_THEORY - 1e-12 {
            return Err(Error::Domain(format!(
                "lambda = {} below the theory bound {LAMBDA_THEORY}",
                self.lambda
            )));
        }
        if self.lambda <= 0.0 {
            return Err(Error::Domain("lambda must be positive".into()));
        }
        Ok(())
    }
}

/// Finalized complexity assignment with its Kraft renormalization constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexityTable {
    pub config: ComplexityConfig,
    /// Added to every complexity so that sum exp(-C) <= 1.
    pub renorm: f64,
}

/// Outcome of the Kraft-inequality check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KraftReport {
    pub sum: f64,
    pub ok: bool,
}

impl ComplexityTable {
    /// Builds the table and runs the Kraft check, renormalizing if needed.
    pub fn new(config: ComplexityConfig) -> Result<Self> {
        Self::build(config, true)
    }

    /// Like [`ComplexityTable::new`] but without the lambda >= 5.1/log 2
    /// restriction.
    pub fn new_unchecked_lambda(config: ComplexityConfig) -> Result<Self> {
        Self::build(config, false)
    }

    fn build(config: ComplexityConfig, theory_mode: bool) -> Result<Self> {
        config.validate(theory_mode)?;
        let mut table = ComplexityTable { config, renorm: 0.0 };
        let raw = table.kraft_check();
        if raw.sum > 1.0 {
            table.renorm = raw.sum.ln();
        }
        Ok(table)
    }

    /// Upper end of the k2 range for a heredity family at a given k1.
    pub fn k2_cap(&self, family: Family, k1: usize) -> Result<u64> {
        let h = family
            .heredity()
            .ok_or_else(|| Error::Domain("full family has no (k1, k2) range".into()))?;
        let slots = eligible_interaction_count(k1, self.config.p, h)?;
        Ok(slots.min(self.config.n as u64))
    }

    /// Number of interaction slots the family's second log term refers to:
    /// C(k1,2) for strong, K = k1 p - C(k1,2) - k1 for weak, C(p,2) for none.
    fn slot_count(&self, family: Family, k1: usize) -> u64 {
        let h = family.heredity().expect("heredity family");
        eligible_interaction_count(k1, self.config.p, h).expect("k1 <= p")
    }

    /// Descriptive complexity of the (family, k1, k2) model class, including
    /// the renormalization constant. The full model ignores (k1, k2); the
    /// empty model is scored through [`ComplexityTable::complexity_empty`].
    pub fn complexity(&self, family: Family, k1: usize, k2: usize) -> Result<f64> {
        let c = &self.config;
        let pn = c.p.min(c.n) as u64;
        let raw = match family {
            Family::Full => -c.pi0.ln(),
            _ => {
                if k1 < 1 || k1 as u64 > pn {
                    return Err(Error::Domain(format!(
                        "k1 = {k1} outside 1..={pn} for family {family}"
                    )));
                }
                let slots = self.slot_count(family, k1);
                let cap = slots.min(c.n as u64);
                if k2 as u64 > cap {
                    return Err(Error::Domain(format!(
                        "k2 = {k2} outside 0..={cap} for family {family}, k1 = {k1}"
                    )));
                }
                let pi = match family {
                    Family::Strong => c.pi1,
                    Family::Weak => c.pi2,
                    Family::None => c.pi3,
                    Family::Full => unreachable!(),
                };
                // log(0) would make the class weight infinite when a family
                // has no interaction slots at this k1 (strong with k1 = 1),
                // so the slot-count factor is clamped at 1.
                -pi.ln()
                    + (pn as f64).ln()
                    + (cap.max(1) as f64).ln()
                    + ln_binomial(c.p as u64, k1 as u64)
                    + ln_binomial(slots, k2 as u64)
            }
        };
        Ok(raw + self.renorm)
    }

    /// Complexity of the empty model, folded into the full-family slot.
    pub fn complexity_empty(&self) -> f64 {
        -self.config.pi0.ln() + (self.config.p.min(self.config.n) as f64).ln() + self.renorm
    }

    /// ABC criterion value: rss + 2 * rank * sigma^2 + lambda * sigma^2 * C.
    pub fn abc(&self, fit: &FitResult, family: Family, k1: usize, k2: usize, sigma2: f64) -> Result<f64> {
        let c = self.complexity(family, k1, k2)?;
        Ok(abc_from_parts(fit.rss, fit.rank, c, sigma2, self.config.lambda))
    }

    /// Exact log-domain evaluation of sum_I exp(-C_I) over the whole
    /// candidate family, weighted by model counts.
    pub fn kraft_check(&self) -> KraftReport {
        let c = &self.config;
        let pn = c.p.min(c.n) as u64;
        let mut terms: Vec<f64> = Vec::new();
        // full model and the empty model
        terms.push(c.pi0.ln() - self.renorm);
        terms.push(c.pi0.ln() - (pn as f64).ln() - self.renorm);
        for family in Family::HEREDITY {
            for k1 in 1..=pn as usize {
                let slots = self.slot_count(family, k1);
                let cap = slots.min(c.n as u64);
                for _k2 in 0..=cap {
                    // ln(count) - C; the two ln-binomials cancel exactly, so
                    // fold them analytically to keep the summation sharp
                    let pi = match family {
                        Family::Strong => c.pi1,
                        Family::Weak => c.pi2,
                        Family::None => c.pi3,
                        Family::Full => unreachable!(),
                    };
                    let t = pi.ln()
                        - (pn as f64).ln()
                        - (cap.max(1) as f64).ln()
                        - self.renorm;
                    terms.push(t);
                }
            }
        }
        let sum = log_sum_exp(&terms).exp();
        KraftReport { sum, ok: sum <= 1.0 + 1e-12 }
    }

    /// Rows (family, k1, k2, complexity) for export.
    pub fn rows(&self) -> Vec<(Family, usize, usize, f64)> {
        let c = &self.config;
        let pn = c.p.min(c.n);
        let mut out = vec![(Family::Full, c.p, pairs(c.p as u64) as usize, self.complexity(Family::Full, 0, 0).unwrap())];
        out.push((Family::Full, 0, 0, self.complexity_empty()));
        for family in Family::HEREDITY {
            for k1 in 1..=pn {
                let cap = self.k2_cap(family, k1).unwrap();
                for k2 in 0..=cap as usize {
                    out.push((family, k1, k2, self.complexity(family, k1, k2).unwrap()));
                }
            }
        }
        out
    }
}

/// The criterion from its raw ingredients.
pub fn abc_from_parts(rss: f64, rank: usize, complexity: f64, sigma2: f64, lambda: f64) -> f64 {
    rss + 2.0 * rank as f64 * sigma2 + lambda * sigma2 * complexity
}

/// Independent recomputation used as a cross-check in tests and audits.
pub fn kraft_sum_oracle(table: &ComplexityTable) -> f64 {
    use crate::model::count_models;
    let c = &table.config;
    let pn = c.p.min(c.n);
    let mut terms = vec![
        (-table.complexity(Family::Full, 0, 0).unwrap()).exp(),
        (-table.complexity_empty()).exp(),
    ];
    for family in Family::HEREDITY {
        let h = family.heredity().unwrap();
        for k1 in 1..=pn {
            let cap = table.k2_cap(family, k1).unwrap();
            for k2 in 0..=cap as usize {
                let count: f64 = count_models(c.p, k1, k2, h).to_string().parse().unwrap();
                terms.push(count * (-table.complexity(family, k1, k2).unwrap()).exp());
            }
        }
    }
    compensated_sum(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelIndex;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn fit(rss: f64, rank: usize) -> FitResult {
        FitResult {
            model: ModelIndex::empty(),
            coef: DVector::zeros(0),
            yhat: DVector::zeros(0),
            rss,
            rank,
        }
    }

    #[test]
    fn full_model_complexity_is_minus_log_pi0() {
        let t = ComplexityTable::new(ComplexityConfig::new(5, 20)).unwrap();
        let c = t.complexity(Family::Full, 0, 0).unwrap();
        assert_relative_eq!(c - t.renorm, -(0.25f64).ln(), epsilon = 1e-12);
        assert_relative_eq!(c - t.renorm, 1.3862943611198906, epsilon = 1e-10);
    }

    #[test]
    fn strong_complexity_matches_direct_evaluation() {
        let t = ComplexityTable::new(ComplexityConfig::new(10, 100)).unwrap();
        let c = t.complexity(Family::Strong, 3, 1).unwrap() - t.renorm;
        let want = (4.0f64).ln() + (10.0f64).ln() + (3.0f64).ln() + (120.0f64).ln() + (3.0f64).ln();
        assert_relative_eq!(c, want, epsilon = 1e-10);
        assert_relative_eq!(c, 10.674, epsilon = 1e-3);
    }

    #[test]
    fn weak_slot_count_matches_eligible_interactions() {
        let t = ComplexityTable::new(ComplexityConfig::new(4, 50)).unwrap();
        // K = 2*4 - 1 - 2 = 5
        assert_eq!(t.slot_count(Family::Weak, 2), 5);
        assert_eq!(
            t.slot_count(Family::Weak, 2),
            eligible_interaction_count(2, 4, HeredityCondition::Weak).unwrap()
        );
    }

    #[test]
    fn abc_is_exact_arithmetic() {
        let t = ComplexityTable::new_unchecked_lambda(
            ComplexityConfig { lambda: 7.3575, pi0: 0.25, pi1: 0.25, pi2: 0.25, pi3: 0.25, p: 4, n: 10 },
        )
        .unwrap();
        let f = fit(10.0, 3);
        // direct recomputation from the (rss, rank, C) triple
        let c = t.complexity(Family::Strong, 2, 1).unwrap();
        let got = t.abc(&f, Family::Strong, 2, 1, 1.0).unwrap();
        assert_relative_eq!(got, 10.0 + 6.0 + 7.3575 * c, epsilon = 1e-12);
        assert_relative_eq!(abc_from_parts(10.0, 3, 2.0, 1.0, 7.3575), 30.715, epsilon = 1e-12);
    }

    #[test]
    fn kraft_holds_after_renormalization() {
        for p in 3..=8usize {
            for n in [10usize, 20, 50] {
                let t = ComplexityTable::new(ComplexityConfig::new(p, n)).unwrap();
                let report = t.kraft_check();
                assert!(report.ok, "kraft failed at p={p} n={n}: sum={}", report.sum);
                // compare with the independent per-class oracle
                let oracle = kraft_sum_oracle(&t);
                assert_relative_eq!(report.sum, oracle, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn renormalization_divides_the_sum() {
        let cfg = ComplexityConfig::new(5, 20);
        let raw = ComplexityTable { config: cfg, renorm: 0.0 };
        let before = raw.kraft_check().sum;
        let t = ComplexityTable::new(cfg).unwrap();
        if before > 1.0 {
            assert_relative_eq!(t.renorm, before.ln(), epsilon = 1e-12);
            assert_relative_eq!(t.kraft_check().sum, before / t.renorm.exp(), max_relative = 1e-10);
        }
    }

    #[test]
    fn complexity_increases_in_k2_on_rising_half() {
        let t = ComplexityTable::new(ComplexityConfig::new(6, 40)).unwrap();
        for family in Family::HEREDITY {
            for k1 in 2..=6usize {
                let cap = t.k2_cap(family, k1).unwrap() as usize;
                let slots = t.slot_count(family, k1) as usize;
                let mut prev = f64::NEG_INFINITY;
                for k2 in 0..=cap.min(slots / 2) {
                    let c = t.complexity(family, k1, k2).unwrap();
                    assert!(c > prev, "not increasing at {family} k1={k1} k2={k2}");
                    prev = c;
                }
            }
        }
    }

    #[test]
    fn out_of_range_is_rejected() {
        let t = ComplexityTable::new(ComplexityConfig::new(4, 10)).unwrap();
        assert!(t.complexity(Family::Strong, 0, 0).is_err());
        assert!(t.complexity(Family::Strong, 5, 0).is_err());
        assert!(t.complexity(Family::Strong, 2, 2).is_err()); // C(2,2)=1 slot
        assert!(t.complexity(Family::Strong, 2, 1).is_ok());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = ComplexityConfig::new(4, 10);
        cfg.pi0 = 0.5; // sums to 1.25
        assert!(ComplexityTable::new(cfg).is_err());
        let cfg = ComplexityConfig::new(4, 10).with_lambda(1.0);
        assert!(ComplexityTable::new(cfg).is_err());
        assert!(ComplexityTable::new_unchecked_lambda(cfg).is_ok());
    }
}
