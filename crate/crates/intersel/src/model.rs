//! Model indices, heredity conditions and heredity-constrained enumeration.
//!
//! A candidate model is a set of main-effect indices together with a set of
//! interaction pairs (and optionally quadratic indices). All indices are
//! 1-based, matching the usual statistical convention and the CLI output.
//!
//! ```
//! use intersel::model::{count_models, enumerate_models, is_admissible,
//!     HeredityCondition, ModelIndex};
//! use num_bigint::BigUint;
//!
//! let m = ModelIndex::new(vec![1, 3], vec![(1, 2)], vec![], 4)?;
//! // (1,2) has one parent (1) in the model but not the other (2):
//! assert!(!is_admissible(&m, HeredityCondition::Strong));
//! assert!(is_admissible(&m, HeredityCondition::Weak));
//! assert!(is_admissible(&m, HeredityCondition::None));
//!
//! // 4 variables, 3 mains, 1 interaction under strong heredity:
//! // C(4,3) * C(C(3,2),1) = 4 * 3 = 12 models
//! assert_eq!(count_models(4, 3, 1, HeredityCondition::Strong), BigUint::from(12u32));
//! assert_eq!(enumerate_models(4, 3, 1, HeredityCondition::Strong).count(), 12);
//! # Ok::<(), intersel::error::Error>(())
//! ```

use crate::combinat::{binomial, pairs};
use crate::error::{Error, Result};
use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

/// Structural constraint tying interaction terms to their parent main effects.
///
/// Strong-admissible models form a subset of weak-admissible models, which in
/// turn form a subset of the unconstrained family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeredityCondition {
    /// Both parents of every interaction must be in the model.
    Strong,
    /// At least one parent of every interaction must be in the model.
    Weak,
    /// Interactions are unrestricted.
    None,
}

impl HeredityCondition {
    pub const ALL: [HeredityCondition; 3] = [
        HeredityCondition::Strong,
        HeredityCondition::Weak,
        HeredityCondition::None,
    ];
}

impl std::fmt::Display for HeredityCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HeredityCondition::Strong => write!(f, "strong"),
            HeredityCondition::Weak => write!(f, "weak"),
            HeredityCondition::None => write!(f, "none"),
        }
    }
}

/// A candidate model: sorted main-effect indices, sorted interaction pairs
/// (i < j) and optionally sorted quadratic indices. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelIndex {
    pub main: Vec<usize>,
    pub inter: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quad: Vec<usize>,
}

impl ModelIndex {
    /// Builds a model, sorting and validating the index sets against `p`.
    pub fn new(
        mut main: Vec<usize>,
        mut inter: Vec<(usize, usize)>,
        mut quad: Vec<usize>,
        p: usize,
    ) -> Result<Self> {
        main.sort_unstable();
        inter.sort_unstable();
        quad.sort_unstable();
        let in_range = |i: usize| i >= 1 && i <= p;
        if !main.iter().all(|&i| in_range(i)) || !quad.iter().all(|&i| in_range(i)) {
            return Err(Error::Domain(format!("index out of range 1..={p}")));
        }
        if !inter.iter().all(|&(i, j)| in_range(i) && in_range(j) && i < j) {
            return Err(Error::Domain("interaction pairs must satisfy 1 <= i < j <= p".into()));
        }
        if main.windows(2).any(|w| w[0] == w[1])
            || inter.windows(2).any(|w| w[0] == w[1])
            || quad.windows(2).any(|w| w[0] == w[1])
        {
            return Err(Error::Domain("duplicate indices in model".into()));
        }
        Ok(ModelIndex { main, inter, quad })
    }

    pub fn empty() -> Self {
        ModelIndex { main: vec![], inter: vec![], quad: vec![] }
    }

    /// The full model: all p main effects and all C(p,2) interactions.
    pub fn full(p: usize) -> Self {
        let main = (1..=p).collect();
        let inter = all_pairs(p);
        ModelIndex { main, inter, quad: vec![] }
    }

    pub fn k1(&self) -> usize {
        self.main.len()
    }

    pub fn k2(&self) -> usize {
        self.inter.len()
    }

    /// Total number of columns the model selects.
    pub fn len(&self) -> usize {
        self.main.len() + self.inter.len() + self.quad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, other: &ModelIndex) -> bool {
        other.main.iter().all(|i| self.main.binary_search(i).is_ok())
            && other.inter.iter().all(|q| self.inter.binary_search(q).is_ok())
            && other.quad.iter().all(|i| self.quad.binary_search(i).is_ok())
    }
}

/// All pairs (i, j), 1 <= i < j <= p, in lexicographic order.
pub fn all_pairs(p: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(p * p.saturating_sub(1) / 2);
    for i in 1..=p {
        for j in (i + 1)..=p {
            v.push((i, j));
        }
    }
    v
}

/// Maximum nonzero counts per block: r1 main effects, r2 interactions,
/// r3 quadratic terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsityBudget {
    pub r1: usize,
    pub r2: usize,
    #[serde(default)]
    pub r3: usize,
}

impl SparsityBudget {
    pub fn new(r1: usize, r2: usize) -> Self {
        SparsityBudget { r1, r2, r3: 0 }
    }
}

/// A dense coefficient vector over the expanded design: p main slots,
/// C(p,2) interaction slots in lexicographic pair order, and p quadratic
/// slots when the quadratic extension is enabled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub p: usize,
    pub beta_main: Vec<f64>,
    pub beta_inter: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beta_quad: Vec<f64>,
}

impl CoefficientVector {
    pub fn zeros(p: usize) -> Self {
        CoefficientVector {
            p,
            beta_main: vec![0.0; p],
            beta_inter: vec![0.0; p * p.saturating_sub(1) / 2],
            beta_quad: vec![],
        }
    }

    /// Position of pair (i, j) in the lexicographic interaction ordering.
    pub fn pair_slot(p: usize, i: usize, j: usize) -> usize {
        debug_assert!(1 <= i && i < j && j <= p);
        // pairs (1,2)..(1,p) come first, then (2,3)..(2,p), ...
        (i - 1) * p - i * (i - 1) / 2 + (j - i) - 1
    }

    pub fn set_main(&mut self, i: usize, value: f64) {
        self.beta_main[i - 1] = value;
    }

    pub fn set_inter(&mut self, i: usize, j: usize, value: f64) {
        let slot = Self::pair_slot(self.p, i, j);
        self.beta_inter[slot] = value;
    }

    pub fn set_quad(&mut self, i: usize, value: f64) {
        if self.beta_quad.is_empty() {
            self.beta_quad = vec![0.0; self.p];
        }
        self.beta_quad[i - 1] = value;
    }

    /// The support as a model index.
    pub fn support(&self) -> ModelIndex {
        let main = self
            .beta_main
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i + 1)
            .collect();
        let mut inter = Vec::new();
        let mut slot = 0;
        for i in 1..=self.p {
            for j in (i + 1)..=self.p {
                if self.beta_inter[slot] != 0.0 {
                    inter.push((i, j));
                }
                slot += 1;
            }
        }
        let quad = self
            .beta_quad
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i + 1)
            .collect();
        ModelIndex { main, inter, quad }
    }
}

/// Whether `m` satisfies the heredity condition `h`.
///
/// Under strong heredity every interaction needs both parents among the main
/// effects; under weak heredity at least one. Quadratic terms require their
/// parent under either condition.
pub fn is_admissible(m: &ModelIndex, h: HeredityCondition) -> bool {
    let has = |i: &usize| m.main.binary_search(i).is_ok();
    match h {
        HeredityCondition::Strong => {
            m.inter.iter().all(|(i, j)| has(i) && has(j)) && m.quad.iter().all(has)
        }
        HeredityCondition::Weak => {
            m.inter.iter().all(|(i, j)| has(i) || has(j)) && m.quad.iter().all(has)
        }
        HeredityCondition::None => true,
    }
}

/// Number of interaction slots eligible to enter a model with `k1` active
/// main effects out of `p`, under heredity `h`.
pub fn eligible_interaction_count(k1: usize, p: usize, h: HeredityCondition) -> Result<u64> {
    if k1 > p {
        return Err(Error::Domain(format!("k1 = {k1} exceeds p = {p}")));
    }
    let (k1, p) = (k1 as u64, p as u64);
    Ok(match h {
        HeredityCondition::Strong => pairs(k1),
        HeredityCondition::Weak => k1 * p - pairs(k1) - k1,
        HeredityCondition::None => pairs(p),
    })
}

/// Exact number of admissible models with exactly `k1` main effects and `k2`
/// interactions; 0 when infeasible.
pub fn count_models(p: usize, k1: usize, k2: usize, h: HeredityCondition) -> BigUint {
    if k1 > p {
        return BigUint::zero();
    }
    let slots = eligible_interaction_count(k1, p, h).expect("k1 <= p checked");
    binomial(p as u64, k1 as u64) * binomial(slots, k2 as u64)
}

/// Streams every admissible model with exactly `k1` main effects and `k2`
/// interactions, each once, in lexicographic order. Infeasible combinations
/// yield an empty stream.
pub fn enumerate_models(
    p: usize,
    k1: usize,
    k2: usize,
    h: HeredityCondition,
) -> impl Iterator<Item = ModelIndex> {
    (1..=p)
        .combinations(k1)
        .flat_map(move |main| {
            let eligible: Vec<(usize, usize)> = match h {
                HeredityCondition::Strong => main
                    .iter()
                    .cloned()
                    .tuple_combinations()
                    .map(|(i, j)| (i.min(j), i.max(j)))
                    .collect(),
                HeredityCondition::Weak => all_pairs(p)
                    .into_iter()
                    .filter(|(i, j)| main.contains(i) || main.contains(j))
                    .collect(),
                HeredityCondition::None => all_pairs(p),
            };
            eligible.into_iter().combinations(k2).map(move |inter| ModelIndex {
                main: main.clone(),
                inter,
                quad: vec![],
            })
        })
}
