//! Model selection: exhaustive argmin of the ABC criterion over the full
//! candidate family, and greedy stochastic search with restarts for large p.
//!
//! ```
//! use intersel::criterion::{ComplexityConfig, ComplexityTable};
//! use intersel::design::DesignView;
//! use intersel::harness::{generate, true_beta, true_model};
//! use intersel::model::HeredityCondition;
//! use intersel::search::select_stochastic;
//!
//! let model = true_model(6, 2, 1, HeredityCondition::Strong)?;
//! let beta = true_beta(6, &model, 8.0, 1.0);
//! let data = generate(60, 6, &beta, 1.0, 3)?;
//! let view = DesignView::new(&data);
//! let table = ComplexityTable::new(ComplexityConfig::new(6, 60))?;
//!
//! let a = select_stochastic(&view, &table, 400, 3, 42)?;
//! let b = select_stochastic(&view, &table, 400, 3, 42)?;
//! assert_eq!(a.model, b.model); // same seed, same answer
//! # Ok::<(), intersel::error::Error>(())
//! ```

use crate::criterion::{ComplexityTable, Family};
use crate::design::DesignView;
use crate::error::{Error, Result};
use crate::fit::quick_rss_rank;
use crate::model::{all_pairs, enumerate_models, is_admissible, ModelIndex};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default cap on the number of models an exhaustive run may score.
pub const DEFAULT_BUDGET_CAP: u128 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Exhaustive,
    Stochastic,
}

/// The selected model together with how it was found.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionResult {
    pub model: ModelIndex,
    pub family: Family,
    pub k1: usize,
    pub k2: usize,
    pub abc_value: f64,
    pub rss: f64,
    pub rank: usize,
    pub mode: SearchMode,
    pub visited: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// One scored candidate; the ordering implements the deterministic
/// tie-break: smaller criterion, then smaller rank, then fewer terms, then
/// lexicographically smaller model, then family order full < strong < weak
/// < none.
#[derive(Debug, Clone)]
struct Scored {
    abc: f64,
    rank: usize,
    terms: usize,
    model: ModelIndex,
    family: Family,
    k1: usize,
    k2: usize,
    rss: f64,
}

impl Scored {
    fn better_than(&self, other: &Scored) -> bool {
        if self.abc != other.abc {
            return self.abc < other.abc;
        }
        if self.rank != other.rank {
            return self.rank < other.rank;
        }
        if self.terms != other.terms {
            return self.terms < other.terms;
        }
        if self.model != other.model {
            return self.model < other.model;
        }
        self.family < other.family
    }
}

fn score(
    view: &DesignView,
    table: &ComplexityTable,
    model: &ModelIndex,
    family: Family,
    k1: usize,
    k2: usize,
    complexity: f64,
) -> Result<Scored> {
    let (rss, rank) = quick_rss_rank(view, model, &view.data.y)?;
    let sigma2 = view.data.sigma2;
    let abc = crate::criterion::abc_from_parts(rss, rank, complexity, sigma2, table.config.lambda);
    Ok(Scored { abc, rank, terms: model.len(), model: model.clone(), family, k1, k2, rss })
}

/// Total number of candidate models the exhaustive scan would score.
pub fn candidate_count(table: &ComplexityTable) -> BigUint {
    candidate_count_in(table, &Family::HEREDITY)
}

/// Candidate count when selection is restricted to `families` (the full and
/// empty models are always scored).
pub fn candidate_count_in(table: &ComplexityTable, families: &[Family]) -> BigUint {
    let p = table.config.p;
    let pn = p.min(table.config.n);
    let mut total = BigUint::from(2u32); // full + empty
    for &family in families {
        let h = family.heredity().unwrap();
        for k1 in 1..=pn {
            let cap = table.k2_cap(family, k1).unwrap();
            for k2 in 0..=cap as usize {
                total += crate::model::count_models(p, k1, k2, h);
            }
        }
    }
    total
}

/// Scores the full model, the empty model and every (family, k1, k2, model)
/// in range, returning the criterion minimizer under the deterministic
/// tie-break. Refuses with the candidate count when it exceeds `budget_cap`.
pub fn select_exhaustive(
    view: &DesignView,
    table: &ComplexityTable,
    budget_cap: u128,
) -> Result<SelectionResult> {
    select_exhaustive_in(view, table, budget_cap, &Family::HEREDITY)
}

/// Exhaustive selection restricted to the given heredity families; the full
/// and empty models are always candidates.
pub fn select_exhaustive_in(
    view: &DesignView,
    table: &ComplexityTable,
    budget_cap: u128,
    families: &[Family],
) -> Result<SelectionResult> {
    let count = candidate_count_in(table, families);
    if count > BigUint::from(budget_cap) {
        return Err(Error::BudgetExceeded {
            count: count.to_u128().unwrap_or(u128::MAX),
            cap: budget_cap,
        });
    }
    let p = table.config.p;
    let pn = p.min(table.config.n);
    let mut best: Option<Scored> = None;
    let mut visited = 0u64;
    let mut consider = |cand: Scored| {
        visited += 1;
        if best.as_ref().map_or(true, |b| cand.better_than(b)) {
            best = Some(cand);
        }
    };

    let full = ModelIndex::full(p);
    let c_full = table.complexity(Family::Full, 0, 0)?;
    consider(score(view, table, &full, Family::Full, full.k1(), full.k2(), c_full)?);
    let empty = ModelIndex::empty();
    consider(score(view, table, &empty, Family::Full, 0, 0, table.complexity_empty())?);

    for &family in families {
        let h = family.heredity().unwrap();
        for k1 in 1..=pn {
            let cap = table.k2_cap(family, k1)? as usize;
            for k2 in 0..=cap {
                let complexity = table.complexity(family, k1, k2)?;
                for model in enumerate_models(p, k1, k2, h) {
                    consider(score(view, table, &model, family, k1, k2, complexity)?);
                }
            }
        }
    }
    let best = best.expect("at least the full model was scored");
    Ok(SelectionResult {
        model: best.model,
        family: best.family,
        k1: best.k1,
        k2: best.k2,
        abc_value: best.abc,
        rss: best.rss,
        rank: best.rank,
        mode: SearchMode::Exhaustive,
        visited,
        seed: None,
    })
}

/// Best criterion value a model can attain across the family slots where it
/// is admissible and within range; the full and empty models score through
/// the full-family slot.
fn best_family_score(
    view: &DesignView,
    table: &ComplexityTable,
    model: &ModelIndex,
    families: &[Family],
) -> Result<Option<Scored>> {
    let p = table.config.p;
    // the fit does not depend on the family slot: compute it once
    let (rss, rank) = quick_rss_rank(view, model, &view.data.y)?;
    let sigma2 = view.data.sigma2;
    let lambda = table.config.lambda;
    let mut best: Option<Scored> = None;
    let mut consider = |family: Family, k1: usize, k2: usize, complexity: f64| {
        let abc = crate::criterion::abc_from_parts(rss, rank, complexity, sigma2, lambda);
        let cand = Scored {
            abc,
            rank,
            terms: model.len(),
            model: model.clone(),
            family,
            k1,
            k2,
            rss,
        };
        if best.as_ref().map_or(true, |b| cand.better_than(b)) {
            best = Some(cand);
        }
    };
    if model.is_empty() {
        consider(Family::Full, 0, 0, table.complexity_empty());
        return Ok(best);
    }
    if *model == ModelIndex::full(p) {
        consider(Family::Full, model.k1(), model.k2(), table.complexity(Family::Full, 0, 0)?);
    }
    let (k1, k2) = (model.k1(), model.k2());
    for &family in families {
        let h = family.heredity().unwrap();
        if k1 == 0 || !is_admissible(model, h) {
            continue;
        }
        if let Ok(c) = table.complexity(family, k1, k2) {
            consider(family, k1, k2, c);
        }
    }
    Ok(best)
}

/// Greedy forward selection: repeatedly add the single main effect or
/// interaction that lowers the criterion most, stopping at no improvement.
fn greedy_forward_start(
    view: &DesignView,
    table: &ComplexityTable,
    families: &[Family],
    visited: &mut u64,
) -> Result<Scored> {
    let p = table.config.p;
    let pool = all_pairs(p);
    let mut current = best_family_score(view, table, &ModelIndex::empty(), families)?
        .expect("empty model always scores");
    *visited += 1;
    loop {
        let mut improved = false;
        let mut best_next = current.clone();
        let try_candidate = |cand_model: ModelIndex,
                                 visited: &mut u64,
                                 best_next: &mut Scored,
                                 improved: &mut bool|
         -> Result<()> {
            if let Some(cand) = best_family_score(view, table, &cand_model, families)? {
                *visited += 1;
                if cand.better_than(best_next) {
                    *best_next = cand;
                    *improved = true;
                }
            }
            Ok(())
        };
        for j in 1..=p {
            if current.model.main.binary_search(&j).is_ok() {
                continue;
            }
            let mut main = current.model.main.clone();
            main.push(j);
            main.sort_unstable();
            let cand = ModelIndex { main, inter: current.model.inter.clone(), quad: vec![] };
            try_candidate(cand, visited, &mut best_next, &mut improved)?;
        }
        for &q in &pool {
            if current.model.inter.binary_search(&q).is_ok() {
                continue;
            }
            let mut inter = current.model.inter.clone();
            inter.push(q);
            inter.sort_unstable();
            let cand = ModelIndex { main: current.model.main.clone(), inter, quad: vec![] };
            try_candidate(cand, visited, &mut best_next, &mut improved)?;
        }
        if !improved {
            return Ok(current);
        }
        current = best_next;
    }
}

/// One random move proposal: add, drop or swap a main term or an
/// interaction. Returns None when the drawn move is infeasible from the
/// current model.
fn propose(model: &ModelIndex, p: usize, rng: &mut ChaCha8Rng) -> Option<ModelIndex> {
    let pool = all_pairs(p);
    let absent_main: Vec<usize> =
        (1..=p).filter(|j| model.main.binary_search(j).is_err()).collect();
    let absent_inter: Vec<(usize, usize)> =
        pool.iter().cloned().filter(|q| model.inter.binary_search(q).is_err()).collect();
    let mut main = model.main.clone();
    let mut inter = model.inter.clone();
    match rng.gen_range(0..6u8) {
        0 => {
            // add main
            let &j = absent_main.choose(rng)?;
            main.push(j);
            main.sort_unstable();
        }
        1 => {
            // drop main
            let i = (0..main.len()).collect::<Vec<_>>().choose(rng).cloned()?;
            main.remove(i);
        }
        2 => {
            // swap main
            let i = (0..main.len()).collect::<Vec<_>>().choose(rng).cloned()?;
            let &j = absent_main.choose(rng)?;
            main.remove(i);
            main.push(j);
            main.sort_unstable();
        }
        3 => {
            // add interaction
            let &q = absent_inter.choose(rng)?;
            inter.push(q);
            inter.sort_unstable();
        }
        4 => {
            // drop interaction
            let i = (0..inter.len()).collect::<Vec<_>>().choose(rng).cloned()?;
            inter.remove(i);
        }
        _ => {
            // swap interaction
            let i = (0..inter.len()).collect::<Vec<_>>().choose(rng).cloned()?;
            let &q = absent_inter.choose(rng)?;
            inter.remove(i);
            inter.push(q);
            inter.sort_unstable();
        }
    }
    Some(ModelIndex { main, inter, quad: vec![] })
}

/// Greedy stochastic descent with restarts. Each restart starts from the
/// best pure-main-effect greedy model and applies `iters` random single
/// moves, accepting a move only when the criterion strictly decreases.
/// Proposals that are admissible for no family slot are rejected outright.
/// Fully determined by `seed`.
pub fn select_stochastic(
    view: &DesignView,
    table: &ComplexityTable,
    iters: u64,
    restarts: u64,
    seed: u64,
) -> Result<SelectionResult> {
    select_stochastic_in(view, table, iters, restarts, seed, &Family::HEREDITY)
}

/// Stochastic selection restricted to the given heredity families.
pub fn select_stochastic_in(
    view: &DesignView,
    table: &ComplexityTable,
    iters: u64,
    restarts: u64,
    seed: u64,
    families: &[Family],
) -> Result<SelectionResult> {
    if iters < 1 {
        return Err(Error::Domain("iters must be >= 1".into()));
    }
    let p = table.config.p;
    let mut visited = 0u64;
    // The full and empty models sit in their own criterion slot with a much
    // smaller complexity than their neighbors, so hill-climbing cannot reach
    // them; score both unconditionally.
    let mut best = best_family_score(view, table, &ModelIndex::full(p), families)?;
    visited += 1;
    if let Some(empty) = best_family_score(view, table, &ModelIndex::empty(), families)? {
        visited += 1;
        if best.as_ref().map_or(true, |b| empty.better_than(b)) {
            best = Some(empty);
        }
    }
    for restart in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart + 1);
        let mut current = greedy_forward_start(view, table, families, &mut visited)?;
        for _ in 0..iters {
            let Some(cand_model) = propose(&current.model, p, &mut rng) else {
                continue;
            };
            if let Some(cand) = best_family_score(view, table, &cand_model, families)? {
                visited += 1;
                if cand.abc < current.abc {
                    current = cand;
                }
            }
        }
        if best.as_ref().map_or(true, |b| current.better_than(b)) {
            best = Some(current);
        }
    }
    let best = best.expect("restarts >= 1");
    Ok(SelectionResult {
        model: best.model,
        family: best.family,
        k1: best.k1,
        k2: best.k2,
        abc_value: best.abc,
        rss: best.rss,
        rank: best.rank,
        mode: SearchMode::Stochastic,
        visited,
        seed: Some(seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criterion::ComplexityConfig;
    use crate::design::Dataset;
    use crate::model::CoefficientVector;
    use nalgebra::{DMatrix, DVector};
    use rand_distr::{Distribution, StandardNormal};

    fn instance(n: usize, p: usize, seed: u64, sigma: f64) -> (Dataset, CoefficientVector) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = StandardNormal;
        let x = DMatrix::from_fn(n, p, |_, _| normal.sample(&mut rng));
        let mut beta = CoefficientVector::zeros(p);
        beta.set_main(1, 3.0 * sigma.max(1.0));
        beta.set_main(2, -3.0 * sigma.max(1.0));
        beta.set_inter(1, 2, 3.0 * sigma.max(1.0));
        let d0 = Dataset::new(x.clone(), DVector::zeros(n), 1.0).unwrap();
        let mean = DesignView::new(&d0).apply_coefficients(&beta);
        let eps = DVector::from_fn(n, |_, _| {
            let e: f64 = normal.sample(&mut rng);
            e * sigma
        });
        let y = mean + eps;
        (Dataset::new(x, y, (sigma * sigma).max(1e-12)).unwrap(), beta)
    }

    #[test]
    fn noiseless_strong_truth_is_recovered_exactly() {
        let (d, beta) = instance(12, 4, 1, 0.0);
        let view = DesignView::new(&d);
        let table = ComplexityTable::new(ComplexityConfig::new(4, 12)).unwrap();
        let res = select_exhaustive(&view, &table, DEFAULT_BUDGET_CAP).unwrap();
        let fit = crate::fit::project(&view, &res.model, &d.y).unwrap();
        let l = crate::fit::loss(&view, &fit, &beta);
        assert!(l < 1e-16, "loss {l} should vanish on noiseless recovery");
    }

    #[test]
    fn budget_cap_refusal_reports_count() {
        let (d, _) = instance(12, 4, 2, 1.0);
        let view = DesignView::new(&d);
        let table = ComplexityTable::new(ComplexityConfig::new(4, 12)).unwrap();
        match select_exhaustive(&view, &table, 10) {
            Err(Error::BudgetExceeded { count, cap }) => {
                assert_eq!(cap, 10);
                assert!(count > 10);
            }
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }

    #[test]
    fn selected_model_is_admissible_for_its_family() {
        let (d, _) = instance(14, 4, 3, 1.0);
        let view = DesignView::new(&d);
        let table = ComplexityTable::new(ComplexityConfig::new(4, 14)).unwrap();
        let res = select_exhaustive(&view, &table, DEFAULT_BUDGET_CAP).unwrap();
        if let Some(h) = res.family.heredity() {
            assert!(is_admissible(&res.model, h));
        }
        assert!(res.rank <= 14);
    }

    #[test]
    fn stochastic_never_beats_exhaustive() {
        for seed in 0..10u64 {
            let (d, _) = instance(12, 4, 100 + seed, 1.0);
            let view = DesignView::new(&d);
            let table = ComplexityTable::new(ComplexityConfig::new(4, 12)).unwrap();
            let ex = select_exhaustive(&view, &table, DEFAULT_BUDGET_CAP).unwrap();
            let st = select_stochastic(&view, &table, 300, 3, seed).unwrap();
            assert!(st.abc_value >= ex.abc_value - 1e-9);
        }
    }

    #[test]
    fn stochastic_matches_exhaustive_on_most_small_instances() {
        let mut hits = 0;
        let trials = 40;
        for seed in 0..trials {
            let (d, _) = instance(12, 4, 1000 + seed, 1.0);
            let view = DesignView::new(&d);
            let table = ComplexityTable::new(ComplexityConfig::new(4, 12)).unwrap();
            let ex = select_exhaustive(&view, &table, DEFAULT_BUDGET_CAP).unwrap();
            let st = select_stochastic(&view, &table, 500, 5, seed).unwrap();
            if (st.abc_value - ex.abc_value).abs() < 1e-9 {
                hits += 1;
            }
        }
        assert!(
            hits * 100 >= trials * 95,
            "stochastic matched exhaustive on only {hits}/{trials} trials"
        );
    }

    #[test]
    fn stochastic_is_deterministic_given_seed() {
        let (d, _) = instance(12, 4, 7, 1.0);
        let view = DesignView::new(&d);
        let table = ComplexityTable::new(ComplexityConfig::new(4, 12)).unwrap();
        let a = select_stochastic(&view, &table, 200, 3, 99).unwrap();
        let b = select_stochastic(&view, &table, 200, 3, 99).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.abc_value, b.abc_value);
        assert_eq!(a.visited, b.visited);
    }

    #[test]
    fn candidate_count_matches_manual_sum() {
        let table = ComplexityTable::new(ComplexityConfig::new(3, 10)).unwrap();
        let mut manual = BigUint::from(2u32);
        for family in Family::HEREDITY {
            let h = family.heredity().unwrap();
            for k1 in 1..=3usize {
                let cap = table.k2_cap(family, k1).unwrap();
                for k2 in 0..=cap as usize {
                    manual += crate::model::count_models(3, k1, k2, h);
                }
            }
        }
        assert_eq!(candidate_count(&table), manual);
    }
}

