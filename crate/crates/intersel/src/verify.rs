//! Desk-scale verification of the packing constructions and the binomial
//! ratio inequality behind the minimax lower bounds.
//!
//! ```
//! use intersel::verify::{binomial_ratio_bound, verify_packing_h1};
//!
//! // r1 = 4 gives 6 interaction slots; with r2 = 2 the bound is 2.5
//! let res = verify_packing_h1(4, 2)?;
//! assert!(res.satisfied);
//! assert!(res.points.len() >= 3);
//!
//! let rep = binomial_ratio_bound(6, 2)?;
//! assert!(rep.ok);
//! assert!((rep.lhs - 2.5).abs() < 1e-12); // C(6,2)/C(6,1) = 15/6
//! assert!((rep.rhs - 2.5).abs() < 1e-12); // (5/2)^1 — equality case
//! # Ok::<(), intersel::error::Error>(())
//! ```
//!
//! The packing sets live on sign vectors: a fixed all-ones main block plus
//! exactly `r` slots set to +/-1 out of `s` available slots. A greedy scan
//! in lexicographic order admits a point whenever its Hamming distance to
//! every admitted point exceeds the separation threshold; this mirrors the
//! inductive construction in the existence proof, so the greedy count is a
//! valid existence witness.

use crate::combinat::{ln_binomial, pairs};
use crate::error::{Error, Result};
use itertools::Itertools;
use serde::{Deserialize, Serialize};

/// A sign vector with support positions (0-based slot indices) and signs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPoint {
    pub support: Vec<usize>,
    /// One sign per support position, true = +1.
    pub signs: Vec<bool>,
}

impl SignPoint {
    /// Hamming distance over the full slot vector (values in {-1, 0, +1}).
    pub fn hamming(&self, other: &SignPoint) -> usize {
        let mut dist = 0;
        let (mut i, mut j) = (0, 0);
        while i < self.support.len() && j < other.support.len() {
            match self.support[i].cmp(&other.support[j]) {
                std::cmp::Ordering::Less => {
                    dist += 1;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    dist += 1;
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    if self.signs[i] != other.signs[j] {
                        dist += 1;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        dist + (self.support.len() - i) + (other.support.len() - j)
    }
}

/// Result of a greedy packing construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PackingResult {
    /// Number of slots the sign vectors range over.
    pub slots: usize,
    /// Exact support size of every point.
    pub nonzeros: usize,
    pub points: Vec<SignPoint>,
    pub min_pairwise_hamming: usize,
    pub lower_bound: f64,
    pub satisfied: bool,
}

/// Greedy packing of sign vectors with exactly `nonzeros` nonzero slots out
/// of `slots`, pairwise Hamming distance strictly greater than `nonzeros`/2.
/// Stops once `target` points are admitted (the lemma only asserts
/// existence, and the full point set is astronomically large).
fn greedy_packing(slots: usize, nonzeros: usize, lower_bound: f64) -> PackingResult {
    let target = lower_bound.ceil().max(1.0) as usize;
    let mut points: Vec<SignPoint> = Vec::new();
    let mut min_dist = usize::MAX;
    // distance > nonzeros/2, exact in integers: 2 * dist > nonzeros
    let far_enough = |d: usize| 2 * d > nonzeros;
    'scan: for support in (0..slots).combinations(nonzeros) {
        // lexicographic over sign patterns, false (=-1) before true (=+1)
        for mask in 0..(1u64 << nonzeros) {
            let signs: Vec<bool> = (0..nonzeros).map(|b| mask >> b & 1 == 1).collect();
            let cand = SignPoint { support: support.clone(), signs };
            let mut ok = true;
            for q in &points {
                let d = cand.hamming(q);
                if !far_enough(d) {
                    ok = false;
                    break;
                }
            }
            if ok {
                for q in &points {
                    min_dist = min_dist.min(cand.hamming(q));
                }
                points.push(cand);
                if points.len() >= target {
                    break 'scan;
                }
            }
        }
    }
    let count = points.len();
    PackingResult {
        slots,
        nonzeros,
        min_pairwise_hamming: if count > 1 { min_dist } else { 0 },
        points,
        lower_bound,
        satisfied: count as f64 >= lower_bound,
    }
}

/// Packing over the interaction block: sign vectors with exactly r2 nonzero
/// interaction slots out of C(r1, 2), main block fixed. Verifies the bound
/// exp((r2/2) log((C(r1,2) - r2/2) / r2)).
pub fn verify_packing_h1(r1: usize, r2: usize) -> Result<PackingResult> {
    let slots = pairs(r1 as u64) as usize;
    if slots > 24 {
        return Err(Error::Domain(format!("C(r1,2) = {slots} exceeds the desk-scale cap 24")));
    }
    if 3 * r2 > 2 * slots {
        return Err(Error::Domain(format!("require r2 <= (2/3) C(r1,2), got r2 = {r2}")));
    }
    if r2 == 0 {
        return Err(Error::Domain("require r2 >= 1".into()));
    }
    let bound = ((r2 as f64 / 2.0) * ((slots as f64 - r2 as f64 / 2.0) / r2 as f64).ln()).exp();
    Ok(greedy_packing(slots, r2, bound))
}

/// Packing over the main block: sign vectors with exactly r1 nonzeros out of
/// p slots. Verifies the bound exp((r1/2) log((p - r1/2) / r1)).
pub fn verify_packing_h2(r1: usize, p: usize) -> Result<PackingResult> {
    if p > 20 {
        return Err(Error::Domain(format!("p = {p} exceeds the desk-scale cap 20")));
    }
    if 3 * r1 > 2 * p {
        return Err(Error::Domain(format!("require r1 <= 2p/3, got r1 = {r1}")));
    }
    if r1 == 0 {
        return Err(Error::Domain("require r1 >= 1".into()));
    }
    let bound = ((r1 as f64 / 2.0) * ((p as f64 - r1 as f64 / 2.0) / r1 as f64).ln()).exp();
    Ok(greedy_packing(p, r1, bound))
}

/// Both sides of C(A,B) / C(A,B/2) >= ((A - B/2) / B)^(B/2), evaluated in
/// the log domain.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BinomialRatioReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

pub fn binomial_ratio_bound(a: u64, b: u64) -> Result<BinomialRatioReport> {
    if b % 2 != 0 {
        return Err(Error::Domain(format!("B = {b} must be even")));
    }
    if 3 * b > 2 * a {
        return Err(Error::Domain(format!("require B <= (2/3) A, got A = {a}, B = {b}")));
    }
    if b == 0 {
        return Ok(BinomialRatioReport { lhs: 1.0, rhs: 1.0, ok: true });
    }
    let ln_lhs = ln_binomial(a, b) - ln_binomial(a, b / 2);
    let ln_rhs = (b as f64 / 2.0) * ((a as f64 - b as f64 / 2.0) / b as f64).ln();
    let ok = ln_lhs >= ln_rhs + (1.0 - 1e-12f64).ln();
    Ok(BinomialRatioReport { lhs: ln_lhs.exp(), rhs: ln_rhs.exp(), ok })
}

/// Scales Hamming-separated sign vectors into l2-separated coefficient
/// vectors: each nonzero slot becomes +/- eps / sqrt(2 r). Any two points at
/// Hamming distance > r/2 end up at l2 distance >= eps / 2.
pub fn l2_separation(a: &SignPoint, b: &SignPoint, eps: f64, r: usize) -> f64 {
    let scale = eps / (2.0 * r as f64).sqrt();
    // differing slots contribute scale^2 (one zero) or (2 scale)^2 (opposite
    // signs); the Hamming distance lower-bounds the count of such slots
    let mut sq = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < a.support.len() && j < b.support.len() {
        match a.support[i].cmp(&b.support[j]) {
            std::cmp::Ordering::Less => {
                sq += scale * scale;
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                sq += scale * scale;
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                if a.signs[i] != b.signs[j] {
                    sq += 4.0 * scale * scale;
                }
                i += 1;
                j += 1;
            }
        }
    }
    sq += ((a.support.len() - i) + (b.support.len() - j)) as f64 * scale * scale;
    sq.sqrt()
}
