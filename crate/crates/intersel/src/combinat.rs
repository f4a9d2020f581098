//! Exact and log-domain binomial coefficients.
//!
//! Counts of candidate models explode combinatorially, so exact counts use
//! big integers and anything that ends up inside a log uses `ln_gamma`.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use statrs::function::gamma::ln_gamma;

/// Exact binomial coefficient C(n, k).
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc = acc * BigUint::from(n - j) / BigUint::from(j + 1);
    }
    acc
}

/// C(n, k) as f64, saturating to +inf when it overflows.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    ln_binomial(n, k).exp()
}

/// log C(n, k) via log-gamma; -inf when k > n.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Number of unordered pairs C(m, 2).
pub fn pairs(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

/// Kahan-compensated sum of a sequence.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// log(sum exp(t_i)) with compensated accumulation after the max shift.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + compensated_sum(terms.iter().map(|t| (t - m).exp())).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_matches_pascal() {
        for n in 0..=20u64 {
            for k in 0..=n {
                let lhs = binomial(n, k);
                let rhs = if k == 0 || k == n {
                    BigUint::one()
                } else {
                    binomial(n - 1, k - 1) + binomial(n - 1, k)
                };
                assert_eq!(lhs, rhs, "C({n},{k})");
            }
        }
    }

    #[test]
    fn ln_binomial_agrees_with_exact() {
        for n in [5u64, 20, 60] {
            for k in 0..=n {
                let exact: f64 = binomial(n, k).to_string().parse().unwrap();
                assert_relative_eq!(ln_binomial(n, k).exp(), exact, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn log_sum_exp_small_case() {
        let terms = [0.0_f64.ln(), 1.0_f64.ln(), 2.0_f64.ln()];
        assert_relative_eq!(log_sum_exp(&terms).exp(), 3.0, max_relative = 1e-12);
    }
}
