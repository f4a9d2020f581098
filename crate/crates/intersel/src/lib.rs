//! Adaptive minimax sparse estimation for linear regression with two-way
//! interactions.
//!
//! The crate provides:
//!
//! - heredity-constrained model enumeration over main effects and pairwise
//!   interactions ([`model`]);
//! - least-squares projection estimators with rank-revealing fits ([`fit`]);
//! - an information-criterion selector that charges each model a descriptive
//!   complexity satisfying a Kraft-type summability condition ([`criterion`],
//!   [`search`]);
//! - minimax-rate calculators and a scenario classifier for the interplay of
//!   main-effect and interaction sparsity ([`rates`]);
//! - verifiers for the sparse Riesz condition and for the Hamming-packing and
//!   binomial inequalities underlying the lower bounds ([`spectral`],
//!   [`verify`]);
//! - a seeded Monte-Carlo harness and a CLI ([`harness`], [`io`]).
//!
//! # Example: selecting an interaction model
//!
//! ```
//! use intersel::criterion::{ComplexityConfig, ComplexityTable};
//! use intersel::design::{Dataset, DesignView};
//! use intersel::harness::{generate, true_beta, true_model};
//! use intersel::model::HeredityCondition;
//! use intersel::search::{select_exhaustive, DEFAULT_BUDGET_CAP};
//!
//! // A strong-heredity truth: mains {1,2} and the interaction (1,2).
//! let model = true_model(4, 2, 1, HeredityCondition::Strong)?;
//! let beta = true_beta(4, &model, 10.0, 1.0);
//! let data = generate(40, 4, &beta, 1.0, 7)?;
//! let view = DesignView::new(&data);
//! let table = ComplexityTable::new(ComplexityConfig::new(4, 40))?;
//!
//! let selected = select_exhaustive(&view, &table, DEFAULT_BUDGET_CAP)?;
//! assert!(selected.model.main.contains(&1));
//! assert!(selected.model.main.contains(&2));
//! # Ok::<(), intersel::error::Error>(())
//! ```
//!
//! # Example: comparing minimax rates across heredity conditions
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

pub mod cli;
pub mod combinat;
pub mod criterion;
pub mod design;
pub mod error;
pub mod fit;
pub mod harness;
pub mod io;
pub mod model;
pub mod rates;
pub mod search;
pub mod spectral;
pub mod verify;

pub use crate::error::{Error, Result};
pub use crate::model::{HeredityCondition, ModelIndex};
