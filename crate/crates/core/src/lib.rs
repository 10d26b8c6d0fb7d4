//! Day-ahead energy and reserve market clearing.
//!
//! A security-constrained unit commitment co-optimizes energy with three
//! zonal reserve products (regulation, spinning, non-spinning) under four
//! reserve models: capacity either shared between regulation and spinning
//! or not, and requirements either cascading (faster products count toward
//! slower requirements) or not. Prices are read from a fixed-commitment
//! pricing run and every generator is settled on the results.
//!
//! Pipeline: [`case`] → [`network`] → optional [`zoning`] and [`offers`] →
//! [`formulation`] → [`engine`] (via [`solver`]) → [`settlement`], with
//! [`suite`] running several variants side by side.

pub mod case;
pub mod engine;
pub mod formulation;
pub mod network;
pub mod offers;
pub mod settlement;
pub mod solver;
pub mod suite;
pub mod zoning;

pub use case::{load_case, MarketCase, VariantConfig};
pub use engine::{run_variant, PriceSet, VariantRun};
pub use suite::{run_suite, simulate, SuiteOptions, SuiteResult};

/// Shortest round-trip decimal form used in every CSV; `-0` prints as `0`.
pub(crate) fn num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        v.to_string()
    }
}
