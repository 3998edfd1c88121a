//! Finite-blocklength and second-order bound evaluators.
//!
//! Logarithms are base 2 throughout, except where a bound names `ln`, `log e`
//! or a power of `e` explicitly.

pub mod berry;
pub mod compose;
pub mod gaussian;
pub mod jscc;
pub mod params;
pub mod prefix;
pub mod report;

pub use berry::{berry_esseen_terms, wl_moments, BerryEsseen};
pub use compose::{
    dispersion_rates, k_on_sequence, second_order_limit, theorem11_upper, theorem12_lower, theorem8_bound,
    RateDirection, RatesReport, SecondOrder, Theorem8Inputs,
};
pub use gaussian::{q_func, q_inv};
pub use jscc::{big_gamma, default_t7_gamma_grid, theorem10_bound, theorem7_bound, Theorem7Inputs};
pub use params::BoundParams;
pub use prefix::{index_code_lengths, theorem5_bound, theorem9_bound, AlphabetSizes, Theorem5Inputs};
pub use report::{clip, BoundReport};
