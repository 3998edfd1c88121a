//! Finite-blocklength jamming games over arbitrarily varying channels.
//!
//! The crate computes the single-letter quantities of an AVC and a lossy
//! source (capacity, rate-distortion, dispersions, symmetrizability), exact
//! game values at tiny blocklengths, the LP-relaxation lower bound with an
//! explicit dual feasible point, closed-form finite-blocklength bounds, and
//! Monte Carlo simulation of the random joint source-channel codes.

// `!(x > 0.0)` also rejects NaN; index loops mirror the matrix notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod exactgame;
pub mod fbbounds;
pub mod lp;
pub mod lprelax;
pub mod model;
pub mod seeding;
pub mod simulator;
pub mod singleletter;

pub use error::{Error, Result};
