//! Exact and estimated values of the finite jamming game at tiny blocklengths.

pub mod code;
pub mod payoff;
pub mod upper;
pub mod values;

use serde::Serialize;

pub use code::{DeterministicCode, GameTables, StochasticCode};
pub use payoff::{error_probability, Code, Jam};
pub use upper::{upper_value_estimate, UpperEstimate};
pub use values::{lower_value_exact, mixed_value, product_jammer_value, LowerValue, MixedValue};

use crate::error::Result;
use crate::model::{Dist, GameInstance};

#[derive(Debug, Clone, Serialize)]
pub struct GameValueReport {
    pub lower_exact: f64,
    pub mixed_value: f64,
    pub upper_estimate: f64,
    pub q_star: Dist,
    pub best_code_index: u128,
    pub multistart_count: usize,
    /// `upper_estimate - lower_exact`; closing it is not claimed.
    pub gap: f64,
}

/// All three values; the best response to `q*` warm-starts the upper search.
pub fn game_values(inst: &GameInstance, starts: usize, seed: u64) -> Result<GameValueReport> {
    let lower = lower_value_exact(inst)?;
    let mixed = mixed_value(inst)?;
    let t = GameTables::new(inst)?;
    let warm = t.to_stochastic(&t.code_from_index(lower.best_code_index));
    let upper = upper_value_estimate(&t, starts, seed, Some(warm))?;
    Ok(GameValueReport {
        lower_exact: lower.value,
        mixed_value: mixed.value,
        upper_estimate: upper.value,
        q_star: lower.q_star,
        best_code_index: lower.best_code_index,
        multistart_count: upper.starts,
        gap: upper.value - lower.value,
    })
}
