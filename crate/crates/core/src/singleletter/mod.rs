//! Single-letter quantities: capacity, symmetrizability, rate-distortion,
//! tilted and information densities, dispersions.

pub mod capacity;
pub mod dispersion;
pub mod info;
pub mod kelley;
pub mod ratedist;
pub mod symmetrize;

pub use capacity::{avc_capacity, min_info_over_states, CapacityResult};
pub use dispersion::{dispersions, DispersionOptions, DispersionResult};
pub use info::{averaged_channel, info_density, mutual_information};
pub use ratedist::{d_tilted_info, rate_distortion, seq_tilted_info, RateDistortionResult};
pub use symmetrize::{is_symmetrizable, symmetrizability_margin, MarginResult, SymmetrizabilityResult};
