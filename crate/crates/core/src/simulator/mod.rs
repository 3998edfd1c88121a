//! Monte Carlo realisation of the random joint source-channel code, its
//! reduction to `K` deterministic codes, and the index-prefix stochastic code.
//!
//! Every random draw comes from a ChaCha8 stream seeded by
//! [`crate::seeding::mix`], with one stream per trial, so results do not
//! depend on the thread count.

pub mod construct;
pub mod jammer;
pub mod reduce;
pub mod transmit;

pub use construct::{required_codebook_size, sample_jscc_code, JsccSampler, RandomCodeSpec, SampledCode};
pub use jammer::{greedy_jammer, greedy_search, GreedyResult, JammerKind, JammerStrategy};
pub use reduce::{cond_k, ensemble_error, per_theta_errors, reduce_random_code, EnsembleError, ReducedEnsemble, Validation};
pub use transmit::{
    random_code_transmit, simulate_code, stochastic_code_error, stochastic_code_transmit, wilson_interval, PrefixCode,
    SimReport, TranscriptRow, ORACLE_CODES,
};
