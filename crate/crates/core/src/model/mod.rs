//! Distributions, channels, sources, sequence spaces and type classes.

pub mod channel;
pub mod config;
pub mod dist;
pub mod instance;
pub mod seq;
pub mod source;
pub mod types;

pub use channel::{Channel, ChannelFamily};
pub use dist::{binary_entropy, Dist};
pub use instance::GameInstance;
pub use seq::{ball_mass, iid_extend, seq_distortion, BallMass, SeqSpace};
pub use source::SourceSpec;
pub use types::{enumerate_types, TypeClass};
