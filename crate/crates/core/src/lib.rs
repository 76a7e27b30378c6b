//! Learning spray-painting trajectories as unordered sets of short pose
//! segments: procedural training data, segment losses, a point-cloud model,
//! segment linking and a paint-deposition simulator.

pub mod dataset;
pub mod error;
pub mod geometry;
pub mod kv;
pub mod learner;
pub mod linker;
pub mod objective;
pub mod pipeline;
pub mod plot;
pub mod raycast;
pub mod spraysim;
pub mod synthdata;
pub mod trajectory;

pub use error::{Error, Result};
