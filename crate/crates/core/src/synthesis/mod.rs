//! Scene enumeration and the one-to-many synthesis pipeline.

mod pipeline;
mod scene;

pub use pipeline::*;
pub use scene::*;
