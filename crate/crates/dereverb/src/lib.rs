//! Room impulse response simulation, regularized inverse filtering, and
//! dereverberation metrics.
//!
//! The crate simulates rectangular-room impulse responses with the image
//! source method, builds stable causal approximate inverse filters (scalar
//! and matrix) by regularized per-bin spectral inversion with a modeling
//! delay and optional exponential windowing, and quantifies how well the
//! filters dereverberate a plant response.
//!
//! Start with the runnable examples (`cargo run --release --example
//! scalar_inversion`, `windowing_effect`, ...) or the `dereverb` binary for
//! the file-based pipeline.

pub mod cli;
pub mod degrade;
pub mod error;
pub mod evaluation;
mod fft;
pub mod image_source;
pub mod inversion;
pub mod pipeline;
pub mod room;
pub mod scenario;
pub mod signal;
pub mod wav;

pub use error::{Axis, Error, Result};
pub use room::{validate_geometry, Point3, RoomModel};
pub use signal::{ImpulseResponse, TransferMatrix};
