//! Rank-adaptive dynamical low-rank integrator for the collided moments
//! `u ≈ U S Vᵀ`: augmented basis-update Galerkin streaming with RK4, a four-part
//! scattering update, and singular-value truncation.

mod scattering;
mod state;
mod streaming;
mod truncation;

pub use scattering::scattering_step;
pub use state::LowRankState;
pub use streaming::streaming_step;
pub use truncation::{truncate, TruncationPolicy, TruncationReport};
