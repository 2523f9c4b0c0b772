//! Deterministic proton dose engine built on a collided/uncollided split.
//!
//! The uncollided flux is obtained by marching rays through the phantom with a
//! discontinuous Galerkin discretisation in energy. The collided flux is a
//! spherical-harmonics (P_N) moment system evolved in pseudo-time `t = E_max - E`
//! either by a rank-adaptive augmented basis-update Galerkin integrator
//! ([`dlra`]) or by a dense reference solver ([`fullrank`]).
//!
//! The crate is `no_std` + `alloc`. Enable the `std` feature for the faster
//! dense kernels of the host linear-algebra backend.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks are deliberate: they reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod angular;
pub mod collided;
pub mod constants;
pub mod dlra;
pub mod error;
pub mod fullrank;
pub mod linalg;
pub mod math;
pub mod physics;
pub mod pipeline;
pub mod quadrature;
pub mod raytracer;
pub mod spatial;

pub use error::{Error, Result};
