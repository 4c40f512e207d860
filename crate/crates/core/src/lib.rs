//! Closed-form laws and simulators for hull processes of the Brownian plane.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.
//! Every transcendental function goes through `libm`, so results do not depend
//! on the platform math library.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bm;
pub mod csbp_sim;
pub mod error;
pub mod formulas;
pub mod hull_model;
pub mod path;
pub mod planar_maps;
pub mod quad;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};
