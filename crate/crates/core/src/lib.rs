//! Heisenberg group geometry and the quantitative estimates behind random
//! limsup sets of Heisenberg rectangles.
//!
//! The crate is `no_std` (with `alloc`). Enable the `parallel` feature to run
//! Monte Carlo loops on rayon; results are bit-identical either way because
//! every chunk of work draws from its own deterministic random stream and
//! reductions have a fixed shape.
//!
//! Modules:
//! - [`group`]: group law, gauge norm, metric, rectangles, samplers.
//! - [`svf`]: the directed singular value function and the dimension threshold.
//! - [`covers`]: explicit covers of rectangles and Hausdorff content estimates.
//! - [`energy`]: Monte Carlo Riesz energies, closed-form bounds, capacity.
//! - [`limsup`]: random rectangle placement, box counting, block coefficients.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod covers;
pub mod energy;
mod error;
mod exec;
pub mod group;
pub mod limsup;
mod math;
pub mod rng;
pub mod stats;
pub mod svf;

pub use error::{Error, Result};
pub use group::{HeisPoint, HeisRect, Radii};
pub use rng::SeedStream;
