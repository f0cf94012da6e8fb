//! Dense linear algebra and seeded random numbers.

mod matrix;
mod rng;

pub use matrix::{dot, Matrix};
pub use rng::{sample_gaussian, Rng};
