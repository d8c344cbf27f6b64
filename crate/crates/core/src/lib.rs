//! Exact tools for studying sumset patterns `{m·b₁ + ℓ·b₂}` inside dense sets
//! of positive integers.

pub mod bits;
pub mod density;
pub mod error;
pub mod families;
pub mod patterns;
pub mod rational;
pub mod setkit;
pub mod symbolic;

pub use error::{Error, Result};
pub use rational::Rational;
pub use setkit::{IntervalFamily, SetSpec, Truncation};
