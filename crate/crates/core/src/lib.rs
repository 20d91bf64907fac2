//! Inflationary differential evolution (IDEA), monotonic basin hopping and
//! the trajectory benchmarks they are tested on.

pub mod astro;
pub mod de;
pub mod domain;
pub mod error;
pub mod harness;
pub mod idea;
pub mod landscape;
pub mod local;
pub mod mbh;
pub mod params;
pub mod problems;
pub mod report;
pub mod rng;
pub mod roots;

pub use error::{Error, Result};
