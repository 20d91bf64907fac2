//! Patched-conic astrodynamics: ephemerides, two-body propagation, Lambert
//! arcs, gravity assists and launch asymptotes.
//!
//! Units are km, km/s and seconds; epochs are MJD2000 days.

mod constants;
mod ephemeris;
mod kepler;
mod lambert;
mod swingby;

pub use constants::{AU_KM, DAY_S, MU_SUN};
pub use ephemeris::{ephemeris, parse_bodies, Body, BodyState, Ephemerides, MeanElements, Secular, DEFAULT_EPHEMERIS};
pub use kepler::{kepler_propagate, orbital_energy};
pub use lambert::{lambert, Direction};
pub use swingby::{launch_asymptote, powered_swingby_dv, turn_angle, unpowered_swingby, PoweredSwingBy};

pub type Vec3 = nalgebra::Vector3<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AstroError {
    #[error("unknown body `{0}`")]
    UnknownBody(String),
    #[error("epoch {0} MJD2000 is outside the ephemeris validity window")]
    EpochOutOfRange(f64),
    #[error("time of flight must be positive, got {0} s")]
    InvalidTimeOfFlight(f64),
    #[error("singular geometry: {0}")]
    SingularGeometry(&'static str),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),
    #[error("{0} did not converge")]
    NonConvergence(&'static str),
    #[error("malformed ephemeris table at line {line}: {message}")]
    Table { line: usize, message: String },
}
