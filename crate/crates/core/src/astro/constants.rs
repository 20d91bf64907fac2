//! Physical constants shared by the trajectory models.
//!
//! Sun and planetary gravitational parameters and equatorial radii live in
//! the ephemeris table next to the elements they belong to.

/// Astronomical unit, km (IAU 2012 resolution B2).
pub const AU_KM: f64 = 149_597_870.7;

/// Heliocentric gravitational constant, km^3/s^2 (DE430).
pub const MU_SUN: f64 = 1.327_124_400_18e11;

/// Seconds per day.
pub const DAY_S: f64 = 86_400.0;

/// Days per Julian century.
pub const JULIAN_CENTURY_DAYS: f64 = 36_525.0;
