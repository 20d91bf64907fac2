use std::f64::consts::{PI, TAU};

use super::kepler::stumpff;
use super::{AstroError, Vec3};
use crate::roots::brent;

/// Sense of motion of the transfer arc about the ecliptic pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Prograde,
    Retrograde,
}

/// Minimum angular distance of the transfer angle from 0 and π.
const SINGULAR_ANGLE: f64 = 1e-6;

/// Zero-revolution Lambert arc from `r1` to `r2` in `tof` seconds.
///
/// Universal-variable formulation: the transfer time is a strictly
/// increasing function of `z = α χ²` on the admissible interval, so the root
/// is bracketed and polished with Brent's method. Returns the velocities at
/// both ends.
pub fn lambert(r1: &Vec3, r2: &Vec3, tof: f64, mu: f64, direction: Direction) -> Result<(Vec3, Vec3), AstroError> {
    if !(tof > 0.0) || !tof.is_finite() {
        return Err(AstroError::InvalidTimeOfFlight(tof));
    }
    let (r1n, r2n) = (r1.norm(), r2.norm());
    if !(r1n > 0.0 && r2n > 0.0) {
        return Err(AstroError::DegenerateGeometry("zero position vector"));
    }
    // atan2 keeps the angle accurate near 0 and 2π where acos of the dot
    // product loses half the digits.
    let short = r1.cross(r2).norm().atan2(r1.dot(r2));
    let cross_z = r1.cross(r2).z;
    let dnu = match (direction, cross_z >= 0.0) {
        (Direction::Prograde, true) | (Direction::Retrograde, false) => short,
        _ => TAU - short,
    };
    if dnu < SINGULAR_ANGLE || (dnu - PI).abs() < SINGULAR_ANGLE || TAU - dnu < SINGULAR_ANGLE {
        return Err(AstroError::SingularGeometry("transfer angle too close to 0 or π"));
    }
    // A = sin Δν sqrt(r1 r2 / (1 - cos Δν)) = ±sqrt(2 r1 r2) |cos(Δν/2)|
    let a = (2.0 * r1n * r2n).sqrt() * (0.5 * dnu).cos();
    let sqrt_mu = mu.sqrt();

    // (zS - 1)/sqrt(C) reduces to -√2 cos(√z/2) (cosh for z < 0), which
    // stays exact as z approaches 4π².
    let y_of = |z: f64| {
        let (c, s) = stumpff_lambert(z);
        let ratio = if z >= 0.0 {
            -(0.5 * z.sqrt()).cos()
        } else {
            -(0.5 * (-z).sqrt()).cosh()
        };
        (r1n + r2n + a * std::f64::consts::SQRT_2 * ratio, c, s)
    };
    // Transfer time minus tof; -inf where y < 0 (no admissible conic).
    let residual = |z: f64| {
        let (y, c, s) = y_of(z);
        if y < 0.0 {
            return f64::NEG_INFINITY;
        }
        ((y / c).powf(1.5) * s + a * y.sqrt()) / sqrt_mu - tof
    };

    let mut z_hi = 0.0;
    let mut f_hi = residual(z_hi);
    if f_hi < 0.0 {
        // Move toward 4π² where the time of flight diverges.
        let z_max = TAU * TAU;
        let mut gap = z_max;
        loop {
            gap *= 0.5;
            z_hi = z_max - gap;
            f_hi = residual(z_hi);
            if f_hi >= 0.0 {
                break;
            }
            if gap < 1e-12 {
                return Err(AstroError::NonConvergence("Lambert upper bracket"));
            }
        }
    }
    let mut z_lo = z_hi;
    let mut f_lo = f_hi;
    let mut step = 1.0;
    while f_lo > 0.0 {
        z_lo -= step;
        step *= 2.0;
        if z_lo < -4.0e5 {
            return Err(AstroError::NonConvergence("Lambert lower bracket"));
        }
        f_lo = residual(z_lo);
    }
    if f_lo == f64::NEG_INFINITY {
        // Walk the lower end up to the first admissible point.
        let (mut bad, mut good) = (z_lo, z_hi);
        for _ in 0..200 {
            let mid = 0.5 * (bad + good);
            let fm = residual(mid);
            if fm == f64::NEG_INFINITY {
                bad = mid;
            } else if fm > 0.0 {
                good = mid;
                z_hi = mid;
                f_hi = fm;
            } else {
                z_lo = mid;
                f_lo = fm;
                break;
            }
        }
        if f_lo == f64::NEG_INFINITY {
            return Err(AstroError::NonConvergence("Lambert admissible bracket"));
        }
    }

    let z = brent(residual, z_lo, z_hi, f_lo, f_hi, 1e-14, 200)
        .ok_or(AstroError::NonConvergence("Lambert time-of-flight equation"))?;
    let (y, _, _) = y_of(z);
    let f = 1.0 - y / r1n;
    let g = a * (y / mu).sqrt();
    let gdot = 1.0 - y / r2n;
    let v1 = (r2 - r1 * f) / g;
    let v2 = (r2 * gdot - r1) / g;
    Ok((v1, v2))
}

/// Stumpff C and S with C written as 2 sin²(w/2)/w², free of cancellation
/// near z = 4π².
fn stumpff_lambert(z: f64) -> (f64, f64) {
    if z > 1.0 {
        let w = z.sqrt();
        let h = (0.5 * w).sin();
        (2.0 * h * h / z, (w - w.sin()) / (w * z))
    } else {
        stumpff(z)
    }
}
