use std::f64::consts::{PI, TAU};

use super::{AstroError, BodyState, Vec3};
use crate::roots::brent;

/// Result of inverting a powered swing-by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoweredSwingBy {
    /// Impulse at pericentre, km/s.
    pub dv: f64,
    /// Pericentre radius in planet radii.
    pub rp: f64,
}

/// Deflection of a hyperbola with pericentre `rp` (planet radii) and
/// asymptotic speed `v` (km/s).
pub fn turn_angle(rp: f64, v: f64, mu: f64, radius: f64) -> f64 {
    2.0 * (1.0 / (1.0 + rp * radius * v * v / mu)).asin()
}

/// Pericentre radius and impulse that join the incoming and outgoing
/// planet-relative velocities with a single tangential burn at pericentre.
pub fn powered_swingby_dv(v_in: &Vec3, v_out: &Vec3, mu: f64, radius: f64) -> Result<PoweredSwingBy, AstroError> {
    let (vin, vout) = (v_in.norm(), v_out.norm());
    if !(vin > 0.0 && vout > 0.0) || !vin.is_finite() || !vout.is_finite() {
        return Err(AstroError::DegenerateGeometry("zero hyperbolic excess speed"));
    }
    let alpha = (v_in.dot(v_out) / (vin * vout)).clamp(-1.0, 1.0).acos();
    // Nondimensional units: lengths in planet radii, speeds in sqrt(mu/R).
    let vu = (mu / radius).sqrt();
    let (a_in, a_out) = ((vu / vin).powi(2), (vu / vout).powi(2));
    let dv_at = |rp: f64| vu * (((vout / vu).powi(2) + 2.0 / rp).sqrt() - ((vin / vu).powi(2) + 2.0 / rp).sqrt());
    let residual = |rp: f64| (a_in / (a_in + rp)).asin() + (a_out / (a_out + rp)).asin() - alpha;

    if alpha < 1e-12 {
        return Ok(PoweredSwingBy {
            dv: (vout - vin).abs(),
            rp: f64::INFINITY,
        });
    }
    let lo = 1e-10;
    let f_lo = residual(lo);
    let mut hi = 1e5;
    let mut f_hi = residual(hi);
    while f_hi > 0.0 {
        hi *= 10.0;
        if hi > 1e18 {
            return Ok(PoweredSwingBy {
                dv: (vout - vin).abs(),
                rp: f64::INFINITY,
            });
        }
        f_hi = residual(hi);
    }
    if f_lo <= 0.0 {
        // Only reachable when alpha is numerically π.
        return Ok(PoweredSwingBy {
            dv: dv_at(lo).abs(),
            rp: lo,
        });
    }
    let rp = brent(residual, lo, hi, f_lo, f_hi, 1e-14, 300)
        .ok_or(AstroError::NonConvergence("powered swing-by pericentre"))?;
    Ok(PoweredSwingBy {
        dv: dv_at(rp).abs(),
        rp,
    })
}

/// Planet-relative velocity after an unpowered swing-by.
///
/// `rp` is in planet radii and `gamma` rotates the deflection plane about the
/// incoming relative velocity. At `gamma = 0` the hyperbola plane contains
/// both `v_in_rel` and `v_planet`.
pub fn unpowered_swingby(
    v_in_rel: &Vec3,
    v_planet: &Vec3,
    rp: f64,
    gamma: f64,
    mu: f64,
    radius: f64,
) -> Result<Vec3, AstroError> {
    let speed = v_in_rel.norm();
    if !(speed > 0.0) {
        return Err(AstroError::DegenerateGeometry("zero hyperbolic excess speed"));
    }
    let delta = turn_angle(rp, speed, mu, radius);
    let i = v_in_rel / speed;
    let j = i.cross(v_planet);
    let jn = j.norm();
    if !(jn > 1e-14 * v_planet.norm()) {
        return Err(AstroError::DegenerateGeometry(
            "relative velocity parallel to planet velocity",
        ));
    }
    let j = j / jn;
    let k = i.cross(&j);
    Ok((i * delta.cos() + (j * gamma.sin() + k * gamma.cos()) * delta.sin()) * speed)
}

/// Heliocentric departure velocity from the planet state, the excess speed
/// `v0` and the unit-interval angles `theta_bar` (in-plane) and `delta_bar`
/// (out-of-plane).
///
/// The frame has `j` along the planet velocity, `k` along its orbital angular
/// momentum and `i = j × k`, so `delta_bar = 0.5, theta_bar = 0.25` points
/// along the planet velocity and `theta_bar = 0` roughly outward.
pub fn launch_asymptote(v0: f64, theta_bar: f64, delta_bar: f64, planet: &BodyState) -> Result<Vec3, AstroError> {
    let theta = TAU * theta_bar;
    let phi = (2.0 * delta_bar - 1.0).clamp(-1.0, 1.0).acos() - PI / 2.0;
    let vn = planet.v.norm();
    let h = planet.r.cross(&planet.v);
    let hn = h.norm();
    if !(vn > 0.0 && hn > 0.0) {
        return Err(AstroError::DegenerateGeometry("planet state has no orbital plane"));
    }
    let j = planet.v / vn;
    let k = h / hn;
    let i = j.cross(&k);
    Ok(planet.v + (i * (phi.cos() * theta.cos()) + j * (phi.cos() * theta.sin()) + k * phi.sin()) * v0)
}
