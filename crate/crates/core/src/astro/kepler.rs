use std::f64::consts::TAU;

use super::{AstroError, BodyState, Vec3};

/// Stumpff functions `(C(z), S(z))`.
pub(crate) fn stumpff(z: f64) -> (f64, f64) {
    if z > 1e-3 {
        let s = z.sqrt();
        ((1.0 - s.cos()) / z, (s - s.sin()) / (s * z))
    } else if z < -1e-3 {
        let s = (-z).sqrt();
        ((s.cosh() - 1.0) / -z, (s.sinh() - s) / (s * -z))
    } else {
        // Series to z^4 keeps full double precision for |z| <= 1e-3.
        let c = 0.5 - z / 24.0 + z * z / 720.0 - z * z * z / 40_320.0 + z.powi(4) / 3_628_800.0;
        let s = 1.0 / 6.0 - z / 120.0 + z * z / 5040.0 - z * z * z / 362_880.0 + z.powi(4) / 39_916_800.0;
        (c, s)
    }
}

/// Specific orbital energy `v²/2 − μ/r`.
pub fn orbital_energy(r: &Vec3, v: &Vec3, mu: f64) -> f64 {
    v.norm_squared() / 2.0 - mu / r.norm()
}

/// Two-body propagation by `dt` seconds with universal variables.
pub fn kepler_propagate(state: &BodyState, mu: f64, dt: f64) -> Result<BodyState, AstroError> {
    let (r0v, v0v) = (state.r, state.v);
    let r0 = r0v.norm();
    if !(r0 > 0.0) || !dt.is_finite() {
        return Err(AstroError::DegenerateGeometry("zero radius or non-finite time step"));
    }
    let epoch = state.epoch + dt / super::DAY_S;
    if dt == 0.0 {
        return Ok(BodyState { epoch, ..*state });
    }
    let sqrt_mu = mu.sqrt();
    let rv = r0v.dot(&v0v);
    let alpha = 2.0 / r0 - v0v.norm_squared() / mu;

    // Whole revolutions of an ellipse are dropped before solving.
    let mut t = dt;
    if alpha > 0.0 {
        let period = TAU / (alpha.powi(3) * mu).sqrt();
        t -= (t / period).round() * period;
    }
    if t == 0.0 {
        return Ok(BodyState { r: r0v, v: v0v, epoch });
    }

    let residual = |chi: f64| -> (f64, f64) {
        let z = alpha * chi * chi;
        let (c, s) = stumpff(z);
        let f = rv / sqrt_mu * chi * chi * c + (1.0 - alpha * r0) * chi.powi(3) * s + r0 * chi - sqrt_mu * t;
        let df = rv / sqrt_mu * chi * (1.0 - z * s) + (1.0 - alpha * r0) * chi * chi * c + r0;
        (f, df)
    };

    // F(chi) is strictly increasing (F' = r > 0), so a bracket plus a
    // safeguarded Newton iteration always converges.
    let guess = if alpha > 0.0 {
        sqrt_mu * alpha * t
    } else {
        t.signum() * sqrt_mu * t.abs() / r0
    };
    let mut step = guess.abs().max(1e-3 * r0.sqrt());
    let (mut lo, mut hi) = (guess, guess);
    let mut bracketed = false;
    for _ in 0..200 {
        let (flo, _) = residual(lo);
        let (fhi, _) = residual(hi);
        if !flo.is_finite() || !fhi.is_finite() {
            break;
        }
        if flo <= 0.0 && fhi >= 0.0 {
            bracketed = true;
            break;
        }
        if flo > 0.0 {
            lo -= step;
        }
        if fhi < 0.0 {
            hi += step;
        }
        step *= 2.0;
    }
    if !bracketed {
        return Err(AstroError::NonConvergence("universal Kepler bracket"));
    }

    let mut chi = guess.clamp(lo, hi);
    let mut converged = false;
    for _ in 0..100 {
        let (f, df) = residual(chi);
        if f == 0.0 {
            converged = true;
            break;
        }
        if f < 0.0 {
            lo = chi;
        } else {
            hi = chi;
        }
        let mut next = chi - f / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - chi).abs() <= 4.0 * f64::EPSILON * chi.abs().max(1e-300)
            || hi - lo <= 4.0 * f64::EPSILON * chi.abs();
        chi = next;
        if done {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(AstroError::NonConvergence("universal Kepler iteration"));
    }

    let z = alpha * chi * chi;
    let (c, s) = stumpff(z);
    let f = 1.0 - chi * chi / r0 * c;
    let g = t - chi.powi(3) / sqrt_mu * s;
    let r = r0v * f + v0v * g;
    let rn = r.norm();
    let fdot = sqrt_mu / (rn * r0) * (z * s - 1.0) * chi;
    let gdot = 1.0 - chi * chi / rn * c;
    let v = r0v * fdot + v0v * gdot;
    Ok(BodyState { r, v, epoch })
}
