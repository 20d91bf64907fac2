//! Multiple gravity-assist transfers with powered swing-bys and no deep-space
//! manoeuvres.

use crate::astro::{
    ephemeris, lambert, powered_swingby_dv, AstroError, Body, Direction, Ephemerides, Vec3, DAY_S, MU_SUN,
};

use super::Objective;

/// Arrival orbit for the insertion manoeuvre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsertionOrbit {
    /// Pericentre radius, km.
    pub rp: f64,
    pub e: f64,
}

/// Swing-by sequence with a pericentre constraint at every intermediate body.
#[derive(Debug, Clone)]
pub struct MgaMission {
    pub bodies: Vec<Body>,
    /// Minimum normalized pericentre per intermediate body.
    pub rp_min: Vec<f64>,
    /// Penalty weight applied when the pericentre is below its minimum.
    pub penalty_weight: Vec<f64>,
    pub arrival: InsertionOrbit,
}

/// Breakdown of one trajectory evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct MgaBreakdown {
    pub launch_dv: f64,
    pub swingby_dv: Vec<f64>,
    /// Normalized pericentre of each swing-by.
    pub rp: Vec<f64>,
    pub arrival_dv: f64,
    pub penalty: f64,
    pub total: f64,
}

impl MgaMission {
    /// Earth-Venus-Venus-Earth-Jupiter-Saturn with insertion into a
    /// 108950 km, e = 0.98 orbit.
    pub fn cassini1() -> Self {
        let eph = Ephemerides::bundled();
        let bodies = ["earth", "venus", "venus", "earth", "jupiter", "saturn"]
            .iter()
            .map(|n| eph.get(n).cloned().expect("bundled body"))
            .collect();
        Self {
            bodies,
            rp_min: vec![1.0496, 1.0496, 1.0627, 9.3925],
            penalty_weight: vec![0.01, 0.01, 0.01, 0.001],
            arrival: InsertionOrbit { rp: 108_950.0, e: 0.98 },
        }
    }

    pub fn dim(&self) -> usize {
        self.bodies.len()
    }

    /// Evaluates `x = [t0, T1..TN]` (MJD2000, days).
    pub fn breakdown(&self, x: &[f64]) -> Result<MgaBreakdown, AstroError> {
        let n = self.bodies.len();
        assert_eq!(x.len(), n, "decision vector length");
        let mut epoch = x[0];
        let mut states = Vec::with_capacity(n);
        states.push(ephemeris(&self.bodies[0], epoch)?);
        for (k, body) in self.bodies.iter().enumerate().skip(1) {
            epoch += x[k];
            states.push(ephemeris(body, epoch)?);
        }

        let mut legs: Vec<(Vec3, Vec3)> = Vec::with_capacity(n - 1);
        for k in 0..n - 1 {
            let tof = x[k + 1] * DAY_S;
            legs.push(lambert(
                &states[k].r,
                &states[k + 1].r,
                tof,
                MU_SUN,
                Direction::Prograde,
            )?);
        }

        let launch_dv = (legs[0].0 - states[0].v).norm();
        let mut swingby_dv = Vec::with_capacity(n - 2);
        let mut rp = Vec::with_capacity(n - 2);
        let mut penalty = 0.0;
        for k in 1..n - 1 {
            let body = &self.bodies[k];
            let v_in = legs[k - 1].1 - states[k].v;
            let v_out = legs[k].0 - states[k].v;
            let sb = powered_swingby_dv(&v_in, &v_out, body.mu, body.radius)?;
            if sb.rp < self.rp_min[k - 1] {
                penalty += self.penalty_weight[k - 1] * (sb.rp - self.rp_min[k - 1]).powi(2);
            }
            swingby_dv.push(sb.dv);
            rp.push(sb.rp);
        }

        let target = &self.bodies[n - 1];
        let v_inf = (legs[n - 2].1 - states[n - 1].v).norm();
        let InsertionOrbit { rp: rp_a, e } = self.arrival;
        let arrival_dv =
            ((v_inf * v_inf + 2.0 * target.mu / rp_a).sqrt() - (target.mu * (1.0 + e) / rp_a).sqrt()).abs();

        let total = launch_dv + swingby_dv.iter().sum::<f64>() + arrival_dv + penalty;
        Ok(MgaBreakdown {
            launch_dv,
            swingby_dv,
            rp,
            arrival_dv,
            penalty,
            total,
        })
    }
}

impl Objective for MgaMission {
    fn evaluate(&self, x: &[f64]) -> f64 {
        match self.breakdown(x) {
            Ok(b) => b.total,
            Err(e) => {
                log::debug!("mga evaluation failed: {e}");
                f64::NAN
            }
        }
    }
}
