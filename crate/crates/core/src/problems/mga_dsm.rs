//! Multiple gravity-assist transfers with one deep-space manoeuvre per leg
//! and unpowered swing-bys.

use crate::astro::{
    ephemeris, kepler_propagate, lambert, launch_asymptote, unpowered_swingby, AstroError, Body, BodyState, Direction,
    Ephemerides, DAY_S, MU_SUN,
};

use super::Objective;

#[derive(Debug, Clone)]
pub struct DsmMission {
    pub bodies: Vec<Body>,
    /// Whether the launch excess speed counts toward the objective.
    pub include_v0: bool,
}

/// Decoded decision vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DsmDecision {
    pub t0: f64,
    pub v0: f64,
    pub theta_bar: f64,
    pub delta_bar: f64,
    pub tof: Vec<f64>,
    pub alpha: Vec<f64>,
    pub rp: Vec<f64>,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DsmBreakdown {
    pub v0: f64,
    pub dsm_dv: Vec<f64>,
    pub arrival_dv: f64,
    pub total: f64,
}

impl DsmDecision {
    /// Splits `x = [t0, v0, θ̄, δ̄, T1..TN, α1..αN, rp1..rp(N-1), γ1..γ(N-1)]`.
    pub fn decode(x: &[f64], legs: usize) -> Self {
        assert_eq!(x.len(), 4 * legs + 2, "decision vector length");
        let n = legs;
        Self {
            t0: x[0],
            v0: x[1],
            theta_bar: x[2],
            delta_bar: x[3],
            tof: x[4..4 + n].to_vec(),
            alpha: x[4 + n..4 + 2 * n].to_vec(),
            rp: x[4 + 2 * n..3 + 3 * n].to_vec(),
            gamma: x[3 + 3 * n..2 + 4 * n].to_vec(),
        }
    }

    pub fn encode(&self) -> Vec<f64> {
        let mut x = vec![self.t0, self.v0, self.theta_bar, self.delta_bar];
        x.extend(&self.tof);
        x.extend(&self.alpha);
        x.extend(&self.rp);
        x.extend(&self.gamma);
        x
    }
}

impl DsmMission {
    pub fn from_names(names: &[&str], include_v0: bool) -> Result<Self, AstroError> {
        let eph = Ephemerides::bundled();
        let bodies = names.iter().map(|n| eph.get(n).cloned()).collect::<Result<_, _>>()?;
        Ok(Self { bodies, include_v0 })
    }

    /// Earth-Venus-Venus-Earth-Jupiter-Saturn, rendezvous at Saturn.
    pub fn cassini2() -> Self {
        Self::from_names(&["earth", "venus", "venus", "earth", "jupiter", "saturn"], true).expect("bundled bodies")
    }

    /// Earth-Earth-Mars-Earth-Earth-67P; the launch speed is free.
    pub fn rosetta() -> Self {
        Self::from_names(&["earth", "earth", "mars", "earth", "earth", "67p"], false).expect("bundled bodies")
    }

    /// Earth-Earth-Venus-Venus-Mercury.
    pub fn messenger() -> Self {
        Self::from_names(&["earth", "earth", "venus", "venus", "mercury"], true).expect("bundled bodies")
    }

    pub fn legs(&self) -> usize {
        self.bodies.len() - 1
    }

    pub fn dim(&self) -> usize {
        4 * self.legs() + 2
    }

    pub fn breakdown(&self, x: &[f64]) -> Result<DsmBreakdown, AstroError> {
        let n = self.legs();
        let dec = DsmDecision::decode(x, n);
        let mut epoch = dec.t0;
        let mut planet = ephemeris(&self.bodies[0], epoch)?;
        let mut v_sc = launch_asymptote(dec.v0, dec.theta_bar, dec.delta_bar, &planet)?;
        let mut dsm_dv = Vec::with_capacity(n);
        for leg in 0..n {
            if leg > 0 {
                let body = &self.bodies[leg];
                let v_in = v_sc - planet.v;
                let v_out = unpowered_swingby(
                    &v_in,
                    &planet.v,
                    dec.rp[leg - 1],
                    dec.gamma[leg - 1],
                    body.mu,
                    body.radius,
                )?;
                v_sc = planet.v + v_out;
            }
            let tof = dec.tof[leg];
            let coast = dec.alpha[leg] * tof;
            let start = BodyState {
                r: planet.r,
                v: v_sc,
                epoch,
            };
            let m = kepler_propagate(&start, MU_SUN, coast * DAY_S)?;
            epoch += tof;
            let next = ephemeris(&self.bodies[leg + 1], epoch)?;
            let (v1, v2) = lambert(&m.r, &next.r, (tof - coast) * DAY_S, MU_SUN, Direction::Prograde)?;
            dsm_dv.push((v1 - m.v).norm());
            v_sc = v2;
            planet = next;
        }
        let arrival_dv = (v_sc - planet.v).norm();
        let v0 = if self.include_v0 { dec.v0 } else { 0.0 };
        let total = v0 + dsm_dv.iter().sum::<f64>() + arrival_dv;
        Ok(DsmBreakdown {
            v0: dec.v0,
            dsm_dv,
            arrival_dv,
            total,
        })
    }
}

impl Objective for DsmMission {
    fn evaluate(&self, x: &[f64]) -> f64 {
        match self.breakdown(x) {
            Ok(b) => b.total,
            Err(e) => {
                log::debug!("mga-dsm evaluation failed: {e}");
                f64::NAN
            }
        }
    }
}
