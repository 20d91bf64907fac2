use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::Serialize;

use super::constants::{AU_KM, DAY_S, JULIAN_CENTURY_DAYS, MU_SUN};
use super::{AstroError, Vec3};

/// Bundled element table, see `data/ephemeris.txt` for the column layout.
pub const DEFAULT_EPHEMERIS: &str = include_str!("../../data/ephemeris.txt");

/// Validity window of the mean-element model, in days from J2000.
const MAX_EPOCH_OFFSET_DAYS: f64 = 200.0 * 365.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BodyState {
    pub r: Vec3,
    pub v: Vec3,
    /// MJD2000.
    pub epoch: f64,
}

/// Cubic polynomial in Julian centuries from the element epoch.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Secular(pub [f64; 4]);

impl Secular {
    pub fn constant(c: f64) -> Self {
        Self([c, 0.0, 0.0, 0.0])
    }

    pub fn at(&self, t: f64) -> f64 {
        let c = &self.0;
        c[0] + t * (c[1] + t * (c[2] + t * c[3]))
    }
}

/// Mean elements with secular polynomials; angles in degrees, `a` in AU.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanElements {
    pub a_au: Secular,
    pub e: Secular,
    pub i_deg: Secular,
    pub mean_longitude_deg: Secular,
    pub perihelion_longitude_deg: Secular,
    pub node_deg: Secular,
    /// Advance the mean longitude with the two-body mean motion instead of
    /// its polynomial.
    pub kepler_mean_motion: bool,
    /// MJD2000.
    pub epoch: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub name: String,
    pub elements: MeanElements,
    /// Gravitational parameter, km^3/s^2.
    pub mu: f64,
    /// Equatorial radius, km.
    pub radius: f64,
}

impl Body {
    /// Builds a body following a fixed heliocentric conic through `state`.
    pub fn from_state(name: &str, state: &BodyState) -> Self {
        let mu = MU_SUN;
        let (r, v) = (state.r, state.v);
        let h = r.cross(&v);
        let rn = r.norm();
        let e_vec = v.cross(&h) / mu - r / rn;
        let e = e_vec.norm();
        let energy = v.norm_squared() / 2.0 - mu / rn;
        let a = -mu / (2.0 * energy);
        let i = (h.z / h.norm()).clamp(-1.0, 1.0).acos();
        let node_vec = Vec3::new(-h.y, h.x, 0.0);
        let node = if node_vec.norm() > 1e-12 * h.norm() {
            node_vec.y.atan2(node_vec.x)
        } else {
            0.0
        };
        // Longitude of perihelion and true longitude are measured in the
        // ecliptic then along the orbit, which stays well defined for i = 0.
        let x_hat = if node_vec.norm() > 1e-12 * h.norm() {
            node_vec.normalize()
        } else {
            Vec3::x()
        };
        let y_hat = h.normalize().cross(&x_hat);
        let arg = |vec: &Vec3| vec.dot(&y_hat).atan2(vec.dot(&x_hat));
        let omega = arg(&e_vec);
        let true_anomaly = arg(&r) - omega;
        let ecc_anomaly = 2.0 * (((1.0 - e) / (1.0 + e)).sqrt() * (true_anomaly / 2.0).tan()).atan();
        let mean_anomaly = ecc_anomaly - e * ecc_anomaly.sin();
        let varpi = node + omega;
        Self {
            name: name.to_string(),
            elements: MeanElements {
                a_au: Secular::constant(a / AU_KM),
                e: Secular::constant(e),
                i_deg: Secular::constant(i.to_degrees()),
                mean_longitude_deg: Secular::constant((varpi + mean_anomaly).to_degrees()),
                perihelion_longitude_deg: Secular::constant(varpi.to_degrees()),
                node_deg: Secular::constant(node.to_degrees()),
                kepler_mean_motion: true,
                epoch: state.epoch,
            },
            mu: 0.0,
            radius: 0.0,
        }
    }
}

/// A set of bodies addressable by lower-case name.
#[derive(Debug, Clone, Default)]
pub struct Ephemerides {
    bodies: BTreeMap<String, Body>,
}

impl Ephemerides {
    pub fn bundled() -> &'static Ephemerides {
        static TABLE: std::sync::OnceLock<Ephemerides> = std::sync::OnceLock::new();
        TABLE.get_or_init(|| parse_bodies(DEFAULT_EPHEMERIS).expect("bundled ephemeris table is valid"))
    }

    pub fn get(&self, name: &str) -> Result<&Body, AstroError> {
        self.bodies
            .get(&name.to_ascii_lowercase())
            .ok_or_else(|| AstroError::UnknownBody(name.to_string()))
    }

    pub fn insert(&mut self, body: Body) {
        self.bodies.insert(body.name.to_ascii_lowercase(), body);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bodies.keys().map(String::as_str)
    }
}

/// name, epoch, mu, radius, then six cubic polynomials of four coefficients.
const COLUMNS: usize = 4 + 6 * 4;

/// Parses the plain-text element table.
pub fn parse_bodies(text: &str) -> Result<Ephemerides, AstroError> {
    let mut table = Ephemerides::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| AstroError::Table { line: idx + 1, message };
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != COLUMNS {
            return Err(err(format!("expected {COLUMNS} columns, found {}", cols.len())));
        }
        let num = |k: usize| -> Result<f64, AstroError> {
            cols[k]
                .parse::<f64>()
                .map_err(|e| err(format!("column {}: {e}", k + 1)))
        };
        // Mean longitude is the fourth polynomial; its linear term may read `kepler`.
        let kepler_mean_motion = cols[4 + 3 * 4 + 1].eq_ignore_ascii_case("kepler");
        let poly = |k: usize| -> Result<Secular, AstroError> {
            let base = 4 + 4 * k;
            let mut c = [0.0; 4];
            for (j, slot) in c.iter_mut().enumerate() {
                if !(k == 3 && j == 1 && kepler_mean_motion) {
                    *slot = num(base + j)?;
                }
            }
            Ok(Secular(c))
        };
        let elements = MeanElements {
            a_au: poly(0)?,
            e: poly(1)?,
            i_deg: poly(2)?,
            mean_longitude_deg: poly(3)?,
            perihelion_longitude_deg: poly(4)?,
            node_deg: poly(5)?,
            kepler_mean_motion,
            epoch: num(1)?,
        };
        if !(elements.a_au.0[0] > 0.0 && (0.0..1.0).contains(&elements.e.0[0])) {
            return Err(err("only elliptic bodies are supported".into()));
        }
        table.insert(Body {
            name: cols[0].to_string(),
            elements,
            mu: num(2)?,
            radius: num(3)?,
        });
    }
    Ok(table)
}

/// Solves Kepler's equation `M = E − e sin E` for the eccentric anomaly.
pub(crate) fn eccentric_anomaly(mean_anomaly: f64, e: f64) -> f64 {
    let m = mean_anomaly.rem_euclid(TAU);
    let mut ecc = if e < 0.8 { m } else { std::f64::consts::PI };
    for _ in 0..50 {
        let f = ecc - e * ecc.sin() - m;
        let step = f / (1.0 - e * ecc.cos());
        ecc -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    ecc
}

/// Heliocentric ecliptic J2000 state of `body` at `epoch` (MJD2000).
pub fn ephemeris(body: &Body, epoch: f64) -> Result<BodyState, AstroError> {
    if !epoch.is_finite() || epoch.abs() > MAX_EPOCH_OFFSET_DAYS {
        return Err(AstroError::EpochOutOfRange(epoch));
    }
    let el = &body.elements;
    let t = (epoch - el.epoch) / JULIAN_CENTURY_DAYS;
    let a = el.a_au.at(t) * AU_KM;
    let e = el.e.at(t);
    if !(a > 0.0 && (0.0..1.0).contains(&e)) {
        return Err(AstroError::EpochOutOfRange(epoch));
    }
    let i = el.i_deg.at(t).to_radians();
    let node = el.node_deg.at(t).to_radians();
    let varpi = el.perihelion_longitude_deg.at(t).to_radians();
    let mean_longitude = if el.kepler_mean_motion {
        let n = (MU_SUN / a.powi(3)).sqrt();
        el.mean_longitude_deg.0[0].to_radians() + n * (epoch - el.epoch) * DAY_S
    } else {
        el.mean_longitude_deg.at(t).to_radians()
    };
    let omega = varpi - node;
    let ecc = eccentric_anomaly(mean_longitude - varpi, e);

    let (sin_e, cos_e) = ecc.sin_cos();
    let b = a * (1.0 - e * e).sqrt();
    let r_pf = [a * (cos_e - e), b * sin_e];
    let r_mag = a * (1.0 - e * cos_e);
    let speed_scale = (MU_SUN * a).sqrt() / r_mag;
    let v_pf = [-speed_scale * sin_e, speed_scale * (1.0 - e * e).sqrt() * cos_e];

    let (so, co) = omega.sin_cos();
    let (sn, cn) = node.sin_cos();
    let (si, ci) = i.sin_cos();
    let p = Vec3::new(co * cn - so * sn * ci, co * sn + so * cn * ci, so * si);
    let q = Vec3::new(-so * cn - co * sn * ci, -so * sn + co * cn * ci, co * si);
    Ok(BodyState {
        r: p * r_pf[0] + q * r_pf[1],
        v: p * v_pf[0] + q * v_pf[1],
        epoch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body(name: &str) -> &'static Body {
        Ephemerides::bundled().get(name).unwrap()
    }

    #[test]
    fn bundled_table_has_all_bodies() {
        let names: Vec<&str> = Ephemerides::bundled().names().collect();
        for n in ["mercury", "venus", "earth", "mars", "jupiter", "saturn", "67p"] {
            assert!(names.contains(&n), "{n} missing");
        }
        assert!(matches!(
            Ephemerides::bundled().get("pluto"),
            Err(AstroError::UnknownBody(_))
        ));
    }

    #[test]
    fn earth_is_one_au_from_the_sun() {
        let s = ephemeris(body("earth"), 0.0).unwrap();
        assert!((s.r.norm() / AU_KM - 1.0).abs() < 0.02);
        // Early January is close to perihelion.
        assert!(s.r.norm() / AU_KM < 0.985);
        assert!(s.r.z.abs() / AU_KM < 1e-4);
    }

    #[test]
    fn states_satisfy_vis_viva() {
        for b in ["mercury", "venus", "earth", "mars", "jupiter", "saturn", "67p"] {
            for epoch in [-3000.0, 0.0, 1234.5, 9000.0] {
                let body = body(b);
                let s = ephemeris(body, epoch).unwrap();
                let a = body.elements.a_au.at((epoch - body.elements.epoch) / 36525.0) * AU_KM;
                let lhs = s.v.norm_squared() / 2.0 - MU_SUN / s.r.norm() + MU_SUN / (2.0 * a);
                assert!(lhs.abs() < 1e-8 * MU_SUN / (2.0 * a), "{b} at {epoch}: {lhs}");
            }
        }
    }

    #[test]
    fn earth_returns_after_a_sidereal_year() {
        let sidereal_year = 365.256_363;
        let s0 = ephemeris(body("earth"), 100.0).unwrap();
        let s1 = ephemeris(body("earth"), 100.0 + sidereal_year).unwrap();
        assert!((s1.r - s0.r).norm() / AU_KM < 1e-3);
    }

    #[test]
    fn comet_is_at_perihelion_at_its_epoch() {
        let comet = body("67p");
        let s = ephemeris(comet, comet.elements.epoch).unwrap();
        let q = comet.elements.a_au.0[0] * (1.0 - comet.elements.e.0[0]) * AU_KM;
        assert!((s.r.norm() - q).abs() < 1e-6 * q);
        assert!(s.r.dot(&s.v).abs() < 1e-6 * s.r.norm() * s.v.norm());
    }

    #[test]
    fn epochs_far_from_j2000_are_rejected() {
        assert!(matches!(
            ephemeris(body("earth"), 1e6),
            Err(AstroError::EpochOutOfRange(_))
        ));
    }

    #[test]
    fn malformed_rows_are_reported_with_line_numbers() {
        let err = parse_bodies("# header\nfoo 1 2 3\n").unwrap_err();
        assert!(matches!(err, AstroError::Table { line: 2, .. }));
    }

    #[test]
    fn conic_body_reproduces_its_state() {
        let s = ephemeris(body("mars"), 500.0).unwrap();
        let b = Body::from_state("probe", &s);
        let back = ephemeris(&b, 500.0).unwrap();
        assert!((back.r - s.r).norm() < 1e-6 * s.r.norm());
        assert!((back.v - s.v).norm() < 1e-6 * s.v.norm());
    }

    #[test]
    fn kepler_equation_residual() {
        for e in [0.0, 0.1, 0.6, 0.95] {
            for k in 0..24 {
                let m = k as f64 * 0.3 - 2.0;
                let ecc = eccentric_anomaly(m, e);
                let resid = (ecc - e * ecc.sin() - m.rem_euclid(TAU)).abs();
                assert!(resid < 1e-13, "e={e} M={m}");
            }
        }
    }
}
