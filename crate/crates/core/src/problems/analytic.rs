use std::f64::consts::TAU;

use super::Objective;

/// Sum of squares; minimum 0 at the origin.
#[derive(Debug, Clone, Copy, Default)]
pub struct Paraboloid;

impl Objective for Paraboloid {
    fn evaluate(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }
}

/// Rastrigin function; minimum 0 at the origin.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rastrigin;

impl Objective for Rastrigin {
    fn evaluate(&self, x: &[f64]) -> f64 {
        10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (TAU * v).cos()).sum::<f64>()
    }
}

/// Schwefel function on [-500, 500]^d; minimum near 0 at 420.9687 in every
/// component.
#[derive(Debug, Clone, Copy, Default)]
pub struct Schwefel;

pub const SCHWEFEL_MINIMIZER: f64 = 420.968_746;

impl Objective for Schwefel {
    fn evaluate(&self, x: &[f64]) -> f64 {
        418.982_887_272_433_9 * x.len() as f64 - x.iter().map(|v| v * v.abs().sqrt().sin()).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_minima() {
        assert_eq!(Paraboloid.evaluate(&[0.0; 5]), 0.0);
        assert_eq!(Rastrigin.evaluate(&[0.0; 5]), 0.0);
        assert!(Schwefel.evaluate(&[420.9687; 5]).abs() < 1e-3);
        assert!(Schwefel.evaluate(&[SCHWEFEL_MINIMIZER; 5]).abs() < 1e-6);
    }

    #[test]
    fn rastrigin_local_minima_near_integers() {
        let f1 = Rastrigin.evaluate(&[1.0, 0.0]);
        assert!((f1 - 1.0).abs() < 1e-12);
        assert!(Rastrigin.evaluate(&[0.9, 0.0]) > f1 || Rastrigin.evaluate(&[1.1, 0.0]) > f1);
    }
}
