//! Box-shaped search domains and the unit-hypercube normalization.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `d`-dimensional box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidDomain("dimension must be positive".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidDomain(format!(
                "{} lower bounds but {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidDomain(format!(
                    "component {j}: lower {lo} must be below upper {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The unit hypercube `[0, 1]^d`.
    pub fn unit(d: usize) -> Self {
        assert!(d > 0, "dimension must be positive");
        Self {
            lower: vec![0.0; d],
            upper: vec![1.0; d],
        }
    }

    /// The cube `[lo, hi]^d`.
    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Euclidean length of the box diagonal.
    pub fn diagonal(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| (hi - lo).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Maps a physical point onto `[0, 1]^d`. Points outside the box are rejected.
    pub fn normalize(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        x.iter()
            .enumerate()
            .map(|(j, &v)| {
                let (lo, hi) = (self.lower[j], self.upper[j]);
                if !(v >= lo && v <= hi) {
                    return Err(Error::OutOfBounds { index: j, value: v });
                }
                Ok((v - lo) / (hi - lo))
            })
            .collect()
    }

    /// Inverse of [`normalize`](Self::normalize).
    pub fn denormalize(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        u.iter()
            .enumerate()
            .map(|(j, &t)| {
                if !(-1e-12..=1.0 + 1e-12).contains(&t) {
                    return Err(Error::OutOfBounds { index: j, value: t });
                }
                Ok(self.denormalize_component(j, t))
            })
            .collect()
    }

    /// Affine image of a unit coordinate, without bounds checking.
    #[inline]
    pub fn denormalize_component(&self, j: usize, t: f64) -> f64 {
        let (lo, hi) = (self.lower[j], self.upper[j]);
        if t >= 1.0 {
            hi
        } else {
            lo + t * (hi - lo)
        }
    }

    /// Uniform sample inside the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
            .collect()
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::InvalidDomain(format!(
                "expected a {}-vector, got {}",
                self.dim(),
                x.len()
            )));
        }
        Ok(())
    }
}

/// Uniform sample in `[center - half_width, center + half_width]^d ∩ [0, 1]^d`.
pub fn sample_box_in_unit<R: Rng + ?Sized>(center: &[f64], half_width: f64, rng: &mut R) -> Vec<f64> {
    center
        .iter()
        .map(|&c| {
            let lo = (c - half_width).max(0.0);
            let hi = (c + half_width).min(1.0);
            if hi <= lo {
                c.clamp(0.0, 1.0)
            } else {
                lo + rng.random::<f64>() * (hi - lo)
            }
        })
        .collect()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
