use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Closed interval `[0, L]` sampled on `n` uniform points (both endpoints
/// included) with `modes` retained cosine modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub length: f64,
    pub n: usize,
    pub modes: usize,
}

impl Domain {
    pub fn new(length: f64, n: usize, modes: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(ModelError::InvalidParameter {
                key: "L".into(),
                reason: format!("must be finite and > 0, got {length}"),
            });
        }
        if n < 8 {
            return Err(ModelError::InvalidParameter {
                key: "n".into(),
                reason: format!("at least 8 grid points required, got {n}"),
            });
        }
        if modes == 0 || modes > n {
            return Err(ModelError::InvalidParameter {
                key: "N".into(),
                reason: format!("mode count must lie in 1..={n}, got {modes}"),
            });
        }
        Ok(Self { length, n, modes })
    }

    /// Domain with the full mode set (`N = n`).
    pub fn full(length: f64, n: usize) -> Result<Self> {
        Self::new(length, n, n)
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.n - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        // jL/(n-1), written so the last point is exactly L
        self.length * j as f64 / (self.n - 1) as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Composite trapezoid weights on the closed grid.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.n];
        w[0] = 0.5 * h;
        w[self.n - 1] = 0.5 * h;
        w
    }

    /// Trapezoid integral of grid values over `[0, L]`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        let last = values.len() - 1;
        let interior: f64 = values[1..last].iter().sum();
        self.spacing() * (interior + 0.5 * (values[0] + values[last]))
    }

    pub fn mean(&self, values: &[f64]) -> f64 {
        self.integrate(values) / self.length
    }

    /// Smallest `d t` for which the truncated cosine kernel is treated as
    /// resolved: `1e-3 (L/pi)^2`.
    pub fn kernel_floor(&self) -> f64 {
        1e-3 * (self.length / std::f64::consts::PI).powi(2)
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len == self.n {
            Ok(())
        } else {
            Err(ModelError::SizeMismatch {
                expected: self.n,
                got: len,
            })
        }
    }
}

/// Grid samples of one scalar component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self {
            values: vec![value; n],
        }
    }

    pub fn from_fn(domain: &Domain, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: domain.grid().into_iter().map(f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Field) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn sup_distance(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_distance_to(&self, c: f64) -> f64 {
        self.values.iter().map(|a| (a - c).abs()).fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }
}

/// The three model components at one instant: infectious mosquitoes,
/// susceptible humans and infectious humans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateTriple {
    pub u1: Field,
    pub u2: Field,
    pub u3: Field,
}

impl StateTriple {
    pub fn new(u1: Field, u2: Field, u3: Field) -> Self {
        Self { u1, u2, u3 }
    }

    pub fn constant(n: usize, values: [f64; 3]) -> Self {
        Self {
            u1: Field::constant(n, values[0]),
            u2: Field::constant(n, values[1]),
            u3: Field::constant(n, values[2]),
        }
    }

    pub fn components(&self) -> [&Field; 3] {
        [&self.u1, &self.u2, &self.u3]
    }

    /// Largest componentwise sup-norm distance to a constant triple.
    pub fn sup_distance_to(&self, target: [f64; 3]) -> f64 {
        self.components()
            .iter()
            .zip(target)
            .map(|(f, c)| f.sup_distance_to(c))
            .fold(0.0, f64::max)
    }

    pub fn min_max(&self) -> [(f64, f64); 3] {
        self.components().map(|f| (f.min(), f.max()))
    }
}
