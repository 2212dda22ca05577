//! Neumann heat semigroup on `[0, L]` realised through a cosine expansion.
//!
//! The transform pair is the type-I discrete cosine transform normalised by
//! the trapezoid weights of the closed grid, so the mean mode is exactly the
//! trapezoid mean and the semigroup conserves trapezoid mass identically.

use std::f64::consts::PI;

use crate::error::{ModelError, Result};
use crate::model::{Domain, Field};

/// Cosine-mode amplitudes; mode `k` has eigenvalue `(k pi / L)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalField {
    pub coeffs: Vec<f64>,
}

/// Precomputed basis tables for one domain.
#[derive(Debug, Clone)]
pub struct Spectral {
    domain: Domain,
    weights: Vec<f64>,
    /// `cos(k pi j / (n-1))`, row-major by grid index `j`, `modes` columns.
    cos: Vec<f64>,
    /// `sin(k pi j / (n-1))`, same layout.
    sin: Vec<f64>,
    /// Discrete squared norm of each cosine mode under the trapezoid rule.
    norms: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl Spectral {
    pub fn new(domain: &Domain) -> Self {
        let n = domain.n;
        let modes = domain.modes;
        let period = 2 * (n - 1);
        let mut cos = vec![0.0; n * modes];
        let mut sin = vec![0.0; n * modes];
        for j in 0..n {
            for k in 0..modes {
                // reduce the phase index first so tables are exactly symmetric
                let m = (k * j) % period;
                let phase = PI * m as f64 / (n - 1) as f64;
                cos[j * modes + k] = phase.cos();
                sin[j * modes + k] = phase.sin();
            }
        }
        let l = domain.length;
        let norms = (0..modes)
            .map(|k| if k == 0 || k == n - 1 { l } else { 0.5 * l })
            .collect();
        let eigenvalues = (0..modes).map(|k| (k as f64 * PI / l).powi(2)).collect();
        Self {
            domain: *domain,
            weights: domain.weights(),
            cos,
            sin,
            norms,
            eigenvalues,
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    pub fn to_modal(&self, f: &Field) -> Result<ModalField> {
        self.domain.check_len(f.len())?;
        Ok(ModalField {
            coeffs: self.analyse(f.values()),
        })
    }

    pub fn to_grid(&self, m: &ModalField) -> Result<Field> {
        if m.coeffs.len() != self.domain.modes {
            return Err(ModelError::SizeMismatch {
                expected: self.domain.modes,
                got: m.coeffs.len(),
            });
        }
        Ok(Field::new(self.synthesise(&m.coeffs)))
    }

    fn analyse(&self, values: &[f64]) -> Vec<f64> {
        let modes = self.domain.modes;
        let mut coeffs = vec![0.0; modes];
        for (j, (&v, &w)) in values.iter().zip(&self.weights).enumerate() {
            let wv = w * v;
            let row = &self.cos[j * modes..(j + 1) * modes];
            for (c, &b) in coeffs.iter_mut().zip(row) {
                *c += wv * b;
            }
        }
        for (c, &nk) in coeffs.iter_mut().zip(&self.norms) {
            *c /= nk;
        }
        coeffs
    }

    fn synthesise(&self, coeffs: &[f64]) -> Vec<f64> {
        let modes = self.domain.modes;
        (0..self.domain.n)
            .map(|j| {
                self.cos[j * modes..(j + 1) * modes]
                    .iter()
                    .zip(coeffs)
                    .map(|(b, c)| b * c)
                    .sum()
            })
            .collect()
    }

    /// Runs pure diffusion with coefficient `d` for time `t`, i.e. applies
    /// the Neumann Green function `Gamma(d t, x, y)`.
    pub fn heat_apply(&self, f: &Field, d: f64, t: f64) -> Result<Field> {
        self.domain.check_len(f.len())?;
        if t < 0.0 || t.is_nan() {
            return Err(ModelError::NegativeTime(t));
        }
        if !(d > 0.0) {
            return Err(ModelError::InvalidParameter {
                key: "d".into(),
                reason: format!("diffusivity must be > 0, got {d}"),
            });
        }
        // constants are fixed points
        if t == 0.0 || f.is_constant() {
            return Ok(f.clone());
        }
        let s = d * t;
        let mut coeffs = self.analyse(f.values());
        for (c, &lambda) in coeffs.iter_mut().zip(&self.eigenvalues) {
            *c *= (-s * lambda).exp();
        }
        Ok(Field::new(self.synthesise(&coeffs)))
    }

    /// Dense matrix of `Gamma(d t, x_i, y_j)` with the trapezoid weight of
    /// `y_j` folded in, so `K f` approximates `int Gamma f dy`.
    pub fn kernel_matrix(&self, d: f64, t: f64) -> Result<KernelMatrix> {
        if !(d > 0.0) {
            return Err(ModelError::InvalidParameter {
                key: "d".into(),
                reason: format!("diffusivity must be > 0, got {d}"),
            });
        }
        let s = d * t;
        let floor = self.domain.kernel_floor();
        if !(s >= floor) {
            return Err(ModelError::KernelTimeBelowFloor { dt_eff: s, floor });
        }
        let n = self.domain.n;
        let modes = self.domain.modes;
        let decay: Vec<f64> = self
            .eigenvalues
            .iter()
            .zip(&self.norms)
            .map(|(&lambda, &nk)| (-s * lambda).exp() / nk)
            .collect();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            let ci = &self.cos[i * modes..(i + 1) * modes];
            let scaled: Vec<f64> = ci.iter().zip(&decay).map(|(a, b)| a * b).collect();
            for j in 0..n {
                let cj = &self.cos[j * modes..(j + 1) * modes];
                let g: f64 = scaled.iter().zip(cj).map(|(a, b)| a * b).sum();
                data[i * n + j] = g * self.weights[j];
            }
        }
        Ok(KernelMatrix { n, data })
    }

    /// `int |f'|^2 / f^2 dx` with `f'` from the differentiated cosine series.
    pub fn gradient_energy(&self, f: &Field) -> Result<f64> {
        self.domain.check_len(f.len())?;
        if let Some((index, &value)) = f.values().iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(ModelError::NonPositive { index, value });
        }
        if f.is_constant() {
            return Ok(0.0);
        }
        let grad = self.derivative(f)?;
        let integrand: Vec<f64> = grad
            .iter()
            .zip(f.values())
            .map(|(g, v)| (g / v).powi(2))
            .collect();
        Ok(self.domain.integrate(&integrand))
    }

    /// Spatial derivative of the cosine interpolant on the grid.
    pub fn derivative(&self, f: &Field) -> Result<Vec<f64>> {
        self.domain.check_len(f.len())?;
        let coeffs = self.analyse(f.values());
        let modes = self.domain.modes;
        let wave = PI / self.domain.length;
        Ok((0..self.domain.n)
            .map(|j| {
                -self.sin[j * modes..(j + 1) * modes]
                    .iter()
                    .zip(&coeffs)
                    .enumerate()
                    .map(|(k, (s, c))| k as f64 * wave * s * c)
                    .sum::<f64>()
            })
            .collect())
    }
}

/// Row-major `n x n` kernel with quadrature weights included.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    n: usize,
    data: Vec<f64>,
}

impl KernelMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn apply(&self, f: &Field) -> Field {
        Field::new(
            (0..self.n)
                .map(|i| self.row(i).iter().zip(f.values()).map(|(k, v)| k * v).sum())
                .collect(),
        )
    }

    pub fn compose(&self, other: &KernelMatrix) -> KernelMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                for j in 0..n {
                    data[i * n + j] += a * other.get(l, j);
                }
            }
        }
        KernelMatrix { n, data }
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// One-shot convenience wrappers that build the basis tables per call.
pub fn to_modal(f: &Field, domain: &Domain) -> Result<ModalField> {
    Spectral::new(domain).to_modal(f)
}

pub fn to_grid(m: &ModalField, domain: &Domain) -> Result<Field> {
    Spectral::new(domain).to_grid(m)
}

pub fn heat_apply(f: &Field, d: f64, t: f64, domain: &Domain) -> Result<Field> {
    Spectral::new(domain).heat_apply(f, d, t)
}

pub fn kernel_matrix(d: f64, t: f64, domain: &Domain) -> Result<KernelMatrix> {
    Spectral::new(domain).kernel_matrix(d, t)
}

pub fn gradient_energy(f: &Field, domain: &Domain) -> Result<f64> {
    Spectral::new(domain).gradient_energy(f)
}
