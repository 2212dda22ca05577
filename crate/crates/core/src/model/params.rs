use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Biological and physical constants of the dengue model.
///
/// Field names (and their JSON keys) follow the usual notation: `A` and `H`
/// are the mosquito and human recruitment levels, `b` the bite rate and
/// `p`, `q` the per-bite infection probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub d_m: f64,
    pub d_h: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub b: f64,
    pub p: f64,
    pub q: f64,
    pub mu_m: f64,
    pub mu_h: f64,
    pub gamma_h: f64,
    pub tau_a: f64,
    pub tau_b: f64,
}

/// Names accepted by [`ModelParams::get`] / [`ModelParams::with`].
pub const PARAM_NAMES: [&str; 12] = [
    "d_m", "d_h", "A", "H", "b", "p", "q", "mu_m", "mu_h", "gamma_h", "tau_a", "tau_b",
];

impl ModelParams {
    /// Mosquito infection rate `b p`.
    pub fn beta_m(&self) -> f64 {
        self.b * self.p
    }

    /// Human infection rate `b q`.
    pub fn beta_h(&self) -> f64 {
        self.b * self.q
    }

    /// Total removal rate of infectious humans.
    pub fn rho_h(&self) -> f64 {
        self.mu_h + self.gamma_h
    }

    /// Survival factor of humans through the incubation delay.
    pub fn survival_b(&self) -> f64 {
        (-self.mu_h * self.tau_b).exp()
    }

    pub fn max_delay(&self) -> f64 {
        self.tau_a.max(self.tau_b)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d_m", self.d_m),
            ("d_h", self.d_h),
            ("A", self.a),
            ("H", self.h),
            ("b", self.b),
            ("p", self.p),
            ("q", self.q),
            ("mu_m", self.mu_m),
            ("mu_h", self.mu_h),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(key, format!("must be finite and > 0, got {v}")));
            }
        }
        for (key, v) in [("p", self.p), ("q", self.q)] {
            if v > 1.0 {
                return Err(invalid(key, format!("probability must lie in (0, 1], got {v}")));
            }
        }
        // gamma_h = 0 is allowed: rho_h stays positive through mu_h.
        for (key, v) in [
            ("gamma_h", self.gamma_h),
            ("tau_a", self.tau_a),
            ("tau_b", self.tau_b),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(key, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "d_m" => self.d_m,
            "d_h" => self.d_h,
            "A" => self.a,
            "H" => self.h,
            "b" => self.b,
            "p" => self.p,
            "q" => self.q,
            "mu_m" => self.mu_m,
            "mu_h" => self.mu_h,
            "gamma_h" => self.gamma_h,
            "tau_a" => self.tau_a,
            "tau_b" => self.tau_b,
            "beta_m" => self.beta_m(),
            "beta_h" => self.beta_h(),
            _ => return None,
        })
    }

    /// Returns a copy with one parameter replaced.
    ///
    /// Besides the raw fields, the composites `beta_m` and `beta_h` are
    /// accepted. They are realised by rescaling `p` (resp. `q`) when the
    /// target does not exceed `b`, and otherwise by raising `b` and
    /// compensating the other probability so the other composite is kept.
    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        let mut out = *self;
        match name {
            "d_m" => out.d_m = value,
            "d_h" => out.d_h = value,
            "A" => out.a = value,
            "H" => out.h = value,
            "b" => out.b = value,
            "p" => out.p = value,
            "q" => out.q = value,
            "mu_m" => out.mu_m = value,
            "mu_h" => out.mu_h = value,
            "gamma_h" => out.gamma_h = value,
            "tau_a" => out.tau_a = value,
            "tau_b" => out.tau_b = value,
            "beta_m" => {
                if value <= self.b {
                    out.p = value / self.b;
                } else {
                    out.b = value / self.p;
                    out.q = self.beta_h() / out.b;
                }
            }
            "beta_h" => {
                if value <= self.b {
                    out.q = value / self.b;
                } else {
                    out.b = value / self.q;
                    out.p = self.beta_m() / out.b;
                }
            }
            other => return Err(invalid(other, "unknown parameter name".into())),
        }
        out.validate()?;
        Ok(out)
    }
}

fn invalid(key: &str, reason: String) -> ModelError {
    ModelError::InvalidParameter {
        key: key.to_string(),
        reason,
    }
}

/// Componentwise upper bounds `M` of the invariant box.
pub fn bound_vector(params: &ModelParams) -> [f64; 3] {
    let m3 = params.a * params.h * params.beta_h() * params.survival_b()
        / (params.mu_h * params.rho_h());
    [params.a, params.h / params.mu_h, m3]
}
