//! Basic reproduction number, constant steady states and regime labels.

use serde::{Deserialize, Serialize};

use crate::model::{bound_vector, ModelParams};

/// Relative tolerance used when placing `R0` on the regime boundary.
const BOUNDARY_RTOL: f64 = 1e-12;

pub fn basic_reproduction_number(params: &ModelParams) -> f64 {
    let num = params.beta_h() * params.beta_m() * params.a * params.h * params.survival_b();
    let den = params.mu_h * params.mu_m * params.rho_h();
    (num / den).sqrt()
}

/// `(0, H/mu_h, 0)`.
pub fn disease_free(params: &ModelParams) -> [f64; 3] {
    [0.0, params.h / params.mu_h, 0.0]
}

/// Positive constant steady state, present only when `R0 > 1`.
///
/// Eliminating `u2` and `u3` from the three steady-state relations leaves a
/// linear equation for `u1`:
///
/// ```text
/// u1 = (bm bh A H e - mu_m rho_h mu_h) / (bm bh H e + mu_m rho_h bh),   e = exp(-mu_h tau_b)
/// ```
pub fn endemic_equilibrium(params: &ModelParams) -> Option<[f64; 3]> {
    if basic_reproduction_number(params) <= 1.0 {
        return None;
    }
    let bm = params.beta_m();
    let bh = params.beta_h();
    let e = params.survival_b();
    let rho = params.rho_h();
    let u1 = (bm * bh * params.a * params.h * e - params.mu_m * rho * params.mu_h)
        / (bm * bh * params.h * e + params.mu_m * rho * bh);
    let u2 = params.h / (bh * u1 + params.mu_h);
    let u3 = bh * e * u1 * u2 / rho;
    Some([u1, u2, u3])
}

/// Relative residuals of the three steady-state relations
/// `bm (A - u1) u3 = mu_m u1`, `H = bh u1 u2 + mu_h u2` and
/// `bh e u1 u2 = rho_h u3`.
pub fn relation_residuals(params: &ModelParams, u: [f64; 3]) -> [f64; 3] {
    let [u1, u2, u3] = u;
    let rel = |lhs: f64, rhs: f64| {
        let scale = lhs.abs().max(rhs.abs());
        if scale == 0.0 {
            0.0
        } else {
            (lhs - rhs).abs() / scale
        }
    };
    [
        rel(params.beta_m() * (params.a - u1) * u3, params.mu_m * u1),
        rel(params.h, params.beta_h() * u1 * u2 + params.mu_h * u2),
        rel(
            params.beta_h() * params.survival_b() * u1 * u2,
            params.rho_h() * u3,
        ),
    ]
}

/// Absolute values of the three right-hand sides for a spatially constant
/// state. Diffusion vanishes and the kernel integrals return the constant
/// itself, so the delayed terms reduce to their instantaneous values.
pub fn rhs_residual(state: [f64; 3], params: &ModelParams) -> [f64; 3] {
    let [u1, u2, u3] = state;
    let r1 = params.beta_m() * (params.a - u1) * u3 - params.mu_m * u1;
    let r2 = params.h - params.beta_h() * u1 * u2 - params.mu_h * u2;
    let r3 = params.beta_h() * params.survival_b() * u1 * u2 - params.rho_h() * u3;
    [r1.abs(), r2.abs(), r3.abs()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `R0 <= 1`: no endemic state.
    BelowThreshold,
    /// `1 < R0 <= sqrt(A bh / mu_h)`: endemic, outside the older sufficient condition.
    NewRegime,
    /// `R0 > max(1, sqrt(A bh / mu_h))`.
    OldRegime,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::BelowThreshold => "below_threshold",
            Regime::NewRegime => "new_regime",
            Regime::OldRegime => "old_regime",
        })
    }
}

/// `sqrt(A bh / mu_h)`, the second threshold of the older attractivity result.
pub fn old_condition_threshold(params: &ModelParams) -> f64 {
    (params.a * params.beta_h() / params.mu_h).sqrt()
}

/// The boundary `R0 = sqrt(A bh / mu_h)` is labelled [`Regime::NewRegime`].
pub fn regime_classify(params: &ModelParams) -> Regime {
    let r0 = basic_reproduction_number(params);
    if r0 <= 1.0 {
        return Regime::BelowThreshold;
    }
    let thr = old_condition_threshold(params);
    if r0 <= thr * (1.0 + BOUNDARY_RTOL) {
        Regime::NewRegime
    } else {
        Regime::OldRegime
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumSet {
    pub r0: f64,
    pub regime: Regime,
    pub old_condition_threshold: f64,
    pub bound_vector: [f64; 3],
    pub dfe: [f64; 3],
    pub endemic: Option<[f64; 3]>,
    pub dfe_residual: [f64; 3],
    pub endemic_residual: Option<[f64; 3]>,
}

impl EquilibriumSet {
    pub fn compute(params: &ModelParams) -> Self {
        let dfe = disease_free(params);
        let endemic = endemic_equilibrium(params);
        Self {
            r0: basic_reproduction_number(params),
            regime: regime_classify(params),
            old_condition_threshold: old_condition_threshold(params),
            bound_vector: bound_vector(params),
            dfe,
            endemic,
            dfe_residual: rhs_residual(dfe, params),
            endemic_residual: endemic.map(|u| rhs_residual(u, params)),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn unit() -> ModelParams {
        ModelParams {
            d_m: 1.0,
            d_h: 1.0,
            a: 1.0,
            h: 1.0,
            b: 1.0,
            p: 1.0,
            q: 1.0,
            mu_m: 1.0,
            mu_h: 1.0,
            gamma_h: 0.0,
            tau_a: 0.0,
            tau_b: 0.0,
        }
    }

    pub(crate) fn worked() -> ModelParams {
        ModelParams {
            a: 2.0,
            h: 2.0,
            gamma_h: 1.0,
            ..unit()
        }
    }

    #[test]
    fn r0_values() {
        assert_eq!(basic_reproduction_number(&unit()), 1.0);
        assert!((basic_reproduction_number(&worked()) - 2f64.sqrt()).abs() < 1e-15);
        let doubled = ModelParams { a: 4.0, ..worked() };
        let ratio = basic_reproduction_number(&doubled) / basic_reproduction_number(&worked());
        assert!((ratio - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn worked_endemic_triple() {
        let u = endemic_equilibrium(&worked()).unwrap();
        let expect = [0.5, 4.0 / 3.0, 1.0 / 3.0];
        for (a, b) in u.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(relation_residuals(&worked(), u).iter().all(|r| *r <= 1e-12));
        assert!(rhs_residual(u, &worked()).iter().all(|r| *r <= 1e-12));
    }

    #[test]
    fn threshold_has_no_endemic_state() {
        assert_eq!(endemic_equilibrium(&unit()), None);
        // numerator of u1 vanishes exactly at R0 = 1
        let p = unit();
        let num = p.beta_m() * p.beta_h() * p.a * p.h * p.survival_b() - p.mu_m * p.rho_h() * p.mu_h;
        assert_eq!(num, 0.0);
    }

    #[test]
    fn dfe_residual_is_zero() {
        let p = ModelParams { tau_b: 0.3, ..worked() };
        assert_eq!(rhs_residual(disease_free(&p), &p), [0.0; 3]);
        let off = rhs_residual([0.3, 1.0, 0.2], &p);
        assert!(off.iter().any(|r| *r > 0.0));
    }

    #[test]
    fn regimes() {
        assert_eq!(regime_classify(&unit()), Regime::BelowThreshold);
        assert_eq!(regime_classify(&worked()), Regime::NewRegime);
        let raised = worked().with("beta_m", 4.0).unwrap();
        assert!((basic_reproduction_number(&raised) - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(regime_classify(&raised), Regime::OldRegime);
    }

    #[test]
    fn endemic_increases_with_recruitment() {
        let mut last = 0.0;
        for i in 0..50 {
            let p = ModelParams {
                a: 1.5 + 0.1 * i as f64,
                ..worked()
            };
            let u1 = endemic_equilibrium(&p).unwrap()[0];
            assert!(u1 > last);
            last = u1;
        }
    }
}
