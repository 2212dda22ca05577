//! Method-of-lines stepping: explicit Euler reaction with the nonlocal
//! delayed terms, followed by exact spectral diffusion (Lie splitting).

use serde::{Deserialize, Serialize};

use crate::equilibria::{disease_free, endemic_equilibrium};
use crate::error::{ModelError, Result};
use crate::lyapunov::{LyapunovBreakdown, LyapunovEvaluator};
use crate::model::{bound_vector, box_check, lag_steps, Domain, Field, History, ModelParams, StateTriple};
use crate::spectral::Spectral;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub domain: Domain,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
    pub certify: bool,
    /// Abort on leaving the invariant box instead of recording it.
    pub strict_box: bool,
    /// Also evaluate the delay integrals of `V` through explicit kernel
    /// matrices (only used when `certify` is set).
    pub two_path: bool,
}

/// Explicit reaction stability bound
/// `0.2 / max(mu_m, mu_h + bh M1, rho_h, bm M3)`.
pub fn stability_bound(params: &ModelParams) -> f64 {
    let m = bound_vector(params);
    let rate = params
        .mu_m
        .max(params.mu_h + params.beta_h() * m[0])
        .max(params.rho_h())
        .max(params.beta_m() * m[2]);
    0.2 / rate
}

impl SimConfig {
    pub fn new(params: ModelParams, domain: Domain, dt: f64, t_end: f64) -> Self {
        Self {
            params,
            domain,
            dt,
            t_end,
            snapshot_every: 0,
            certify: false,
            strict_box: false,
            two_path: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        Domain::new(self.domain.length, self.domain.n, self.domain.modes)?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ModelError::InvalidParameter {
                key: "dt".into(),
                reason: format!("must be finite and > 0, got {}", self.dt),
            });
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(ModelError::InvalidParameter {
                key: "t_end".into(),
                reason: format!("must be finite and >= 0, got {}", self.t_end),
            });
        }
        self.lags()?;
        let bound = stability_bound(&self.params);
        if self.dt > bound {
            return Err(ModelError::UnstableStep { dt: self.dt, bound });
        }
        let floor = self.domain.kernel_floor();
        for (key, d, tau) in [
            ("tau_a", self.params.d_m, self.params.tau_a),
            ("tau_b", self.params.d_h, self.params.tau_b),
        ] {
            if tau > 0.0 && d * tau < floor {
                return Err(ModelError::InvalidParameter {
                    key: key.into(),
                    reason: format!(
                        "kernel time d*tau = {} is below the resolvable floor {floor}",
                        d * tau
                    ),
                });
            }
            // explicit W path needs a kernel at every history node
            if self.certify && self.two_path && tau > 0.0 && d * self.dt < floor {
                return Err(ModelError::InvalidParameter {
                    key: "dt".into(),
                    reason: format!(
                        "two-path evaluation needs d*dt >= {floor} for the {key} kernel, got {}",
                        d * self.dt
                    ),
                });
            }
        }
        Ok(())
    }

    /// Delay lags in steps, `(tau_a / dt, tau_b / dt)`.
    pub fn lags(&self) -> Result<(usize, usize)> {
        let p = &self.params;
        let ka = lag_steps("tau_a", p.tau_a, self.dt, &[p.tau_b])?;
        let kb = lag_steps("tau_b", p.tau_b, self.dt, &[p.tau_a])?;
        Ok((ka, kb))
    }

    pub fn max_lag(&self) -> Result<usize> {
        let (ka, kb) = self.lags()?;
        Ok(ka.max(kb))
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Recorded output of [`Integrator::run`].
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Sup-norm distance to the endemic state; NaN when none exists.
    pub sup_distance_to_endemic: Vec<f64>,
    pub sup_distance_to_dfe: Vec<f64>,
    /// Per component `(min, max)` at each recorded time.
    pub ranges: Vec<[(f64, f64); 3]>,
    pub lyapunov: Option<Vec<LyapunovBreakdown>>,
    pub snapshots: Vec<(f64, StateTriple)>,
    pub bounds_ok: bool,
    pub final_state: StateTriple,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Forward differences `(V_{k+1} - V_k) / dt`; `None` without breakdowns.
    pub fn dvdt_forward(&self) -> Option<Vec<f64>> {
        let lyap = self.lyapunov.as_ref()?;
        Some(
            lyap.windows(2)
                .zip(self.times.windows(2))
                .map(|(v, t)| (v[1].v - v[0].v) / (t[1] - t[0]))
                .collect(),
        )
    }
}

/// Time stepper bound to one configuration.
#[derive(Debug, Clone)]
pub struct Integrator {
    config: SimConfig,
    spectral: Spectral,
    lag_a: usize,
    lag_b: usize,
    bounds: [f64; 3],
}

impl Integrator {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let (lag_a, lag_b) = config.lags()?;
        Ok(Self {
            spectral: Spectral::new(&config.domain),
            bounds: bound_vector(&config.params),
            lag_a,
            lag_b,
            config,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn bounds(&self) -> [f64; 3] {
        self.bounds
    }

    pub fn max_lag(&self) -> usize {
        self.lag_a.max(self.lag_b)
    }

    /// Empty history (constant in time) sized for this configuration.
    pub fn constant_history(&self, state: StateTriple) -> History {
        History::constant(state, self.config.dt, self.max_lag())
    }

    /// `bm (A - u1(t)) * Gamma(d_m tau_a) u3(t - tau_a)`.
    pub fn infection_term_u1(&self, history: &History) -> Result<Field> {
        let p = &self.config.params;
        let now = history.current();
        let lagged = history.lag(self.lag_a)?;
        let smoothed = self.spectral.heat_apply(&lagged.u3, p.d_m, p.tau_a)?;
        let bm = p.beta_m();
        Ok(now.u1.zip_map(&smoothed, |u1, k| bm * (p.a - u1) * k))
    }

    /// `bh e^{-mu_h tau_b} Gamma(d_h tau_b) (u1 u2)(t - tau_b)`; the product
    /// is formed on the grid before smoothing.
    pub fn infection_term_u3(&self, history: &History) -> Result<Field> {
        let p = &self.config.params;
        let lagged = history.lag(self.lag_b)?;
        let product = lagged.u1.mul(&lagged.u2);
        let smoothed = self.spectral.heat_apply(&product, p.d_h, p.tau_b)?;
        let factor = p.beta_h() * p.survival_b();
        Ok(smoothed.map(|v| factor * v))
    }

    /// Advances one step, appends the new state to `history` and returns it.
    pub fn step(&self, history: &mut History) -> Result<StateTriple> {
        let p = &self.config.params;
        let dt = self.config.dt;
        let inf1 = self.infection_term_u1(history)?;
        let inf3 = self.infection_term_u3(history)?;
        let now = history.current();
        let (bh, mu_m, mu_h, rho) = (p.beta_h(), p.mu_m, p.mu_h, p.rho_h());

        let r1 = now.u1.zip_map(&inf1, |u1, f| u1 + dt * (f - mu_m * u1));
        let r2 = now
            .u1
            .zip_map(&now.u2, |u1, u2| u2 + dt * (p.h - bh * u1 * u2 - mu_h * u2));
        let r3 = now.u3.zip_map(&inf3, |u3, f| u3 + dt * (f - rho * u3));

        let next = StateTriple::new(
            self.spectral.heat_apply(&r1, p.d_m, dt)?,
            self.spectral.heat_apply(&r2, p.d_h, dt)?,
            self.spectral.heat_apply(&r3, p.d_h, dt)?,
        );
        let step = history.steps_taken() + 1;
        for (c, f) in next.components().iter().enumerate() {
            if !f.all_finite() {
                return Err(ModelError::NonFinite {
                    step,
                    component: c + 1,
                });
            }
        }
        history.push(next.clone());
        Ok(next)
    }

    /// Integrates from `initial` to `t_end`.
    pub fn run(&self, mut history: History) -> Result<Trajectory> {
        let p = &self.config.params;
        let endemic = endemic_equilibrium(p);
        let dfe = disease_free(p);
        let evaluator = if self.config.certify {
            let ustar = endemic.ok_or(ModelError::NoEndemicEquilibrium(
                crate::equilibria::basic_reproduction_number(p),
            ))?;
            Some(LyapunovEvaluator::new(
                p,
                &self.config.domain,
                self.config.dt,
                ustar,
                self.config.two_path,
            )?)
        } else {
            None
        };

        let n_steps = self.config.n_steps();
        let mut traj = Trajectory {
            times: Vec::with_capacity(n_steps + 1),
            sup_distance_to_endemic: Vec::with_capacity(n_steps + 1),
            sup_distance_to_dfe: Vec::with_capacity(n_steps + 1),
            ranges: Vec::with_capacity(n_steps + 1),
            lyapunov: evaluator.as_ref().map(|_| Vec::with_capacity(n_steps + 1)),
            snapshots: Vec::new(),
            bounds_ok: true,
            final_state: history.current().clone(),
        };

        for k in 0..=n_steps {
            if k > 0 {
                self.step(&mut history)?;
            }
            let state = history.current();
            let t = k as f64 * self.config.dt;
            if let Some((component, index, value)) = box_check(state, self.bounds) {
                if self.config.strict_box {
                    return Err(ModelError::BoxViolation {
                        step: k,
                        component,
                        index,
                        value,
                    });
                }
                traj.bounds_ok = false;
            }
            traj.times.push(t);
            traj.sup_distance_to_endemic
                .push(endemic.map_or(f64::NAN, |u| state.sup_distance_to(u)));
            traj.sup_distance_to_dfe.push(state.sup_distance_to(dfe));
            traj.ranges.push(state.min_max());
            if let (Some(ev), Some(out)) = (&evaluator, traj.lyapunov.as_mut()) {
                out.push(ev.evaluate(&history)?);
            }
            let every = self.config.snapshot_every;
            if every > 0 && (k % every == 0 || k == n_steps) {
                traj.snapshots.push((t, state.clone()));
            }
        }
        traj.final_state = history.current().clone();
        Ok(traj)
    }
}

/// One explicit Euler step of the spatially homogeneous reduction, where
/// every kernel integral returns the value it is applied to.
///
/// `lagged` holds `(u3(t - tau_a), u1(t - tau_b), u2(t - tau_b))`.
pub fn dde_oracle_step(state: [f64; 3], lagged: [f64; 3], params: &ModelParams, dt: f64) -> [f64; 3] {
    let [u1, u2, u3] = state;
    let [u3a, u1b, u2b] = lagged;
    let p = params;
    [
        u1 + dt * (p.beta_m() * (p.a - u1) * u3a - p.mu_m * u1),
        u2 + dt * (p.h - p.beta_h() * u1 * u2 - p.mu_h * u2),
        u3 + dt * (p.beta_h() * p.survival_b() * u1b * u2b - p.rho_h() * u3),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params() -> ModelParams {
        ModelParams {
            d_m: 0.1,
            d_h: 0.05,
            a: 2.0,
            h: 2.0,
            b: 1.0,
            p: 1.0,
            q: 1.0,
            mu_m: 1.0,
            mu_h: 1.0,
            gamma_h: 1.0,
            tau_a: 0.5,
            tau_b: 0.25,
        }
    }

    fn integrator(p: ModelParams) -> Integrator {
        let d = Domain::full(1.0, 32).unwrap();
        Integrator::new(SimConfig::new(p, d, 0.05, 1.0)).unwrap()
    }

    #[test]
    fn stability_bound_value() {
        let p = ModelParams { tau_b: 0.0, ..params() };
        // max(1, 1 + 2, 2, 1 * 2) = 3
        assert!((stability_bound(&p) - 0.2 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn config_rejections() {
        let d = Domain::full(1.0, 32).unwrap();
        let bad_dt = SimConfig::new(params(), d, 0.03, 1.0);
        assert!(matches!(
            bad_dt.validate(),
            Err(ModelError::IncommensurateStep { .. })
        ));
        let p = ModelParams { tau_a: 1.0, tau_b: 1.0, ..params() };
        let unstable = SimConfig::new(p, d, 0.1, 1.0);
        assert!(matches!(unstable.validate(), Err(ModelError::UnstableStep { .. })));
        let tiny = ModelParams { d_m: 1e-6, ..params() };
        assert!(SimConfig::new(tiny, d, 0.05, 1.0).validate().is_err());
        let slow = ModelParams { d_m: 1e-3, ..params() };
        let mut cfg = SimConfig::new(slow, d, 0.05, 1.0);
        assert!(cfg.validate().is_ok());
        cfg.certify = true;
        assert!(matches!(cfg.validate(), Err(ModelError::InvalidParameter { key, .. }) if key == "dt"));
        cfg.two_path = false;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn infection_terms_at_equilibrium() {
        let p = ModelParams { tau_b: 0.0, ..params() };
        let it = integrator(p);
        let u = endemic_equilibrium(&p).unwrap();
        let h = it.constant_history(StateTriple::constant(32, u));
        let f1 = it.infection_term_u1(&h).unwrap();
        assert!(f1.sup_distance_to(0.5) < 1e-15);
        let f3 = it.infection_term_u3(&h).unwrap();
        assert!(f3.sup_distance_to(2.0 / 3.0) < 1e-15);
    }

    #[test]
    fn infection_terms_vanish_without_infection() {
        let it = integrator(params());
        let h = it.constant_history(StateTriple::constant(32, [0.0, 1.0, 0.0]));
        assert_eq!(it.infection_term_u1(&h).unwrap().max(), 0.0);
        assert_eq!(it.infection_term_u3(&h).unwrap().max(), 0.0);
    }

    #[test]
    fn infection_term_u3_constants() {
        let it = integrator(params());
        let h = it.constant_history(StateTriple::constant(32, [0.3, 1.1, 0.2]));
        let p = params();
        let expect = p.beta_h() * p.survival_b() * 0.3 * 1.1;
        assert!(it.infection_term_u3(&h).unwrap().sup_distance_to(expect) < 1e-15);
    }

    #[test]
    fn no_delay_constant_state() {
        let p = ModelParams { tau_a: 0.0, tau_b: 0.0, ..params() };
        let it = integrator(p);
        let h = it.constant_history(StateTriple::constant(32, [0.3, 1.1, 0.2]));
        let expect = p.beta_m() * (p.a - 0.3) * 0.2;
        assert!(it.infection_term_u1(&h).unwrap().sup_distance_to(expect) < 1e-15);
    }

    #[test]
    fn equilibria_are_fixed_points() {
        let p = params();
        let it = integrator(p);
        for u in [endemic_equilibrium(&p).unwrap(), disease_free(&p)] {
            let mut h = it.constant_history(StateTriple::constant(32, u));
            for _ in 0..20 {
                let s = it.step(&mut h).unwrap();
                assert!(s.sup_distance_to(u) <= 1e-13);
            }
        }
    }

    #[test]
    fn homogeneous_step_matches_oracle() {
        let p = params();
        let it = integrator(p);
        let state = [0.7, 1.2, 0.4];
        let mut h = it.constant_history(StateTriple::constant(32, state));
        let s = it.step(&mut h).unwrap();
        let o = dde_oracle_step(state, [state[2], state[0], state[1]], &p, 0.05);
        for (f, v) in s.components().iter().zip(o) {
            assert!(f.sup_distance_to(v) < 1e-14);
        }
    }

    #[test]
    fn oracle_step_properties() {
        let p = params();
        let u = endemic_equilibrium(&p).unwrap();
        let next = dde_oracle_step(u, [u[2], u[0], u[1]], &p, 0.05);
        for (a, b) in next.iter().zip(u) {
            assert!((a - b).abs() < 1e-15);
        }
        // no infection: u2 relaxes geometrically toward H / mu_h
        let target = p.h / p.mu_h;
        let mut s = [0.0, 0.5, 0.0];
        for _ in 0..200 {
            let before = (s[1] - target).abs();
            s = dde_oracle_step(s, [0.0, 0.0, 0.0], &p, 0.05);
            assert!((s[1] - target).abs() < before);
        }
    }

    #[test]
    fn more_u3_history_means_more_infection() {
        let it = integrator(params());
        let d = it.config().domain;
        let base = StateTriple::new(
            Field::from_fn(&d, |x| 0.4 + 0.1 * (PI * x).cos()),
            Field::constant(32, 1.0),
            Field::from_fn(&d, |x| 0.2 + 0.05 * (2.0 * PI * x).cos()),
        );
        let mut raised = base.clone();
        raised.u3 = raised.u3.zip_map(&Field::from_fn(&d, |x| 0.1 * x * x), |a, b| a + b);
        let lo = it.infection_term_u1(&it.constant_history(base)).unwrap();
        let hi = it.infection_term_u1(&it.constant_history(raised)).unwrap();
        assert!(hi.values().iter().zip(lo.values()).all(|(h, l)| h >= l));
    }

    #[test]
    fn zero_horizon_run() {
        let p = params();
        let d = Domain::full(1.0, 16).unwrap();
        let it = Integrator::new(SimConfig::new(p, d, 0.05, 0.0)).unwrap();
        let h = it.constant_history(StateTriple::constant(16, [0.4, 1.0, 0.3]));
        let traj = it.run(h).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.final_state, StateTriple::constant(16, [0.4, 1.0, 0.3]));
    }
}
