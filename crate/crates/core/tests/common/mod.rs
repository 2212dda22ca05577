//! Independent oracles shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use dengue_nonlocal::config::RunConfig;
use dengue_nonlocal::integrator::SimConfig;
use dengue_nonlocal::model::{bound_vector, Domain, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn worked_params() -> ModelParams {
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
        tau_b: 0.0,
    }
}

pub fn run_config(params: ModelParams, n: usize, dt: f64, t_end: f64, seed: u64) -> RunConfig {
    RunConfig {
        sim: SimConfig::new(params, Domain::full(1.0, n).unwrap(), dt, t_end),
        perturbation: 0.2,
        seed,
        history_file: None,
    }
}

/// Residuals of the steady-state relations in log variables `v = ln u`, each
/// divided by the variable it would otherwise vanish with, so the
/// disease-free root is pushed to `-inf`.
fn deflated(p: &ModelParams, v: [f64; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let (bm, bh, e, rho) = (p.beta_m(), p.beta_h(), p.survival_b(), p.rho_h());
    let [u1, u2, u3] = v.map(f64::exp);
    let r31 = u3 / u1;
    let prod = bh * e * u1 * u2 / u3;
    let f = [
        bm * (p.a - u1) * r31 - p.mu_m,
        p.h / u2 - bh * u1 - p.mu_h,
        prod - rho,
    ];
    let jac = [
        [-bm * p.a * r31, 0.0, bm * (p.a - u1) * r31],
        [-bh * u1, -p.h / u2, 0.0],
        [prod, prod, -prod],
    ];
    (f, jac)
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if !d.is_finite() || d == 0.0 {
        return None;
    }
    let mut x = [0.0; 3];
    for (c, xc) in x.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][c] = b[r];
        }
        *xc = det(m) / d;
    }
    Some(x)
}

/// Damped Newton on the deflated relations from a positive starting point.
/// Returns the positive root when the iteration converges. Starts far from
/// the root can drift towards the disease-free limit, so callers use several.
pub fn newton_endemic(p: &ModelParams, start: [f64; 3]) -> Option<[f64; 3]> {
    let norm = |f: [f64; 3]| f.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v = start.map(f64::ln);
    let (mut f, mut jac) = deflated(p, v);
    for _ in 0..400 {
        let r = norm(f);
        if !r.is_finite() {
            return None;
        }
        let step = solve3(jac, f.map(|x| -x))?;
        if step.iter().map(|s| s.abs()).fold(0.0, f64::max) < 1e-15 && r < 1e-12 {
            break;
        }
        let mut lambda = 1.0;
        loop {
            let cand = [0, 1, 2].map(|i| v[i] + lambda * step[i]);
            let (fc, jc) = deflated(p, cand);
            if norm(fc) < (1.0 - 1e-4 * lambda) * r || lambda < 1e-10 {
                v = cand;
                f = fc;
                jac = jc;
                break;
            }
            lambda *= 0.5;
        }
    }
    let u = v.map(f64::exp);
    // residual relative to the size of the terms it balances
    let scale = [p.mu_m, p.h / u[1], p.rho_h()];
    let ok = u.iter().all(|x| x.is_finite() && *x > 0.0)
        && f.iter().zip(scale).all(|(r, s)| r.abs() <= 1e-12 * s);
    ok.then_some(u)
}

/// Spatially homogeneous reduction integrated with classical RK4; delayed
/// values between stored nodes come from cubic Hermite interpolation.
/// The history is the constant `phi` on `[-max_delay, 0]`; nonzero delays
/// must be multiples of the step and at least one step long.
pub struct DdeReference {
    pub h: f64,
    pub times: Vec<f64>,
    pub states: Vec<[f64; 3]>,
}

fn rhs(p: &ModelParams, u: [f64; 3], u3a: f64, u1b: f64, u2b: f64) -> [f64; 3] {
    [
        p.beta_m() * (p.a - u[0]) * u3a - p.mu_m * u[0],
        p.h - p.beta_h() * u[0] * u[1] - p.mu_h * u[1],
        p.beta_h() * p.survival_b() * u1b * u2b - p.rho_h() * u[2],
    ]
}

impl DdeReference {
    pub fn solve(p: &ModelParams, phi: [f64; 3], h: f64, t_end: f64) -> Self {
        let steps = (t_end / h).round() as usize;
        let mut times = vec![0.0];
        let mut states = vec![phi];
        let mut derivs: Vec<[f64; 3]> = Vec::new();
        let state_at = |s: f64, states: &[[f64; 3]], derivs: &[[f64; 3]]| -> [f64; 3] {
            if s <= 0.0 {
                return phi;
            }
            let pos = s / h;
            let k = (pos.floor() as usize).min(states.len().saturating_sub(2));
            let theta = pos - k as f64;
            let (y0, y1, d0, d1) = (states[k], states[k + 1], derivs[k], derivs[k + 1]);
            let h00 = 2.0 * theta.powi(3) - 3.0 * theta.powi(2) + 1.0;
            let h10 = theta.powi(3) - 2.0 * theta.powi(2) + theta;
            let h01 = -2.0 * theta.powi(3) + 3.0 * theta.powi(2);
            let h11 = theta.powi(3) - theta.powi(2);
            [0, 1, 2].map(|i| h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i])
        };
        for k in 0..steps {
            let t = k as f64 * h;
            let u = states[k];
            let f = |s: f64, u: [f64; 3], states: &[[f64; 3]], derivs: &[[f64; 3]]| {
                let a = if p.tau_a == 0.0 { u } else { state_at(s - p.tau_a, states, derivs) };
                let b = if p.tau_b == 0.0 { u } else { state_at(s - p.tau_b, states, derivs) };
                rhs(p, u, a[2], b[0], b[1])
            };
            let k1 = f(t, u, &states, &derivs);
            derivs.push(k1);
            let add = |a: [f64; 3], b: [f64; 3], c: f64| [0, 1, 2].map(|i| a[i] + c * b[i]);
            let k2 = f(t + 0.5 * h, add(u, k1, 0.5 * h), &states, &derivs);
            let k3 = f(t + 0.5 * h, add(u, k2, 0.5 * h), &states, &derivs);
            let k4 = f(t + h, add(u, k3, h), &states, &derivs);
            let next = [0, 1, 2].map(|i| u[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
            states.push(next);
            times.push(t + h);
        }
        Self { h, times, states }
    }

    /// State at a node time `t` (must be a multiple of `h`).
    pub fn at(&self, t: f64) -> [f64; 3] {
        self.states[(t / self.h).round() as usize]
    }
}

/// Runs the PDE from a spatially constant history and returns the largest
/// deviation from `reference` over the nodes `t = j * dt` up to `t_end`.
pub fn homogeneous_error(p: &ModelParams, phi: [f64; 3], dt: f64, t_end: f64, reference: &DdeReference) -> f64 {
    use dengue_nonlocal::integrator::Integrator;
    use dengue_nonlocal::model::StateTriple;
    let n = 16;
    let it = Integrator::new(SimConfig::new(*p, Domain::full(1.0, n).unwrap(), dt, t_end)).unwrap();
    let mut history = it.constant_history(StateTriple::constant(n, phi));
    let steps = (t_end / dt).round() as usize;
    let mut worst: f64 = 0.0;
    for k in 1..=steps {
        let s = it.step(&mut history).unwrap();
        let r = reference.at(k as f64 * dt);
        for (c, f) in s.components().iter().enumerate() {
            worst = worst.max(f.sup_distance_to(r[c]));
        }
    }
    worst
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Log-uniform draw over several decades for every rate.
pub fn random_params(rng: &mut impl Rng) -> ModelParams {
    ModelParams {
        d_m: log_uniform(rng, 0.01, 1.0),
        d_h: log_uniform(rng, 0.01, 1.0),
        a: log_uniform(rng, 0.1, 10.0),
        h: log_uniform(rng, 0.1, 10.0),
        b: log_uniform(rng, 0.1, 10.0),
        p: log_uniform(rng, 0.05, 1.0),
        q: log_uniform(rng, 0.05, 1.0),
        mu_m: log_uniform(rng, 0.1, 10.0),
        mu_h: log_uniform(rng, 0.1, 10.0),
        gamma_h: log_uniform(rng, 0.01, 10.0),
        tau_a: rng.random_range(0.0..2.0),
        tau_b: rng.random_range(0.0..2.0),
    }
}

/// Positive starting points spread over the invariant box.
pub fn starts(p: &ModelParams, count: usize, seed: u64) -> Vec<[f64; 3]> {
    let m = bound_vector(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| m.map(|mi| mi * log_uniform(&mut rng, 1e-2, 0.99)))
        .collect()
}
