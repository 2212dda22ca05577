//! Lyapunov functional around the endemic state, its exact time derivative
//! along solutions, and the monotonicity certificate.
//!
//! With `c = bh u1* u2*` the functional is
//!
//! ```text
//! V = int [ (c/mu_m) g(u1/u1*) + u2* g(u2/u2*) + e^{mu_h tau_b} u3* g(u3/u3*) ] dx
//!   + c int_{-tau_a}^0 int g(u3(t+s)/u3*) dy ds
//!   + c int_{-tau_b}^0 int g((u1 u2)(t+s)/(u1* u2*)) dy ds
//! ```
//!
//! and its derivative splits into eight nonpositive terms: three gradient
//! energies, the susceptible term `-c int g(u2*/u2)`, two kernel-averaged
//! delay terms, and two quadratic reaction remainders
//! `-(bm bh u2*/mu_m) int (u1-u1*)^2/u1 Gamma*u3(t-tau_a)` and
//! `-mu_h int (u2-u2*)^2/u2`.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::model::{lag_steps, Domain, Field, History, ModelParams, StateTriple};
use crate::spectral::{KernelMatrix, Spectral};

/// `w - 1 - ln w`, nonnegative with its only zero at `w = 1`.
pub fn g(w: f64) -> Result<f64> {
    if w > 0.0 {
        Ok(g_positive(w))
    } else {
        Err(ModelError::GDomain(w))
    }
}

/// [`g`] without the domain check; the series branch avoids cancellation
/// near `w = 1`.
#[inline]
pub(crate) fn g_positive(w: f64) -> f64 {
    let d = w - 1.0;
    if d.abs() < 1e-2 {
        // d^2/2 - d^3/3 + d^4/4 - ...
        let mut term = d * d;
        let mut sum = 0.0;
        for k in 2..12 {
            sum += term / k as f64 * if k % 2 == 0 { 1.0 } else { -1.0 };
            term *= d;
        }
        sum
    } else {
        d - w.ln()
    }
}

/// Value of `V` and its components, together with the derivative terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovBreakdown {
    pub t: f64,
    pub v: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    /// Delay integrals in collapsed form (mass conservation of the kernel).
    pub w1: f64,
    pub w2: f64,
    /// The same integrals through explicit kernel matrices, when requested.
    pub w1_kernel: Option<f64>,
    pub w2_kernel: Option<f64>,
    /// Exact `dV/dt`: sum of every entry below.
    pub dissipation: f64,
    /// Gradient energies of `u1`, `u2`, `u3`.
    pub grad_terms: [f64; 3],
    /// `-c g(u2*/u2)`, then the human-delay and mosquito-delay kernel terms.
    pub g_terms: [f64; 3],
    /// Quadratic remainders from the `u1` and `u2` reactions.
    pub quadratic_terms: [f64; 2],
}

impl LyapunovBreakdown {
    /// All eight derivative terms in a fixed order.
    pub fn terms(&self) -> [f64; 8] {
        [
            self.grad_terms[0],
            self.grad_terms[1],
            self.grad_terms[2],
            self.g_terms[0],
            self.g_terms[1],
            self.g_terms[2],
            self.quadratic_terms[0],
            self.quadratic_terms[1],
        ]
    }

    /// Relative disagreement of the two delay-integral evaluations.
    pub fn two_path_rel_error(&self) -> Option<f64> {
        let rel = |a: f64, b: f64| {
            let s = a.abs().max(b.abs());
            if s == 0.0 {
                0.0
            } else {
                (a - b).abs() / s
            }
        };
        match (self.w1_kernel, self.w2_kernel) {
            (Some(a), Some(b)) => Some(rel(a, self.w1).max(rel(b, self.w2))),
            _ => None,
        }
    }
}

pub const TERM_NAMES: [&str; 8] = [
    "grad_u1",
    "grad_u2",
    "grad_u3",
    "g_susceptible",
    "g_human_delay",
    "g_mosquito_delay",
    "quad_u1",
    "quad_u2",
];

/// Evaluates `V` and `dV/dt` from a history buffer.
#[derive(Debug, Clone)]
pub struct LyapunovEvaluator {
    params: ModelParams,
    domain: Domain,
    spectral: Spectral,
    dt: f64,
    ustar: [f64; 3],
    lag_a: usize,
    lag_b: usize,
    kernel_a: KernelMatrix,
    kernel_b: KernelMatrix,
    /// Kernel matrices at `s = -k dt`, `k = 1..=lag`, for the explicit path.
    theta_kernels: Option<(Vec<KernelMatrix>, Vec<KernelMatrix>)>,
}

impl LyapunovEvaluator {
    pub fn new(params: &ModelParams, domain: &Domain, dt: f64, ustar: [f64; 3], two_path: bool) -> Result<Self> {
        if let Some((i, &v)) = ustar.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(ModelError::NonPositive { index: i, value: v });
        }
        let spectral = Spectral::new(domain);
        let lag_a = lag_steps("tau_a", params.tau_a, dt, &[params.tau_b])?;
        let lag_b = lag_steps("tau_b", params.tau_b, dt, &[params.tau_a])?;
        let kernel = |d: f64, tau: f64| {
            if tau == 0.0 {
                Ok(KernelMatrix::identity(domain.n))
            } else {
                spectral.kernel_matrix(d, tau)
            }
        };
        let kernel_a = kernel(params.d_m, params.tau_a)?;
        let kernel_b = kernel(params.d_h, params.tau_b)?;
        let theta_kernels = if two_path {
            let build = |d: f64, lag: usize| -> Result<Vec<KernelMatrix>> {
                (1..=lag)
                    .map(|k| spectral.kernel_matrix(d, k as f64 * dt))
                    .collect()
            };
            Some((build(params.d_m, lag_a)?, build(params.d_h, lag_b)?))
        } else {
            None
        };
        Ok(Self {
            params: *params,
            domain: *domain,
            spectral,
            dt,
            ustar,
            lag_a,
            lag_b,
            kernel_a,
            kernel_b,
            theta_kernels,
        })
    }

    fn c(&self) -> f64 {
        self.params.beta_h() * self.ustar[0] * self.ustar[1]
    }

    fn check_positive(state: &StateTriple) -> Result<()> {
        for f in state.components() {
            if let Some((index, &value)) = f.values().iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
                return Err(ModelError::NonPositive { index, value });
            }
        }
        Ok(())
    }

    fn integral_g(&self, f: &Field, scale: f64) -> f64 {
        let vals: Vec<f64> = f.values().iter().map(|&v| g_positive(v / scale)).collect();
        self.domain.integrate(&vals)
    }

    fn g_field(f: &Field, scale: f64) -> Field {
        f.map(|v| g_positive(v / scale))
    }

    /// Trapezoid in `s` over `0..=lag` of `term(k)`.
    fn theta_trapezoid(&self, lag: usize, mut term: impl FnMut(usize) -> Result<f64>) -> Result<f64> {
        if lag == 0 {
            return Ok(0.0);
        }
        let mut sum = 0.5 * (term(0)? + term(lag)?);
        for k in 1..lag {
            sum += term(k)?;
        }
        Ok(self.dt * sum)
    }

    /// Functional value only.
    pub fn eval_v(&self, history: &History) -> Result<LyapunovBreakdown> {
        let mut b = self.empty(history.t_now());
        self.fill_v(history, &mut b)?;
        Ok(b)
    }

    fn empty(&self, t: f64) -> LyapunovBreakdown {
        LyapunovBreakdown {
            t,
            v: 0.0,
            l1: 0.0,
            l2: 0.0,
            l3: 0.0,
            w1: 0.0,
            w2: 0.0,
            w1_kernel: None,
            w2_kernel: None,
            dissipation: 0.0,
            grad_terms: [0.0; 3],
            g_terms: [0.0; 3],
            quadratic_terms: [0.0; 2],
        }
    }

    fn fill_v(&self, history: &History, b: &mut LyapunovBreakdown) -> Result<()> {
        let p = &self.params;
        let [s1, s2, s3] = self.ustar;
        let c = self.c();
        let max_lag = self.lag_a.max(self.lag_b);
        for k in 0..=max_lag {
            Self::check_positive(history.lag(k)?)?;
        }
        let now = history.current();
        b.l1 = c / p.mu_m * self.integral_g(&now.u1, s1);
        b.l2 = s2 * self.integral_g(&now.u2, s2);
        b.l3 = (p.mu_h * p.tau_b).exp() * s3 * self.integral_g(&now.u3, s3);

        let g3 = |k: usize| -> Result<Field> { Ok(Self::g_field(&history.lag(k)?.u3, s3)) };
        let g12 = |k: usize| -> Result<Field> {
            let e = history.lag(k)?;
            Ok(Self::g_field(&e.u1.mul(&e.u2), s1 * s2))
        };

        b.w1 = c * self.theta_trapezoid(self.lag_a, |k| Ok(self.domain.integrate(g3(k)?.values())))?;
        b.w2 = c * self.theta_trapezoid(self.lag_b, |k| Ok(self.domain.integrate(g12(k)?.values())))?;

        if let Some((ka, kb)) = &self.theta_kernels {
            // s = 0 uses the identity operator exactly
            let explicit = |mats: &Vec<KernelMatrix>, k: usize, f: Field| -> f64 {
                let smoothed = if k == 0 { f } else { mats[k - 1].apply(&f) };
                self.domain.integrate(smoothed.values())
            };
            b.w1_kernel = Some(c * self.theta_trapezoid(self.lag_a, |k| Ok(explicit(ka, k, g3(k)?)))?);
            b.w2_kernel = Some(c * self.theta_trapezoid(self.lag_b, |k| Ok(explicit(kb, k, g12(k)?)))?);
        }

        b.v = b.l1 + b.l2 + b.l3 + b.w1 + b.w2;
        Ok(())
    }

    /// Fills the derivative terms; returns their sum.
    fn fill_dissipation(&self, history: &History, b: &mut LyapunovBreakdown) -> Result<f64> {
        let p = &self.params;
        let [s1, s2, s3] = self.ustar;
        let c = self.c();
        let now = history.current();
        Self::check_positive(now)?;
        let lagged_a = history.lag(self.lag_a)?;
        let lagged_b = history.lag(self.lag_b)?;
        Self::check_positive(lagged_a)?;
        Self::check_positive(lagged_b)?;

        let sp = &self.spectral;
        b.grad_terms = [
            -p.d_m * c / p.mu_m * sp.gradient_energy(&now.u1)?,
            -p.d_h * s2 * sp.gradient_energy(&now.u2)?,
            -(p.mu_h * p.tau_b).exp() * p.d_h * s3 * sp.gradient_energy(&now.u3)?,
        ];

        let susceptible: Vec<f64> = now.u2.values().iter().map(|&v| g_positive(s2 / v)).collect();
        let g_susceptible = -c * self.domain.integrate(&susceptible);

        // int_x int_y Gamma(x, y) g(a(y) / b(x))
        let double = |k: &KernelMatrix, num: &[f64], den: &[f64]| -> f64 {
            let inner: Vec<f64> = den
                .iter()
                .enumerate()
                .map(|(i, &bx)| {
                    k.row(i)
                        .iter()
                        .zip(num)
                        .map(|(kij, &ay)| kij * g_positive(ay / bx))
                        .sum()
                })
                .collect();
            self.domain.integrate(&inner)
        };
        let delayed_product: Vec<f64> = lagged_b
            .u1
            .values()
            .iter()
            .zip(lagged_b.u2.values())
            .map(|(a, b)| a * b * s3)
            .collect();
        let human_den: Vec<f64> = now.u3.values().iter().map(|v| s1 * s2 * v).collect();
        let g_human = -c * double(&self.kernel_b, &delayed_product, &human_den);

        let mosquito_num: Vec<f64> = lagged_a.u3.values().iter().map(|v| s1 * v).collect();
        let mosquito_den: Vec<f64> = now.u1.values().iter().map(|v| v * s3).collect();
        let g_mosquito = -c * double(&self.kernel_a, &mosquito_num, &mosquito_den);
        b.g_terms = [g_susceptible, g_human, g_mosquito];

        let smoothed_u3 = self.kernel_a.apply(&lagged_a.u3);
        let quad1: Vec<f64> = now
            .u1
            .values()
            .iter()
            .zip(smoothed_u3.values())
            .map(|(u, k)| (u - s1).powi(2) / u * k)
            .collect();
        let quad2: Vec<f64> = now.u2.values().iter().map(|u| (u - s2).powi(2) / u).collect();
        b.quadratic_terms = [
            -p.beta_m() * p.beta_h() * s2 / p.mu_m * self.domain.integrate(&quad1),
            -p.mu_h * self.domain.integrate(&quad2),
        ];

        b.dissipation = b.terms().iter().sum();
        Ok(b.dissipation)
    }

    /// Exact `dV/dt` at the current time of `history`.
    pub fn eval_dissipation(&self, history: &History) -> Result<f64> {
        let mut b = self.empty(history.t_now());
        self.fill_dissipation(history, &mut b)
    }

    /// Functional and derivative together.
    pub fn evaluate(&self, history: &History) -> Result<LyapunovBreakdown> {
        let mut b = self.empty(history.t_now());
        self.fill_v(history, &mut b)?;
        self.fill_dissipation(history, &mut b)?;
        Ok(b)
    }
}

/// Free-function form of [`LyapunovEvaluator::eval_v`], collapsed path only.
pub fn eval_v(history: &History, params: &ModelParams, ustar: [f64; 3], domain: &Domain) -> Result<LyapunovBreakdown> {
    LyapunovEvaluator::new(params, domain, history.dt(), ustar, false)?.eval_v(history)
}

pub fn eval_dissipation(history: &History, params: &ModelParams, ustar: [f64; 3], domain: &Domain) -> Result<f64> {
    LyapunovEvaluator::new(params, domain, history.dt(), ustar, false)?.eval_dissipation(history)
}

/// Slack used by [`certify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertTolerance {
    /// Allowed per-step increase of `V`, relative to `V(0)`.
    pub v_rel: f64,
    /// Largest admissible value of any derivative term (absolute).
    pub d_abs: f64,
    /// Allowed relative gap between the two delay-integral evaluations.
    pub two_path_rel: f64,
}

impl Default for CertTolerance {
    fn default() -> Self {
        Self {
            v_rel: 1e-8,
            d_abs: 1e-12,
            two_path_rel: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertViolationKind {
    /// `V(t_{k+1}) > V(t_k) + v_rel V(0)`.
    Increase,
    /// A derivative term (or their sum) is positive beyond `d_abs`.
    PositiveDissipation,
    /// `V(t_end) >= V(0)` for a start off equilibrium.
    NoDecrease,
    TwoPathMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertViolation {
    pub kind: CertViolationKind,
    pub index: usize,
    pub t: f64,
    pub magnitude: f64,
    /// Term name for dissipation violations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub passed: bool,
    pub tolerance: CertTolerance,
    pub steps: usize,
    pub v0: f64,
    pub v_end: f64,
    pub max_step_increase: f64,
    pub max_two_path_rel_error: Option<f64>,
    pub dissipation_ranges: Vec<TermRange>,
    pub violations: Vec<CertViolation>,
}

/// Checks monotone decrease of `V`, the sign of every derivative term and
/// agreement of the two delay-integral evaluations.
pub fn certify(breakdowns: &[LyapunovBreakdown], tol: CertTolerance) -> Certificate {
    let mut violations = Vec::new();
    let v0 = breakdowns.first().map_or(0.0, |b| b.v);
    let v_end = breakdowns.last().map_or(0.0, |b| b.v);
    let mut max_step_increase = f64::NEG_INFINITY;
    for (k, w) in breakdowns.windows(2).enumerate() {
        let inc = w[1].v - w[0].v;
        max_step_increase = max_step_increase.max(inc);
        if inc > tol.v_rel * v0 {
            violations.push(CertViolation {
                kind: CertViolationKind::Increase,
                index: k + 1,
                t: w[1].t,
                magnitude: inc,
                term: None,
            });
        }
    }
    let mut ranges: Vec<TermRange> = TERM_NAMES
        .iter()
        .chain(std::iter::once(&"total"))
        .map(|n| TermRange {
            name: n.to_string(),
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        })
        .collect();
    let mut max_two_path: Option<f64> = None;
    for (k, b) in breakdowns.iter().enumerate() {
        let terms = b.terms();
        let values = terms.iter().copied().chain(std::iter::once(b.dissipation));
        for (r, v) in ranges.iter_mut().zip(values) {
            r.min = r.min.min(v);
            r.max = r.max.max(v);
            if !(v <= tol.d_abs) {
                violations.push(CertViolation {
                    kind: CertViolationKind::PositiveDissipation,
                    index: k,
                    t: b.t,
                    magnitude: v,
                    term: Some(r.name.clone()),
                });
            }
        }
        if let Some(e) = b.two_path_rel_error() {
            max_two_path = Some(max_two_path.map_or(e, |m: f64| m.max(e)));
            if !(e <= tol.two_path_rel) {
                violations.push(CertViolation {
                    kind: CertViolationKind::TwoPathMismatch,
                    index: k,
                    t: b.t,
                    magnitude: e,
                    term: None,
                });
            }
        }
    }
    if v0 > 0.0 && breakdowns.len() > 1 && !(v_end < v0) {
        violations.push(CertViolation {
            kind: CertViolationKind::NoDecrease,
            index: breakdowns.len() - 1,
            t: breakdowns.last().map_or(0.0, |b| b.t),
            magnitude: v_end - v0,
            term: None,
        });
    }
    Certificate {
        passed: violations.is_empty(),
        tolerance: tol,
        steps: breakdowns.len(),
        v0,
        v_end,
        max_step_increase: if breakdowns.len() > 1 { max_step_increase } else { 0.0 },
        max_two_path_rel_error: max_two_path,
        dissipation_ranges: if breakdowns.is_empty() { Vec::new() } else { ranges },
        violations,
    }
}
