//! JSON configuration and initial-history construction.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equilibria::endemic_equilibrium;
use crate::error::{ModelError, Result};
use crate::integrator::SimConfig;
use crate::model::{bound_vector, Domain, Field, History, ModelParams, StateTriple};

/// On-disk layout: the model parameters and grid keys at top level, plus
/// optional run controls. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
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
    #[serde(rename = "L")]
    pub length: f64,
    pub n: usize,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    pub dt: f64,

    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub certify: bool,
    #[serde(default)]
    pub strict_box: bool,
    #[serde(default = "default_true")]
    pub two_path: bool,
    /// Relative amplitude of the random initial perturbation.
    #[serde(default = "default_perturbation")]
    pub perturbation: f64,
    #[serde(default)]
    pub seed: u64,
    /// CSV with columns `s,x,u1,u2,u3` giving a time-varying history.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history_file: Option<PathBuf>,
}

fn default_t_end() -> f64 {
    40.0
}

fn default_true() -> bool {
    true
}

fn default_perturbation() -> f64 {
    0.2
}

/// Validated configuration together with the initial-history recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub perturbation: f64,
    pub seed: u64,
    pub history_file: Option<PathBuf>,
}

impl ConfigFile {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            d_m: self.d_m,
            d_h: self.d_h,
            a: self.a,
            h: self.h,
            b: self.b,
            p: self.p,
            q: self.q,
            mu_m: self.mu_m,
            mu_h: self.mu_h,
            gamma_h: self.gamma_h,
            tau_a: self.tau_a,
            tau_b: self.tau_b,
        }
    }

    pub fn into_run_config(self, base_dir: Option<&Path>) -> Result<RunConfig> {
        let params = self.params();
        params.validate()?;
        let domain = Domain::new(self.length, self.n, self.modes.unwrap_or(self.n))?;
        if !(self.perturbation.is_finite() && (0.0..1.0).contains(&self.perturbation)) {
            return Err(ModelError::InvalidParameter {
                key: "perturbation".into(),
                reason: format!("must lie in [0, 1), got {}", self.perturbation),
            });
        }
        let sim = SimConfig {
            params,
            domain,
            dt: self.dt,
            t_end: self.t_end,
            snapshot_every: self.snapshot_every,
            certify: self.certify,
            strict_box: self.strict_box,
            two_path: self.two_path,
        };
        sim.validate()?;
        let history_file = self.history_file.map(|p| match base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p,
        });
        Ok(RunConfig {
            sim,
            perturbation: self.perturbation,
            seed: self.seed,
            history_file,
        })
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let file: ConfigFile =
        serde_json::from_str(text).map_err(|e| ModelError::Config(e.to_string()))?;
    file.into_run_config(None)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ModelError::Config(format!("{}: {e}", path.display())))?;
    let file: ConfigFile = serde_json::from_str(&text)
        .map_err(|e| ModelError::Config(format!("{}: {e}", path.display())))?;
    file.into_run_config(path.parent())
}

/// Smooth random profile in `[-1, 1]`: a normalised combination of the
/// first five cosine modes.
pub fn smooth_random_profile(domain: &Domain, rng: &mut impl Rng) -> Field {
    let coeffs: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let norm: f64 = coeffs.iter().map(|c: &f64| c.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let l = domain.length;
    Field::from_fn(domain, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * (k as f64 * std::f64::consts::PI * x / l).cos())
            .sum::<f64>()
            / norm
    })
}

/// Centre of the default initial history: the endemic state when it exists,
/// otherwise the midpoint of the invariant box.
pub fn default_base_state(params: &ModelParams) -> [f64; 3] {
    endemic_equilibrium(params).unwrap_or_else(|| bound_vector(params).map(|m| 0.5 * m))
}

/// History constant in time, equal to `base * (1 + amplitude * xi_i(x))`
/// with seeded smooth random profiles `xi_i`.
pub fn perturbed_history(
    base: [f64; 3],
    amplitude: f64,
    seed: u64,
    domain: &Domain,
    dt: f64,
    max_lag: usize,
) -> History {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = |b: f64| {
        let xi = smooth_random_profile(domain, &mut rng);
        xi.map(|v| b * (1.0 + amplitude * v))
    };
    let state = StateTriple::new(field(base[0]), field(base[1]), field(base[2]));
    History::constant(state, dt, max_lag)
}

/// Reads a time-varying history: one row per `(s, x)` with
/// `s = 0, -dt, ..., -max_lag dt` and `x` on the grid.
pub fn read_history_csv(path: &Path, domain: &Domain, dt: f64, max_lag: usize) -> Result<History> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ModelError::Config(format!("{}: {e}", path.display())))?;
    parse_history_csv(&text, domain, dt, max_lag)
}

pub fn parse_history_csv(text: &str, domain: &Domain, dt: f64, max_lag: usize) -> Result<History> {
    let err = |msg: String| ModelError::Config(format!("history_file: {msg}"));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| err("empty file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["s", "x", "u1", "u2", "u3"] {
        return Err(err(format!("expected header s,x,u1,u2,u3, got {header}")));
    }
    let n = domain.n;
    let mut slots: Vec<Vec<Option<[f64; 3]>>> = vec![vec![None; n]; max_lag + 1];
    let h = domain.spacing();
    for (row, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| err(format!("row {}: {e}", row + 2)))?;
        if vals.len() != 5 {
            return Err(err(format!("row {}: expected 5 columns", row + 2)));
        }
        let lag = -vals[0] / dt;
        let k = lag.round();
        if (lag - k).abs() > 1e-9 || k < 0.0 || k as usize > max_lag {
            return Err(err(format!("row {}: s = {} is not a history node", row + 2, vals[0])));
        }
        let j = (vals[1] / h).round();
        if (vals[1] / h - j).abs() > 1e-9 || j < 0.0 || j as usize >= n {
            return Err(err(format!("row {}: x = {} is not a grid point", row + 2, vals[1])));
        }
        slots[k as usize][j as usize] = Some([vals[2], vals[3], vals[4]]);
    }
    let mut states = Vec::with_capacity(max_lag + 1);
    for (k, slot) in slots.into_iter().enumerate() {
        let mut comps = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for (j, v) in slot.into_iter().enumerate() {
            let v = v.ok_or_else(|| err(format!("missing value at lag {k}, grid index {j}")))?;
            for c in 0..3 {
                comps[c][j] = v[c];
            }
        }
        let [a, b, c] = comps;
        states.push(StateTriple::new(Field::new(a), Field::new(b), Field::new(c)));
    }
    Ok(History::from_lags(dt, max_lag, |k| states[k].clone()))
}

/// Builds the initial history a run configuration describes.
pub fn initial_history(cfg: &RunConfig) -> Result<History> {
    let max_lag = cfg.sim.max_lag()?;
    match &cfg.history_file {
        Some(path) => read_history_csv(path, &cfg.sim.domain, cfg.sim.dt, max_lag),
        None => Ok(perturbed_history(
            default_base_state(&cfg.sim.params),
            cfg.perturbation,
            cfg.seed,
            &cfg.sim.domain,
            cfg.sim.dt,
            max_lag,
        )),
    }
}
