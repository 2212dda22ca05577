//! Single-scenario orchestration and one-parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{initial_history, RunConfig};
use crate::equilibria::{basic_reproduction_number, endemic_equilibrium, regime_classify, Regime};
use crate::error::{ModelError, Result};
use crate::integrator::{Integrator, Trajectory};
use crate::lyapunov::{certify, CertTolerance};
use crate::model::{validate_initial_history, PARAM_NAMES};
use crate::output::{fmt_f64, CertificateReport};

/// A validated run and, for certification runs, its certificate.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub trajectory: Trajectory,
    pub certificate: Option<CertificateReport>,
}

/// Builds the initial history, validates it and integrates.
pub fn run_scenario(cfg: &RunConfig, tol: CertTolerance) -> Result<ScenarioOutcome> {
    let integrator = Integrator::new(cfg.sim.clone())?;
    let history = initial_history(cfg)?;
    let report = validate_initial_history(&history, &cfg.sim.params, &cfg.sim.domain, cfg.sim.certify);
    if !report.is_ok() {
        return Err(ModelError::Config(format!("initial history rejected:\n{report}")));
    }
    let trajectory = integrator.run(history)?;
    let certificate = trajectory.lyapunov.as_ref().map(|b| {
        let certificate = certify(b, tol);
        CertificateReport {
            passed: certificate.passed && trajectory.bounds_ok,
            r0: basic_reproduction_number(&cfg.sim.params),
            regime: regime_classify(&cfg.sim.params),
            t_end: *trajectory.times.last().unwrap_or(&0.0),
            final_sup_distance_to_endemic: *trajectory.sup_distance_to_endemic.last().unwrap_or(&f64::NAN),
            bounds_ok: trajectory.bounds_ok,
            certificate,
        }
    });
    Ok(ScenarioOutcome {
        trajectory,
        certificate,
    })
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: RunConfig,
    pub parameter: String,
    pub values: Vec<f64>,
    pub scenario: String,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = PARAM_NAMES.contains(&self.parameter.as_str())
            || matches!(self.parameter.as_str(), "beta_m" | "beta_h");
        if !ok {
            return Err(ModelError::InvalidParameter {
                key: self.parameter.clone(),
                reason: "not a model parameter".into(),
            });
        }
        if let Some(v) = self.values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(ModelError::InvalidParameter {
                key: self.parameter.clone(),
                reason: format!("sweep values must be positive, got {v}"),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: String,
    pub parameter: String,
    pub value: f64,
    pub r0: Option<f64>,
    pub regime: Option<Regime>,
    /// `endemic` or `dfe`.
    pub attractor: Option<String>,
    pub final_distance: Option<f64>,
    pub certificate_passed: Option<bool>,
    pub error: Option<String>,
}

fn sweep_row(spec: &SweepSpec, value: f64, tol: CertTolerance) -> SweepRow {
    let mut row = SweepRow {
        scenario: spec.scenario.clone(),
        parameter: spec.parameter.clone(),
        value,
        r0: None,
        regime: None,
        attractor: None,
        final_distance: None,
        certificate_passed: None,
        error: None,
    };
    let params = match spec.base.sim.params.with(&spec.parameter, value) {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.r0 = Some(basic_reproduction_number(&params));
    row.regime = Some(regime_classify(&params));
    let endemic = endemic_equilibrium(&params).is_some();
    row.attractor = Some(if endemic { "endemic" } else { "dfe" }.into());

    let mut cfg = spec.base.clone();
    cfg.sim.params = params;
    cfg.sim.certify = endemic;
    cfg.sim.snapshot_every = 0;
    match run_scenario(&cfg, tol) {
        Ok(out) => {
            let d = if endemic {
                &out.trajectory.sup_distance_to_endemic
            } else {
                &out.trajectory.sup_distance_to_dfe
            };
            row.final_distance = d.last().copied();
            row.certificate_passed = out.certificate.map(|c| c.passed);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs every value independently (in parallel); rows keep input order and a
/// failing row does not stop the others.
pub fn run_sweep(spec: &SweepSpec, tol: CertTolerance) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec
        .values
        .par_iter()
        .map(|&v| sweep_row(spec, v, tol))
        .collect())
}

pub const SWEEP_HEADER: &str =
    "scenario,parameter,value,r0,regime,attractor,final_distance,certificate_passed,error";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [
            r.scenario.clone(),
            r.parameter.clone(),
            fmt_f64(r.value),
            r.r0.map(fmt_f64).unwrap_or_default(),
            r.regime.map(|g| g.to_string()).unwrap_or_default(),
            r.attractor.clone().unwrap_or_default(),
            r.final_distance.map(fmt_f64).unwrap_or_default(),
            r.certificate_passed.map(|b| b.to_string()).unwrap_or_default(),
            // keep the error message in one quoted CSV cell
            r.error
                .as_ref()
                .map(|e| format!("\"{}\"", e.replace('"', "'").replace('\n', " ")))
                .unwrap_or_default(),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
