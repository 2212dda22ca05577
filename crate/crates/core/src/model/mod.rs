//! Parameters, spatial grid, state containers and the invariant box.

mod field;
mod history;
mod params;

pub use field::{Domain, Field, StateTriple};
pub use history::{admissible_step, lag_steps, History};
pub use params::{bound_vector, ModelParams, PARAM_NAMES};

use serde::Serialize;

/// Relative slack applied to the box bounds `[0, M]`.
pub const BOX_SLACK: f64 = 1e-9;

/// Certification runs require history values of at least this fraction of `M_i`.
pub const POSITIVITY_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Negative,
    AboveBound,
    NotStrictlyPositive,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Steps into the past (0 is the initial instant).
    pub lag: usize,
    /// 1-based component index.
    pub component: usize,
    pub index: usize,
    pub value: f64,
    pub kind: ViolationKind,
}

/// Outcome of [`validate_initial_history`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct HistoryReport {
    pub violations: Vec<Violation>,
    /// `phi_1(0,.)` and `phi_3(0,.)` both vanish identically.
    pub degenerate: bool,
}

impl HistoryReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty() && !self.degenerate
    }
}

impl std::fmt::Display for HistoryReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.degenerate {
            writeln!(
                f,
                "degenerate: attractivity hypothesis unmet (phi_1(0,.) and phi_3(0,.) vanish identically)"
            )?;
        }
        for v in self.violations.iter().take(10) {
            writeln!(
                f,
                "u{}[{}] at lag {}: {} ({:?})",
                v.component, v.index, v.lag, v.value, v.kind
            )?;
        }
        if self.violations.len() > 10 {
            writeln!(f, "... {} more", self.violations.len() - 10)?;
        }
        Ok(())
    }
}

/// Checks that the initial history lies in the box `0 <= phi <= M` and, for
/// certification runs, that it is strictly positive. Nothing is clamped; all
/// offending entries are reported.
pub fn validate_initial_history(
    history: &History,
    params: &ModelParams,
    domain: &Domain,
    certify: bool,
) -> HistoryReport {
    let m = bound_vector(params);
    let mut report = HistoryReport::default();
    for (lag, state) in history.iter_lags().enumerate() {
        for (c, field) in state.components().iter().enumerate() {
            if field.len() != domain.n {
                report.violations.push(Violation {
                    lag,
                    component: c + 1,
                    index: field.len(),
                    value: f64::NAN,
                    kind: ViolationKind::NonFinite,
                });
                continue;
            }
            for (index, &value) in field.values().iter().enumerate() {
                let kind = if !value.is_finite() {
                    Some(ViolationKind::NonFinite)
                } else if value < 0.0 {
                    Some(ViolationKind::Negative)
                } else if value > m[c] {
                    Some(ViolationKind::AboveBound)
                } else if certify && value < POSITIVITY_FLOOR * m[c] {
                    Some(ViolationKind::NotStrictlyPositive)
                } else {
                    None
                };
                if let Some(kind) = kind {
                    report.violations.push(Violation {
                        lag,
                        component: c + 1,
                        index,
                        value,
                        kind,
                    });
                }
            }
        }
    }
    let initial = history.lag(0).expect("history has at least one entry");
    let vanishes = |f: &Field| f.values().iter().all(|&v| v == 0.0);
    report.degenerate = vanishes(&initial.u1) && vanishes(&initial.u3);
    report
}

/// Whether every component lies in `[-slack M_i, M_i (1 + slack)]`.
///
/// Returns the first offending `(component, index, value)`.
pub fn box_check(state: &StateTriple, bounds: [f64; 3]) -> Option<(usize, usize, f64)> {
    for (c, field) in state.components().iter().enumerate() {
        let lo = -BOX_SLACK * bounds[c];
        let hi = bounds[c] * (1.0 + BOX_SLACK);
        if let Some((i, &v)) = field
            .values()
            .iter()
            .enumerate()
            .find(|(_, &v)| !(lo..=hi).contains(&v))
        {
            return Some((c + 1, i, v));
        }
    }
    None
}
