//! CSV and JSON emission. Floats are printed with 17 significant digits so
//! identical runs produce identical files.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::equilibria::Regime;
use crate::integrator::Trajectory;
use crate::lyapunov::Certificate;

/// `{:.16e}`; non-finite values become an empty cell.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub const TIMESERIES_HEADER: &str =
    "t,dist_endemic,dist_dfe,V,dVdt_fd,dissipation,min_u1,max_u1,min_u2,max_u2,min_u3,max_u3";

pub fn timeseries_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(256 * traj.len());
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    let fd = traj.dvdt_forward();
    for k in 0..traj.len() {
        let lyap = traj.lyapunov.as_ref().map(|l| &l[k]);
        let cells = [
            fmt_f64(traj.times[k]),
            fmt_f64(traj.sup_distance_to_endemic[k]),
            fmt_f64(traj.sup_distance_to_dfe[k]),
            fmt_opt(lyap.map(|b| b.v)),
            fmt_opt(fd.as_ref().and_then(|f| f.get(k).copied())),
            fmt_opt(lyap.map(|b| b.dissipation)),
        ];
        out.push_str(&cells.join(","));
        for (lo, hi) in traj.ranges[k] {
            let _ = write!(out, ",{},{}", fmt_f64(lo), fmt_f64(hi));
        }
        out.push('\n');
    }
    out
}

pub fn snapshots_csv(traj: &Trajectory, grid: &[f64]) -> String {
    let mut out = String::from("t,x,u1,u2,u3\n");
    for (t, s) in &traj.snapshots {
        for (j, x) in grid.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(*t),
                fmt_f64(*x),
                fmt_f64(s.u1.values()[j]),
                fmt_f64(s.u2.values()[j]),
                fmt_f64(s.u3.values()[j])
            );
        }
    }
    out
}

/// Certificate plus run context, as written to `certificate.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub passed: bool,
    pub r0: f64,
    pub regime: Regime,
    pub t_end: f64,
    pub final_sup_distance_to_endemic: f64,
    pub bounds_ok: bool,
    pub certificate: Certificate,
}

impl CertificateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

pub fn write_file(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)
}
