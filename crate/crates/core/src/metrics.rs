//! RMS tracking and gap metrics, comparison tables, trace CSV and plotspec.
//!
//! CSV column contract: `time`, then for each robot `r = 1..n` the group
//! [`ROBOT_COLUMNS`] suffixed `_r`, then `gap_err_12`, `gap_err_23`, ...

use std::fmt::Write as _;
use std::fs::File;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::arena::quadrant;
use crate::controllers::{AdaptiveGains, ControllerKind, VelocityCommand};
use crate::error::{Error, Result};
use crate::trace::{RobotRecord, StepRecord, Trace};
use crate::vehicle::{ControlWrench, RobotState, WheelTorques};

pub const ROBOT_COLUMNS: [&str; 23] = [
    "x", "y", "theta", "v", "omega", "xr_ref", "yr_ref", "vc", "wc", "F", "tau", "tau_r", "tau_l", "s_v", "s_w",
    "K_v0", "K_v1", "K_w2", "K_w0", "K_w1", "K_v2", "e_x", "e_y",
];

pub fn rms(series: &[f64]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let sum: f64 = series.iter().map(|v| v * v).sum();
    Ok((sum / series.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotRms {
    pub robot: usize,
    pub rms_x: f64,
    pub rms_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRms {
    /// 1-based indices of the front and rear robot.
    pub front: usize,
    pub rear: usize,
    pub rms_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsReport {
    pub scenario: String,
    pub controller: String,
    /// Samples with `time < warmup` were excluded.
    pub warmup: f64,
    pub robots: Vec<RobotRms>,
    pub gaps: Vec<GapRms>,
}

impl RmsReport {
    pub fn from_trace(trace: &Trace, warmup: f64) -> Result<Self> {
        let kept: Vec<&StepRecord> = trace.records.iter().filter(|r| r.time >= warmup).collect();
        let robots = (0..trace.n_robots)
            .map(|k| {
                let ex: Vec<f64> = kept.iter().map(|r| r.robots[k].e_x).collect();
                let ey: Vec<f64> = kept.iter().map(|r| r.robots[k].e_y).collect();
                Ok(RobotRms {
                    robot: k + 1,
                    rms_x: rms(&ex)?,
                    rms_y: rms(&ey)?,
                })
            })
            .collect::<Result<_>>()?;
        let gaps = (1..trace.n_robots)
            .map(|k| {
                let g: Vec<f64> = kept.iter().map(|r| r.gap_errors[k - 1]).collect();
                Ok(GapRms {
                    front: k,
                    rear: k + 1,
                    rms_gap: rms(&g)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            scenario: trace.scenario.clone(),
            controller: trace.controller.label().to_owned(),
            warmup,
            robots,
            gaps,
        })
    }
}

/// Per-robot `(rms_x, rms_y)` over the samples where that robot lies in
/// quadrant 3. `None` for a robot that never enters it.
pub fn quadrant3_rms(trace: &Trace) -> Vec<Option<(f64, f64)>> {
    (0..trace.n_robots)
        .map(|k| {
            let (ex, ey): (Vec<f64>, Vec<f64>) = trace
                .records
                .iter()
                .map(|r| &r.robots[k])
                .filter(|r| quadrant(r.state.x, r.state.y) == 3)
                .map(|r| (r.e_x, r.e_y))
                .unzip();
            Some((rms(&ex).ok()?, rms(&ey).ok()?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub baseline: f64,
    pub proposed: f64,
}

impl TableRow {
    pub fn proposed_lower(&self) -> bool {
        self.proposed < self.baseline
    }

    /// Relative improvement of the proposed controller, `1 − p/b`.
    pub fn improvement(&self) -> f64 {
        1.0 - self.proposed / self.baseline
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub scenario: String,
    pub baseline: RmsReport,
    pub proposed: RmsReport,
    pub tracking: Vec<TableRow>,
    pub gaps: Vec<TableRow>,
}

impl Comparison {
    pub fn from_reports(baseline: RmsReport, proposed: RmsReport) -> Result<Self> {
        if baseline.scenario != proposed.scenario {
            return Err(Error::ScenarioMismatch(baseline.scenario, proposed.scenario));
        }
        if baseline.robots.len() != proposed.robots.len() {
            return Err(Error::MalformedTrace("reports cover different robot counts".into()));
        }
        let mut tracking = Vec::new();
        for (b, p) in baseline.robots.iter().zip(&proposed.robots) {
            tracking.push(TableRow {
                label: format!("Robot{} x", b.robot),
                baseline: b.rms_x,
                proposed: p.rms_x,
            });
            tracking.push(TableRow {
                label: format!("Robot{} y", b.robot),
                baseline: b.rms_y,
                proposed: p.rms_y,
            });
        }
        let gaps = baseline
            .gaps
            .iter()
            .zip(&proposed.gaps)
            .map(|(b, p)| TableRow {
                label: format!("Robot {} and Robot {}", b.front, b.rear),
                baseline: b.rms_gap,
                proposed: p.rms_gap,
            })
            .collect();
        Ok(Self {
            scenario: baseline.scenario.clone(),
            baseline,
            proposed,
            tracking,
            gaps,
        })
    }

    /// Aligned plain-text rendering of both tables.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}  (warm-up cutoff {} s)", self.scenario, self.proposed.warmup);
        let _ = writeln!(out);
        let _ = writeln!(out, "Trajectory tracking RMS error (m)");
        let _ = writeln!(out, "{:<24}{:>14}{:>14}{:>12}", "", "baseline", "proposed", "change");
        for r in &self.tracking {
            let _ = writeln!(out, "{:<24}{:>14.6}{:>14.6}{:>11.1}%", r.label, r.baseline, r.proposed, -100.0 * r.improvement());
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "Gap maintenance RMS error (m)");
        let _ = writeln!(out, "{:<24}{:>14}{:>14}{:>12}", "", "baseline", "proposed", "change");
        for r in &self.gaps {
            let _ = writeln!(out, "{:<24}{:>14.6}{:>14.6}{:>11.1}%", r.label, r.baseline, r.proposed, -100.0 * r.improvement());
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Side-by-side report of two traces from the same scenario.
pub fn build_report(trace_proposed: &Trace, trace_baseline: &Trace, warmup: f64) -> Result<Comparison> {
    if trace_proposed.scenario != trace_baseline.scenario {
        return Err(Error::ScenarioMismatch(
            trace_baseline.scenario.clone(),
            trace_proposed.scenario.clone(),
        ));
    }
    Comparison::from_reports(
        RmsReport::from_trace(trace_baseline, warmup)?,
        RmsReport::from_trace(trace_proposed, warmup)?,
    )
}

pub fn csv_header(n_robots: usize) -> Vec<String> {
    let mut h = vec!["time".to_owned()];
    for r in 1..=n_robots {
        h.extend(ROBOT_COLUMNS.iter().map(|c| format!("{c}_{r}")));
    }
    for r in 1..n_robots {
        h.push(format!("gap_err_{}{}", r, r + 1));
    }
    h
}

fn robot_values(r: &RobotRecord) -> [f64; 23] {
    let g = r.gains.as_array();
    [
        r.state.x,
        r.state.y,
        r.state.theta,
        r.state.v,
        r.state.omega,
        r.x_ref,
        r.y_ref,
        r.command.v_c,
        r.command.omega_c,
        r.wrench.force,
        r.wrench.torque,
        r.wheels.right,
        r.wheels.left,
        r.s_v,
        r.s_w,
        g[0],
        g[1],
        g[2],
        g[3],
        g[4],
        g[5],
        r.e_x,
        r.e_y,
    ]
}

fn robot_from_values(v: &[f64]) -> RobotRecord {
    RobotRecord {
        state: RobotState {
            x: v[0],
            y: v[1],
            theta: v[2],
            v: v[3],
            omega: v[4],
        },
        x_ref: v[5],
        y_ref: v[6],
        command: VelocityCommand { v_c: v[7], omega_c: v[8] },
        wrench: ControlWrench { force: v[9], torque: v[10] },
        wheels: WheelTorques { right: v[11], left: v[12] },
        s_v: v[13],
        s_w: v[14],
        gains: AdaptiveGains::from_array([v[15], v[16], v[17], v[18], v[19], v[20]]),
        e_x: v[21],
        e_y: v[22],
    }
}

fn fmt_value(v: f64) -> String {
    format!("{v:.12e}")
}

/// Writes `trace` as CSV, one row per control step, 13 significant digits.
pub fn export_trace(trace: &Trace, path: &FsPath) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_owned(),
        source,
    };
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(csv_header(trace.n_robots)).map_err(csv_err)?;
    let mut row = Vec::with_capacity(1 + 23 * trace.n_robots + trace.n_robots.saturating_sub(1));
    for rec in &trace.records {
        row.clear();
        row.push(fmt_value(rec.time));
        for r in &rec.robots {
            row.extend(robot_values(r).iter().map(|&v| fmt_value(v)));
        }
        row.extend(rec.gap_errors.iter().map(|&v| fmt_value(v)));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Reads a CSV written by [`export_trace`]. Labels are not stored in the
/// file and must be supplied.
pub fn import_trace(path: &FsPath, scenario: &str, controller: ControllerKind) -> Result<Trace> {
    let csv_err = |source| Error::Csv {
        path: path.to_owned(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    let width = header.len();
    if width < 1 + 23 || (width - 1 + 1) % 24 != 0 {
        return Err(Error::MalformedTrace(format!("unexpected column count {width}")));
    }
    let n_robots = width / 24;
    if header != csv_header(n_robots) {
        return Err(Error::MalformedTrace("header does not match the column contract".into()));
    }
    let mut records = Vec::new();
    for (line, row) in r.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let values: Vec<f64> = row
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                path: path.to_owned(),
                line: line + 2,
                msg: e.to_string(),
            })?;
        let robots = (0..n_robots).map(|k| robot_from_values(&values[1 + 23 * k..1 + 23 * (k + 1)])).collect();
        records.push(StepRecord {
            time: values[0],
            robots,
            gap_errors: values[1 + 23 * n_robots..].to_vec(),
        });
    }
    let control_period = match records.as_slice() {
        [a, b, ..] => b.time - a.time,
        _ => 0.0,
    };
    Ok(Trace {
        scenario: scenario.to_owned(),
        controller,
        control_period,
        n_robots,
        records,
    })
}

/// Figure-to-column map for external plotting tools.
///
/// Each line: figure name, comma-separated trace files, x column, y columns.
pub fn plotspec(n_robots: usize, files: &[String]) -> String {
    let files = files.join(",");
    let mut out = String::from("# figure\tfiles\tx\ty...\n");
    for r in 1..=n_robots {
        let _ = writeln!(out, "dx{r}dy{r}\t{files}\ttime\te_x_{r} e_y_{r}");
    }
    for r in 1..=n_robots {
        let _ = writeln!(out, "robot{r}\t{files}\tx_{r}\ty_{r} xr_ref_{r} yr_ref_{r}");
    }
    let gaps: Vec<String> = (1..n_robots).map(|r| format!("gap_err_{}{}", r, r + 1)).collect();
    if !gaps.is_empty() {
        let _ = writeln!(out, "gaperror\t{files}\ttime\t{}", gaps.join(" "));
    }
    out
}
