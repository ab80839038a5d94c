//! Plain-text formats: trajectory and series CSV, value fields as CSV plus a
//! JSON header, and flat `key = value` configuration files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance_to_omega, DEFAULT_BUDGET};
use crate::problem::ProblemDefinition;
use crate::trajectory::{StepControl, Trajectory};
use crate::value::{Scheme, ValueField};

/// Shortest round-trip decimal; `inf`, `-inf`, `nan` for the rest.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

pub fn parse_num(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: `{s}`")))
}

pub fn write_series_csv(path: &Path, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Header and rows; blank cells read as NaN.
pub fn read_series_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{} is empty", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|c| if c.is_empty() { Ok(f64::NAN) } else { parse_num(c) })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::Parse(format!("row {} has {} cells, expected {}", i + 2, row.len(), header.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// Columns `t, x_1..x_n, u_1..u_m, maxh, dist`. Chattered steps are written as
/// their mean control; the final node has blank controls.
pub fn write_trajectory_csv(p: &ProblemDefinition, traj: &Trajectory, path: &Path) -> Result<()> {
    let n = traj.states.first().map_or(p.n, Vec::len);
    let m = traj
        .controls
        .as_ref()
        .and_then(|c| c.first())
        .map_or(p.default_control.len(), |c| c.mean().len());
    let mut cols: Vec<String> = vec!["t".into()];
    cols.extend((1..=n).map(|i| format!("x_{i}")));
    cols.extend((1..=m).map(|i| format!("u_{i}")));
    cols.push("maxh".into());
    cols.push("dist".into());
    let mut out = cols.join(",");
    out.push('\n');
    for (j, (t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut cells = vec![fmt_num(*t)];
        cells.extend(x.iter().map(|&v| fmt_num(v)));
        match traj.controls.as_ref().and_then(|c| c.get(j)) {
            Some(c) => cells.extend(c.mean().into_iter().map(fmt_num)),
            None => cells.extend(std::iter::repeat(String::new()).take(m)),
        }
        cells.push(fmt_num(p.max_h(*t, x)));
        cells.push(fmt_num(distance_to_omega(p, *t, x, DEFAULT_BUDGET)?.distance));
        let _ = writeln!(out, "{}", cells.join(","));
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub trajectory: Trajectory,
    pub maxh: Vec<f64>,
    pub dist: Vec<f64>,
}

/// Inverse of [`write_trajectory_csv`]; controls come back as plain means.
pub fn read_trajectory_csv(path: &Path) -> Result<TrajectoryTable> {
    let (header, rows) = read_series_csv(path)?;
    let n = header.iter().filter(|h| h.starts_with("x_")).count();
    let m = header.iter().filter(|h| h.starts_with("u_")).count();
    if header.len() != n + m + 3 || header[0] != "t" || rows.is_empty() {
        return Err(Error::Parse(format!("{} is not a trajectory table", path.display())));
    }
    let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let states: Vec<Vec<f64>> = rows.iter().map(|r| r[1..=n].to_vec()).collect();
    let controls: Vec<StepControl> = rows[..rows.len() - 1]
        .iter()
        .map(|r| StepControl::Plain(r[n + 1..=n + m].to_vec()))
        .collect();
    let dt = if times.len() > 1 { (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64 } else { 0.0 };
    let maxh = rows.iter().map(|r| r[n + m + 1]).collect();
    let dist = rows.iter().map(|r| r[n + m + 2]).collect();
    let controls = if m > 0 && controls.iter().all(|c| c.mean().iter().all(|v| v.is_finite())) { Some(controls) } else { None };
    Ok(TrajectoryTable { trajectory: Trajectory { times, states, controls, dt }, maxh, dist })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub bounds: Vec<(f64, f64)>,
    pub nodes: Vec<usize>,
    pub dt: f64,
    pub t0: f64,
}

/// JSON header accompanying `field.csv`. An infinite tail bound is written as null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub lambda: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub tail_bound: Option<f64>,
    pub scheme: Scheme,
    pub relaxed: bool,
    pub grid: FieldGrid,
}

/// Writes `<dir>/field.csv` (columns `t, x_1..x_n, value`) and `<dir>/field.json`.
pub fn write_field(field: &ValueField, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let header = FieldHeader {
        lambda: field.lambda,
        horizon: field.horizon,
        tail_bound: field.tail_bound.is_finite().then_some(field.tail_bound),
        scheme: field.scheme,
        relaxed: field.relaxed,
        grid: FieldGrid { bounds: field.bounds.clone(), nodes: field.nodes.clone(), dt: field.dt, t0: field.t0 },
    };
    write_json(&dir.join("field.json"), &header)?;
    let n = field.nodes.len();
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=n).map(|i| format!("x_{i}")));
    cols.push("value".into());
    let mut out = cols.join(",");
    out.push('\n');
    let space = field.space_len();
    for j in 0..field.time_nodes() {
        let t = fmt_num(field.time(j));
        for f in 0..space {
            let x: Vec<String> = field.node(f).into_iter().map(fmt_num).collect();
            let _ = writeln!(out, "{t},{},{}", x.join(","), fmt_num(field.values[j * space + f]));
        }
    }
    fs::write(dir.join("field.csv"), out)?;
    Ok(())
}

pub fn read_field(dir: &Path) -> Result<ValueField> {
    let header: FieldHeader = serde_json::from_str(&fs::read_to_string(dir.join("field.json"))?)?;
    let (cols, rows) = read_series_csv(&dir.join("field.csv"))?;
    let n = header.grid.nodes.len();
    if cols.len() != n + 2 {
        return Err(Error::Parse(format!("field.csv has {} columns, expected {}", cols.len(), n + 2)));
    }
    let space: usize = header.grid.nodes.iter().product();
    if space == 0 || rows.len() % space != 0 {
        return Err(Error::Parse("field.csv row count does not match the grid".into()));
    }
    Ok(ValueField {
        relaxed: header.relaxed,
        scheme: header.scheme,
        lambda: header.lambda,
        t0: header.grid.t0,
        dt: header.grid.dt,
        horizon: header.horizon,
        tail_bound: header.tail_bound.unwrap_or(f64::INFINITY),
        bounds: header.grid.bounds,
        nodes: header.grid.nodes,
        values: rows.iter().map(|r| r[n + 1]).collect(),
    })
}

/// `key = value` lines; `#` starts a comment. Later keys override earlier ones.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected `key = value`", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Parse(format!("config line {}: empty key", i + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}
