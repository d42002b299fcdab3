//! Text outputs: `energy.csv`, `snap_<step>.csv`, `trajectory.meta` and
//! `report.txt`. Numbers are written with 17 significant digits so that a
//! write/read cycle is bit-exact.
//!
//! Snapshot rows are indexed by `(i, j)` with `0 <= i <= nx` (and
//! `0 <= j <= ny` in 2D); `x`, `y` are the coordinates of the low corner of
//! cell `(i, j)`. Cell columns (`u`, `v`) are blank on the extra row/column,
//! and face columns are blank where the face does not exist.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::energy::{EnergyLedger, LedgerRow};
use crate::diagnostics::report::VerificationReport;
use crate::error::{Error, Result};
use crate::grid::{Grid, State};
use crate::scenario::{BcMode, Profile, Source};
use crate::solver::{Snapshot, Trajectory};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{what}: `{s}` is not a number")))
}

pub fn ledger_csv(ledger: &EnergyLedger) -> String {
    let mut out = LedgerRow::HEADER.join(",");
    out.push('\n');
    for r in &ledger.rows {
        let vals: Vec<String> = r.values().iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&vals.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_ledger_csv(text: &str) -> Result<EnergyLedger> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("energy.csv is empty".into()))?;
    if header.trim() != LedgerRow::HEADER.join(",") {
        return Err(Error::Parse("energy.csv has an unexpected header".into()));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 9 {
            return Err(Error::Parse(format!(
                "energy.csv row {}: expected 9 columns",
                n + 1
            )));
        }
        let mut v = [0.0; 9];
        for (o, c) in v.iter_mut().zip(&cols) {
            *o = parse_f64(c, "energy.csv")?;
        }
        rows.push(LedgerRow::from_values(v));
    }
    if rows.is_empty() {
        return Err(Error::Parse("energy.csv has no rows".into()));
    }
    Ok(EnergyLedger { rows })
}

fn snapshot_header(dim: usize) -> &'static str {
    if dim == 1 {
        "x,u,v,sigma_x,p_x"
    } else {
        "x,y,u,v,sigma_x,sigma_y,p_x,p_y"
    }
}

pub fn snapshot_csv(grid: &Grid, state: &State) -> String {
    let dim = grid.dim();
    let (nx, ny) = (grid.nx(), grid.ny());
    let h = grid.h();
    let o = grid.origin();
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let mut out = String::from(snapshot_header(dim));
    out.push('\n');
    let jmax = if dim == 1 { 0 } else { ny };
    for j in 0..=jmax {
        for i in 0..=nx {
            let cell = (i < nx && j < ny).then(|| grid.cell(i, j));
            let xf = (j < ny).then(|| grid.xface(i, j));
            let x = o[0] + i as f64 * h;
            let u = opt(cell.map(|c| state.u[c]));
            let v = opt(cell.map(|c| state.v[c]));
            let sx = opt(xf.map(|f| state.sigma.x[f]));
            let px = opt(xf.map(|f| state.p.x[f]));
            if dim == 1 {
                let _ = writeln!(out, "{},{u},{v},{sx},{px}", fmt_f64(x));
            } else {
                let yf = (i < nx).then(|| grid.yface(i, j));
                let y = o[1] + j as f64 * h;
                let sy = opt(yf.map(|f| state.sigma.y[f]));
                let py = opt(yf.map(|f| state.p.y[f]));
                let _ = writeln!(
                    out,
                    "{},{},{u},{v},{sx},{sy},{px},{py}",
                    fmt_f64(x),
                    fmt_f64(y)
                );
            }
        }
    }
    out
}

pub fn parse_snapshot_csv(grid: &Grid, text: &str) -> Result<State> {
    let dim = grid.dim();
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty snapshot".into()))?;
    if header.trim() != snapshot_header(dim) {
        return Err(Error::Parse(format!(
            "snapshot header `{header}` does not match a {dim}D grid"
        )));
    }
    let rows: Vec<&str> = lines.collect();
    let jmax = if dim == 1 { 0 } else { ny };
    let expected = (nx + 1) * (jmax + 1);
    if rows.len() != expected {
        return Err(Error::Parse(format!(
            "snapshot has {} rows, grid expects {expected}",
            rows.len()
        )));
    }
    let mut st = State::zeros(grid);
    let ncol = if dim == 1 { 5 } else { 8 };
    let cell_field = |s: &str, present: bool, what: &str| -> Result<Option<f64>> {
        match (s.trim().is_empty(), present) {
            (true, false) => Ok(None),
            (false, true) => parse_f64(s, what).map(Some),
            _ => Err(Error::Parse(format!(
                "snapshot column `{what}` has a misplaced entry"
            ))),
        }
    };
    for (k, line) in rows.iter().enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != ncol {
            return Err(Error::Parse(format!(
                "snapshot row {}: expected {ncol} columns",
                k + 1
            )));
        }
        let (i, j) = (k % (nx + 1), k / (nx + 1));
        let has_cell = i < nx && j < ny;
        let has_xf = j < ny;
        let off = dim;
        if let Some(u) = cell_field(cols[off], has_cell, "u")? {
            st.u[grid.cell(i, j)] = u;
        }
        if let Some(v) = cell_field(cols[off + 1], has_cell, "v")? {
            st.v[grid.cell(i, j)] = v;
        }
        if dim == 1 {
            if let Some(s) = cell_field(cols[3], has_xf, "sigma_x")? {
                st.sigma.x[grid.xface(i, j)] = s;
            }
            if let Some(p) = cell_field(cols[4], has_xf, "p_x")? {
                st.p.x[grid.xface(i, j)] = p;
            }
        } else {
            let has_yf = i < nx;
            if let Some(s) = cell_field(cols[4], has_xf, "sigma_x")? {
                st.sigma.x[grid.xface(i, j)] = s;
            }
            if let Some(s) = cell_field(cols[5], has_yf, "sigma_y")? {
                st.sigma.y[grid.yface(i, j)] = s;
            }
            if let Some(p) = cell_field(cols[6], has_xf, "p_x")? {
                st.p.x[grid.xface(i, j)] = p;
            }
            if let Some(p) = cell_field(cols[7], has_yf, "p_y")? {
                st.p.y[grid.yface(i, j)] = p;
            }
        }
    }
    Ok(st)
}

fn profile_name(p: Profile) -> &'static str {
    match p {
        Profile::Gaussian => "gaussian",
        Profile::Bump => "bump",
    }
}

/// One-line description of a closed-form source; tabulated sources are not
/// representable.
pub fn source_spec(source: &Source) -> Option<String> {
    match source {
        Source::Zero => Some("zero".into()),
        Source::Pulse {
            profile,
            center,
            width,
            amplitude,
            omega,
        } => Some(format!(
            "{} {} {} {} {} {}",
            profile_name(*profile),
            fmt_f64(center[0]),
            fmt_f64(center[1]),
            fmt_f64(*width),
            fmt_f64(*amplitude),
            fmt_f64(*omega)
        )),
        Source::Tabulated(_) => None,
    }
}

pub fn parse_source_spec(spec: &str) -> Result<Source> {
    let parts: Vec<&str> = spec.split_whitespace().collect();
    match parts.as_slice() {
        ["zero"] => Ok(Source::Zero),
        [kind, cx, cy, w, a, om] => {
            let profile = match *kind {
                "gaussian" => Profile::Gaussian,
                "bump" => Profile::Bump,
                other => return Err(Error::Parse(format!("unknown source profile `{other}`"))),
            };
            Ok(Source::Pulse {
                profile,
                center: [parse_f64(cx, "source")?, parse_f64(cy, "source")?],
                width: parse_f64(w, "source")?,
                amplitude: parse_f64(a, "source")?,
                omega: parse_f64(om, "source")?,
            })
        }
        _ => Err(Error::Parse(format!("malformed source spec `{spec}`"))),
    }
}

pub fn meta_text(traj: &Trajectory) -> Result<String> {
    let g = &traj.grid;
    let source = source_spec(&traj.source).ok_or_else(|| {
        Error::InvalidScenario("tabulated sources cannot be written to trajectory.meta".into())
    })?;
    let o = g.origin();
    let mut s = String::new();
    let _ = writeln!(s, "dim = {}", g.dim());
    let _ = writeln!(s, "nx = {}", g.nx());
    let _ = writeln!(s, "ny = {}", g.ny());
    let _ = writeln!(s, "h = {}", fmt_f64(g.h()));
    let _ = writeln!(s, "origin = {} {}", fmt_f64(o[0]), fmt_f64(o[1]));
    let _ = writeln!(s, "dt = {}", fmt_f64(traj.dt));
    let _ = writeln!(s, "steps = {}", traj.steps);
    let _ = writeln!(s, "stride = {}", traj.stride);
    let _ = writeln!(s, "lambda = {}", fmt_f64(traj.lambda));
    let _ = writeln!(s, "eps = {}", fmt_f64(traj.eps));
    let _ = writeln!(s, "bc = {}", traj.bc);
    let _ = writeln!(s, "source = {source}");
    Ok(s)
}

/// Writes snapshots, the ledger and the metadata into `dir`.
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("trajectory.meta"), meta_text(traj)?)?;
    fs::write(dir.join("energy.csv"), ledger_csv(&traj.ledger))?;
    for snap in &traj.snapshots {
        fs::write(
            dir.join(format!("snap_{}.csv", snap.step)),
            snapshot_csv(&traj.grid, &snap.state),
        )?;
    }
    Ok(())
}

fn parse_meta(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("trajectory.meta: malformed line `{line}`")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Reads a directory written by [`write_trajectory`]. Per-step statistics
/// are not stored and come back empty.
pub fn read_trajectory(dir: &Path) -> Result<Trajectory> {
    let meta_path = dir.join("trajectory.meta");
    if !meta_path.is_file() {
        return Err(Error::Parse(format!(
            "{} has no trajectory.meta",
            dir.display()
        )));
    }
    let meta = parse_meta(&fs::read_to_string(meta_path)?)?;
    let get = |k: &str| {
        meta.get(k)
            .map(String::as_str)
            .ok_or_else(|| Error::Parse(format!("trajectory.meta: missing `{k}`")))
    };
    let int = |k: &str| -> Result<usize> {
        get(k)?
            .parse()
            .map_err(|_| Error::Parse(format!("trajectory.meta: `{k}` is not an integer")))
    };
    let num = |k: &str| -> Result<f64> { parse_f64(get(k)?, k) };
    let origin: Vec<f64> = get("origin")?
        .split_whitespace()
        .map(|s| parse_f64(s, "origin"))
        .collect::<Result<_>>()?;
    if origin.len() != 2 {
        return Err(Error::Parse(
            "trajectory.meta: origin needs two numbers".into(),
        ));
    }
    let grid = Grid::new(
        int("dim")?,
        int("nx")?,
        int("ny")?,
        num("h")?,
        [origin[0], origin[1]],
    )?;
    let dt = num("dt")?;
    let steps = int("steps")?;
    let stride = int("stride")?;
    let bc: BcMode = get("bc")?.parse()?;
    let source = parse_source_spec(get("source")?)?;

    let mut steps_found: Vec<usize> = Vec::new();
    for entry in fs::read_dir(dir)? {
        let name = entry?.file_name();
        let name = name.to_string_lossy();
        if let Some(n) = name
            .strip_prefix("snap_")
            .and_then(|s| s.strip_suffix(".csv"))
        {
            let n: usize = n
                .parse()
                .map_err(|_| Error::Parse(format!("unexpected snapshot file `{name}`")))?;
            steps_found.push(n);
        }
    }
    steps_found.sort_unstable();
    if steps_found.first() != Some(&0) {
        return Err(Error::Parse(
            "trajectory has no initial snapshot snap_0.csv".into(),
        ));
    }
    if steps_found.last() != Some(&steps) {
        return Err(Error::Parse(format!(
            "trajectory has no final snapshot snap_{steps}.csv"
        )));
    }
    let snapshots = steps_found
        .iter()
        .map(|&n| {
            let text = fs::read_to_string(dir.join(format!("snap_{n}.csv")))?;
            Ok(Snapshot {
                step: n,
                t: n as f64 * dt,
                state: parse_snapshot_csv(&grid, &text)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ledger = parse_ledger_csv(&fs::read_to_string(dir.join("energy.csv"))?)?;
    if ledger.rows.len() != steps + 1 {
        return Err(Error::Parse(format!(
            "energy.csv has {} rows for {steps} steps",
            ledger.rows.len()
        )));
    }
    Ok(Trajectory {
        grid,
        dt,
        steps,
        stride,
        lambda: num("lambda")?,
        eps: num("eps")?,
        bc,
        source,
        snapshots,
        ledger,
        stats: Vec::new(),
    })
}

pub fn report_text(reports: &[VerificationReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = writeln!(s, "{r}");
    }
    s
}
