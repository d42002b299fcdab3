//! INI run configuration.
//!
//! ```ini
//! [grid]
//! dim = 1
//! nx = 400
//! length = 1.0
//!
//! [initial]
//! kind = bump
//! loading = velocity
//! center = 0.5
//! width = 0.2
//! amplitude = 3.0
//!
//! [params]
//! lambda = 1
//! eps = 0
//! T = 1
//! cfl = 0.9
//! bc = impedance
//!
//! [checks]
//! run = energy, cone, flow, dissipative
//!
//! [output]
//! stride = 10
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::{Ini, Properties};

use crate::diagnostics::cone::{cone_check, data_support};
use crate::diagnostics::dissipative::{dissipative_verify, KappaGrid, DISSIPATIVE_TOL};
use crate::diagnostics::energy::{energy_audit, ENERGY_TOL};
use crate::diagnostics::kato::{kato_check, KATO_TOL};
use crate::diagnostics::report::{Location, VerificationReport};
use crate::diagnostics::testfn::{TestFunction, TestFunctionDictionary};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::plastic::run_plastic_with;
use crate::scenario::{BcMode, InitialData, Loading, Profile, Scenario, Source};
use crate::solver::{RunOptions, Trajectory};
use crate::viscoplastic::run_viscoplastic_with;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    /// Cumulative energy balance.
    Energy,
    /// Support inside the unit-speed cone over the initial support.
    Cone,
    /// Stress constraint and flow rule after every step.
    Flow,
    /// Dissipative inequality over the standard constant-state grid.
    Dissipative,
    /// Rerun from the same data and compare with the horizon test function.
    Kato,
}

impl FromStr for Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "energy" => Ok(Check::Energy),
            "cone" => Ok(Check::Cone),
            "flow" => Ok(Check::Flow),
            "dissipative" => Ok(Check::Dissipative),
            "kato" => Ok(Check::Kato),
            other => Err(Error::config(
                "checks",
                "run",
                format!("unknown check `{other}`"),
            )),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::Energy => "energy",
            Check::Cone => "cone",
            Check::Flow => "flow",
            Check::Dissipative => "dissipative",
            Check::Kato => "kato",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub stride: usize,
    pub out_dir: Option<PathBuf>,
    pub checks: Vec<Check>,
    /// Support threshold of the cone check, relative to `max |U0|`.
    pub cone_threshold: f64,
    /// Bound of the `k` samples; `None` uses `max(1, sup |v|)`.
    pub kappa_kmax: Option<f64>,
}

fn section<'a>(ini: &'a Ini, name: &str) -> Option<&'a Properties> {
    ini.section(Some(name))
}

fn get_str<'a>(ini: &'a Ini, sec: &str, key: &str) -> Option<&'a str> {
    section(ini, sec).and_then(|p| p.get(key)).map(str::trim)
}

fn get_f64(ini: &Ini, sec: &str, key: &str) -> Result<Option<f64>> {
    get_str(ini, sec, key)
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::config(sec, key, format!("`{s}` is not a number")))
        })
        .transpose()
}

fn get_usize(ini: &Ini, sec: &str, key: &str) -> Result<Option<usize>> {
    get_str(ini, sec, key)
        .map(|s| {
            s.parse::<usize>().map_err(|_| {
                Error::config(sec, key, format!("`{s}` is not a non-negative integer"))
            })
        })
        .transpose()
}

fn get_point(ini: &Ini, sec: &str, key: &str) -> Result<Option<[f64; 2]>> {
    let Some(s) = get_str(ini, sec, key) else {
        return Ok(None);
    };
    let parts: Vec<&str> = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect();
    if parts.is_empty() || parts.len() > 2 {
        return Err(Error::config(
            sec,
            key,
            "expected one or two comma-separated numbers",
        ));
    }
    let mut out = [0.0; 2];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p
            .parse()
            .map_err(|_| Error::config(sec, key, format!("`{p}` is not a number")))?;
    }
    Ok(Some(out))
}

fn require<T>(v: Option<T>, sec: &str, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::config(sec, key, "missing"))
}

fn positive(v: f64, sec: &str, key: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(
            sec,
            key,
            format!("must be positive, got {v}"),
        ))
    }
}

fn parse_profile(kind: &str, sec: &str) -> Result<Option<Profile>> {
    match kind.to_ascii_lowercase().as_str() {
        "zero" => Ok(None),
        "gaussian" => Ok(Some(Profile::Gaussian)),
        "bump" => Ok(Some(Profile::Bump)),
        other => Err(Error::config(
            sec,
            "kind",
            format!("unknown kind `{other}`"),
        )),
    }
}

fn parse_grid(ini: &Ini) -> Result<Grid> {
    let dim = get_usize(ini, "grid", "dim")?.unwrap_or(1);
    if !(1..=2).contains(&dim) {
        return Err(Error::config(
            "grid",
            "dim",
            format!("must be 1 or 2, got {dim}"),
        ));
    }
    let nx = require(get_usize(ini, "grid", "nx")?, "grid", "nx")?;
    let ny = if dim == 2 {
        require(get_usize(ini, "grid", "ny")?, "grid", "ny")?
    } else {
        1
    };
    let h = match (get_f64(ini, "grid", "h")?, get_f64(ini, "grid", "length")?) {
        (Some(h), None) => positive(h, "grid", "h")?,
        (None, Some(l)) => positive(l, "grid", "length")? / nx.max(1) as f64,
        (None, None) => 1.0 / nx.max(1) as f64,
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "grid",
                "h",
                "give either h or length, not both",
            ))
        }
    };
    let origin = get_point(ini, "grid", "origin")?.unwrap_or([0.0, 0.0]);
    Grid::new(dim, nx, ny, h, origin).map_err(|e| Error::config("grid", "nx", e.to_string()))
}

fn parse_initial(ini: &Ini, grid: &Grid) -> Result<InitialData> {
    let sec = "initial";
    let kind = get_str(ini, sec, "kind")
        .unwrap_or("zero")
        .to_ascii_lowercase();
    let e = grid.extent();
    let o = grid.origin();
    let mid = [o[0] + 0.5 * e[0], o[1] + 0.5 * e[1]];
    let center = get_point(ini, sec, "center")?.unwrap_or(mid);
    let amplitude = get_f64(ini, sec, "amplitude")?.unwrap_or(1.0);
    if kind == "checkerboard" {
        let half = positive(
            require(get_f64(ini, sec, "half")?, sec, "half")?,
            sec,
            "half",
        )?;
        let block = positive(
            require(get_f64(ini, sec, "block")?, sec, "block")?,
            sec,
            "block",
        )?;
        return Ok(InitialData::Checkerboard {
            center,
            half,
            block,
            amplitude,
        });
    }
    let Some(profile) = parse_profile(&kind, sec)? else {
        return Ok(InitialData::Zero);
    };
    let loading = match get_str(ini, sec, "loading") {
        Some(s) => {
            Loading::from_str(s).map_err(|e| Error::config(sec, "loading", e.to_string()))?
        }
        None => Loading::Velocity,
    };
    let width = positive(
        require(get_f64(ini, sec, "width")?, sec, "width")?,
        sec,
        "width",
    )?;
    Ok(InitialData::Pulse {
        profile,
        loading,
        center,
        width,
        amplitude,
    })
}

fn parse_source(ini: &Ini, grid: &Grid) -> Result<Source> {
    let sec = "source";
    let kind = get_str(ini, sec, "kind").unwrap_or("zero");
    let Some(profile) = parse_profile(kind, sec)? else {
        return Ok(Source::Zero);
    };
    let e = grid.extent();
    let o = grid.origin();
    Ok(Source::Pulse {
        profile,
        center: get_point(ini, sec, "center")?.unwrap_or([o[0] + 0.5 * e[0], o[1] + 0.5 * e[1]]),
        width: positive(
            require(get_f64(ini, sec, "width")?, sec, "width")?,
            sec,
            "width",
        )?,
        amplitude: get_f64(ini, sec, "amplitude")?.unwrap_or(1.0),
        omega: get_f64(ini, sec, "omega")?.unwrap_or(0.0),
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let grid = parse_grid(&ini)?;
        let data = parse_initial(&ini, &grid)?;
        let source = parse_source(&ini, &grid)?;

        let sec = "params";
        let lambda = get_f64(&ini, sec, "lambda")?.unwrap_or(1.0);
        positive(lambda, sec, "lambda")?;
        let eps = get_f64(&ini, sec, "eps")?.unwrap_or(0.0);
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::config(
                sec,
                "eps",
                format!("must be non-negative, got {eps}"),
            ));
        }
        let t_final = get_f64(&ini, sec, "T")?.unwrap_or(1.0);
        positive(t_final, sec, "T")?;
        let cfl = get_f64(&ini, sec, "cfl")?.unwrap_or(0.9);
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::config(
                sec,
                "cfl",
                format!("must lie in (0, 1], got {cfl}"),
            ));
        }
        let bc = match get_str(&ini, sec, "bc") {
            Some(s) => BcMode::from_str(s).map_err(|e| Error::config(sec, "bc", e.to_string()))?,
            None => BcMode::Impedance,
        };

        let checks = match get_str(&ini, "checks", "run") {
            Some(s) => s
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(Check::from_str)
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        let cone_threshold = get_f64(&ini, "checks", "cone_threshold")?.unwrap_or(1e-8);
        positive(cone_threshold, "checks", "cone_threshold")?;
        let kappa_kmax = get_f64(&ini, "checks", "kappa_kmax")?;
        if let Some(k) = kappa_kmax {
            positive(k, "checks", "kappa_kmax")?;
        }

        let stride = get_usize(&ini, "output", "stride")?.unwrap_or(1);
        if stride == 0 {
            return Err(Error::config("output", "stride", "must be at least 1"));
        }
        let out_dir = get_str(&ini, "output", "dir").map(PathBuf::from);

        let scenario = Scenario::new(grid, &data)
            .with_lambda(lambda)
            .with_eps(eps)
            .with_t_final(t_final)
            .with_cfl(cfl)
            .with_bc(bc)
            .with_source(source);
        Ok(RunConfig {
            scenario,
            stride,
            out_dir,
            checks,
            cone_threshold,
            kappa_kmax,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::parse(&text)
    }

    /// Runs the scenario with the solver matching `eps`.
    pub fn simulate(&self) -> Result<Trajectory> {
        let opts = RunOptions {
            stride: self.stride,
        };
        if self.scenario.eps > 0.0 {
            run_viscoplastic_with(&self.scenario, opts)
        } else {
            run_plastic_with(&self.scenario, opts)
        }
    }

    /// Evaluates the configured checks on `traj`.
    pub fn verify(&self, traj: &Trajectory) -> Result<Vec<VerificationReport>> {
        let mut out = Vec::new();
        for check in &self.checks {
            out.push(match check {
                Check::Energy => energy_audit(traj, ENERGY_TOL)?.1,
                Check::Cone => match data_support(traj, self.cone_threshold)? {
                    Some((b, threshold)) => cone_check(traj, &b, threshold)?,
                    None => VerificationReport::new("cone", 0.0, Location::default(), 0.0),
                },
                Check::Flow => flow_report(traj),
                Check::Dissipative => {
                    let kappas = match self.kappa_kmax {
                        Some(k) => KappaGrid::standard(traj.grid.dim(), k),
                        None => KappaGrid::for_trajectory(traj),
                    };
                    let dict = TestFunctionDictionary::standard(&traj.grid, traj.t_final());
                    dissipative_verify(traj, &kappas, &dict, &traj.source, DISSIPATIVE_TOL)?
                }
                Check::Kato => {
                    let again = self.simulate()?;
                    let phi = TestFunction::Horizon {
                        t_end: traj.t_final(),
                    };
                    let mut r = kato_check(traj, &again, &phi, KATO_TOL)?;
                    if again != *traj {
                        r.pass = false;
                        r.name = "kato (rerun differs)".into();
                    }
                    r
                }
            });
        }
        Ok(out)
    }
}

/// Worst per-step excess of `|sigma|` over 1 and of the flow-rule residual
/// (the conjugacy residual for `eps > 0`).
pub fn flow_report(traj: &Trajectory) -> VerificationReport {
    let mut worst = 0.0f64;
    let mut at = 0.0;
    for s in &traj.stats {
        let v = if traj.eps > 0.0 {
            s.conjugacy_residual
        } else {
            (s.max_sigma - 1.0).max(s.flow_residual)
        };
        if v > worst {
            worst = v;
            at = s.t;
        }
    }
    VerificationReport::new(
        "flow",
        worst,
        Location {
            t: Some(at),
            ..Location::default()
        },
        1e-10,
    )
}
