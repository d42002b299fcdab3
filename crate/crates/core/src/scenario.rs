//! Scenario definitions: geometry, closed-form initial data, sources and the
//! boundary regime, plus the initial-data compatibility report.

use std::fmt;
use std::str::FromStr;

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::grid::{grad, Axis, FaceField, FaceGroup, Grid, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcMode {
    /// `sigma.nu + psi'_lambda(v) = 0` (relaxed impedance; linear when `eps > 0`).
    Impedance,
    /// Hard `v = 0` with the traction clipped by the stress constraint.
    Dirichlet,
    /// `sigma.nu = 0`.
    Neumann,
}

impl fmt::Display for BcMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BcMode::Impedance => "impedance",
            BcMode::Dirichlet => "dirichlet",
            BcMode::Neumann => "neumann",
        })
    }
}

impl FromStr for BcMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "impedance" => Ok(BcMode::Impedance),
            "dirichlet" => Ok(BcMode::Dirichlet),
            "neumann" => Ok(BcMode::Neumann),
            other => Err(Error::Parse(format!("unknown boundary mode `{other}`"))),
        }
    }
}

/// Radial profile used for closed-form data and sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `exp(-(r/w)^2)`, cut to zero for `r > 6w`.
    Gaussian,
    /// `exp(1 - 1/(1 - (r/w)^2))` for `r < w`; smooth with compact support.
    Bump,
}

impl Profile {
    pub fn eval(self, r: f64, width: f64) -> f64 {
        let s = r / width;
        match self {
            Profile::Gaussian => {
                if s > 6.0 {
                    0.0
                } else {
                    (-s * s).exp()
                }
            }
            Profile::Bump => {
                if s >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - s * s)).exp()
                }
            }
        }
    }

    /// Radius beyond which the profile is exactly zero.
    pub fn support_radius(self, width: f64) -> f64 {
        match self {
            Profile::Gaussian => 6.0 * width,
            Profile::Bump => width,
        }
    }
}

/// How a profile is loaded into `(v0, sigma0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loading {
    /// `v0 = a g`, `sigma0 = 0`.
    Velocity,
    /// `sigma0_x = a g`, `v0 = 0`.
    Stress,
    /// Right-going 1D wave: `v0 = a g`, `sigma0_x = -a g`.
    Right,
    /// Left-going 1D wave: `v0 = a g`, `sigma0_x = a g`.
    Left,
}

impl FromStr for Loading {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "velocity" => Ok(Loading::Velocity),
            "stress" => Ok(Loading::Stress),
            "right" => Ok(Loading::Right),
            "left" => Ok(Loading::Left),
            other => Err(Error::Parse(format!("unknown loading `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Zero,
    Pulse {
        profile: Profile,
        loading: Loading,
        center: [f64; 2],
        width: f64,
        amplitude: f64,
    },
    /// Stress `±amplitude` (x component) on square blocks of side `block`
    /// inside `[center - half, center + half]`, zero elsewhere.
    Checkerboard {
        center: [f64; 2],
        half: f64,
        block: f64,
        amplitude: f64,
    },
}

impl InitialData {
    /// Builds `(u0, v0, sigma0, p0)` on `grid`. In 1D `u0` integrates `sigma0`
    /// so that `p0 = 0`; in 2D `u0 = 0` and `p0 = -sigma0`.
    pub fn build(&self, grid: &Grid) -> State {
        let mut s = State::zeros(grid);
        let dist = |a: [f64; 2], b: [f64; 2]| {
            if grid.dim() == 1 {
                (a[0] - b[0]).abs()
            } else {
                (a[0] - b[0]).hypot(a[1] - b[1])
            }
        };
        match *self {
            InitialData::Zero => return s,
            InitialData::Pulse {
                profile,
                loading,
                center,
                width,
                amplitude,
            } => {
                let g = |p: [f64; 2]| amplitude * profile.eval(dist(p, center), width);
                let (vel, stress) = match loading {
                    Loading::Velocity => (1.0, 0.0),
                    Loading::Stress => (0.0, 1.0),
                    Loading::Right => (1.0, -1.0),
                    Loading::Left => (1.0, 1.0),
                };
                if vel != 0.0 {
                    for c in 0..grid.n_cells() {
                        s.v[c] = vel * g(grid.cell_center(c));
                    }
                }
                if stress != 0.0 {
                    for f in 0..grid.n_xfaces() {
                        s.sigma.x[f] = stress * g(grid.xface_center(f));
                    }
                }
            }
            InitialData::Checkerboard {
                center,
                half,
                block,
                amplitude,
            } => {
                for f in 0..grid.n_xfaces() {
                    let p = grid.xface_center(f);
                    let inside = (0..grid.dim()).all(|a| (p[a] - center[a]).abs() < half);
                    if inside {
                        let parity: i64 = (0..grid.dim())
                            .map(|a| ((p[a] - center[a] + half) / block).floor() as i64)
                            .sum();
                        s.sigma.x[f] = if parity % 2 == 0 {
                            amplitude
                        } else {
                            -amplitude
                        };
                    }
                }
            }
        }
        if grid.dim() == 1 {
            let h = grid.h();
            for i in 1..grid.nx() {
                s.u[i] = s.u[i - 1] + h * s.sigma.x[i];
            }
        } else {
            for (p, sg) in s.p.iter_mut().zip(s.sigma.iter()) {
                *p = -sg;
            }
        }
        s
    }
}

/// Body force `f(x, t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Zero,
    /// `amplitude * profile(|x - center|) * cos(omega t)`.
    Pulse {
        profile: Profile,
        center: [f64; 2],
        width: f64,
        amplitude: f64,
        omega: f64,
    },
    /// One cell field per time step; steps past the table are zero.
    Tabulated(Vec<Vec<f64>>),
}

impl Source {
    pub fn is_zero(&self) -> bool {
        matches!(self, Source::Zero)
    }

    /// Cell values at step `n` (time `t`); `None` when identically zero.
    pub fn eval(&self, grid: &Grid, n: usize, t: f64) -> Option<Vec<f64>> {
        match self {
            Source::Zero => None,
            Source::Pulse {
                profile,
                center,
                width,
                amplitude,
                omega,
            } => {
                let a = amplitude * (omega * t).cos();
                Some(
                    (0..grid.n_cells())
                        .map(|c| {
                            let p = grid.cell_center(c);
                            let r = if grid.dim() == 1 {
                                (p[0] - center[0]).abs()
                            } else {
                                (p[0] - center[0]).hypot(p[1] - center[1])
                            };
                            a * profile.eval(r, *width)
                        })
                        .collect(),
                )
            }
            Source::Tabulated(rows) => rows.get(n).cloned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub grid: Grid,
    pub initial: State,
    pub source: Source,
    pub lambda: f64,
    pub eps: f64,
    pub t_final: f64,
    pub cfl: f64,
    pub bc: BcMode,
}

impl Scenario {
    pub fn new(grid: Grid, data: &InitialData) -> Self {
        let initial = data.build(&grid);
        Scenario {
            grid,
            initial,
            source: Source::Zero,
            lambda: 1.0,
            eps: 0.0,
            t_final: 1.0,
            cfl: 0.9,
            bc: BcMode::Impedance,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }
    pub fn with_t_final(mut self, t: f64) -> Self {
        self.t_final = t;
        self
    }
    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }
    pub fn with_bc(mut self, bc: BcMode) -> Self {
        self.bc = bc;
        self
    }
    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("lambda", self.lambda)?;
        ensure_non_negative("eps", self.eps)?;
        ensure_positive("t_final", self.t_final)?;
        ensure_positive("cfl", self.cfl)?;
        if self.cfl > 1.0 {
            return Err(Error::InvalidScenario(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        self.initial.validate(&self.grid)?;
        if let Source::Tabulated(rows) = &self.source {
            for row in rows {
                self.grid.check_cells("f", row)?;
            }
        }
        Ok(())
    }

    /// Largest stable step, see [`max_time_step`].
    pub fn max_time_step(&self) -> f64 {
        max_time_step(&self.grid, self.cfl, self.eps)
    }

    /// Uniform step that lands exactly on `t_final`.
    pub fn time_step(&self) -> (f64, usize) {
        let dt_max = self.max_time_step();
        let n = (self.t_final / dt_max * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (self.t_final / n as f64, n)
    }
}

/// `cfl` times the von Neumann limit of the explicit scheme,
/// `n (dt^2 + 2 eps dt) <= h^2`. It is `h / sqrt(n)` for `eps = 0` and tends
/// to `h^2 / (2 n eps)` for large `eps`; both separate limits hold, but their
/// minimum alone is not stable when the two are comparable.
pub fn max_time_step(grid: &Grid, cfl: f64, eps: f64) -> f64 {
    let n = grid.dim() as f64;
    let h = grid.h();
    let eps = eps.max(0.0);
    cfl * (h * h / n / ((eps * eps + h * h / n).sqrt() + eps))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckItem {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub items: Vec<CheckItem>,
}

impl CompatibilityReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckItem> {
        self.items.iter().find(|i| !i.pass)
    }
}

impl fmt::Display for CompatibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            writeln!(
                f,
                "{:<24} {:>12.3e} (tol {:.1e}) {}",
                item.name,
                item.value,
                item.tolerance,
                if item.pass { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

pub const COMPAT_TOL: f64 = 1e-10;

/// Itemized check of `grad u0 = sigma0 + p0`, the boundary relation and
/// `|sigma0| <= 1`. For the hard modes the boundary item requires
/// `sigma0.nu = v0 = 0`.
pub fn check_compatibility(s: &Scenario) -> Result<CompatibilityReport> {
    let grid = &s.grid;
    let st = &s.initial;
    st.validate(grid)?;

    let g = grad(grid, &st.u)?;
    let mut decomposition: f64 = 0.0;
    for f in 0..grid.n_xfaces() {
        if !grid.is_boundary_xface(f) {
            decomposition = decomposition.max((g.x[f] - st.sigma.x[f] - st.p.x[f]).abs());
        }
    }
    for f in 0..grid.n_yfaces() {
        if !grid.is_boundary_yface(f) {
            decomposition = decomposition.max((g.y[f] - st.sigma.y[f] - st.p.y[f]).abs());
        }
    }

    let mut boundary: f64 = 0.0;
    for bf in grid.boundary_faces() {
        let sn = st.sigma.get(bf.axis, bf.face) * bf.normal;
        let v = st.v[bf.cell];
        let r = match s.bc {
            BcMode::Impedance => (sn + v / s.lambda).abs(),
            BcMode::Dirichlet | BcMode::Neumann => sn.abs().max(v.abs()),
        };
        boundary = boundary.max(r);
    }

    let constraint = max_stress_norm(grid, &st.sigma) - 1.0;

    Ok(CompatibilityReport {
        items: vec![
            CheckItem {
                name: "additive decomposition",
                value: decomposition,
                tolerance: COMPAT_TOL,
                pass: decomposition <= COMPAT_TOL,
            },
            CheckItem {
                name: "boundary relation",
                value: boundary,
                tolerance: COMPAT_TOL,
                pass: boundary <= COMPAT_TOL,
            },
            CheckItem {
                name: "stress constraint",
                value: constraint.max(0.0),
                tolerance: 1e-12,
                pass: constraint <= 1e-12,
            },
        ],
    })
}

/// Largest `|sigma|` over projection groups and boundary faces.
pub fn max_stress_norm(grid: &Grid, sigma: &FaceField) -> f64 {
    let groups = grid.plastic_groups().into_iter().map(|g| match g {
        FaceGroup::Single(axis, f) => sigma.get(axis, f).abs(),
        FaceGroup::Pair { x, y } => sigma.x[x].hypot(sigma.y[y]),
    });
    let bnd = grid
        .boundary_faces()
        .into_iter()
        .map(|b| sigma.get(b.axis, b.face).abs());
    groups.chain(bnd).fold(0.0, f64::max)
}

/// `g_eps = eps * (grad v0) . nu` on each boundary face, using the nearest
/// interior face gradient along the face normal.
pub fn boundary_viscous_source(grid: &Grid, v0: &[f64], eps: f64) -> Vec<f64> {
    let h = grid.h();
    grid.boundary_faces()
        .iter()
        .map(|bf| {
            let (i, j) = grid.cell_ij(bf.cell);
            let inner = match (bf.axis, bf.normal > 0.0) {
                (Axis::X, true) => grid.cell(i - 1, j),
                (Axis::X, false) => grid.cell(i + 1, j),
                (Axis::Y, true) => grid.cell(i, j - 1),
                (Axis::Y, false) => grid.cell(i, j + 1),
            };
            eps * (v0[bf.cell] - v0[inner]) / h
        })
        .collect()
}
