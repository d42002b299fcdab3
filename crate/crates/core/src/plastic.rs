//! Perfectly plastic model (`eps = 0`): exact radial return, the relaxed
//! boundary condition `sigma.nu + psi'_lambda(v) = 0`, and the drivers for
//! the vanishing-viscosity and impedance-limit studies.

use rayon::prelude::*;

use crate::error::{ensure_positive, Error, Result};
use crate::grid::{Grid, State};
use crate::scenario::{boundary_viscous_source, BcMode, Scenario};
use crate::solver::{
    check_cfl, check_finite, drive, l2_distance, lockstep, Closure, Correction, Engine, RunOptions,
    StepStats, Trajectory,
};
use crate::viscoplastic::require_compatible;

pub fn step_plastic(
    grid: &Grid,
    state: &State,
    dt: f64,
    lambda: f64,
    bc: BcMode,
    f: Option<&[f64]>,
) -> Result<(State, StepStats)> {
    check_cfl(grid, dt, 0.0)?;
    state.validate(grid)?;
    if let Some(f) = f {
        grid.check_cells("f", f)?;
    }
    let closure = Closure::for_plastic(bc, lambda)?;
    let mut next = state.clone();
    let stats = Engine::new(grid).advance(&mut next, dt, Correction::Projection, &closure, f);
    check_finite(&next, 1)?;
    Ok((next, stats))
}

pub fn run_plastic(scenario: &Scenario) -> Result<Trajectory> {
    run_plastic_with(scenario, RunOptions::default())
}

pub fn run_plastic_with(scenario: &Scenario, opts: RunOptions) -> Result<Trajectory> {
    if scenario.eps != 0.0 {
        return Err(Error::InvalidScenario(format!(
            "the perfectly plastic solver needs eps = 0, got {}",
            scenario.eps
        )));
    }
    require_compatible(scenario)?;
    drive(
        scenario,
        Correction::Projection,
        Closure::for_plastic(scenario.bc, scenario.lambda)?,
        opts,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscosityRow {
    pub eps: f64,
    /// `sup_t ||v_eps - v_0||_2`
    pub dev_v: f64,
    /// `sup_t ||sigma_eps - sigma_0||_2`
    pub dev_sigma: f64,
    /// `||sqrt(eps) grad v_eps||` in `L^2(0, T; L^2)`
    pub viscous_gradient: f64,
    /// `sup_t ||(v^{n+1} - v^n) / dt||_2`
    pub accel_sup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViscosityTable {
    pub dt: f64,
    pub steps: usize,
    pub rows: Vec<ViscosityRow>,
}

impl ViscosityTable {
    pub const HEADER: [&'static str; 5] =
        ["eps", "dev_v", "dev_sigma", "viscous_gradient", "accel_sup"];

    /// True when both deviation columns strictly decrease down the table.
    pub fn deviations_decrease(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].dev_v < w[0].dev_v && w[1].dev_sigma < w[0].dev_sigma)
    }
}

/// Runs the `eps = 0` scheme and the visco-plastic scheme for each `eps`
/// with a common time step, and tabulates the deviations.
pub fn run_vanishing_viscosity(
    scenario: &Scenario,
    eps_sequence: &[f64],
) -> Result<ViscosityTable> {
    if eps_sequence.is_empty() {
        return Err(Error::InvalidScenario("empty viscosity sequence".into()));
    }
    for w in eps_sequence.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::InvalidScenario(
                "viscosity sequence must be strictly decreasing".into(),
            ));
        }
    }
    if let Some(&e) = eps_sequence.iter().find(|&&e| e.is_nan() || e < 1e-4) {
        return Err(Error::InvalidScenario(format!(
            "viscosities must be at least 1e-4, got {e}"
        )));
    }
    let base = scenario.clone().with_eps(0.0).with_bc(BcMode::Impedance);
    require_compatible(&base)?;
    let step = base.clone().with_eps(eps_sequence[0]).time_step();
    let reference = Closure::for_plastic(BcMode::Impedance, base.lambda)?;
    let grid = &base.grid;

    let rows = eps_sequence
        .par_iter()
        .map(|&eps| {
            let closure = Closure::Linear {
                lambda: base.lambda,
                g: boundary_viscous_source(grid, &base.initial.v, eps),
            };
            let mut row = ViscosityRow {
                eps,
                dev_v: 0.0,
                dev_sigma: 0.0,
                viscous_gradient: 0.0,
                accel_sup: 0.0,
            };
            let mut grad_sq = 0.0;
            lockstep(
                &base,
                step,
                (Correction::Perzyna { eps }, &closure),
                (Correction::Projection, &reference),
                |_, a, b, sa, _| {
                    let (dv, ds) = l2_distance(grid, a, b);
                    row.dev_v = row.dev_v.max(dv);
                    row.dev_sigma = row.dev_sigma.max(ds);
                    grad_sq += step.0 * sa.grad_v_sq;
                    row.accel_sup = row.accel_sup.max(sa.accel_norm);
                },
            )?;
            row.viscous_gradient = (eps * grad_sq).sqrt();
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ViscosityTable {
        dt: step.0,
        steps: step.1,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMode {
    /// `lambda -> 0`
    Dirichlet,
    /// `lambda -> infinity`
    Neumann,
}

impl LimitMode {
    pub fn bc(self) -> BcMode {
        match self {
            LimitMode::Dirichlet => BcMode::Dirichlet,
            LimitMode::Neumann => BcMode::Neumann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRow {
    pub lambda: f64,
    /// `sup_t (||v_l - v||^2 + ||sigma_l - sigma||^2)^(1/2)`
    pub gap: f64,
    /// `sup_t` of the boundary `L^2` norm of `sigma_l . nu`
    pub boundary_traction: f64,
    /// `sup_t max | |v| + (sigma.nu) v |` over boundary faces of the impedance run
    pub boundary_flow: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitTable {
    pub mode: LimitMode,
    pub dt: f64,
    pub steps: usize,
    pub rows: Vec<LimitRow>,
}

impl LimitTable {
    pub const HEADER: [&'static str; 4] = ["lambda", "gap", "boundary_traction", "boundary_flow"];

    pub fn gaps_decrease(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].gap < w[0].gap)
    }
}

/// Compares relaxed-impedance runs along `lambda_sequence` with the hard
/// boundary run of `mode`.
pub fn run_limit_study(
    scenario: &Scenario,
    lambda_sequence: &[f64],
    mode: LimitMode,
) -> Result<LimitTable> {
    if lambda_sequence.is_empty() {
        return Err(Error::InvalidScenario("empty impedance sequence".into()));
    }
    for &l in lambda_sequence {
        ensure_positive("lambda", l)?;
    }
    let ordered = lambda_sequence.windows(2).all(|w| match mode {
        LimitMode::Dirichlet => w[1] < w[0],
        LimitMode::Neumann => w[1] > w[0],
    });
    if !ordered {
        return Err(Error::InvalidScenario(format!(
            "impedance sequence must be strictly {} for the {:?} limit",
            if mode == LimitMode::Dirichlet {
                "decreasing"
            } else {
                "increasing"
            },
            mode
        )));
    }
    let base = scenario.clone().with_eps(0.0).with_bc(mode.bc());
    let grid = &base.grid;
    let mut edge: f64 = 0.0;
    for bf in grid.boundary_faces() {
        edge = edge
            .max(base.initial.sigma.get(bf.axis, bf.face).abs())
            .max(base.initial.v[bf.cell].abs());
    }
    if edge > 1e-10 {
        return Err(Error::Incompatible(format!(
            "limit studies need sigma0.nu = v0 = 0 on the boundary (found {edge:.3e})"
        )));
    }
    require_compatible(&base)?;
    let step = base.time_step();
    let hard = Closure::for_plastic(mode.bc(), 1.0)?;
    let area = grid.face_area();
    let bfaces = grid.boundary_faces();

    let rows = lambda_sequence
        .par_iter()
        .map(|&lambda| {
            let closure = Closure::for_plastic(BcMode::Impedance, lambda)?;
            let mut row = LimitRow {
                lambda,
                gap: 0.0,
                boundary_traction: 0.0,
                boundary_flow: 0.0,
            };
            lockstep(
                &base,
                step,
                (Correction::Projection, &closure),
                (Correction::Projection, &hard),
                |_, a, b, _, _| {
                    let (dv, ds) = l2_distance(grid, a, b);
                    row.gap = row.gap.max(dv.hypot(ds));
                    let mut trac = 0.0;
                    for bf in &bfaces {
                        let sn = a.sigma.get(bf.axis, bf.face) * bf.normal;
                        let v = a.v[bf.cell];
                        trac += area * sn * sn;
                        row.boundary_flow = row.boundary_flow.max((v.abs() + sn * v).abs());
                    }
                    row.boundary_traction = row.boundary_traction.max(trac.sqrt());
                },
            )?;
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitTable {
        mode,
        dt: step.0,
        steps: step.1,
        rows,
    })
}
