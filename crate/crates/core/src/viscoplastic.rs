//! Elasto-visco-plastic model: Kelvin-Voigt viscosity `eps grad v`,
//! Perzyna flow `pdot = (sigma - P_B sigma) / eps` and the impedance
//! condition `(sigma + eps grad v).nu = g_eps - v / lambda`.

use crate::error::{ensure_positive, Error, Result};
use crate::grid::{Grid, State};
use crate::scenario::{boundary_viscous_source, check_compatibility, BcMode, Scenario};
use crate::solver::{
    check_cfl, check_finite, drive, Closure, Correction, Engine, RunOptions, StepStats, Trajectory,
};

#[derive(Debug, Clone, PartialEq)]
pub struct StepParams {
    pub dt: f64,
    pub eps: f64,
    pub lambda: f64,
    /// One value per boundary face, in `Grid::boundary_faces` order.
    pub g_eps: Vec<f64>,
}

impl StepParams {
    /// Parameters for `scenario` with `g_eps = eps (grad v0).nu`.
    pub fn from_scenario(scenario: &Scenario, dt: f64) -> Self {
        StepParams {
            dt,
            eps: scenario.eps,
            lambda: scenario.lambda,
            g_eps: boundary_viscous_source(&scenario.grid, &scenario.initial.v, scenario.eps),
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        ensure_positive("eps", self.eps)?;
        ensure_positive("lambda", self.lambda)?;
        let nb = grid.boundary_faces().len();
        if self.g_eps.len() != nb {
            return Err(Error::ShapeMismatch {
                field: "g_eps",
                expected: nb,
                got: self.g_eps.len(),
            });
        }
        check_cfl(grid, self.dt, self.eps)
    }

    pub(crate) fn closure(&self) -> Closure {
        Closure::Linear {
            lambda: self.lambda,
            g: self.g_eps.clone(),
        }
    }
}

/// One step of the splitting; returns the new state and the step's ledger
/// increments.
pub fn step_viscoplastic(
    grid: &Grid,
    state: &State,
    params: &StepParams,
    f: Option<&[f64]>,
) -> Result<(State, StepStats)> {
    params.validate(grid)?;
    state.validate(grid)?;
    if let Some(f) = f {
        grid.check_cells("f", f)?;
    }
    let mut next = state.clone();
    let mut engine = Engine::new(grid);
    let stats = engine.advance(
        &mut next,
        params.dt,
        Correction::Perzyna { eps: params.eps },
        &params.closure(),
        f,
    );
    check_finite(&next, 1)?;
    Ok((next, stats))
}

pub fn run_viscoplastic(scenario: &Scenario) -> Result<Trajectory> {
    run_viscoplastic_with(scenario, RunOptions::default())
}

pub fn run_viscoplastic_with(scenario: &Scenario, opts: RunOptions) -> Result<Trajectory> {
    ensure_positive("eps", scenario.eps)?;
    if scenario.bc != BcMode::Impedance {
        return Err(Error::InvalidScenario(format!(
            "the visco-plastic model uses the impedance condition, got `{}`",
            scenario.bc
        )));
    }
    require_compatible(scenario)?;
    let (dt, _) = scenario.time_step();
    let params = StepParams::from_scenario(scenario, dt);
    drive(
        scenario,
        Correction::Perzyna { eps: scenario.eps },
        params.closure(),
        opts,
    )
}

pub(crate) fn require_compatible(scenario: &Scenario) -> Result<()> {
    let report = check_compatibility(scenario)?;
    match report.first_failure() {
        None => Ok(()),
        Some(item) => Err(Error::Incompatible(format!(
            "{} violated by {:.3e}",
            item.name, item.value
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{InitialData, Loading, Profile};
    use approx::assert_abs_diff_eq;

    fn three_cells() -> Grid {
        Grid::new_1d(3, 1.0, 0.0).unwrap()
    }

    #[test]
    fn zero_state_is_fixed() {
        let g = three_cells();
        let p = StepParams {
            dt: 0.5,
            eps: 0.25,
            lambda: 1.0,
            g_eps: vec![0.0; 2],
        };
        let s = State::zeros(&g);
        let (next, stats) = step_viscoplastic(&g, &s, &p, None).unwrap();
        assert_eq!(next, s);
        assert_eq!(stats.plastic, 0.0);
    }

    #[test]
    fn golden_single_step() {
        let g = three_cells();
        let mut s = State::zeros(&g);
        s.v = vec![0.0, 1.0, 0.0];
        // g_eps on the left face: eps * (v0 - v1) / h = -0.25, same on the right
        let p = StepParams {
            dt: 0.5,
            eps: 0.25,
            lambda: 1.0,
            g_eps: boundary_viscous_source(&g, &s.v, 0.25),
        };
        assert_eq!(p.g_eps, vec![-0.25, -0.25]);
        let (n, stats) = step_viscoplastic(&g, &s, &p, None).unwrap();

        assert_eq!(n.sigma.x[1], 0.5);
        assert_eq!(n.sigma.x[2], -0.5);
        assert_eq!(n.p.x, vec![0.0; 4]);
        assert_eq!(n.u, vec![0.0, 0.5, 0.0]);
        // interior fluxes 0.75 and -0.75, so v* = (0.375, 0.25, 0.375);
        // boundary cells: w = (0.375 - 0.5 * 0.25) / 1.5
        assert_abs_diff_eq!(n.v[1], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(n.v[0], 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n.v[2], 1.0 / 6.0, epsilon = 1e-15);
        // total flux g - w / lambda, stored along the axis
        assert_abs_diff_eq!(n.sigma.x[0], 5.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n.sigma.x[3], -5.0 / 12.0, epsilon = 1e-15);
        assert!(!stats.plastic_active);
        // viscous dissipation dt * eps * |grad v|^2 = 0.5 * 0.25 * 2
        assert_abs_diff_eq!(stats.viscous, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn perzyna_branch_fires_above_yield() {
        let g = three_cells();
        let mut s = State::zeros(&g);
        s.sigma.x[1] = 1.0;
        s.v = vec![0.0, 1.0, 0.0];
        s.u = vec![0.0, 1.0, 1.0];
        let p = StepParams {
            dt: 0.5,
            eps: 0.25,
            lambda: 1.0,
            g_eps: vec![0.0; 2],
        };
        let (n, stats) = step_viscoplastic(&g, &s, &p, None).unwrap();
        // trial 1.5, r = 2: s = (1.5 + 2) / 3
        assert_abs_diff_eq!(n.sigma.x[1], 3.5 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n.p.x[1], 1.5 - 3.5 / 3.0, epsilon = 1e-14);
        assert!(stats.plastic_active);
        assert!(stats.conjugacy_residual < 1e-12);
        assert!(stats.decomposition_residual < 1e-12);
    }

    #[test]
    fn cfl_violations_are_rejected() {
        let g = three_cells();
        let s = State::zeros(&g);
        let mut p = StepParams {
            dt: 1.5,
            eps: 0.01,
            lambda: 1.0,
            g_eps: vec![0.0; 2],
        };
        assert!(matches!(
            step_viscoplastic(&g, &s, &p, None),
            Err(Error::Cfl { which: "wave", .. })
        ));
        p.dt = 0.5;
        p.eps = 2.0;
        assert!(matches!(
            step_viscoplastic(&g, &s, &p, None),
            Err(Error::Cfl {
                which: "diffusion",
                ..
            })
        ));
    }

    #[test]
    fn run_requires_positive_eps_and_impedance() {
        let g = Grid::new_1d(20, 0.05, 0.0).unwrap();
        let sc = Scenario::new(g, &InitialData::Zero);
        assert!(run_viscoplastic(&sc).is_err());
        let sc = sc.with_eps(0.1).with_bc(BcMode::Neumann);
        assert!(run_viscoplastic(&sc).is_err());
    }

    #[test]
    fn zero_data_gives_zero_ledger() {
        let g = Grid::new_1d(20, 0.05, 0.0).unwrap();
        let sc = Scenario::new(g, &InitialData::Zero)
            .with_eps(0.05)
            .with_t_final(0.2);
        let tr = run_viscoplastic(&sc).unwrap();
        for r in &tr.ledger.rows {
            assert_eq!(r.values()[1..], [0.0; 8]);
        }
    }

    #[test]
    fn initial_snapshot_is_the_scenario_data() {
        let g = Grid::new_1d(40, 0.025, 0.0).unwrap();
        let data = InitialData::Pulse {
            profile: Profile::Bump,
            loading: Loading::Velocity,
            center: [0.5, 0.0],
            width: 0.2,
            amplitude: 0.3,
        };
        let sc = Scenario::new(g, &data).with_eps(0.01).with_t_final(0.1);
        let tr = run_viscoplastic(&sc).unwrap();
        assert_eq!(tr.initial(), &sc.initial);
        let again = run_viscoplastic(&sc).unwrap();
        assert_eq!(tr, again);
    }
}
