//! Energy bookkeeping for both models.
//!
//! Columns follow the balance
//! `K(t) + E(t) + plastic + viscous + boundary flux + boundary psi = K(0) + E(0) + work`.

use crate::diagnostics::report::{Location, Tolerance, VerificationReport};
use crate::error::{Error, Result};
use crate::grid::{FaceField, FaceGroup, Grid, State};
use crate::solver::{StepStats, Trajectory};

/// `1/2 h^n sum v^2`
pub fn kinetic_energy(grid: &Grid, v: &[f64]) -> f64 {
    0.5 * grid.cell_volume() * v.iter().map(|x| x * x).sum::<f64>()
}

/// `1/2 h^n sum sigma^2` over interior faces.
pub fn elastic_energy(grid: &Grid, sigma: &FaceField) -> f64 {
    let s: f64 = grid
        .plastic_groups()
        .iter()
        .map(|g| match *g {
            FaceGroup::Single(axis, f) => sigma.get(axis, f).powi(2),
            FaceGroup::Pair { x, y } => sigma.x[x].powi(2) + sigma.y[y].powi(2),
        })
        .sum();
    0.5 * grid.cell_volume() * s
}

/// Energy conserved by the leapfrog pair in the linear regime:
/// `1/2 |v|^2 + 1/2 |sigma|^2 + dt/2 sigma . grad v`. Plastic corrections and
/// the boundary closure can only decrease it.
pub fn modified_energy(grid: &Grid, state: &State, dt: f64) -> f64 {
    let g = crate::grid::grad(grid, &state.v).expect("state matches grid");
    let cross: f64 = state.sigma.iter().zip(g.iter()).map(|(s, gv)| s * gv).sum();
    kinetic_energy(grid, &state.v)
        + elastic_energy(grid, &state.sigma)
        + 0.5 * dt * grid.cell_volume() * cross
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub kinetic: f64,
    pub elastic: f64,
    pub plastic_cum: f64,
    pub viscous_cum: f64,
    pub boundary_flux_cum: f64,
    pub boundary_psi_cum: f64,
    pub work_cum: f64,
    pub residual: f64,
}

impl LedgerRow {
    pub const HEADER: [&'static str; 9] = [
        "t",
        "kinetic",
        "elastic",
        "plastic_cum",
        "viscous_cum",
        "boundary_flux_cum",
        "boundary_psi_cum",
        "work_cum",
        "residual",
    ];

    pub fn values(&self) -> [f64; 9] {
        [
            self.t,
            self.kinetic,
            self.elastic,
            self.plastic_cum,
            self.viscous_cum,
            self.boundary_flux_cum,
            self.boundary_psi_cum,
            self.work_cum,
            self.residual,
        ]
    }

    pub fn from_values(v: [f64; 9]) -> Self {
        LedgerRow {
            t: v[0],
            kinetic: v[1],
            elastic: v[2],
            plastic_cum: v[3],
            viscous_cum: v[4],
            boundary_flux_cum: v[5],
            boundary_psi_cum: v[6],
            work_cum: v[7],
            residual: v[8],
        }
    }

    pub fn dissipated(&self) -> f64 {
        self.plastic_cum + self.viscous_cum + self.boundary_flux_cum + self.boundary_psi_cum
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
}

impl EnergyLedger {
    pub fn new(kinetic: f64, elastic: f64) -> Self {
        EnergyLedger {
            rows: vec![LedgerRow {
                kinetic,
                elastic,
                ..LedgerRow::default()
            }],
        }
    }

    pub fn initial_energy(&self) -> f64 {
        let r = &self.rows[0];
        r.kinetic + r.elastic
    }

    /// `E(0) + sup |W(t)|`, the size of the balance.
    pub fn energy_scale(&self) -> f64 {
        self.initial_energy()
            + self
                .rows
                .iter()
                .fold(0.0f64, |m, r| m.max(r.work_cum.abs()))
    }

    pub(crate) fn push(&mut self, t: f64, kinetic: f64, elastic: f64, s: &StepStats) {
        let e0 = self.initial_energy();
        let last = *self.rows.last().expect("ledger starts with a row");
        let mut row = LedgerRow {
            t,
            kinetic,
            elastic,
            plastic_cum: last.plastic_cum + s.plastic,
            viscous_cum: last.viscous_cum + s.viscous,
            boundary_flux_cum: last.boundary_flux_cum + s.boundary_flux,
            boundary_psi_cum: last.boundary_psi_cum + s.boundary_psi,
            work_cum: last.work_cum + s.work,
            residual: 0.0,
        };
        row.residual = kinetic + elastic + row.dissipated() - (e0 + row.work_cum);
        self.rows.push(row);
    }

    pub fn max_abs_residual(&self) -> (f64, f64) {
        self.rows
            .iter()
            .map(|r| (r.residual.abs(), r.t))
            .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a })
    }

    /// True when every dissipation column is non-decreasing.
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| {
            w[1].plastic_cum >= w[0].plastic_cum
                && w[1].viscous_cum >= w[0].viscous_cum
                && w[1].boundary_flux_cum >= w[0].boundary_flux_cum
                && w[1].boundary_psi_cum >= w[0].boundary_psi_cum
        })
    }
}

/// Default budget for the cumulative balance residual.
pub const ENERGY_TOL: Tolerance = Tolerance::new(2.0, 2.0);

/// Checks the ledger against the stored snapshots and reports the largest
/// balance residual over `[0, T]` relative to [`EnergyLedger::energy_scale`].
pub fn energy_audit(
    traj: &Trajectory,
    tol: Tolerance,
) -> Result<(EnergyLedger, VerificationReport)> {
    let ledger = &traj.ledger;
    if ledger.rows.len() != traj.steps + 1 {
        return Err(Error::Incompatible(format!(
            "ledger has {} rows for {} steps",
            ledger.rows.len(),
            traj.steps
        )));
    }
    for snap in &traj.snapshots {
        let row = &ledger.rows[snap.step];
        let k = kinetic_energy(&traj.grid, &snap.state.v);
        let e = elastic_energy(&traj.grid, &snap.state.sigma);
        let scale = 1.0 + k + e;
        if ((k - row.kinetic).abs() + (e - row.elastic).abs()) > 1e-12 * scale {
            return Err(Error::Incompatible(format!(
                "ledger row {} does not match the snapshot energies",
                snap.step
            )));
        }
    }
    let (worst, t) = ledger.max_abs_residual();
    let scale = ledger.energy_scale();
    let worst = if scale > 0.0 { worst / scale } else { worst };
    let mut report = VerificationReport::new(
        "energy",
        worst,
        Location {
            t: Some(t),
            ..Location::default()
        },
        tol.eval(traj.dt, traj.grid.h()),
    );
    if !ledger.monotone() {
        report.pass = false;
        report.name = "energy (non-monotone dissipation)".into();
    }
    Ok((ledger.clone(), report))
}
