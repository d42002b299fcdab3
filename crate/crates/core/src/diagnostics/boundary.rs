//! Boundary behaviour of impedance runs, read off the boundary cells: the
//! traction saturates at `sigma.nu = -sign(v)` once `|v| > lambda`, and the
//! Fenchel equality `psi(v) + (lambda/2) |sigma.nu|^2 + (sigma.nu) v = 0`
//! holds face by face.
//!
//! Without sources the boundary cell cannot overtake `lambda`: its net force
//! `sigma.nu - sigma_adj.nu` is `<= 0` once the traction has saturated, and
//! the excess velocity is taken up by plastic slip next to the boundary.

use crate::constitutive::PsiFamily;
use crate::diagnostics::report::{Location, Tolerance, VerificationReport};
use crate::error::{Error, Result};
use crate::grid::Axis;
use crate::scenario::BcMode;
use crate::solver::Trajectory;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundarySummary {
    /// Boundary samples (snapshot, face) with `|v| > lambda`.
    pub saturated: usize,
    /// Largest boundary-cell `|v|` seen.
    pub max_velocity: f64,
    /// Largest `|sigma.nu + sign(v)|` over saturated samples.
    pub sign_error: f64,
    /// Largest `|psi(v) + (lambda/2) |sigma.nu|^2 + (sigma.nu) v|`; infinite
    /// when some traction leaves `[-1, 1]`.
    pub fenchel_residual: f64,
    /// Where the Fenchel residual is largest.
    pub worst: Location,
}

/// Scans every stored snapshot after the initial one.
pub fn boundary_summary(traj: &Trajectory) -> Result<BoundarySummary> {
    if traj.bc != BcMode::Impedance {
        return Err(Error::Incompatible(format!(
            "boundary relaxation concerns the impedance condition, got `{}`",
            traj.bc
        )));
    }
    let grid = &traj.grid;
    let psi = PsiFamily::new(traj.lambda)?;
    let lambda = traj.lambda;
    let bfaces = grid.boundary_faces();
    let mut out = BoundarySummary::default();
    for snap in traj.snapshots.iter().skip(1) {
        for bf in &bfaces {
            let v = snap.state.v[bf.cell];
            let s = snap.state.sigma.get(bf.axis, bf.face) * bf.normal;
            out.max_velocity = out.max_velocity.max(v.abs());
            if v.abs() > lambda {
                out.saturated += 1;
                out.sign_error = out.sign_error.max((s + v.signum()).abs());
            }
            let r = match psi.psi_star(-s).finite() {
                Some(_) => (psi.psi(v) + 0.5 * lambda * s * s + s * v).abs(),
                None => f64::INFINITY,
            };
            if r > out.fenchel_residual || out.worst.t.is_none() {
                out.fenchel_residual = out.fenchel_residual.max(r);
                let x = match bf.axis {
                    Axis::X => grid.xface_center(bf.face),
                    Axis::Y => grid.yface_center(bf.face),
                };
                out.worst = Location {
                    t: Some(snap.t),
                    x: Some(x),
                    ..Location::default()
                };
            }
        }
    }
    Ok(out)
}

/// Reports the Fenchel residual against `tol(dt, h)`.
pub fn boundary_check(traj: &Trajectory, tol: Tolerance) -> Result<VerificationReport> {
    let s = boundary_summary(traj)?;
    Ok(VerificationReport::new(
        "boundary",
        s.fenchel_residual,
        s.worst,
        tol.eval(traj.dt, traj.grid.h()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::plastic::run_plastic;
    use crate::scenario::{InitialData, Loading, Profile, Scenario, Source};

    #[test]
    fn driven_boundary_saturates_the_traction() {
        let g = Grid::new_1d(100, 0.01, 0.0).unwrap();
        let sc = Scenario::new(g, &InitialData::Zero)
            .with_lambda(0.2)
            .with_t_final(0.5)
            .with_source(Source::Pulse {
                profile: Profile::Bump,
                center: [0.97, 0.0],
                width: 0.1,
                amplitude: 20.0,
                omega: 0.0,
            });
        let tr = run_plastic(&sc).unwrap();
        let s = boundary_summary(&tr).unwrap();
        assert!(s.saturated > 0 && s.max_velocity > 1.01 * 0.2, "{s:?}");
        assert!(s.sign_error < 1e-12, "{s:?}");
        assert!(s.fenchel_residual < 1e-12, "{s:?}");
        assert!(boundary_check(&tr, Tolerance::new(1.0, 1.0)).unwrap().pass);
    }

    #[test]
    fn smooth_pulse_without_source_stays_below_lambda() {
        let g = Grid::new_1d(100, 0.01, 0.0).unwrap();
        let data = InitialData::Pulse {
            profile: Profile::Bump,
            loading: Loading::Right,
            center: [0.7, 0.0],
            width: 0.2,
            amplitude: 0.95,
        };
        let tr = run_plastic(&Scenario::new(g, &data).with_lambda(0.2)).unwrap();
        let s = boundary_summary(&tr).unwrap();
        assert_eq!(s.saturated, 0);
        assert!(
            s.max_velocity > 0.19 && s.max_velocity <= 0.2 + 1e-12,
            "{s:?}"
        );
    }

    #[test]
    fn forged_traction_breaks_the_equality() {
        let g = Grid::new_1d(50, 0.02, 0.0).unwrap();
        let data = InitialData::Pulse {
            profile: Profile::Bump,
            loading: Loading::Velocity,
            center: [0.5, 0.0],
            width: 0.2,
            amplitude: 0.5,
        };
        let mut tr = run_plastic(&Scenario::new(g, &data)).unwrap();
        for snap in tr.snapshots.iter_mut() {
            snap.state.sigma.x[0] *= 0.5;
        }
        let s = boundary_summary(&tr).unwrap();
        assert!(s.fenchel_residual > 1e-4, "{s:?}");
    }

    #[test]
    fn hard_modes_are_rejected() {
        let g = Grid::new_1d(10, 0.1, 0.0).unwrap();
        let sc = Scenario::new(g, &InitialData::Zero).with_bc(BcMode::Neumann);
        let tr = run_plastic(&sc).unwrap();
        assert!(boundary_summary(&tr).is_err());
    }
}
