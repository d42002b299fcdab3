//! Discrete Kato comparison between two trajectories on the same grid:
//!
//! ```text
//! int int |W|^2 phi_t + int |W0|^2 phi(0) - 2 int int dsigma . grad phi dv
//!   + 2 int int df dv phi  >=  2 lambda int int_bd (psi'(v1) - psi'(v2))^2 phi
//! ```
//!
//! with `W = U1 - U2`. The right side is dropped for the hard boundary modes.

use crate::constitutive::PsiFamily;
use crate::diagnostics::quadrature::{axis_index, face_samples, time_neighbours, time_weights};
use crate::diagnostics::report::{Location, Tolerance, VerificationReport};
use crate::diagnostics::testfn::TestFunction;
use crate::error::{Error, Result};
use crate::grid::Axis;
use crate::scenario::BcMode;
use crate::solver::Trajectory;

/// Default budget on the normalized defect.
pub const KATO_TOL: Tolerance = Tolerance::new(1.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KatoTerms {
    pub time: f64,
    pub initial: f64,
    pub flux: f64,
    pub source: f64,
    /// Right side, `>= 0`.
    pub boundary: f64,
}

impl KatoTerms {
    /// Left side minus right side.
    pub fn slack(&self) -> f64 {
        self.time + self.initial + self.flux + self.source - self.boundary
    }

    pub fn scale(&self) -> f64 {
        self.time.abs()
            + self.initial.abs()
            + self.flux.abs()
            + self.source.abs()
            + self.boundary.abs()
    }
}

fn compatible(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::Incompatible(
            "trajectories live on different grids".into(),
        ));
    }
    if a.dt != b.dt || a.steps != b.steps || a.snapshots.len() != b.snapshots.len() {
        return Err(Error::Incompatible(
            "trajectories use different time stepping".into(),
        ));
    }
    if a.snapshots
        .iter()
        .zip(&b.snapshots)
        .any(|(x, y)| x.step != y.step)
    {
        return Err(Error::Incompatible("snapshot steps differ".into()));
    }
    if a.bc != b.bc || a.lambda != b.lambda {
        return Err(Error::Incompatible("boundary conditions differ".into()));
    }
    Ok(())
}

pub fn kato_terms(a: &Trajectory, b: &Trajectory, phi: &TestFunction) -> Result<KatoTerms> {
    compatible(a, b)?;
    let grid = &a.grid;
    let dim = grid.dim();
    let vol = grid.cell_volume();
    let area = grid.face_area();
    let faces = face_samples(grid);
    let bfaces = grid.boundary_faces();
    let weights = time_weights(&a.snapshots);
    let psi = match a.bc {
        BcMode::Impedance => Some(PsiFamily::new(a.lambda)?),
        _ => None,
    };
    let mut t = KatoTerms {
        time: 0.0,
        initial: 0.0,
        flux: 0.0,
        source: 0.0,
        boundary: 0.0,
    };
    for (n, ((sa, sb), &w)) in a
        .snapshots
        .iter()
        .zip(&b.snapshots)
        .zip(&weights)
        .enumerate()
    {
        let (t_lo, t_hi) = time_neighbours(&a.snapshots, n);
        let dphi = |x: [f64; 2]| 0.5 * (phi.phi(x, t_hi, dim) - phi.phi(x, t_lo, dim));
        let (ua, ub) = (&sa.state, &sb.state);
        let time = sa.t;
        let fa = a.source_at(sa);
        let fb = b.source_at(sb);
        let dv: Vec<f64> = ua.v.iter().zip(&ub.v).map(|(x, y)| x - y).collect();
        for (c, d) in dv.iter().enumerate() {
            let jet = phi.jet(grid.cell_center(c), time, dim);
            t.time += vol * d * d * dphi(grid.cell_center(c));
            let df = fa.as_ref().map_or(0.0, |f| f[c]) - fb.as_ref().map_or(0.0, |f| f[c]);
            t.source += 2.0 * w * vol * df * d * jet.phi;
        }
        for fs in &faces {
            let jet = phi.jet(fs.center, time, dim);
            let ds = ua.sigma.get(fs.axis, fs.index) - ub.sigma.get(fs.axis, fs.index);
            t.time += fs.weight * ds * ds * dphi(fs.center);
            t.flux -= 2.0 * w * fs.weight * ds * jet.grad[axis_index(fs.axis)] * fs.v_mean(&dv);
        }
        if let Some(psi) = &psi {
            for bf in &bfaces {
                let center = match bf.axis {
                    Axis::X => grid.xface_center(bf.face),
                    Axis::Y => grid.yface_center(bf.face),
                };
                let d = psi.psi_prime(ua.v[bf.cell]) - psi.psi_prime(ub.v[bf.cell]);
                t.boundary += 2.0 * a.lambda * w * area * d * d * phi.phi(center, time, dim);
            }
        }
    }
    let (s0a, s0b) = (&a.snapshots[0], &b.snapshots[0]);
    for c in 0..grid.n_cells() {
        let d = s0a.state.v[c] - s0b.state.v[c];
        t.initial += vol * d * d * phi.phi(grid.cell_center(c), s0a.t, dim);
    }
    for fs in &faces {
        let d = s0a.state.sigma.get(fs.axis, fs.index) - s0b.state.sigma.get(fs.axis, fs.index);
        t.initial += fs.weight * d * d * phi.phi(fs.center, s0a.t, dim);
    }
    Ok(t)
}

/// Reports the normalized defect `max(0, -slack) / scale`.
pub fn kato_check(
    a: &Trajectory,
    b: &Trajectory,
    phi: &TestFunction,
    tol: Tolerance,
) -> Result<VerificationReport> {
    let terms = kato_terms(a, b, phi)?;
    let scale = terms.scale();
    let defect = if scale == 0.0 {
        0.0
    } else {
        -terms.slack() / scale
    };
    Ok(VerificationReport::new(
        "kato",
        defect,
        Location {
            phi: Some(phi.to_string()),
            ..Location::default()
        },
        tol.eval(a.dt, a.grid.h()),
    ))
}
