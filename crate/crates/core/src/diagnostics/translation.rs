//! Difference quotients of the solution map under lattice translations of
//! the data, `r(s) = int_0^T* (||v_s - v||^2 + ||sigma_s - sigma||^2) dt / |s|^2`.

use rayon::prelude::*;

use crate::diagnostics::quadrature::time_weights;
use crate::error::{Error, Result};
use crate::grid::{support_bbox, BBox, FaceField, Grid, State};
use crate::plastic::run_plastic;
use crate::scenario::{Scenario, Source};
use crate::solver::{l2_distance, Trajectory};
use crate::viscoplastic::run_viscoplastic;

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationRow {
    /// Shift in cells along each axis.
    pub shift: [i64; 2],
    /// `|s|` in length units.
    pub length: f64,
    /// `int_0^T* ||U_s - U||^2 dt`
    pub distance_sq: f64,
    /// `distance_sq / |s|^2`; undefined for the zero shift.
    pub ratio: Option<f64>,
}

fn shift_cells(grid: &Grid, u: &[f64], s: [i64; 2]) -> Vec<f64> {
    let mut out = grid.zero_cells();
    for c in 0..grid.n_cells() {
        let (i, j) = grid.cell_ij(c);
        let (ti, tj) = (i as i64 + s[0], j as i64 + s[1]);
        if ti >= 0 && tj >= 0 && (ti as usize) < grid.nx() && (tj as usize) < grid.ny() {
            out[grid.cell(ti as usize, tj as usize)] = u[c];
        }
    }
    out
}

fn shift_faces(grid: &Grid, f: &FaceField, s: [i64; 2]) -> FaceField {
    let mut out = grid.zero_faces();
    for k in 0..grid.n_xfaces() {
        let (i, j) = grid.xface_ij(k);
        let (ti, tj) = (i as i64 + s[0], j as i64 + s[1]);
        if ti >= 0 && tj >= 0 && ti as usize <= grid.nx() && (tj as usize) < grid.ny() {
            out.x[grid.xface(ti as usize, tj as usize)] = f.x[k];
        }
    }
    for k in 0..grid.n_yfaces() {
        let (i, j) = grid.yface_ij(k);
        let (ti, tj) = (i as i64 + s[0], j as i64 + s[1]);
        if ti >= 0 && tj >= 0 && (ti as usize) < grid.nx() && tj as usize <= grid.ny() {
            out.y[grid.yface(ti as usize, tj as usize)] = f.y[k];
        }
    }
    out
}

/// The scenario with its data translated by `shift` cells.
pub fn shifted_scenario(scenario: &Scenario, shift: [i64; 2]) -> Scenario {
    let grid = &scenario.grid;
    let s = if grid.dim() == 1 {
        [shift[0], 0]
    } else {
        shift
    };
    let init = &scenario.initial;
    let mut initial = State {
        u: shift_cells(grid, &init.u, s),
        v: shift_cells(grid, &init.v, s),
        sigma: shift_faces(grid, &init.sigma, s),
        p: shift_faces(grid, &init.p, s),
    };
    if grid.dim() == 1 {
        // u need not vanish outside the support in 1D; integrate it again
        initial.u[0] = init.u[0];
        for i in 1..grid.nx() {
            initial.u[i] = initial.u[i - 1] + grid.h() * (initial.sigma.x[i] + initial.p.x[i]);
        }
    }
    let h = grid.h();
    let source = match &scenario.source {
        Source::Zero => Source::Zero,
        Source::Pulse {
            profile,
            center,
            width,
            amplitude,
            omega,
        } => Source::Pulse {
            profile: *profile,
            center: [center[0] + s[0] as f64 * h, center[1] + s[1] as f64 * h],
            width: *width,
            amplitude: *amplitude,
            omega: *omega,
        },
        Source::Tabulated(rows) => {
            Source::Tabulated(rows.iter().map(|r| shift_cells(grid, r, s)).collect())
        }
    };
    Scenario {
        initial,
        source,
        ..scenario.clone()
    }
}

fn run(scenario: &Scenario) -> Result<Trajectory> {
    if scenario.eps > 0.0 {
        run_viscoplastic(scenario)
    } else {
        run_plastic(scenario)
    }
}

fn data_support(scenario: &Scenario) -> Result<Option<BBox>> {
    let grid = &scenario.grid;
    let mut bbox = support_bbox(grid, &scenario.initial, f64::MIN_POSITIVE)?;
    let (dt, n) = scenario.time_step();
    for step in 0..n {
        if let Some(f) = scenario.source.eval(grid, step, step as f64 * dt) {
            for (c, fc) in f.iter().enumerate() {
                if *fc != 0.0 {
                    let p = grid.cell_center(c);
                    match bbox.as_mut() {
                        Some(b) => b.include(p),
                        None => bbox = Some(BBox::point(p)),
                    }
                }
            }
        }
    }
    Ok(bbox)
}

/// Runs the scenario (up to `t_star`) and each shifted copy and tabulates
/// the difference quotients. Every shifted support, dilated by
/// `t_star + 2h`, has to stay inside the domain.
pub fn translation_probe(
    scenario: &Scenario,
    shifts: &[[i64; 2]],
    t_star: f64,
) -> Result<Vec<TranslationRow>> {
    let base = scenario.clone().with_t_final(t_star);
    let grid = &base.grid;
    let h = grid.h();
    let dim = grid.dim();
    let o = grid.origin();
    let e = grid.extent();
    let domain = BBox {
        lo: [o[0], if dim == 2 { o[1] } else { 0.0 }],
        hi: [o[0] + e[0], if dim == 2 { o[1] + e[1] } else { 0.0 }],
    };
    let support = data_support(&base)?;
    for s in shifts {
        if let Some(b) = support {
            let moved = BBox {
                lo: [b.lo[0] + s[0] as f64 * h, b.lo[1] + s[1] as f64 * h],
                hi: [b.hi[0] + s[0] as f64 * h, b.hi[1] + s[1] as f64 * h],
            };
            let mut reach = b;
            reach.include(moved.lo);
            reach.include(moved.hi);
            if !domain.contains_box(&reach.dilate(t_star + 2.0 * h), dim) {
                return Err(Error::InvalidScenario(format!(
                    "shift ({}, {}) brings the propagation cone to the boundary before t = {t_star}",
                    s[0], s[1]
                )));
            }
        }
    }

    let reference = run(&base)?;
    let weights = time_weights(&reference.snapshots);
    shifts
        .par_iter()
        .map(|&s| {
            let shifted = run(&shifted_scenario(&base, s))?;
            let mut dist = 0.0;
            for ((a, b), w) in shifted
                .snapshots
                .iter()
                .zip(&reference.snapshots)
                .zip(&weights)
            {
                let (dv, ds) = l2_distance(grid, &a.state, &b.state);
                dist += w * (dv * dv + ds * ds);
            }
            let sy = if dim == 2 { s[1] } else { 0 };
            let length = h * ((s[0] * s[0] + sy * sy) as f64).sqrt();
            Ok(TranslationRow {
                shift: [s[0], sy],
                length,
                distance_sq: dist,
                ratio: (length > 0.0).then(|| dist / (length * length)),
            })
        })
        .collect()
}
