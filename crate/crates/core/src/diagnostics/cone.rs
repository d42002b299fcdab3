use crate::diagnostics::report::{Location, VerificationReport};
use crate::error::{Error, Result};
use crate::grid::{support_bbox, BBox};
use crate::solver::Trajectory;

/// Absolute threshold `rel * max(|U0|, |f|)` and the box holding the
/// initial support and every stored source support above it. `None` when the
/// data vanish.
pub fn data_support(traj: &Trajectory, rel: f64) -> Result<Option<(BBox, f64)>> {
    let grid = &traj.grid;
    let u0 = traj.initial();
    let sources: Vec<Vec<f64>> = traj
        .snapshots
        .iter()
        .filter_map(|s| traj.source_at(s))
        .collect();
    let scale =
        u0.v.iter()
            .chain(u0.sigma.iter())
            .chain(sources.iter().flatten())
            .fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Ok(None);
    }
    let threshold = rel * scale;
    let mut bbox = support_bbox(grid, u0, threshold)?;
    for f in &sources {
        for (c, fc) in f.iter().enumerate() {
            if fc.abs() > threshold {
                let p = grid.cell_center(c);
                match bbox.as_mut() {
                    Some(b) => b.include(p),
                    None => bbox = Some(BBox::point(p)),
                }
            }
        }
    }
    Ok(bbox.map(|b| (b, threshold)))
}

/// Checks that the support of every stored state stays inside `initial`
/// dilated by `t + 2h`. The reported violation is the worst overshoot.
pub fn cone_check(traj: &Trajectory, initial: &BBox, threshold: f64) -> Result<VerificationReport> {
    let grid = &traj.grid;
    let dim = grid.dim();
    let h = grid.h();
    let first = &traj.snapshots[0];
    if let Some(b) = support_bbox(grid, &first.state, threshold)? {
        if !initial.contains_box(&b, dim) {
            return Err(Error::InvalidScenario(
                "initial data is not supported in the given box".into(),
            ));
        }
    }
    let mut worst = f64::NEG_INFINITY;
    let mut location = Location::default();
    for snap in &traj.snapshots {
        if let Some(f) = traj.source_at(snap) {
            for (c, fc) in f.iter().enumerate() {
                let p = grid.cell_center(c);
                if fc.abs() > threshold && !initial.contains_box(&BBox::point(p), dim) {
                    return Err(Error::InvalidScenario(format!(
                        "source is not supported in the given box (t = {})",
                        snap.t
                    )));
                }
            }
        }
        let allowed = initial.dilate(snap.t + 2.0 * h);
        let over = match support_bbox(grid, &snap.state, threshold)? {
            Some(b) => allowed.overshoot(&b, dim),
            None => 0.0,
        };
        if over > worst {
            worst = over;
            location = Location {
                t: Some(snap.t),
                ..Location::default()
            };
        }
    }
    Ok(VerificationReport::new(
        "cone",
        worst.max(0.0),
        location,
        0.0,
    ))
}
