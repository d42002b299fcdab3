//! Space-time quadrature over stored snapshots: midpoint in space (cells and
//! faces, boundary faces at half weight), trapezoid in time.

use crate::grid::{Axis, Grid};
use crate::solver::Snapshot;

/// Trapezoid weights for the snapshot times.
pub(crate) fn time_weights(snaps: &[Snapshot]) -> Vec<f64> {
    let m = snaps.len();
    if m < 2 {
        return vec![0.0; m];
    }
    (0..m)
        .map(|i| {
            let lo = snaps[i.saturating_sub(1)].t;
            let hi = snaps[(i + 1).min(m - 1)].t;
            0.5 * (hi - lo)
        })
        .collect()
}

/// Neighbouring snapshot times `(t[n-1], t[n+1])`, clamped at the ends.
/// Half the increment of `phi` across them is the weight of `phi_t` at
/// snapshot `n`: summation by parts of the trapezoid rule, exact for kinks of
/// `phi` in time.
pub(crate) fn time_neighbours(snaps: &[Snapshot], n: usize) -> (f64, f64) {
    let last = snaps.len() - 1;
    (snaps[n.saturating_sub(1)].t, snaps[(n + 1).min(last)].t)
}

/// One face seen by the quadrature.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FaceSample {
    pub axis: Axis,
    pub index: usize,
    pub center: [f64; 2],
    pub weight: f64,
    /// Velocity averaged onto the face (the neighbour value at the boundary).
    pub left: Option<usize>,
    pub right: Option<usize>,
}

impl FaceSample {
    pub fn v_mean(&self, v: &[f64]) -> f64 {
        match (self.left, self.right) {
            (Some(a), Some(b)) => 0.5 * (v[a] + v[b]),
            (Some(a), None) | (None, Some(a)) => v[a],
            (None, None) => 0.0,
        }
    }
}

pub(crate) fn face_samples(grid: &Grid) -> Vec<FaceSample> {
    let vol = grid.cell_volume();
    let mut out = Vec::with_capacity(grid.n_xfaces() + grid.n_yfaces());
    for f in 0..grid.n_xfaces() {
        let (l, r) = grid.xface_cells(f);
        out.push(FaceSample {
            axis: Axis::X,
            index: f,
            center: grid.xface_center(f),
            weight: if grid.is_boundary_xface(f) {
                0.5 * vol
            } else {
                vol
            },
            left: l,
            right: r,
        });
    }
    for f in 0..grid.n_yfaces() {
        let (l, r) = grid.yface_cells(f);
        out.push(FaceSample {
            axis: Axis::Y,
            index: f,
            center: grid.yface_center(f),
            weight: if grid.is_boundary_yface(f) {
                0.5 * vol
            } else {
                vol
            },
            left: l,
            right: r,
        });
    }
    out
}

pub(crate) fn axis_index(a: Axis) -> usize {
    match a {
        Axis::X => 0,
        Axis::Y => 1,
    }
}
