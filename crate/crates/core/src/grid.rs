//! Uniform staggered grids in 1D and 2D.
//!
//! Scalars (`u`, `v`) live at cell centers; each stress/plastic-strain
//! component lives on the faces normal to its axis (x-faces carry the x
//! component, y-faces the y component). Faces on the domain boundary carry the
//! boundary traction `sigma . nu` oriented along the axis.

use crate::error::{ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    nx: usize,
    ny: usize,
    h: f64,
    origin: [f64; 2],
}

/// A face on the domain boundary together with its interior neighbour cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace {
    pub axis: Axis,
    pub face: usize,
    pub cell: usize,
    /// Outer normal component along `axis` (+1 or -1).
    pub normal: f64,
}

/// Faces whose stress components are projected together onto the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceGroup {
    Single(Axis, usize),
    Pair { x: usize, y: usize },
}

impl Grid {
    pub fn new_1d(nx: usize, h: f64, x0: f64) -> Result<Self> {
        Grid::new(1, nx, 1, h, [x0, 0.0])
    }

    pub fn new_2d(nx: usize, ny: usize, h: f64, origin: [f64; 2]) -> Result<Self> {
        Grid::new(2, nx, ny, h, origin)
    }

    pub fn new(dim: usize, nx: usize, ny: usize, h: f64, origin: [f64; 2]) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        ensure_positive("h", h)?;
        let ny = if dim == 1 { 1 } else { ny };
        if nx < 3 || (dim == 2 && ny < 3) {
            return Err(Error::InvalidScenario(format!(
                "grid needs at least 3 cells per axis, got {nx}x{ny}"
            )));
        }
        Ok(Grid {
            dim,
            nx,
            ny,
            h,
            origin,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }
    pub fn n_xfaces(&self) -> usize {
        (self.nx + 1) * self.ny
    }
    pub fn n_yfaces(&self) -> usize {
        if self.dim == 2 {
            self.nx * (self.ny + 1)
        } else {
            0
        }
    }

    /// Cell volume `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Boundary measure of one face, `h^{n-1}`.
    pub fn face_area(&self) -> f64 {
        self.h.powi(self.dim as i32 - 1)
    }

    /// Domain extent per axis.
    pub fn extent(&self) -> [f64; 2] {
        [self.nx as f64 * self.h, self.ny as f64 * self.h]
    }

    pub fn cell(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
    pub fn xface(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }
    pub fn yface(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_ij(&self, c: usize) -> (usize, usize) {
        (c % self.nx, c / self.nx)
    }
    pub fn xface_ij(&self, f: usize) -> (usize, usize) {
        (f % (self.nx + 1), f / (self.nx + 1))
    }
    pub fn yface_ij(&self, f: usize) -> (usize, usize) {
        (f % self.nx, f / self.nx)
    }

    pub fn cell_center(&self, c: usize) -> [f64; 2] {
        let (i, j) = self.cell_ij(c);
        let y = if self.dim == 2 {
            self.origin[1] + (j as f64 + 0.5) * self.h
        } else {
            0.0
        };
        [self.origin[0] + (i as f64 + 0.5) * self.h, y]
    }

    pub fn xface_center(&self, f: usize) -> [f64; 2] {
        let (i, j) = self.xface_ij(f);
        let y = if self.dim == 2 {
            self.origin[1] + (j as f64 + 0.5) * self.h
        } else {
            0.0
        };
        [self.origin[0] + i as f64 * self.h, y]
    }

    pub fn yface_center(&self, f: usize) -> [f64; 2] {
        let (i, j) = self.yface_ij(f);
        [
            self.origin[0] + (i as f64 + 0.5) * self.h,
            self.origin[1] + j as f64 * self.h,
        ]
    }

    pub fn is_boundary_xface(&self, f: usize) -> bool {
        let (i, _) = self.xface_ij(f);
        i == 0 || i == self.nx
    }

    pub fn is_boundary_yface(&self, f: usize) -> bool {
        let (_, j) = self.yface_ij(f);
        j == 0 || j == self.ny
    }

    /// The two cells adjacent to an x-face (left, right); `None` outside the domain.
    pub fn xface_cells(&self, f: usize) -> (Option<usize>, Option<usize>) {
        let (i, j) = self.xface_ij(f);
        let left = (i > 0).then(|| self.cell(i - 1, j));
        let right = (i < self.nx).then(|| self.cell(i, j));
        (left, right)
    }

    pub fn yface_cells(&self, f: usize) -> (Option<usize>, Option<usize>) {
        let (i, j) = self.yface_ij(f);
        let below = (j > 0).then(|| self.cell(i, j - 1));
        let above = (j < self.ny).then(|| self.cell(i, j));
        (below, above)
    }

    pub fn boundary_faces(&self) -> Vec<BoundaryFace> {
        let mut out = Vec::new();
        for j in 0..self.ny {
            out.push(BoundaryFace {
                axis: Axis::X,
                face: self.xface(0, j),
                cell: self.cell(0, j),
                normal: -1.0,
            });
            out.push(BoundaryFace {
                axis: Axis::X,
                face: self.xface(self.nx, j),
                cell: self.cell(self.nx - 1, j),
                normal: 1.0,
            });
        }
        if self.dim == 2 {
            for i in 0..self.nx {
                out.push(BoundaryFace {
                    axis: Axis::Y,
                    face: self.yface(i, 0),
                    cell: self.cell(i, 0),
                    normal: -1.0,
                });
                out.push(BoundaryFace {
                    axis: Axis::Y,
                    face: self.yface(i, self.ny),
                    cell: self.cell(i, self.ny - 1),
                    normal: 1.0,
                });
            }
        }
        out
    }

    /// Partition of the interior faces into projection groups. In 2D the
    /// x-face on the low side of cell `(i, j)` is paired with the y-face below
    /// it whenever both are interior; the remaining interior faces stand alone.
    pub fn plastic_groups(&self) -> Vec<FaceGroup> {
        let mut out = Vec::new();
        if self.dim == 1 {
            for i in 1..self.nx {
                out.push(FaceGroup::Single(Axis::X, self.xface(i, 0)));
            }
            return out;
        }
        for j in 0..self.ny {
            for i in 1..self.nx {
                let x = self.xface(i, j);
                if j >= 1 {
                    out.push(FaceGroup::Pair {
                        x,
                        y: self.yface(i, j),
                    });
                } else {
                    out.push(FaceGroup::Single(Axis::X, x));
                }
            }
        }
        for j in 1..self.ny {
            out.push(FaceGroup::Single(Axis::Y, self.yface(0, j)));
        }
        out
    }

    pub fn zero_cells(&self) -> Vec<f64> {
        vec![0.0; self.n_cells()]
    }

    pub fn zero_faces(&self) -> FaceField {
        FaceField {
            x: vec![0.0; self.n_xfaces()],
            y: vec![0.0; self.n_yfaces()],
        }
    }

    pub fn check_cells(&self, field: &'static str, u: &[f64]) -> Result<()> {
        if u.len() != self.n_cells() {
            return Err(Error::ShapeMismatch {
                field,
                expected: self.n_cells(),
                got: u.len(),
            });
        }
        Ok(())
    }

    pub fn check_faces(&self, field: &'static str, s: &FaceField) -> Result<()> {
        if s.x.len() != self.n_xfaces() {
            return Err(Error::ShapeMismatch {
                field,
                expected: self.n_xfaces(),
                got: s.x.len(),
            });
        }
        if s.y.len() != self.n_yfaces() {
            return Err(Error::ShapeMismatch {
                field,
                expected: self.n_yfaces(),
                got: s.y.len(),
            });
        }
        Ok(())
    }
}

/// One normal component per face.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl FaceField {
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.x.iter().chain(&self.y)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.x.iter_mut().chain(self.y.iter_mut())
    }

    pub fn get(&self, axis: Axis, f: usize) -> f64 {
        match axis {
            Axis::X => self.x[f],
            Axis::Y => self.y[f],
        }
    }

    pub fn set(&mut self, axis: Axis, f: usize, value: f64) {
        match axis {
            Axis::X => self.x[f] = value,
            Axis::Y => self.y[f] = value,
        }
    }

    pub fn scaled(&self, s: f64) -> FaceField {
        FaceField {
            x: self.x.iter().map(|a| a * s).collect(),
            y: self.y.iter().map(|a| a * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

/// Discrete state at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub sigma: FaceField,
    pub p: FaceField,
}

impl State {
    pub fn zeros(grid: &Grid) -> Self {
        State {
            u: grid.zero_cells(),
            v: grid.zero_cells(),
            sigma: grid.zero_faces(),
            p: grid.zero_faces(),
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        grid.check_cells("u", &self.u)?;
        grid.check_cells("v", &self.v)?;
        grid.check_faces("sigma", &self.sigma)?;
        grid.check_faces("p", &self.p)
    }

    /// Largest stress norm over the projection groups.
    pub fn max_group_stress(&self, grid: &Grid) -> f64 {
        grid.plastic_groups()
            .iter()
            .map(|g| match *g {
                FaceGroup::Single(axis, f) => self.sigma.get(axis, f).abs(),
                FaceGroup::Pair { x, y } => self.sigma.x[x].hypot(self.sigma.y[y]),
            })
            .fold(0.0, f64::max)
    }
}

/// Two-point face gradient on interior faces; boundary faces are zero.
pub fn grad(grid: &Grid, u: &[f64]) -> Result<FaceField> {
    grid.check_cells("u", u)?;
    let mut out = grid.zero_faces();
    grad_into(grid, u, &mut out);
    Ok(out)
}

pub(crate) fn grad_into(grid: &Grid, u: &[f64], out: &mut FaceField) {
    let inv_h = 1.0 / grid.h();
    let (nx, ny) = (grid.nx(), grid.ny());
    for j in 0..ny {
        let row = &u[j * nx..(j + 1) * nx];
        let base = grid.xface(0, j);
        out.x[base] = 0.0;
        out.x[base + nx] = 0.0;
        for i in 1..nx {
            out.x[base + i] = (row[i] - row[i - 1]) * inv_h;
        }
    }
    if grid.dim() == 2 {
        for i in 0..nx {
            out.y[grid.yface(i, 0)] = 0.0;
            out.y[grid.yface(i, ny)] = 0.0;
        }
        for j in 1..ny {
            for i in 0..nx {
                out.y[grid.yface(i, j)] = (u[grid.cell(i, j)] - u[grid.cell(i, j - 1)]) * inv_h;
            }
        }
    }
}

/// Cell divergence using every face, boundary faces included.
pub fn div(grid: &Grid, sigma: &FaceField) -> Result<Vec<f64>> {
    grid.check_faces("sigma", sigma)?;
    let mut out = grid.zero_cells();
    div_into(grid, sigma, &mut out, true);
    Ok(out)
}

/// Accumulates the divergence into `out`; with `include_boundary == false`
/// the boundary faces are treated as zero flux.
pub(crate) fn div_into(grid: &Grid, sigma: &FaceField, out: &mut [f64], include_boundary: bool) {
    let inv_h = 1.0 / grid.h();
    let (nx, ny) = (grid.nx(), grid.ny());
    for j in 0..ny {
        for i in 0..nx {
            let c = grid.cell(i, j);
            let mut west = sigma.x[grid.xface(i, j)];
            let mut east = sigma.x[grid.xface(i + 1, j)];
            if !include_boundary {
                if i == 0 {
                    west = 0.0;
                }
                if i + 1 == nx {
                    east = 0.0;
                }
            }
            let mut acc = east - west;
            if grid.dim() == 2 {
                let mut south = sigma.y[grid.yface(i, j)];
                let mut north = sigma.y[grid.yface(i, j + 1)];
                if !include_boundary {
                    if j == 0 {
                        south = 0.0;
                    }
                    if j + 1 == ny {
                        north = 0.0;
                    }
                }
                acc += north - south;
            }
            out[c] = acc * inv_h;
        }
    }
}

/// Axis-aligned box in physical coordinates (`hi >= lo` componentwise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl BBox {
    pub fn point(p: [f64; 2]) -> Self {
        BBox { lo: p, hi: p }
    }

    pub fn include(&mut self, p: [f64; 2]) {
        for a in 0..2 {
            self.lo[a] = self.lo[a].min(p[a]);
            self.hi[a] = self.hi[a].max(p[a]);
        }
    }

    pub fn dilate(&self, r: f64) -> BBox {
        BBox {
            lo: [self.lo[0] - r, self.lo[1] - r],
            hi: [self.hi[0] + r, self.hi[1] + r],
        }
    }

    /// Largest distance by which `other` sticks out of `self` along any axis.
    pub fn overshoot(&self, other: &BBox, dim: usize) -> f64 {
        (0..dim)
            .map(|a| {
                (self.lo[a] - other.lo[a])
                    .max(other.hi[a] - self.hi[a])
                    .max(0.0)
            })
            .fold(0.0, f64::max)
    }

    pub fn contains_box(&self, other: &BBox, dim: usize) -> bool {
        self.overshoot(other, dim) == 0.0
    }
}

/// Smallest box holding every cell with `|v| > threshold` and every face with
/// `|sigma| > threshold`.
pub fn support_bbox(grid: &Grid, state: &State, threshold: f64) -> Result<Option<BBox>> {
    ensure_positive("threshold", threshold)?;
    let mut bbox: Option<BBox> = None;
    let mut add = |p: [f64; 2]| match bbox.as_mut() {
        Some(b) => b.include(p),
        None => bbox = Some(BBox::point(p)),
    };
    for (c, &v) in state.v.iter().enumerate() {
        if v.abs() > threshold {
            add(grid.cell_center(c));
        }
    }
    for (f, &s) in state.sigma.x.iter().enumerate() {
        if s.abs() > threshold {
            add(grid.xface_center(f));
        }
    }
    for (f, &s) in state.sigma.y.iter().enumerate() {
        if s.abs() > threshold {
            add(grid.yface_center(f));
        }
    }
    Ok(bbox)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn grid_rejects_small_or_bad_input() {
        assert!(Grid::new_1d(2, 1.0, 0.0).is_err());
        assert!(Grid::new_1d(3, 0.0, 0.0).is_err());
        assert!(Grid::new_2d(3, 2, 1.0, [0.0; 2]).is_err());
        assert!(Grid::new(3, 4, 4, 1.0, [0.0; 2]).is_err());
    }

    #[test]
    fn grad_of_linear_field_1d() {
        let g = Grid::new_1d(3, 1.0, 0.0).unwrap();
        let s = grad(&g, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.x, vec![0.0, 1.0, 1.0, 0.0]);
        let s = grad(&g, &[4.0, 4.0, 4.0]).unwrap();
        assert!(s.iter().all(|&x| x == 0.0));
        assert!(matches!(
            grad(&g, &[1.0, 2.0]),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn grad_of_bilinear_field_is_exact() {
        let h = 0.25;
        let g = Grid::new_2d(4, 4, h, [0.0, 0.0]).unwrap();
        let u: Vec<f64> = (0..g.n_cells())
            .map(|c| {
                let [x, y] = g.cell_center(c);
                x * y
            })
            .collect();
        let s = grad(&g, &u).unwrap();
        // d/dx (xy) = y, exact at the face midpoint for the two-point difference.
        for f in 0..g.n_xfaces() {
            if g.is_boundary_xface(f) {
                assert_eq!(s.x[f], 0.0);
            } else {
                assert_abs_diff_eq!(s.x[f], g.xface_center(f)[1], epsilon = 1e-14);
            }
        }
        for f in 0..g.n_yfaces() {
            if g.is_boundary_yface(f) {
                assert_eq!(s.y[f], 0.0);
            } else {
                assert_abs_diff_eq!(s.y[f], g.yface_center(f)[0], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn div_examples() {
        let g = Grid::new_1d(5, 0.3, 1.0).unwrap();
        let mut s = g.zero_faces();
        s.x.iter_mut().for_each(|x| *x = 2.5);
        assert!(div(&g, &s).unwrap().iter().all(|&d| d == 0.0));
        for f in 0..g.n_xfaces() {
            s.x[f] = g.xface_center(f)[0];
        }
        for d in div(&g, &s).unwrap() {
            assert_abs_diff_eq!(d, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn plastic_groups_partition_interior_faces() {
        let g = Grid::new_2d(5, 4, 1.0, [0.0; 2]).unwrap();
        let mut xs = vec![0; g.n_xfaces()];
        let mut ys = vec![0; g.n_yfaces()];
        for grp in g.plastic_groups() {
            match grp {
                FaceGroup::Single(Axis::X, f) => xs[f] += 1,
                FaceGroup::Single(Axis::Y, f) => ys[f] += 1,
                FaceGroup::Pair { x, y } => {
                    xs[x] += 1;
                    ys[y] += 1;
                }
            }
        }
        for f in 0..g.n_xfaces() {
            assert_eq!(xs[f], usize::from(!g.is_boundary_xface(f)));
        }
        for f in 0..g.n_yfaces() {
            assert_eq!(ys[f], usize::from(!g.is_boundary_yface(f)));
        }
    }

    #[test]
    fn boundary_faces_have_outer_normals() {
        let g = Grid::new_2d(3, 4, 1.0, [0.0; 2]).unwrap();
        let b = g.boundary_faces();
        assert_eq!(b.len(), 2 * 4 + 2 * 3);
        for bf in b {
            let c = g.cell_center(bf.cell);
            let f = match bf.axis {
                Axis::X => g.xface_center(bf.face),
                Axis::Y => g.yface_center(bf.face),
            };
            let a = if bf.axis == Axis::X { 0 } else { 1 };
            assert_abs_diff_eq!(f[a] - c[a], 0.5 * bf.normal, epsilon = 1e-14);
        }
    }

    #[test]
    fn support_bbox_examples() {
        let g = Grid::new_2d(6, 5, 0.5, [0.0; 2]).unwrap();
        let mut s = State::zeros(&g);
        assert_eq!(support_bbox(&g, &s, 1e-12).unwrap(), None);
        let c = g.cell(2, 3);
        s.v[c] = 1.0;
        let b = support_bbox(&g, &s, 1e-12).unwrap().unwrap();
        assert_eq!(b, BBox::point(g.cell_center(c)));
        assert!(support_bbox(&g, &s, 0.0).is_err());
    }

    #[test]
    fn gaussian_support_covers_every_cell_above_threshold() {
        let g = Grid::new_1d(200, 0.01, 0.0).unwrap();
        let mut s = State::zeros(&g);
        for c in 0..g.n_cells() {
            let x = g.cell_center(c)[0];
            s.v[c] = (-(x - 1.0).powi(2) / 0.01).exp();
        }
        let thr = 1e-12;
        let b = support_bbox(&g, &s, thr).unwrap().unwrap();
        for c in 0..g.n_cells() {
            if s.v[c].abs() > thr {
                let x = g.cell_center(c)[0];
                assert!(b.lo[0] <= x && x <= b.hi[0]);
            }
        }
    }

    fn sbp_residual(g: &Grid, u: &[f64], s: &FaceField) -> f64 {
        let vol = g.cell_volume();
        let d = div(g, s).unwrap();
        let gu = grad(g, u).unwrap();
        let lhs: f64 = d.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() * vol;
        let rhs: f64 = -s.iter().zip(gu.iter()).map(|(a, b)| a * b).sum::<f64>() * vol;
        (lhs - rhs).abs()
    }

    proptest! {
        #[test]
        fn summation_by_parts_1d(
            vals in prop::collection::vec(-1.0f64..1.0, 10),
            faces in prop::collection::vec(-1.0f64..1.0, 13),
        ) {
            let g = Grid::new_1d(12, 0.1, 0.0).unwrap();
            let mut u = vec![0.0; 12];
            u[1..11].copy_from_slice(&vals);
            let s = FaceField { x: faces, y: vec![] };
            prop_assert!(sbp_residual(&g, &u, &s) <= 1e-12);
        }

        #[test]
        fn summation_by_parts_2d(
            vals in prop::collection::vec(-1.0f64..1.0, 9),
            sx in prop::collection::vec(-1.0f64..1.0, 30),
            sy in prop::collection::vec(-1.0f64..1.0, 30),
        ) {
            let g = Grid::new_2d(5, 5, 0.2, [0.0; 2]).unwrap();
            let mut u = g.zero_cells();
            let mut k = 0;
            for j in 1..4 {
                for i in 1..4 {
                    u[g.cell(i, j)] = vals[k];
                    k += 1;
                }
            }
            let s = FaceField { x: sx, y: sy };
            prop_assert!(sbp_residual(&g, &u, &s) <= 1e-12);
        }

        #[test]
        fn grad_vanishes_away_from_support(lo in 2usize..8, len in 1usize..5) {
            let g = Grid::new_1d(16, 0.5, 0.0).unwrap();
            let mut u = g.zero_cells();
            for c in lo..(lo + len) {
                u[c] = 1.0 + c as f64;
            }
            let gu = grad(&g, &u).unwrap();
            for f in 0..g.n_xfaces() {
                // faces lo..=lo+len touch the support
                if f < lo || f > lo + len {
                    prop_assert_eq!(gu.x[f], 0.0);
                }
            }
        }
    }
}
