//! Discrete form of the dissipative inequality
//!
//! ```text
//! int int |U-k|^2 phi_t + sum_i A_i (U-k).(U-k) d_i phi + int |U0-k|^2 phi(0)
//!   + 2 int int F.(U-k) phi + int int_bd M k+ . k+ phi  >= 0
//! ```
//!
//! for constant states `k = (k, tau)` in `R x B`. Every term is a quadratic
//! polynomial in `(k, tau)`, so the trajectory is reduced once per test
//! function to a handful of moments and each constant state is then evaluated
//! in closed form. The flux term uses `A_nu W.W = -2 (sigma - tau).nu (v - k)`
//! and the boundary term uses `boundary_quadratic`.

use rayon::prelude::*;

use crate::algebra::{boundary_quadratic, ConstantState, Side};
use crate::diagnostics::quadrature::{axis_index, face_samples, time_neighbours, time_weights};
use crate::diagnostics::report::{Location, Tolerance, VerificationReport};
use crate::diagnostics::testfn::{TestFunction, TestFunctionDictionary};
use crate::error::{Error, Result};
use crate::scenario::{BcMode, Source};
use crate::solver::Trajectory;

/// Deterministic sample of constant states: `ks` crossed with `taus`.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaGrid {
    pub ks: Vec<f64>,
    pub taus: Vec<Vec<f64>>,
}

impl KappaGrid {
    /// Eight evenly spaced `k` in `[-k_max, k_max]`; `tau` on the rings of
    /// radii 0, 1/2 and 1 (the five points `-1, -1/2, 0, 1/2, 1` in 1D, eight
    /// directions per ring in 2D).
    pub fn standard(dim: usize, k_max: f64) -> Self {
        let ks = (0..8)
            .map(|i| -k_max + 2.0 * k_max * i as f64 / 7.0)
            .collect();
        let taus = if dim == 1 {
            [-1.0, -0.5, 0.0, 0.5, 1.0]
                .iter()
                .map(|&t| vec![t])
                .collect()
        } else {
            let mut t = vec![vec![0.0, 0.0]];
            for r in [0.5, 1.0] {
                for j in 0..8 {
                    let a = std::f64::consts::FRAC_PI_4 * j as f64;
                    t.push(vec![r * a.cos(), r * a.sin()]);
                }
            }
            t
        };
        KappaGrid { ks, taus }
    }

    /// `k_max = max(1, sup |v|)` over the stored snapshots.
    pub fn for_trajectory(traj: &Trajectory) -> Self {
        let vmax = traj
            .snapshots
            .iter()
            .flat_map(|s| s.state.v.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        KappaGrid::standard(traj.grid.dim(), vmax.max(1.0))
    }

    pub fn states(&self) -> Vec<ConstantState> {
        self.ks
            .iter()
            .flat_map(|&k| {
                self.taus
                    .iter()
                    .map(move |t| ConstantState::new(k, t.clone()))
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.ks.len() * self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Moments of one trajectory against one test function.
#[derive(Debug, Clone, Default)]
pub(crate) struct Moments {
    // cells against phi_t: sum phi_t, v phi_t, v^2 phi_t
    a: [f64; 3],
    // faces of each axis against phi_t
    b: [[f64; 3]; 2],
    // the same against |phi_t|
    a_abs: [f64; 3],
    b_abs: [[f64; 3]; 2],
    // flux moments per axis: d phi, d phi vbar, sigma d phi, sigma d phi vbar
    c: [[f64; 4]; 2],
    // initial cells and faces against phi(0)
    i: [f64; 3],
    j: [[f64; 3]; 2],
    // source: f phi, f v phi
    s: [f64; 2],
    // boundary weights per (axis, outward side)
    bnd: [[f64; 2]; 2],
}

/// The five terms of the inequality at one constant state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Terms {
    pub time: f64,
    pub flux: f64,
    pub initial: f64,
    pub source: f64,
    pub boundary: f64,
    /// The time term with `|phi_t|` in place of `phi_t`; bounds `|time|`.
    pub time_mass: f64,
}

impl Terms {
    pub fn total(&self) -> f64 {
        self.time + self.flux + self.initial + self.source + self.boundary
    }

    /// Sum of absolute terms, with the time term replaced by its mass so
    /// that cancellations inside `phi_t` cannot shrink the scale to round-off.
    pub fn scale(&self) -> f64 {
        self.time_mass
            + self.flux.abs()
            + self.initial.abs()
            + self.source.abs()
            + self.boundary.abs()
    }

    /// Total divided by the scale (zero when all terms vanish).
    pub fn margin(&self) -> f64 {
        let s = self.scale();
        if s == 0.0 {
            0.0
        } else {
            self.total() / s
        }
    }
}

fn quad(m: &[f64; 3], c: f64) -> f64 {
    // sum (x - c)^2 w = m2 - 2 c m1 + c^2 m0
    m[2] - 2.0 * c * m[1] + c * c * m[0]
}

impl Moments {
    pub(crate) fn collect(traj: &Trajectory, phi: &TestFunction, source: &Source) -> Moments {
        let grid = &traj.grid;
        let dim = grid.dim();
        let vol = grid.cell_volume();
        let area = grid.face_area();
        let faces = face_samples(grid);
        let bfaces = grid.boundary_faces();
        let weights = time_weights(&traj.snapshots);
        let mut m = Moments::default();

        for (n, (snap, &w)) in traj.snapshots.iter().zip(&weights).enumerate() {
            let st = &snap.state;
            let t = snap.t;
            let f = source.eval(grid, snap.step, t);
            let (t_lo, t_hi) = time_neighbours(&traj.snapshots, n);
            let dphi = |x: [f64; 2]| 0.5 * (phi.phi(x, t_hi, dim) - phi.phi(x, t_lo, dim));
            for c in 0..grid.n_cells() {
                let x = grid.cell_center(c);
                let jet = phi.jet(x, t, dim);
                let v = st.v[c];
                let q = vol * dphi(x);
                m.a[0] += q;
                m.a[1] += q * v;
                m.a[2] += q * v * v;
                let q = q.abs();
                m.a_abs[0] += q;
                m.a_abs[1] += q * v;
                m.a_abs[2] += q * v * v;
                if let Some(f) = &f {
                    let q = 2.0 * w * vol * f[c] * jet.phi;
                    m.s[0] += q;
                    m.s[1] += q * v;
                }
            }
            for fs in &faces {
                let a = axis_index(fs.axis);
                let jet = phi.jet(fs.center, t, dim);
                let s = st.sigma.get(fs.axis, fs.index);
                let q = fs.weight * dphi(fs.center);
                m.b[a][0] += q;
                m.b[a][1] += q * s;
                m.b[a][2] += q * s * s;
                let q = q.abs();
                m.b_abs[a][0] += q;
                m.b_abs[a][1] += q * s;
                m.b_abs[a][2] += q * s * s;
                let d = w * fs.weight * jet.grad[a];
                let vb = fs.v_mean(&st.v);
                m.c[a][0] += d;
                m.c[a][1] += d * vb;
                m.c[a][2] += d * s;
                m.c[a][3] += d * s * vb;
            }
            for bf in &bfaces {
                let a = axis_index(bf.axis);
                let side = usize::from(bf.normal > 0.0);
                let center = match bf.axis {
                    crate::grid::Axis::X => grid.xface_center(bf.face),
                    crate::grid::Axis::Y => grid.yface_center(bf.face),
                };
                m.bnd[a][side] += w * area * phi.phi(center, t, dim);
            }
        }

        let s0 = &traj.snapshots[0];
        for c in 0..grid.n_cells() {
            let p = phi.phi(grid.cell_center(c), s0.t, dim) * vol;
            let v = s0.state.v[c];
            m.i[0] += p;
            m.i[1] += p * v;
            m.i[2] += p * v * v;
        }
        for fs in &faces {
            let a = axis_index(fs.axis);
            let p = phi.phi(fs.center, s0.t, dim) * fs.weight;
            let s = s0.state.sigma.get(fs.axis, fs.index);
            m.j[a][0] += p;
            m.j[a][1] += p * s;
            m.j[a][2] += p * s * s;
        }
        m
    }

    pub(crate) fn terms(&self, kappa: &ConstantState, lambda: f64, dim: usize) -> Terms {
        let k = kappa.k;
        let tau = |a: usize| kappa.tau.get(a).copied().unwrap_or(0.0);
        let mut time = quad(&self.a, k);
        let mut time_mass = quad(&self.a_abs, k);
        let mut initial = quad(&self.i, k);
        let mut flux = 0.0;
        let mut boundary = 0.0;
        for a in 0..dim {
            let ta = tau(a);
            time += quad(&self.b[a], ta);
            time_mass += quad(&self.b_abs[a], ta);
            initial += quad(&self.j[a], ta);
            // -2 sum (sigma - tau) d phi (vbar - k)
            let c = &self.c[a];
            flux -= 2.0 * (c[3] - k * c[2] - ta * c[1] + ta * k * c[0]);
            for (side, normal) in [(0usize, -1.0), (1, 1.0)] {
                boundary +=
                    self.bnd[a][side] * boundary_quadratic(k, ta * normal, lambda, Side::Plus);
            }
        }
        let source = self.s[1] - k * self.s[0];
        Terms {
            time,
            flux,
            initial,
            source,
            boundary,
            time_mass: time_mass.max(0.0),
        }
    }
}

/// Default budget on the normalized margin.
pub const DISSIPATIVE_TOL: Tolerance = Tolerance::new(0.8, 0.8);

/// Worst normalized margin over all `(kappa, phi)` pairs. The report's
/// `worst_violation` is minus that margin, so the check passes when the
/// margin is at least `-tol`.
pub fn dissipative_verify(
    traj: &Trajectory,
    kappas: &KappaGrid,
    dict: &TestFunctionDictionary,
    source: &Source,
    tol: Tolerance,
) -> Result<VerificationReport> {
    if traj.bc != BcMode::Impedance {
        return Err(Error::Incompatible(format!(
            "the dissipative inequality is stated for the impedance condition, got `{}`",
            traj.bc
        )));
    }
    if traj.snapshots.is_empty() {
        return Err(Error::Incompatible("trajectory has no snapshots".into()));
    }
    let dim = traj.grid.dim();
    let states = kappas.states();
    for s in &states {
        if s.tau.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.tau.len(),
            });
        }
        if !s.in_k() {
            return Err(Error::InvalidScenario(format!(
                "constant state ({}, {:?}) lies outside R x B",
                s.k, s.tau
            )));
        }
    }
    let moments: Vec<Moments> = dict
        .members
        .par_iter()
        .map(|phi| Moments::collect(traj, phi, source))
        .collect();

    let mut worst = f64::INFINITY;
    let mut location = Location::default();
    for (phi, m) in dict.members.iter().zip(&moments) {
        for s in &states {
            let margin = m.terms(s, traj.lambda, dim).margin();
            if margin < worst {
                worst = margin;
                location = Location {
                    kappa: Some((s.k, s.tau.clone())),
                    phi: Some(phi.to_string()),
                    ..Location::default()
                };
            }
        }
    }
    if !worst.is_finite() {
        worst = 0.0;
    }
    Ok(VerificationReport::new(
        "dissipative",
        -worst,
        location,
        tol.eval(traj.dt, traj.grid.h()),
    ))
}

/// All five terms at one pair, for inspection.
pub fn dissipative_terms(
    traj: &Trajectory,
    kappa: &ConstantState,
    phi: &TestFunction,
    source: &Source,
) -> Terms {
    Moments::collect(traj, phi, source).terms(kappa, traj.lambda, traj.grid.dim())
}
