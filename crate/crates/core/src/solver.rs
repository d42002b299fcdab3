//! Shared explicit engine for both plasticity models.
//!
//! One step is: elastic predictor on faces, facewise plastic correction,
//! displacement update, explicit velocity update from the corrected stress,
//! and an implicit solve of the boundary closure in each boundary cell.
//! The displacement is advanced with the velocity that fed the predictor, so
//! `grad u = sigma + p` holds to round-off at every level.

use crate::constitutive::{dot, norm, project_ball, resolvent_unchecked, PsiFamily};
use crate::diagnostics::energy::{elastic_energy, kinetic_energy, EnergyLedger};
use crate::error::{Error, Result};
use crate::grid::{div_into, grad_into, Axis, BoundaryFace, FaceField, FaceGroup, Grid, State};
use crate::scenario::{max_time_step, BcMode, Scenario, Source};

/// Facewise plastic correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Correction {
    /// Exact radial return onto the unit ball.
    Projection,
    /// Perzyna resolvent with viscosity `eps`.
    Perzyna { eps: f64 },
}

/// Boundary closure solved implicitly in each boundary cell.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Closure {
    /// `sigma.nu = -psi'_lambda(v)`.
    Relaxed(PsiFamily),
    /// `v = 0`, traction clipped to `[-1, 1]`.
    Dirichlet,
    /// `sigma.nu = 0`.
    Neumann,
    /// Total flux `g - v / lambda` (one `g` per boundary face).
    Linear { lambda: f64, g: Vec<f64> },
}

impl Closure {
    pub(crate) fn for_plastic(bc: BcMode, lambda: f64) -> Result<Closure> {
        Ok(match bc {
            BcMode::Impedance => Closure::Relaxed(PsiFamily::new(lambda)?),
            BcMode::Dirichlet => Closure::Dirichlet,
            BcMode::Neumann => Closure::Neumann,
        })
    }
}

/// Per-step increments and diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepStats {
    pub t: f64,
    /// `sum |p^{n+1} - p^n| h^n`
    pub plastic: f64,
    /// `dt eps (|grad v|^2 + |pdot|^2) h^n`
    pub viscous: f64,
    pub boundary_flux: f64,
    pub boundary_psi: f64,
    pub work: f64,
    /// `h^n sum |grad v^n|^2` (unweighted by `eps` or `dt`)
    pub grad_v_sq: f64,
    /// Largest `|sigma|` over projection groups after the correction.
    pub max_sigma: f64,
    /// `sum (|pdot| - sigma.pdot)` over groups with plastic activity.
    pub flow_residual: f64,
    /// Largest `|sigma.pdot - |pdot| - eps |pdot|^2|` (Perzyna steps only).
    pub conjugacy_residual: f64,
    pub plastic_active: bool,
    /// `|| (v^{n+1} - v^n) / dt ||_2`
    pub accel_norm: f64,
    /// Largest `|grad u - sigma - p|` on interior faces.
    pub decomposition_residual: f64,
}

pub(crate) struct Engine<'g> {
    grid: &'g Grid,
    groups: Vec<FaceGroup>,
    bfaces: Vec<BoundaryFace>,
    /// Boundary cell with the indices (into `bfaces`) of its boundary faces.
    bcells: Vec<(usize, Vec<usize>)>,
    grad_v: FaceField,
    flux: FaceField,
    divergence: Vec<f64>,
    v_old: Vec<f64>,
    check_decomposition: bool,
}

impl<'g> Engine<'g> {
    pub(crate) fn new(grid: &'g Grid) -> Self {
        let bfaces = grid.boundary_faces();
        let mut bcells: Vec<(usize, Vec<usize>)> = Vec::new();
        for (k, bf) in bfaces.iter().enumerate() {
            match bcells.iter_mut().find(|(c, _)| *c == bf.cell) {
                Some((_, v)) => v.push(k),
                None => bcells.push((bf.cell, vec![k])),
            }
        }
        Engine {
            grid,
            groups: grid.plastic_groups(),
            bfaces,
            bcells,
            grad_v: grid.zero_faces(),
            flux: grid.zero_faces(),
            divergence: grid.zero_cells(),
            v_old: grid.zero_cells(),
            check_decomposition: true,
        }
    }

    pub(crate) fn advance(
        &mut self,
        st: &mut State,
        dt: f64,
        correction: Correction,
        closure: &Closure,
        f: Option<&[f64]>,
    ) -> StepStats {
        let grid = self.grid;
        let vol = grid.cell_volume();
        let area = grid.face_area();
        let h = grid.h();
        let mut stats = StepStats::default();

        grad_into(grid, &st.v, &mut self.grad_v);
        let eps = match correction {
            Correction::Projection => 0.0,
            Correction::Perzyna { eps } => eps,
        };

        // predictor + correction
        for g in &self.groups {
            let (trial, idx): ([f64; 2], [(Axis, usize); 2]) = match *g {
                FaceGroup::Single(axis, f) => (
                    [st.sigma.get(axis, f) + dt * self.grad_v.get(axis, f), 0.0],
                    [(axis, f), (axis, usize::MAX)],
                ),
                FaceGroup::Pair { x, y } => (
                    [
                        st.sigma.x[x] + dt * self.grad_v.x[x],
                        st.sigma.y[y] + dt * self.grad_v.y[y],
                    ],
                    [(Axis::X, x), (Axis::Y, y)],
                ),
            };
            let len = if idx[1].1 == usize::MAX { 1 } else { 2 };
            let trial = &trial[..len];
            let corrected = match correction {
                Correction::Projection => project_ball(trial),
                Correction::Perzyna { eps } => resolvent_unchecked(trial, dt / eps),
            };
            let mut dp = [0.0; 2];
            for k in 0..len {
                dp[k] = trial[k] - corrected[k];
                let (axis, fi) = idx[k];
                st.sigma.set(axis, fi, corrected[k]);
                let p = st.p.get(axis, fi);
                st.p.set(axis, fi, p + dp[k]);
            }
            let dp = &dp[..len];
            let dpn = norm(dp);
            stats.max_sigma = stats.max_sigma.max(norm(&corrected));
            if dpn > 0.0 {
                stats.plastic_active = true;
                stats.plastic += vol * dpn;
                let pdot: Vec<f64> = dp.iter().map(|d| d / dt).collect();
                let pn = dpn / dt;
                let sp = dot(&corrected, &pdot);
                stats.flow_residual += pn - sp;
                if eps > 0.0 {
                    stats.viscous += vol * dt * eps * pn * pn;
                    let r = (sp - pn - eps * pn * pn).abs() / (1.0 + sp.abs());
                    stats.conjugacy_residual = stats.conjugacy_residual.max(r);
                }
            }
        }

        for (u, v) in st.u.iter_mut().zip(&st.v) {
            *u += dt * v;
        }

        // interior fluxes
        let gv_sq: f64 = self.grad_v.iter().map(|g| g * g).sum::<f64>() * vol;
        stats.grad_v_sq = gv_sq;
        if eps > 0.0 {
            stats.viscous += dt * eps * gv_sq;
            for ((fl, s), g) in self
                .flux
                .iter_mut()
                .zip(st.sigma.iter())
                .zip(self.grad_v.iter())
            {
                *fl = s + eps * g;
            }
            div_into(grid, &self.flux, &mut self.divergence, false);
        } else {
            div_into(grid, &st.sigma, &mut self.divergence, false);
        }

        self.v_old.copy_from_slice(&st.v);
        for (c, v) in st.v.iter_mut().enumerate() {
            *v += dt * self.divergence[c];
        }
        if let Some(f) = f {
            for (v, fc) in st.v.iter_mut().zip(f) {
                *v += dt * fc;
            }
        }

        // boundary closure, implicit in the boundary cell velocity
        let c_dt = dt / h;
        for (cell, faces) in &self.bcells {
            let vstar = st.v[*cell];
            let beta = c_dt * faces.len() as f64;
            let (vnew, traction): (f64, f64) = match closure {
                Closure::Relaxed(psi) => {
                    let w = psi.prox(vstar, beta);
                    (w, -psi.psi_prime(w))
                }
                Closure::Dirichlet => {
                    if vstar.abs() <= beta {
                        (0.0, -vstar / beta)
                    } else {
                        (vstar - beta * vstar.signum(), -vstar.signum())
                    }
                }
                Closure::Neumann => (vstar, 0.0),
                Closure::Linear { .. } => (vstar, 0.0),
            };
            match closure {
                Closure::Linear { lambda, g } => {
                    let gsum: f64 = faces.iter().map(|&k| g[k]).sum();
                    let w = (vstar + c_dt * gsum) / (1.0 + beta / lambda);
                    st.v[*cell] = w;
                    for &k in faces {
                        let bf = self.bfaces[k];
                        let s = g[k] - w / lambda;
                        st.sigma.set(bf.axis, bf.face, s * bf.normal);
                        stats.boundary_flux += dt * area * 0.5 * w * w / lambda;
                        stats.boundary_psi += dt * area * 0.5 * w * w / lambda;
                        stats.work += dt * area * g[k] * w;
                    }
                }
                _ => {
                    st.v[*cell] = vnew;
                    for &k in faces {
                        let bf = self.bfaces[k];
                        st.sigma.set(bf.axis, bf.face, traction * bf.normal);
                        match closure {
                            Closure::Relaxed(psi) => {
                                stats.boundary_flux +=
                                    dt * area * 0.5 * psi.lambda() * traction * traction;
                                stats.boundary_psi += dt * area * psi.psi(vnew);
                            }
                            Closure::Dirichlet => stats.boundary_psi += dt * area * vnew.abs(),
                            _ => {}
                        }
                    }
                }
            }
        }

        if let Some(f) = f {
            stats.work += dt
                * vol
                * f.iter()
                    .zip(&st.v)
                    .zip(&self.v_old)
                    .map(|((fc, a), b)| fc * 0.5 * (a + b))
                    .sum::<f64>();
        }
        stats.accel_norm = (vol
            * st.v
                .iter()
                .zip(&self.v_old)
                .map(|(a, b)| ((a - b) / dt).powi(2))
                .sum::<f64>())
        .sqrt();

        if self.check_decomposition {
            grad_into(grid, &st.u, &mut self.flux);
            let mut worst: f64 = 0.0;
            for g in &self.groups {
                let faces: &[(Axis, usize)] = match g {
                    FaceGroup::Single(a, f) => &[(*a, *f)][..],
                    FaceGroup::Pair { x, y } => &[(Axis::X, *x), (Axis::Y, *y)][..],
                };
                for &(a, fi) in faces {
                    let r = self.flux.get(a, fi) - st.sigma.get(a, fi) - st.p.get(a, fi);
                    worst = worst.max(r.abs());
                }
            }
            stats.decomposition_residual = worst;
        }
        stats
    }
}

pub(crate) fn check_finite(st: &State, step: usize) -> Result<()> {
    if let Some(i) = st.v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            field: "v",
            step,
            index: i,
        });
    }
    if let Some(i) = st.sigma.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            field: "sigma",
            step,
            index: i,
        });
    }
    Ok(())
}

pub(crate) fn check_cfl(grid: &Grid, dt: f64, eps: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::NonPositive {
            name: "dt",
            value: dt,
        });
    }
    let n = grid.dim() as f64;
    let wave = grid.h() / n.sqrt();
    if dt > wave * (1.0 + 1e-12) {
        return Err(Error::Cfl {
            which: "wave",
            dt,
            limit: wave,
        });
    }
    let limit = max_time_step(grid, 1.0, eps);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl {
            which: "diffusion",
            dt,
            limit,
        });
    }
    Ok(())
}

/// A stored time level.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub state: State,
}

/// Output of a run: strided snapshots plus per-step ledger and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
    pub lambda: f64,
    pub eps: f64,
    pub bc: BcMode,
    pub source: Source,
    pub snapshots: Vec<Snapshot>,
    pub ledger: EnergyLedger,
    pub stats: Vec<StepStats>,
}

impl Trajectory {
    pub fn initial(&self) -> &State {
        &self.snapshots[0].state
    }

    pub fn last(&self) -> &State {
        &self
            .snapshots
            .last()
            .expect("trajectory has a snapshot")
            .state
    }

    pub fn t_final(&self) -> f64 {
        self.dt * self.steps as f64
    }

    /// Source values at a stored snapshot.
    pub fn source_at(&self, snap: &Snapshot) -> Option<Vec<f64>> {
        self.source.eval(&self.grid, snap.step, snap.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Keep every `stride`-th state (the first and last are always kept).
    pub stride: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { stride: 1 }
    }
}

pub(crate) fn drive(
    scenario: &Scenario,
    correction: Correction,
    closure: Closure,
    opts: RunOptions,
) -> Result<Trajectory> {
    drive_with_dt(scenario, correction, closure, opts, scenario.time_step())
}

pub(crate) fn drive_with_dt(
    scenario: &Scenario,
    correction: Correction,
    closure: Closure,
    opts: RunOptions,
    (dt, steps): (f64, usize),
) -> Result<Trajectory> {
    scenario.validate()?;
    let grid = &scenario.grid;
    let eps = match correction {
        Correction::Projection => 0.0,
        Correction::Perzyna { eps } => eps,
    };
    check_cfl(grid, dt, eps)?;
    let stride = opts.stride.max(1);

    let mut engine = Engine::new(grid);
    let mut state = scenario.initial.clone();
    let mut ledger = EnergyLedger::new(
        kinetic_energy(grid, &state.v),
        elastic_energy(grid, &state.sigma),
    );
    let mut snapshots = vec![Snapshot {
        step: 0,
        t: 0.0,
        state: state.clone(),
    }];
    let mut stats = Vec::with_capacity(steps);

    for n in 0..steps {
        let t = n as f64 * dt;
        let f = scenario.source.eval(grid, n, t);
        let mut s = engine.advance(&mut state, dt, correction, &closure, f.as_deref());
        check_finite(&state, n + 1)?;
        s.t = (n + 1) as f64 * dt;
        ledger.push(
            s.t,
            kinetic_energy(grid, &state.v),
            elastic_energy(grid, &state.sigma),
            &s,
        );
        stats.push(s);
        if (n + 1) % stride == 0 || n + 1 == steps {
            snapshots.push(Snapshot {
                step: n + 1,
                t: (n + 1) as f64 * dt,
                state: state.clone(),
            });
        }
    }

    Ok(Trajectory {
        grid: grid.clone(),
        dt,
        steps,
        stride,
        lambda: scenario.lambda,
        eps,
        bc: scenario.bc,
        source: scenario.source.clone(),
        snapshots,
        ledger,
        stats,
    })
}

/// Advances two configurations from the same initial state with a shared
/// step, calling `observe(step, a, b, stats_a, stats_b)` after every step.
pub(crate) fn lockstep<F>(
    scenario: &Scenario,
    (dt, steps): (f64, usize),
    a: (Correction, &Closure),
    b: (Correction, &Closure),
    mut observe: F,
) -> Result<()>
where
    F: FnMut(usize, &State, &State, &StepStats, &StepStats),
{
    scenario.validate()?;
    let grid = &scenario.grid;
    for c in [a.0, b.0] {
        let eps = match c {
            Correction::Projection => 0.0,
            Correction::Perzyna { eps } => eps,
        };
        check_cfl(grid, dt, eps)?;
    }
    let mut ea = Engine::new(grid);
    let mut eb = Engine::new(grid);
    let mut sa = scenario.initial.clone();
    let mut sb = scenario.initial.clone();
    for n in 0..steps {
        let t = n as f64 * dt;
        let f = scenario.source.eval(grid, n, t);
        let ra = ea.advance(&mut sa, dt, a.0, a.1, f.as_deref());
        let rb = eb.advance(&mut sb, dt, b.0, b.1, f.as_deref());
        check_finite(&sa, n + 1)?;
        check_finite(&sb, n + 1)?;
        observe(n + 1, &sa, &sb, &ra, &rb);
    }
    Ok(())
}

/// `||U_a - U_b||_2` over cells and interior faces.
pub fn state_distance(grid: &Grid, a: &State, b: &State) -> f64 {
    let (dv, ds) = l2_distance(grid, a, b);
    dv.hypot(ds)
}

/// `(||v_a - v_b||_2, ||sigma_a - sigma_b||_2)` with the stress difference
/// taken over interior faces.
pub(crate) fn l2_distance(grid: &Grid, a: &State, b: &State) -> (f64, f64) {
    let vol = grid.cell_volume();
    let dv: f64 = a.v.iter().zip(&b.v).map(|(x, y)| (x - y).powi(2)).sum();
    let ds: f64 = grid
        .plastic_groups()
        .iter()
        .map(|g| match *g {
            FaceGroup::Single(axis, f) => (a.sigma.get(axis, f) - b.sigma.get(axis, f)).powi(2),
            FaceGroup::Pair { x, y } => {
                (a.sigma.x[x] - b.sigma.x[x]).powi(2) + (a.sigma.y[y] - b.sigma.y[y]).powi(2)
            }
        })
        .sum();
    ((vol * dv).sqrt(), (vol * ds).sqrt())
}
