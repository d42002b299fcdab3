//! Python bindings: configs, runs, checks, and the small algebra and
//! convex-analysis kernels.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use plastodyn::algebra::{self, Direction, Matrix, Side};
use plastodyn::config::RunConfig;
use plastodyn::constitutive::{self, PsiFamily};
use plastodyn::diagnostics::{
    self, KappaGrid, TestFunctionDictionary, VerificationReport, DISSIPATIVE_TOL,
};
use plastodyn::plastic::{run_limit_study, run_vanishing_viscosity, LimitMode};
use plastodyn::{io, Error};

fn err(e: Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn direction(nu: &[f64]) -> PyResult<Direction> {
    Direction::normalized(nu).map_err(err)
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(&rows).map_err(err)
}

/// `(eps, dev_v, dev_sigma, viscous_gradient, accel_sup)`
type ViscosityRow = (f64, f64, f64, f64, f64);

#[pyclass(name = "Report", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyReport {
    name: String,
    worst_violation: f64,
    tolerance: f64,
    passed: bool,
    location: String,
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "Report({}, {}, worst={:e}, tol={:e}, at {})",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.worst_violation,
            self.tolerance,
            self.location
        )
    }
}

impl From<VerificationReport> for PyReport {
    fn from(r: VerificationReport) -> Self {
        PyReport {
            name: r.name,
            worst_violation: r.worst_violation,
            tolerance: r.tolerance,
            passed: r.pass,
            location: r.location.to_string(),
        }
    }
}

#[pyclass(name = "Trajectory", frozen)]
struct PyTrajectory(plastodyn::Trajectory);

#[pymethods]
impl PyTrajectory {
    /// Reads a trajectory written by `write` or by `plastodyn run`.
    #[staticmethod]
    fn read(dir: PathBuf) -> PyResult<Self> {
        io::read_trajectory(&dir).map(PyTrajectory).map_err(err)
    }

    fn write(&self, dir: PathBuf) -> PyResult<()> {
        io::write_trajectory(&dir, &self.0).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.grid.dim()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.0.dt
    }

    #[getter]
    fn steps(&self) -> usize {
        self.0.steps
    }

    #[getter]
    fn t_final(&self) -> f64 {
        self.0.t_final()
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.snapshots.iter().map(|s| s.t).collect()
    }

    fn __len__(&self) -> usize {
        self.0.snapshots.len()
    }

    /// Fields of snapshot `i` as flat lists: `u`, `v` on cells, `sigma_x`,
    /// `p_x` (and `sigma_y`, `p_y` in 2D) on faces.
    fn snapshot(&self, i: usize) -> PyResult<BTreeMap<&'static str, Vec<f64>>> {
        let s = self
            .0
            .snapshots
            .get(i)
            .ok_or_else(|| PyValueError::new_err(format!("snapshot {i} out of range")))?;
        let st = &s.state;
        let mut out = BTreeMap::new();
        out.insert("u", st.u.clone());
        out.insert("v", st.v.clone());
        out.insert("sigma_x", st.sigma.x.clone());
        out.insert("p_x", st.p.x.clone());
        if self.0.grid.dim() == 2 {
            out.insert("sigma_y", st.sigma.y.clone());
            out.insert("p_y", st.p.y.clone());
        }
        Ok(out)
    }

    /// Energy ledger as columns.
    fn ledger(&self) -> BTreeMap<&'static str, Vec<f64>> {
        let rows = &self.0.ledger.rows;
        let col = |f: fn(&diagnostics::LedgerRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
        BTreeMap::from([
            ("t", col(|r| r.t)),
            ("kinetic", col(|r| r.kinetic)),
            ("elastic", col(|r| r.elastic)),
            ("plastic_cum", col(|r| r.plastic_cum)),
            ("viscous_cum", col(|r| r.viscous_cum)),
            ("boundary_flux_cum", col(|r| r.boundary_flux_cum)),
            ("boundary_psi_cum", col(|r| r.boundary_psi_cum)),
            ("work_cum", col(|r| r.work_cum)),
            ("residual", col(|r| r.residual)),
        ])
    }

    /// Largest `|sigma|` seen at each step.
    fn max_sigma(&self) -> Vec<f64> {
        self.0.stats.iter().map(|s| s.max_sigma).collect()
    }

    /// Dissipative inequality over the standard constant-state grid.
    #[pyo3(signature = (kmax=None))]
    fn check_dissipative(&self, kmax: Option<f64>) -> PyResult<PyReport> {
        let tr = &self.0;
        let kappas = match kmax {
            Some(k) => KappaGrid::standard(tr.grid.dim(), k),
            None => KappaGrid::for_trajectory(tr),
        };
        let dict = TestFunctionDictionary::standard(&tr.grid, tr.t_final());
        diagnostics::dissipative_verify(tr, &kappas, &dict, &tr.source, DISSIPATIVE_TOL)
            .map(Into::into)
            .map_err(err)
    }

    fn check_energy(&self) -> PyResult<PyReport> {
        diagnostics::energy_audit(&self.0, diagnostics::ENERGY_TOL)
            .map(|(_, r)| r.into())
            .map_err(err)
    }

    /// Scaled-stress copy, for falsification experiments.
    fn with_scaled_stress(&self, factor: f64) -> PyTrajectory {
        let mut t = self.0.clone();
        for s in t.snapshots.iter_mut().skip(1) {
            for x in s.state.sigma.iter_mut() {
                *x *= factor;
            }
        }
        PyTrajectory(t)
    }
}

/// A parsed INI run configuration.
#[pyclass(name = "Config", frozen)]
struct PyConfig(RunConfig);

#[pymethods]
impl PyConfig {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        RunConfig::parse(text).map(PyConfig).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        RunConfig::load(&path).map(PyConfig).map_err(err)
    }

    #[getter]
    fn max_time_step(&self) -> f64 {
        self.0.scenario.max_time_step()
    }

    fn simulate(&self, py: Python<'_>) -> PyResult<PyTrajectory> {
        py.detach(|| self.0.simulate())
            .map(PyTrajectory)
            .map_err(err)
    }

    /// Runs the checks listed under `[checks] run`.
    fn verify(&self, py: Python<'_>, traj: &PyTrajectory) -> PyResult<Vec<PyReport>> {
        py.detach(|| self.0.verify(&traj.0))
            .map(|v| v.into_iter().map(Into::into).collect())
            .map_err(err)
    }

    /// Rows `(eps, dev_v, dev_sigma, viscous_gradient, accel_sup)`.
    fn vanishing_viscosity(&self, py: Python<'_>, eps: Vec<f64>) -> PyResult<Vec<ViscosityRow>> {
        let tab = py
            .detach(|| run_vanishing_viscosity(&self.0.scenario, &eps))
            .map_err(err)?;
        Ok(tab
            .rows
            .iter()
            .map(|r| (r.eps, r.dev_v, r.dev_sigma, r.viscous_gradient, r.accel_sup))
            .collect())
    }

    /// Rows `(lambda, gap, boundary_traction, boundary_flow)` against the
    /// hard `mode` ("dirichlet" or "neumann").
    fn limit_study(
        &self,
        py: Python<'_>,
        lambdas: Vec<f64>,
        mode: &str,
    ) -> PyResult<Vec<(f64, f64, f64, f64)>> {
        let mode = match mode {
            "dirichlet" => LimitMode::Dirichlet,
            "neumann" => LimitMode::Neumann,
            other => return Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
        };
        let tab = py
            .detach(|| run_limit_study(&self.0.scenario, &lambdas, mode))
            .map_err(err)?;
        Ok(tab
            .rows
            .iter()
            .map(|r| (r.lambda, r.gap, r.boundary_traction, r.boundary_flow))
            .collect())
    }
}

#[pyfunction]
fn build_m(lambda: f64, nu: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    Ok(algebra::build_m(lambda, &direction(&nu)?)
        .map_err(err)?
        .m
        .rows())
}

/// `None` if admissible, otherwise the first failed condition.
#[pyfunction]
fn check_admissible(m: Vec<Vec<f64>>, nu: Vec<f64>) -> PyResult<Option<String>> {
    let r = algebra::check_admissible(&matrix(m)?, &direction(&nu)?).map_err(err)?;
    Ok(r.err().map(|f| f.to_string()))
}

/// `(k0, kminus, kplus)` with `k0` in `Ker A_nu`, `kminus` in
/// `Ker(A_nu - M)` and `kplus` in `Ker(A_nu + M)`.
#[pyfunction]
fn decompose(
    kappa: Vec<f64>,
    nu: Vec<f64>,
    lambda: f64,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let t = algebra::decompose(&kappa, &direction(&nu)?, lambda).map_err(err)?;
    Ok((t.k0, t.kminus, t.kplus))
}

#[pyfunction]
fn boundary_quadratic(k: f64, tau_dot_nu: f64, lambda: f64, plus: bool) -> f64 {
    let side = if plus { Side::Plus } else { Side::Minus };
    algebra::boundary_quadratic(k, tau_dot_nu, lambda, side)
}

#[pyfunction]
fn project_ball(sigma: Vec<f64>) -> Vec<f64> {
    constitutive::project_ball(&sigma)
}

#[pyfunction]
fn perzyna_rate(sigma: Vec<f64>, eps: f64) -> PyResult<Vec<f64>> {
    constitutive::perzyna_rate(&sigma, eps).map_err(err)
}

#[pyfunction]
fn perzyna_resolvent(trial: Vec<f64>, dt_over_eps: f64) -> PyResult<Vec<f64>> {
    constitutive::perzyna_resolvent(&trial, dt_over_eps).map_err(err)
}

#[pyfunction]
fn flow_rule_residual(sigma: Vec<f64>, pdot: Vec<f64>) -> f64 {
    constitutive::flow_rule_residual(&sigma, &pdot)
}

#[pyfunction]
fn psi(lambda: f64, z: f64) -> PyResult<f64> {
    Ok(PsiFamily::new(lambda).map_err(err)?.psi(z))
}

#[pyfunction]
fn psi_prime(lambda: f64, z: f64) -> PyResult<f64> {
    Ok(PsiFamily::new(lambda).map_err(err)?.psi_prime(z))
}

/// `None` stands for `+inf` (outside `[-1, 1]`).
#[pyfunction]
fn psi_star(lambda: f64, y: f64) -> PyResult<Option<f64>> {
    Ok(PsiFamily::new(lambda).map_err(err)?.psi_star(y).finite())
}

#[pyfunction]
fn truncate(lambda: f64, z: f64) -> PyResult<f64> {
    constitutive::truncate(lambda, z).map_err(err)
}

#[pymodule]
fn plastodyn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(build_m, m)?)?;
    m.add_function(wrap_pyfunction!(check_admissible, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_quadratic, m)?)?;
    m.add_function(wrap_pyfunction!(project_ball, m)?)?;
    m.add_function(wrap_pyfunction!(perzyna_rate, m)?)?;
    m.add_function(wrap_pyfunction!(perzyna_resolvent, m)?)?;
    m.add_function(wrap_pyfunction!(flow_rule_residual, m)?)?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(psi_prime, m)?)?;
    m.add_function(wrap_pyfunction!(psi_star, m)?)?;
    m.add_function(wrap_pyfunction!(truncate, m)?)?;
    Ok(())
}
