//! Small dense algebra for the hyperbolic structure of the anti-plane system.
//!
//! The unknown is `U = (v, sigma)` in `R^{n+1}`: velocity in slot 0, stress
//! components in slots `1..=n`. All matrices here are at most 3x3, so kernels
//! and ranks are computed by pivoted Gaussian elimination and eigenvalues by
//! cyclic Jacobi rotations.

use std::fmt;

use crate::error::{ensure_positive, Error, Result};

/// Relative tolerance for rank and kernel decisions.
pub const RANK_TOL: f64 = 1e-10;
/// Absolute tolerance for the eigenvalue sign test.
pub const PSD_TOL: f64 = 1e-10;
const UNIT_TOL: f64 = 1e-12;

/// Outer unit normal in `R^n`, `n` in {1, 2}.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    pub fn new(nu: &[f64]) -> Result<Self> {
        if nu.is_empty() || nu.len() > 2 {
            return Err(Error::UnsupportedDimension(nu.len()));
        }
        let norm = nu.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit(norm));
        }
        Ok(Direction(nu.to_vec()))
    }

    /// Normalizes `nu` instead of rejecting it.
    pub fn normalized(nu: &[f64]) -> Result<Self> {
        let norm = nu.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotUnit(norm));
        }
        let scaled: Vec<f64> = nu.iter().map(|x| x / norm).collect();
        Direction::new(&scaled)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, tau: &[f64]) -> f64 {
        self.0.iter().zip(tau).map(|(a, b)| a * b).sum()
    }
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!(self.n, other.n, "matrix size mismatch");
        Matrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "vector length mismatch");
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `M x . x`
    pub fn quadratic(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1.0);
        (0..self.n).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol * scale))
    }

    pub fn rank(&self) -> usize {
        rank_of_rows(&self.rows())
    }

    /// Orthonormal-free basis of the null space (one vector per free column).
    pub fn kernel(&self) -> Vec<Vec<f64>> {
        kernel_basis(&self.rows(), self.n)
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi, ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = self.clone();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)].powi(2))
                .sum();
            if off <= 1e-30 * a.max_abs().max(1e-300).powi(2) {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        eig.sort_by(|x, y| x.total_cmp(y));
        eig
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Row echelon form in place; returns pivot columns.
fn row_reduce(rows: &mut [Vec<f64>], ncols: usize) -> Vec<usize> {
    let scale = rows.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let tol = RANK_TOL * scale;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let (best, best_val) = (r..rows.len())
            .map(|i| (i, rows[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_val <= tol {
            continue;
        }
        rows.swap(r, best);
        let piv = rows[r][c];
        for x in rows[r].iter_mut() {
            *x /= piv;
        }
        for i in 0..rows.len() {
            if i != r {
                let factor = rows[i][c];
                if factor != 0.0 {
                    for k in 0..ncols {
                        rows[i][k] -= factor * rows[r][k];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of a set of row vectors of equal length.
pub fn rank_of_rows(rows: &[Vec<f64>]) -> usize {
    let Some(first) = rows.first() else {
        return 0;
    };
    let ncols = first.len();
    let mut work = rows.to_vec();
    row_reduce(&mut work, ncols).len()
}

fn kernel_basis(rows: &[Vec<f64>], ncols: usize) -> Vec<Vec<f64>> {
    let mut work = rows.to_vec();
    let pivots = row_reduce(&mut work, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![0.0; ncols];
            x[f] = 1.0;
            for (r, &pc) in pivots.iter().enumerate() {
                x[pc] = -work[r][f];
            }
            x
        })
        .collect()
}

/// The fixed coefficient matrices `A_i = -2 e_1 (.) e_{i+1}` of the system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    a: Vec<Matrix>,
}

impl SystemMatrices {
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.a
    }
}

pub fn build_system(n: usize) -> Result<SystemMatrices> {
    if !(1..=2).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let a = (0..n)
        .map(|i| {
            let mut m = Matrix::zeros(n + 1);
            m[(0, i + 1)] = -1.0;
            m[(i + 1, 0)] = -1.0;
            m
        })
        .collect();
    Ok(SystemMatrices { a })
}

/// `A_nu = sum_i A_i nu_i`.
pub fn build_anu(sys: &SystemMatrices, nu: &Direction) -> Result<Matrix> {
    if nu.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: nu.dim(),
        });
    }
    let n = sys.dim();
    let mut out = Matrix::zeros(n + 1);
    for (a, &c) in sys.a.iter().zip(nu.components()) {
        out = out.add(&a.scale(c));
    }
    Ok(out)
}

/// Impedance boundary matrix `M = lambda^{-1} e1 (x) e1 + lambda (nu (x) nu)` on the stress block.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMatrix {
    pub m: Matrix,
    pub lambda: f64,
}

pub fn build_m(lambda: f64, nu: &Direction) -> Result<BoundaryMatrix> {
    ensure_positive("lambda", lambda)?;
    let n = nu.dim();
    let mut m = Matrix::zeros(n + 1);
    m[(0, 0)] = 1.0 / lambda;
    let c = nu.components();
    for i in 0..n {
        for j in 0..n {
            m[(i + 1, j + 1)] = lambda * c[i] * c[j];
        }
    }
    Ok(BoundaryMatrix { m, lambda })
}

/// First condition of the admissibility list that a candidate fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissibilityFailure {
    NotSymmetric,
    NotPositiveSemiDefinite,
    KernelNotIncluded,
    KernelsDoNotSpan,
}

impl fmt::Display for AdmissibilityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AdmissibilityFailure::NotSymmetric => "not symmetric",
            AdmissibilityFailure::NotPositiveSemiDefinite => "not positive semi-definite",
            AdmissibilityFailure::KernelNotIncluded => "Ker A_ν ⊄ Ker M",
            AdmissibilityFailure::KernelsDoNotSpan => "Ker(A_ν−M) + Ker(A_ν+M) ≠ ℝⁿ⁺¹",
        };
        f.write_str(s)
    }
}

/// Checks the four dissipative-boundary conditions on a candidate `M`:
/// symmetry, `M + M^T >= 0`, `Ker A_nu ⊂ Ker M`, and
/// `Ker(A_nu - M) + Ker(A_nu + M) = R^{n+1}`.
pub fn check_admissible(
    m: &Matrix,
    nu: &Direction,
) -> Result<std::result::Result<(), AdmissibilityFailure>> {
    let n = nu.dim();
    if m.size() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: m.size(),
        });
    }
    let anu = build_anu(&build_system(n)?, nu)?;

    if !m.is_symmetric(RANK_TOL) {
        return Ok(Err(AdmissibilityFailure::NotSymmetric));
    }
    let sym = m.add(&m.transpose()).scale(0.5);
    let scale = sym.max_abs().max(1.0);
    if sym
        .symmetric_eigenvalues()
        .iter()
        .any(|&l| l < -PSD_TOL * scale)
    {
        return Ok(Err(AdmissibilityFailure::NotPositiveSemiDefinite));
    }

    let mut stacked = anu.rows();
    stacked.extend(m.rows());
    if rank_of_rows(&stacked) != anu.rank() {
        return Ok(Err(AdmissibilityFailure::KernelNotIncluded));
    }

    let mut union = anu.sub(m).kernel();
    union.extend(anu.add(m).kernel());
    if rank_of_rows(&union) != n + 1 {
        return Ok(Err(AdmissibilityFailure::KernelsDoNotSpan));
    }
    Ok(Ok(()))
}

/// A constant state `kappa = (k, tau)`, required to lie in `K = R x B`
/// when used as an entropy comparison state.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantState {
    pub k: f64,
    pub tau: Vec<f64>,
}

impl ConstantState {
    pub fn new(k: f64, tau: Vec<f64>) -> Self {
        ConstantState { k, tau }
    }

    pub fn in_k(&self) -> bool {
        let r2: f64 = self.tau.iter().map(|t| t * t).sum();
        self.k.is_finite() && r2 <= 1.0 + 1e-12
    }

    pub fn as_vector(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.tau.len() + 1);
        out.push(self.k);
        out.extend_from_slice(&self.tau);
        out
    }

    pub fn from_vector(x: &[f64]) -> Self {
        ConstantState {
            k: x[0],
            tau: x[1..].to_vec(),
        }
    }
}

/// `kappa = kappa0 + kappa_minus + kappa_plus` with `kappa0 ∈ Ker A_nu` and
/// `kappa_∓ ∈ Ker(A_nu ∓ M) ∩ Im A_nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionTriple {
    pub k0: Vec<f64>,
    pub kminus: Vec<f64>,
    pub kplus: Vec<f64>,
}

impl ProjectionTriple {
    pub fn reconstruct(&self) -> Vec<f64> {
        self.k0
            .iter()
            .zip(&self.kminus)
            .zip(&self.kplus)
            .map(|((a, b), c)| a + b + c)
            .collect()
    }
}

pub fn decompose(kappa: &[f64], nu: &Direction, lambda: f64) -> Result<ProjectionTriple> {
    ensure_positive("lambda", lambda)?;
    let n = nu.dim();
    if kappa.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: kappa.len(),
        });
    }
    let k = kappa[0];
    let tau = &kappa[1..];
    let tn = nu.dot(tau);
    let c = nu.components();

    let mut k0 = vec![0.0; n + 1];
    for i in 0..n {
        k0[i + 1] = tau[i] - tn * c[i];
    }
    let side = |sign: f64| {
        let mut out = vec![0.0; n + 1];
        out[0] = (k + sign * lambda * tn) / 2.0;
        let coef = tn / 2.0 + sign * k / (2.0 * lambda);
        for i in 0..n {
            out[i + 1] = coef * c[i];
        }
        out
    };
    Ok(ProjectionTriple {
        k0,
        kminus: side(-1.0),
        kplus: side(1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// `M kappa^± · kappa^± = 2 lambda (k / 2 lambda ± tau·nu / 2)^2`.
pub fn boundary_quadratic(k: f64, tau_dot_nu: f64, lambda: f64, side: Side) -> f64 {
    let s = match side {
        Side::Plus => 1.0,
        Side::Minus => -1.0,
    };
    let w = k / (2.0 * lambda) + s * tau_dot_nu / 2.0;
    2.0 * lambda * w * w
}
