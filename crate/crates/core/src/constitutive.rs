//! Convex-analytic kernels: the unit-ball projection, Perzyna rate and its
//! implicit resolvent, and the boundary relaxation family `psi_lambda`.

use crate::error::{ensure_non_negative, ensure_positive, Result};

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthogonal projection onto the closed unit ball.
pub fn project_ball(sigma: &[f64]) -> Vec<f64> {
    let r = norm(sigma);
    if r <= 1.0 {
        return sigma.to_vec();
    }
    let mut out: Vec<f64> = sigma.iter().map(|s| s / r).collect();
    // rounding can leave |out| one ulp above 1
    while norm(&out) > 1.0 {
        for c in out.iter_mut() {
            *c *= 1.0 - f64::EPSILON;
        }
    }
    out
}

/// Visco-plastic strain rate `(sigma - P_B(sigma)) / eps`.
pub fn perzyna_rate(sigma: &[f64], eps: f64) -> Result<Vec<f64>> {
    ensure_positive("eps", eps)?;
    let proj = project_ball(sigma);
    Ok(sigma
        .iter()
        .zip(&proj)
        .map(|(s, p)| (s - p) / eps)
        .collect())
}

/// Solves `sigma + r (sigma - P_B(sigma)) = sigma_trial` with `r = dt / eps`.
///
/// Radial closed form: outside the ball the solution has norm
/// `(|trial| + r) / (1 + r)` along the trial direction.
pub fn perzyna_resolvent(sigma_trial: &[f64], dt_over_eps: f64) -> Result<Vec<f64>> {
    ensure_non_negative("dt_over_eps", dt_over_eps)?;
    Ok(resolvent_unchecked(sigma_trial, dt_over_eps))
}

pub(crate) fn resolvent_unchecked(sigma_trial: &[f64], r: f64) -> Vec<f64> {
    let n = norm(sigma_trial);
    if n <= 1.0 {
        return sigma_trial.to_vec();
    }
    if r.is_infinite() {
        return sigma_trial.iter().map(|s| s / n).collect();
    }
    let s = (n + r) / (1.0 + r);
    sigma_trial.iter().map(|x| x * s / n).collect()
}

/// Hill residual `| |pdot| - sigma . pdot |`.
pub fn flow_rule_residual(sigma: &[f64], pdot: &[f64]) -> f64 {
    (norm(pdot) - dot(sigma, pdot)).abs()
}

/// Value of a convex function that may be `+inf` (an indicator is active).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    PlusInfinity,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::PlusInfinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::PlusInfinity)
    }
}

/// Boundary relaxation potential: Huber function with threshold `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiFamily {
    lambda: f64,
}

impl PsiFamily {
    pub fn new(lambda: f64) -> Result<Self> {
        ensure_positive("lambda", lambda)?;
        Ok(PsiFamily { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn psi(&self, z: f64) -> f64 {
        let l = self.lambda;
        if z.abs() <= l {
            z * z / (2.0 * l)
        } else {
            z.abs() - l / 2.0
        }
    }

    pub fn psi_prime(&self, z: f64) -> f64 {
        (z / self.lambda).clamp(-1.0, 1.0)
    }

    pub fn psi_star(&self, y: f64) -> Extended {
        if y.abs() <= 1.0 {
            Extended::Finite(self.lambda * y * y / 2.0)
        } else {
            Extended::PlusInfinity
        }
    }

    /// Solves `w + beta * psi'(w) = m` for `w` (proximal map of `beta * psi`).
    pub fn prox(&self, m: f64, beta: f64) -> f64 {
        let l = self.lambda;
        if m.abs() <= l + beta {
            m / (1.0 + beta / l)
        } else {
            m - beta * m.signum()
        }
    }
}

/// Clamp of `z` to `[-lambda, lambda]`.
pub fn truncate(lambda: f64, z: f64) -> Result<f64> {
    ensure_positive("lambda", lambda)?;
    Ok(z.clamp(-lambda, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Bisection on the scalar radial equation `s + r (s - 1) = n`, `s >= 1`.
    fn radial_bisection(n: f64, r: f64) -> f64 {
        let (mut lo, mut hi) = (1.0, n.max(1.0));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid + r * (mid - 1.0) > n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_ball(&[3.0, 4.0]), vec![0.6, 0.8]);
        assert_eq!(project_ball(&[0.3, 0.4]), vec![0.3, 0.4]);
        assert_eq!(project_ball(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn perzyna_examples() {
        let p = perzyna_rate(&[1.5, 0.0], 0.1).unwrap();
        assert_abs_diff_eq!(p[0], 5.0, epsilon = 1e-12);
        assert_eq!(p[1], 0.0);
        assert_eq!(perzyna_rate(&[0.9, 0.0], 3.0).unwrap(), vec![0.0, 0.0]);
        assert!(perzyna_rate(&[1.0], 0.0).is_err());
    }

    #[test]
    fn resolvent_examples() {
        let s = perzyna_resolvent(&[1.5, 0.0], 1.0).unwrap();
        assert_abs_diff_eq!(s[0], radial_bisection(1.5, 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(s[0], 1.25, epsilon = 1e-12);
        assert_eq!(
            perzyna_resolvent(&[0.2, -0.7], 4.0).unwrap(),
            vec![0.2, -0.7]
        );
        let big = perzyna_resolvent(&[3.0, 4.0], 1e12).unwrap();
        assert_abs_diff_eq!(norm(&big), 1.0, epsilon = 1e-10);
        let inf = perzyna_resolvent(&[3.0, 4.0], f64::INFINITY).unwrap();
        assert_eq!(inf, project_ball(&[3.0, 4.0]));
        assert!(perzyna_resolvent(&[1.0], -0.1).is_err());
    }

    #[test]
    fn psi_examples() {
        let one = PsiFamily::new(1.0).unwrap();
        assert_abs_diff_eq!(one.psi(0.5), 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(one.psi(2.0), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(one.psi(1.0), 0.5, epsilon = 1e-15);
        // both branches agree at |z| = lambda
        let l = 0.7;
        let fam = PsiFamily::new(l).unwrap();
        assert_abs_diff_eq!(fam.psi(l), l - l / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fam.psi(-l), l * l / (2.0 * l), epsilon = 1e-15);

        assert_eq!(PsiFamily::new(2.0).unwrap().psi_prime(1.0), 0.5);
        assert_eq!(one.psi_prime(-3.0), -1.0);
        assert_eq!(one.psi_prime(0.0), 0.0);

        assert_eq!(one.psi_star(0.5), Extended::Finite(0.125));
        assert!(one.psi_star(1.5).is_infinite());
        assert!(PsiFamily::new(0.0).is_err());
    }

    #[test]
    fn truncate_examples() {
        assert_eq!(truncate(1.0, 2.0).unwrap(), 1.0);
        assert_eq!(truncate(1.0, -0.3).unwrap(), -0.3);
        assert!(truncate(-1.0, 0.0).is_err());
    }

    #[test]
    fn flow_rule_examples() {
        assert_eq!(flow_rule_residual(&[1.0, 0.0], &[2.0, 0.0]), 0.0);
        assert_eq!(flow_rule_residual(&[0.5, 0.0], &[2.0, 0.0]), 1.0);
        assert_eq!(flow_rule_residual(&[0.3, 0.1], &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn prox_solves_its_equation() {
        let fam = PsiFamily::new(0.3).unwrap();
        for &m in &[-5.0, -0.5, -0.1, 0.0, 0.2, 0.4, 3.0] {
            for &beta in &[0.0, 0.1, 0.9, 10.0] {
                let w = fam.prox(m, beta);
                assert_abs_diff_eq!(w + beta * fam.psi_prime(w), m, epsilon = 1e-12);
            }
        }
    }

    fn vec2() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-3.0f64..3.0, 2)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn projection_is_idempotent_and_nonexpansive(a in vec2(), b in vec2()) {
            let pa = project_ball(&a);
            prop_assert!(norm(&pa) <= 1.0 + 1e-15);
            prop_assert_eq!(project_ball(&pa), pa.clone());
            let pb = project_ball(&b);
            let d: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x - y).collect();
            let e: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            prop_assert!(norm(&d) <= norm(&e) + 1e-14);
        }

        #[test]
        fn resolvent_matches_bisection(t in vec2(), r in 0.0f64..50.0) {
            let s = perzyna_resolvent(&t, r).unwrap();
            let n = norm(&t);
            if n <= 1.0 {
                prop_assert_eq!(s, t);
            } else {
                let expect = radial_bisection(n, r);
                prop_assert!((norm(&s) - expect).abs() <= 1e-12);
                prop_assert!(norm(&s) >= 1.0);
                // Satisfies the implicit equation.
                let p = project_ball(&s);
                for i in 0..2 {
                    prop_assert!((s[i] + r * (s[i] - p[i]) - t[i]).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn perzyna_excess_matches_flow_rule(s in vec2(), eps in 0.01f64..2.0) {
            let p = perzyna_rate(&s, eps).unwrap();
            let lhs = dot(&s, &p);
            let rhs = norm(&p) + eps * dot(&p, &p);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
            let res = flow_rule_residual(&s, &p);
            prop_assert!((res - eps * dot(&p, &p)).abs() <= 1e-12 * (1.0 + res));
        }

        #[test]
        fn psi_is_convex_lipschitz_c1(lambda in 0.05f64..5.0, x in -10.0f64..10.0, y in -10.0f64..10.0) {
            let f = PsiFamily::new(lambda).unwrap();
            prop_assert!(f.psi(0.5 * (x + y)) <= 0.5 * (f.psi(x) + f.psi(y)) + 1e-12);
            prop_assert!((f.psi(x) - f.psi(y)).abs() <= (x - y).abs() + 1e-12);
            let h = 1e-6;
            let fd = (f.psi(x + h) - f.psi(x - h)) / (2.0 * h);
            prop_assert!((fd - f.psi_prime(x)).abs() <= h / lambda + 1e-8);
        }

        #[test]
        fn fenchel_young_equality(lambda in 0.05f64..5.0, z in -10.0f64..10.0) {
            let f = PsiFamily::new(lambda).unwrap();
            let y = f.psi_prime(z);
            let star = f.psi_star(y).finite().unwrap();
            prop_assert!((f.psi(z) + star - z * y).abs() <= 1e-12 * (1.0 + z.abs()));
        }

        #[test]
        fn truncation_is_scaled_derivative(lambda in 0.05f64..5.0, z in -10.0f64..10.0) {
            let f = PsiFamily::new(lambda).unwrap();
            prop_assert!((truncate(lambda, z).unwrap() - lambda * f.psi_prime(z)).abs() <= 1e-12);
        }
    }
}
