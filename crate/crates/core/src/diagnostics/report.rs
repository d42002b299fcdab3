use std::fmt;

/// Error budget `c1 dt + c2 h` for comparing discrete quadratures with
/// continuum inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub c1: f64,
    pub c2: f64,
}

impl Tolerance {
    pub const fn new(c1: f64, c2: f64) -> Self {
        Tolerance { c1, c2 }
    }

    pub fn eval(&self, dt: f64, h: f64) -> f64 {
        self.c1 * dt + self.c2 * h
    }
}

/// Where the worst case of a check was found.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Location {
    pub t: Option<f64>,
    pub x: Option<[f64; 2]>,
    /// `(k, tau)`
    pub kappa: Option<(f64, Vec<f64>)>,
    pub phi: Option<String>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(t) = self.t {
            parts.push(format!("t={t:.6}"));
        }
        if let Some(x) = self.x {
            parts.push(format!("x=({:.6}, {:.6})", x[0], x[1]));
        }
        if let Some((k, tau)) = &self.kappa {
            let tau: Vec<String> = tau.iter().map(|c| format!("{c:.4}")).collect();
            parts.push(format!("kappa=({k:.4}; {})", tau.join(", ")));
        }
        if let Some(phi) = &self.phi {
            parts.push(format!("phi={phi}"));
        }
        if parts.is_empty() {
            f.write_str("-")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub name: String,
    /// Amount by which the checked relation fails (negative means slack).
    pub worst_violation: f64,
    pub location: Location,
    pub tolerance: f64,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(
        name: impl Into<String>,
        worst_violation: f64,
        location: Location,
        tolerance: f64,
    ) -> Self {
        VerificationReport {
            name: name.into(),
            worst_violation,
            location,
            tolerance,
            pass: worst_violation <= tolerance,
        }
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<12} {} worst={:.6e} tol={:.3e} at {}",
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.worst_violation,
            self.tolerance,
            self.location
        )
    }
}
