//! Nonnegative Lipschitz space-time test functions with exact derivatives.

use std::fmt;

use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// `T - t`
    Horizon { t_end: f64 },
    /// `max(0, 1 - |t - center| / half)`
    TimeTent { center: f64, half: f64 },
    /// Smooth spatial bump of `radius` around `center` times a time tent.
    BumpTent {
        center: [f64; 2],
        radius: f64,
        t_center: f64,
        t_half: f64,
    },
    /// `max(0, radius - t - |x - apex|)`
    Cone { apex: [f64; 2], radius: f64 },
}

/// Value, time derivative and spatial gradient at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub phi: f64,
    pub dt: f64,
    pub grad: [f64; 2],
}

fn tent(t: f64, c: f64, half: f64) -> (f64, f64) {
    let s = (t - c) / half;
    if s.abs() >= 1.0 {
        (0.0, 0.0)
    } else {
        (1.0 - s.abs(), -s.signum() / half)
    }
}

fn distance(x: [f64; 2], c: [f64; 2], dim: usize) -> (f64, [f64; 2]) {
    let d = [x[0] - c[0], if dim == 2 { x[1] - c[1] } else { 0.0 }];
    (d[0].hypot(d[1]), d)
}

impl TestFunction {
    pub fn jet(&self, x: [f64; 2], t: f64, dim: usize) -> Jet {
        match *self {
            TestFunction::Horizon { t_end } => Jet {
                phi: t_end - t,
                dt: -1.0,
                grad: [0.0; 2],
            },
            TestFunction::TimeTent { center, half } => {
                let (phi, dt) = tent(t, center, half);
                Jet {
                    phi,
                    dt,
                    grad: [0.0; 2],
                }
            }
            TestFunction::BumpTent {
                center,
                radius,
                t_center,
                t_half,
            } => {
                let (r, d) = distance(x, center, dim);
                let s = r / radius;
                if s >= 1.0 {
                    return Jet {
                        phi: 0.0,
                        dt: 0.0,
                        grad: [0.0; 2],
                    };
                }
                let q = 1.0 - s * s;
                let b = (1.0 - 1.0 / q).exp();
                // d b / d r = b * (-2 s / radius) / q^2
                let db = -b * 2.0 * s / (radius * q * q);
                let (tt, dtt) = tent(t, t_center, t_half);
                let g = if r > 0.0 {
                    [db * d[0] / r * tt, db * d[1] / r * tt]
                } else {
                    [0.0; 2]
                };
                Jet {
                    phi: b * tt,
                    dt: b * dtt,
                    grad: g,
                }
            }
            TestFunction::Cone { apex, radius } => {
                let (r, d) = distance(x, apex, dim);
                let phi = radius - t - r;
                if phi <= 0.0 {
                    Jet {
                        phi: 0.0,
                        dt: 0.0,
                        grad: [0.0; 2],
                    }
                } else {
                    let g = if r > 0.0 {
                        [-d[0] / r, -d[1] / r]
                    } else {
                        [0.0; 2]
                    };
                    Jet {
                        phi,
                        dt: -1.0,
                        grad: g,
                    }
                }
            }
        }
    }

    pub fn phi(&self, x: [f64; 2], t: f64, dim: usize) -> f64 {
        self.jet(x, t, dim).phi
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Horizon { t_end } => write!(f, "horizon(T={t_end})"),
            TestFunction::TimeTent { center, half } => write!(f, "tent(t0={center}, w={half})"),
            TestFunction::BumpTent {
                center,
                radius,
                t_center,
                t_half,
            } => write!(
                f,
                "bump(x0=({}, {}), r={radius}) x tent(t0={t_center}, w={t_half})",
                center[0], center[1]
            ),
            TestFunction::Cone { apex, radius } => {
                write!(f, "cone(x0=({}, {}), R={radius})", apex[0], apex[1])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionDictionary {
    pub members: Vec<TestFunction>,
}

impl TestFunctionDictionary {
    /// Five functions adapted to the grid and the horizon `t_end`: the
    /// horizon itself, a time tent, a centred bump times a tent, a centred
    /// cone reaching the boundary, and a cone anchored at the low corner.
    pub fn standard(grid: &Grid, t_end: f64) -> Self {
        let o = grid.origin();
        let e = grid.extent();
        let dim = grid.dim();
        let mid = [
            o[0] + 0.5 * e[0],
            if dim == 2 { o[1] + 0.5 * e[1] } else { 0.0 },
        ];
        let corner = [o[0], if dim == 2 { o[1] } else { 0.0 }];
        let span = if dim == 2 { e[0].min(e[1]) } else { e[0] };
        TestFunctionDictionary {
            members: vec![
                TestFunction::Horizon { t_end },
                TestFunction::TimeTent {
                    center: 0.5 * t_end,
                    half: 0.5 * t_end,
                },
                TestFunction::BumpTent {
                    center: mid,
                    radius: span / 3.0,
                    t_center: 0.5 * t_end,
                    t_half: 0.5 * t_end,
                },
                TestFunction::Cone {
                    apex: mid,
                    radius: 0.25 * span + t_end,
                },
                TestFunction::Cone {
                    apex: corner,
                    radius: 0.5 * span + 0.5 * t_end,
                },
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}
