//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use plastodyn::algebra::{
    boundary_quadratic, build_anu, build_m, build_system, check_admissible, decompose, Direction,
    Side,
};
use plastodyn::constitutive::{dot, norm, perzyna_rate, perzyna_resolvent, PsiFamily};
use plastodyn::diagnostics::{
    boundary_summary, cone_check, data_support, dissipative_verify, kato_check, translation_probe,
    KappaGrid, TestFunctionDictionary, DISSIPATIVE_TOL, KATO_TOL,
};
use plastodyn::plastic::{
    run_limit_study, run_plastic, run_plastic_with, run_vanishing_viscosity, LimitMode,
};
use plastodyn::scenario::{Loading, Profile};
use plastodyn::solver::state_distance;
use plastodyn::{Grid, InitialData, RunOptions, Scenario, Source, Trajectory};

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn unit_grid(nx: usize) -> Grid {
    Grid::new_1d(nx, 1.0 / nx as f64, 0.0).unwrap()
}

fn pulse(profile: Profile, loading: Loading, c: f64, w: f64, a: f64) -> InitialData {
    InitialData::Pulse {
        profile,
        loading,
        center: [c, 0.0],
        width: w,
        amplitude: a,
    }
}

fn random_direction(rng: &mut StdRng, dim: usize) -> Direction {
    if dim == 1 {
        Direction::new(&[if rng.gen_bool(0.5) { 1.0 } else { -1.0 }]).unwrap()
    } else {
        let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        Direction::new(&[a.cos(), a.sin()]).unwrap()
    }
}

fn algebra_suite() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let (mut recon, mut kernel, mut quad) = (0.0f64, 0.0f64, 0.0f64);
    let mut admissible = 0;
    for i in 0..200 {
        let dim = 1 + i % 2;
        let lambda = 10f64.powf(rng.gen_range(-2.0..2.0));
        let nu = random_direction(&mut rng, dim);
        let m = build_m(lambda, &nu).unwrap();
        if check_admissible(&m.m, &nu).unwrap().is_ok() {
            admissible += 1;
        }
        let anu = build_anu(&build_system(dim).unwrap(), &nu).unwrap();
        let kappa: Vec<f64> = (0..=dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let t = decompose(&kappa, &nu, lambda).unwrap();
        let r = t.reconstruct();
        recon = recon.max(
            r.iter()
                .zip(&kappa)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
        let res = |mat: &plastodyn::algebra::Matrix, x: &[f64]| norm(&mat.mul_vec(x));
        kernel = kernel
            .max(res(&anu, &t.k0))
            .max(res(&anu.sub(&m.m), &t.kminus))
            .max(res(&anu.add(&m.m), &t.kplus));
        let tn = nu.dot(&kappa[1..]);
        let direct = m.m.quadratic(&t.kplus);
        let closed = boundary_quadratic(kappa[0], tn, lambda, Side::Plus);
        quad = quad.max((direct - closed).abs() / direct.abs().max(1.0));
        let direct = m.m.quadratic(&t.kminus);
        let closed = boundary_quadratic(kappa[0], tn, lambda, Side::Minus);
        quad = quad.max((direct - closed).abs() / direct.abs().max(1.0));
    }
    let pass = admissible == 200 && recon <= 1e-10 && kernel <= 1e-10 && quad <= 1e-10;
    (
        pass,
        format!("admissible {admissible}/200, reconstruction {recon:.1e}, kernels {kernel:.1e}, boundary quadratic {quad:.1e}"),
    )
}

/// Radial bisection for `rho + r (rho - 1) = |trial|`, `rho in [1, |trial|]`.
fn resolvent_by_bisection(trial: &[f64], r: f64) -> Vec<f64> {
    let n = norm(trial);
    if n <= 1.0 {
        return trial.to_vec();
    }
    let (mut lo, mut hi) = (1.0, n);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid + r * (mid - 1.0) > n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let rho = 0.5 * (lo + hi);
    trial.iter().map(|x| x * rho / n).collect()
}

fn convex_suite() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let mut conj = 0.0f64;
    for _ in 0..1000 {
        let dim = rng.gen_range(1..=2);
        let sigma: Vec<f64> = (0..dim).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let eps = 10f64.powf(rng.gen_range(-3.0..1.0));
        let p = perzyna_rate(&sigma, eps).unwrap();
        let lhs = dot(&sigma, &p);
        let rhs = norm(&p) + eps * norm(&p).powi(2);
        conj = conj.max((lhs - rhs).abs() / rhs.abs().max(1.0));
    }
    let mut fy = 0.0f64;
    for _ in 0..1000 {
        let lambda = 10f64.powf(rng.gen_range(-2.0..2.0));
        let psi = PsiFamily::new(lambda).unwrap();
        let z = rng.gen_range(-5.0..5.0) * lambda;
        let y = psi.psi_prime(z);
        let star = psi.psi_star(y).finite().unwrap_or(f64::INFINITY);
        fy = fy.max((psi.psi(z) + star - z * y).abs() / (z * y).abs().max(1.0));
    }
    let mut res = 0.0f64;
    for _ in 0..1000 {
        let dim = rng.gen_range(1..=2);
        let trial: Vec<f64> = (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let r = 10f64.powf(rng.gen_range(-3.0..3.0));
        let a = perzyna_resolvent(&trial, r).unwrap();
        let b = resolvent_by_bisection(&trial, r);
        res = res.max(
            a.iter()
                .zip(&b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        );
    }
    let pass = conj <= 1e-12 && fy <= 1e-12 && res <= 1e-12;
    (
        pass,
        format!("conjugacy {conj:.1e}, Fenchel-Young {fy:.1e}, resolvent vs bisection {res:.1e}"),
    )
}

fn dalembert_error(nx: usize) -> (f64, f64) {
    let (c, w, a) = (0.5, 0.25, 0.4);
    let g = unit_grid(nx);
    let sc = Scenario::new(g.clone(), &pulse(Profile::Bump, Loading::Velocity, c, w, a));
    let tr = run_plastic(&sc).unwrap();
    let bump = |x: f64| Profile::Bump.eval((x - c).abs(), w);
    let mut err = 0.0f64;
    let mut smax = 0.0f64;
    for s in &tr.snapshots {
        let t = s.t;
        for i in 0..nx {
            let x = g.cell_center(i)[0];
            let exact = 0.5 * a * (bump(x - t) + bump(x + t));
            err = err.max((s.state.v[i] - exact).abs());
        }
        for f in 1..nx {
            let x = g.xface_center(f)[0];
            let exact = 0.5 * a * (bump(x + t) - bump(x - t));
            err = err.max((s.state.sigma.x[f] - exact).abs());
            smax = smax.max(s.state.sigma.x[f].abs());
        }
    }
    (err, smax)
}

fn elastic_oracle() -> Outcome {
    let e: Vec<(f64, f64)> = [200, 400, 800]
        .iter()
        .map(|&n| dalembert_error(n))
        .collect();
    let (r1, r2) = (e[0].0 / e[1].0, e[1].0 / e[2].0);
    let first_order = |r: f64| (1.6..=2.5).contains(&r);
    let smax = e.iter().map(|x| x.1).fold(0.0, f64::max);
    let pass = e[1].0 <= 5e-3 && first_order(r1) && first_order(r2) && smax <= 0.5;
    (
        pass,
        format!(
            "sup error {:.2e} / {:.2e} / {:.2e} (nx 200/400/800), ratios {r1:.2} {r2:.2}, max|sigma| {smax:.3}",
            e[0].0, e[1].0, e[2].0
        ),
    )
}

fn impedance_reflection() -> Outcome {
    let nx = 400;
    let g = unit_grid(nx);
    let (c, w, a) = (0.6, 0.05, 0.3);
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for lambda in [0.5, 1.0, 3.0] {
        let sc = Scenario::new(
            g.clone(),
            &pulse(Profile::Gaussian, Loading::Right, c, w, a),
        )
        .with_lambda(lambda);
        let tr = run_plastic(&sc).unwrap();
        let v = &tr.last().v;
        // characteristics: the reflected pulse is centred at 2 - c - T
        let centre = 2.0 - c - tr.t_final();
        let (mut num, mut den) = (0.0, 0.0);
        for (i, vi) in v.iter().enumerate() {
            let shape = Profile::Gaussian.eval((g.cell_center(i)[0] - centre).abs(), w);
            num += vi * shape;
            den += a * shape * shape;
        }
        let measured = num / den;
        let exact = (lambda - 1.0) / (lambda + 1.0);
        worst = worst.max((measured - exact).abs());
        parts.push(format!(
            "lambda={lambda}: R={measured:+.4} (exact {exact:+.4})"
        ));
    }
    (worst <= 0.05, parts.join(", "))
}

fn energy_balance() -> Outcome {
    let mut cs = Vec::new();
    let mut monotone = true;
    for nx in [200, 400, 800] {
        let sc = Scenario::new(
            unit_grid(nx),
            &pulse(Profile::Bump, Loading::Velocity, 0.5, 0.2, 3.0),
        );
        let tr = run_plastic(&sc).unwrap();
        let (res, _) = tr.ledger.max_abs_residual();
        cs.push(res / (tr.dt + tr.grid.h()));
        monotone &= tr.ledger.monotone();
    }
    let stable = cs.windows(2).all(|w| (0.5..=2.0).contains(&(w[1] / w[0])));
    (
        stable && monotone,
        format!(
            "C = residual/(dt+h): {:.3} / {:.3} / {:.3}, dissipation columns monotone: {monotone}",
            cs[0], cs[1], cs[2]
        ),
    )
}

fn stress_and_flow() -> Outcome {
    let mut runs: Vec<Trajectory> = Vec::new();
    let sc = Scenario::new(
        unit_grid(400),
        &pulse(Profile::Bump, Loading::Velocity, 0.5, 0.2, 3.0),
    )
    .with_source(Source::Pulse {
        profile: Profile::Gaussian,
        center: [0.3, 0.0],
        width: 0.05,
        amplitude: 5.0,
        omega: 4.0,
    });
    runs.push(run_plastic(&sc).unwrap());
    let g2 = Grid::new_2d(48, 48, 1.0 / 48.0, [0.0, 0.0]).unwrap();
    let data = InitialData::Pulse {
        profile: Profile::Bump,
        loading: Loading::Velocity,
        center: [0.5, 0.5],
        width: 0.25,
        amplitude: 3.0,
    };
    runs.push(run_plastic(&Scenario::new(g2, &data).with_t_final(0.5)).unwrap());
    let mut smax = 0.0f64;
    let mut flow = 0.0f64;
    let mut active = 0;
    for tr in &runs {
        for s in &tr.stats {
            smax = smax.max(s.max_sigma);
            if s.plastic_active {
                active += 1;
                flow = flow.max(s.flow_residual);
            }
        }
    }
    (
        smax <= 1.0 && flow <= 1e-10 && active > 0,
        format!("max|sigma| {smax:.17}, flow residual {flow:.1e} over {active} plastic steps (1D with source, 2D)"),
    )
}

fn finite_speed() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let g = unit_grid(400);
    let mut passed = 0;
    let mut worst = 0.0f64;
    for k in 0..10 {
        let c = rng.gen_range(0.35..0.65);
        let w = rng.gen_range(0.05..0.15);
        let a: f64 = rng.gen_range(0.1..5.0);
        let loading = if a > 0.9 {
            Loading::Velocity
        } else {
            [
                Loading::Velocity,
                Loading::Right,
                Loading::Left,
                Loading::Stress,
            ][rng.gen_range(0..4)]
        };
        let mut sc = Scenario::new(g.clone(), &pulse(Profile::Bump, loading, c, w, a))
            .with_t_final(0.25)
            .with_cfl(1.0);
        if k % 2 == 1 {
            sc = sc.with_source(Source::Pulse {
                profile: Profile::Bump,
                center: [c + 0.05, 0.0],
                width: 0.05,
                amplitude: rng.gen_range(0.5..5.0),
                omega: 6.0,
            });
        }
        let tr = run_plastic(&sc).unwrap();
        let (b, th) = data_support(&tr, 1e-12).unwrap().unwrap();
        let r = cone_check(&tr, &b, th).unwrap();
        worst = worst.max(r.worst_violation);
        passed += usize::from(r.pass);
    }
    (
        passed == 10,
        format!("{passed}/10 pulses (5 with sources) inside the cone, worst overshoot {worst:.1e}"),
    )
}

fn kato_uniqueness() -> Outcome {
    let source = Source::Pulse {
        profile: Profile::Gaussian,
        center: [0.3, 0.0],
        width: 0.1,
        amplitude: 1.0,
        omega: 4.0,
    };
    let mut identical = true;
    let mut kato_ok = true;
    let mut cs = Vec::new();
    let mut bound_ok = true;
    let mut c_coarse = None;
    for nx in [100, 200, 400, 800] {
        let g = unit_grid(nx);
        let s1 = Scenario::new(
            g.clone(),
            &pulse(Profile::Bump, Loading::Velocity, 0.5, 0.2, 0.4),
        )
        .with_source(source.clone());
        let s2 = Scenario::new(
            g.clone(),
            &pulse(Profile::Bump, Loading::Velocity, 0.52, 0.2, 0.42),
        )
        .with_source(source.clone());
        let a = run_plastic(&s1).unwrap();
        identical &= run_plastic(&s1).unwrap().snapshots == a.snapshots;
        let b = run_plastic(&s2).unwrap();
        let delta = state_distance(&g, a.initial(), b.initial());
        let mut c = 0.0f64;
        for (x, y) in a.snapshots.iter().zip(&b.snapshots).skip(1) {
            let d = state_distance(&g, &x.state, &y.state);
            c = c.max((d / delta - 1.0).max(0.0) / x.t);
        }
        let last = state_distance(&g, a.last(), b.last());
        let c0 = *c_coarse.get_or_insert(c);
        bound_ok &= last <= delta * (1.0 + c0 * a.t_final());
        for phi in &TestFunctionDictionary::standard(&g, a.t_final()).members {
            kato_ok &= kato_check(&a, &b, phi, KATO_TOL).unwrap().pass;
        }
        cs.push(c);
    }
    let shrinking = cs.windows(2).all(|w| w[1] < w[0] || w[0] == 0.0);
    (
        identical && kato_ok && shrinking && bound_ok,
        format!(
            "bit-identical reruns: {identical}, C = {:.3e} / {:.3e} / {:.3e} / {:.3e} (nx 100..800), Kato checks pass: {kato_ok}",
            cs[0], cs[1], cs[2], cs[3]
        ),
    )
}

fn vanishing_viscosity() -> Outcome {
    let len = 40.0;
    let g = Grid::new_1d(400, len / 400.0, 0.0).unwrap();
    let data = pulse(Profile::Gaussian, Loading::Velocity, 0.5 * len, 3.0, 10.0);
    let tab = run_vanishing_viscosity(&Scenario::new(g, &data), &[0.1, 0.03, 0.01]).unwrap();
    let r = &tab.rows;
    let ratio = r[0].viscous_gradient / r[2].viscous_gradient;
    (
        tab.deviations_decrease() && ratio >= 3.0,
        format!(
            "dev_v {:.4} {:.4} {:.4}, dev_sigma {:.4} {:.4} {:.4}, sqrt(eps) grad v ratio {ratio:.3}",
            r[0].dev_v, r[1].dev_v, r[2].dev_v, r[0].dev_sigma, r[1].dev_sigma, r[2].dev_sigma
        ),
    )
}

fn lambda_limits() -> Outcome {
    let sc = Scenario::new(
        unit_grid(400),
        &pulse(Profile::Bump, Loading::Velocity, 0.5, 0.2, 3.0),
    );
    let d = run_limit_study(&sc, &[1e-1, 1e-2, 1e-3], LimitMode::Dirichlet).unwrap();
    let n = run_limit_study(&sc, &[1e1, 1e2, 1e3], LimitMode::Neumann).unwrap();
    let dl = d.rows.last().unwrap();
    let nl = n.rows.last().unwrap();
    let pass = d.gaps_decrease() && n.gaps_decrease() && dl.gap <= 5e-2 && nl.gap <= 5e-2;
    (
        pass,
        format!(
            "Dirichlet gaps {:.2e} {:.2e} {:.2e} (boundary flow {:.1e}), Neumann gaps {:.2e} {:.2e} {:.2e} (traction {:.1e})",
            d.rows[0].gap, d.rows[1].gap, dl.gap, dl.boundary_flow, n.rows[0].gap, n.rows[1].gap, nl.gap, nl.boundary_traction
        ),
    )
}

fn dissipative() -> Outcome {
    let sc = Scenario::new(
        unit_grid(800),
        &pulse(Profile::Bump, Loading::Velocity, 0.5, 0.2, 3.0),
    );
    let tr = run_plastic_with(&sc, RunOptions { stride: 4 }).unwrap();
    let kg = KappaGrid::for_trajectory(&tr);
    let dict = TestFunctionDictionary::standard(&tr.grid, tr.t_final());
    let pairs = kg.len() * dict.len();
    let honest = dissipative_verify(&tr, &kg, &dict, &tr.source, DISSIPATIVE_TOL).unwrap();
    let mut forged = tr.clone();
    for s in forged.snapshots.iter_mut().skip(1) {
        for x in s.state.sigma.iter_mut() {
            *x *= 1.2;
        }
    }
    let fake = dissipative_verify(&forged, &kg, &dict, &forged.source, DISSIPATIVE_TOL).unwrap();
    let tol = honest.tolerance;
    let pass = pairs == 200 && honest.pass && -fake.worst_violation < -10.0 * tol;
    (
        pass,
        format!(
            "{pairs} pairs, solver margin {:+.2e} (tol {tol:.2e}), forgery margin {:+.2e} at {}",
            -honest.worst_violation, -fake.worst_violation, fake.location
        ),
    )
}

fn boundary_relaxation() -> Outcome {
    let lambda = 0.2;
    let sc = Scenario::new(unit_grid(400), &InitialData::Zero)
        .with_lambda(lambda)
        .with_t_final(0.5)
        .with_source(Source::Pulse {
            profile: Profile::Bump,
            center: [0.97, 0.0],
            width: 0.1,
            amplitude: 20.0,
            omega: 0.0,
        });
    let tr = run_plastic(&sc).unwrap();
    let s = boundary_summary(&tr).unwrap();
    let tol = plastodyn::diagnostics::Tolerance::new(1.0, 1.0).eval(tr.dt, tr.grid.h());
    let pass = s.saturated > 0
        && s.max_velocity > 1.01 * lambda
        && s.sign_error <= 2e-2
        && s.fenchel_residual <= tol;
    (
        pass,
        format!(
            "{} saturated samples, max|v| {:.6} > lambda {lambda}, |sigma.nu + sign v| {:.1e}, Fenchel residual {:.1e} (tol {tol:.1e})",
            s.saturated, s.max_velocity, s.sign_error, s.fenchel_residual
        ),
    )
}

fn translation() -> Outcome {
    let g = unit_grid(400);
    let shifts = [[8, 0], [4, 0], [2, 0], [1, 0]];
    let ratios = |data: &InitialData| -> Vec<f64> {
        let rows = translation_probe(&Scenario::new(g.clone(), data), &shifts, 0.25).unwrap();
        let r: Vec<f64> = rows.iter().map(|r| r.ratio.unwrap()).collect();
        r.windows(2).map(|w| w[1] / w[0]).collect()
    };
    let smooth = ratios(&pulse(Profile::Bump, Loading::Velocity, 0.5, 0.15, 3.0));
    let rough = ratios(&InitialData::Checkerboard {
        center: [0.5, 0.0],
        half: 0.15,
        block: 0.05,
        amplitude: 1.0,
    });
    let pass = smooth.iter().all(|&q| q <= 1.5) && rough.iter().all(|&q| q > 1.5);
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|q| format!("{q:.2}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    (
        pass,
        format!(
            "r(s/2)/r(s) smooth: {}, checkerboard: {}",
            fmt(&smooth),
            fmt(&rough)
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("algebra suite", algebra_suite),
        ("convex-analysis suite", convex_suite),
        ("elastic-regime oracle", elastic_oracle),
        ("impedance reflection", impedance_reflection),
        ("energy balance", energy_balance),
        ("stress constraint and flow rule", stress_and_flow),
        ("finite speed of propagation", finite_speed),
        ("Kato comparison and uniqueness", kato_uniqueness),
        ("vanishing viscosity", vanishing_viscosity),
        ("lambda limits", lambda_limits),
        ("dissipative verifier", dissipative),
        ("boundary relaxation", boundary_relaxation),
        ("translation regularity probe", translation),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = check();
        failed += usize::from(!pass);
        println!(
            "criterion {:>2} {}: {name} ({:.1}s): {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/13 passed", 13 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
