//! `plastodyn` command line.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 bad input, 3 the
//! solver produced non-finite values.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use plastodyn::algebra::{build_m, check_admissible, Direction, Matrix};
use plastodyn::config::RunConfig;
use plastodyn::diagnostics::{
    dissipative_verify, KappaGrid, TestFunctionDictionary, DISSIPATIVE_TOL,
};
use plastodyn::io::{fmt_f64, parse_source_spec, read_trajectory, report_text, write_trajectory};
use plastodyn::plastic::{run_limit_study, run_vanishing_viscosity, LimitMode};
use plastodyn::{BcMode, Error};

#[derive(Parser)]
#[command(
    name = "plastodyn",
    version,
    about = "Dynamic perfect plasticity in anti-plane shear"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a config, write snapshots, ledger and report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `[output] dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Snapshot stride (overrides `[output] stride`).
        #[arg(long)]
        stride: Option<usize>,
        /// Boundary condition (overrides `[params] bc`).
        #[arg(long)]
        mode: Option<Mode>,
    },
    /// Vanishing-viscosity or impedance-limit sweep; writes a CSV table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axis: Axis,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        /// Hard reference for a lambda sweep; inferred from the values if omitted.
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check whether a boundary matrix is admissible for the normal `nu`.
    VerifyBc {
        /// Whitespace-separated rows of numbers.
        matrix: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        nu: Vec<f64>,
        /// Compare against the impedance matrix of this lambda instead of 1/M11.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Run the dissipative inequality over a written trajectory.
    CheckDissipative {
        dir: PathBuf,
        /// Source override: `zero` or `<gaussian|bump> cx cy width amplitude omega`.
        #[arg(long)]
        source: Option<String>,
        /// Bound of the constant-state velocity samples.
        #[arg(long)]
        kmax: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Impedance,
    Dirichlet,
    Neumann,
}

impl From<Mode> for BcMode {
    fn from(m: Mode) -> BcMode {
        match m {
            Mode::Impedance => BcMode::Impedance,
            Mode::Dirichlet => BcMode::Dirichlet,
            Mode::Neumann => BcMode::Neumann,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Eps,
    Lambda,
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let outcome = match cli.command {
        Command::Run {
            config,
            out,
            stride,
            mode,
        } => cmd_run(&config, out, stride, mode),
        Command::Sweep {
            config,
            axis,
            values,
            mode,
            out,
        } => cmd_sweep(&config, axis, &values, mode, out),
        Command::VerifyBc { matrix, nu, lambda } => cmd_verify_bc(&matrix, &nu, lambda),
        Command::CheckDissipative { dir, source, kmax } => {
            cmd_check_dissipative(&dir, source.as_deref(), kmax)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical abort: {m}");
            ExitCode::from(3)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("PLASTODYN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("PLASTODYN_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn cmd_run(
    config: &Path,
    out: Option<PathBuf>,
    stride: Option<usize>,
    mode: Option<Mode>,
) -> Outcome {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = stride {
        if s == 0 {
            return Err(Failure::Input("--stride must be at least 1".into()));
        }
        cfg.stride = s;
    }
    if let Some(m) = mode {
        cfg.scenario = cfg.scenario.with_bc(m.into());
    }
    let out = out.or_else(|| cfg.out_dir.clone()).ok_or_else(|| {
        Failure::Input("no output directory: pass --out or set [output] dir".into())
    })?;
    let traj = cfg.simulate()?;
    write_trajectory(&out, &traj)?;
    let reports = cfg.verify(&traj)?;
    let text = report_text(&reports);
    fs::write(out.join("report.txt"), &text)?;
    print!("{text}");
    println!(
        "{} steps, dt = {}, written to {}",
        traj.steps,
        traj.dt,
        out.display()
    );
    Ok(reports.iter().all(|r| r.pass))
}

fn cmd_sweep(
    config: &Path,
    axis: Axis,
    values: &[f64],
    mode: Option<Mode>,
    out: Option<PathBuf>,
) -> Outcome {
    if values.is_empty() {
        return Err(Failure::Input("--values is empty".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Failure::Input("--values must be finite numbers".into()));
    }
    let cfg = RunConfig::load(config)?;
    let mut csv = String::new();
    let ok = match axis {
        Axis::Eps => {
            let tab = run_vanishing_viscosity(&cfg.scenario, values)?;
            csv.push_str("eps,dev_v,dev_sigma,viscous_gradient,accel_sup\n");
            for r in &tab.rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    fmt_f64(r.eps),
                    fmt_f64(r.dev_v),
                    fmt_f64(r.dev_sigma),
                    fmt_f64(r.viscous_gradient),
                    fmt_f64(r.accel_sup)
                );
            }
            tab.deviations_decrease()
        }
        Axis::Lambda => {
            let limit = match mode {
                Some(Mode::Dirichlet) => LimitMode::Dirichlet,
                Some(Mode::Neumann) => LimitMode::Neumann,
                Some(Mode::Impedance) => {
                    return Err(Failure::Input(
                        "a lambda sweep compares against dirichlet or neumann".into(),
                    ))
                }
                None if values.iter().all(|&v| v < 1.0) => LimitMode::Dirichlet,
                None if values.iter().all(|&v| v > 1.0) => LimitMode::Neumann,
                None => {
                    return Err(Failure::Input(
                        "lambda values straddle 1; pass --mode dirichlet or --mode neumann".into(),
                    ))
                }
            };
            let tab = run_limit_study(&cfg.scenario, values, limit)?;
            csv.push_str("lambda,gap,boundary_traction,boundary_flow\n");
            for r in &tab.rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    fmt_f64(r.lambda),
                    fmt_f64(r.gap),
                    fmt_f64(r.boundary_traction),
                    fmt_f64(r.boundary_flow)
                );
            }
            tab.gaps_decrease()
        }
    };
    if let Some(dir) = out.or(cfg.out_dir) {
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("sweep.csv"), &csv)?;
    }
    print!("{csv}");
    if !ok {
        eprintln!("sweep column is not monotone");
    }
    Ok(ok)
}

fn parse_matrix(text: &str) -> Result<Matrix, Failure> {
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|w| {
                    w.parse::<f64>()
                        .map_err(|_| Failure::Input(format!("`{w}` is not a number")))
                })
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    if rows.is_empty() {
        return Err(Failure::Input("matrix file is empty".into()));
    }
    Matrix::from_rows(&rows).map_err(|_| Failure::Input("matrix is not square".into()))
}

fn cmd_verify_bc(path: &Path, nu: &[f64], lambda: Option<f64>) -> Outcome {
    let m = parse_matrix(&fs::read_to_string(path)?)?;
    let nu = if nu.is_empty() {
        let mut e = vec![0.0; m.size().saturating_sub(1).max(1)];
        e[0] = 1.0;
        e
    } else {
        nu.to_vec()
    };
    let nu = Direction::normalized(&nu)?;
    if m.size() != nu.dim() + 1 {
        return Err(Failure::Input(format!(
            "matrix is {0}x{0} but nu has {1} components",
            m.size(),
            nu.dim()
        )));
    }
    if let Err(reason) = check_admissible(&m, &nu)? {
        println!("not admissible: {reason}");
        return Ok(false);
    }
    println!("admissible");
    let m11 = m.rows()[0][0];
    let recovered = lambda.or((m11 > 0.0).then(|| 1.0 / m11));
    match recovered {
        Some(l) if l > 0.0 && l.is_finite() => {
            let reference = build_m(l, &nu)?;
            println!("lambda = {l}");
            println!(
                "distance to impedance matrix = {:e}",
                m.max_abs_diff(&reference.m)
            );
        }
        _ => println!("M11 = {m11}: no impedance lambda"),
    }
    Ok(true)
}

fn cmd_check_dissipative(dir: &Path, source: Option<&str>, kmax: Option<f64>) -> Outcome {
    let traj = read_trajectory(dir)?;
    let source = match source {
        Some(s) => parse_source_spec(s)?,
        None => traj.source.clone(),
    };
    let kappas = match kmax {
        Some(k) if k > 0.0 && k.is_finite() => KappaGrid::standard(traj.grid.dim(), k),
        Some(k) => return Err(Failure::Input(format!("--kmax must be positive, got {k}"))),
        None => KappaGrid::for_trajectory(&traj),
    };
    let dict = TestFunctionDictionary::standard(&traj.grid, traj.t_final());
    let r = dissipative_verify(&traj, &kappas, &dict, &source, DISSIPATIVE_TOL)?;
    println!("{} pairs", kappas.len() * dict.len());
    println!("{r}");
    println!("margin = {:e} at {}", -r.worst_violation, r.location);
    Ok(r.pass)
}
