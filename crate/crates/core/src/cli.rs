//! Command-line front end.
//!
//! Precedence for every setting: flags, then the config file, then defaults.
//! CSV outputs open with a `#` line holding the canonical run configuration;
//! JSON reports carry the same information under a `"config"` key.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::exec::{with_workers, Execution};
use crate::output::{round12, write_echo};
use crate::params::{classicality_diagnostics, PhysConstants, LAMBDA_CSL};
use crate::propagator::{f_from_probes, Fault, Propagator, DEFAULT_STEPS_PER_PERIOD};
use crate::quadrature::{ThermalQuadrature, DEFAULT_ORDER};
use crate::scan::{
    csl_threshold_curve, log_axis, optimal_temperature, run_scan, write_curve_csv,
    DEFAULT_GAMMA_RANGE, DEFAULT_POINTS, DEFAULT_T_RANGE,
};
use crate::validate::{reference_point, run_validation, ValidationOptions};
use crate::visibility::{
    check_quadrature_inputs, first_revival, quadrature_from_probes, thermal_from_f,
    visibility_closed_form, visibility_quadrature, visibility_thermal, write_csv,
    VisibilitySeries,
};

/// Exit status when the validation suite reports a failure.
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "mirrorvis", version, about = "Photon visibility revivals from a vibrating mirror")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derived dimensionless parameters as JSON.
    Params(ParamsArgs),
    /// Visibility time series as CSV.
    Visibility(VisibilityArgs),
    /// First-revival height as JSON.
    Revival(ParamsArgs),
    /// First-revival visibility over a (T, gamma) grid.
    Scan(ScanArgs),
    /// Run the built-in invariant checks.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteChoice {
    Ode,
    Closed,
    Quadrature,
    All,
}

#[derive(Debug, Args)]
pub struct VisibilityArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Time span in mechanical periods 2 pi / omega_m.
    #[arg(long, default_value_t = 3.0)]
    pub periods: f64,
    #[arg(long, default_value_t = DEFAULT_STEPS_PER_PERIOD)]
    pub steps_per_period: usize,
    #[arg(long, value_enum, default_value_t = RouteChoice::All)]
    pub route: RouteChoice,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub quad_order: usize,
    /// Also write the vacuum-probe coefficient trajectory to this CSV.
    #[arg(long)]
    pub dump_trajectory: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Physical-mode config supplying M, omega_m, omega_c, L (default: laboratory reference point).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Grid CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Threshold-curve CSV (default: next to --out with a `_csl` suffix).
    #[arg(long)]
    pub curve_out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_T_RANGE.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = DEFAULT_T_RANGE.1)]
    pub t_max: f64,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub t_points: usize,
    #[arg(long, default_value_t = DEFAULT_GAMMA_RANGE.0)]
    pub gamma_min: f64,
    #[arg(long, default_value_t = DEFAULT_GAMMA_RANGE.1)]
    pub gamma_max: f64,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub gamma_points: usize,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Default 1, or the config file value when present.
    #[arg(long)]
    pub lambda_qq: Option<f64>,
    /// Default 0, or the config file value when present.
    #[arg(long)]
    pub lambda_nonenv: Option<f64>,
    #[arg(long, default_value_t = LAMBDA_CSL)]
    pub csl_line: f64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Accepted for symmetry with other commands; the checks use fixed test points.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tolerance for the exact stationarity and step-halving checks.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Flip the sign of the restoring term in dc5/dtau (self-test of the suite).
    #[arg(long)]
    pub inject_fault: bool,
}

/// Parse arguments, run, and map the outcome to an exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    let workers = cli.workers;
    if workers == Some(0) {
        return Err(Error::invalid("workers", "must be >= 1"));
    }
    with_workers(workers, move || dispatch(cli.command))
}

fn dispatch(cmd: Command) -> Result<i32> {
    let consts = PhysConstants::CODATA;
    match cmd {
        Command::Params(a) => cmd_params(&a, &consts).map(|_| 0),
        Command::Revival(a) => cmd_revival(&a, &consts).map(|_| 0),
        Command::Visibility(a) => cmd_visibility(&a, &consts).map(|_| 0),
        Command::Scan(a) => cmd_scan(&a, &consts).map(|_| 0),
        Command::Validate(a) => cmd_validate(&a),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Error::Config(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn num(x: Option<f64>) -> Value {
    match x {
        Some(v) if v.is_finite() => json!(round12(v)),
        _ => Value::Null,
    }
}

fn write_json(out: Option<&Path>, v: &Value) -> Result<()> {
    let mut w = open_out(out)?;
    writeln!(w, "{}", serde_json::to_string_pretty(v).expect("json value"))?;
    w.flush()?;
    Ok(())
}

pub fn cmd_params(a: &ParamsArgs, consts: &PhysConstants) -> Result<()> {
    let cfg = ModelConfig::load(&a.config)?;
    let d = cfg.resolve(consts)?;
    let (extinction, narrowing) = classicality_diagnostics(&d);
    let report = json!({
        "sigma": num(d.sigma),
        "kappa": num(Some(d.kappa)),
        "Lambda_T": num(Some(d.lambda_t)),
        "Lambda": num(Some(d.lambda)),
        "chi": num(Some(d.chi)),
        "inv_Q": num(Some(d.inv_q)),
        "n_bar": num(Some(d.n_bar)),
        "omega_tilde": num(d.omega_tilde),
        "extinction": num(Some(extinction)),
        "narrowing": num(Some(narrowing)),
        "config": cfg.to_json_value(),
    });
    write_json(a.out.as_deref(), &report)
}

pub fn cmd_revival(a: &ParamsArgs, consts: &PhysConstants) -> Result<()> {
    let cfg = ModelConfig::load(&a.config)?;
    let d = cfg.resolve(consts)?;
    let r = first_revival(&d)?;
    let gamma_t1 = d.gamma() * r.t1_s;
    let report = json!({
        "t1_s": num(Some(r.t1_s)),
        "nu": num(Some(r.nu)),
        "neg_log_nu": num(Some(r.neg_log_nu)),
        "gamma_t1": num(Some(gamma_t1)),
        "config": cfg.to_json_value(),
    });
    if gamma_t1 >= 1e-4 {
        eprintln!("warning: gamma*t1 = {gamma_t1:e}; friction during the first period is neglected");
    }
    write_json(a.out.as_deref(), &report)
}

pub fn cmd_visibility(a: &VisibilityArgs, consts: &PhysConstants) -> Result<()> {
    let cfg = ModelConfig::load(&a.config)?;
    let d = cfg.resolve(consts)?;
    if !(a.periods >= 0.0 && a.periods.is_finite()) {
        return Err(Error::invalid("periods", "must be a finite number >= 0"));
    }
    let prop = Propagator::new(a.steps_per_period)?.with_execution(Execution::default());
    let quad = ThermalQuadrature::new(a.quad_order)?;
    let tau_max = 2.0 * PI * a.periods;

    let want_ode = matches!(a.route, RouteChoice::Ode | RouteChoice::All);
    let want_closed = matches!(a.route, RouteChoice::Closed | RouteChoice::All);
    let mut want_quad = matches!(a.route, RouteChoice::Quadrature);
    if want_quad {
        check_quadrature_inputs(&d)?;
    } else if a.route == RouteChoice::All {
        want_quad = check_quadrature_inputs(&d).is_ok();
        if !want_quad {
            eprintln!("warning: n_bar = 0, quadrature route skipped");
        }
    }
    if want_closed {
        d.require_underdamped()?;
    }

    let mut series: Vec<VisibilitySeries> = Vec::new();
    let grid = prop.grid(tau_max);
    if want_ode || want_quad {
        if d.kappa == 0.0 {
            if want_ode {
                series.push(visibility_thermal(&d, tau_max, &prop)?);
            }
            if want_quad {
                series.push(visibility_quadrature(&d, tau_max, &prop, a.quad_order)?);
            }
        } else {
            let probes = prop.probes(&d, tau_max)?;
            if want_ode {
                series.push(thermal_from_f(&f_from_probes(&probes, d.kappa)?, &d));
            }
            if want_quad {
                series.push(quadrature_from_probes(&probes, &d, &quad, &prop)?);
            }
        }
    }
    if want_closed {
        let t: Vec<f64> = grid.iter().map(|tau| tau / d.omega_m).collect();
        let s = visibility_closed_form(&d, &t)?;
        if s.high_q_warning {
            eprintln!("warning: closed form used outside its high-Q regime (inv_Q > 0.1)");
        }
        series.push(s);
    }

    let echo = json!({
        "command": "visibility",
        "config": cfg.to_json_value(),
        "periods": a.periods,
        "steps_per_period": a.steps_per_period,
        "route": format!("{:?}", a.route).to_lowercase(),
        "quad_order": a.quad_order,
    });
    let mut w = open_out(a.out.as_deref())?;
    write_echo(&mut w, &echo)?;
    write_csv(&series, &mut w)?;
    w.flush()?;

    if let Some(path) = &a.dump_trajectory {
        let traj = prop.propagate(&d, Complex64::new(0.0, 0.0), tau_max)?;
        let mut w = open_out(Some(path))?;
        write_echo(&mut w, &echo)?;
        traj.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn curve_path(a: &ScanArgs) -> Option<PathBuf> {
    if let Some(p) = &a.curve_out {
        return Some(p.clone());
    }
    let out = a.out.as_ref()?;
    let stem = out.file_stem()?.to_string_lossy();
    Some(out.with_file_name(format!("{stem}_csl.csv")))
}

pub fn cmd_scan(a: &ScanArgs, consts: &PhysConstants) -> Result<()> {
    let (mut base, file) = match &a.config {
        Some(path) => {
            let cfg = ModelConfig::load(path)?;
            let p = cfg.physical().ok_or_else(|| {
                Error::Config("scan needs a physical-mode config (M_kg, omega_m_rad_s, ...)".into())
            })?;
            let raw: Value = serde_json::from_str(&std::fs::read_to_string(path)?)
                .map_err(|e| Error::Config(e.to_string()))?;
            (p, Some(raw))
        }
        None => (reference_point(), None),
    };
    let from_file = |key: &str| file.as_ref().and_then(|v| v.get(key)).and_then(Value::as_f64);
    let lambda_qq = a.lambda_qq.or(from_file("lambda_qq")).unwrap_or(1.0);
    base.lambda_nonenv = a.lambda_nonenv.or(from_file("Lambda_nonenv")).unwrap_or(0.0);
    base.lambda_qq = lambda_qq;
    // reject model knobs up front rather than failing every cell
    base.validate()?;

    let t_axis = log_axis(a.t_min, a.t_max, a.t_points)?;
    let g_axis = log_axis(a.gamma_min, a.gamma_max, a.gamma_points)?;
    let grid = run_scan(&base, &t_axis, &g_axis, a.kappa, lambda_qq, consts, Execution::default())?;
    let curve = csl_threshold_curve(&grid, a.csl_line)?;

    let echo = json!({
        "command": "scan",
        "base": serde_json::to_value(crate::config::PhysicalConfig::from(base)).expect("json"),
        "kappa": a.kappa,
        "lambda_qq": lambda_qq,
        "Lambda_nonenv": base.lambda_nonenv,
        "T_axis": [a.t_min, a.t_max, a.t_points],
        "gamma_axis": [a.gamma_min, a.gamma_max, a.gamma_points],
        "csl_line": a.csl_line,
        "quantity": "first revival only; thermal-average prefactor excluded",
    });

    let mut w = open_out(a.out.as_deref())?;
    write_echo(&mut w, &echo)?;
    grid.write_csv(&mut w)?;
    w.flush()?;

    if let Some(path) = curve_path(a) {
        let mut w = open_out(Some(&path))?;
        write_echo(&mut w, &echo)?;
        write_curve_csv(&curve, &mut w)?;
        w.flush()?;
    }

    for (t, g, msg) in grid.failures() {
        eprintln!("warning: cell T = {t:e} K, gamma = {g:e} /s failed: {msg}");
    }
    if lambda_qq >= 1.0 {
        let t_star = optimal_temperature(base.omega_m, lambda_qq, consts)?;
        let line = format!("T* = {t_star:.6e} K");
        if a.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    Ok(())
}

pub fn cmd_validate(a: &ValidateArgs) -> Result<i32> {
    if let Some(t) = a.tolerance {
        if !(t > 0.0) {
            return Err(Error::invalid("tolerance", "must be > 0"));
        }
    }
    let opts = ValidationOptions {
        tolerance: a.tolerance,
        fault: if a.inject_fault {
            Fault::FlipC5Restoring
        } else {
            Fault::None
        },
        exec: Execution::default(),
    };
    let checks = run_validation(&opts);
    let mut w = open_out(a.out.as_deref())?;
    for c in &checks {
        writeln!(w, "{c}")?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    writeln!(w, "{} checks, {} failed", checks.len(), failed)?;
    w.flush()?;
    Ok(if failed == 0 { 0 } else { EXIT_VALIDATION })
}
