//! The `instab` command-line tool.
//!
//! Exit codes: `0` success, `1` failed verification or I/O error, `2` usage
//! error (bad flags, unsupported class or parameter), `3` no root or no
//! convergence.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::contfrac::{Truncation, DEFAULT_MAX_DEPTH};
use crate::dispersion::{nu0_estimate, DispersionSpec, Nu0Options, RootOptions};
use crate::eigensystem::{build_w, EigenOptions};
use crate::error::Error;
use crate::lattice::{classify, enumerate_classes, LatticeVector};
use crate::models::{FlowParams, GammaStrategy, ModelKind};
use crate::spectral::{det_i_plus_k, det_root, growth_rate, max_real_eig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "instab", version, about = "Linear instability of unidirectional 2D flows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify orbits: a single `--q`, or every class within `--radius`.
    Classify(ClassifyArgs),
    /// Positive root of the dispersion equation.
    Root(RootArgs),
    /// Critical viscosity estimate.
    Nu0(Nu0Args),
    /// Eigenvector built from the root.
    Eigvec(EigvecArgs),
    /// Perturbation determinant over a λ grid.
    Det(DetArgs),
    /// Growth rate of the truncated linear dynamics.
    Simulate(SimulateArgs),
    /// Dispersion curve data (λ scan) or `h(ν)` data (ν scan) as CSV.
    Curve(CurveArgs),
    /// Cross-check the root against the matrix and determinant oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Instance {
    #[arg(long, default_value = "ns")]
    pub model: ModelKind,
    #[arg(long, allow_hyphen_values = true)]
    pub p: LatticeVector,
    #[arg(long, allow_hyphen_values = true)]
    pub q: LatticeVector,
    #[arg(long)]
    pub nu: f64,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Explicit steady-state amplitude (default: normalized).
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
}

impl Instance {
    fn params(&self) -> Result<FlowParams, Error> {
        let params = FlowParams::new(self.model, self.p, self.q, self.nu, self.alpha)?;
        match self.gamma {
            Some(g) => params.with_gamma(GammaStrategy::Explicit(g)),
            None => Ok(params),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Fixed truncation depth instead of adaptive evaluation.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    pub max_depth: usize,
    #[arg(long)]
    pub lambda_cap: Option<f64>,
}

impl SolveArgs {
    fn truncation(&self) -> Truncation {
        match self.depth {
            Some(k) => Truncation::Fixed(k),
            None => Truncation::Adaptive {
                tol: self.tol,
                max_depth: self.max_depth,
            },
        }
    }

    fn root_options(&self) -> RootOptions {
        RootOptions {
            lambda_cap: self.lambda_cap,
            ..RootOptions::with_tol(self.tol)
        }
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub p: LatticeVector,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "radius")]
    pub q: Option<LatticeVector>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RootArgs {
    #[command(flatten)]
    pub instance: Instance,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Nu0Args {
    #[arg(long, default_value = "ns")]
    pub model: ModelKind,
    #[arg(long, allow_hyphen_values = true)]
    pub p: LatticeVector,
    #[arg(long, allow_hyphen_values = true)]
    pub q: LatticeVector,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub nu_min: f64,
    #[arg(long, default_value_t = 1e3)]
    pub nu_max: f64,
    #[arg(long, default_value_t = 1 << 20)]
    pub max_depth: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EigvecArgs {
    #[command(flatten)]
    pub instance: Instance,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, default_value_t = 64)]
    pub window: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetArgs {
    #[command(flatten)]
    pub instance: Instance,
    #[arg(long, default_value_t = 128)]
    pub window: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub lambda_step: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub instance: Instance,
    #[arg(long, default_value_t = 32)]
    pub window: usize,
    #[arg(long, default_value_t = 30.0)]
    pub t_final: f64,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scan {
    Lambda,
    Nu,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub instance: Instance,
    #[arg(long, value_enum, default_value = "lambda")]
    pub scan: Scan,
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    #[arg(long, default_value_t = 2.0)]
    pub to: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Fixed truncation depth (adaptive when absent).
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    pub max_depth: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub instance: Instance,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 128)]
    pub window: usize,
    /// Agreement required between the three roots (relative to `max(1, λ)`).
    #[arg(long, default_value_t = 1e-8)]
    pub agree: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Failure of a subcommand, mapped to an exit code.
#[derive(Debug)]
enum Failure {
    Domain(Error),
    Usage(String),
    Io(io::Error),
    /// Already reported; just exit with this code.
    Reported(i32),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(io::Error::other(e))
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoSignChange { .. } | Error::NoConvergence { .. } | Error::NotFound { .. } => 3,
        Error::ZeroWavevector
        | Error::Parallel { .. }
        | Error::InvalidParameter(_)
        | Error::UnsupportedClass { .. }
        | Error::UnsupportedModel { .. }
        | Error::IndexUndefined { .. } => 2,
        _ => 1,
    }
}

/// Parse `args` (including the program name) and run.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(Failure::Reported(code)) => code,
    }
}

fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("INSTAB_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        builder = builder.num_threads(n);
    }
    builder.build().expect("thread pool")
}

fn open_output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_json(path: &Option<PathBuf>, value: &Value) -> Result<(), Failure> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(io::Error::other)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Fixed 17-significant-digit rendering used in every CSV file.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer(path: &Option<PathBuf>) -> io::Result<csv::Writer<Box<dyn Write>>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(open_output(path)?))
}

/// `start, start + step, …` up to `end` inclusive (with a small slack).
pub fn linear_grid(start: f64, end: f64, step: f64) -> Option<Vec<f64>> {
    if !(step > 0.0 && start.is_finite() && end.is_finite() && end >= start) {
        return None;
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Some((0..count).map(|i| start + i as f64 * step).collect())
}

fn instance_json(params: &FlowParams, q_input: LatticeVector) -> Value {
    json!({
        "model": params.model().label(),
        "p": [params.p().x, params.p().y],
        "q": [params.q().x, params.q().y],
        "q_input": [q_input.x, q_input.y],
        "class": params.class().label(),
        "nu": params.nu(),
        "alpha": if params.model().needs_alpha() { json!(params.alpha()) } else { Value::Null },
        "gamma": params.gamma().ok(),
    })
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Classify(a) => cmd_classify(a),
        Command::Root(a) => cmd_root(a),
        Command::Nu0(a) => cmd_nu0(a),
        Command::Eigvec(a) => cmd_eigvec(a),
        Command::Det(a) => cmd_det(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Curve(a) => cmd_curve(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn cmd_classify(a: ClassifyArgs) -> Result<(), Failure> {
    if a.p.is_zero() {
        return Err(Error::ZeroWavevector.into());
    }
    let rows: Vec<(LatticeVector, i64, &'static str)> = match (a.q, a.radius) {
        (Some(q), _) => {
            let orbit = crate::lattice::canonical_rep(q, a.p);
            vec![(orbit.rep, orbit.shift, classify(q, a.p).label())]
        }
        (None, Some(r)) if r > 0.0 => enumerate_classes(a.p, r)
            .into_iter()
            .map(|(o, c)| (o.rep, o.shift, c.label()))
            .collect(),
        _ => return Err(Failure::Usage("classify needs --q or a positive --radius".into())),
    };
    match a.format {
        Format::Json => {
            let entries: Vec<Value> = rows
                .iter()
                .map(|(q, s, c)| json!({"q": [q.x, q.y], "shift": s, "class": c}))
                .collect();
            write_json(
                &a.output,
                &json!({"schema": SCHEMA_VERSION, "command": "classify", "p": [a.p.x, a.p.y], "classes": entries}),
            )
        }
        Format::Csv => {
            let mut w = csv_writer(&a.output)?;
            w.write_record(["qx", "qy", "class"])?;
            for (q, _, c) in rows {
                w.write_record([q.x.to_string(), q.y.to_string(), c.to_string()])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn cmd_root(a: RootArgs) -> Result<(), Failure> {
    let params = a.instance.params()?;
    let spec = DispersionSpec::new(params.clone(), a.solve.truncation())?;
    let instance = instance_json(&params, a.instance.q);
    match spec.find_root(&a.solve.root_options()) {
        Ok(r) => write_json(
            &a.output,
            &json!({
                "schema": SCHEMA_VERSION,
                "command": "root",
                "instance": instance,
                "found": true,
                "lambda": r.lambda,
                "bracket": [r.bracket.0, r.bracket.1],
                "dispersion_residual": r.dispersion_residual,
                "cf_depth": r.cf_depth,
                "evaluations": r.evaluations,
            }),
        ),
        Err(e @ Error::NoSignChange { .. }) => {
            write_json(
                &a.output,
                &json!({
                    "schema": SCHEMA_VERSION,
                    "command": "root",
                    "instance": instance,
                    "found": false,
                    "diagnostic": e.to_string(),
                }),
            )?;
            eprintln!("no root found: {e}");
            Err(Failure::Reported(3))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_nu0(a: Nu0Args) -> Result<(), Failure> {
    let params = FlowParams::new(a.model, a.p, a.q, a.nu_min, a.alpha)?;
    let opts = Nu0Options {
        tol: a.tol,
        nu_min: a.nu_min,
        nu_max: a.nu_max,
        max_depth: a.max_depth,
        ..Default::default()
    };
    let r = nu0_estimate(&params, &opts)?;
    write_json(
        &a.output,
        &json!({
            "schema": SCHEMA_VERSION,
            "command": "nu0",
            "instance": instance_json(&params, a.q),
            "nu0": r.nu0,
            "bracket": [r.bracket.0, r.bracket.1],
            "evaluations": r.evaluations,
        }),
    )
}

fn cmd_eigvec(a: EigvecArgs) -> Result<(), Failure> {
    let params = a.instance.params()?;
    let spec = DispersionSpec::new(params.clone(), a.solve.truncation())?;
    let root = spec.find_root(&a.solve.root_options())?;
    let ev = build_w(root.lambda, &params, a.window, &EigenOptions::for_root_tol(a.solve.tol))?;
    match a.format {
        Format::Json => {
            let mut v = serde_json::to_value(&ev).map_err(io::Error::other)?;
            let obj = v.as_object_mut().expect("struct serializes to object");
            obj.insert("schema".into(), json!(SCHEMA_VERSION));
            obj.insert("command".into(), json!("eigvec"));
            obj.insert("instance".into(), instance_json(&params, a.instance.q));
            write_json(&a.output, &v)
        }
        Format::Csv => {
            let mut w = csv_writer(&a.output)?;
            w.write_record(["n", "w", "log_abs_w", "sign"])?;
            for (i, n) in ev.indices().enumerate() {
                w.write_record([
                    n.to_string(),
                    fmt_f64(ev.w[i]),
                    fmt_f64(ev.log_abs_w[i]),
                    ev.signs[i].to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn cmd_det(a: DetArgs) -> Result<(), Failure> {
    let params = a.instance.params()?;
    let grid = linear_grid(a.lambda_min, a.lambda_max, a.lambda_step)
        .ok_or_else(|| Failure::Usage("empty lambda grid".into()))?;
    let samples: Vec<_> = thread_pool().install(|| {
        grid.par_iter()
            .map(|&l| det_i_plus_k(l, &params, a.window))
            .collect::<Result<Vec<_>, _>>()
    })?;
    match a.format {
        Format::Json => write_json(
            &a.output,
            &json!({
                "schema": SCHEMA_VERSION,
                "command": "det",
                "instance": instance_json(&params, a.instance.q),
                "samples": samples,
            }),
        ),
        Format::Csv => {
            let mut w = csv_writer(&a.output)?;
            w.write_record(["lambda", "det", "window"])?;
            for s in samples {
                w.write_record([fmt_f64(s.lambda), fmt_f64(s.value), s.window.to_string()])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let params = a.instance.params()?;
    let rate = growth_rate(&params, a.window, a.t_final, a.dt, a.seed)?;
    write_json(
        &a.output,
        &json!({
            "schema": SCHEMA_VERSION,
            "command": "simulate",
            "instance": instance_json(&params, a.instance.q),
            "window": a.window,
            "t_final": a.t_final,
            "seed": a.seed,
            "growth_rate": rate,
        }),
    )
}

fn cmd_curve(a: CurveArgs) -> Result<(), Failure> {
    let params = a.instance.params()?;
    let truncation = match a.depth {
        Some(k) => Truncation::Fixed(k),
        None => Truncation::Adaptive {
            tol: a.tol,
            max_depth: a.max_depth,
        },
    };
    let spec = DispersionSpec::new(params, truncation)?;
    let grid = linear_grid(a.from, a.to, a.step).ok_or_else(|| Failure::Usage("empty grid".into()))?;
    let pool = thread_pool();
    let mut w = csv_writer(&a.output)?;
    match a.scan {
        Scan::Lambda => {
            if spec.params().nu() == 0.0 && grid.contains(&0.0) {
                eprintln!("note: skipping lambda = 0 (all coefficients vanish when nu = 0)");
            }
            let points: Vec<f64> = grid
                .into_iter()
                .filter(|&l| !(l == 0.0 && spec.params().nu() == 0.0))
                .collect();
            if points.is_empty() {
                return Err(Failure::Usage("empty grid".into()));
            }
            let rows = pool.install(|| {
                points
                    .par_iter()
                    .map(|&l| spec.components(l))
                    .collect::<Result<Vec<_>, _>>()
            })?;
            w.write_record(["lambda", "minus_a0", "f_plus_g", "dispersion"])?;
            for c in rows {
                w.write_record([fmt_f64(c.lambda), fmt_f64(-c.a0), fmt_f64(c.tails()), fmt_f64(c.value())])?;
            }
        }
        Scan::Nu => {
            if grid[0] <= 0.0 {
                return Err(Failure::Usage("nu scan must start above zero".into()));
            }
            let rows = pool.install(|| {
                grid.par_iter()
                    .map(|&nu| spec.with_nu(nu).and_then(|s| s.components(0.0)).map(|c| (nu, c)))
                    .collect::<Result<Vec<_>, _>>()
            })?;
            w.write_record(["nu", "h", "rhs"])?;
            for (nu, c) in rows {
                w.write_record([fmt_f64(nu), fmt_f64(c.tails()), fmt_f64(-c.a0)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let params = a.instance.params()?;
    let spec = DispersionSpec::new(params.clone(), Truncation::adaptive(a.tol))?;
    let root = spec.find_root(&RootOptions::with_tol(a.tol))?;
    let lam = root.lambda;
    let scale = lam.abs().max(1.0);
    let matrix = max_real_eig(&params, a.window)?;
    let det_at = det_i_plus_k(lam, &params, a.window)?.value;
    let det_zero = det_root(&params, a.window, (0.9 * lam, 1.1 * lam), a.tol)?;
    let checks = [
        ("matrix", (matrix - lam).abs() <= a.agree * scale, (matrix - lam).abs()),
        ("determinant_root", (det_zero - lam).abs() <= a.agree * scale, (det_zero - lam).abs()),
        ("determinant_at_root", det_at.abs() <= 1e-6, det_at.abs()),
    ];
    for (name, ok, err) in &checks {
        eprintln!("{} {name}: error {err:.3e}", if *ok { "PASS" } else { "FAIL" });
    }
    let all = checks.iter().all(|c| c.1);
    write_json(
        &a.output,
        &json!({
            "schema": SCHEMA_VERSION,
            "command": "verify",
            "instance": instance_json(&params, a.instance.q),
            "lambda_cf": lam,
            "lambda_matrix": matrix,
            "lambda_det": det_zero,
            "det_at_root": det_at,
            "window": a.window,
            "agree": all,
        }),
    )?;
    if all {
        Ok(())
    } else {
        Err(Failure::Reported(1))
    }
}
