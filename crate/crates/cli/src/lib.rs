//! Command-line front-end for `qfrac`.
//!
//! Exit codes: 0 success, 1 failed verification or residual above
//! tolerance, 2 usage/config/numerical error, 3 no contraction, 4 Picard
//! iteration cap reached. Errors print one line `error: <kind>: <detail>`
//! on stderr.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use qfrac::qcore::{q_power_basis, QParams};
use qfrac::qfracops::{caputo_derivative, hilfer_derivative, rl_derivative, rl_integral, FracOrders};
use qfrac::qgrid::{lattice_locate, sample, LatticeGrid, Lower};
use qfrac::qml::{ml_eval_detailed, MLSpec};
use qfrac::solver::{linear_solve, picard_solve_with, Solution};
use qfrac::{verify, Error};

pub use config::ProblemConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_NO_CONTRACTION: i32 = 3;
pub const EXIT_MAX_ITER: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "qfrac", version, about = "Fractional q-calculus on geometric lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply a fractional q-operator to a built-in function; prints `m,x,value` CSV.
    EvalOp(EvalOpArgs),
    /// Solve a Cauchy problem defined in a TOML file.
    Solve(SolveArgs),
    /// Run the identity and property checks.
    Verify(VerifyArgs),
    /// Evaluate the q-Mittag-Leffler function.
    MlEval(MlEvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Op {
    RlInt,
    RlDer,
    Caputo,
    Hilfer,
}

#[derive(Debug, clap::Args)]
pub struct EvalOpArgs {
    #[arg(long, value_enum)]
    pub op: Op,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub alpha: f64,
    /// Type order of the Hilfer derivative; defaults to alpha.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, default_value_t = qfrac::qgrid::DEFAULT_DEPTH)]
    pub depth: usize,
    /// `const:c`, `pow:lambda` for x^lambda, or `powbasis:lambda` for
    /// `x^lambda (a/x; q)_lambda`.
    #[arg(long = "fn", value_parser = parse_fn_spec)]
    pub function: FnSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Picard,
    ClosedForm,
}

#[derive(Debug, clap::Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Picard)]
    pub method: Method,
    /// Solution CSV; the diagnostics go next to it with extension `.diag`.
    #[arg(long, default_value = "solution.csv")]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run only checks whose name contains this string.
    #[arg(long)]
    pub filter: Option<String>,
}

#[derive(Debug, clap::Args)]
pub struct MlEvalArgs {
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long)]
    pub x: f64,
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FnSpec {
    Const(f64),
    Pow(f64),
    PowerBasis(f64),
}

pub fn parse_fn_spec(s: &str) -> std::result::Result<FnSpec, String> {
    let (kind, val) = s.split_once(':').ok_or_else(|| format!("expected kind:value, got {s:?}"))?;
    let v: f64 = val.parse().map_err(|e| format!("{val:?}: {e}"))?;
    match kind {
        "const" => Ok(FnSpec::Const(v)),
        "pow" => Ok(FnSpec::Pow(v)),
        "powbasis" => Ok(FnSpec::PowerBasis(v)),
        _ => Err(format!("unknown function kind {kind:?}; use const, pow or powbasis")),
    }
}

/// A failure with its exit code and one-line message.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub detail: String,
}

impl CliError {
    fn new(code: i32, kind: &'static str, detail: impl Into<String>) -> Self {
        Self { code, kind, detail: detail.into() }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self::new(EXIT_ERROR, "io", format!("{}: {e}", path.display()))
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "error: {}: {}", self.kind, self.detail)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let detail = e.to_string();
        match e {
            Error::NoContraction { .. } => Self::new(EXIT_NO_CONTRACTION, "no-contraction", detail),
            Error::MaxIter { .. } => Self::new(EXIT_MAX_ITER, "max-iter", detail),
            Error::Divergence { ratio } => Self::new(
                EXIT_ERROR,
                "divergence",
                format!("ratio {ratio} violates the convergence condition |lambda| x^alpha (1-q)^alpha < 1"),
            ),
            Error::InvalidParameter(m) => Self::new(EXIT_ERROR, "config", m),
            Error::Parse(m) => Self::new(EXIT_ERROR, "config", m),
            Error::NonConvergence { .. } => Self::new(EXIT_ERROR, "non-convergence", detail),
            Error::Pole(m) => Self::new(EXIT_ERROR, "pole", m),
            Error::Domain(m) => Self::new(EXIT_ERROR, "domain", m),
            Error::OffLattice { .. } => Self::new(EXIT_ERROR, "off-lattice", detail),
            Error::Sample { .. } => Self::new(EXIT_ERROR, "sample", detail),
            Error::Depth { .. } => Self::new(EXIT_ERROR, "depth", detail),
            Error::GridMismatch(m) => Self::new(EXIT_ERROR, "grid-mismatch", m),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
        Err(e) => {
            let text = e.to_string();
            let line: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(|l| l.trim().trim_start_matches("error: "))
                .filter(|l| !l.is_empty() && !l.starts_with("For more information"))
                .collect();
            let _ = writeln!(err, "{}", CliError::new(EXIT_ERROR, "usage", line.join(" ")));
            return EXIT_ERROR;
        }
    };
    let result = match &cli.command {
        Command::EvalOp(a) => cmd_eval_op(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::MlEval(a) => cmd_ml_eval(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.code
        }
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::new(EXIT_ERROR, "io", e.to_string()))
}

/// Integer order `n` with `n - 1 < order <= n`.
fn ceil_order(order: f64) -> u32 {
    (order.ceil() as u32).max(1)
}

pub fn cmd_eval_op(args: &EvalOpArgs, out: &mut dyn Write) -> CliResult<i32> {
    let g = LatticeGrid::new(args.b, args.depth, QParams::new(args.q)?)?;
    let lower = lattice_locate(&g, args.a)?;
    let a = lower.value(&g);
    let params = *g.params();
    let u = match args.function {
        FnSpec::Const(c) => sample(&g, |x| if x > a || lower == Lower::Zero { c } else { 0.0 })?,
        FnSpec::Pow(l) => sample(&g, |x| if x > a || lower == Lower::Zero { x.powf(l) } else { 0.0 })?,
        FnSpec::PowerBasis(l) => {
            sample(&g, |x| if x > a { q_power_basis(&params, x, a, l).unwrap_or(f64::NAN) } else { 0.0 })?
        }
    };
    let v = match args.op {
        Op::RlInt => rl_integral(&u, lower, args.alpha)?,
        Op::RlDer => rl_derivative(&u, lower, args.alpha)?,
        Op::Caputo => caputo_derivative(&u, lower, args.alpha)?,
        Op::Hilfer => {
            let beta = args.beta.unwrap_or(args.alpha);
            let ord = FracOrders::new(args.alpha, beta, args.mu, ceil_order(args.alpha))?;
            hilfer_derivative(&u, lower, &ord)?
        }
    };
    write_out(out, &v.to_csv())?;
    Ok(EXIT_OK)
}

/// `key=value` lines describing a solve.
pub fn diagnostics(method: Method, s: &Solution, residual_tol: f64) -> String {
    let join = |v: &[String]| v.join(",");
    let mut d = String::new();
    let _ = writeln!(d, "method={}", if method == Method::Picard { "picard" } else { "closed-form" });
    let iters: Vec<String> = s.iterations_per_interval.iter().map(|i| i.to_string()).collect();
    let _ = writeln!(d, "iterations={}", join(&iters));
    let _ = writeln!(d, "total_iterations={}", s.iterations_per_interval.iter().sum::<usize>());
    let omegas: Vec<String> = s.omega_per_interval.iter().map(|w| format!("{w:.16e}")).collect();
    let _ = writeln!(d, "omega={}", join(&omegas));
    let bounds: Vec<String> = s.subinterval_boundaries.iter().map(|b| b.to_string()).collect();
    let _ = writeln!(d, "subinterval_boundaries={}", join(&bounds));
    let _ = writeln!(d, "residual_l1={:.16e}", s.residual_l1);
    let _ = writeln!(d, "residual_max={:.16e}", s.residual_max);
    let _ = writeln!(d, "residual_tol={residual_tol:e}");
    let _ = writeln!(d, "pass={}", s.residual_l1 < residual_tol);
    d
}

/// Sidecar path: `out` with its extension replaced by `diag`.
pub fn diag_path(out: &Path) -> PathBuf {
    out.with_extension("diag")
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> CliResult<i32> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let cfg = ProblemConfig::from_toml(&text)?;
    let g = cfg.grid()?;
    let s = match args.method {
        Method::Picard => picard_solve_with(&cfg.cauchy()?, &g, &cfg.picard_options())?,
        Method::ClosedForm => {
            let lp = cfg.linear().map_err(|e| match e {
                Error::Divergence { ratio } => CliError::new(
                    EXIT_ERROR,
                    "divergence",
                    format!("ratio {ratio} violates the convergence condition |lambda| b^nu (1-q)^nu < 1"),
                ),
                other => other.into(),
            })?;
            linear_solve(&lp, &g)?
        }
    };
    std::fs::write(&args.out, s.y.to_csv()).map_err(|e| CliError::io(&args.out, e))?;
    let diag = diagnostics(args.method, &s, cfg.solver.residual_tol);
    let dpath = diag_path(&args.out);
    std::fs::write(&dpath, &diag).map_err(|e| CliError::io(&dpath, e))?;
    write_out(out, &diag)?;
    Ok(if s.residual_l1 < cfg.solver.residual_tol { EXIT_OK } else { EXIT_FAILED })
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> CliResult<i32> {
    let report = verify::run(args.seed, args.filter.as_deref());
    write_out(out, &report.render())?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAILED })
}

pub fn cmd_ml_eval(args: &MlEvalArgs, out: &mut dyn Write) -> CliResult<i32> {
    let spec = MLSpec::new(args.alpha, args.beta, args.lambda, QParams::new(args.q)?)?;
    let v = ml_eval_detailed(&spec, args.x, args.a)?;
    write_out(
        out,
        &format!("value={:.16e}\nratio={:.16e}\nterms={}\ntail_bound={:e}\n", v.value, v.ratio, v.terms, v.tail_bound),
    )?;
    Ok(EXIT_OK)
}
