//! Command-line front end. Every subcommand writes one JSON document
//! (`schema_version` 1) or a CSV table; Monte Carlo subcommands require
//! `--seed`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error,
//! 3 numerical failure. Diagnostics go to standard error as
//! `ERROR <code>: <message>`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::diagrams::{self, count_recursive, count_streaming};
use crate::error::Error;
use crate::exponents::{self, fmt_q, parse_rational, to_f64, Equation, TableParams, Q};
use crate::hls;
use crate::kernels::{self, BallMassQuery, KernelSpec};
use crate::moments::{self, ChaosKernelSpec};
use crate::noise::{NoiseSpec, SpaceCovariance, TimeCovariance};
use crate::smallball;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "intermittency", version, about = "Green's functions, diagram moments and intermittency exponents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for Monte Carlo subcommands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON object of flag values; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, alias = "format", value_enum)]
    pub output: Option<Format>,
    /// Write the output here instead of standard output.
    #[arg(long = "out", global = true)]
    pub out_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact moment exponents.
    #[command(subcommand)]
    Exponents(ExponentsCmd),
    /// Admissible diagram counts and listings.
    #[command(subcommand)]
    Diagrams(DiagramsCmd),
    /// Green's function evaluation.
    #[command(subcommand)]
    Kernels(KernelsCmd),
    /// Chaos and moment estimates.
    #[command(subcommand)]
    Moments(MomentsCmd),
    /// Restricted-diagram lower bound.
    #[command(subcommand)]
    Lower(LowerCmd),
    /// Small-ball verification.
    #[command(subcommand)]
    Smallball(SmallballCmd),
    /// Spectral mass and its exponent.
    #[command(subcommand)]
    Hls(HlsCmd),
}

#[derive(Debug, Subcommand)]
pub enum ExponentsCmd {
    /// Table rows for SHE, alpha-SHE, SWE and SFD.
    /// JSON: {rows: [{equation, a, b, hbar, lambda, gamma, hurst, t_exp_lower, p_exp_lower,
    /// t_exp_upper, p_exp_upper, closed_form_t, closed_form_p, matches, matches_closed_form}]},
    /// each exponent as {exact, decimal}. CSV: one row per equation.
    Table {
        #[arg(long, default_value = "1/2")]
        lambda: String,
        #[arg(long = "H", default_value = "3/4")]
        hurst: String,
        #[arg(long, default_value = "3/2")]
        alpha: String,
        #[arg(long, default_value = "5/4")]
        beta: String,
    },
    /// Compare lower and upper exponents for given (a, b, lambda, gamma).
    /// JSON: {hbar, lower: [t, p], upper: [t, p], matches}. Exit 1 on mismatch.
    Check {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        gamma: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum DiagramsCmd {
    /// Number of admissible diagrams; prints the integer unless --output is given.
    /// JSON: {row_sizes, count, method}.
    Count {
        rows: String,
        #[arg(long, value_enum, default_value = "streaming")]
        method: CountMethod,
    },
    /// List admissible diagrams.
    /// JSON: {row_sizes, count, diagrams: [[[[row, col], [row, col]], ...], ...]}.
    Enumerate {
        rows: String,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Diagrams of the lower-bound construction on p rows of m_p vertices.
    /// JSON: {p, m_p, count, diagrams}.
    Constrained {
        #[arg(long)]
        p: usize,
        #[arg(long = "m-p")]
        m_p: usize,
        #[arg(long)]
        limit: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountMethod {
    Streaming,
    Recursive,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// heat[d], she, wave[d], swe, alpha_heat[d], frac[d], sfd, or a JSON spec.
    #[arg(long, default_value = "heat1")]
    pub kernel: String,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    /// white-white, riesz, spectral-riesz, product, or a JSON spec.
    #[arg(long)]
    pub noise: Option<String>,
    /// Spatial exponent (comma list for product noise).
    #[arg(long)]
    pub lambda: Option<String>,
    /// Time exponent; white in time when omitted.
    #[arg(long)]
    pub gamma: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum KernelsCmd {
    /// JSON: {kernel, t, x, density}.
    Density {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        t: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Mass of the ball B_eps(x) under G_t(y - .). JSON: {kernel, t, eps, y, x, mass}.
    BallMass {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        t: String,
        #[arg(long)]
        eps: String,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
    },
    /// Radial Fourier transform. JSON: {kernel, t, xi, value}.
    Fourier {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        t: String,
        #[arg(long)]
        xi: String,
    },
    /// Total mass. JSON: {kernel, t, total_mass}.
    Mass {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        t: String,
    },
    /// Mittag-Leffler function E_{beta, beta2}(z). JSON: {beta, beta2, z, value}.
    MittagLeffler {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        beta2: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum MomentsCmd {
    /// Truncated p-th moment. JSON: {p, nmax, t, value, std_error, tail_bound,
    /// chaos_second_moments, n_samples, seed}; with --t-grid, {points: [...]}.
    /// CSV: t,value,std_error,tail_bound.
    Estimate {
        #[arg(long)]
        p: usize,
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        t: Option<String>,
        /// lo:hi:n, log-spaced, or a comma list.
        #[arg(long = "t-grid")]
        t_grid: Option<String>,
        #[arg(long, default_value_t = 3)]
        nmax: usize,
        #[arg(long, default_value = "1e5")]
        samples: String,
        #[arg(long, default_value = "1")]
        u0: String,
    },
    /// Second moment of the n-th chaos. JSON: {n, t, value, std_error, closed_form}.
    Phi {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        t: String,
        #[arg(long, default_value = "1e5")]
        samples: String,
    },
    /// Sum over admissible diagrams with the given rows. JSON: {rows, t, value, std_error}.
    Diagram {
        rows: String,
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        t: String,
        #[arg(long, default_value = "1e5")]
        samples: String,
    },
    /// Finite-difference reference for white-noise SHE on the line.
    /// JSON: {t, dx, dt, moments, std_errors, n_paths, steps, cells}.
    Fd {
        #[arg(long)]
        t: String,
        #[arg(long, default_value = "1/64")]
        dx: String,
        #[arg(long, default_value = "1000")]
        paths: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum LowerCmd {
    /// Closed-form summand and optimizer. JSON: {plan, log_summand, m0, eps_tp, m0_at_eps_tp}.
    Value {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        t: String,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        gamma: String,
    },
    /// Exact exponents of the optimized bound next to the exponent formulas.
    /// JSON: {optimized: [t, p], formula: [t, p], matches}. Exit 1 on mismatch.
    Exponents {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        gamma: String,
    },
    /// Monte Carlo restricted time integral. JSON: {p, m_p, value, std_error, closed_form}.
    Mc {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "1")]
        t: String,
        #[arg(long, default_value = "1e5")]
        samples: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum SmallballCmd {
    /// JSON: SmallBallReport. CSV: eps,t,ratio. Exit 1 when the check fails.
    Verify {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long)]
        b: String,
        /// lo:hi:n, log-spaced, or a comma list.
        #[arg(long, default_value = "0.1:1:6")]
        eps: String,
        #[arg(long = "y-per-eps", default_value_t = 9)]
        y_per_eps: usize,
        #[arg(long, default_value = "0.1")]
        threshold: String,
        /// Check the two-sided envelope instead of the density.
        #[arg(long)]
        envelope: bool,
    },
    /// JSON: ClaimReport. CSV: delta,lhs,rhs,margin. Exit 1 when a margin is not positive.
    Claim {
        #[arg(long)]
        nu: String,
        #[arg(long, default_value = "0.01:100:50")]
        delta: String,
    },
    /// Fit of ln(mass / t^a) against t / eps^b. JSON: ExpFit.
    Fit {
        #[command(flatten)]
        kernel: KernelArgs,
        /// Ratios t / eps^b.
        #[arg(long, default_value = "0.1,0.25,0.5,1,2")]
        ratios: String,
        #[arg(long, default_value = "0.2,0.5,1")]
        eps: String,
        #[arg(long = "y-per-eps", default_value_t = 9)]
        y_per_eps: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum HlsCmd {
    /// JSON: HlsReport. CSV: t,value,eta_argmax. Exit 1 if --tol is given and exceeded.
    Fit {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value = "1e-3")]
        tmin: String,
        #[arg(long, default_value = "1e-1")]
        tmax: String,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// JSON: {kernel, t, eta, mass}; without --eta the supremum over shifts.
    Mass {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        t: String,
        #[arg(long, allow_hyphen_values = true)]
        eta: Option<String>,
    },
    /// Relative spread of mass / t^hbar. JSON: {kernel, hbar, spread}.
    Spread {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value = "1e-3")]
        tmin: String,
        #[arg(long, default_value = "1e-1")]
        tmax: String,
        #[arg(long, default_value_t = 12)]
        n: usize,
    },
}

#[derive(Debug)]
enum Fail {
    Usage(String, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, Fail>;

fn usage<T>(code: &str, msg: impl Into<String>) -> CliResult<T> {
    Err(Fail::Usage(code.into(), msg.into()))
}

struct Report {
    command: &'static str,
    json: Value,
    csv: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    plain: Option<String>,
    ok: bool,
}

impl Report {
    fn new(command: &'static str, json: Value) -> Self {
        Report {
            command,
            json,
            csv: None,
            plain: None,
            ok: true,
        }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(f) => return report_fail(&f),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("ERROR USAGE: {first}");
            return 2;
        }
    };
    let outcome = match cli.threads {
        Some(0) => usage("USAGE", "--threads must be positive"),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => usage("USAGE", format!("thread pool: {e}")),
        },
        None => dispatch(&cli),
    };
    let report = match outcome {
        Ok(r) => r,
        Err(f) => return report_fail(&f),
    };
    match emit(&cli, &report) {
        Ok(()) => {
            if report.ok {
                0
            } else {
                1
            }
        }
        Err(f) => report_fail(&f),
    }
}

fn report_fail(f: &Fail) -> i32 {
    match f {
        Fail::Usage(code, msg) => {
            eprintln!("ERROR {code}: {msg}");
            2
        }
        Fail::Lib(e) => {
            eprintln!("ERROR {}: {e}", e.code());
            if e.is_numerical() {
                3
            } else {
                2
            }
        }
    }
}

/// Appends `--key value` for each entry of the `--config` file whose flag is
/// not already on the command line.
fn merge_config(mut args: Vec<std::ffi::OsString>) -> CliResult<Vec<std::ffi::OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).or_else(|e| usage("CONFIG", format!("{path}: {e}")))?;
    let value: Value = serde_json::from_str(&text).or_else(|e| usage("CONFIG", format!("{path}: {e}")))?;
    let Value::Object(map) = value else {
        return usage("CONFIG", "config file must hold a JSON object");
    };
    for (k, v) in map {
        let flag = format!("--{}", k.replace('_', "-"));
        let given = strs.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        let val = match v {
            Value::Bool(true) => {
                args.push(flag.into());
                continue;
            }
            Value::Bool(false) | Value::Null => continue,
            Value::String(s) => s,
            Value::Number(n) => n.to_string(),
            Value::Array(xs) => xs
                .iter()
                .map(|x| match x {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            Value::Object(_) => serde_json::to_string(&v).unwrap_or_default(),
        };
        args.push(format!("{flag}={val}").into());
    }
    Ok(args)
}

fn emit(cli: &Cli, r: &Report) -> CliResult<()> {
    let text = match (cli.output, &r.plain) {
        (None, Some(p)) => format!("{p}\n"),
        (None, None) | (Some(Format::Json), _) => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": r.command,
                "result": r.json,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
            s.push('\n');
            s
        }
        (Some(Format::Csv), _) => {
            let Some((header, rows)) = &r.csv else {
                return usage("CSV_UNSUPPORTED", format!("{} has no CSV form", r.command));
            };
            let mut s = header.join(",");
            s.push('\n');
            for row in rows {
                s.push_str(&row.join(","));
                s.push('\n');
            }
            s
        }
    };
    match &cli.out_path {
        Some(p) => std::fs::write(p, text).or_else(|e| usage("IO", format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .or_else(|e| usage("IO", e.to_string()))
        }
    }
}

fn need_seed(cli: &Cli) -> CliResult<u64> {
    match cli.seed {
        Some(s) => Ok(s),
        None => usage("MISSING_SEED", "this subcommand draws random samples and requires --seed"),
    }
}

fn real(s: &str, name: &str) -> CliResult<f64> {
    if let Ok(v) = s.trim().parse::<f64>() {
        return Ok(v);
    }
    match parse_rational(s) {
        Ok(q) => Ok(to_f64(&q)),
        Err(_) => usage("BAD_NUMBER", format!("--{name}: cannot parse '{s}'")),
    }
}

fn rational(s: &str, name: &str) -> CliResult<Q> {
    parse_rational(s).or_else(|_| usage("BAD_NUMBER", format!("--{name}: '{s}' is not an exact rational")))
}

fn count_arg(s: &str, name: &str) -> CliResult<u64> {
    let v = real(s, name)?;
    if !(v >= 1.0 && v.fract() == 0.0 && v < 1.8e19) {
        return usage("BAD_NUMBER", format!("--{name}: '{s}' is not a positive integer"));
    }
    Ok(v as u64)
}

fn reals(s: &str, name: &str) -> CliResult<Vec<f64>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| real(p, name)).collect()
}

/// `lo:hi:n` (log-spaced) or a comma list.
fn grid(s: &str, name: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => reals(s, name),
        3 => {
            let (lo, hi) = (real(parts[0], name)?, real(parts[1], name)?);
            let n = count_arg(parts[2], name)? as usize;
            if !(lo > 0.0 && hi >= lo) {
                return usage("BAD_GRID", format!("--{name}: need 0 < lo <= hi"));
            }
            Ok(hls::log_grid(lo, hi, n))
        }
        _ => usage("BAD_GRID", format!("--{name}: expected lo:hi:n or a comma list")),
    }
}

fn rows_arg(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .or_else(|_| usage("BAD_ROWS", format!("cannot parse row sizes '{s}'")))
}

fn kernel_spec(k: &KernelArgs) -> CliResult<KernelSpec> {
    let name = k.kernel.trim();
    if name.starts_with('{') {
        return Ok(KernelSpec::from_json(name)?);
    }
    let lower = name.to_ascii_lowercase().replace('-', "_");
    let split = lower.find(|c: char| c.is_ascii_digit()).unwrap_or(lower.len());
    let (base, digits) = lower.split_at(split);
    let d = if digits.is_empty() {
        1
    } else {
        digits.parse::<usize>().or_else(|_| usage("BAD_KERNEL", format!("unknown kernel '{name}'")))?
    };
    let need = |v: Option<f64>, flag: &str| match v {
        Some(x) => Ok(x),
        None => usage("BAD_KERNEL", format!("kernel '{name}' needs --{flag}")),
    };
    let spec = match base {
        "heat" | "she" => KernelSpec::Heat { d },
        "wave" | "swe" => KernelSpec::Wave { d },
        "alpha_heat" | "alpha_she" | "aheat" => KernelSpec::AlphaHeat {
            d,
            alpha: need(k.alpha, "alpha")?,
        },
        "frac" | "sfd" | "fracdiff" => KernelSpec::FracDiff {
            d,
            alpha: need(k.alpha, "alpha")?,
            beta: need(k.beta, "beta")?,
        },
        _ => return usage("BAD_KERNEL", format!("unknown kernel '{name}'")),
    };
    spec.validate()?;
    Ok(spec)
}

fn noise_spec(n: &NoiseArgs, d: usize) -> CliResult<NoiseSpec> {
    let kind = match (&n.noise, &n.lambda) {
        (Some(k), _) => k.trim().to_string(),
        (None, Some(_)) => "riesz".into(),
        (None, None) => "white-white".into(),
    };
    if kind.starts_with('{') {
        return Ok(NoiseSpec::from_json(&kind)?);
    }
    let time = match &n.gamma {
        Some(g) => TimeCovariance::power(real(g, "gamma")?),
        None => TimeCovariance::WhiteInTime,
    };
    let lambda = || match &n.lambda {
        Some(l) => reals(l, "lambda"),
        None => usage("BAD_NOISE", format!("noise '{kind}' needs --lambda")),
    };
    let single = |v: Vec<f64>| match v.as_slice() {
        [l] => Ok(*l),
        _ => usage("BAD_NOISE", "expected a single --lambda"),
    };
    let space = match kind.to_ascii_lowercase().as_str() {
        "white-white" | "white" | "delta" => {
            if d != 1 {
                return usage("BAD_NOISE", "white noise in space needs d = 1");
            }
            SpaceCovariance::DeltaD1
        }
        "riesz" => SpaceCovariance::riesz(single(lambda()?)?, d),
        "spectral-riesz" => SpaceCovariance::Spectral {
            density: crate::noise::SpectralKind::RieszHat {
                lambda: single(lambda()?)?,
                d,
            },
        },
        "product" => SpaceCovariance::ProductRL { lambdas: lambda()? },
        _ => return usage("BAD_NOISE", format!("unknown noise '{kind}'")),
    };
    Ok(NoiseSpec::new(time, space)?)
}

fn q_json(x: &Q) -> Value {
    json!({"exact": fmt_q(x), "decimal": to_f64(x)})
}

fn f(x: f64) -> String {
    format!("{x:e}")
}

fn dispatch(cli: &Cli) -> CliResult<Report> {
    match &cli.command {
        Command::Exponents(c) => exponents_cmd(c),
        Command::Diagrams(c) => diagrams_cmd(c),
        Command::Kernels(c) => kernels_cmd(c),
        Command::Moments(c) => moments_cmd(cli, c),
        Command::Lower(c) => lower_cmd(cli, c),
        Command::Smallball(c) => smallball_cmd(c),
        Command::Hls(c) => hls_cmd(c),
    }
}

fn exponents_cmd(c: &ExponentsCmd) -> CliResult<Report> {
    match c {
        ExponentsCmd::Table {
            lambda,
            hurst,
            alpha,
            beta,
        } => {
            let params = TableParams {
                lambda: rational(lambda, "lambda")?,
                hurst: rational(hurst, "H")?,
                alpha: rational(alpha, "alpha")?,
                beta: rational(beta, "beta")?,
            };
            let rows = exponents::table(&params)?;
            let mut out = Vec::new();
            let mut csv = Vec::new();
            let mut ok = true;
            for (eq, row) in Equation::ALL.iter().zip(&rows) {
                let (ct, cp) = exponents::moment_column(*eq, &params);
                let closed = ct == row.t_exp_lower && cp == row.p_exp_lower;
                ok &= closed && row.matches();
                let mut j = row.to_json();
                j["closed_form_t"] = q_json(&ct);
                j["closed_form_p"] = q_json(&cp);
                j["matches_closed_form"] = json!(closed);
                out.push(j);
                csv.push(vec![
                    eq.name().to_string(),
                    fmt_q(&row.a),
                    fmt_q(&row.b),
                    fmt_q(&row.hbar),
                    fmt_q(&row.t_exp_lower),
                    fmt_q(&row.p_exp_lower),
                    fmt_q(&row.t_exp_upper),
                    fmt_q(&row.p_exp_upper),
                    row.matches().to_string(),
                ]);
            }
            let mut r = Report::new("exponents table", json!({ "rows": out }));
            r.csv = Some((
                vec!["equation", "a", "b", "hbar", "t_exp_lower", "p_exp_lower", "t_exp_upper", "p_exp_upper", "matches"],
                csv,
            ));
            r.ok = ok;
            Ok(r)
        }
        ExponentsCmd::Check { a, b, lambda, gamma } => {
            let (a, b, l, g) = (rational(a, "a")?, rational(b, "b")?, rational(lambda, "lambda")?, rational(gamma, "gamma")?);
            let h = exponents::hbar(&a, &b, &l)?;
            let lo = exponents::lower_exponents(&a, &b, &l, &g)?;
            let up = exponents::upper_exponents(&h, &g)?;
            let matches = lo == up;
            let mut r = Report::new(
                "exponents check",
                json!({
                    "hbar": q_json(&h),
                    "lower": [q_json(&lo.0), q_json(&lo.1)],
                    "upper": [q_json(&up.0), q_json(&up.1)],
                    "matches": matches,
                }),
            );
            r.ok = matches;
            Ok(r)
        }
    }
}

fn diagram_list<I: Iterator<Item = diagrams::Diagram>>(it: I, limit: Option<usize>) -> Vec<Value> {
    it.take(limit.unwrap_or(usize::MAX))
        .map(|d| d.to_json()["edges"].clone())
        .collect()
}

fn diagrams_cmd(c: &DiagramsCmd) -> CliResult<Report> {
    match c {
        DiagramsCmd::Count { rows, method } => {
            let rows = rows_arg(rows)?;
            let (n, m) = match method {
                CountMethod::Streaming => (count_streaming(&rows)?, "streaming"),
                CountMethod::Recursive => (count_recursive(&rows)?, "recursive"),
            };
            let mut r = Report::new(
                "diagrams count",
                json!({"row_sizes": rows, "count": n.to_string(), "method": m}),
            );
            r.plain = Some(n.to_string());
            Ok(r)
        }
        DiagramsCmd::Enumerate { rows, limit } => {
            let rows = rows_arg(rows)?;
            let list = diagram_list(diagrams::enumerate_admissible(&rows)?, *limit);
            Ok(Report::new(
                "diagrams enumerate",
                json!({"row_sizes": rows, "count": list.len(), "diagrams": list}),
            ))
        }
        DiagramsCmd::Constrained { p, m_p, limit } => {
            let list = diagram_list(diagrams::enumerate_constrained(*p, *m_p)?, *limit);
            Ok(Report::new(
                "diagrams constrained",
                json!({"p": p, "m_p": m_p, "count": list.len(), "diagrams": list}),
            ))
        }
    }
}

fn kernels_cmd(c: &KernelsCmd) -> CliResult<Report> {
    match c {
        KernelsCmd::Density { kernel, t, x } => {
            let spec = kernel_spec(kernel)?;
            let (t, x) = (real(t, "t")?, reals(x, "x")?);
            let v = kernels::density(&spec, t, &x)?;
            Ok(Report::new("kernels density", json!({"kernel": spec, "t": t, "x": x, "density": v})))
        }
        KernelsCmd::BallMass { kernel, t, eps, y, x } => {
            let spec = kernel_spec(kernel)?;
            let d = spec.dim();
            let (t, eps) = (real(t, "t")?, real(eps, "eps")?);
            let pt = |s: &Option<String>, n: &str| match s {
                Some(s) => reals(s, n),
                None => Ok(vec![0.0; d]),
            };
            let (y, x) = (pt(y, "y")?, pt(x, "x")?);
            let m = kernels::ball_mass(&spec, &BallMassQuery::new(t, y.clone(), x.clone(), eps))?;
            Ok(Report::new(
                "kernels ball-mass",
                json!({"kernel": spec, "t": t, "eps": eps, "y": y, "x": x, "mass": m}),
            ))
        }
        KernelsCmd::Fourier { kernel, t, xi } => {
            let spec = kernel_spec(kernel)?;
            let (t, xi) = (real(t, "t")?, real(xi, "xi")?);
            let v = kernels::kernel_fourier_radial(&spec, t, xi)?;
            Ok(Report::new("kernels fourier", json!({"kernel": spec, "t": t, "xi": xi, "value": v})))
        }
        KernelsCmd::Mass { kernel, t } => {
            let spec = kernel_spec(kernel)?;
            let t = real(t, "t")?;
            if !(t > 0.0) {
                return Err(Error::NonpositiveTime(t).into());
            }
            Ok(Report::new(
                "kernels mass",
                json!({"kernel": spec, "t": t, "total_mass": spec.total_mass(t)}),
            ))
        }
        KernelsCmd::MittagLeffler { beta, beta2, z } => {
            let z = real(z, "z")?;
            let v = kernels::mittag_leffler(*beta, *beta2, z)?;
            Ok(Report::new(
                "kernels mittag-leffler",
                json!({"beta": beta, "beta2": beta2, "z": z, "value": v}),
            ))
        }
    }
}

fn chaos_spec(k: &KernelArgs, n: usize, t: f64, u0: f64) -> CliResult<ChaosKernelSpec> {
    let mut s = ChaosKernelSpec::new(kernel_spec(k)?, n, t);
    s.initial_value = u0;
    Ok(s)
}

fn moments_cmd(cli: &Cli, c: &MomentsCmd) -> CliResult<Report> {
    match c {
        MomentsCmd::Estimate {
            p,
            kernel,
            noise,
            t,
            t_grid,
            nmax,
            samples,
            u0,
        } => {
            let seed = need_seed(cli)?;
            let samples = count_arg(samples, "samples")?;
            let u0 = real(u0, "u0")?;
            let ts = match (t, t_grid) {
                (Some(t), None) => vec![real(t, "t")?],
                (None, Some(g)) => grid(g, "t-grid")?,
                _ => return usage("USAGE", "give exactly one of --t and --t-grid"),
            };
            let spec0 = chaos_spec(kernel, 0, ts[0], u0)?;
            let noise = noise_spec(noise, spec0.kernel.dim())?;
            let mut points = Vec::new();
            let mut csv = Vec::new();
            for &t in &ts {
                let spec = ChaosKernelSpec { t, ..spec0.clone() };
                let m = moments::pth_moment_truncated(*p, &spec, &noise, *nmax, samples, seed)?;
                csv.push(vec![
                    f(t),
                    f(m.estimate.value),
                    f(m.estimate.std_error),
                    m.tail_bound.map(f).unwrap_or_default(),
                ]);
                points.push(json!({
                    "t": t,
                    "value": m.estimate.value,
                    "std_error": m.estimate.std_error,
                    "tail_bound": m.tail_bound,
                    "chaos_second_moments": m.chaos_second_moments,
                    "n_samples": m.estimate.n_samples,
                    "method": m.estimate.method,
                }));
            }
            let body = if t.is_some() {
                let mut v = points.pop().expect("one point");
                v["p"] = json!(p);
                v["nmax"] = json!(nmax);
                v["seed"] = json!(seed);
                v["kernel"] = json!(spec0.kernel);
                v["noise"] = json!(noise);
                v
            } else {
                json!({"p": p, "nmax": nmax, "seed": seed, "kernel": spec0.kernel, "noise": noise, "points": points})
            };
            let mut r = Report::new("moments estimate", body);
            r.csv = Some((vec!["t", "value", "std_error", "tail_bound"], csv));
            Ok(r)
        }
        MomentsCmd::Phi {
            n,
            kernel,
            noise,
            t,
            samples,
        } => {
            let seed = need_seed(cli)?;
            let spec = chaos_spec(kernel, *n, real(t, "t")?, 1.0)?;
            let noise = noise_spec(noise, spec.kernel.dim())?;
            let est = moments::phi_n(&spec, &noise, count_arg(samples, "samples")?, seed)?;
            let closed = (matches!(spec.kernel, KernelSpec::Heat { d: 1 }) && noise == NoiseSpec::white_white())
                .then(|| moments::phi_n_white_heat(*n, spec.t, 1.0));
            Ok(Report::new(
                "moments phi",
                json!({
                    "n": n, "t": spec.t, "kernel": spec.kernel, "noise": noise,
                    "value": est.value, "std_error": est.std_error,
                    "n_samples": est.n_samples, "seed": seed, "closed_form": closed,
                }),
            ))
        }
        MomentsCmd::Diagram {
            rows,
            kernel,
            noise,
            t,
            samples,
        } => {
            let seed = need_seed(cli)?;
            let rows = rows_arg(rows)?;
            let spec = chaos_spec(kernel, rows.iter().copied().max().unwrap_or(0), real(t, "t")?, 1.0)?;
            let noise = noise_spec(noise, spec.kernel.dim())?;
            let est = moments::diagram_sum(&rows, &spec, &noise, count_arg(samples, "samples")?, seed)?;
            Ok(Report::new(
                "moments diagram",
                json!({
                    "rows": rows, "t": spec.t, "kernel": spec.kernel, "noise": noise,
                    "value": est.value, "std_error": est.std_error,
                    "n_samples": est.n_samples, "seed": seed,
                }),
            ))
        }
        MomentsCmd::Fd { t, dx, paths } => {
            let seed = need_seed(cli)?;
            let cfg = moments::FdConfig::new(real(t, "t")?, real(dx, "dx")?, count_arg(paths, "paths")?, seed);
            let m = moments::fd_oracle_she(&cfg)?;
            Ok(Report::new(
                "moments fd",
                json!({
                    "t": cfg.t, "dx": cfg.dx, "dt": cfg.dt, "seed": seed,
                    "moments": m.moments, "std_errors": m.std_errors,
                    "n_paths": m.n_paths, "steps": m.steps, "cells": m.cells,
                }),
            ))
        }
    }
}

fn lower_cmd(cli: &Cli, c: &LowerCmd) -> CliResult<Report> {
    match c {
        LowerCmd::Value {
            p,
            m,
            eps,
            t,
            a,
            b,
            lambda,
            gamma,
        } => {
            let plan = moments::LowerBoundPlan::new(*p, *m, real(eps, "eps")?, real(t, "t")?)?;
            let v = moments::lower_bound_value(
                &plan,
                real(a, "a")?,
                real(b, "b")?,
                real(lambda, "lambda")?,
                real(gamma, "gamma")?,
            )?;
            Ok(Report::new(
                "lower value",
                json!({
                    "plan": plan, "m_p": plan.m_p(), "spacing": plan.spacing(),
                    "log_summand": v.log_summand, "m0": v.m0,
                    "eps_tp": v.eps_tp, "m0_at_eps_tp": v.m0_at_eps_tp,
                }),
            ))
        }
        LowerCmd::Exponents { a, b, lambda, gamma } => {
            let (a, b, l, g) = (rational(a, "a")?, rational(b, "b")?, rational(lambda, "lambda")?, rational(gamma, "gamma")?);
            let opt = moments::optimized_exponents(&a, &b, &l, &g)?;
            let formula = exponents::lower_exponents(&a, &b, &l, &g)?;
            let mut r = Report::new(
                "lower exponents",
                json!({
                    "optimized": [q_json(&opt.0), q_json(&opt.1)],
                    "formula": [q_json(&formula.0), q_json(&formula.1)],
                    "matches": opt == formula,
                }),
            );
            r.ok = opt == formula;
            Ok(r)
        }
        LowerCmd::Mc { p, m, t, samples } => {
            let seed = need_seed(cli)?;
            let plan = moments::LowerBoundPlan::new(*p, *m, 1.0, real(t, "t")?)?;
            let est = moments::restricted_integral_mc(&plan, count_arg(samples, "samples")?, seed)?;
            let closed = (plan.spacing() / 2.0).powi((plan.p * plan.m_p()) as i32);
            Ok(Report::new(
                "lower mc",
                json!({
                    "p": p, "m_p": plan.m_p(), "t": plan.t, "seed": seed,
                    "value": est.value, "std_error": est.std_error,
                    "n_samples": est.n_samples, "closed_form": closed,
                }),
            ))
        }
    }
}

fn smallball_cmd(c: &SmallballCmd) -> CliResult<Report> {
    match c {
        SmallballCmd::Verify {
            kernel,
            a,
            b,
            eps,
            y_per_eps,
            threshold,
            envelope,
        } => {
            let spec = kernel_spec(kernel)?;
            let (a, b) = (real(a, "a")?, real(b, "b")?);
            let eps = grid(eps, "eps")?;
            let threshold = real(threshold, "threshold")?;
            let rep = if *envelope {
                let KernelSpec::AlphaHeat { d, alpha } = spec else {
                    return usage("USAGE", "--envelope applies to alpha_heat kernels");
                };
                smallball::verify_small_ball_envelope(d, alpha, a, b, &eps, *y_per_eps, threshold)?
            } else {
                smallball::verify_small_ball(&spec, a, b, &eps, *y_per_eps, threshold)?
            };
            let csv = rep
                .grid
                .iter()
                .zip(&rep.ratios)
                .map(|(&(e, t), &q)| vec![f(e), f(t), f(q)])
                .collect();
            let mut r = Report::new("smallball verify", serde_json::to_value(&rep).expect("serializable"));
            r.csv = Some((vec!["eps", "t", "ratio"], csv));
            r.ok = rep.passed;
            Ok(r)
        }
        SmallballCmd::Claim { nu, delta } => {
            let rep = smallball::exp_lower_claim_check(real(nu, "nu")?, &grid(delta, "delta")?)?;
            let csv = rep
                .points
                .iter()
                .map(|p| vec![f(p.delta), f(p.lhs), f(p.rhs), f(p.margin)])
                .collect();
            let mut r = Report::new("smallball claim", serde_json::to_value(&rep).expect("serializable"));
            r.csv = Some((vec!["delta", "lhs", "rhs", "margin"], csv));
            r.ok = rep.passed;
            Ok(r)
        }
        SmallballCmd::Fit {
            kernel,
            ratios,
            eps,
            y_per_eps,
        } => {
            let spec = kernel_spec(kernel)?;
            let (_, b) = spec.small_ball_exponents();
            let mut table = Vec::new();
            for e in reals(eps, "eps")? {
                for s in reals(ratios, "ratios")? {
                    let t = s * e.powf(b);
                    table.push((t, e, smallball::inf_ball_mass(&spec, t, e, *y_per_eps)?));
                }
            }
            let fit = smallball::exponential_form_fit(&spec, &table)?;
            Ok(Report::new(
                "smallball fit",
                json!({"kernel": spec, "table": table, "fit": fit}),
            ))
        }
    }
}

fn hls_cmd(c: &HlsCmd) -> CliResult<Report> {
    match c {
        HlsCmd::Fit {
            kernel,
            noise,
            tmin,
            tmax,
            n,
            tol,
        } => {
            let spec = kernel_spec(kernel)?;
            let noise = noise_spec(noise, spec.dim())?;
            let ts = hls::log_grid(real(tmin, "tmin")?, real(tmax, "tmax")?, *n);
            let rep = hls::fit_hbar(&spec, &noise, &ts)?;
            let csv = rep
                .t_grid
                .iter()
                .zip(&rep.values)
                .zip(&rep.eta_argmax)
                .map(|((&t, &v), &e)| vec![f(t), f(v), f(e)])
                .collect();
            let mut r = Report::new("hls fit", serde_json::to_value(&rep).expect("serializable"));
            r.csv = Some((vec!["t", "value", "eta_argmax"], csv));
            r.ok = tol.is_none_or(|tol| rep.abs_gap <= tol);
            Ok(r)
        }
        HlsCmd::Mass { kernel, noise, t, eta } => {
            let spec = kernel_spec(kernel)?;
            let noise = noise_spec(noise, spec.dim())?;
            let t = real(t, "t")?;
            let (mass, eta) = match eta {
                Some(e) => {
                    let e = real(e, "eta")?;
                    (hls::hls_mass_spectral(&spec, &noise, t, e)?, e)
                }
                None => hls::hls_mass_sup(&spec, &noise, t)?,
            };
            Ok(Report::new(
                "hls mass",
                json!({"kernel": spec, "noise": noise, "t": t, "eta": eta, "mass": mass}),
            ))
        }
        HlsCmd::Spread {
            kernel,
            noise,
            tmin,
            tmax,
            n,
        } => {
            let spec = kernel_spec(kernel)?;
            let noise = noise_spec(noise, spec.dim())?;
            let ts = hls::log_grid(real(tmin, "tmin")?, real(tmax, "tmax")?, *n);
            let spread = hls::scaling_spread(&spec, &noise, &ts)?;
            let lambda = crate::noise::total_lambda(&noise.space);
            Ok(Report::new(
                "hls spread",
                json!({"kernel": spec, "noise": noise, "t_grid": ts, "hbar": spec.hbar(lambda), "spread": spread}),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grids() {
        assert_eq!(grid("1,2,3", "x").unwrap(), vec![1.0, 2.0, 3.0]);
        let g = grid("0.1:1:10", "eps").unwrap();
        assert_eq!(g.len(), 10);
        assert!((g[9] - 1.0).abs() < 1e-15);
        assert_eq!(count_arg("1e6", "samples").unwrap(), 1_000_000);
        assert!(count_arg("1.5", "samples").is_err());
        assert!((real("1/2", "lambda").unwrap() - 0.5).abs() < 1e-16);
    }

    #[test]
    fn kernel_names() {
        let k = |s: &str| KernelArgs {
            kernel: s.into(),
            alpha: Some(1.5),
            beta: Some(1.2),
        };
        assert_eq!(kernel_spec(&k("she")).unwrap(), KernelSpec::Heat { d: 1 });
        assert_eq!(kernel_spec(&k("wave3")).unwrap(), KernelSpec::Wave { d: 3 });
        assert!(matches!(kernel_spec(&k("frac1")).unwrap(), KernelSpec::FracDiff { d: 1, .. }));
        assert!(kernel_spec(&k("plate2")).is_err());
    }
}
