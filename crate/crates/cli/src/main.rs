use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use mskit_core::circle::{common_grid, DEFAULT_GRID};
use mskit_core::dualspace::{dtto_blocks, idatto_classify, interior_commutator_residual, rank2_identity_residual};
use mskit_core::harness::{self, run_all, run_check, SuiteReport, SCHEMA};
use mskit_core::intertwine::{membership_residual, solve_intertwiners, symbol_of_intertwiner, RANK_TOL};
use mskit_core::linalg::CMatrix;
use mskit_core::matrix::operator_norm;
use mskit_core::operators::{atto_matrix, model_bases};
use mskit_core::{BlaschkeProduct, CheckConfig, CircleFunction, LaurentWindow, ModelBasis};

/// Grid used for dual-space symbols given on the command line.
const DUAL_GRID: usize = 8192;

#[derive(Parser)]
#[command(name = "mskit", version, about = "Model-space operator toolkit and verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one verification check
    Check(CheckArgs),
    /// Run every registered check with its default configuration
    Suite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the combined report to this file
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// List registered checks
    List,
    /// gcd and lcm of two Blaschke products
    Gcd {
        /// Blaschke product as JSON, or a path to a JSON file
        a: String,
        b: String,
    },
    /// Orthonormal basis of the model space K_θ
    Basis {
        #[arg(long)]
        theta: String,
        /// Number of equispaced points at which basis functions are sampled
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Matrix of the asymmetric truncated Toeplitz operator A_φ: K_θ → K_α
    Atto {
        #[arg(long)]
        theta: String,
        #[arg(long)]
        alpha: String,
        /// Laurent coefficients `[[m, re, im], ...]`
        #[arg(long)]
        phi: String,
    },
    /// Intertwiners of the compressed shifts S_θ and S_α
    Intertwine {
        #[arg(long)]
        theta: String,
        #[arg(long)]
        alpha: String,
    },
    /// Dual truncated Toeplitz operator D_φ: commutation class and block norms
    Dual {
        #[arg(long)]
        theta: String,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        phi: String,
        /// Laurent window `lo,hi,guard`
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
    },
}

#[derive(Args)]
struct CheckArgs {
    theorem_id: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    trials: Option<usize>,
    /// Degree range `a..b` (inclusive)
    #[arg(long)]
    deg: Option<String>,
    /// Tolerance override `name=value`; repeatable
    #[arg(long = "tol")]
    tol: Vec<String>,
    /// Laurent window `lo,hi,guard` for dual-space checks
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Write the full report to this file
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Input problems exit with status 2, like clap's own usage errors.
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<bool, Usage> {
    match command {
        Command::Check(args) => check(args),
        Command::Suite { seed, json } => suite(seed, json),
        Command::List => {
            for id in harness::registry() {
                println!("{id:<22} {}", harness::describe(id)?);
            }
            Ok(true)
        }
        Command::Gcd { a, b } => {
            let (a, b) = (blaschke(&a)?, blaschke(&b)?);
            print_json(&json!({ "gcd": a.gcd(&b), "lcm": a.lcm(&b) }));
            Ok(true)
        }
        Command::Basis { theta, samples } => basis(&blaschke(&theta)?, samples),
        Command::Atto { theta, alpha, phi } => atto(&blaschke(&theta)?, &blaschke(&alpha)?, &laurent(&phi)?),
        Command::Intertwine { theta, alpha } => intertwine(&blaschke(&theta)?, &blaschke(&alpha)?),
        Command::Dual { theta, alpha, phi, window } => {
            let window = window.as_deref().map(parse_window).transpose()?;
            dual(&blaschke(&theta)?, &blaschke(&alpha)?, &laurent(&phi)?, window)
        }
    }
}

fn check(args: CheckArgs) -> Result<bool, Usage> {
    let mut config = CheckConfig::new(&args.theorem_id, args.seed)?;
    if let Some(k) = args.trials {
        config.trials = k;
    }
    if let Some(d) = &args.deg {
        config.degree_range = parse_range(d)?;
    }
    for t in &args.tol {
        let (name, value) = t.split_once('=').ok_or_else(|| anyhow!("--tol expects name=value, got {t:?}"))?;
        let value: f64 = value.parse().with_context(|| format!("tolerance value {value:?}"))?;
        config.tolerances.set(name, value)?;
    }
    if let Some(w) = &args.window {
        config.window = Some(parse_window(w)?);
    }
    config.validate()?;
    let report = run_check(&config)?;
    print_report_line(&report);
    for (name, value) in report.worst_residuals() {
        println!("    worst {name}: {value:.3e}");
    }
    if let Some(path) = args.json {
        write_json(&path, &report.to_json())?;
    }
    Ok(report.passed())
}

fn suite(seed: u64, json_path: Option<PathBuf>) -> Result<bool, Usage> {
    let start = std::time::Instant::now();
    let reports = run_all(seed);
    for r in &reports {
        print_report_line(r);
    }
    let suite = SuiteReport::new(seed, &reports);
    let passed = reports.iter().all(|r| r.passed());
    println!(
        "suite: {} ({}/{} checks passed) in {:.1}s",
        if passed { "PASS" } else { "FAIL" },
        reports.iter().filter(|r| r.passed()).count(),
        reports.len(),
        start.elapsed().as_secs_f64()
    );
    if let Some(path) = json_path {
        write_json(&path, &serde_json::to_value(&suite)?)?;
    }
    Ok(passed)
}

fn print_report_line(r: &harness::VerificationReport) {
    println!(
        "{:<22} {:<5} {:>4} passed {:>3} failed {:>3} indeterminate  {:.2}s",
        r.theorem_id,
        if r.passed() { "PASS" } else { "FAIL" },
        r.summary.passed,
        r.summary.failed,
        r.summary.indeterminate,
        r.timing.total_seconds
    );
}

fn basis(theta: &BlaschkeProduct, samples: usize) -> Result<bool, Usage> {
    let grid = common_grid(&[theta], DEFAULT_GRID);
    let b = ModelBasis::new(theta, grid)?;
    let gram = b.gram() - CMatrix::identity(b.dim(), b.dim());
    let points: Vec<Complex64> = (0..samples)
        .map(|j| Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / samples as f64))
        .collect();
    let functions: Vec<Value> = (0..b.dim())
        .map(|k| json!(points.iter().map(|&w| pair(b.eval(k, w))).collect::<Vec<_>>()))
        .collect();
    print_json(&json!({
        "schema": SCHEMA,
        "dim": b.dim(),
        "grid_size": b.grid_size(),
        "gram_residual": gram.norm(),
        "points": points.iter().map(|&w| pair(w)).collect::<Vec<_>>(),
        "samples": functions,
    }));
    Ok(true)
}

fn atto(theta: &BlaschkeProduct, alpha: &BlaschkeProduct, phi: &[(i64, Complex64)]) -> Result<bool, Usage> {
    let (tb, ab) = bases(theta, alpha)?;
    let a = atto_matrix(&CircleFunction::from_laurent(tb.grid_size(), phi), &tb, &ab)?;
    print_json(&json!({
        "schema": SCHEMA,
        "domain_dim": tb.dim(),
        "codomain_dim": ab.dim(),
        "matrix": matrix_json(&a.entries),
        "norm": operator_norm(&a),
    }));
    Ok(true)
}

fn intertwine(theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> Result<bool, Usage> {
    let (tb, ab) = bases(theta, alpha)?;
    let sols = solve_intertwiners(&tb, &ab, RANK_TOL);
    let mut out = Vec::new();
    for a in &sols {
        let phi = symbol_of_intertwiner(a, &tb, &ab)?;
        let (_, pos) = phi.effective_band(1e-14);
        out.push(json!({
            "matrix": matrix_json(&a.entries),
            "symbol_coefficients": phi.laurent(0, pos as i64).into_iter().map(pair).collect::<Vec<_>>(),
            "membership_residual": membership_residual(&phi, theta, alpha)?,
        }));
    }
    print_json(&json!({
        "schema": SCHEMA,
        "dimension": sols.len(),
        "gcd_degree": alpha.gcd(theta).degree(),
        "solutions": out,
    }));
    Ok(true)
}

fn dual(theta: &BlaschkeProduct, alpha: &BlaschkeProduct, phi: &[(i64, Complex64)], window: Option<LaurentWindow>) -> Result<bool, Usage> {
    let phi = CircleFunction::from_laurent(DUAL_GRID, phi);
    let class = idatto_classify(&phi, theta, alpha, 1e-8)?;
    let commutator = interior_commutator_residual(&phi, theta, alpha, window)?;
    let rank2 = rank2_identity_residual(&phi, theta, alpha, window)?;
    let d = dtto_blocks(&phi, theta, alpha, window)?;
    let norms = d.interior_block_norms();
    print_json(&json!({
        "schema": SCHEMA,
        "classification": class,
        "window": commutator.window,
        "residuals": {
            "interior_commutator": commutator.value,
            "rank_two_identity": rank2.value,
        },
        "block_norms": { "t_hat": norms[0], "gamma_check": norms[1], "gamma_hat": norms[2], "t_check": norms[3] },
    }));
    Ok(true)
}

fn bases(theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> anyhow::Result<(ModelBasis, ModelBasis)> {
    let mut b = model_bases(&[theta, alpha], DEFAULT_GRID)?;
    let ab = b.pop().context("missing basis")?;
    let tb = b.pop().context("missing basis")?;
    Ok((tb, ab))
}

/// Inline JSON, or a path to a file holding it.
fn read_arg(arg: &str) -> anyhow::Result<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
    }
}

fn blaschke(arg: &str) -> anyhow::Result<BlaschkeProduct> {
    serde_json::from_str(&read_arg(arg)?).with_context(|| format!("parsing Blaschke product {arg:?}"))
}

fn laurent(arg: &str) -> anyhow::Result<Vec<(i64, Complex64)>> {
    #[derive(Deserialize)]
    struct Term(i64, f64, f64);
    let terms: Vec<Term> = serde_json::from_str(&read_arg(arg)?).with_context(|| format!("parsing Laurent coefficients {arg:?}"))?;
    Ok(terms.into_iter().map(|Term(m, re, im)| (m, Complex64::new(re, im))).collect())
}

fn parse_range(s: &str) -> anyhow::Result<(usize, usize)> {
    let (a, b) = s.split_once("..").ok_or_else(|| anyhow!("degree range must look like a..b, got {s:?}"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn parse_window(s: &str) -> anyhow::Result<LaurentWindow> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [lo, hi, guard] = parts.as_slice() else {
        bail!("window must look like lo,hi,guard, got {s:?}");
    };
    Ok(LaurentWindow::new(lo.parse()?, hi.parse()?, guard.parse()?)?)
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn matrix_json(m: &CMatrix) -> Value {
    json!((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn write_json(path: &Path, v: &Value) -> anyhow::Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(v)?).with_context(|| format!("writing {}", path.display()))
}
