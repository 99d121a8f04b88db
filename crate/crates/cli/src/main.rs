//! `finex`: worst-case expectations under finite exchangeability.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use finex_core::bernstein_lp::ConeMembershipLP;
use finex_core::boson::{rho_from_exchangeable, witness_value, Witness};
use finex_core::multiindex::CountVector;
use finex_core::verify::{self, VerifyOptions};
use finex_core::{
    lower_bound_lp_with, oracle_bound, quantum_bound_with, v_infinity, BoundResult, Error, ExchangeableDistribution,
    SimplexPolynomial, Tolerances,
};

#[derive(Parser)]
#[command(name = "finex", version, about = "Worst-case expectations under finite exchangeability")]
struct Cli {
    /// Tolerance overrides as key=value pairs, e.g. primal=1e-9,cross_check=1e-6.
    /// Takes precedence over FINEX_TOL.
    #[arg(long, global = true, value_name = "OVERRIDES")]
    tol: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute v_s for one observable.
    Bound(BoundArgs),
    /// Tabulate v_s over a range of s as CSV.
    Curve(CurveArgs),
    /// Run the built-in consistency checks.
    Verify(VerifyArgs),
    /// Draw sequences from an urn or an exchangeable distribution.
    Sample(SampleArgs),
    /// Walk through the two-coin example.
    CoinDemo,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Oracle,
    Lp,
    Boson,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct BoundArgs {
    /// Polynomial JSON: {"d": 6, "terms": [{"counts": [2,0,0,0,0,0], "coeff": 1.0}, ...]}.
    #[arg(long)]
    observable: PathBuf,
    #[arg(long)]
    s: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the cone LP in readable form to this file.
    #[arg(long, value_name = "PATH")]
    dump_lp: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CurveArgs {
    #[arg(long)]
    observable: PathBuf,
    #[arg(long)]
    s_min: usize,
    #[arg(long)]
    s_max: usize,
    /// Largest s for which the LP column is filled.
    #[arg(long, default_value_t = 8)]
    lp_cap: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random observables in the agreement check.
    #[arg(long, default_value_t = 50)]
    cases: usize,
    /// Shift applied to LP bounds, for exercising the failure path.
    #[arg(long, hide = true)]
    perturb: Option<f64>,
}

#[derive(clap::Args)]
struct SampleArgs {
    /// Urn composition as comma-separated counts, e.g. 1,1,0,0,0,0.
    #[arg(long, conflicts_with = "distribution", required_unless_present = "distribution")]
    urn: Option<String>,
    /// Exchangeable distribution JSON: {"d": 2, "r": 2, "orbits": [{"counts": [1,1], "prob": 1.0}]}.
    #[arg(long)]
    distribution: Option<PathBuf>,
    /// Number of sequences to draw.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes with their process exit codes.
enum Failure {
    Usage(String),
    Verify(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verify(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Solver(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Verify(m) | Failure::Solver(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SolverFailure(_) => Failure::Solver(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("finex: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let tol = Tolerances::resolve(cli.tol.as_deref())?;
    match cli.command {
        Command::Bound(args) => cmd_bound(&args, &tol),
        Command::Curve(args) => cmd_curve(&args, &tol),
        Command::Verify(args) => cmd_verify(&args, tol),
        Command::Sample(args) => cmd_sample(&args),
        Command::CoinDemo => cmd_coin_demo(),
    }
}

/// Rounds to 12 significant digits.
fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn fmt12(x: f64) -> String {
    let y = round12(x);
    if y != 0.0 && (y.abs() < 1e-4 || y.abs() >= 1e15) {
        format!("{y:e}")
    } else {
        format!("{y}")
    }
}

/// Applies [`round12`] to every float inside a JSON value.
fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().unwrap_or(f64::NAN));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_observable(path: &Path) -> Result<SimplexPolynomial, Failure> {
    Ok(SimplexPolynomial::from_json_str(&read_text(path)?)?)
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn check_degree(g: &SimplexPolynomial, s: usize) -> CliResult {
    if s < g.degree() {
        return Err(Failure::Usage(format!("s = {s} is below the observable's degree {}", g.degree())));
    }
    Ok(())
}

fn cmd_bound(args: &BoundArgs, tol: &Tolerances) -> CliResult {
    let g = load_observable(&args.observable)?;
    check_degree(&g, args.s)?;
    if let Some(path) = &args.dump_lp {
        let lp = ConeMembershipLP::assemble(&g, args.s)?;
        write_output(Some(path), &lp.to_text())?;
    }

    let mut results: Vec<BoundResult> = Vec::new();
    let wants = |m: MethodArg| args.method == m || args.method == MethodArg::All;
    if wants(MethodArg::Oracle) {
        results.push(oracle_bound(&g, args.s)?);
    }
    if wants(MethodArg::Lp) {
        results.push(lower_bound_lp_with(&g, args.s, tol)?);
    }
    if wants(MethodArg::Boson) {
        results.push(quantum_bound_with(&g, args.s, tol)?);
    }
    let discrepancy = max_discrepancy(results.iter().map(|r| r.value));

    let text = match args.format {
        Format::Json => {
            let mut doc = json!({ "s": args.s, "d": g.d(), "results": results });
            if args.method == MethodArg::All {
                doc["max_discrepancy"] = json!(discrepancy);
            }
            let mut text = serde_json::to_string_pretty(&round_json(doc))
                .map_err(|e| Failure::Usage(format!("cannot serialize output: {e}")))?;
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut text = String::from("method,s,value,iterations,residual,size\n");
            for r in &results {
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.method.name(),
                    r.s,
                    fmt12(r.value),
                    r.diagnostics.iterations,
                    fmt12(r.diagnostics.residual),
                    r.diagnostics.size
                ));
            }
            if args.method == MethodArg::All {
                text.push_str(&format!("max_discrepancy,{},{},,,\n", args.s, fmt12(discrepancy)));
            }
            text
        }
    };
    write_output(None, &text)
}

fn max_discrepancy(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in values.clone().enumerate() {
        for b in values.clone().skip(i + 1) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

fn cmd_curve(args: &CurveArgs, tol: &Tolerances) -> CliResult {
    if args.s_min > args.s_max {
        return Err(Failure::Usage(format!("empty range: s-min {} exceeds s-max {}", args.s_min, args.s_max)));
    }
    let g = load_observable(&args.observable)?;
    check_degree(&g, args.s_min)?;
    let v_inf = v_infinity(&g)?.value;

    let rows: Vec<Result<String, Error>> = (args.s_min..=args.s_max)
        .into_par_iter()
        .map(|s| {
            let oracle = oracle_bound(&g, s)?.value;
            let lp = if s <= args.lp_cap { fmt12(lower_bound_lp_with(&g, s, tol)?.value) } else { String::new() };
            let boson = quantum_bound_with(&g, s, tol)?.value;
            Ok(format!("{s},{},{lp},{},{}\n", fmt12(oracle), fmt12(boson), fmt12(v_inf)))
        })
        .collect();

    let mut text = String::from("s,v_oracle,v_lp,v_boson,v_infinity\n");
    for row in rows {
        text.push_str(&row?);
    }
    write_output(args.out.as_deref(), &text)
}

fn cmd_verify(args: &VerifyArgs, tolerances: Tolerances) -> CliResult {
    let opts = VerifyOptions {
        seed: args.seed,
        agreement_cases: args.cases,
        perturbation: args.perturb.unwrap_or(0.0),
        tolerances,
    };
    let report = verify::run(&opts);
    write_output(None, &report.render())?;
    if report.all_passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(Failure::Verify(format!("failed checks: {}", names.join(", "))))
    }
}

fn parse_urn(text: &str) -> Result<CountVector, Failure> {
    let counts: Result<Vec<usize>, _> = text.split(',').map(|t| t.trim().parse::<usize>()).collect();
    let counts = counts.map_err(|_| Failure::Usage(format!("urn {text:?} is not a list of counts")))?;
    Ok(CountVector::new(counts)?)
}

fn cmd_sample(args: &SampleArgs) -> CliResult {
    let dist = match (&args.urn, &args.distribution) {
        (Some(urn), _) => ExchangeableDistribution::urn(&parse_urn(urn)?)?,
        (None, Some(path)) => ExchangeableDistribution::from_json_str(&read_text(path)?)?,
        (None, None) => return Err(Failure::Usage("one of --urn or --distribution is required".into())),
    };
    let header: Vec<String> = (1..=dist.r()).map(|i| format!("t{i}")).collect();
    let mut text = header.join(",");
    text.push('\n');
    for seq in dist.sample(args.n, args.seed) {
        let labels: Vec<String> = seq.outcomes().iter().map(|t| (t + 1).to_string()).collect();
        text.push_str(&labels.join(","));
        text.push('\n');
    }
    write_output(args.out.as_deref(), &text)
}

fn cmd_coin_demo() -> CliResult {
    let hh_tt = CountVector::new(vec![1, 1])?;
    let dist = ExchangeableDistribution::urn(&hh_tt)?;
    let rho = rho_from_exchangeable(&dist)?.to_dense()?;
    let d_matrix = finex_core::HermitianMatrix::from_real_diagonal(&[1.0, -0.5, -0.5, 1.0]);
    let observable = finex_core::DiagonalObservable::from_dense_diagonal(&d_matrix, 2, 0.0)?;
    let g = observable.to_polynomial();
    let value = witness_value(Witness::Dense(&d_matrix), &rho_from_exchangeable(&dist)?)?;
    let product = v_infinity(&g)?;

    let mut out = String::new();
    out.push_str("Two coins, P(H,T) = P(T,H) = 0.5; basis order HH, HT, TH, TT\n\n");
    out.push_str("rho =\n");
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| format!("{:>4}", fmt12(rho.get(i, j).re))).collect();
        out.push_str(&format!("  [{}]\n", row.join(" ")));
    }
    out.push_str("\nD = diag(1, -0.5, -0.5, 1)\n");
    out.push_str("    as a polynomial: theta_H^2 - theta_H theta_T + theta_T^2\n\n");
    out.push_str(&format!("Tr(D rho) = {}\n", fmt12(value)));
    out.push_str("product-state bound: 0 (the polynomial is nonnegative on the simplex)\n");
    out.push_str(&format!(
        "product-state minimum: {} at theta = ({}, {})\n",
        fmt12(product.value),
        fmt12(product.point[0]),
        fmt12(product.point[1])
    ));
    let fires = value < 0.0;
    out.push_str(&format!(
        "\nverdict: {}\n",
        if fires {
            "finitely exchangeable, not infinitely extendable / entangled-I witness fires"
        } else {
            "witness does not fire"
        }
    ));
    write_output(None, &out)
}
