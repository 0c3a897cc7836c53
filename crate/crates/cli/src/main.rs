//! Command-line surface over the library: series expansion, bound and
//! crossing reports, exponent extraction, and the verification suites,
//! rendered as text or JSON.
//!
//! Exit codes: 0 success, 1 a verification reported a failing case,
//! 2 usage or input validation, 3 order budget exceeded.

use std::fmt::Write as _;
use std::io::Read as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::{env, fs};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use ckbound_core::bounds::{
    compute_bound, find_minimal_m, m_cap, s_bar_lemma, s_bar_theorem, verify_lemma_31,
    verify_lemma_32, verify_lemma_33, verify_lower_bound_lemma, verify_stirling_binomial,
    BoundMode, BoundReport, BoundsError,
};
use ckbound_core::cm::{self, CmBoundMode, CmError};
use ckbound_core::hilbert::{
    default_shapes, extract_exponents, g_series, global_bound_series_with_core,
    global_series_with_real, local_series, majorant_core, real_fixed_series, shape_curve,
    verify_functional_equation, verify_product_factors, CurveData, HilbertError,
};
use ckbound_core::lambda::{verify_sgn_factorization, C2Class};
use ckbound_core::series::{compare_coefficientwise, QSeries};

const DEFAULT_BUDGET: u64 = 4096;

#[derive(Parser)]
#[command(
    name = "ckbound",
    version,
    about = "Exact Selmer Hilbert series and explicit point-count bounds for hyperbolic curves"
)]
struct Cli {
    /// Truncation order for series and verification suites.
    #[arg(long, global = true, default_value_t = 64)]
    order: usize,

    /// Output rendering.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,

    /// Seed for the randomized verification cases.
    #[arg(long, global = true, default_value_t = 0x00C0_FFEE)]
    seed: u64,

    /// Order budget for crossing searches and caps; falls back to the
    /// CKBOUND_BUDGET environment variable, then to 4096.
    #[arg(long, global = true)]
    budget: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Expand one of the library's series to the given order.
    Series(SeriesArgs),
    /// Full bound report for a curve described by a JSON file.
    Bound {
        /// Path to a CurveData JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Which coefficient factor enters the final product.
        #[arg(long, value_enum, default_value_t = BoundModeArg::ExactCoefficient)]
        mode: BoundModeArg,
    },
    /// Minimal crossing weight m for a curve described by a JSON file.
    FindM {
        /// Path to a CurveData JSON file.
        #[arg(long)]
        input: PathBuf,
    },
    /// Run a verification suite; nonzero exit if any case fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Rank grid for the suites that take one, as "r=0..2,s=0..2"
        /// (inclusive ends).
        #[arg(long, value_parser = Grid::parse, default_value = "r=0..2,s=0..2")]
        grid: Grid,
    },
    /// Recover product-form exponents from a serialized series
    /// (as emitted by `series --format json`).
    ExtractExponents {
        /// Path to the series JSON, or "-" for stdin.
        #[arg(long)]
        input: String,
    },
    /// The CM elliptic-curve pipeline.
    #[command(subcommand)]
    Cm(CmCommand),
    /// The thrice-punctured-line polylogarithmic variant.
    #[command(subcommand)]
    Polylog(PolylogCommand),
}

#[derive(Args)]
struct SeriesArgs {
    #[arg(long, value_enum)]
    kind: SeriesKind,
    #[arg(long)]
    g: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    /// Real punctures among the n; defaults to n.
    #[arg(long)]
    n1: Option<u32>,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    s: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeriesKind {
    /// Local series (1-gt)/(1-2gt-(n-1)t^2).
    Local,
    /// Global series with the rank and S factors.
    Global,
    /// Archimedean fixed-part series HS_R.
    Hsr,
    /// The square-ratio G(t) = HS_R(t)^2 / HS_R(t^2).
    #[value(name = "G")]
    G,
    /// CM local series (1-t)^(-1)(1-t^2)^(-1) prod (1-t^k)^(-2).
    CmLocal,
    /// CM global series (1-t)^(-r)(1-t^2)^(-s) prod (1-t^k)^(-1).
    CmGlobal,
    /// Polylogarithmic local series in even weights.
    PolylogLocal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundModeArg {
    ExactCoefficient,
    Simplified,
}

impl From<BoundModeArg> for BoundMode {
    fn from(mode: BoundModeArg) -> BoundMode {
        match mode {
            BoundModeArg::ExactCoefficient => BoundMode::ExactCoefficient,
            BoundModeArg::Simplified => BoundMode::Simplified,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    /// HS_R(t)^2 = G(t) HS_R(t^2) over the default shapes.
    Funceq,
    /// Product factors have constant term 1 and nonnegative coefficients.
    Product,
    /// Global series bounded by its closed-form majorant, over the grid.
    Cor210,
    /// Doubling bound on local partial sums.
    Lemma31,
    /// Twisted square of the local series bounded by twice the local one.
    Lemma32,
    /// Damped global square bounded by a power of two times the local series.
    Lemma33,
    /// Partial-sum reversal windows plus the central-binomial inequality.
    Lowerbound,
    /// Sign-evaluation factorization of symmetric power classes.
    Sublemma,
    /// CM series exponents, table identities, and growth comparisons.
    Cm,
    /// Polylogarithmic series identities and crossing growth.
    Polylog,
    /// Every suite above, in order.
    All,
}

#[derive(Subcommand)]
enum CmCommand {
    /// Least m with a strict table crossing for r' = r + s.
    FindM {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s: u32,
        /// Use the un-relaxed global table (never a later crossing).
        #[arg(long)]
        exact: bool,
    },
    /// Bound report for a CM curve described by a JSON file.
    Bound {
        /// Path to a CMData JSON file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = CmModeArg::ExactCoefficient)]
        mode: CmModeArg,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CmModeArg {
    ExactCoefficient,
    Asymptotic,
}

#[derive(Subcommand)]
enum PolylogCommand {
    /// Least m where the majorant table drops below the local one.
    FindM {
        #[arg(long)]
        s: u32,
    },
}

/// Inclusive rank/S grid, parsed from "r=A..B,s=C..D".
#[derive(Clone)]
struct Grid {
    r_lo: u32,
    r_hi: u32,
    s_lo: u32,
    s_hi: u32,
}

impl Grid {
    fn parse(raw: &str) -> Result<Grid, String> {
        let mut grid = Grid {
            r_lo: 0,
            r_hi: 2,
            s_lo: 0,
            s_hi: 2,
        };
        for part in raw.split(',') {
            let (name, range) = part
                .split_once('=')
                .ok_or_else(|| format!("expected name=lo..hi, got `{part}`"))?;
            let (lo, hi) = range
                .split_once("..")
                .ok_or_else(|| format!("expected lo..hi, got `{range}`"))?;
            let lo: u32 = lo.parse().map_err(|_| format!("bad bound `{lo}`"))?;
            let hi: u32 = hi.parse().map_err(|_| format!("bad bound `{hi}`"))?;
            if lo > hi {
                return Err(format!("empty range `{range}`"));
            }
            match name.trim() {
                "r" => (grid.r_lo, grid.r_hi) = (lo, hi),
                "s" => (grid.s_lo, grid.s_hi) = (lo, hi),
                other => return Err(format!("unknown grid parameter `{other}`")),
            }
        }
        Ok(grid)
    }

    fn pairs(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for r in self.r_lo..=self.r_hi {
            for s in self.s_lo..=self.s_hi {
                out.push((r, s));
            }
        }
        out
    }
}

struct RunConfig {
    order: usize,
    format: OutputFormat,
    seed: u64,
    budget: u64,
    digits: u32,
}

enum Failure {
    /// The printed report contains failing cases.
    Report,
    /// An error object to render, with its exit code.
    Error {
        exit: u8,
        code: &'static str,
        message: String,
    },
}

fn usage(code: &'static str, message: impl Into<String>) -> Failure {
    Failure::Error {
        exit: 2,
        code,
        message: message.into(),
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        usage("io", e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Failure {
        usage("schema", e.to_string())
    }
}

impl From<HilbertError> for Failure {
    fn from(e: HilbertError) -> Failure {
        match e {
            HilbertError::NonIntegerExponent { .. } => Failure::Error {
                exit: 1,
                code: "not-a-product-form",
                message: e.to_string(),
            },
            _ => usage("domain", e.to_string()),
        }
    }
}

impl From<BoundsError> for Failure {
    fn from(e: BoundsError) -> Failure {
        match e {
            BoundsError::BudgetExceeded { .. } => Failure::Error {
                exit: 3,
                code: "budget-exceeded",
                message: e.to_string(),
            },
            BoundsError::NotFoundBelowCap { .. } => Failure::Error {
                exit: 1,
                code: "no-crossing",
                message: e.to_string(),
            },
            _ => usage("domain", e.to_string()),
        }
    }
}

impl From<CmError> for Failure {
    fn from(e: CmError) -> Failure {
        match e {
            CmError::BudgetExceeded { .. } => Failure::Error {
                exit: 3,
                code: "budget-exceeded",
                message: e.to_string(),
            },
            _ => usage("domain", e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let budget = match resolve_budget(cli.budget) {
        Ok(v) => v,
        Err(failure) => {
            // Fall back to text rendering; the config never materialized.
            return finish(
                &RunConfig {
                    order: cli.order,
                    format: cli.format,
                    seed: cli.seed,
                    budget: DEFAULT_BUDGET,
                    digits: 6,
                },
                Err(failure),
            );
        }
    };
    let config = RunConfig {
        order: cli.order,
        format: cli.format,
        seed: cli.seed,
        budget,
        digits: 6,
    };
    let result = run(cli.command, &config);
    finish(&config, result)
}

fn finish(config: &RunConfig, result: Result<(), Failure>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Report) => ExitCode::from(1),
        Err(Failure::Error {
            exit,
            code,
            message,
        }) => {
            match config.format {
                OutputFormat::Json => println!(
                    "{}",
                    serde_json::json!({"error": {"code": code, "message": message}})
                ),
                OutputFormat::Text => eprintln!("error: {message}"),
            }
            ExitCode::from(exit)
        }
    }
}

fn resolve_budget(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match env::var("CKBOUND_BUDGET") {
        Ok(raw) => raw.parse().map_err(|_| {
            usage(
                "usage",
                format!("CKBOUND_BUDGET must be an integer, got `{raw}`"),
            )
        }),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn run(command: Command, config: &RunConfig) -> Result<(), Failure> {
    match command {
        Command::Series(args) => cmd_series(&args, config),
        Command::Bound { input, mode } => cmd_bound(&input, mode, config),
        Command::FindM { input } => cmd_find_m(&input, config),
        Command::Verify { suite, grid } => cmd_verify(suite, &grid, config),
        Command::ExtractExponents { input } => cmd_extract_exponents(&input, config),
        Command::Cm(CmCommand::FindM { r, s, exact }) => cmd_cm_find_m(r, s, exact, config),
        Command::Cm(CmCommand::Bound { input, mode }) => cmd_cm_bound(&input, mode, config),
        Command::Polylog(PolylogCommand::FindM { s }) => cmd_polylog_find_m(s, config),
    }
}

fn emit<T: Serialize>(config: &RunConfig, value: &T, text: impl FnOnce() -> String) {
    match config.format {
        OutputFormat::Json => println!(
            "{}",
            serde_json::to_string_pretty(value).expect("reports serialize")
        ),
        OutputFormat::Text => println!("{}", text()),
    }
}

// ---------------------------------------------------------------- series

/// Keeps the payload deserializable as a bare series (the exponent
/// extractor accepts it back) while labeling what was expanded.
#[derive(Serialize)]
struct SeriesOutput<'a> {
    kind: &'a str,
    conjectural: bool,
    #[serde(flatten)]
    series: &'a QSeries,
}

fn require(value: Option<u32>, flag: &str, kind: &str) -> Result<u32, Failure> {
    value.ok_or_else(|| usage("usage", format!("series kind `{kind}` needs {flag}")))
}

fn cmd_series(args: &SeriesArgs, config: &RunConfig) -> Result<(), Failure> {
    let order = config.order;
    let curve = |args: &SeriesArgs, kind: &str| -> Result<CurveData, Failure> {
        let g = require(args.g, "--g", kind)?;
        let n = require(args.n, "--n", kind)?;
        let mut c = shape_curve(g, n, args.n1.unwrap_or(n));
        c.r = args.r.unwrap_or(0);
        c.s = args.s.unwrap_or(0);
        c.validate()
            .map_err(|e| usage("validation", e.to_string()))?;
        Ok(c)
    };
    let (name, series, conjectural) = match args.kind {
        SeriesKind::Local => ("local", local_series(&curve(args, "local")?, order)?, false),
        SeriesKind::Global => (
            "global",
            ckbound_core::hilbert::global_series(&curve(args, "global")?, order)?,
            true,
        ),
        SeriesKind::Hsr => (
            "hsr",
            real_fixed_series(&curve(args, "hsr")?, order)?,
            false,
        ),
        SeriesKind::G => ("G", g_series(&curve(args, "G")?, order)?, false),
        SeriesKind::CmLocal => ("cm-local", cm::cm_local_series(order), false),
        SeriesKind::CmGlobal => (
            "cm-global",
            cm::cm_global_series(args.r.unwrap_or(0), args.s.unwrap_or(0), order),
            true,
        ),
        SeriesKind::PolylogLocal => ("polylog-local", cm::polylog_local_series(order), false),
    };
    let output = SeriesOutput {
        kind: name,
        conjectural,
        series: &series,
    };
    emit(config, &output, || {
        let mut text = format!("# {name} series, order {order}");
        if conjectural {
            text.push_str(", conjectural");
        }
        for (i, c) in series.coeffs().iter().enumerate() {
            let _ = write!(text, "\n{i:>6}  {c}");
        }
        text
    });
    Ok(())
}

// ----------------------------------------------------------------- bound

fn read_curve(path: &PathBuf) -> Result<CurveData, Failure> {
    let raw = fs::read_to_string(path)?;
    let c: CurveData = serde_json::from_str(&raw)?;
    c.validate()
        .map_err(|e| usage("validation", e.to_string()))?;
    Ok(c)
}

fn render_bound_report(report: &BoundReport) -> String {
    let mut text = String::new();
    let _ = write!(
        text,
        "m  = {}\nM  = {}  (s_bar = {}, lemma s_bar = {}{})",
        report.m,
        report.m_cap,
        report.s_bar,
        report.s_bar_lemma,
        if report.s_bar_mismatch {
            ", conventions differ"
        } else {
            ""
        }
    );
    let _ = write!(
        text,
        "\nkappa_{} <= {}\npoints mod p: {}",
        report.kappa.p, report.kappa.decimal_upper, report.factors.point_count
    );
    let _ = write!(
        text,
        "\nprod n_ell outside S: {} ({} digits)\nprod (n_ell + n) inside S: {} ({} digits)",
        report.factors.n_ell_outside_s.value,
        report.factors.n_ell_outside_s.digits,
        report.factors.n_ell_plus_n_inside_s.value,
        report.factors.n_ell_plus_n_inside_s.digits
    );
    let _ = write!(
        text,
        "\nleading {}^M: {} digits\ncoefficient product: {} digits (exact <= simplified: {})",
        report.factors.leading_base,
        report.factors.leading.digits,
        report.factors.coefficient_product.digits,
        report.exact_le_simplified
    );
    let _ = write!(
        text,
        "\nsimplified {}^(M(M-1)/2) = {}^{}: {} digits",
        report.factors.simplified_base,
        report.factors.simplified_base,
        report.factors.simplified_exponent,
        report.factors.simplified_power.digits
    );
    if report.bound_exact_digits <= 40 {
        let _ = write!(text, "\nbound <= {}", report.bound_exact);
    }
    let _ = write!(
        text,
        "\nbound digits: {}\nlog10(bound) <= {}\nconjectural: {}",
        report.bound_exact_digits, report.bound_log10, report.conjectural
    );
    text
}

fn cmd_bound(input: &PathBuf, mode: BoundModeArg, config: &RunConfig) -> Result<(), Failure> {
    let c = read_curve(input)?;
    let report = compute_bound(&c, mode.into(), config.budget, config.digits)?;
    emit(config, &report, || render_bound_report(&report));
    Ok(())
}

#[derive(Serialize)]
struct FindMReport {
    m: u64,
    #[serde(rename = "M")]
    m_cap: u64,
    s_bar: u32,
    s_bar_lemma: u32,
}

fn cmd_find_m(input: &PathBuf, config: &RunConfig) -> Result<(), Failure> {
    let c = read_curve(input)?;
    let cap = m_cap(&c);
    let cap = match cap.to_u64() {
        Some(v) if v <= config.budget => v,
        _ => {
            return Err(Failure::Error {
                exit: 3,
                code: "budget-exceeded",
                message: format!("cap M = {cap} exceeds the order budget {}", config.budget),
            })
        }
    };
    let m = find_minimal_m(&c, cap as usize)? as u64;
    let report = FindMReport {
        m,
        m_cap: cap,
        s_bar: s_bar_theorem(&c),
        s_bar_lemma: s_bar_lemma(&c),
    };
    emit(config, &report, || {
        format!(
            "m = {m}\nM = {cap}\ns_bar = {} (lemma convention {})",
            report.s_bar, report.s_bar_lemma
        )
    });
    Ok(())
}

// ------------------------------------------------------- extract-exponents

#[derive(Serialize)]
struct ExponentOutput {
    order: usize,
    nonnegative: bool,
    exponents: Vec<String>,
}

fn cmd_extract_exponents(input: &str, config: &RunConfig) -> Result<(), Failure> {
    let raw = if input == "-" {
        let mut buffer = String::new();
        std::io::stdin().read_to_string(&mut buffer)?;
        buffer
    } else {
        fs::read_to_string(input)?
    };
    let series: QSeries = serde_json::from_str(&raw)?;
    let exponents = extract_exponents(&series)?;
    let output = ExponentOutput {
        order: exponents.order(),
        nonnegative: exponents.is_nonnegative(),
        exponents: exponents.values().iter().map(|e| e.to_string()).collect(),
    };
    emit(config, &output, || {
        let mut text = format!(
            "# exponents e_k of prod (1-t^k)^(-e_k), k = 1..{}",
            output.order
        );
        for (i, e) in output.exponents.iter().enumerate() {
            let _ = write!(text, "\n{:>6}  {e}", i + 1);
        }
        text
    });
    Ok(())
}

// -------------------------------------------------------------- cm/polylog

#[derive(Serialize)]
struct CrossingOutput {
    m: u64,
    r_prime: u32,
    relaxed: bool,
}

fn cmd_cm_find_m(r: u32, s: u32, exact: bool, config: &RunConfig) -> Result<(), Failure> {
    let budget = config.budget as usize;
    let m = if exact {
        cm::cm_find_minimal_m_exact(r, s, budget)?
    } else {
        cm::cm_find_minimal_m(r, s, budget)?
    };
    let output = CrossingOutput {
        m: m as u64,
        r_prime: r + s,
        relaxed: !exact,
    };
    emit(config, &output, || {
        format!(
            "m = {m} (r' = {}, {} table)",
            r + s,
            if exact { "exact" } else { "relaxed" }
        )
    });
    Ok(())
}

fn cmd_cm_bound(input: &PathBuf, mode: CmModeArg, config: &RunConfig) -> Result<(), Failure> {
    let raw = fs::read_to_string(input)?;
    let data: cm::CMData = serde_json::from_str(&raw)?;
    let mode = match mode {
        CmModeArg::ExactCoefficient => CmBoundMode::ExactCoefficient,
        CmModeArg::Asymptotic => CmBoundMode::Asymptotic,
    };
    let report = cm::cm_bound(&data, mode, config.budget as usize, config.digits)?;
    emit(config, &report, || {
        let mut text = format!(
            "m0 = {} (r' = {})\nkappa_{} <= {}\npoint factor: {}\n5^t = {}",
            report.m0,
            report.r_prime,
            report.kappa.p,
            report.kappa.decimal_upper,
            report.point_factor,
            report.five_power
        );
        if report.bound_digits <= 40 {
            let _ = write!(text, "\nbound <= {}", report.bound);
        }
        let _ = write!(
            text,
            "\nbound digits: {}\nlog10(bound) <= {}\nunconditional: {}\nconjectural: {}",
            report.bound_digits, report.bound_log10, report.unconditional, report.conjectural
        );
        text
    });
    Ok(())
}

fn cmd_polylog_find_m(s: u32, config: &RunConfig) -> Result<(), Failure> {
    let m = cm::polylog_find_minimal_m(s, config.budget as usize)?;
    let output = CrossingOutput {
        m: m as u64,
        r_prime: s,
        relaxed: true,
    };
    emit(config, &output, || format!("m = {m} (s = {s})"));
    Ok(())
}

// ---------------------------------------------------------------- verify

#[derive(Serialize)]
struct Case {
    case: String,
    pass: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    detail: String,
}

impl Case {
    fn pass(case: impl Into<String>) -> Case {
        Case {
            case: case.into(),
            pass: true,
            detail: String::new(),
        }
    }

    fn fail(case: impl Into<String>, detail: impl Into<String>) -> Case {
        Case {
            case: case.into(),
            pass: false,
            detail: detail.into(),
        }
    }

    fn check(case: impl Into<String>, pass: bool, detail: impl FnOnce() -> String) -> Case {
        if pass {
            Case::pass(case)
        } else {
            Case::fail(case, detail())
        }
    }
}

#[derive(Serialize)]
struct SuiteReport {
    suite: String,
    order: usize,
    passed: usize,
    failed: usize,
    holds: bool,
    cases: Vec<Case>,
}

impl SuiteReport {
    fn new(suite: &str, order: usize, cases: Vec<Case>) -> SuiteReport {
        let failed = cases.iter().filter(|c| !c.pass).count();
        SuiteReport {
            suite: suite.to_string(),
            order,
            passed: cases.len() - failed,
            failed,
            holds: failed == 0,
            cases,
        }
    }

    fn render(&self) -> String {
        let mut text = String::new();
        for case in &self.cases {
            if case.pass {
                let _ = write!(text, "ok    {}\n", case.case);
            } else {
                let _ = write!(text, "FAIL  {}: {}\n", case.case, case.detail);
            }
        }
        let _ = write!(
            text,
            "{}: {} passed, {} failed",
            self.suite, self.passed, self.failed
        );
        text
    }
}

fn cmd_verify(suite: Suite, grid: &Grid, config: &RunConfig) -> Result<(), Failure> {
    let suites: Vec<Suite> = match suite {
        Suite::All => vec![
            Suite::Funceq,
            Suite::Product,
            Suite::Cor210,
            Suite::Lemma31,
            Suite::Lemma32,
            Suite::Lemma33,
            Suite::Lowerbound,
            Suite::Sublemma,
            Suite::Cm,
            Suite::Polylog,
        ],
        single => vec![single],
    };
    let mut reports = Vec::new();
    for suite in suites {
        let (name, cases) = run_suite(suite, grid, config)?;
        reports.push(SuiteReport::new(name, config.order, cases));
    }
    let holds = reports.iter().all(|r| r.holds);
    if reports.len() == 1 {
        let report = &reports[0];
        emit(config, report, || report.render());
    } else {
        emit(
            config,
            &serde_json::json!({"suites": reports, "holds": holds}),
            || {
                reports
                    .iter()
                    .map(SuiteReport::render)
                    .collect::<Vec<_>>()
                    .join("\n\n")
            },
        );
    }
    if holds {
        Ok(())
    } else {
        Err(Failure::Report)
    }
}

fn run_suite(
    suite: Suite,
    grid: &Grid,
    config: &RunConfig,
) -> Result<(&'static str, Vec<Case>), Failure> {
    match suite {
        Suite::Funceq => Ok(("funceq", suite_funceq(config)?)),
        Suite::Product => Ok(("product", suite_product(config)?)),
        Suite::Cor210 => Ok(("cor210", suite_cor210(grid, config)?)),
        Suite::Lemma31 => Ok(("lemma31", suite_lemma31(config)?)),
        Suite::Lemma32 => Ok(("lemma32", suite_lemma32(config)?)),
        Suite::Lemma33 => Ok(("lemma33", suite_lemma33(grid, config)?)),
        Suite::Lowerbound => Ok(("lowerbound", suite_lowerbound(grid, config)?)),
        Suite::Sublemma => Ok(("sublemma", suite_sublemma(config))),
        Suite::Cm => Ok(("cm", suite_cm(grid, config)?)),
        Suite::Polylog => Ok(("polylog", suite_polylog(config)?)),
        Suite::All => unreachable!("expanded by the caller"),
    }
}

fn hyperbolic_pairs() -> Vec<(u32, u32)> {
    let mut pairs = Vec::new();
    for g in 0..=3u32 {
        for n in 0..=4u32 {
            if 2 * g + n > 2 {
                pairs.push((g, n));
            }
        }
    }
    pairs
}

fn suite_funceq(config: &RunConfig) -> Result<Vec<Case>, Failure> {
    let mut cases = Vec::new();
    for (g, n, n1) in default_shapes(3, 4) {
        let report = verify_functional_equation(&shape_curve(g, n, n1), config.order)?;
        cases.push(Case::check(
            format!("g={g} n={n} n1={n1}"),
            report.holds,
            || format!("first mismatch at {:?}", report.first_mismatch),
        ));
    }
    Ok(cases)
}

fn suite_product(config: &RunConfig) -> Result<Vec<Case>, Failure> {
    let mut cases = Vec::new();
    for (g, n, n1) in default_shapes(3, 4) {
        let report = verify_product_factors(&shape_curve(g, n, n1), config.order)?;
        cases.push(Case::check(
            format!("g={g} n={n} n1={n1}"),
            report.holds,
            || {
                format!(
                    "log G first negative: {:?}; offending factors: {:?}",
                    report.log_g_first_negative,
                    report
                        .factors
                        .iter()
                        .filter(|f| !f.nonnegative || !f.constant_term_one)
                        .map(|f| f.j)
                        .collect::<Vec<_>>()
                )
            },
        ));
    }
    Ok(cases)
}

fn suite_cor210(grid: &Grid, config: &RunConfig) -> Result<Vec<Case>, Failure> {
    let mut cases = Vec::new();
    for (g, n, n1) in default_shapes(3, 4) {
        let base = shape_curve(g, n, n1);
        let real = real_fixed_series(&base, config.order)?;
        let core = majorant_core(&base, config.order)?;
        for (r, s) in grid.pairs() {
            let mut c = base.clone();
            c.r = r;
            c.s = s;
            let glob = global_series_with_real(&c, &real, config.order)?;
            let bound = global_bound_series_with_core(&c, &core, config.order)?;
            let report =
                compare_coefficientwise(&glob, &bound, config.order).map_err(HilbertError::from)?;
            cases.push(Case::check(
                format!("g={g} n={n} n1={n1} r={r} s={s}"),
                report.holds,
                || format!("first violation at {:?}", report.first_violation),
            ));
        }
    }
    Ok(cases)
}

fn suite_lemma31(config: &RunConfig) -> Result<Vec<Case>, Failure> {
    let mut cases = Vec::new();
    for (g, n) in hyperbolic_pairs() {
        let report = verify_lemma_31(g, n, config.order)?;
        cases.push(Case::check(format!("g={g} n={n}"), report.holds, || {
            format!("{report:?}")
        }));
    }
    Ok(cases)
}

fn suite_lemma32(config: &RunConfig) -> Result<Vec<Case>, Failure> {
    let mut cases = Vec::new();
    for (g, n, n1) in default_shapes(3, 4) {
        let report = verify_lemma_32(g, n, n1, config.order)?;
        cases.push(Case::check(
            format!("g={g} n={n} n1={n1}"),
            report.holds,
            || format!("first violation at {:?}", report.first_violation),
        ));
    }
    Ok(cases)
}

fn suite_lemma33(grid: &Grid, config: &RunConfig) -> Result<Vec<Case>, Failure> {
    let mut cases = Vec::new();
    for (g, n, n1) in default_shapes(3, 4) {
        for (r, s) in grid.pairs() {
            // A genus-zero Jacobian is trivial, so only r = 0 occurs there.
            if g == 0 && r > 0 {
                continue;
            }
            let mut c = shape_curve(g, n, n1);
            c.r = r;
            c.s = s;
            let report = verify_lemma_33(&c, config.order)?;
            cases.push(Case::check(
                format!("g={g} n={n} n1={n1} r={r} s={s}"),
                report.holds,
                || {
                    format!(
                        "inequality violation at {:?}, squared growth violation at {:?}",
                        report.inequality.first_violation, report.squared_growth.first_violation
                    )
                },
            ));
        }
    }
    Ok(cases)
}

fn suite_lowerbound(grid: &Grid, config: &RunConfig) -> Result<Vec<Case>, Failure> {
    let mut cases = Vec::new();
    for (r, s) in grid.pairs() {
        if r + s < 1 {
            continue;
        }
        let report = verify_lower_bound_lemma(r, s, config.budget as usize, config.digits)?;
        let label = if report.vacuous {
            format!(
                "r={r} s={s} (window empty, upper end {})",
                report.window.upper_decimal
            )
        } else {
            format!("r={r} s={s} ({} values of m)", report.checked)
        };
        cases.push(Case::check(label, report.holds, || {
            format!(
                "partial-sum reversal fails at m = {:?}",
                report.first_failure
            )
        }));
    }
    let stirling = verify_stirling_binomial(64, config.digits);
    cases.push(Case::check(
        "central binomial vs 4^j/(e^(1/42) sqrt(pi j)), j <= 64".to_string(),
        stirling.holds,
        || format!("certified false at j = {:?}", stirling.violations),
    ));
    Ok(cases)
}

fn suite_sublemma(config: &RunConfig) -> Vec<Case> {
    let mut cases = Vec::new();
    let mut box_failures = Vec::new();
    for a in -8..=8i64 {
        for b in -8..=8i64 {
            if !verify_sgn_factorization(&C2Class::from_ints(a, b), config.order).holds {
                box_failures.push((a, b));
            }
        }
    }
    cases.push(Case::check(
        "exhaustive |a|, |b| <= 8".to_string(),
        box_failures.is_empty(),
        || format!("failing classes: {box_failures:?}"),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut random_failures = Vec::new();
    for _ in 0..32 {
        let a = rng.gen_range(-64i64..=64);
        let b = rng.gen_range(-64i64..=64);
        if !verify_sgn_factorization(&C2Class::from_ints(a, b), config.order).holds {
            random_failures.push((a, b));
        }
    }
    cases.push(Case::check(
        format!("32 random classes, |a|, |b| <= 64, seed {}", config.seed),
        random_failures.is_empty(),
        || format!("failing classes: {random_failures:?}"),
    ));
    cases
}

fn suite_cm(grid: &Grid, config: &RunConfig) -> Result<Vec<Case>, Failure> {
    let mut cases = Vec::new();

    let local = extract_exponents(&cm::cm_local_series(64))?;
    let local_ok = (1..=64).all(|k| {
        let expected = if k <= 2 { 1 } else { 2 };
        local.get(k) == &BigInt::from(expected)
    });
    cases.push(Case::check(
        "local exponents (1,1,2,2,...), k <= 64",
        local_ok,
        || "dimension sequence mismatch".to_string(),
    ));

    for (r, s) in grid.pairs() {
        let glob = extract_exponents(&cm::cm_global_series(r, s, 64))?;
        let ok = (1..=64).all(|k| {
            let expected = match k {
                1 => BigInt::from(r),
                2 => BigInt::from(s),
                _ => BigInt::from(1),
            };
            glob.get(k) == &expected
        });
        cases.push(Case::check(
            format!("global exponents (r,s,1,1,...), r={r} s={s}"),
            ok,
            || "dimension sequence mismatch".to_string(),
        ));
    }

    let p = cm::partition_numbers(128);
    let b = cm::b_table(128);
    let convolution_ok = (0..=128usize).all(|n| {
        let direct: BigInt = (0..=n).map(|k| &p[k] * &p[n - k]).sum();
        b[n] == direct
    });
    cases.push(Case::check(
        "b_n = sum p(k) p(n-k), n <= 128",
        convolution_ok,
        || "recurrence and convolution disagree".to_string(),
    ));

    let pairing = cm::first_local_pairing_violation(256);
    cases.push(Case::check(
        "b_n >= middle pairing terms, n <= 256",
        pairing.is_none(),
        || format!("fails at n = {pairing:?}"),
    ));

    for r_prime in 2..=6u32 {
        let violation = cm::first_global_asymptotic_violation(r_prime, 128);
        cases.push(Case::check(
            format!("a~_n <= (n+1)^r' p(n), r'={r_prime}, n <= 128"),
            violation.is_none(),
            || format!("fails at n = {violation:?}"),
        ));
    }

    let fit = cm::fit_b_constant(&b, 128, config.digits);
    let lower = cm::verify_b_exponential_lower(&b, &fit.c2, 128, config.digits);
    cases.push(Case::check(
        "b_n >= C2 e^(pi sqrt(4n/3))/n^2 with fitted C2, n <= 128",
        lower.is_none(),
        || format!("fails at n = {lower:?}"),
    ));

    let local_series_coeffs = cm::cm_local_series(128);
    let sandwich = (1..=128usize).find(|&i| {
        let c_loc = local_series_coeffs[i].to_integer();
        let b_i = cm::local_partial_sums(&b, i);
        c_loc + 1 > b_i || b_i > b[i]
    });
    cases.push(Case::check(
        "c_i^loc + 1 <= B_i <= b_i, 1 <= i <= 128",
        sandwich.is_none(),
        || format!("fails at i = {sandwich:?}"),
    ));

    let a_exact = cm::a_table(2, 1, 64);
    let a_relaxed = cm::a_tilde_table(3, 64);
    let relaxation = (0..=64usize).find(|&m| a_exact[m] > a_relaxed[m]);
    cases.push(Case::check(
        "a_m <= a~_m for r=2 s=1, m <= 64",
        relaxation.is_none(),
        || format!("fails at m = {relaxation:?}"),
    ));

    let sandwich_fit = cm::fit_partition_constants(&p, 128, config.digits);
    let mut gamma_ok = true;
    let mut gamma_detail = String::new();
    for r_prime in 2..=8u32 {
        let report = cm::cm_gamma_crossing(
            r_prime,
            Some(&sandwich_fit.c1),
            Some(&fit.c2),
            config.digits,
        )?;
        if !report.derivative_positive_beyond_4r {
            gamma_ok = false;
            let _ = write!(
                gamma_detail,
                "derivative not certified positive at r'={r_prime}; "
            );
        }
    }
    cases.push(Case::check(
        "gamma increasing past 4r' with fitted constants, r' = 2..8",
        gamma_ok,
        || gamma_detail,
    ));

    let sqrt_sum = cm::verify_sqrt_sum_bound(10_000, config.digits);
    cases.push(Case::check(
        "sum sqrt(i) <= (2/3) m^(3/2) + (1/2) m^(1/2), m <= 10000",
        sqrt_sum.holds,
        || format!("fails at m = {:?}", sqrt_sum.first_failure),
    ));

    Ok(cases)
}

fn suite_polylog(config: &RunConfig) -> Result<Vec<Case>, Failure> {
    use ckbound_core::series::equal_up_to;
    use num_traits::{One, Zero};

    let order = config.order;
    let mut cases = Vec::new();

    let p = cm::partition_numbers(order / 2);
    let mut coeffs = vec![BigRational::zero(); order + 1];
    for (k, value) in p.iter().enumerate() {
        coeffs[2 * k] = BigRational::from_integer(value.clone());
    }
    let rhs = QSeries::from_coeffs(coeffs).mul_inv_one_minus_tk(2);
    let first =
        equal_up_to(&cm::polylog_local_series(order), &rhs, order).map_err(HilbertError::from)?;
    cases.push(Case::check(
        format!("local series = (1-t^2)^(-1) sum p(n) t^(2n), order {order}"),
        first.holds,
        || format!("mismatch at {:?}", first.first_mismatch),
    ));

    let q = cm::odd_partition_numbers(order / 2);
    let lhs = ckbound_core::hilbert::expand_product_form(order, |k| {
        if k % 4 == 2 {
            BigInt::one()
        } else {
            BigInt::zero()
        }
    });
    let mut coeffs = vec![BigRational::zero(); order + 1];
    for (k, value) in q.iter().enumerate() {
        coeffs[2 * k] = BigRational::from_integer(value.clone());
    }
    let second =
        equal_up_to(&lhs, &QSeries::from_coeffs(coeffs), order).map_err(HilbertError::from)?;
    cases.push(Case::check(
        format!("odd-part product = sum q(n) t^(2n), order {order}"),
        second.holds,
        || format!("mismatch at {:?}", second.first_mismatch),
    ));

    for s in 2..=8u32 {
        match cm::polylog_find_minimal_m(s, config.budget as usize) {
            Ok(m) => cases.push(Case::pass(format!("crossing exists for s={s} (m = {m})"))),
            Err(CmError::BudgetExceeded { budget }) => cases.push(Case::fail(
                format!("crossing exists for s={s}"),
                format!("not found within order budget {budget}"),
            )),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(cases)
}
