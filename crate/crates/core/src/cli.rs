//! Command-line front end.
//!
//! Exit codes: 0 when every asserted property holds, 1 when a certified
//! property fails (the report names it), 2 on usage or configuration errors.
//! Reports are TOML documents with exact numbers written as `p/q`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Signed;
use serde::Serialize;

use crate::continuum::{refinement_study, ContinuumConfig};
use crate::dtn::{dtn_map_strip, dtn_spectrum_probe};
use crate::error::Error;
use crate::marching::{march, oracle_march, CauchyData};
use crate::matrix::Matrix;
use crate::network::{StripNetwork, Vertex};
use crate::scalar::{format_rational, parse_rational, Rational};
use crate::spectral::{certify_spectrum, SpectrumReport};
use crate::tncheck::{all_minors_nonneg, is_elementary_nonneg, MinorCertificate, TnVerdict};
use crate::transfer::{modified_h, oracle_modified_h, product_of_steps, TransferOperator};

#[derive(Parser, Debug)]
#[command(name = "hcont", version, about = "Certificates for harmonic continuation on lattice strips")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the shifted transfer operator and certify that its spectrum is positive.
    Spectrum(OperatorArgs),
    /// Exhaustive exact minor certificate for the transfer operator.
    CertifyTn(OperatorArgs),
    /// Emit the elementary step factorization and check every step.
    Factor(OperatorArgs),
    /// Compare marching and the transfer operator against their dense-solve oracles.
    OracleCheck(OperatorArgs),
    /// Dirichlet-to-Neumann map of the strip; with --shift, the spectrum probe.
    Dtn(DtnArgs),
    /// Grid-refinement study from a config file.
    ContinuumStudy(StudyArgs),
}

#[derive(Args, Debug)]
struct NetworkArgs {
    /// Strip height R (vertices per column)
    #[arg(long)]
    rows: Option<usize>,
    /// Strip length C (number of columns)
    #[arg(long)]
    cols: Option<usize>,
    /// `uniform:g` or `random:lo,hi` (random requires --seed)
    #[arg(long)]
    gamma: Option<String>,
    /// Seed for random conductivities
    #[arg(long)]
    seed: Option<u64>,
    /// Network file (rows, cols and conductivity tables)
    #[arg(long, conflicts_with_all = ["gamma", "seed"])]
    network: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Backend {
    Exact,
    Float,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OperatorArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// Number of columns to continue across
    #[arg(long)]
    shift: usize,
    #[arg(long, value_enum, default_value = "exact")]
    backend: Backend,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct DtnArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// Also certify the transfer operator for this shift
    #[arg(long)]
    shift: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct StudyArgs {
    /// Study config (height, length, shift, gamma, levels)
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

/// A failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_)
            | Error::InvalidConfig(_)
            | Error::Parse(_)
            | Error::WrongBackend
            | Error::BudgetExceeded { .. } => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

/// Outcome of a command: the report text and whether its properties held.
struct Outcome {
    report: String,
    holds: bool,
    failed: Vec<&'static str>,
}

impl Outcome {
    fn new(report: String, checks: &[(&'static str, bool)]) -> Self {
        let failed: Vec<&'static str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
        Self { report, holds: failed.is_empty(), failed }
    }
}

fn load_network(args: &NetworkArgs) -> Result<(StripNetwork<Rational>, String), Failure> {
    if let Some(path) = &args.network {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        let net = StripNetwork::from_text(&text)?;
        if args.rows.is_some_and(|r| r != net.rows()) || args.cols.is_some_and(|c| c != net.cols()) {
            return Err(usage("--rows/--cols disagree with the network file"));
        }
        return Ok((net, format!("file:{}", path.display())));
    }
    let (Some(rows), Some(cols)) = (args.rows, args.cols) else {
        return Err(usage("either --network or both --rows and --cols are required"));
    };
    let gamma = args.gamma.as_deref().ok_or_else(|| usage("--gamma is required without --network"))?;
    let (kind, params) = gamma.split_once(':').ok_or_else(|| usage(format!("malformed --gamma {gamma:?}")))?;
    match kind {
        "uniform" => {
            if args.seed.is_some() {
                return Err(usage("--seed only applies to random conductivities"));
            }
            let g = parse_rational(params)?;
            Ok((StripNetwork::build_uniform(rows, cols, g)?, format!("uniform:{params}")))
        }
        "random" => {
            let seed = args.seed.ok_or_else(|| usage("random conductivities require an explicit --seed"))?;
            let (lo, hi) = params.split_once(',').ok_or_else(|| usage("random conductivities need lo,hi"))?;
            let (lo, hi) = (parse_rational(lo)?, parse_rational(hi)?);
            let net = StripNetwork::build_random(rows, cols, seed, &lo, &hi)?;
            Ok((net, format!("random:{},{};seed={seed}", format_rational(&lo), format_rational(&hi))))
        }
        _ => Err(usage(format!("unknown conductivity kind {kind:?}"))),
    }
}

fn require_exact(backend: Backend, command: &str) -> Result<(), Failure> {
    if backend != Backend::Exact {
        return Err(usage(format!("{command} certifies exactly; --backend exact is mandatory")));
    }
    Ok(())
}

fn require_text(output: &OutputArgs, command: &str) -> Result<(), Failure> {
    if output.format != Format::Text {
        return Err(usage(format!("{command} only produces text reports")));
    }
    Ok(())
}

fn to_toml<T: Serialize>(value: &T) -> Result<String, Failure> {
    toml::to_string(value).map_err(|e| Failure { code: 1, message: format!("report serialization failed: {e}") })
}

#[derive(Serialize)]
struct SpectrumCommandReport<'a> {
    command: &'static str,
    network: &'a str,
    rows: usize,
    cols: usize,
    shift: usize,
    spectrum: &'a SpectrumReport,
}

/// Column order of the `spectrum --format csv` output.
pub const SPECTRUM_CSV_HEADER: [&str; 5] = ["network", "rows", "shift", "min_root_lower_bound", "verdict"];

fn spectrum(args: &OperatorArgs) -> Result<Outcome, Failure> {
    require_exact(args.backend, "spectrum")?;
    let (net, desc) = load_network(&args.network)?;
    let op = modified_h(&net, args.shift)?;
    let report = certify_spectrum(&op.matrix)?;
    let checks = [("all eigenvalues real and positive", report.is_all_positive())];
    let text = match args.output.format {
        Format::Text => to_toml(&SpectrumCommandReport {
            command: "spectrum",
            network: &desc,
            rows: net.rows(),
            cols: net.cols(),
            shift: args.shift,
            spectrum: &report,
        })?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let lower = report.min_root_lower_bound().map(|r| format_rational(&r)).unwrap_or_default();
            let record = [desc.clone(), net.rows().to_string(), args.shift.to_string(), lower, report.verdict.to_string()];
            w.write_record(SPECTRUM_CSV_HEADER).and_then(|_| w.write_record(&record)).map_err(|e| usage(e.to_string()))?;
            String::from_utf8(w.into_inner().map_err(|e| usage(e.to_string()))?).expect("utf-8 csv")
        }
    };
    Ok(Outcome::new(text, &checks))
}

#[derive(Serialize)]
struct CertifyReport<'a> {
    command: &'static str,
    network: &'a str,
    rows: usize,
    cols: usize,
    shift: usize,
    nonsingular: bool,
    certificate: &'a MinorCertificate,
}

fn certify_tn(args: &OperatorArgs) -> Result<Outcome, Failure> {
    require_exact(args.backend, "certify-tn")?;
    require_text(&args.output, "certify-tn")?;
    let (net, desc) = load_network(&args.network)?;
    let op = modified_h(&net, args.shift)?;
    let cert = all_minors_nonneg(&op.matrix)?;
    let nonsingular = cert.determinant.is_positive();
    let text = to_toml(&CertifyReport {
        command: "certify-tn",
        network: &desc,
        rows: net.rows(),
        cols: net.cols(),
        shift: args.shift,
        nonsingular,
        certificate: &cert,
    })?;
    Ok(Outcome::new(text, &[("totally nonnegative", cert.verdict == TnVerdict::Tnn), ("positive determinant", nonsingular)]))
}

#[derive(Serialize)]
struct FactorReport<'a, T> {
    command: &'static str,
    network: &'a str,
    rows: usize,
    cols: usize,
    shift: usize,
    steps: usize,
    all_steps_elementary_nonneg: bool,
    product_matches_operator: bool,
    operator: T,
}

#[derive(Serialize)]
struct FloatStep {
    row: usize,
    slots: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct FloatOperator {
    matrix: Vec<Vec<f64>>,
    steps: Vec<FloatStep>,
}

fn factor(args: &OperatorArgs) -> Result<Outcome, Failure> {
    require_text(&args.output, "factor")?;
    let (net, desc) = load_network(&args.network)?;
    let text;
    let (all_ok, product_ok, steps);
    match args.backend {
        Backend::Exact => {
            let op: TransferOperator<Rational> = modified_h(&net, args.shift)?;
            all_ok = op.steps.iter().all(is_elementary_nonneg);
            product_ok = product_of_steps(op.matrix.rows(), &op.steps) == op.matrix;
            steps = op.steps.len();
            text = to_toml(&FactorReport {
                command: "factor",
                network: &desc,
                rows: net.rows(),
                cols: net.cols(),
                shift: args.shift,
                steps,
                all_steps_elementary_nonneg: all_ok,
                product_matches_operator: product_ok,
                operator: &op,
            })?;
        }
        Backend::Float => {
            let op = modified_h(&net.to_backend::<f64>(), args.shift)?;
            all_ok = op.steps.iter().all(|s| s.is_well_shaped());
            product_ok = product_of_steps(op.matrix.rows(), &op.steps) == op.matrix;
            steps = op.steps.len();
            let float = FloatOperator {
                matrix: op.matrix.to_rows(),
                steps: op
                    .steps
                    .iter()
                    .map(|s| FloatStep {
                        row: s.row(),
                        slots: s.entries().iter().map(|(j, _)| *j).collect(),
                        values: s.entries().iter().map(|(_, v)| *v).collect(),
                    })
                    .collect(),
            };
            text = to_toml(&FactorReport {
                command: "factor",
                network: &desc,
                rows: net.rows(),
                cols: net.cols(),
                shift: args.shift,
                steps,
                all_steps_elementary_nonneg: all_ok,
                product_matches_operator: product_ok,
                operator: float,
            })?;
        }
    }
    Ok(Outcome::new(text, &[("every step is elementary nonnegative", all_ok), ("step product equals operator", product_ok)]))
}

#[derive(Serialize)]
struct OracleReport<'a> {
    command: &'static str,
    network: &'a str,
    rows: usize,
    cols: usize,
    max_shift: usize,
    march_data_sets: usize,
    march_matches_oracle: bool,
    operator_matches_oracle: bool,
}

fn oracle_check(args: &OperatorArgs) -> Result<Outcome, Failure> {
    require_exact(args.backend, "oracle-check")?;
    require_text(&args.output, "oracle-check")?;
    let (net, desc) = load_network(&args.network)?;
    let r = net.rows();
    let mut march_ok = true;
    let mut sets = 0;
    for j in 0..2 * r {
        let data = CauchyData::from_vec(
            r,
            (0..2 * r).map(|i| Rational::from_integer(((i == j) as i64 + i as i64).into())).collect(),
        )?;
        march_ok &= march(&net, &data)? == oracle_march(&net, &data)?;
        sets += 1;
    }
    let mut op_ok = true;
    for s in 0..=args.shift {
        op_ok &= modified_h(&net, s)?.matrix == oracle_modified_h(&net, s)?;
    }
    let text = to_toml(&OracleReport {
        command: "oracle-check",
        network: &desc,
        rows: r,
        cols: net.cols(),
        max_shift: args.shift,
        march_data_sets: sets,
        march_matches_oracle: march_ok,
        operator_matches_oracle: op_ok,
    })?;
    Ok(Outcome::new(text, &[("march equals oracle", march_ok), ("operator equals oracle", op_ok)]))
}

#[derive(Serialize)]
struct DtnReport<'a> {
    command: &'static str,
    network: &'a str,
    rows: usize,
    cols: usize,
    symmetric_zero_row_sums: bool,
    boundary: Vec<Vertex>,
    dtn: &'a Matrix<Rational>,
}

fn dtn(args: &DtnArgs) -> Result<Outcome, Failure> {
    require_text(&args.output, "dtn")?;
    let (net, desc) = load_network(&args.network)?;
    let boundary = net.outer_vertices();
    let map = dtn_map_strip(&net, &boundary)?;
    let valid = map.is_valid();
    let text = match args.shift {
        Some(s) => dtn_spectrum_probe(&net, s)?.to_text(),
        None => to_toml(&DtnReport {
            command: "dtn",
            network: &desc,
            rows: net.rows(),
            cols: net.cols(),
            symmetric_zero_row_sums: valid,
            boundary,
            dtn: &map.matrix,
        })?,
    };
    Ok(Outcome::new(text, &[("DtN map symmetric with zero row sums", valid)]))
}

fn continuum_study(args: &StudyArgs) -> Result<Outcome, Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.config.display())))?;
    let cfg = ContinuumConfig::from_text(&text)?;
    let study = refinement_study(&cfg)?;
    let report = match args.output.format {
        Format::Text => study.to_text(),
        Format::Csv => study.to_csv(),
    };
    Ok(Outcome::new(report, &[("positive spectrum at every level", study.verdict)]))
}

fn output_args(command: &Command) -> &OutputArgs {
    match command {
        Command::Spectrum(a) | Command::CertifyTn(a) | Command::Factor(a) | Command::OracleCheck(a) => &a.output,
        Command::Dtn(a) => &a.output,
        Command::ContinuumStudy(a) => &a.output,
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Spectrum(a) => spectrum(a),
        Command::CertifyTn(a) => certify_tn(a),
        Command::Factor(a) => factor(a),
        Command::OracleCheck(a) => oracle_check(a),
        Command::Dtn(a) => dtn(a),
        Command::ContinuumStudy(a) => continuum_study(a),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            return f.code;
        }
    };
    let written = match &output_args(&cli.command).output {
        Some(path) => fs::write(path, &outcome.report).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => out.write_all(outcome.report.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return 2;
    }
    if outcome.holds {
        0
    } else {
        for name in outcome.failed {
            let _ = writeln!(err, "property failed: {name}");
        }
        1
    }
}
