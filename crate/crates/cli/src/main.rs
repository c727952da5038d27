//! `splinegram` command-line front end.
//!
//! Exit codes: 0 pass, 1 bound violation, 2 certificate/arithmetic/resource
//! failure, 3 input error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use splinegram::decay::{decay_constants, ratio_csv};
use splinegram::gram::{gram, gram_quadrature};
use splinegram::invstep::{history_json, inverse_json, invert_iteratively};
use splinegram::knots::{KnotSequence, PartitionFile};
use splinegram::partition::{PartitionKind, PartitionSpec};
use splinegram::polycert::{certify_with_spot_check, Inequality, DEFAULT_TERM_BUDGET};
use splinegram::sweep::{float_gram, run_sweep, verify_instance, ScalarMode, SweepConfig};
use splinegram::{Error, Rational, Scalar};

const EXIT_VIOLATION: u8 = 1;
const EXIT_FAILURE: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "splinegram",
    version,
    about = "B-spline Gram matrices, inverse decay bounds and positivity certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Assemble a Gram matrix and dump it as JSON.
    Gram(PartitionArgs),
    /// Invert a Gram matrix by bordered updates.
    Invert {
        #[command(flatten)]
        partition: PartitionArgs,
        /// Also dump every diagonal entry and last column along the way.
        #[arg(long)]
        history: bool,
    },
    /// Check the decay bounds on one partition (--spec) or a random sweep.
    Verify(VerifyArgs),
    /// Run coefficient-sign certificates.
    Certify(CertifyArgs),
    /// Write a partition file.
    Gen(PartitionArgs),
}

#[derive(Args, Debug)]
struct PartitionArgs {
    /// Spline order k (read from the file for file: specs).
    #[arg(long)]
    order: Option<usize>,
    /// uniform:N, random:SEED:N, geometric:RATIO:N or file:PATH.
    #[arg(long)]
    spec: String,
    #[arg(long, default_value = "exact")]
    mode: String,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    order: Option<usize>,
    /// Single partition to check; a random sweep runs when omitted.
    #[arg(long)]
    spec: Option<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 40)]
    max_m: usize,
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV output: per-entry ratios for one partition, per-trial rows for sweeps.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// Certificates to run (default: all five).
    names: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_TERM_BUDGET)]
    budget: usize,
    /// Random positive points for the numeric spot check.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Input(_) | Error::Io(_) | Error::Json(_) => EXIT_INPUT,
        _ => EXIT_FAILURE,
    }
}

fn emit(out: Option<&Path>, value: &Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    write_text(out, &text)
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn resolve_spec(order: Option<usize>, text: &str) -> Result<PartitionSpec, Error> {
    let kind = PartitionKind::parse(text)?;
    let order = match (&kind, order) {
        (_, Some(k)) => k,
        (PartitionKind::Explicit(path), None) => PartitionFile::read(path)?.order,
        (_, None) => return Err(Error::input("--order is required")),
    };
    if order == 0 {
        return Err(Error::input("order must be at least 1"));
    }
    Ok(PartitionSpec::new(order, kind))
}

fn parse_mode(text: &str) -> Result<ScalarMode, Error> {
    text.parse()
}

fn cmd_gram(args: &PartitionArgs) -> Result<u8, Error> {
    let spec = resolve_spec(args.order, &args.spec)?;
    let dump = match parse_mode(&args.mode)? {
        ScalarMode::Exact => gram(&spec.generate()?).to_json(),
        ScalarMode::Float => {
            let ks = spec.generate_float()?;
            if ks.order() <= 3 {
                gram(&ks)
            } else {
                gram_quadrature(&ks)
            }
            .to_json()
        }
    };
    emit(args.out.as_deref(), &dump)?;
    Ok(0)
}

fn invert_dump<S: Scalar>(
    ks: &KnotSequence<S>,
    a: &splinegram::SymBandedMatrix<S>,
    history: bool,
) -> Result<Value, Error> {
    let inv = invert_iteratively(a, history)?;
    let mut value =
        json!({ "k": ks.order(), "m": ks.dim(), "inverse": inverse_json(&inv.matrix()) });
    if history {
        value["history"] = history_json(&inv);
    }
    Ok(value)
}

fn cmd_invert(args: &PartitionArgs, history: bool) -> Result<u8, Error> {
    let spec = resolve_spec(args.order, &args.spec)?;
    let value = match parse_mode(&args.mode)? {
        ScalarMode::Exact => {
            let ks = spec.generate()?;
            invert_dump(&ks, &gram(&ks), history)?
        }
        ScalarMode::Float => {
            let ks = spec.generate_float()?;
            invert_dump(&ks, &float_gram(&ks), history)?
        }
    };
    emit(args.out.as_deref(), &value)?;
    Ok(0)
}

fn verify_single(args: &VerifyArgs, spec_text: &str) -> Result<u8, Error> {
    let spec = resolve_spec(args.order, spec_text)?;
    let (report, csv) = match parse_mode(&args.mode)? {
        ScalarMode::Exact => {
            let ks = spec.generate()?;
            let a = gram(&ks);
            let inst = verify_instance(&ks, &a)?;
            let csv = single_csv(&ks, &a)?;
            (inst, csv)
        }
        ScalarMode::Float => {
            let ks = spec.generate_float()?;
            let a = float_gram(&ks);
            let inst = verify_instance(&ks, &a)?;
            let csv = single_csv(&ks, &a)?;
            (inst, csv)
        }
    };
    emit(args.out.as_deref(), &report.to_json())?;
    if let (Some(path), Some(csv)) = (&args.csv, csv) {
        write_text(Some(path), &csv)?;
    }
    Ok(if report.pass { 0 } else { EXIT_VIOLATION })
}

fn single_csv<S: Scalar>(
    ks: &KnotSequence<S>,
    a: &splinegram::SymBandedMatrix<S>,
) -> Result<Option<String>, Error> {
    let Ok(consts) = decay_constants(ks.order()) else {
        return Ok(None);
    };
    let inv = invert_iteratively(a, false)?;
    Ok(Some(ratio_csv(&inv.matrix(), ks, &consts)))
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, Error> {
    if let Some(spec) = &args.spec {
        return verify_single(args, spec);
    }
    let config = SweepConfig {
        order: args
            .order
            .ok_or_else(|| Error::input("--order is required"))?,
        trials: args.trials,
        max_m: args.max_m,
        mode: parse_mode(&args.mode)?,
        seed: args.seed,
    };
    let report = run_sweep(&config)?;
    emit(args.out.as_deref(), &report.to_json())?;
    if let Some(path) = &args.csv {
        write_text(Some(path), &report.to_csv())?;
    }
    Ok(if report.pass { 0 } else { EXIT_VIOLATION })
}

fn cmd_certify(args: &CertifyArgs) -> Result<u8, Error> {
    let names: Vec<Inequality> = if args.names.is_empty() {
        Inequality::ALL.to_vec()
    } else {
        args.names
            .iter()
            .map(|n| n.parse())
            .collect::<Result<_, _>>()?
    };
    let mut records = Vec::new();
    let mut status = 0;
    for which in names {
        match certify_with_spot_check(which, args.budget, args.samples, args.seed) {
            Ok(cert) => {
                let spot_ok = cert.spot_check.as_ref().is_none_or(|s| s.pass);
                if !(cert.success && spot_ok) {
                    status = EXIT_FAILURE;
                }
                records.push(cert.to_json());
            }
            Err(Error::TermBudget {
                name,
                budget,
                partial,
            }) => {
                status = EXIT_FAILURE;
                records.push(json!({
                    "name": name,
                    "success": false,
                    "error": format!("term budget of {budget} exceeded"),
                    "partial": *partial,
                }));
            }
            Err(e) => return Err(e),
        }
    }
    emit(args.out.as_deref(), &Value::Array(records))?;
    Ok(status)
}

fn cmd_gen(args: &PartitionArgs) -> Result<u8, Error> {
    let spec = resolve_spec(args.order, &args.spec)?;
    let interior: Vec<String> = match parse_mode(&args.mode)? {
        ScalarMode::Exact => spec
            .generate()?
            .interior()
            .iter()
            .map(Rational::to_exact_string)
            .collect(),
        ScalarMode::Float => spec
            .generate_float()?
            .interior()
            .iter()
            .map(|x| x.to_string())
            .collect(),
    };
    let value = match parse_mode(&args.mode)? {
        ScalarMode::Exact => json!({ "order": spec.order, "interior": interior }),
        ScalarMode::Float => json!({
            "order": spec.order,
            "interior": interior.iter().map(|s| s.parse::<f64>().expect("float")).collect::<Vec<_>>(),
        }),
    };
    emit(args.out.as_deref(), &value)?;
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8, Error> {
    match &cli.command {
        Command::Gram(args) => cmd_gram(args),
        Command::Invert { partition, history } => cmd_invert(partition, *history),
        Command::Verify(args) => cmd_verify(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
