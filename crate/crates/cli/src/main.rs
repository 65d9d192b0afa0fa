use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use varcvx::{config_echo, gallery_listing, run, CliError, Command, Outcome, ProblemSpec};

#[derive(Parser)]
#[command(name = "varcvx", version, about = "Variational convexity and second-order sufficiency checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Variational convexity at the reference pair (or a named sub-check).
    CheckVc(RunArgs),
    /// Variational strong convexity; needs a positive modulus.
    CheckSvc(RunArgs),
    /// LICQ, KKT multipliers and second-order sufficiency for an NLP.
    CheckNlp(RunArgs),
    /// Moreau envelope and its gradient on a grid, as CSV.
    EnvelopeScan(RunArgs),
    /// List gallery entries and their known facts.
    Gallery {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Report file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV file for envelope scans; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn write_or_print(path: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn execute(command: Command, args: &RunArgs) -> anyhow::Result<i32> {
    let start = Instant::now();
    let text = std::fs::read_to_string(&args.spec).with_context(|| format!("reading {}", args.spec.display()))?;
    let raw: Value = serde_json::from_str(&text).unwrap_or(Value::Null);
    let (outcome, config) = match ProblemSpec::parse(&text) {
        Ok(spec) => {
            let o = run(command, &spec, args.seed);
            (o, config_echo(&spec, &raw))
        }
        Err(e) => (
            Outcome { exit_code: 3, verdicts: Vec::new(), extra: Default::default(), csv: None, error: Some(e) },
            raw,
        ),
    };
    if let Some(e) = &outcome.error {
        eprintln!("error: {e}");
        if let CliError::LicqFailed(v) = e {
            if let Some(w) = &v.witness {
                eprintln!("dependent combination: {:?}", w.get("alpha").unwrap_or(&[]));
            }
        }
    }
    let report = outcome.report(command, &config, args.seed, start.elapsed().as_secs_f64());
    if let Some(csv) = &outcome.csv {
        write_or_print(args.csv.as_ref(), csv.trim_end())?;
        if let Some(p) = &args.out {
            write_or_print(Some(p), &serde_json::to_string_pretty(&report)?)?;
        }
    } else {
        write_or_print(args.out.as_ref(), &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::CheckVc(a) => execute(Command::CheckVc, a),
        Cmd::CheckSvc(a) => execute(Command::CheckSvc, a),
        Cmd::CheckNlp(a) => execute(Command::CheckNlp, a),
        Cmd::EnvelopeScan(a) => execute(Command::EnvelopeScan, a),
        Cmd::Gallery { out } => serde_json::to_string_pretty(&gallery_listing())
            .map_err(Into::into)
            .and_then(|t| write_or_print(out.as_ref(), &t))
            .map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
