//! Command-line front end: every subcommand loads a configuration (by
//! catalog name or interchange file), calls the corresponding library
//! operation, and prints a report. Exit codes: 0 success, 1 verification
//! failure (with a machine-readable witness), 2 I/O or usage errors.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use std::path::PathBuf;
use std::process::ExitCode;
use triply::scheme::{self, TripleMode};
use triply::solver::UnionAnalysis;
use triply::sphereset::{ConfigurationFile, GramConfiguration};
use triply::{catalog, report};

#[derive(Parser)]
#[command(
    name = "triply",
    about = "Exact verification of spherical designs, coherent configurations and triple regularity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Catalog entry name (see `triply catalog`).
    #[arg(long, conflicts_with = "input")]
    catalog: Option<String>,
    /// Interchange JSON file with dimension, fibers and Gram matrix.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog entries, or export one to the interchange format.
    Catalog {
        /// Entry to export; omit to list all names.
        name: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Design strength and tightness.
    VerifyDesign {
        #[command(flatten)]
        input: InputArgs,
        /// Largest strength probed; the default is twice the angle count.
        #[arg(long)]
        max_t: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Angle sets and fiber relations.
    AngleSet {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Verify the coherent-configuration axioms on the angle classes and
    /// report the parameter tensor.
    Scheme {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Certify triple regularity by exhaustive or sampled counting.
    TripleRegular {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample size in sampled mode.
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        /// Confirm an exhaustive run on a large configuration.
        #[arg(long)]
        exhaustive: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Derived designs at a base point, with case classification.
    Derive {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 0)]
        base_point: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Full triple-regularity certificate via the derived-design pipeline.
    Pipeline {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Intersection-number tables of the derived designs (for the union of
    /// mutually unbiased bases and the linked system).
    Tables {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(value, output)) => {
            let _ = emit(&value, &output);
            ExitCode::from(1)
        }
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

enum Failure {
    /// A verification failed; the report carries the witness.
    Verification(Value, OutputArgs),
    /// I/O, parse or argument errors.
    Usage(String),
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn load(input: &InputArgs) -> Result<GramConfiguration, Failure> {
    match (&input.catalog, &input.input) {
        (Some(name), None) => Ok(catalog::by_name(name).map_err(usage)?.config),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(usage)?;
            let file = ConfigurationFile::parse(&text).map_err(usage)?;
            file.into_configuration().map_err(usage)
        }
        _ => Err(Failure::Usage(
            "provide exactly one of --catalog NAME or --input FILE".into(),
        )),
    }
}

fn emit(value: &Value, output: &OutputArgs) -> Result<(), Failure> {
    let rendered = match output.format {
        Format::Json => serde_json::to_string_pretty(value).expect("serializable"),
        Format::Text => report::render_text(value),
    };
    match &output.output {
        Some(path) => std::fs::write(path, rendered + "\n").map_err(usage),
        None => {
            println!("{rendered}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Catalog { name, output } => {
            let value = match name {
                None => serde_json::json!({
                    "entries": catalog::CATALOG_NAMES,
                }),
                Some(name) => {
                    let item = catalog::by_name(&name).map_err(usage)?;
                    report::catalog_export(&item)
                }
            };
            emit(&value, &output)
        }
        Command::VerifyDesign {
            input,
            max_t,
            output,
        } => {
            let config = load(&input)?;
            let max_t = max_t.unwrap_or_else(|| config.default_max_t());
            let value = report::design_report(&config, max_t);
            emit(&value, &output)
        }
        Command::AngleSet { input, output } => {
            let config = load(&input)?;
            emit(&report::angle_report(&config), &output)
        }
        Command::Scheme { input, output } => {
            let config = load(&input)?;
            if config.num_fibers() == 1 {
                match scheme::scheme_from_gram(&config) {
                    Ok((scheme, _)) => emit(&report::scheme_report(&scheme), &output),
                    Err(e) => Err(Failure::Verification(
                        report::scheme_failure_report(&e),
                        output,
                    )),
                }
            } else {
                let analysis = UnionAnalysis::with_measured_strengths(&config).map_err(usage)?;
                let partition = analysis.partition().map_err(usage)?;
                match scheme::verify_coherent(&partition) {
                    Ok(scheme) => emit(&report::scheme_report(&scheme), &output),
                    Err(e) => Err(Failure::Verification(
                        report::scheme_failure_report(&e),
                        output,
                    )),
                }
            }
        }
        Command::TripleRegular {
            input,
            mode,
            seed,
            trials,
            exhaustive,
            output,
        } => {
            let config = load(&input)?;
            let (scheme, _) = scheme::scheme_from_gram(&config).map_err(usage)?;
            let n = scheme.len() as u64;
            let mode = match mode {
                Mode::Exhaustive => {
                    if n.pow(4) > 4_000_000_000 && !exhaustive {
                        return Err(Failure::Usage(format!(
                            "{n}^4 base-triple scans are slow; pass --exhaustive to confirm, or use --mode sampled"
                        )));
                    }
                    TripleMode::Exhaustive
                }
                Mode::Sampled => TripleMode::Sampled { seed, trials },
            };
            match scheme::triple_regular(&scheme, mode) {
                Ok(tensor) => emit(&report::triple_report(&tensor), &output),
                Err(witness) => Err(Failure::Verification(
                    report::triple_witness_report(&witness),
                    output,
                )),
            }
        }
        Command::Derive {
            input,
            base_point,
            output,
        } => {
            let config = load(&input)?;
            if base_point >= config.len() {
                return Err(Failure::Usage(format!(
                    "base point {base_point} out of range (configuration has {} points)",
                    config.len()
                )));
            }
            let (family, declared) =
                triply::solver::derived_analysis(&config, base_point).map_err(usage)?;
            let analysis = UnionAnalysis::new(&family.config, declared).map_err(usage)?;
            let mut cases = Vec::new();
            for i in 0..analysis.num_fibers() {
                for j in 0..analysis.num_fibers() {
                    for k in 0..analysis.num_fibers() {
                        cases.push(analysis.classify(i, j, k).map_err(usage)?);
                    }
                }
            }
            emit(&report::derive_report(&analysis, base_point, &cases), &output)
        }
        Command::Pipeline { input, output } => {
            let config = load(&input)?;
            match triply::solver::corollary_pipeline(&config) {
                Ok(certificate) => emit(&report::certificate_report(&certificate), &output),
                Err(e) => Err(Failure::Verification(
                    serde_json::json!({
                        "triply_regular": Value::Null,
                        "error": e.to_string(),
                        "note": "pipeline inapplicability is not a refutation of triple regularity",
                    }),
                    output,
                )),
            }
        }
        Command::Tables { input, output } => {
            let name = input
                .catalog
                .clone()
                .ok_or_else(|| Failure::Usage("tables requires --catalog".into()))?;
            let item = catalog::by_name(&name).map_err(usage)?;
            let value = if let Some(system) = &item.linked {
                report::linked_tables(system).map_err(usage)?
            } else {
                report::mub_table(&item.config).map_err(usage)?
            };
            emit(&value, &output)
        }
    }
}
