use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use flatlab_cli::{execute, list_examples, load, CliError, CliResult, Overrides, Report, Scenario, REPORT_SCHEMA, SCENARIO_SCHEMA};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "flatlab", version, about = "Twisted cohomology, theta functions, flat families and weighted dbar experiments")]
struct Cli {
    /// Seed recorded in the report; overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Numeric tolerance used by the computation (rank, membership, solver, theta truncation).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Grid resolution (dbar polar grid side, family chart grid).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Write the report here instead of standard output; a directory when several scenarios run.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// List the shipped scenarios (or those in $FLATLAB_EXAMPLES).
    List,
    /// Run scenario files or catalog entries; several run concurrently.
    Run {
        #[arg(required = true)]
        scenarios: Vec<String>,
    },
    /// Print a published JSON schema.
    Schema {
        #[arg(value_enum, default_value_t = SchemaKind::Report)]
        which: SchemaKind,
    },
    /// Cohomology dimensions of a twisted Cech complex.
    Cech {
        /// Shipped nerve name or a datum JSON file.
        nerve: String,
        /// Remaining payload fields as inline JSON or a file path.
        #[arg(long)]
        config: Option<String>,
    },
    /// Jump ideal and zero set in one degree.
    Jumploci {
        nerve: String,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        config: Option<String>,
    },
    /// Flat-family identities and curvature semipositivity.
    Family {
        #[arg(long)]
        config: Option<String>,
    },
    /// Theta evaluation, quasi-periodicity, triples and transition-ratio fits.
    Theta {
        #[arg(value_enum)]
        op: ThetaOp,
        #[arg(long)]
        config: Option<String>,
    },
    /// Weighted dbar experiments on the punctured disk.
    Dbar {
        #[arg(value_enum)]
        op: DbarOp,
        #[arg(long)]
        config: Option<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemaKind {
    Report,
    Scenario,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ThetaOp {
    Eval,
    Quasi,
    Triple,
    Fit,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DbarOp {
    Cutoff,
    Pushforward,
    Solve,
    OtConstant,
    OtExtend,
    Curvature,
    TwoWeight,
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

/// Inline JSON when the argument starts with `{`, otherwise a file path.
fn json_arg(arg: Option<&str>) -> CliResult<serde_json::Map<String, Value>> {
    let Some(arg) = arg else { return Ok(Default::default()) };
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| CliError::Parse(format!("{arg}: {e}")))?
    };
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::from_json("--config", e))?;
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::Schema("--config must be a JSON object".into())),
    }
}

fn nerve_value(nerve: &str) -> CliResult<Value> {
    if Path::new(nerve).is_file() {
        let text = std::fs::read_to_string(nerve).map_err(|e| CliError::Parse(format!("{nerve}: {e}")))?;
        serde_json::from_str(&text).map_err(|e| CliError::from_json(nerve, e))
    } else {
        Ok(json!(nerve))
    }
}

fn direct_scenario(command: &Command) -> CliResult<Scenario> {
    let (kind, name, payload) = match command {
        Command::Cech { nerve, config } => {
            let mut p = json_arg(config.as_deref())?;
            p.insert("nerve".into(), nerve_value(nerve)?);
            p.entry("characters").or_insert_with(|| json!([{ "label": "trivial", "character": "trivial" }, { "label": "generic", "character": "random" }]));
            ("cech", format!("cech-{nerve}"), p)
        }
        Command::Jumploci { nerve, degree, config } => {
            let mut p = json_arg(config.as_deref())?;
            p.insert("nerve".into(), nerve_value(nerve)?);
            p.insert("degree".into(), json!(degree));
            ("jumploci", format!("jumploci-{nerve}"), p)
        }
        Command::Family { config } => ("family", "family".into(), json_arg(config.as_deref())?),
        Command::Theta { op, config } => {
            let mut p = json_arg(config.as_deref())?;
            p.insert("op".into(), json!(value_name(op)));
            ("theta", format!("theta-{}", value_name(op)), p)
        }
        Command::Dbar { op, config } => {
            let mut p = json_arg(config.as_deref())?;
            p.insert("op".into(), json!(value_name(op)));
            ("dbar", format!("dbar-{}", value_name(op)), p)
        }
        Command::List | Command::Run { .. } | Command::Schema { .. } => unreachable!("not a module command"),
    };
    let doc = json!({ "schema_version": 1, "name": name, "kind": kind, "payload": payload });
    Scenario::parse("command line", &doc.to_string())
}

fn render(report: &Report, format: Format) -> CliResult<String> {
    match format {
        Format::Json => Ok(report.to_json()),
        Format::Csv => report.to_csv(),
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes one report: to `path` with a summary on stdout, or to stdout.
fn emit(report: &Report, path: Option<&Path>, format: Format) -> CliResult<u8> {
    let text = render(report, format)?;
    match path {
        Some(p) => {
            write_file(p, &text)?;
            print!("{}", report.summary());
        }
        None => {
            print!("{text}");
            eprint!("{}", report.summary());
        }
    }
    Ok(report.exit_code())
}

fn run_many(args: &[String], cli: &Cli, ov: &Overrides) -> u8 {
    let loaded: Vec<CliResult<Report>> = std::thread::scope(|s| {
        let handles: Vec<_> = args
            .iter()
            .map(|a| s.spawn(move || load(a).and_then(|(_, sc)| execute(sc, ov))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    });
    let ext = if cli.format == Format::Csv { "csv" } else { "json" };
    let mut code = 0u8;
    for report in loaded {
        let outcome = report.and_then(|r| {
            let path = match (&cli.out, args.len()) {
                (Some(o), 1) => Some(o.clone()),
                (Some(dir), _) => Some(dir.join(format!("{}.report.{ext}", r.scenario.name))),
                (None, _) => r.scenario.output.clone(),
            };
            emit(&r, path.as_deref(), cli.format)
        });
        code = code.max(match outcome {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{e}");
                2
            }
        });
    }
    code
}

fn real_main(cli: &Cli) -> CliResult<u8> {
    let ov = Overrides { seed: cli.seed, tol: cli.tol, grid: cli.grid };
    match &cli.command {
        Command::List => {
            let catalog = list_examples()?;
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&json!({ "schema_version": 1, "examples": catalog })).expect("catalog serializes") + "\n",
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    for e in &catalog {
                        w.serialize(e).map_err(|e| CliError::Io(e.to_string()))?;
                    }
                    String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).expect("utf-8 csv")
                }
            };
            match &cli.out {
                Some(p) => write_file(p, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Schema { which } => {
            print!("{}", if *which == SchemaKind::Report { REPORT_SCHEMA } else { SCENARIO_SCHEMA });
            Ok(0)
        }
        Command::Run { scenarios } => Ok(run_many(scenarios, cli, &ov)),
        other => {
            let report = execute(direct_scenario(other)?, &ov)?;
            emit(&report, cli.out.as_deref(), cli.format)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match real_main(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            2
        }
    };
    let _ = std::io::stdout().flush();
    ExitCode::from(code)
}
