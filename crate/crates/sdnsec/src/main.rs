//! Command-line front end.
//!
//! Exit codes: 0 success, 2 catalog validation failure, 3 scenario or
//! simulation error, 4 I/O or schema error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sdnsec::attack::{self, AttackError};
use sdnsec::cvss::{self, CvssVector};
use sdnsec::kb::{self, Catalog, KbError};
use sdnsec::pipeline::{
    self, AssessOptions, PipelineError, RenderOptions, ReportFormat, ScenarioSummary, Stage3Entry,
};
use sdnsec::sim::new_sim;
use sdnsec::topo::{self, TopoError};

const EXIT_VALIDATION: u8 = 2;
const EXIT_SCENARIO: u8 = 3;
const EXIT_IO_SCHEMA: u8 = 4;

#[derive(Parser)]
#[command(
    name = "sdnsec",
    version,
    about = "Security evaluation toolkit for SDN data-center architectures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Knowledge-base operations
    Kb {
        #[command(subcommand)]
        command: KbCommand,
    },
    /// Score a CVSS v3.1 vector string
    Score {
        /// Vector in standard string form, e.g. "CVSS:3.1/AV:N/AC:L/..."
        #[arg(long)]
        vector: String,
        /// Also compute the environmental score
        #[arg(long)]
        env: bool,
    },
    /// Run the four-stage assessment
    Assess {
        /// Catalog file (default: $SDNSEC_KB, then the built-in catalog)
        #[arg(long)]
        kb: Option<PathBuf>,
        /// Topology file or the name "builtin"
        #[arg(long, default_value = topo::BUILTIN_TOPOLOGY_NAME)]
        topology: String,
        /// Number of top-ranked attack scenarios to execute (0 = skip)
        #[arg(long, default_value_t = 3)]
        attacks: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Comma-separated mitigations to apply first, e.g. M6,M8,M13
        #[arg(long, value_delimiter = ',')]
        harden: Vec<String>,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report timestamp (defaults to the current UTC time)
        #[arg(long)]
        timestamp: Option<String>,
        /// Render scores with a decimal comma
        #[arg(long)]
        decimal_comma: bool,
    },
    /// Run a single attack scenario on a fresh simulator
    Attack {
        /// brute-force | brute-force-slow | mitm | dos, or a scenario file path
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        harden: Vec<String>,
        #[arg(long, default_value = topo::BUILTIN_TOPOLOGY_NAME)]
        topology: String,
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the scenario's trace slice as line-oriented text
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Re-render a structured report document
    Report {
        /// Structured (JSON) report produced by `assess --format structured`
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        decimal_comma: bool,
    },
}

#[derive(Subcommand)]
enum KbCommand {
    /// Load a catalog and report every invariant violation
    Validate {
        #[arg(long)]
        kb: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Structured,
    Dot,
}

impl From<FormatArg> for ReportFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Text => ReportFormat::Text,
            FormatArg::Structured => ReportFormat::Structured,
            FormatArg::Dot => ReportFormat::Dot,
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<KbError> for CliError {
    fn from(e: KbError) -> Self {
        CliError::new(EXIT_IO_SCHEMA, e.to_string())
    }
}

impl From<TopoError> for CliError {
    fn from(e: TopoError) -> Self {
        let code = match &e {
            TopoError::Io { .. } | TopoError::Parse(_) | TopoError::Invalid(_) => EXIT_IO_SCHEMA,
            _ => EXIT_SCENARIO,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<AttackError> for CliError {
    fn from(e: AttackError) -> Self {
        let code = match &e {
            AttackError::Io { .. } | AttackError::Parse(_) => EXIT_IO_SCHEMA,
            _ => EXIT_SCENARIO,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Kb(inner) => inner.into(),
            PipelineError::Topo(inner) => inner.into(),
            PipelineError::Attack(inner) => inner.into(),
            PipelineError::Sim(inner) => CliError::new(EXIT_SCENARIO, inner.to_string()),
            PipelineError::Io { .. } | PipelineError::Parse(_) => {
                CliError::new(EXIT_IO_SCHEMA, e.to_string())
            }
        }
    }
}

fn load_catalog_arg(flag: Option<&PathBuf>) -> Result<Catalog, CliError> {
    if let Some(path) = flag {
        return Ok(kb::load_catalog_file(path)?);
    }
    if let Ok(path) = std::env::var(kb::KB_ENV_VAR) {
        if !path.is_empty() {
            return Ok(kb::load_catalog_file(&path)?);
        }
    }
    Ok(kb::builtin().clone())
}

fn emit(content: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| {
            CliError::new(EXIT_IO_SCHEMA, format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn now_utc() -> String {
    chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Kb { command } => match command {
            KbCommand::Validate { kb } => {
                let catalog = load_catalog_arg(kb.as_ref())?;
                let report = kb::validate_catalog(&catalog);
                println!(
                    "catalog: {} threats, {} vulnerabilities, {} mitigations, {} categories",
                    catalog.threats.len(),
                    catalog.vulnerabilities.len(),
                    catalog.mitigations.len(),
                    catalog.categories.len()
                );
                println!("checks run: {}", report.checks.len());
                println!("violations: {}", report.total_violations());
                if report.is_clean() {
                    Ok(())
                } else {
                    for (check, violation) in report.violations() {
                        eprintln!("  {check}: [{}] {}", violation.record, violation.message);
                    }
                    Err(CliError::new(EXIT_VALIDATION, "catalog validation failed"))
                }
            }
        },
        Command::Score { vector, env } => {
            let parsed = CvssVector::parse(&vector)
                .map_err(|e| CliError::new(EXIT_IO_SCHEMA, e.to_string()))?;
            println!("vector:        {}", parsed.to_vector_string());
            let base = cvss::base_score(&parsed);
            println!("base:          {} {}", base, base.severity());
            if env {
                let environmental = cvss::environmental_score(&parsed);
                println!(
                    "environmental: {} {}",
                    environmental,
                    environmental.severity()
                );
            }
            Ok(())
        }
        Command::Assess {
            kb,
            topology,
            attacks,
            seed,
            harden,
            format,
            out,
            timestamp,
            decimal_comma,
        } => {
            let catalog = load_catalog_arg(kb.as_ref())?;
            let topology = topo::load_topology_source(&topology)?;
            let options = AssessOptions {
                attacks,
                seed,
                harden,
                timestamp: timestamp.unwrap_or_else(now_utc),
            };
            let report = pipeline::assess(&catalog, &topology, &options)?;
            let rendered = pipeline::render_report(
                &report,
                format.into(),
                &RenderOptions { decimal_comma },
            );
            emit(&rendered, out.as_ref())
        }
        Command::Attack {
            scenario,
            seed,
            harden,
            topology,
            kb,
            format,
            out,
            trace_out,
        } => {
            let catalog = load_catalog_arg(kb.as_ref())?;
            let mut topology = topo::load_topology_source(&topology)?;
            for mitigation in &harden {
                topology = topology.apply_hardening(mitigation)?;
            }
            let scenario = if scenario.ends_with(".toml") {
                attack::load_scenario_file(&scenario)?
            } else {
                attack::builtin_scenario(&scenario)?
            };
            let mut sim =
                new_sim(topology, seed).map_err(|e| CliError::new(EXIT_SCENARIO, e.to_string()))?;
            let outcome = attack::run_scenario(&mut sim, &scenario)?;
            if let Some(path) = &trace_out {
                let text: String = outcome.trace.iter().map(|e| e.to_line() + "\n").collect();
                emit(&text, Some(path))?;
            }
            let verdict = attack::verdict(&outcome, &catalog)?;
            let entry = Stage3Entry {
                scenario: ScenarioSummary {
                    id: scenario.id.clone(),
                    kind: scenario.kind,
                    target_tc: scenario.target_tc.clone(),
                },
                outcome,
                verdict,
            };
            let rendered = match ReportFormat::from(format) {
                ReportFormat::Structured => {
                    let mut json =
                        serde_json::to_string_pretty(&entry).expect("outcome serializes");
                    json.push('\n');
                    json
                }
                _ => {
                    let mut text = format!(
                        "scenario {} (kind {}, target {}): {}\n",
                        entry.scenario.id,
                        entry.scenario.kind.as_str(),
                        entry.scenario.target_tc,
                        if entry.outcome.succeeded {
                            "succeeded"
                        } else {
                            "did not succeed"
                        }
                    );
                    for (key, value) in &entry.outcome.metrics {
                        let rendered = match value {
                            attack::MetricValue::Bool(b) => b.to_string(),
                            attack::MetricValue::Count(n) => n.to_string(),
                            attack::MetricValue::Seconds(s) => format!("{s:?}s"),
                            attack::MetricValue::Text(t) => t.clone(),
                        };
                        text.push_str(&format!("  {key} = {rendered}\n"));
                    }
                    text.push_str(&format!(
                        "  verdict: observed impact {}, {} with {} expectation\n",
                        entry.verdict.observed_impact.as_str(),
                        if entry.verdict.consistent {
                            "consistent"
                        } else {
                            "INCONSISTENT"
                        },
                        entry.verdict.expectation.as_str(),
                    ));
                    text
                }
            };
            emit(&rendered, out.as_ref())
        }
        Command::Report {
            input,
            format,
            out,
            decimal_comma,
        } => {
            let source = std::fs::read_to_string(&input).map_err(|e| {
                CliError::new(
                    EXIT_IO_SCHEMA,
                    format!("cannot read {}: {e}", input.display()),
                )
            })?;
            let report = pipeline::parse_report(&source)?;
            let rendered = pipeline::render_report(
                &report,
                format.into(),
                &RenderOptions { decimal_comma },
            );
            emit(&rendered, out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
