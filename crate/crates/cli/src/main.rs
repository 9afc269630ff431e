use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use iotsec_core::assessor::{assess, load_model, outcomes_to_ledger, Verdict};
use iotsec_core::catalog::{load_catalog, AttackerType};
use iotsec_core::cvss::{base_score, parse_vector};
use iotsec_core::decision::{build_decision_graph, load_profile};
use iotsec_core::findings::{load_ledger, Ledger};
use iotsec_core::ranking::{bps_for_scenario, rank_bps};
use iotsec_core::report;
use iotsec_core::workspace::Workspace;

#[derive(Parser)]
#[command(
    name = "iotsec",
    version,
    about = "IoT security best-practice assessment"
)]
struct Cli {
    /// Workspace directory (contains workspace.toml). Defaults to the bundled data.
    #[arg(long, global = true)]
    workspace: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a CVSS v3.1 base vector.
    Score { vector: String },
    /// Check the workspace, or individual documents, for schema and integrity errors.
    Validate {
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        ledger: Vec<PathBuf>,
        #[arg(long)]
        model: Vec<PathBuf>,
        #[arg(long)]
        profile: Vec<PathBuf>,
    },
    /// Validate a findings file and store it in the workspace.
    Ingest { file: PathBuf },
    /// Rank best practices by occurrence and average score.
    Rank {
        #[arg(long)]
        scenario: Option<u8>,
        #[arg(long, value_enum, default_value_t = RankFormat::Table)]
        format: RankFormat,
    },
    /// Relevant scenarios and ranked best practices for a capability profile.
    Graph {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Tree)]
        format: GraphFormat,
    },
    /// Evaluate a device model and write the resulting findings.
    Assess {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated attacker types: na, sna, pa, sa.
        #[arg(long, value_delimiter = ',', default_value = "na,sna,pa,sa")]
        attackers: Vec<AttackerType>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = RankFormat::Table)]
        format: RankFormat,
    },
    /// Findings, ranking and observations of the workspace.
    Report {
        #[arg(long)]
        device: Option<String>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Markdown)]
        format: ReportFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RankFormat {
    Table,
    Machine,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Tree,
    Machine,
    DotLikeText,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Markdown,
    Machine,
}

/// Exit status plus message for stderr.
enum Failure {
    Validation(String),
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn open_workspace(root: Option<&Path>) -> Result<Workspace, Failure> {
    match root {
        Some(r) => Ok(Workspace::open(r)?),
        None => Ok(Workspace::bundled()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    let root = cli.workspace.as_deref();
    match cli.command {
        Command::Score { vector } => {
            let parsed = parse_vector(&vector).map_err(|e| Failure::Usage(e.to_string()))?;
            if parsed.out_of_order {
                eprintln!(
                    "warning: metrics not in canonical order; canonical form is {}",
                    parsed.vector
                );
            }
            let s = base_score(&parsed.vector);
            Ok(format!("{} {}\n", s.value, s.severity.as_str()))
        }
        Command::Validate {
            catalog,
            ledger,
            model,
            profile,
        } => validate(root, catalog, ledger, model, profile),
        Command::Ingest { file } => {
            let Some(root) = root else {
                return Err(Failure::Usage("ingest needs --workspace".into()));
            };
            fs::create_dir_all(root)
                .map_err(|e| Failure::Validation(format!("{}: {e}", root.display())))?;
            let name = file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "findings".into());
            let stored = Workspace::ingest(root, &name, &read(&file)?)?;
            Ok(format!("stored {stored}\n"))
        }
        Command::Rank { scenario, format } => {
            let ws = open_workspace(root)?;
            let opts = ws.config().rank_options();
            let rows = match scenario {
                Some(n) => bps_for_scenario(&ws.ledger, &ws.catalog, n, opts)?,
                None => rank_bps(&ws.ledger, opts),
            };
            Ok(match format {
                RankFormat::Table => report::rank_table(&rows, &ws.catalog),
                RankFormat::Machine => report::rank_machine(&rows),
            })
        }
        Command::Graph { profile, format } => {
            let ws = open_workspace(root)?;
            let (name, caps) = load_profile(&read(&profile)?)?;
            let graph =
                build_decision_graph(&caps, &ws.ledger, &ws.catalog, &ws.config().graph_options())?;
            Ok(match format {
                GraphFormat::Tree => report::graph_tree(&graph, &ws.catalog, name.as_deref()),
                GraphFormat::Machine => report::graph_machine(&graph),
                GraphFormat::DotLikeText => report::graph_dot_like(&graph, &ws.catalog),
            })
        }
        Command::Assess {
            model,
            attackers,
            out,
            format,
        } => {
            let ws = open_workspace(root)?;
            let model = load_model(&read(&model)?)?;
            let attackers: BTreeSet<AttackerType> = attackers.into_iter().collect();
            let opts = ws.config().assess_options();
            let outcomes = assess(&model, &ws.catalog, &attackers, &opts)?;
            let doc = outcomes_to_ledger(&outcomes, &model, &opts);
            let ledger = Ledger::from_document(doc, &ws.catalog)?;
            fs::write(&out, ledger.document().to_toml())
                .map_err(|e| Failure::Validation(format!("{}: {e}", out.display())))?;
            Ok(match format {
                RankFormat::Machine => report::outcomes_machine(&outcomes),
                RankFormat::Table => {
                    let mut text = String::new();
                    for o in outcomes.iter().filter(|o| o.verdict == Verdict::Fail) {
                        text.push_str(&format!(
                            "FAIL {:<22} {:<11} {:<16} {}\n",
                            o.check_key,
                            o.test_case.as_deref().unwrap_or("-"),
                            o.surface,
                            o.rationale
                        ));
                    }
                    let fails = outcomes
                        .iter()
                        .filter(|o| o.verdict == Verdict::Fail)
                        .count();
                    let na = outcomes
                        .iter()
                        .filter(|o| o.verdict == Verdict::NotApplicable)
                        .count();
                    text.push_str(&format!(
                        "{} checks: {} failed, {} not applicable; {} findings written to {}\n",
                        outcomes.len(),
                        fails,
                        na,
                        ledger.findings().len(),
                        out.display()
                    ));
                    text
                }
            })
        }
        Command::Report { device, format } => {
            let ws = open_workspace(root)?;
            Ok(match format {
                ReportFormat::Markdown => report::workspace_markdown(
                    &ws.ledger,
                    &ws.catalog,
                    ws.config().rank_options(),
                    device.as_deref(),
                )?,
                ReportFormat::Machine => report::workspace_machine(&ws.ledger, device.as_deref())?,
            })
        }
    }
}

fn validate(
    root: Option<&Path>,
    catalog: Option<PathBuf>,
    ledgers: Vec<PathBuf>,
    models: Vec<PathBuf>,
    profiles: Vec<PathBuf>,
) -> Result<String, Failure> {
    let mut out = String::new();
    let ws = open_workspace(root)?;
    let catalog = match catalog {
        Some(path) => {
            let c = load_catalog(&read(&path)?)
                .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
            out.push_str(&format!("ok catalog {}\n", path.display()));
            c
        }
        None => {
            out.push_str(&format!(
                "ok workspace: {} best practices, {} test cases, {} scenarios, {} findings\n",
                ws.catalog.best_practices().len(),
                ws.catalog.test_cases().len(),
                ws.catalog.scenarios().len(),
                ws.ledger.findings().len()
            ));
            ws.catalog
        }
    };
    for w in catalog.warnings() {
        eprintln!("warning: {w}");
    }
    for path in ledgers {
        let l = load_ledger(&read(&path)?, &catalog)
            .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
        out.push_str(&format!(
            "ok ledger {} ({} findings)\n",
            path.display(),
            l.findings().len()
        ));
    }
    for path in models {
        load_model(&read(&path)?)
            .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
        out.push_str(&format!("ok model {}\n", path.display()));
    }
    for path in profiles {
        load_profile(&read(&path)?)
            .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
        out.push_str(&format!("ok profile {}\n", path.display()));
    }
    Ok(out)
}
