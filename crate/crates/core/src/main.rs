use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use brain_core::bpel::{parse_bpel, serialize_bpel};
use brain_core::goals::load_goal_model;
use brain_core::pipeline::{self, Fixtures};
use brain_core::registry::Registry;
use brain_core::rules::RuleRepository;
use brain_core::runtime::{check_conformance, execute, parse_env, ExecutionTrace, Mocks};
use brain_core::server::{self, AppState};
use brain_core::{Error, Result};

/// Rule-driven business process composition.
#[derive(Parser)]
#[command(name = "brain", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compose an abstract process from selected goals.
    Compose {
        #[arg(long)]
        goals: PathBuf,
        /// Directory of rule files.
        #[arg(long)]
        rules: PathBuf,
        /// Goal ids, comma separated or repeated.
        #[arg(long, required = true, value_delimiter = ',')]
        select: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bind every partner link of an abstract process to a provider.
    Bind {
        #[arg(long)]
        process: PathBuf,
        #[arg(long)]
        providers: PathBuf,
        /// Rule directory whose discovery rules filter the proposals.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Explicit choice, as LINK=PROVIDER; other links take their first proposal.
        #[arg(long = "bind", value_parser = parse_binding)]
        bindings: Vec<(String, String)>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an executable process against mock endpoints.
    Simulate {
        #[arg(long)]
        process: PathBuf,
        #[arg(long)]
        mocks: PathBuf,
        #[arg(long)]
        env: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Check a trace against the behavior rules in a directory.
    Check {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        rules: PathBuf,
    },
    /// Serve the HTTP API (port from BRAIN_PORT, default 8080).
    Serve {
        #[arg(long, default_value = "fixtures")]
        fixtures: PathBuf,
        #[arg(long)]
        port: Option<u16>,
        /// Write a JSON snapshot of every session to this directory.
        #[arg(long)]
        snapshots: Option<PathBuf>,
    },
}

fn parse_binding(text: &str) -> std::result::Result<(String, String), String> {
    match text.split_once('=') {
        Some((link, provider)) if !link.is_empty() && !provider.is_empty() => {
            Ok((link.to_string(), provider.to_string()))
        }
        _ => Err(format!("expected LINK=PROVIDER, got `{text}`")),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Ok(false) means the command ran but found a domain-level failure it
/// already reported.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Compose { goals, rules, select, out } => {
            let model = load_goal_model(&read(&goals)?)?;
            let repo = RuleRepository::load_dir(&rules)?;
            let ids: Vec<&str> = select.iter().map(String::as_str).collect();
            let composition = pipeline::compose(&model, &repo, &ids)?;
            write(&out, &serialize_bpel(&composition.process))?;
            Ok(true)
        }
        Command::Bind { process, providers, rules, bindings, out } => {
            let process = parse_bpel(&read(&process)?)?;
            let registry = Registry::from_xml(&read(&providers)?)?;
            let repo = match rules {
                Some(dir) => RuleRepository::load_dir(&dir)?,
                None => RuleRepository::new(),
            };
            let explicit: BTreeMap<String, String> = bindings.into_iter().collect();
            let bound = pipeline::bind(&process, &explicit, &repo, &registry)?;
            for link in &bound.partner_links {
                println!("{} -> {}", link.name, link.provider.as_deref().unwrap_or("-"));
            }
            write(&out, &serialize_bpel(&bound))?;
            Ok(true)
        }
        Command::Simulate { process, mocks, env, seed, trace } => {
            let process = parse_bpel(&read(&process)?)?;
            let mocks = Mocks::from_xml(&read(&mocks)?)?;
            let env = parse_env(&read(&env)?)?;
            let result = execute(&process, &mocks, &env, seed)?;
            write(&trace, &result.to_text())?;
            println!("{}", serde_json::to_string(&result.status).expect("status serializes").trim_matches('"'));
            Ok(true)
        }
        Command::Check { trace, rules } => {
            let trace = ExecutionTrace::parse(&read(&trace)?)?;
            let repo = RuleRepository::load_dir(&rules)?;
            let violations = check_conformance(&trace, &pipeline::behavior_rules(&repo));
            if violations.is_empty() {
                println!("conformant");
                return Ok(true);
            }
            for v in &violations {
                let evidence: Vec<String> = v.evidence.iter().map(ToString::to_string).collect();
                println!("violation {}: {}", v.rule, evidence.join("; "));
            }
            Ok(false)
        }
        Command::Serve { fixtures, port, snapshots } => {
            let mut state = AppState::new(Fixtures::load(&fixtures)?);
            if let Some(dir) = snapshots {
                state = state.with_snapshots(dir);
            }
            let port = port.unwrap_or_else(server::port_from_env);
            let runtime = tokio::runtime::Runtime::new()?;
            eprintln!("listening on port {port}");
            runtime.block_on(server::serve(state, port))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error [{}]: {e}", e.name());
            ExitCode::from(1)
        }
    }
}
