//! The `interact` command.
//!
//! stdout carries only payloads (diagnostics for `validate`, canonical text,
//! DOT, report JSON, replay verdicts). Logs go to stderr. Exit status is 0
//! on success, 1 for error diagnostics or divergence, 2 for usage and I/O
//! errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use interact_core::diag::has_errors;
use interact_core::lang::{export_graph_dot, format_canonical, lint_source};
use interact_core::physics::WorldConfig;
use interact_core::replay::{hex16, read_trace, record, replay, ReplayError, ReplayLog, RunLength, Verdict};
use interact_core::Scenario;
use interact_gateway::{Config, DEFAULT_PORT, DEFAULT_STREAM_DIVISOR};

#[derive(Parser, Debug)]
#[command(name = "interact", version, about = "Author, run and replay assembly training scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print diagnostics, one per line.
    Validate { file: PathBuf },
    /// Print the canonical form, or rewrite the file with --write.
    Fmt {
        file: PathBuf,
        #[arg(long)]
        write: bool,
    },
    /// Print the step graph.
    Graph {
        file: PathBuf,
        /// Graphviz DOT, the only format.
        #[arg(long)]
        dot: bool,
    },
    /// Run a trace and print the score report as one JSON line.
    Run {
        file: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        /// Defaults to the log header's difficulty, else `default`.
        #[arg(long)]
        difficulty: Option<String>,
        /// Write the replay log here.
        #[arg(long)]
        record: Option<PathBuf>,
        /// Also print `{"tick":…,"hash":…}` for the final state.
        #[arg(long)]
        hash: bool,
        /// Cap for traces that never finish the scenario.
        #[arg(long, default_value_t = 600.0)]
        max_seconds: f64,
    },
    /// Re-execute a replay log and compare every hash.
    Replay {
        log: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Start the HTTP/WebSocket gateway.
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, env = "INTERACT_SCENARIO_DIR", default_value = "scenarios")]
        scenario_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STREAM_DIVISOR)]
        stream_divisor: u64,
        /// Engine speed relative to wall time.
        #[arg(long, default_value_t = 1.0)]
        time_scale: f64,
    },
}

/// Failure with its exit code; the message goes to stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Parses and lints `path`; diagnostics go to stderr, errors fail with 1.
fn load(path: &Path) -> Result<Scenario, Failure> {
    let text = read(path)?;
    let (scenario, diags) = lint_source(&text);
    let file = path.display().to_string();
    for d in &diags {
        eprintln!("{}", d.render(&file));
    }
    match scenario {
        Some(s) if !has_errors(&diags) => Ok(s),
        _ => Err(Failure {
            code: 1,
            message: format!("{file}: scenario has errors"),
        }),
    }
}

fn print(out: &mut impl Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| usage(format!("stdout: {e}")))
}

pub fn execute(cmd: Command, out: &mut impl Write) -> Result<(), Failure> {
    match cmd {
        Command::Validate { file } => {
            let text = read(&file)?;
            let (_, diags) = lint_source(&text);
            let name = file.display().to_string();
            for d in &diags {
                print(out, &format!("{}\n", d.render(&name)))?;
            }
            if has_errors(&diags) {
                return Err(Failure {
                    code: 1,
                    message: format!("{name}: {} diagnostic(s)", diags.len()),
                });
            }
            Ok(())
        }
        Command::Fmt { file, write } => {
            let canonical = format_canonical(&load(&file)?);
            if write {
                fs::write(&file, canonical).map_err(|e| usage(format!("{}: {e}", file.display())))
            } else {
                print(out, &canonical)
            }
        }
        Command::Graph { file, dot: _ } => print(out, &export_graph_dot(&load(&file)?)),
        Command::Run {
            file,
            trace,
            difficulty,
            record: record_to,
            hash,
            max_seconds,
        } => {
            let scenario = Arc::new(load(&file)?);
            let text = read(&trace)?;
            let bad_trace = |e: ReplayError| usage(format!("{}: {e}", trace.display()));
            // a full replay log fixes the run length and difficulty
            let (records, length, logged) = match ReplayLog::from_jsonl(&text) {
                Ok(log) => (log.records, RunLength::Ticks(log.end_tick), Some(log.header.difficulty)),
                Err(_) => {
                    let records = read_trace(&text).map_err(bad_trace)?;
                    let last = records.last().map_or(0, |r| r.tick);
                    let cap = (max_seconds / WorldConfig::default().dt).ceil() as u64;
                    (records, RunLength::UntilFinished { max_ticks: last + cap }, None)
                }
            };
            let difficulty = difficulty.or(logged).unwrap_or_else(|| "default".into());
            let log = record(scenario, &difficulty, &records, length).map_err(|e| usage(e.to_string()))?;
            if let Some(path) = record_to {
                fs::write(&path, log.to_jsonl()).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            }
            let report = serde_json::to_string(&log.report).expect("report serializes");
            print(out, &format!("{report}\n"))?;
            if hash {
                let line = serde_json::json!({ "tick": log.end_tick, "hash": hex16(log.end_hash) });
                print(out, &format!("{line}\n"))?;
            }
            Ok(())
        }
        Command::Replay { log, scenario } => {
            let s = Arc::new(load(&scenario)?);
            let text = read(&log)?;
            let parsed = ReplayLog::from_jsonl(&text).map_err(|e| usage(format!("{}: {e}", log.display())))?;
            match replay(&parsed, s) {
                Ok(Verdict::Ok) => print(out, &format!("{}\n", serde_json::json!({ "verdict": "ok", "tick": parsed.end_tick }))),
                Ok(Verdict::Diverged { tick, expected, actual }) => {
                    let line = serde_json::json!({
                        "verdict": "diverged", "tick": tick, "expected": expected, "actual": actual,
                    });
                    print(out, &format!("{line}\n"))?;
                    Err(Failure {
                        code: 1,
                        message: format!("diverged at tick {tick}"),
                    })
                }
                Err(e @ ReplayError::ScenarioMismatch { .. }) | Err(e @ ReplayError::DtMismatch { .. }) => {
                    Err(Failure {
                        code: 1,
                        message: e.to_string(),
                    })
                }
                Err(e) => Err(usage(e.to_string())),
            }
        }
        Command::Serve {
            port,
            scenario_dir,
            stream_divisor,
            time_scale,
        } => {
            let config = Config {
                port,
                scenario_dir,
                stream_divisor,
                time_scale,
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| usage(e.to_string()))?;
            rt.block_on(interact_gateway::serve(config)).map_err(|e| usage(e.to_string()))
        }
    }
}

pub fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    // clap prints usage to stderr and exits 2 on bad arguments
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match execute(cli.command, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("interact: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
