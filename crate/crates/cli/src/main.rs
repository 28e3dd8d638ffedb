use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use twopath_core::campaign::{run_campaign, CampaignConfig};
use twopath_core::commands::{exit_code_for, run, run_mason_check, run_stats, Command, Fault, RunOptions};
use twopath_core::format::{parse_graph_file, write_graph};
use twopath_core::mason::DEFAULT_LOOP_CAP;
use twopath_core::oracles::DEFAULT_BUDGET;
use twopath_core::Error;

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

const DEFAULT_ARTIFACT_DIR: &str = "twopath-artifacts";

/// Classify two-input/two-output digraphs as general 0-, 1- or 2-path cases.
#[derive(Parser, Debug)]
#[command(name = "twopath", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug)]
struct Output {
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Engine {
    /// Evaluate every structured point instead of stopping at the first rank-2 point.
    #[arg(long)]
    full_sweep: bool,
    /// Evaluate the points of one graph on the thread pool.
    #[arg(long)]
    parallel: bool,
    /// Node-expansion cap of the brute-force search.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Deliberately corrupt one decider (testing only).
    #[arg(long, hide = true, value_parser = parse_fault)]
    inject_fault: Option<Fault>,
}

impl Engine {
    fn options(&self) -> RunOptions {
        RunOptions {
            full_sweep: self.full_sweep,
            parallel: self.parallel,
            budget: self.budget,
            fault: self.inject_fault,
        }
    }
}

fn parse_fault(s: &str) -> Result<Fault, String> {
    Fault::parse(s).ok_or_else(|| format!("unknown fault `{s}`"))
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Decide the class from the rank of the transfer matrix.
    Decide {
        file: PathBuf,
        #[command(flatten)]
        engine: Engine,
        #[command(flatten)]
        out: Output,
    },
    /// Classify with the brute-force and max-flow oracles.
    Oracle {
        file: PathBuf,
        #[command(flatten)]
        engine: Engine,
        #[command(flatten)]
        out: Output,
    },
    /// Run every decider and flag any disagreement.
    Compare {
        file: PathBuf,
        #[command(flatten)]
        engine: Engine,
        #[command(flatten)]
        out: Output,
        /// Where a disagreeing graph and its report are written.
        #[arg(long, default_value = DEFAULT_ARTIFACT_DIR)]
        artifact_dir: PathBuf,
    },
    /// Compare the deciders over a seeded stream of graphs.
    Fuzz {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: u64,
        #[arg(long, default_value_t = 8)]
        max_nodes: usize,
        #[arg(long, default_value_t = 10)]
        max_edges: usize,
        /// Also run every graph of the exhaustive stream up to this many nodes.
        #[arg(long, value_name = "NODES")]
        exhaustive: Option<usize>,
        /// Allow self-loops and repeated edges in random graphs.
        #[arg(long)]
        multigraph: bool,
        #[command(flatten)]
        engine: Engine,
        #[command(flatten)]
        out: Output,
        #[arg(long, default_value = DEFAULT_ARTIFACT_DIR)]
        artifact_dir: PathBuf,
    },
    /// Series coefficients and shortest-path identities of one transfer entry.
    Stats {
        file: PathBuf,
        /// Input index, 1 or 2.
        #[arg(long, default_value_t = 1)]
        input: usize,
        /// Output index, 1 or 2.
        #[arg(long, default_value_t = 1)]
        output: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Check the loop-based gain formula against the resolvent.
    MasonCheck {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LOOP_CAP)]
        loop_cap: usize,
        #[command(flatten)]
        out: Output,
    },
}

fn emit(out: &Output, json: &str) -> Result<(), Error> {
    match &out.json {
        Some(path) => std::fs::write(path, json).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn persist_disagreement(dir: &Path, file: &Path, graph: &str, report: &str) -> Result<(), Error> {
    let io = |e: std::io::Error| Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let stem = file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".into());
    std::fs::write(dir.join(format!("{stem}.disagreement.graph")), graph).map_err(io)?;
    std::fs::write(dir.join(format!("{stem}.disagreement.json")), report).map_err(io)?;
    eprintln!("disagreement persisted under {}", dir.display());
    Ok(())
}

fn execute(cmd: Cmd) -> Result<i32, Error> {
    match cmd {
        Cmd::Decide { file, engine, out } => single(Command::Decide, &file, &engine, &out, None),
        Cmd::Oracle { file, engine, out } => single(Command::Oracle, &file, &engine, &out, None),
        Cmd::Compare {
            file,
            engine,
            out,
            artifact_dir,
        } => single(Command::Compare, &file, &engine, &out, Some(&artifact_dir)),
        Cmd::Fuzz {
            seed,
            count,
            max_nodes,
            max_edges,
            exhaustive,
            multigraph,
            engine,
            out,
            artifact_dir,
        } => {
            if max_nodes < 4 {
                return Err(Error::InvalidTerminals(
                    "--max-nodes must leave room for the four terminals".into(),
                ));
            }
            let config = CampaignConfig {
                seed,
                count,
                max_nodes,
                max_edges,
                simple: !multigraph,
                exhaustive_up_to: exhaustive,
                run: engine.options(),
                artifact_dir: Some(artifact_dir),
            };
            let report = run_campaign(&config)?;
            emit(&out, &report.to_json())?;
            Ok(report.exit_code())
        }
        Cmd::Stats {
            file,
            input,
            output,
            out,
        } => {
            let g = parse_graph_file(&file)?;
            let report = run_stats(&g, input, output)?;
            emit(&out, &twopath_core::report::to_canonical_json(&report))?;
            Ok(report.exit_code())
        }
        Cmd::MasonCheck { file, loop_cap, out } => {
            let g = parse_graph_file(&file)?;
            let report = run_mason_check(&g, loop_cap)?;
            emit(&out, &twopath_core::report::to_canonical_json(&report))?;
            Ok(report.exit_code())
        }
    }
}

fn single(command: Command, file: &Path, engine: &Engine, out: &Output, artifacts: Option<&Path>) -> Result<i32, Error> {
    let g = parse_graph_file(file)?;
    let report = run(command, &g, &engine.options())?;
    let json = report.to_json();
    if report.disagreement {
        if let Some(dir) = artifacts {
            persist_disagreement(dir, file, &write_graph(&g), &json)?;
        }
    }
    emit(out, &json)?;
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let code = match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    };
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    ExitCode::from(code as u8)
}
