use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kgtwin_cli::config::PipelineConfig;
use kgtwin_cli::error::{CliError, CliResult};
use kgtwin_cli::stages::{self, AgentKind};
use kgtwin_core::corpus::Variant;
use kgtwin_core::env::Mode;

/// Build parallel real-mapped / synth-mapped corpora from a knowledge graph,
/// derive paired QA and navigation tasks, and score the knowledge-advantage
/// gap between the variants.
#[derive(Parser)]
#[command(name = "kgtwin", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline configuration file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output root; each stage writes its own subdirectory.
    #[arg(long)]
    out: PathBuf,
    /// Override every stage RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Answer all external calls with the deterministic mock backend.
    #[arg(long)]
    mock: bool,
    /// Maximum concurrent in-flight external calls.
    #[arg(long)]
    in_flight: Option<usize>,
    /// Replay external calls from a recorded call log.
    #[arg(long)]
    replay: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> CliResult<PipelineConfig> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        config.apply_overrides(self.seed, self.mock, self.in_flight, self.replay.clone());
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the bundled synthetic fixture knowledge graph.
    GenFixture {
        #[command(flatten)]
        common: Common,
    },
    /// Ingest and filter the source graph, then sample the universe.
    SampleUniverse {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        entities: Option<PathBuf>,
        #[arg(long)]
        facts: Option<PathBuf>,
        #[arg(long)]
        relations: Option<PathBuf>,
    },
    /// Rename named entities and shift timestamps into the synth universe.
    Perturb {
        #[command(flatten)]
        common: Common,
    },
    /// Generate the parallel page corpus with validation gates.
    BuildCorpus {
        #[command(flatten)]
        common: Common,
    },
    /// Validate expressed facts and compose paired multi-hop questions.
    BuildQa {
        #[command(flatten)]
        common: Common,
    },
    /// Sample navigation pairs bucketed by expected random-walk distance.
    BuildNav {
        #[command(flatten)]
        common: Common,
    },
    /// Drive an agent over the navigation tasks and record transcripts.
    RunNav {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = clap::value_parser!(Variant))]
        variant: Variant,
        #[arg(long, value_parser = clap::value_parser!(Mode))]
        mode: Mode,
        /// bfs (shortest-path oracle) or random.
        #[arg(long, default_value = "bfs", value_parser = clap::value_parser!(AgentKind))]
        agent: AgentKind,
    },
    /// Score predictions or transcripts and compute knowledge advantage.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(subcommand)]
        what: EvaluateCommand,
    },
}

#[derive(Subcommand)]
enum EvaluateCommand {
    /// Token-F1 scoring of a QA prediction file against a gold file.
    Qa {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        condition: String,
        #[arg(long, value_parser = clap::value_parser!(Variant))]
        variant: Variant,
        /// Also score retrieval recall@k from the predictions' retrieved ids.
        #[arg(long)]
        recall_k: Option<usize>,
    },
    /// Success rate and external-mention rate over navigation transcripts.
    Nav {
        #[arg(long)]
        transcripts: PathBuf,
        #[arg(long)]
        condition: String,
    },
    /// Pair RM/SM reports per condition and summarize the KA gaps.
    Ka {
        #[arg(long, num_args = 1..)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        base: String,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::GenFixture { common } => {
            stages::stage_gen_fixture(&common.out, common.seed.unwrap_or(2024))
        }
        Command::SampleUniverse { common, entities, facts, relations } => {
            let config = common.load()?;
            stages::stage_sample_universe(
                &config,
                entities.as_deref(),
                facts.as_deref(),
                relations.as_deref(),
                &common.out,
            )
        }
        Command::Perturb { common } => {
            let config = common.load()?;
            stages::stage_perturb(&config, &common.out)
        }
        Command::BuildCorpus { common } => {
            let config = common.load()?;
            stages::stage_build_corpus(&config, &common.out)
        }
        Command::BuildQa { common } => {
            let config = common.load()?;
            stages::stage_build_qa(&config, &common.out)
        }
        Command::BuildNav { common } => {
            let config = common.load()?;
            stages::stage_build_nav(&config, &common.out)
        }
        Command::RunNav { common, variant, mode, agent } => {
            let config = common.load()?;
            stages::stage_run_nav(
                &config,
                &common.out,
                variant,
                mode,
                agent,
                common.seed.unwrap_or(0),
            )
        }
        Command::Evaluate { common, what } => match what {
            EvaluateCommand::Qa { gold, predictions, condition, variant, recall_k } => {
                stages::stage_evaluate_qa(
                    &common.out,
                    &gold,
                    &predictions,
                    &condition,
                    variant,
                    recall_k,
                )
            }
            EvaluateCommand::Nav { transcripts, condition } => {
                stages::stage_evaluate_nav(&common.out, &transcripts, &condition)
            }
            EvaluateCommand::Ka { reports, base } => {
                stages::stage_evaluate_ka(&common.out, &reports, &base)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError { kind, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(kind.exit_code() as u8)
        }
    }
}
