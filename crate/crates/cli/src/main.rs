use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use intent_lattice::bestpath::{DEFAULT_MIN_SPAN, DEFAULT_SEGMENT_LIMIT};
use intent_lattice_cli::{build_index_cmd, rescore_cmd, stats_cmd, IndexConfig, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "intent-lattice", version, about = "Fuzzy intent spotting and intent-guided rescoring of ASR lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile an intent library into an index artifact.
    BuildIndex {
        #[arg(long)]
        library: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// JSON object mapping entity names to phrase lists.
        #[arg(long)]
        entities: Option<PathBuf>,
        /// Blank quota for examples that do not set one.
        #[arg(long)]
        default_quota: Option<usize>,
    },
    /// Annotate and rescore every conversation in a directory.
    Rescore {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        inputs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MIN_SPAN, value_parser = positive)]
        min_span: usize,
        #[arg(long)]
        baseline_only: bool,
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        renormalize: bool,
        #[arg(long, default_value_t = DEFAULT_SEGMENT_LIMIT, value_parser = positive)]
        limit: usize,
        #[arg(long, default_value_t = 1, value_parser = positive)]
        jobs: usize,
    },
    /// Compare rescored and baseline annotation files.
    Stats {
        #[arg(long)]
        rescored: PathBuf,
        #[arg(long)]
        baseline: PathBuf,
        /// Rescoring summary supplying the total word count.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::BuildIndex {
            library,
            out,
            entities,
            default_quota,
        } => {
            let stats = build_index_cmd(&IndexConfig {
                library,
                entities,
                default_quota,
                out,
            })?;
            println!(
                "index: {} states, {} arcs, {} examples, {} intents",
                stats.states, stats.arcs, stats.examples, stats.branch_families
            );
        }
        Command::Rescore {
            index,
            inputs,
            out,
            min_span,
            baseline_only,
            strict,
            renormalize,
            limit,
            jobs,
        } => {
            let config = RunConfig {
                min_span,
                baseline_only,
                strict,
                renormalize,
                limit,
                jobs,
                ..RunConfig::new(index, inputs, out)
            };
            let s = rescore_cmd(&config)?;
            println!(
                "{} conversations, {} failed, {} words, {} annotations ({} baseline), {} words rescored",
                s.conversations,
                s.failed.len(),
                s.words,
                s.annotations,
                s.baseline_annotations,
                s.rescored_words
            );
        }
        Command::Stats {
            rescored,
            baseline,
            summary,
            json,
        } => {
            let report = stats_cmd(&rescored, &baseline, summary.as_deref())?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.render());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
