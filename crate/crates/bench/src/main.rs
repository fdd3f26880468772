use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use splitkit::RuntimeConfig;
use splitkit_bench::descriptor::Bench;
use splitkit_bench::runner::{self, RunSpec};
use splitkit_bench::{report, svg, BenchError};

/// Runs the benchmark corpus under a policy descriptor and renders span
/// charts.
#[derive(Parser)]
#[command(name = "splitkit-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark, check every run, and report timings.
    Run(RunArgs),
    /// Render a span log as SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    bench: Bench,
    /// `+`-separated tokens, e.g. `thief_splitting+by_blocks=4:2`.
    #[arg(long, default_value = "default")]
    policy: String,
    /// Defaults to SPLITKIT_THREADS, then to the number of cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Input length (sequence length N for fannkuch).
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write recorded spans as JSON lines.
    #[arg(long)]
    spans: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    spans: PathBuf,
    #[arg(long)]
    svg: PathBuf,
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), BenchError> {
    std::fs::write(path, contents).map_err(|source| BenchError::Io {
        path: path.clone(),
        source,
    })
}

fn run(args: RunArgs) -> Result<(), BenchError> {
    let workers = match args.workers {
        Some(w) => w,
        None => {
            RuntimeConfig::from_env()
                .map_err(|e| BenchError::Usage(e.to_string()))?
                .worker_count
        }
    };
    if workers == 0 {
        return Err(BenchError::Usage("worker count must be at least 1".into()));
    }
    let spec = RunSpec {
        bench: args.bench,
        policy: args.policy,
        workers,
        size: args.size.unwrap_or(args.bench.default_size()),
        runs: args.runs,
        seed: args.seed,
        record_spans: args.spans.is_some() || args.svg.is_some(),
    };
    let output = runner::run(&spec)?;
    if let Some(path) = &args.csv {
        report::write_csv(path, &output.records)?;
    }
    if let Some(path) = &args.spans {
        report::write_spans(path, &output.spans)?;
    }
    if let Some(path) = &args.svg {
        write_file(path, &svg::render(&output.spans))?;
    }
    println!("{}", report::summary(&output.records));
    Ok(())
}

fn render(args: RenderArgs) -> Result<(), BenchError> {
    let spans = report::read_spans(&args.spans)?;
    write_file(&args.svg, &svg::render(&spans))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Render(args) => render(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("splitkit-bench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
