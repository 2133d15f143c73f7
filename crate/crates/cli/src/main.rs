use clap::{Parser, Subcommand};
use dynsld::UpdateMode;
use dynsld_cli::{bench, cmd_cartesian, cmd_query, cmd_run, with_threads, CliError, CliResult, RunConfig};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dynsld", version, about = "Dynamic single-linkage dendrograms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a forest and apply an update stream.
    Run {
        forest: PathBuf,
        updates: PathBuf,
        #[arg(long, default_value = "seq-h")]
        mode: UpdateMode,
        /// Compare against the Kruskal reference after every update.
        #[arg(long)]
        verify: bool,
        /// Write one JSON stats record per update.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Print the final dendrogram.
        #[arg(long)]
        dump: bool,
        #[arg(long)]
        no_timing: bool,
        #[arg(long, hide = true)]
        inject_fault: Option<usize>,
    },
    /// Answer threshold queries on a forest.
    Query {
        forest: PathBuf,
        queries: PathBuf,
        /// Merge only edges strictly below the threshold.
        #[arg(long)]
        strict: bool,
    },
    /// Run a generated workload and print aggregate JSON.
    Bench {
        spec: String,
        #[arg(long, default_value = "seq-os")]
        mode: UpdateMode,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        no_timing: bool,
    },
    /// Build a Cartesian tree and apply an op stream.
    Cartesian {
        ops: PathBuf,
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Emit fixtures in the CLI file formats.
    Gen {
        #[command(subcommand)]
        what: Gen,
    },
}

#[derive(Subcommand)]
enum Gen {
    /// A random forest file.
    Forest {
        n: usize,
        m: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// A lower-bound instance; the forest goes to stdout, the insert/delete
    /// pair to `--updates`.
    Theorem {
        h: usize,
        #[arg(long, default_value_t = 2)]
        stars: usize,
        #[arg(long)]
        updates: Option<PathBuf>,
    },
    /// An update stream for a forest file.
    Updates {
        forest: PathBuf,
        ops: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "mixed")]
        profile: String,
    },
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Run { forest, updates, mode, verify, stats, threads, dump, no_timing, inject_fault } => {
            let cfg = RunConfig { forest, updates, mode, verify, stats, threads, dump, no_timing, inject_fault };
            cmd_run(&cfg, &mut out)
        }
        Command::Query { forest, queries, strict } => cmd_query(&forest, &queries, strict, &mut out),
        Command::Bench { spec, mode, repetitions, threads, no_timing } => {
            let run = with_threads(threads, || bench::run_bench(&spec, mode, repetitions, !no_timing))??;
            let json = serde_json::to_string_pretty(&run.aggregate).map_err(|e| CliError::Input(e.to_string()))?;
            Ok(writeln!(out, "{json}")?)
        }
        Command::Cartesian { ops, verify, stats } => cmd_cartesian(&ops, verify, stats.as_deref(), &mut out),
        Command::Gen { what } => {
            let text = match what {
                Gen::Forest { n, m, seed } => dynsld_cli::gen_forest(n, m, seed)?,
                Gen::Theorem { h, stars, updates } => {
                    let (forest, pair) = dynsld_cli::gen_theorem(h, stars)?;
                    if let Some(p) = updates {
                        std::fs::write(p, pair)?;
                    }
                    forest
                }
                Gen::Updates { forest, ops, seed, profile } => dynsld_cli::gen_updates(&forest, ops, seed, &profile)?,
            };
            Ok(out.write_all(text.as_bytes())?)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
