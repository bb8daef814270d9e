use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use corner_gl_cli::{run, write_error_record, Command, Format, RunConfig, RunError};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Solve1d,
    Cost,
    Solve2d,
    Trial,
    Sweep,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fmt {
    Json,
    Csv,
}

/// Corner energies of Ginzburg-Landau surface superconductivity.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Pipeline to run.
    command: Sub,
    /// TOML configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweep rows (default: physical cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    format: Fmt,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CORNER_GL_LOG", "warn")).init();
    let cli = Cli::parse();
    let command = match cli.command {
        Sub::Solve1d => Command::Solve1d,
        Sub::Cost => Command::Cost,
        Sub::Solve2d => Command::Solve2d,
        Sub::Trial => Command::Trial,
        Sub::Sweep => Command::Sweep,
    };
    let format = match cli.format {
        Fmt::Json => Format::Json,
        Fmt::Csv => Format::Csv,
    };
    let jobs = cli.jobs.unwrap_or_else(num_cpus::get_physical).max(1);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {jobs} workers: {e}");
            return ExitCode::from(3);
        }
    };
    let config = match &cli.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    };
    let result = match config {
        Ok(cfg) => pool.install(|| run(&cfg, Some(command), &cli.out, format)),
        Err(e) => {
            let e = RunError::from(e);
            write_error_record(&e, &cli.out);
            Err(e)
        }
    };
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
