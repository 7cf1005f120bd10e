use std::path::PathBuf;
use std::process::ExitCode;

use buffdyn::{run_and_write, ExperimentConfig, ExperimentKind};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "buffdyn", version, about = "Buff-form and external-ray experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for the JSON report, CSV tables and SVG figures.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "BUFFDYN_THREADS")]
    threads: Option<usize>,
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in the config.
    Run { config: PathBuf },
    /// Render a phase portrait.
    Portrait { config: PathBuf },
    /// Lift a circle and audit its translation.
    Spiral { config: PathBuf },
    /// Compare numeric and closed-form residues at every fixed point.
    AuditResidues { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }

    let (path, kind) = match &cli.command {
        Command::Run { config } => (config, None),
        Command::Portrait { config } => (config, Some(ExperimentKind::PhasePortrait)),
        Command::Spiral { config } => (config, Some(ExperimentKind::Spiral)),
        Command::AuditResidues { config } => (config, Some(ExperimentKind::ResidueAudit)),
    };
    let result = ExperimentConfig::load(path, kind).and_then(|cfg| run_and_write(&cfg, cli.out_dir.as_deref()));
    match result {
        Ok((report, written)) => {
            for c in &report.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            for n in &report.notes {
                println!("note: {n}");
            }
            for p in &written {
                log::info!("wrote {}", p.display());
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
