use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use protonlr::compare::compare_files;
use protonlr::error::exit_code;
use protonlr::output::{ensure_writable, write_outputs};
use protonlr::tables::{check_tables, resolve_data_dir, PhysicsData, DATA_DIR_ENV};
use protonlr::{prepare, simulate, AppResult, ProblemConfig, SolverKind};

#[derive(Parser)]
#[command(name = "protonlr", version, about = "Deterministic proton dose calculation with a low-rank collided solver")]
struct Cli {
    /// Worker threads for ray marching (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the low-rank solver and write the outputs.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a config and its tables without running.
    Validate { config: PathBuf },
    /// Run the full-rank reference solver (outputs go to `<output.dir>/oracle` by default).
    Oracle {
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Relative L2 / L∞ difference of two dose volumes (the second is the reference).
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Scalar field to compare.
        #[arg(long, default_value = "dose")]
        field: String,
    },
    /// Physics-data tables.
    Tables {
        #[command(subcommand)]
        action: TablesAction,
    },
}

#[derive(Subcommand)]
enum TablesAction {
    /// Run the data invariant suite.
    Check {
        /// Data directory (default: $PROTONLR_DATA_DIR or the bundled tables).
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        energy_min_mev: f64,
        #[arg(long, default_value_t = 250.0)]
        energy_max_mev: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit_code::USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(exit_code::USAGE as u8);
        }
    }
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> AppResult<u8> {
    match command {
        Command::Run { config, output } => run(&config, output, SolverKind::LowRank),
        Command::Oracle { config, output } => run(&config, output, SolverKind::FullRank),
        Command::Validate { config } => {
            let cfg = ProblemConfig::load(&config)?;
            let prepared = prepare(&cfg)?;
            println!(
                "{}: ok ({} cells, {} moments, {} beam(s), tables from {})",
                config.display(),
                prepared.problem.grid.len(),
                cfg.moments(),
                cfg.beams.len(),
                prepared.data.dir.display()
            );
            Ok(0)
        }
        Command::Compare { a, b, field } => {
            let c = compare_files(&a, &b, &field)?;
            println!("relative_l2 = {:.6e}", c.relative_l2);
            println!("relative_linf = {:.6e}", c.relative_linf);
            Ok(0)
        }
        Command::Tables { action: TablesAction::Check { data, energy_min_mev, energy_max_mev } } => {
            let dir = match data {
                Some(d) => d,
                None => resolve_data_dir(None),
            };
            let tables = PhysicsData::load(&dir)?;
            println!("tables: {} (override with {DATA_DIR_ENV})", dir.display());
            let checks = check_tables(&tables, energy_min_mev, energy_max_mev);
            for c in &checks {
                println!("[{}] {} ({})", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {failed} failed", checks.len());
            Ok(if failed == 0 { 0 } else { exit_code::PHYSICS as u8 })
        }
    }
}

fn run(config: &Path, output: Option<PathBuf>, kind: SolverKind) -> AppResult<u8> {
    let cfg = ProblemConfig::load(config)?;
    let dir = output.unwrap_or_else(|| match kind {
        SolverKind::LowRank => cfg.output.dir.clone(),
        SolverKind::FullRank => cfg.output.dir.join("oracle"),
    });
    ensure_writable(&dir)?;
    let prepared = prepare(&cfg)?;
    let results = simulate(&prepared, kind)?;
    let files = write_outputs(&dir, &cfg, &prepared.data.checksums, &results)?;
    for f in files {
        info!("wrote {}", f.display());
    }
    Ok(0)
}
