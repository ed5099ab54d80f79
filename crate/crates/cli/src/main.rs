//! `quantbound`: run bound and quantization experiments from config files.

mod config;
mod error;
mod model;
mod table;
mod tasks;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use quantbound_core::spaces::selfsimilar::SelfSimilarSet;
use quantbound_core::spaces::Grassmannian;

use config::{ExperimentConfig, Format, SpaceConfig, Task};
use error::CliError;
use model::{FractalModel, GrassmannModel, IntervalModel, SphereModel};
use table::Table;

#[derive(Debug, Parser)]
#[command(name = "quantbound", version, about = "Rate-distortion and quantization bounds for regular measures")]
struct Cli {
    /// Experiment config (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic L_n and U_n (and exact V_n when known) over an n list.
    Bounds,
    /// Explicit rate-distortion lower bound over a D grid.
    RdLower,
    /// ℓ-letter rate lower bound for i.i.d. sources.
    MultiLetter,
    /// Empirical quantizers checked against L_n and U_n.
    Quantize,
    /// Monte Carlo ball masses against the volume law.
    VolumeCheck,
    /// Monte Carlo check of the space's regularity certificates.
    VerifyCert,
}

impl Command {
    fn task(&self) -> Task {
        match self {
            Command::Bounds => Task::Bounds,
            Command::RdLower => Task::RdLower,
            Command::MultiLetter => Task::MultiLetter,
            Command::Quantize => Task::Quantize,
            Command::VolumeCheck => Task::VolumeCheck,
            Command::VerifyCert => Task::VerifyCert,
        }
    }
}

fn dispatch(cfg: &ExperimentConfig, task: Task, seed: u64) -> Result<Table, CliError> {
    let (dist, params) = (&cfg.distribution, &cfg.params);
    match &cfg.space {
        SpaceConfig::Sphere { d, r, ambient } => {
            tasks::run(&SphereModel::new(*d, *r, *ambient, dist, params)?, task, cfg, seed)
        }
        SpaceConfig::Grassmann { field, r, s, d } => {
            let g = Grassmannian::new(*field, *r, *s, *d)?;
            tasks::run(&GrassmannModel::new(g, dist, params)?, task, cfg, seed)
        }
        SpaceConfig::Selfsimilar { maps, c_sub, diam, ambient } => {
            if maps.is_empty() {
                return Err(CliError::Config("space.maps must list at least one similarity".into()));
            }
            let mut set = SelfSimilarSet::build(maps, *diam)?.with_ambient(*ambient);
            if let Some(c) = c_sub {
                set = set.with_c_sub(*c);
            }
            tasks::run(&FractalModel::new(set, dist)?, task, cfg, seed)
        }
        SpaceConfig::Cantor { ambient } => {
            tasks::run(&FractalModel::new(SelfSimilarSet::cantor(*ambient), dist)?, task, cfg, seed)
        }
        SpaceConfig::Interval => tasks::run(&IntervalModel::new(dist)?, task, cfg, seed),
    }
}

fn execute(cli: &Cli) -> Result<usize, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = ExperimentConfig::load(path)?;
    let task = cli.command.task();
    if let Some(t) = cfg.task {
        if t != task {
            return Err(CliError::Config(format!(
                "task = \"{}\" in the config does not match the `{}` subcommand",
                t.name(),
                task.name()
            )));
        }
    }
    let seed = cli
        .seed
        .or(cfg.seed)
        .ok_or_else(|| CliError::Config("missing required field seed".into()))?;
    if let Some(w) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build_global()
            .map_err(|e| CliError::Config(format!("--workers: {e}")))?;
    }
    let table = dispatch(&cfg, task, seed)?;
    let format = cli.format.or(cfg.output.format).unwrap_or_default();
    let text = table.render(format)?;
    let out = cli.out.clone().or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    match out {
        Some(p) => {
            std::fs::write(&p, text).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?;
            let mut stdout = std::io::stdout().lock();
            for line in &table.summaries {
                let _ = writeln!(stdout, "{line}");
            }
        }
        None => {
            let mut stderr = std::io::stderr().lock();
            for line in &table.summaries {
                let _ = writeln!(stderr, "{line}");
            }
            print!("{text}");
        }
    }
    Ok(table.violations)
}

fn main() -> ExitCode {
    // usage errors exit 1 so that 2 always means a bound violation
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(v) => {
            eprintln!("{v} bound violation(s)");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
