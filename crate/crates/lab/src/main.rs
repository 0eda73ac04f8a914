use std::path::PathBuf;
use std::process::ExitCode;

use blp_lab::output::{write_census, write_json, write_masquerades, write_regret, write_table1};
use blp_lab::{CensusCase, ExperimentConfig, Result};
use blp_lab_core::{RestartPolicy, WorldConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// False-predictor laboratory: online structure learning on a toy world.
#[derive(Parser)]
#[command(name = "blp-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Number of redundant variables.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    histories: Option<usize>,
    #[arg(long, global = true)]
    max_m: Option<usize>,
    #[arg(long, global = true)]
    batch: Option<usize>,
    #[arg(long, global = true, value_enum)]
    restart_policy: Option<Policy>,
    #[arg(long, global = true)]
    allow_x0: Option<bool>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Warm,
    Initial,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Batched structural size and life time (table1.csv, report.json).
    Table1,
    /// Monte Carlo false-predictor census against its expectation.
    #[command(alias = "eq8")]
    Census {
        /// Case `n:s:m`; repeatable. Defaults to 6:2:4, 8:3:6 and 10:4:10.
        #[arg(long = "case", value_parser = parse_case)]
        cases: Vec<CensusCase>,
        #[arg(long, default_value_t = 5000)]
        trials: usize,
    },
    /// Mean survival of a randomly chosen false predictor.
    Survival {
        #[arg(long, default_value_t = 3)]
        s: usize,
        #[arg(long, default_value_t = 2)]
        warmup_m: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Regret trace of one history.
    Regret {
        #[arg(long, default_value_t = 0)]
        history: usize,
        /// Restrict the comparator to bodies of at most this size.
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Rule-of-thumb approvals of false predictors (masquerade.csv).
    MonitorDemo,
    /// One history as JSON.
    History {
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
}

fn parse_case(text: &str) -> std::result::Result<CensusCase, String> {
    let parts: Vec<_> = text.split(':').map(str::parse::<usize>).collect();
    match parts.as_slice() {
        [Ok(n), Ok(s), Ok(m)] => Ok(CensusCase {
            n: *n,
            s: *s,
            m: *m,
        }),
        _ => Err(format!("expected n:s:m, got {text:?}")),
    }
}

fn build_config(c: &Common) -> Result<ExperimentConfig> {
    let mut config = match &c.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let w = config.world;
    config.world = WorldConfig::new(
        c.n.unwrap_or(w.n_redundant()),
        c.alpha.unwrap_or(w.alpha()),
        c.seed.unwrap_or(w.seed()),
    )?;
    if let Some(v) = c.histories {
        config.histories = v;
    }
    if let Some(v) = c.max_m {
        config.max_m = v;
    }
    if let Some(v) = c.batch {
        config.batch = v;
    }
    if let Some(p) = c.restart_policy {
        config.learner.restart_policy = match p {
            Policy::Warm => RestartPolicy::WarmStart,
            Policy::Initial => RestartPolicy::RestartFromInitial,
        };
    }
    if let Some(v) = c.allow_x0 {
        config.learner.allow_x0_in_body = v;
    }
    if c.parallelism.is_some() {
        config.parallelism = c.parallelism;
    }
    if let Some(v) = &c.out {
        config.out_dir = v.clone();
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let config = build_config(&cli.common)?;
    let dir = config.out_dir.clone();
    let json = cli.common.format == Format::Json;
    match cli.command {
        Command::Table1 => {
            let report = blp_lab::run_table1(&config)?;
            if !json {
                write_table1(&dir.join("table1.csv"), &report.table1)?;
            }
            write_json(&dir.join("report.json"), &report)?;
        }
        Command::Census { cases, trials } => {
            let cases = if cases.is_empty() {
                vec![
                    CensusCase { n: 6, s: 2, m: 4 },
                    CensusCase { n: 8, s: 3, m: 6 },
                    CensusCase { n: 10, s: 4, m: 10 },
                ]
            } else {
                cases
            };
            let rows = blp_lab::run_census(&config, &cases, trials)?;
            if json {
                write_json(&dir.join("census.json"), &rows)?;
            } else {
                write_census(&dir.join("census.csv"), &rows)?;
            }
        }
        Command::Survival {
            s,
            warmup_m,
            trials,
        } => {
            let result = blp_lab::run_survival(&config, s, warmup_m, trials)?;
            write_json(&dir.join("survival.json"), &result)?;
        }
        Command::Regret { history, max_size } => {
            let trace = blp_lab::run_regret(&config, history, max_size)?;
            if json {
                write_json(&dir.join("regret.json"), &trace)?;
            } else {
                write_regret(&dir.join("regret.csv"), &trace)?;
            }
        }
        Command::MonitorDemo => {
            let found = blp_lab::run_monitor_demo(&config)?;
            if json {
                write_json(&dir.join("masquerade.json"), &found)?;
            } else {
                write_masquerades(&dir.join("masquerade.csv"), &found)?;
            }
        }
        Command::History { index } => {
            let dump = blp_lab::run_history(&config, index)?;
            write_json(&dir.join(format!("history-{index}.json")), &dump)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("blp-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
