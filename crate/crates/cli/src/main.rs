use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use trustvote_cli::commands::{self, Report};
use trustvote_cli::config::load_config;
use trustvote_cli::reproduce::{self, Options};
use trustvote_cli::{CliError, CliResult};
use trustvote_core::ldp::McSettings;
use trustvote_core::selection::AvailabilityFn;
use trustvote_core::trust::ScoreForm;
use trustvote_core::Execution;

/// Selection-pressure voting simulator with trust scoring and large-deviation analysis.
#[derive(Debug, Parser)]
#[command(name = "trustvote", version)]
struct Cli {
    /// Scenario config (JSON), or a manifest.json from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// 64-bit seed; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for output files.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for replicas and seed sweeps; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and export rewards, elections and trust tables.
    Simulate {
        /// Overrides the number of rounds.
        #[arg(long)]
        rounds: Option<usize>,
        /// Overrides whether trust evaluation is on.
        #[arg(long)]
        trust: Option<bool>,
        /// Overrides the availability function (power, exponential, linear).
        #[arg(long)]
        availability: Option<AvailabilityFn>,
    },
    /// Large-deviation closed forms and Monte Carlo checks.
    #[command(subcommand)]
    Ldp(Ldp),
    /// Check that truthful belief reports maximize expected trust.
    IcCheck {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// log or quadratic.
        #[arg(long, default_value = "log")]
        form: ScoreForm,
        /// Report grid step; at most 0.01.
        #[arg(long, default_value_t = 0.01)]
        grid: f64,
    },
    /// Emit the data behind a figure or table as CSV.
    Reproduce {
        /// One of fig2, fig3, fig4, fig5, fig7, fig8, table1, table2.
        target: String,
    },
}

#[derive(Debug, Subcommand)]
#[allow(non_snake_case)]
enum Ldp {
    /// Decay rate I(b).
    Rate {
        #[arg(long)]
        b: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long = "Lambda")]
        Lambda: f64,
    },
    /// Effective selection valve L*(epsilon).
    Valve {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long = "Lambda")]
        Lambda: f64,
    },
    /// Effective expectation of merit lambda*(epsilon).
    Merit {
        #[arg(long)]
        epsilon: f64,
        #[arg(long = "Lambda")]
        Lambda: f64,
        #[arg(long = "L")]
        L: f64,
    },
    /// Monte Carlo estimate of the chance the ranking queue ever exceeds L.
    Mc {
        #[arg(long)]
        lambda: f64,
        #[arg(long = "Lambda")]
        Lambda: f64,
        #[arg(long = "L")]
        L: f64,
        #[arg(long, default_value_t = 2000)]
        horizon: u64,
        #[arg(long, default_value_t = 100_000)]
        replicas: u64,
    },
    /// Monte Carlo estimates over several scale parameters and the fitted decay slope.
    Decay {
        #[arg(long)]
        lambda: f64,
        #[arg(long = "Lambda")]
        Lambda: f64,
        #[arg(long)]
        b: f64,
        /// Comma-separated scale parameters.
        #[arg(long = "l", value_delimiter = ',', default_values_t = [2.0, 4.0, 6.0, 8.0])]
        l: Vec<f64>,
        #[arg(long, default_value_t = 2000)]
        horizon: u64,
        #[arg(long, default_value_t = 100_000)]
        replicas: u64,
    },
}

fn execution(jobs: Option<usize>) -> CliResult<Execution> {
    match jobs {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Runtime(format!("cannot start {n} workers: {e}")))?;
            #[cfg(not(feature = "parallel"))]
            log::warn!("built without parallel support; ignoring --jobs {n}");
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}

fn run(cli: Cli) -> CliResult<Report> {
    let exec = execution(cli.jobs)?;
    let out_dir = cli.out_dir.clone();
    let mc = |horizon, replicas| McSettings {
        execution: exec,
        ..McSettings::new(horizon, replicas, cli.seed.unwrap_or(0))
    };
    match cli.command {
        Command::Simulate {
            rounds,
            trust,
            availability,
        } => {
            let path = cli
                .config
                .as_deref()
                .ok_or_else(|| CliError::Usage("simulate needs --config".into()))?;
            let mut config = load_config(path)?;
            if let Some(s) = cli.seed {
                config.seed = s;
            }
            if let Some(r) = rounds {
                config.rounds = r;
            }
            if let Some(t) = trust {
                config.trust_enabled = t;
            }
            if let Some(a) = availability {
                config.availability_fn = a;
            }
            config.validate().map_err(CliError::input)?;
            commands::simulate(&config, &out_dir.unwrap_or_else(|| PathBuf::from(".")), exec)
        }
        Command::Ldp(op) => match op {
            Ldp::Rate { b, lambda, Lambda } => commands::ldp_rate(b, lambda, Lambda),
            Ldp::Valve {
                epsilon,
                lambda,
                Lambda,
            } => commands::ldp_valve(epsilon, lambda, Lambda),
            Ldp::Merit { epsilon, Lambda, L } => commands::ldp_merit(epsilon, Lambda, L),
            Ldp::Mc {
                lambda,
                Lambda,
                L,
                horizon,
                replicas,
            } => commands::ldp_mc(lambda, Lambda, L, &mc(horizon, replicas), out_dir.as_deref()),
            Ldp::Decay {
                lambda,
                Lambda,
                b,
                l,
                horizon,
                replicas,
            } => commands::ldp_decay(lambda, Lambda, b, &l, &mc(horizon, replicas), out_dir.as_deref()),
        },
        Command::IcCheck { alpha, form, grid } => commands::ic_sweep(alpha, form, grid),
        Command::Reproduce { target } => {
            let opts = Options {
                out_dir: out_dir.unwrap_or_else(|| PathBuf::from(".")),
                seed: cli.seed,
                config: cli.config.as_deref().map(load_config).transpose()?,
                execution: exec,
            };
            let files = reproduce::reproduce(&target, &opts)?;
            Ok(Report {
                text: String::new(),
                files,
                failed_check: false,
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            print!("{}", report.text);
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if report.failed_check {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
