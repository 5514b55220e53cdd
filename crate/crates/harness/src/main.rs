use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gradavg_core::nn::InitKind;
use gradavg_core::OptimizerKind;
use gradavg_harness::{
    exit, run_checks, run_experiment, run_grid, CheckOptions, ExperimentConfig, HarnessError,
    Preset, Suite, Task,
};

#[derive(Parser)]
#[command(
    name = "gradavg",
    version,
    about = "Averaged-gradient descent experiments and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full-batch run on a seeded random diagonal quadratic.
    Quadratic(RunArgs),
    /// Full-batch run on ½(x² − y²) from (1e-3, 1e-3).
    Saddle(RunArgs),
    /// Linear regression on a CSV file (--data).
    Regress(RunArgs),
    /// 784-128-10 classifier on an IDX directory (--data).
    Classify(RunArgs),
    /// All four optimizers on one task; --out names a directory that receives
    /// one metrics CSV per optimizer.
    Grid {
        #[arg(value_enum)]
        task: TaskArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Property suites.
    Check {
        #[arg(long, default_value = "all")]
        suite: Suite,
        /// Runs the descent suite at alpha = factor/(3L).
        #[arg(long, default_value_t = 1.0, hide = true)]
        descent_alpha_factor: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Quadratic,
    Saddle,
    Regress,
    Classify,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Quadratic => Task::Quadratic,
            TaskArg::Saddle => Task::Saddle,
            TaskArg::Regress => Task::Regression,
            TaskArg::Classify => Task::Classification,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// gradavg, sgd, momentum or nag; ignored by `grid`.
    #[arg(long, default_value = "gradavg")]
    optimizer: OptimizerKind,
    /// Starting hyperparameters; individual flags override them.
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// normal or uniform.
    #[arg(long)]
    init: Option<InitKind>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// 0-based; defaults to the last column.
    #[arg(long)]
    target_col: Option<usize>,
    /// The CSV has no header row.
    #[arg(long)]
    no_header: bool,
    /// Training images kept for classification (test keeps a fifth).
    #[arg(long, conflicts_with = "full")]
    subset: Option<usize>,
    /// Use every MNIST image.
    #[arg(long)]
    full: bool,
    /// Metrics CSV (or directory, for `grid`).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self, task: Task, optimizer: OptimizerKind) -> ExperimentConfig {
        let mut cfg = match self.preset {
            Some(p) => ExperimentConfig {
                task,
                ..ExperimentConfig::preset(p, optimizer)
            },
            None => ExperimentConfig::for_task(task, optimizer),
        };
        cfg.alpha = self.lr.unwrap_or(cfg.alpha);
        cfg.mu = self.momentum.unwrap_or(cfg.mu);
        cfg.batch_size = self.batch_size.or(cfg.batch_size);
        cfg.epochs = self.epochs.unwrap_or(cfg.epochs);
        cfg.seed = self.seed;
        cfg.init = self.init.unwrap_or(cfg.init);
        cfg.data = self.data.clone();
        cfg.target_col = self.target_col;
        cfg.header = task == Task::Regression && !self.no_header;
        if task == Task::Classification {
            cfg.subset = if self.full {
                None
            } else {
                self.subset.or(cfg.subset)
            };
        }
        cfg.out = self.out.clone();
        cfg
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::IO_OR_CONFIG
            } else {
                exit::SUCCESS
            });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::IO_OR_CONFIG)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, HarnessError> {
    let single = |task, args: RunArgs| -> Result<u8, HarnessError> {
        let summary = run_experiment(&args.config(task, args.optimizer))?;
        println!("{}", summary.line());
        Ok(if summary.diverged() {
            exit::DIVERGED
        } else {
            exit::SUCCESS
        })
    };
    match command {
        Command::Quadratic(a) => single(Task::Quadratic, a),
        Command::Saddle(a) => single(Task::Saddle, a),
        Command::Regress(a) => single(Task::Regression, a),
        Command::Classify(a) => single(Task::Classification, a),
        Command::Grid { task, run } => {
            let cfgs: Vec<_> = OptimizerKind::ALL
                .iter()
                .map(|&k| {
                    let mut cfg = run.config(task.into(), k);
                    cfg.out = run.out.as_ref().map(|dir| dir.join(format!("{k}.csv")));
                    cfg
                })
                .collect();
            let table = run_grid(&cfgs);
            print!("{}", table.render());
            Ok(if table.any_failed() {
                exit::IO_OR_CONFIG
            } else if table.any_diverged() {
                exit::DIVERGED
            } else {
                exit::SUCCESS
            })
        }
        Command::Check {
            suite,
            descent_alpha_factor,
        } => {
            let report = run_checks(
                suite,
                &CheckOptions {
                    descent_alpha_factor,
                },
            );
            print!("{report}");
            Ok(if report.passed() {
                exit::SUCCESS
            } else {
                exit::PROPERTY_FAILURE
            })
        }
    }
}
