use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use dpspec::config::{ConfigError, DeltaRule, ExperimentConfig, MechanismKind};
use dpspec::datasets::write_edge_list;
use dpspec::formats::{write_account_csv, write_curve_csv, write_dense_matrix, write_spectrum_csv, AccountRow};
use dpspec::harness::{self, calibrate, privatize, HarnessError, Release};
use dpspec_core::accounting::{calibrate_rr_shuffle, Accountant, PrivacyBudget};

const EXIT_CONFIG: u8 = 2;
const EXIT_ALL_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(name = "dpspec", version, about = "Edge-private spectral clustering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error rate over the configured ε grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the trial count from the config.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Noisy power method error against the iteration count N.
    AblateIters {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        eps: f64,
        #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50")]
        grid: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Projected Gaussian error against the sketch dimension m.
    AblateDim {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        eps: f64,
        #[arg(long, value_delimiter = ',', default_value = "10,25,50,100,200,400")]
        grid: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Calibration table for one mechanism (or `all`).
    Account {
        #[arg(long, default_value = "all")]
        mechanism: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        /// A number, or `auto` for 1/n².
        #[arg(long, default_value = "auto")]
        delta: String,
        #[arg(long, default_value_t = 50)]
        m: usize,
        #[arg(long, default_value_t = 5)]
        iters: usize,
        #[arg(long, default_value = "closed_form")]
        accountant: String,
    },
    /// Adjacency eigenvalues of the configured dataset.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Release the configured mechanism's output at one ε.
    Privatize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(path: &Path) -> anyhow::Result<ExperimentConfig> {
    Ok(ExperimentConfig::from_file(path)?)
}

fn emit_curve(curve: &harness::TradeoffCurve, out: Option<&Path>) -> anyhow::Result<u8> {
    write_curve_csv(&curve.rows, output(out)?)?;
    if curve.all_infeasible() {
        eprintln!("calibration infeasible at every grid point");
        return Ok(EXIT_ALL_INFEASIBLE);
    }
    Ok(0)
}

fn account_rows(
    mechanism: MechanismKind,
    budget: PrivacyBudget,
    n: usize,
    m: usize,
    iters: usize,
    accountant: Accountant,
) -> Vec<AccountRow> {
    let row = |param_name, param_value| AccountRow {
        mechanism: mechanism.name(),
        eps: budget.eps(),
        delta: budget.delta(),
        n,
        param_name,
        param_value,
    };
    match mechanism {
        MechanismKind::RrShuffle | MechanismKind::Sps => match calibrate_rr_shuffle(budget, n, accountant) {
            Ok(c) => vec![
                row("eps0", Some(c.params.eps0())),
                row("mu", Some(c.params.mu())),
                row("certified_eps", Some(c.certified_eps)),
            ],
            Err(_) => vec![row("mu", None)],
        },
        MechanismKind::ProjectedGaussian => {
            match dpspec_core::accounting::gaussian_projection_sigma(budget, n, m) {
                Ok(p) => vec![row("b", Some(p.b)), row("sigma_bar", Some(p.sigma_bar))],
                Err(_) => vec![row("sigma_bar", None)],
            }
        }
        MechanismKind::PowerMethod => match dpspec_core::accounting::power_method_sigma(budget, iters) {
            Ok(p) => vec![row("sigma_bar", Some(p.sigma_bar))],
            Err(_) => vec![row("sigma_bar", None)],
        },
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Sweep { config, out, trials, seed } => {
            let mut cfg = load(&config)?;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            emit_curve(&harness::run_sweep(&cfg)?, out.as_deref())
        }
        Command::AblateIters { config, eps, grid, out } => {
            let cfg = load(&config)?;
            emit_curve(&harness::run_ablation_power_iters(&cfg, eps, &grid)?, out.as_deref())
        }
        Command::AblateDim { config, eps, grid, out } => {
            let cfg = load(&config)?;
            emit_curve(&harness::run_ablation_projection_dim(&cfg, eps, &grid)?, out.as_deref())
        }
        Command::Account { mechanism, n, eps, delta, m, iters, accountant } => {
            let mechanisms = match mechanism.as_str() {
                "all" => vec![
                    MechanismKind::RrShuffle,
                    MechanismKind::ProjectedGaussian,
                    MechanismKind::PowerMethod,
                ],
                other => vec![MechanismKind::parse(other)
                    .ok_or_else(|| ConfigError::Invalid(format!("unknown mechanism `{other}`")))?],
            };
            let accountant = match accountant.as_str() {
                "closed_form" => Accountant::ClosedForm,
                "numeric" => Accountant::Numeric,
                other => return Err(ConfigError::Invalid(format!("unknown accountant `{other}`")).into()),
            };
            let delta = match delta.as_str() {
                "auto" => DeltaRule::InverseSquare,
                d => DeltaRule::Fixed(
                    d.parse()
                        .map_err(|_| ConfigError::Invalid(format!("cannot parse delta `{d}`")))?,
                ),
            }
            .resolve(n);
            let mut rows = Vec::new();
            for mech in mechanisms {
                for &e in &eps {
                    let budget = PrivacyBudget::new(e, delta).map_err(|e| ConfigError::Invalid(e.to_string()))?;
                    rows.extend(account_rows(mech, budget, n, m, iters, accountant));
                }
            }
            write_account_csv(&rows, output(None)?)?;
            Ok(0)
        }
        Command::Spectrum { config, seed, out } => {
            let cfg = load(&config)?;
            let spec = harness::dataset_spectrum(&cfg, seed)?;
            write_spectrum_csv(&spec, output(out.as_deref())?)?;
            Ok(0)
        }
        Command::Privatize { config, eps, seed, out } => {
            let cfg = load(&config)?;
            let (g, k) = harness::dataset_graph(&cfg, seed)?;
            let budget = PrivacyBudget::new(eps, cfg.delta.resolve(g.n()))
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            let cal = match calibrate(&cfg, cfg.mechanism, budget, g.n()) {
                Ok(c) => c,
                Err(e @ dpspec_core::Error::Calibration { .. }) => {
                    eprintln!("{e}");
                    return Ok(EXIT_ALL_INFEASIBLE);
                }
                Err(e) => bail!(e),
            };
            let file = BufWriter::new(File::create(&out).with_context(|| format!("creating {}", out.display()))?);
            match privatize(&g, k, &cal, seed)? {
                Release::Graph { graph, .. } => write_edge_list(&graph, file)?,
                Release::Dense(m) => write_dense_matrix(&m, file)?,
            }
            Ok(0)
        }
    }
}

fn is_config_error(err: &anyhow::Error) -> bool {
    err.downcast_ref::<ConfigError>().is_some()
        || matches!(err.downcast_ref::<HarnessError>(), Some(HarnessError::Config(_)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_config_error(&err) {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
