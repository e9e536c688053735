//! Sweeps and ablations: calibrate, privatize, embed, cluster, score.

use std::borrow::Cow;
use std::time::Instant;

use rayon::prelude::*;

use dpspec_core::accounting::{
    calibrate_rr_shuffle, gaussian_projection_sigma, power_method_sigma, GaussianProjectionParams,
    PowerMethodParams, PrivacyBudget,
};
use dpspec_core::graph::{sbm_sample, Graph, Permutation};
use dpspec_core::kmeans::kmeans;
use dpspec_core::mechanisms::{noisy_power_method, projected_gaussian, rr_shuffle, subsample_perturb_shuffle};
use dpspec_core::metrics::{class_counts, error_rate_counts, error_rate_exact};
use dpspec_core::nalgebra::DMatrix;
use dpspec_core::rng::derive_seed;
use dpspec_core::spectral::{symmetric_eigenvalues, top_k_eigenvectors, top_k_left_singular, SpectrumSummary};

use crate::config::{ConfigError, DatasetSpec, ExperimentConfig, MechanismKind, Metric};
use crate::datasets::{load_fixed, DatasetError};
use crate::formats::CurveRow;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Core(#[from] dpspec_core::Error),
    #[error("building the worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Outcome of one mechanism + embedding + k-means + scoring pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub err_exact: f64,
    pub err_counts: f64,
    pub inertia: f64,
    pub runtime_ms: f64,
}

/// Rows sorted by the swept quantity (ε for sweeps, N or m for ablations),
/// with the per-trial records behind every row.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    pub mechanism: MechanismKind,
    pub rows: Vec<CurveRow>,
    pub trials: Vec<Vec<TrialRecord>>,
}

impl TradeoffCurve {
    pub fn all_infeasible(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| !r.is_feasible())
    }
}

/// Mechanism parameters calibrated for one (ε, δ) point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Calibrated {
    RrShuffle { mu: f64 },
    Sps { mu: f64, q_s: f64 },
    ProjectedGaussian(GaussianProjectionParams),
    PowerMethod(PowerMethodParams),
}

impl Calibrated {
    /// The value reported in the `param` column: μ or σ̄.
    pub fn reported_param(&self) -> f64 {
        match self {
            Calibrated::RrShuffle { mu } | Calibrated::Sps { mu, .. } => *mu,
            Calibrated::ProjectedGaussian(p) => p.sigma_bar,
            Calibrated::PowerMethod(p) => p.sigma_bar,
        }
    }
}

/// Calibrates `mechanism` for `budget` on `n` nodes. A budget no accountant
/// can meet comes back as [`dpspec_core::Error::Calibration`].
pub fn calibrate(
    cfg: &ExperimentConfig,
    mechanism: MechanismKind,
    budget: PrivacyBudget,
    n: usize,
) -> Result<Calibrated, dpspec_core::Error> {
    Ok(match mechanism {
        MechanismKind::RrShuffle => Calibrated::RrShuffle {
            mu: calibrate_rr_shuffle(budget, n, cfg.accountant)?.params.mu(),
        },
        // subsampling after randomized response is post-processing: same μ
        MechanismKind::Sps => Calibrated::Sps {
            mu: calibrate_rr_shuffle(budget, n, cfg.accountant)?.params.mu(),
            q_s: cfg.q_s.unwrap_or(1.0),
        },
        MechanismKind::ProjectedGaussian => {
            Calibrated::ProjectedGaussian(gaussian_projection_sigma(budget, n, cfg.m)?)
        }
        MechanismKind::PowerMethod => Calibrated::PowerMethod(power_method_sigma(budget, cfg.iters)?),
    })
}

enum Source {
    Sbm(dpspec_core::graph::SbmParams),
    Fixed(Graph),
}

impl Source {
    fn open(spec: &DatasetSpec) -> Result<Self, HarnessError> {
        Ok(match spec {
            DatasetSpec::Sbm(p) => Source::Sbm(p.clone()),
            other => {
                let g = load_fixed(other)?;
                if g.labels().is_none() {
                    return Err(DatasetError::Invalid("dataset has no ground-truth labels".into()).into());
                }
                Source::Fixed(g)
            }
        })
    }

    fn n(&self) -> usize {
        match self {
            Source::Sbm(p) => p.n(),
            Source::Fixed(g) => g.n(),
        }
    }

    fn classes(&self) -> usize {
        match self {
            Source::Sbm(p) => p.k(),
            Source::Fixed(g) => g.labels().map_or(2, |l| l.k()),
        }
    }

    fn graph(&self, seed: u64) -> Result<Cow<'_, Graph>, HarnessError> {
        Ok(match self {
            Source::Sbm(p) => Cow::Owned(sbm_sample(p, seed)?),
            Source::Fixed(g) => Cow::Borrowed(g),
        })
    }
}

/// What a mechanism releases for one trial.
pub enum Release {
    /// Perturbed and shuffled adjacency, released as a graph.
    Graph { graph: Graph, permutation: Permutation },
    /// Real-valued sketch or final power iterate.
    Dense(DMatrix<f64>),
}

/// Runs the mechanism alone.
pub fn privatize(g: &Graph, k: usize, cal: &Calibrated, seed: u64) -> Result<Release, dpspec_core::Error> {
    Ok(match cal {
        Calibrated::RrShuffle { mu } => {
            let pg = rr_shuffle(g, *mu, seed)?;
            Release::Graph {
                graph: pg.to_graph()?,
                permutation: pg.permutation().clone(),
            }
        }
        Calibrated::Sps { mu, q_s } => {
            let pg = subsample_perturb_shuffle(g, *q_s, *mu, seed)?;
            Release::Graph {
                graph: pg.to_graph()?,
                permutation: pg.permutation().clone(),
            }
        }
        Calibrated::ProjectedGaussian(p) => Release::Dense(projected_gaussian(g, p, seed)?.into_released()),
        Calibrated::PowerMethod(p) => Release::Dense(noisy_power_method(g, k, p, seed)?.x().clone()),
    })
}

/// Embedding rows in original node order for one trial.
fn embed(g: &Graph, k: usize, cal: &Calibrated, seed: u64) -> Result<(DMatrix<f64>, Option<Permutation>), dpspec_core::Error> {
    Ok(match cal {
        Calibrated::RrShuffle { mu } => {
            let pg = rr_shuffle(g, *mu, seed)?;
            let (emb, _) = top_k_eigenvectors(&pg.to_matrix(), k)?;
            (emb.into_coords(), Some(pg.permutation().clone()))
        }
        Calibrated::Sps { mu, q_s } => {
            let pg = subsample_perturb_shuffle(g, *q_s, *mu, seed)?;
            let (emb, _) = top_k_eigenvectors(&pg.to_matrix(), k)?;
            (emb.into_coords(), Some(pg.permutation().clone()))
        }
        Calibrated::ProjectedGaussian(p) => {
            let sketch = projected_gaussian(g, p, seed)?;
            let (emb, _) = top_k_left_singular(sketch.released(), k)?;
            (emb.into_coords(), None)
        }
        Calibrated::PowerMethod(p) => {
            let it = noisy_power_method(g, k, p, seed)?;
            (it.into_embedding()?.into_coords(), None)
        }
    })
}

fn run_trial(
    source: &Source,
    k: usize,
    cal: &Calibrated,
    trial: usize,
    seed: u64,
) -> Result<TrialRecord, HarnessError> {
    let start = Instant::now();
    let g = source.graph(seed)?;
    let truth = g
        .labels()
        .ok_or_else(|| DatasetError::Invalid("graph has no labels".into()))?;
    let (coords, perm) = embed(&g, k, cal, seed)?;
    let assignment = kmeans(&coords, k, seed)?;
    let pred = match perm {
        // row a of the shuffled release belongs to original node perm[a]
        Some(p) => p.unapply(&assignment.labels),
        None => assignment.labels,
    };
    let err_exact = error_rate_exact(&pred, truth.as_slice())?;
    let classes = k.max(truth.k());
    let err_counts = error_rate_counts(
        &class_counts(&pred, classes),
        &class_counts(truth.as_slice(), classes),
        pred.len(),
    )?;
    Ok(TrialRecord {
        trial,
        seed,
        err_exact,
        err_counts,
        inertia: assignment.inertia,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let t = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / t;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (t - 1.0);
    (mean, (var / t).sqrt())
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    source: Source,
    k: usize,
    pool: Option<rayon::ThreadPool>,
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self, HarnessError> {
        cfg.validate()?;
        let source = Source::open(&cfg.dataset)?;
        let k = cfg.k.unwrap_or_else(|| source.classes());
        let pool = match cfg.threads {
            0 => None,
            t => Some(rayon::ThreadPoolBuilder::new().num_threads(t).build()?),
        };
        Ok(Runner { cfg, source, k, pool })
    }

    fn delta(&self) -> f64 {
        self.cfg.delta.resolve(self.source.n())
    }

    /// All trials at one calibrated point, aggregated in trial order.
    fn point(&self, cal: &Calibrated) -> Result<(f64, Vec<TrialRecord>), HarnessError> {
        let work = || {
            (0..self.cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let seed = derive_seed(self.cfg.master_seed, t as u64);
                    run_trial(&self.source, self.k, cal, t, seed)
                })
                .collect::<Result<Vec<_>, _>>()
        };
        let records = match &self.pool {
            Some(pool) => pool.install(work)?,
            None => work()?,
        };
        let mean_ms = records.iter().map(|r| r.runtime_ms).sum::<f64>() / records.len() as f64;
        Ok((mean_ms, records))
    }

    fn row(&self, eps: f64, param: f64, cal: &Calibrated) -> Result<(CurveRow, Vec<TrialRecord>), HarnessError> {
        let (runtime_ms, records) = self.point(cal)?;
        let errs: Vec<f64> = records
            .iter()
            .map(|r| match self.cfg.metric {
                Metric::Exact => r.err_exact,
                Metric::Counts => r.err_counts,
            })
            .collect();
        let (err_mean, err_stderr) = mean_stderr(&errs);
        let row = CurveRow {
            eps,
            delta: self.delta(),
            param: Some(param),
            err_mean,
            err_stderr,
            trials: records.len(),
            runtime_ms,
        };
        Ok((row, records))
    }

    fn budget(&self, eps: f64) -> Result<PrivacyBudget, HarnessError> {
        Ok(PrivacyBudget::new(eps, self.delta())?)
    }
}

/// The configured mechanism at every ε of the grid. Points no accountant can
/// certify become `infeasible` rows and the sweep moves on.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<TradeoffCurve, HarnessError> {
    let runner = Runner::new(cfg)?;
    let mut curve = TradeoffCurve {
        mechanism: cfg.mechanism,
        rows: Vec::new(),
        trials: Vec::new(),
    };
    for eps in cfg.eps_grid() {
        let budget = runner.budget(eps)?;
        match calibrate(cfg, cfg.mechanism, budget, runner.source.n()) {
            Ok(cal) => {
                let (row, records) = runner.row(eps, cal.reported_param(), &cal)?;
                curve.rows.push(row);
                curve.trials.push(records);
            }
            Err(dpspec_core::Error::Calibration { .. }) => {
                curve.rows.push(CurveRow::infeasible(eps, budget.delta()));
                curve.trials.push(Vec::new());
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(curve)
}

fn check_grid(grid: &[usize], what: &str) -> Result<(), HarnessError> {
    if grid.is_empty() {
        return Err(ConfigError::Invalid(format!("{what} grid is empty")).into());
    }
    if grid.contains(&0) {
        return Err(ConfigError::Invalid(format!("{what} grid must not contain 0")).into());
    }
    Ok(())
}

fn ablation<F>(
    cfg: &ExperimentConfig,
    eps: f64,
    grid: &[usize],
    mechanism: MechanismKind,
    with: F,
) -> Result<TradeoffCurve, HarnessError>
where
    F: Fn(&mut ExperimentConfig, usize),
{
    let mut grid = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let mut local = cfg.clone();
    local.mechanism = mechanism;
    let runner = Runner::new(&local)?;
    let budget = runner.budget(eps)?;
    let mut curve = TradeoffCurve {
        mechanism,
        rows: Vec::new(),
        trials: Vec::new(),
    };
    for value in grid {
        let mut point_cfg = local.clone();
        with(&mut point_cfg, value);
        match calibrate(&point_cfg, mechanism, budget, runner.source.n()) {
            Ok(cal) => {
                let (row, records) = runner.row(eps, value as f64, &cal)?;
                curve.rows.push(row);
                curve.trials.push(records);
            }
            Err(dpspec_core::Error::Calibration { .. }) => {
                curve.rows.push(CurveRow::infeasible(eps, budget.delta()));
                curve.trials.push(Vec::new());
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(curve)
}

/// Noisy power method at fixed ε, one row per iteration count `N`.
pub fn run_ablation_power_iters(
    cfg: &ExperimentConfig,
    eps: f64,
    iters_grid: &[usize],
) -> Result<TradeoffCurve, HarnessError> {
    check_grid(iters_grid, "iteration")?;
    ablation(cfg, eps, iters_grid, MechanismKind::PowerMethod, |c, n| c.iters = n)
}

/// Projected Gaussian sketch at fixed ε, one row per dimension `m`.
pub fn run_ablation_projection_dim(
    cfg: &ExperimentConfig,
    eps: f64,
    m_grid: &[usize],
) -> Result<TradeoffCurve, HarnessError> {
    check_grid(m_grid, "projection dimension")?;
    ablation(cfg, eps, m_grid, MechanismKind::ProjectedGaussian, |c, m| c.m = m)
}

/// Full adjacency spectrum of the dataset (an SBM draw uses `seed`).
pub fn dataset_spectrum(cfg: &ExperimentConfig, seed: u64) -> Result<SpectrumSummary, HarnessError> {
    let source = Source::open(&cfg.dataset)?;
    let g = source.graph(seed)?;
    let k = cfg.k.unwrap_or_else(|| source.classes());
    let values = symmetric_eigenvalues(g.to_dense().matrix());
    Ok(SpectrumSummary::new(values, k)?)
}

/// The dataset graph (an SBM draw uses `seed`) and its cluster count.
pub fn dataset_graph(cfg: &ExperimentConfig, seed: u64) -> Result<(Graph, usize), HarnessError> {
    let source = Source::open(&cfg.dataset)?;
    let k = cfg.k.unwrap_or_else(|| source.classes());
    Ok((source.graph(seed)?.into_owned(), k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_is_sample_sd_over_root_t() {
        let (m, s) = mean_stderr(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(m, 1.5);
        assert!((s - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(mean_stderr(&[0.3]), (0.3, 0.0));
    }
}
