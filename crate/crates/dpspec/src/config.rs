//! Line-based experiment configuration.
//!
//! ```text
//! # k=3 SBM, randomized response + shuffle
//! dataset   = sbm
//! sbm_sizes = 200, 200, 200
//! sbm_p     = 0.5
//! sbm_q     = 0.1
//! mechanism = rr_shuffle
//! eps_min   = 0.5
//! eps_max   = 16
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use dpspec_core::accounting::Accountant;
use dpspec_core::graph::SbmParams;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MechanismKind {
    RrShuffle,
    Sps,
    ProjectedGaussian,
    PowerMethod,
}

impl MechanismKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rr_shuffle" => Some(MechanismKind::RrShuffle),
            "sps" => Some(MechanismKind::Sps),
            "projected_gaussian" => Some(MechanismKind::ProjectedGaussian),
            "power_method" => Some(MechanismKind::PowerMethod),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::RrShuffle => "rr_shuffle",
            MechanismKind::Sps => "sps",
            MechanismKind::ProjectedGaussian => "projected_gaussian",
            MechanismKind::PowerMethod => "power_method",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    /// Redrawn for every trial.
    Sbm(SbmParams),
    /// Edge list plus a `node label` file.
    EdgeList {
        edges: PathBuf,
        labels: PathBuf,
        largest_component: bool,
    },
    /// Edge list plus a circles file, labeled by the drop policy.
    Circles {
        edges: PathBuf,
        circles: PathBuf,
        circle_count: usize,
        largest_component: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaRule {
    /// `δ = n⁻²`
    InverseSquare,
    Fixed(f64),
}

impl DeltaRule {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            DeltaRule::InverseSquare => 1.0 / (n as f64 * n as f64),
            DeltaRule::Fixed(d) => d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Exact,
    /// Sorted class-count metric; a lower bound on the exact one.
    Counts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub mechanism: MechanismKind,
    /// Number of clusters; defaults to the number of ground-truth classes.
    pub k: Option<usize>,
    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_count: usize,
    pub delta: DeltaRule,
    pub trials: usize,
    pub m: usize,
    pub iters: usize,
    pub q_s: Option<f64>,
    pub master_seed: u64,
    pub metric: Metric,
    pub accountant: Accountant,
    /// Worker threads for trials; 0 lets rayon decide.
    pub threads: usize,
}

impl ExperimentConfig {
    /// Desk-scale defaults on the given dataset.
    pub fn new(dataset: DatasetSpec, mechanism: MechanismKind) -> Self {
        ExperimentConfig {
            dataset,
            mechanism,
            k: None,
            eps_min: 0.5,
            eps_max: 16.0,
            eps_count: 8,
            delta: DeltaRule::InverseSquare,
            trials: 20,
            m: 50,
            iters: 5,
            q_s: None,
            master_seed: 0,
            metric: Metric::Exact,
            accountant: Accountant::ClosedForm,
            threads: 0,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses config text; relative paths are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut raw = Raw::default();
        let mut seen = HashSet::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    msg: format!("expected `key = value`, got `{content}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    msg: format!("duplicate key `{key}`"),
                });
            }
            raw.set(key, value, line_no, base_dir)?;
        }
        raw.finish()
    }

    /// Log-equidistant ε grid, ascending.
    pub fn eps_grid(&self) -> Vec<f64> {
        log_grid(self.eps_min, self.eps_max, self.eps_count)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.eps_min > 0.0 && self.eps_min.is_finite() && self.eps_max.is_finite()) {
            return Err(invalid("eps_min and eps_max must be positive and finite"));
        }
        if self.eps_count == 0 {
            return Err(invalid("eps_count must be >= 1"));
        }
        if self.eps_count > 1 && self.eps_min >= self.eps_max {
            return Err(invalid(format!(
                "eps_min ({}) must be below eps_max ({})",
                self.eps_min, self.eps_max
            )));
        }
        if self.eps_count == 1 && self.eps_min > self.eps_max {
            return Err(invalid("eps_min must not exceed eps_max"));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be >= 1"));
        }
        if self.m == 0 {
            return Err(invalid("m must be >= 1"));
        }
        if self.iters == 0 {
            return Err(invalid("iters must be >= 1"));
        }
        if let DeltaRule::Fixed(d) = self.delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(invalid(format!("delta must lie in (0, 1), got {d}")));
            }
        }
        if let Some(q) = self.q_s {
            if !(q > 0.0 && q <= 1.0) {
                return Err(invalid(format!("q_s must lie in (0, 1], got {q}")));
            }
        }
        if self.mechanism == MechanismKind::Sps && self.q_s.is_none() {
            return Err(invalid("mechanism sps needs q_s"));
        }
        if let Some(k) = self.k {
            if k < 2 {
                return Err(invalid("k must be >= 2"));
            }
        }
        Ok(())
    }
}

pub fn log_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let (a, b) = (min.ln(), max.ln());
            (0..count)
                .map(|i| {
                    if i == 0 {
                        min
                    } else if i == count - 1 {
                        max
                    } else {
                        (a + (b - a) * i as f64 / (count - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

#[derive(Default)]
struct Raw {
    dataset: Option<String>,
    sbm_sizes: Option<Vec<usize>>,
    sbm_p: Option<f64>,
    sbm_q: Option<f64>,
    edges: Option<PathBuf>,
    labels: Option<PathBuf>,
    circles: Option<PathBuf>,
    circle_count: Option<usize>,
    largest_component: Option<bool>,
    mechanism: Option<MechanismKind>,
    k: Option<usize>,
    eps_min: Option<f64>,
    eps_max: Option<f64>,
    eps_count: Option<usize>,
    delta: Option<DeltaRule>,
    trials: Option<usize>,
    m: Option<usize>,
    iters: Option<usize>,
    q_s: Option<f64>,
    master_seed: Option<u64>,
    metric: Option<Metric>,
    accountant: Option<Accountant>,
    threads: Option<usize>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Syntax {
        line,
        msg: format!("cannot parse `{value}` for `{key}`"),
    })
}

impl Raw {
    fn set(&mut self, key: &str, value: &str, line: usize, base: &Path) -> Result<(), ConfigError> {
        let bad = |what: &str| ConfigError::Syntax {
            line,
            msg: format!("`{key}` must be {what}, got `{value}`"),
        };
        match key {
            "dataset" => self.dataset = Some(value.to_string()),
            "sbm_sizes" => {
                let sizes = value
                    .split(',')
                    .map(|s| parse_value(key, s.trim(), line))
                    .collect::<Result<Vec<usize>, _>>()?;
                self.sbm_sizes = Some(sizes);
            }
            "sbm_p" => self.sbm_p = Some(parse_value(key, value, line)?),
            "sbm_q" => self.sbm_q = Some(parse_value(key, value, line)?),
            "edges" => self.edges = Some(base.join(value)),
            "labels" => self.labels = Some(base.join(value)),
            "circles" => self.circles = Some(base.join(value)),
            "circle_count" => self.circle_count = Some(parse_value(key, value, line)?),
            "largest_component" => {
                self.largest_component = Some(match value {
                    "true" | "yes" | "1" => true,
                    "false" | "no" | "0" => false,
                    _ => return Err(bad("a boolean")),
                })
            }
            "mechanism" => {
                self.mechanism = Some(
                    MechanismKind::parse(value)
                        .ok_or_else(|| bad("one of rr_shuffle, sps, projected_gaussian, power_method"))?,
                )
            }
            "k" => self.k = Some(parse_value(key, value, line)?),
            "eps_min" => self.eps_min = Some(parse_value(key, value, line)?),
            "eps_max" => self.eps_max = Some(parse_value(key, value, line)?),
            "eps_count" => self.eps_count = Some(parse_value(key, value, line)?),
            "delta" => {
                self.delta = Some(if value == "auto" {
                    DeltaRule::InverseSquare
                } else {
                    DeltaRule::Fixed(parse_value(key, value, line)?)
                })
            }
            "trials" => self.trials = Some(parse_value(key, value, line)?),
            "m" => self.m = Some(parse_value(key, value, line)?),
            "iters" => self.iters = Some(parse_value(key, value, line)?),
            "q_s" => self.q_s = Some(parse_value(key, value, line)?),
            "master_seed" => self.master_seed = Some(parse_value(key, value, line)?),
            "metric" => {
                self.metric = Some(match value {
                    "exact" => Metric::Exact,
                    "counts" => Metric::Counts,
                    _ => return Err(bad("`exact` or `counts`")),
                })
            }
            "accountant" => {
                self.accountant = Some(match value {
                    "closed_form" => Accountant::ClosedForm,
                    "numeric" => Accountant::Numeric,
                    _ => return Err(bad("`closed_form` or `numeric`")),
                })
            }
            "threads" => self.threads = Some(parse_value(key, value, line)?),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<ExperimentConfig, ConfigError> {
        let dataset = match self.dataset.as_deref() {
            Some("sbm") => {
                let sizes = self.sbm_sizes.ok_or_else(|| invalid("dataset sbm needs sbm_sizes"))?;
                let p = self.sbm_p.ok_or_else(|| invalid("dataset sbm needs sbm_p"))?;
                let q = self.sbm_q.ok_or_else(|| invalid("dataset sbm needs sbm_q"))?;
                DatasetSpec::Sbm(SbmParams::new(sizes, p, q).map_err(|e| invalid(e.to_string()))?)
            }
            Some("edges") => DatasetSpec::EdgeList {
                edges: self.edges.ok_or_else(|| invalid("dataset edges needs `edges`"))?,
                labels: self.labels.ok_or_else(|| invalid("dataset edges needs `labels`"))?,
                largest_component: self.largest_component.unwrap_or(false),
            },
            Some("circles") => DatasetSpec::Circles {
                edges: self.edges.ok_or_else(|| invalid("dataset circles needs `edges`"))?,
                circles: self.circles.ok_or_else(|| invalid("dataset circles needs `circles`"))?,
                circle_count: self
                    .circle_count
                    .ok_or_else(|| invalid("dataset circles needs `circle_count`"))?,
                largest_component: self.largest_component.unwrap_or(false),
            },
            Some(other) => return Err(invalid(format!("unknown dataset `{other}`"))),
            None => return Err(invalid("missing `dataset`")),
        };
        let mut cfg = ExperimentConfig::new(dataset, self.mechanism.unwrap_or(MechanismKind::RrShuffle));
        cfg.k = self.k;
        cfg.eps_min = self.eps_min.unwrap_or(cfg.eps_min);
        cfg.eps_max = self.eps_max.unwrap_or(cfg.eps_max);
        cfg.eps_count = self.eps_count.unwrap_or(cfg.eps_count);
        cfg.delta = self.delta.unwrap_or(cfg.delta);
        cfg.trials = self.trials.unwrap_or(cfg.trials);
        cfg.m = self.m.unwrap_or(cfg.m);
        cfg.iters = self.iters.unwrap_or(cfg.iters);
        cfg.q_s = self.q_s;
        cfg.master_seed = self.master_seed.unwrap_or(0);
        cfg.metric = self.metric.unwrap_or_default();
        cfg.accountant = self.accountant.unwrap_or_default();
        cfg.threads = self.threads.unwrap_or(0);
        cfg.validate()?;
        Ok(cfg)
    }
}
