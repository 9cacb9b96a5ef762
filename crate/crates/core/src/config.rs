//! Run configuration: defaults, a flat `key = value` file format, and overrides.
//!
//! ```text
//! # comment
//! synthetic = n_rows=600,n_tickers=24,planted_count=3,noise_sigma=0.05,seed=7
//! target = AAPL.Close
//! k = 10
//! methods = var,cor,dtw
//! full_schedule = true
//! ```
//!
//! Files ending in `.json` are read as a serialized [`RunConfig`] instead.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::bench::{ShrinkPolicy, ShrinkSchedule};
use crate::dataset::{align, build_horizon_target, AlignedDataset};
use crate::error::{Error, Result};
use crate::ingest::{generate_synthetic, load_dir, SyntheticSpec, DATE_FORMAT};
use crate::metrics::MetricParams;
use crate::selectors::{ForestParams, LassoParams, Method, SaParams, SelectorSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub data_dir: Option<PathBuf>,
    pub synthetic: Option<SyntheticSpec>,
    pub target: String,
    pub horizon: usize,
    pub start_date: Option<NaiveDate>,
    pub end_date: Option<NaiveDate>,
    pub k: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub metric_params: MetricParams,
    pub schedule_start: u32,
    pub schedule_end: u32,
    pub schedule_step: u32,
    pub shrink_policy: ShrinkPolicy,
    pub prescreen: usize,
    pub folds: usize,
    pub sa_params: SaParams,
    pub lasso_params: LassoParams,
    pub forest_params: ForestParams,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data_dir: None,
            synthetic: None,
            target: "AAPL.Close".into(),
            horizon: 10,
            start_date: NaiveDate::from_ymd_opt(2016, 1, 1),
            end_date: NaiveDate::from_ymd_opt(2024, 1, 28),
            k: 10,
            seed: 42,
            methods: Method::DEFAULT.to_vec(),
            metric_params: MetricParams::default(),
            schedule_start: 100,
            schedule_end: 20,
            schedule_step: 5,
            shrink_policy: ShrinkPolicy::Suffix,
            prescreen: 50,
            folds: 10,
            sa_params: SaParams::default(),
            lasso_params: LassoParams::default(),
            forest_params: ForestParams::default(),
            out_dir: PathBuf::from("shrinkbench-out"),
            threads: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

fn parse_date(key: &str, value: &str) -> Result<Option<NaiveDate>> {
    if value.is_empty() || value == "none" {
        return Ok(None);
    }
    NaiveDate::parse_from_str(value, DATE_FORMAT)
        .map(Some)
        .map_err(|_| Error::Config(format!("invalid date `{value}` for `{key}` (want YYYY-MM-DD)")))
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            let cfg: RunConfig =
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            return Ok(cfg);
        }
        Self::from_key_values(&text)
    }

    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Applies one setting; the same keys are used by the file format and by overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "data_dir" => self.data_dir = Some(PathBuf::from(value)),
            "synthetic" => self.synthetic = Some(value.parse()?),
            "target" => self.target = value.to_string(),
            "horizon" => self.horizon = parse(key, value)?,
            "start_date" => self.start_date = parse_date(key, value)?,
            "end_date" => self.end_date = parse_date(key, value)?,
            "k" => self.k = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "methods" => {
                self.methods = if value == "default" {
                    Method::DEFAULT.to_vec()
                } else if value == "all" {
                    Method::DEFAULT.iter().chain(&Method::EXTRA).copied().collect()
                } else {
                    value
                        .split(',')
                        .map(|m| m.trim().parse())
                        .collect::<Result<Vec<Method>>>()
                        .map_err(|e| Error::Config(e.to_string()))?
                }
            }
            "epsilon_match" | "epsilon" => self.metric_params.epsilon_match = parse(key, value)?,
            "gap_ref" => self.metric_params.gap_ref = parse(key, value)?,
            "time_scale" => self.metric_params.time_scale = parse(key, value)?,
            "normalization" => {
                self.metric_params.normalization = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?
            }
            "dtw_band" => {
                self.metric_params.dtw_band = if value == "none" { None } else { Some(parse(key, value)?) }
            }
            "schedule_start" => self.schedule_start = parse(key, value)?,
            "schedule_end" => self.schedule_end = parse(key, value)?,
            "schedule_step" => self.schedule_step = parse(key, value)?,
            "full_schedule" => {
                if parse_bool(key, value)? {
                    self.schedule_start = 100;
                    self.schedule_end = 20;
                    self.schedule_step = 1;
                }
            }
            "shrink_policy" => self.shrink_policy = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            "prescreen" => self.prescreen = parse(key, value)?,
            "folds" => self.folds = parse(key, value)?,
            "sa_t0" => self.sa_params.t0 = parse(key, value)?,
            "sa_alpha" => self.sa_params.alpha = parse(key, value)?,
            "sa_iters" => self.sa_params.iters = parse(key, value)?,
            "lasso_path_len" => self.lasso_params.path_len = parse(key, value)?,
            "lasso_tol" => self.lasso_params.tol = parse(key, value)?,
            "lasso_max_sweeps" => self.lasso_params.max_sweeps = parse(key, value)?,
            "forest_trees" => self.forest_params.trees = parse(key, value)?,
            "forest_max_depth" => self.forest_params.max_depth = parse(key, value)?,
            "forest_min_leaf" => self.forest_params.min_leaf = parse(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "threads" => self.threads = Some(parse(key, value)?),
            other => return Err(Error::Config(format!("unknown setting `{other}`"))),
        }
        Ok(())
    }

    /// Checks everything that can be checked before data is loaded.
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if self.prescreen < self.k {
            return Err(Error::Config(format!(
                "prescreen ({}) must be >= k ({})",
                self.prescreen, self.k
            )));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be >= 2".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        if let (Some(a), Some(b)) = (self.start_date, self.end_date) {
            if a > b {
                return Err(Error::Config(format!("start_date {a} is after end_date {b}")));
            }
        }
        if let Some(s) = &self.synthetic {
            s.validate()?;
        }
        self.metric_params
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.schedule().map_err(|e| Error::Config(e.to_string()))?;
        let mut probe = self.selector_spec(self.methods[0]);
        probe.k = self.k;
        probe
            .validate(usize::MAX)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn schedule(&self) -> Result<ShrinkSchedule> {
        ShrinkSchedule::from_percent(
            self.schedule_start,
            self.schedule_end,
            self.schedule_step,
            self.shrink_policy,
        )
    }

    pub fn selector_spec(&self, method: Method) -> SelectorSpec {
        SelectorSpec {
            method,
            k: self.k,
            seed: self.seed,
            metric_params: self.metric_params.clone(),
            wrapper_prescreen: self.prescreen,
            folds: self.folds,
            sa_params: self.sa_params.clone(),
            lasso_params: self.lasso_params.clone(),
            forest_params: self.forest_params.clone(),
        }
    }

    pub fn selector_specs(&self) -> Vec<SelectorSpec> {
        self.methods.iter().map(|&m| self.selector_spec(m)).collect()
    }

    /// Synthetic spec in effect when no data directory is given.
    pub fn synthetic_or_default(&self) -> SyntheticSpec {
        self.synthetic.clone().unwrap_or_else(|| SyntheticSpec {
            horizon: self.horizon,
            ..SyntheticSpec::default()
        })
    }

    /// Loads (or generates) the series, aligns them and builds the horizon target.
    pub fn load_dataset(&self) -> Result<(AlignedDataset, String)> {
        let (series, source) = match &self.data_dir {
            Some(dir) => (
                load_dir(dir, self.start_date, self.end_date)?,
                format!("csv:{}", dir.display()),
            ),
            None => {
                let spec = self.synthetic_or_default();
                let data = generate_synthetic(&spec)?;
                let source = format!(
                    "synthetic:n_rows={},n_tickers={},planted_count={},noise_sigma={},seed={},horizon={}",
                    spec.n_rows, spec.n_tickers, spec.planted_count, spec.noise_sigma, spec.seed, spec.horizon
                );
                (data.series, source)
            }
        };
        let matrix = align(&series)?;
        Ok((build_horizon_target(&matrix, &self.target, self.horizon)?, source))
    }
}
