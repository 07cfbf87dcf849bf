//! Flat key-value experiment configuration.
//!
//! One `key = value` per line; `#` starts a comment. Unknown or duplicate
//! keys are rejected so typos fail loudly instead of silently using a
//! default.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use stabcv_core::{
    log_uniform_grid, CacheMode, CvKind, Error, LearnerKind, ResponseColumn, Result, SynthConfig,
};

/// What a run does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Plain k-fold CV hyperparameter selection (stability weight 0).
    Kcv,
    /// Nested selection of the stability weight and hyperparameters.
    Nested,
    /// CV-vs-test error surfaces on a synthetic instance.
    Heatmap,
    /// Like `Kcv`, additionally reporting the generalization bound.
    Bound,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Kcv => "kcv",
            Mode::Nested => "nested",
            Mode::Heatmap => "heatmap",
            Mode::Bound => "bound",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "kcv" => Ok(Mode::Kcv),
            "nested" => Ok(Mode::Nested),
            "heatmap" => Ok(Mode::Heatmap),
            "bound" => Ok(Mode::Bound),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode '{other}' (expected kcv, nested, heatmap, or bound)"
            ))),
        }
    }
}

/// Where the data comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataSource {
    /// A CSV file on disk.
    Csv(PathBuf),
    /// The built-in synthetic generator (`dataset = synth`).
    Synth,
}

/// Synthetic-instance parameters from the config (seed comes per repeat).
#[derive(Debug, Clone, Copy)]
pub struct SynthSpec {
    pub n: usize,
    pub p: usize,
    pub tau_true: usize,
    pub rho: f64,
    pub nu: f64,
    pub n_test: usize,
}

impl SynthSpec {
    /// The full generator config for one repeat.
    pub fn config(&self, seed: u64) -> SynthConfig {
        SynthConfig {
            n: self.n,
            p: self.p,
            tau_true: self.tau_true,
            rho: self.rho,
            nu: self.nu,
            n_test: self.n_test,
            seed,
        }
    }
}

/// A fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub learner: Option<LearnerKind>,
    pub dataset: Option<DataSource>,
    pub synth: Option<SynthSpec>,
    pub k: usize,
    pub repeats: usize,
    pub test_fraction: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub lambda_grid: Vec<f64>,
    pub gamma_grid: Option<Vec<f64>>,
    pub tau_grid: Option<Vec<usize>>,
    pub depth_grid: Option<Vec<usize>>,
    pub min_samples_split_grid: Option<Vec<usize>>,
    pub cv: CvKind,
    pub m_bound: Option<f64>,
    pub delta: f64,
    pub max_cycles: usize,
    pub cache: CacheMode,
    pub has_header: bool,
    pub response_column: ResponseColumn,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Kcv,
            learner: None,
            dataset: None,
            synth: None,
            k: 5,
            repeats: 10,
            test_fraction: 0.1,
            seed: 0,
            output_dir: PathBuf::from("out"),
            lambda_grid: default_lambda_grid(),
            gamma_grid: None,
            tau_grid: None,
            depth_grid: None,
            min_samples_split_grid: None,
            cv: CvKind::Fivefold,
            m_bound: None,
            delta: 0.1,
            max_cycles: 10,
            cache: CacheMode::Full,
            has_header: true,
            response_column: ResponseColumn::Index(0),
        }
    }
}

/// Ten stability weights log-uniform on [1e-4, 1e4].
pub fn default_lambda_grid() -> Vec<f64> {
    log_uniform_grid(1e-4, 1e4, 10).expect("fixed grid parameters are valid")
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

/// Split `key = value` lines, dropping blanks and `#` comments.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {}: expected 'key = value'", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(config_err(format!("line {}: empty key", lineno + 1)));
        }
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(pairs)
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| config_err(format!("{key}: cannot parse '{s}'")))
        })
        .collect()
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| config_err(format!("{key}: cannot parse '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(config_err(format!("{key}: expected true or false, got '{value}'"))),
    }
}

impl ExperimentConfig {
    /// Parse a config from flat key-value text.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: HashMap<String, ()> = HashMap::new();
        let mut lambda_include_zero = false;
        let mut synth = SynthSpec {
            n: 0,
            p: 0,
            tau_true: 0,
            rho: f64::NAN,
            nu: f64::NAN,
            n_test: SynthConfig::DEFAULT_N_TEST,
        };
        let mut synth_keys = 0usize;

        for (key, value) in parse_key_values(text)? {
            if seen.insert(key.clone(), ()).is_some() {
                return Err(config_err(format!("duplicate key '{key}'")));
            }
            match key.as_str() {
                "mode" => cfg.mode = Mode::parse(&value)?,
                "learner" => cfg.learner = Some(LearnerKind::parse(&value)?),
                "dataset" => {
                    cfg.dataset = Some(if value == "synth" {
                        DataSource::Synth
                    } else {
                        DataSource::Csv(PathBuf::from(&value))
                    })
                }
                "k" => cfg.k = parse_scalar(&key, &value)?,
                "repeats" => cfg.repeats = parse_scalar(&key, &value)?,
                "test_fraction" => cfg.test_fraction = parse_scalar(&key, &value)?,
                "seed" => cfg.seed = parse_scalar(&key, &value)?,
                "output_dir" => cfg.output_dir = PathBuf::from(&value),
                "lambda_grid" => cfg.lambda_grid = parse_list(&key, &value)?,
                "lambda_include_zero" => lambda_include_zero = parse_bool(&key, &value)?,
                "gamma_grid" => cfg.gamma_grid = Some(parse_list(&key, &value)?),
                "tau_grid" => cfg.tau_grid = Some(parse_list(&key, &value)?),
                "depth_grid" => cfg.depth_grid = Some(parse_list(&key, &value)?),
                "min_samples_split_grid" => {
                    cfg.min_samples_split_grid = Some(parse_list(&key, &value)?)
                }
                "n" => {
                    synth.n = parse_scalar(&key, &value)?;
                    synth_keys += 1;
                }
                "p" => {
                    synth.p = parse_scalar(&key, &value)?;
                    synth_keys += 1;
                }
                "tau_true" => {
                    synth.tau_true = parse_scalar(&key, &value)?;
                    synth_keys += 1;
                }
                "rho" => {
                    synth.rho = parse_scalar(&key, &value)?;
                    synth_keys += 1;
                }
                "nu" => {
                    synth.nu = parse_scalar(&key, &value)?;
                    synth_keys += 1;
                }
                "n_test" => {
                    synth.n_test = parse_scalar(&key, &value)?;
                    synth_keys += 1;
                }
                "cv" => cfg.cv = CvKind::parse(&value)?,
                "m_bound" => cfg.m_bound = Some(parse_scalar(&key, &value)?),
                "delta" => cfg.delta = parse_scalar(&key, &value)?,
                "max_cycles" => cfg.max_cycles = parse_scalar(&key, &value)?,
                "cache" => {
                    cfg.cache = match value.as_str() {
                        "full" => CacheMode::Full,
                        "scoped" => CacheMode::Scoped,
                        other => {
                            return Err(config_err(format!(
                                "cache: expected full or scoped, got '{other}'"
                            )))
                        }
                    }
                }
                "has_header" => cfg.has_header = parse_bool(&key, &value)?,
                "response_column" => {
                    cfg.response_column = match value.parse::<usize>() {
                        Ok(i) => ResponseColumn::Index(i),
                        Err(_) => ResponseColumn::Name(value.clone()),
                    }
                }
                other => return Err(config_err(format!("unknown key '{other}'"))),
            }
        }

        if lambda_include_zero && cfg.lambda_grid.first() != Some(&0.0) {
            cfg.lambda_grid.insert(0, 0.0);
        }
        if synth_keys > 0 {
            cfg.synth = Some(synth);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load and parse a config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    /// Basic value checks; mode-specific requirements are checked where
    /// the mode runs.
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(config_err(format!("k must be at least 2, got {}", self.k)));
        }
        if self.repeats == 0 {
            return Err(config_err("repeats must be at least 1"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(config_err(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.lambda_grid.is_empty() {
            return Err(config_err("lambda_grid must be nonempty"));
        }
        for &l in &self.lambda_grid {
            if !(l.is_finite() && l >= 0.0) {
                return Err(config_err(format!(
                    "lambda_grid entries must be finite and >= 0, got {l}"
                )));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(config_err(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if let Some(m) = self.m_bound {
            if !(m.is_finite() && m > 0.0) {
                return Err(config_err(format!(
                    "m_bound must be finite and positive, got {m}"
                )));
            }
        }
        if self.max_cycles == 0 {
            return Err(config_err("max_cycles must be at least 1"));
        }
        if let Some(spec) = &self.synth {
            // Full synthetic validation happens in the generator; here we
            // only insist the required keys were all given.
            if spec.n == 0 || spec.p == 0 || spec.tau_true == 0 {
                return Err(config_err("synth spec needs n, p, and tau_true"));
            }
            if spec.rho.is_nan() || spec.nu.is_nan() {
                return Err(config_err("synth spec needs rho and nu"));
            }
        }
        Ok(())
    }

    /// The synthetic spec, required when the dataset source is `synth`.
    pub fn synth_spec(&self) -> Result<SynthSpec> {
        self.synth
            .ok_or_else(|| config_err("dataset = synth requires n, p, tau_true, rho, and nu"))
    }
}
