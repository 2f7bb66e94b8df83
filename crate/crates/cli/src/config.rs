//! Flat key-value run configuration.
//!
//! The config file is plain text, one `key = value` per line, `#` starting
//! a comment. Lists are comma-separated; interpolation tables and degree
//! distributions use `x:y` pairs. Unknown keys are rejected so typos fail
//! loudly. Command-line flags override file values.

use std::collections::BTreeMap;
use std::path::Path;

use rateless_uep::broadcast::ScalingTable;
use rateless_uep::design::DegreeDistribution;
use rateless_uep::{Error, Result};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub k: usize,
    pub c: usize,
    pub d_max: usize,
    /// `None` means the built-in soliton-like profile at `d_max`.
    pub omega: Option<Vec<(usize, f64)>>,
    pub stability_check: bool,
    pub mu_floor: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub lambda: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub psi_target: Option<f64>,
    pub psi_tol: f64,
    pub psi_samples: usize,
    pub sigma2: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub n: Option<Vec<usize>>,
    pub eta: Option<Vec<f64>>,
    pub max_symbols: usize,
    pub trials: usize,
    pub seed: u64,
    pub certainty_low: f64,
    pub certainty_high: f64,
    pub alpha_table: Vec<(f64, f64)>,
    pub beta_table: Vec<(f64, f64)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            k: 256,
            c: 4,
            d_max: 16,
            omega: None,
            stability_check: true,
            mu_floor: rateless_uep::DEFAULT_MU_FLOOR,
            eps1: 0.05,
            eps2: 1e-4,
            lambda: 0.0,
            lambda_min: 0.0,
            lambda_max: 50.0,
            psi_target: None,
            psi_tol: 1e-3,
            psi_samples: 4096,
            sigma2: vec![0.5],
            alpha: vec![0.0],
            beta: vec![0.0],
            n: None,
            eta: None,
            max_symbols: 1_000_000,
            trials: 100,
            seed: 1,
            certainty_low: 0.5,
            certainty_high: 4.0,
            alpha_table: vec![(0.0, 2.0), (4.0, 0.5)],
            beta_table: vec![(0.0, 16.0), (16.0, 1.0)],
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path)?;
        let mut pairs = BTreeMap::new();
        for (idx, line) in body.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config(format!(
                "{}:{}: expected 'key = value'",
                path.display(),
                idx + 1
            )))?;
            pairs.insert(key.trim().to_string(), value.trim().to_string());
        }
        Self::from_pairs(pairs)
    }

    fn from_pairs(pairs: BTreeMap<String, String>) -> Result<Self> {
        let mut config = Self::default();
        for (key, value) in pairs {
            config.apply(&key, &value)?;
        }
        config.validate()?;
        Ok(config)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "k" => self.k = parse(key, value)?,
            "c" => self.c = parse(key, value)?,
            "d_max" => self.d_max = parse(key, value)?,
            "omega" => {
                self.omega = if value == "default" {
                    None
                } else {
                    Some(parse_pairs_usize(key, value)?)
                }
            }
            "stability_check" => self.stability_check = parse_bool(key, value)?,
            "mu_floor" => self.mu_floor = parse(key, value)?,
            "eps1" => self.eps1 = parse(key, value)?,
            "eps2" => self.eps2 = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            "lambda_min" => self.lambda_min = parse(key, value)?,
            "lambda_max" => self.lambda_max = parse(key, value)?,
            "psi_target" => self.psi_target = Some(parse(key, value)?),
            "psi_tol" => self.psi_tol = parse(key, value)?,
            "psi_samples" => self.psi_samples = parse(key, value)?,
            "sigma2" => self.sigma2 = parse_list(key, value)?,
            // dB form of the channel grid: SNR = 10 log10(1 / sigma2).
            "snr_db" => {
                let snrs: Vec<f64> = parse_list(key, value)?;
                self.sigma2 = snrs.iter().map(|db| 10f64.powf(-db / 10.0)).collect();
            }
            "alpha" => self.alpha = parse_list(key, value)?,
            "beta" => self.beta = parse_list(key, value)?,
            "n" => self.n = Some(parse_list(key, value)?),
            "eta" => self.eta = Some(parse_list(key, value)?),
            "max_symbols" => self.max_symbols = parse(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "certainty_low" => self.certainty_low = parse(key, value)?,
            "certainty_high" => self.certainty_high = parse(key, value)?,
            "alpha_table" => self.alpha_table = parse_pairs(key, value)?,
            "beta_table" => self.beta_table = parse_pairs(key, value)?,
            other => {
                return Err(Error::Config(format!("unknown config key '{other}'")));
            }
        }
        Ok(())
    }

    /// Checks the fields against the preconditions of the modules that
    /// consume them.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.c == 0 {
            return Err(Error::Config("c must be at least 1".into()));
        }
        self.degree_distribution()?;
        self.scaling_table()?;
        if self.sigma2.is_empty() || self.sigma2.iter().any(|&s| s < 0.0 || !s.is_finite()) {
            return Err(Error::Config("sigma2 values must be nonnegative".into()));
        }
        if !(self.psi_tol > 0.0) {
            return Err(Error::Config("psi_tol must be positive".into()));
        }
        if self.psi_samples == 0 {
            return Err(Error::Config("psi_samples must be at least 1".into()));
        }
        if !(self.lambda_max > self.lambda_min) {
            return Err(Error::Config("lambda_max must exceed lambda_min".into()));
        }
        if self.mu_floor < 0.0 {
            return Err(Error::Config("mu_floor must be nonnegative".into()));
        }
        if !(self.certainty_low > 0.0 && self.certainty_low <= self.certainty_high) {
            return Err(Error::Config(
                "certainty range must satisfy 0 < low <= high".into(),
            ));
        }
        if let Some(etas) = &self.eta {
            if etas.iter().any(|&e| e < 1.0) {
                return Err(Error::Config("eta values must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// The configured degree distribution, stability-checked when enabled.
    pub fn degree_distribution(&self) -> Result<DegreeDistribution> {
        let dist = match &self.omega {
            None => DegreeDistribution::default_profile(self.d_max)?,
            Some(pairs) => DegreeDistribution::from_pairs(
                &pairs.iter().map(|&(d, p)| (d, p)).collect::<Vec<_>>(),
            )?,
        };
        if self.stability_check {
            dist.check_stability()?;
        }
        dist.check_stream_len(self.k)?;
        Ok(dist)
    }

    pub fn scaling_table(&self) -> Result<ScalingTable> {
        ScalingTable::new(self.alpha_table.clone(), self.beta_table.clone())
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!(
            "key '{key}': expected true/false, got '{value}'"
        ))),
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|item| parse(key, item.trim())).collect()
}

fn parse_pairs(key: &str, value: &str) -> Result<Vec<(f64, f64)>> {
    value
        .split(',')
        .map(|item| {
            let (a, b) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("key '{key}': expected 'x:y' pairs")))?;
            Ok((parse(key, a.trim())?, parse(key, b.trim())?))
        })
        .collect()
}

fn parse_pairs_usize(key: &str, value: &str) -> Result<Vec<(usize, f64)>> {
    value
        .split(',')
        .map(|item| {
            let (a, b) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("key '{key}': expected 'd:p' pairs")))?;
            Ok((parse(key, a.trim())?, parse(key, b.trim())?))
        })
        .collect()
}
