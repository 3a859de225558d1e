use std::path::{Path, PathBuf};

use ductsr::filterlang::{ConstraintProgram, Feature};
use ductsr::flowgen::{DuctGeometry, TEST_GRADIENTS, TRAIN_GRADIENTS};
use ductsr::sr::SrConfig;

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DUCTSR_OUT";
pub const DEFAULT_OUT_DIR: &str = "ductsr-out";

/// Everything a run needs. Built from defaults, then `DUCTSR_OUT`, then a
/// `key = value` file, then command-line overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: DuctGeometry,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub c_train: Vec<f64>,
    pub c_test: Vec<f64>,
    pub sr: SrConfig,
    pub constraints: ConstraintProgram,
    /// Axial position used for the profile and grid CSVs of `report`.
    pub x_station: Option<f64>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: DuctGeometry::default(),
            nx: 11,
            ny: 101,
            nz: 101,
            c_train: TRAIN_GRADIENTS.to_vec(),
            c_test: TEST_GRADIENTS.to_vec(),
            sr: SrConfig::default(),
            constraints: ConstraintProgram::default(),
            x_station: None,
            out_dir: PathBuf::from(DEFAULT_OUT_DIR),
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Input(format!("`{key}`: cannot parse `{value}`")))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn features(key: &str, value: &str) -> Result<Vec<Feature>, CliError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e| CliError::Input(format!("`{key}`: {e}"))))
        .collect()
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key.trim() {
            "length" => self.geometry.length = num(key, v)?,
            "height" => self.geometry.height = num(key, v)?,
            "width" => self.geometry.width = num(key, v)?,
            "nx" => self.nx = num(key, v)?,
            "ny" => self.ny = num(key, v)?,
            "nz" => self.nz = num(key, v)?,
            "c_train" => self.c_train = list(key, v)?,
            "c_test" => self.c_test = list(key, v)?,
            "n_iterations" | "iterations" => self.sr.n_iterations = num(key, v)?,
            "max_size" => self.sr.max_size = num(key, v)?,
            "population_size" => self.sr.population_size = num(key, v)?,
            "tournament_size" => self.sr.tournament_size = num(key, v)?,
            "p_crossover" => self.sr.p_crossover = num(key, v)?,
            "p_mutation" => self.sr.p_mutation = num(key, v)?,
            "constant_optimizer_steps" => self.sr.constant_optimizer_steps = num(key, v)?,
            "polish_steps" => self.sr.polish_steps = num(key, v)?,
            "max_samples" => {
                self.sr.max_samples = if v.eq_ignore_ascii_case("all") {
                    None
                } else {
                    Some(num(key, v)?)
                }
            }
            "seed" | "rng_seed" => self.sr.rng_seed = num(key, v)?,
            "max_complexity" => self.constraints.max_complexity = Some(num(key, v)?),
            "max_loss" => self.constraints.max_loss = Some(num(key, v)?),
            "forbid" => self.constraints.forbidden_features = features(key, v)?.into_iter().collect(),
            "require" => self.constraints.required_features = features(key, v)?.into_iter().collect(),
            "x_station" => self.x_station = Some(num(key, v)?),
            "out_dir" => self.out_dir = PathBuf::from(v),
            other => return Err(CliError::Input(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("{origin}:{}: expected `key = value`", i + 1)))?;
            self.set(k, v)
                .map_err(|e| CliError::Input(format!("{origin}:{}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Defaults, then `DUCTSR_OUT`, then the file, then `overrides` in order.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            cfg.out_dir = PathBuf::from(dir);
        }
        if let Some(path) = file {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            cfg.apply_text(&text, &path.display().to_string())?;
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    /// Checks the flow and search settings that can be checked without running.
    pub fn validate(&self) -> Result<(), CliError> {
        self.geometry.validate().map_err(|e| CliError::Input(e.to_string()))?;
        for (name, n) in [("ny", self.ny), ("nz", self.nz)] {
            if n < 17 || n % 2 == 0 {
                return Err(CliError::Input(format!("{name} must be odd and at least 17, got {n}")));
            }
        }
        if self.nx < 2 {
            return Err(CliError::Input(format!("nx must be at least 2, got {}", self.nx)));
        }
        if self.c_train.is_empty() || self.c_test.is_empty() {
            return Err(CliError::Input("c_train and c_test must not be empty".into()));
        }
        if let Some(c) = self
            .c_train
            .iter()
            .chain(&self.c_test)
            .find(|c| !(c.is_finite() && **c < 0.0))
        {
            return Err(CliError::Input(format!("pressure gradients must be negative, got {c}")));
        }
        if let Some(x) = self.x_station {
            if !(0.0..=self.geometry.length).contains(&x) {
                return Err(CliError::Input(format!(
                    "x_station {x} lies outside [0, {}]",
                    self.geometry.length
                )));
            }
        }
        self.sr.validate().map_err(|e| CliError::Input(e.to_string()))
    }
}
