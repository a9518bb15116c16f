//! Engine configuration: a flat `key = value` UTF-8 file. `#` starts a
//! comment; blank lines are ignored; unknown keys are errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use oatk_core::acoustic::EirSpec;
use oatk_core::data::{ImageGrid, DEFAULT_FOV_M, DEFAULT_IMAGE_SIZE};
use oatk_core::solver::{Lambda, MbConfig};
use oatk_core::{ArrayGeometry, SosGrid};
use thiserror::Error;

/// Environment variable naming the config file; it takes precedence over the
/// `--config` flag.
pub const CONFIG_ENV: &str = "OATK_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {value:?}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(#[from] oatk_core::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub geometry: ArrayGeometry,
    pub sos_grid: SosGrid,
    /// `None` disables the EIR in the forward model.
    pub eir: Option<EirSpec>,
    pub mb: MbConfig,
    pub dataset_root: PathBuf,
    pub image_size: usize,
    pub fov_m: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            geometry: ArrayGeometry::default(),
            sos_grid: SosGrid::default(),
            eir: Some(EirSpec::default()),
            mb: MbConfig::default(),
            dataset_root: PathBuf::from("datasets"),
            image_size: DEFAULT_IMAGE_SIZE,
            fov_m: DEFAULT_FOV_M,
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "on" | "yes" | "1" => Some(true),
        "false" | "off" | "no" | "0" => Some(false),
        _ => None,
    }
}

impl EngineConfig {
    pub fn grid(&self) -> ImageGrid {
        ImageGrid::square(self.image_size, self.fov_m)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.geometry.validate()?;
        self.sos_grid.validate()?;
        if let Some(eir) = &self.eir {
            eir.validate(self.geometry.sampling_rate_hz)?;
        }
        self.mb.validate()?;
        if self.image_size == 0 || !(self.fov_m > 0.0) {
            return Err(oatk_core::Error::InvalidParameter(
                "image_size and fov_m must be positive".into(),
            )
            .into());
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut eir = EirSpec::default();
        let mut eir_on = true;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected key = value, got {content:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || ConfigError::BadValue {
                line,
                key: key.to_string(),
                value: value.to_string(),
            };
            let f = || value.parse::<f64>().map_err(|_| bad());
            let u = || value.parse::<usize>().map_err(|_| bad());
            let b = || parse_bool(value).ok_or_else(bad);
            let g = &mut cfg.geometry;
            match key {
                "n_detectors" => g.n_detectors = u()?,
                "concavity_radius_m" => g.concavity_radius_m = f()?,
                "angular_coverage_deg" => g.angular_coverage_deg = f()?,
                "center_of_curvature_x_m" => g.center_of_curvature_m[0] = f()?,
                "center_of_curvature_y_m" => g.center_of_curvature_m[1] = f()?,
                "sampling_rate_hz" => g.sampling_rate_hz = f()?,
                "n_time_samples" => g.n_time_samples = u()?,
                "t0_offset_samples" => g.t0_offset_samples = u()?,
                "sos_min_mps" => cfg.sos_grid.min_mps = f()?,
                "sos_max_mps" => cfg.sos_grid.max_mps = f()?,
                "sos_step_mps" => cfg.sos_grid.step_mps = f()?,
                "eir" => eir_on = b()?,
                "eir_center_frequency_hz" => eir.center_frequency_hz = f()?,
                "eir_fractional_bandwidth" => eir.fractional_bandwidth = f()?,
                "eir_filter_length_samples" => eir.filter_length_samples = u()?,
                "mb_lambda" => {
                    cfg.mb.lambda = if value == "auto" {
                        Lambda::Auto
                    } else {
                        Lambda::Value(f()?)
                    }
                }
                "mb_max_iters" => cfg.mb.max_iters = u()?,
                "mb_rel_obj_tol" => cfg.mb.rel_obj_tol = f()?,
                "mb_stall_iters" => cfg.mb.stall_iters = u()?,
                "mb_monotone" => cfg.mb.monotone = b()?,
                "mb_lcurve_iters" => cfg.mb.lcurve_iters = u()?,
                "mb_lcurve_points" => cfg.mb.lcurve_points = u()?,
                "image_size" => cfg.image_size = u()?,
                "fov_m" => cfg.fov_m = f()?,
                "dataset_root" => cfg.dataset_root = PathBuf::from(value),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }
        cfg.eir = eir_on.then_some(eir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Config path to use: `$OATK_CONFIG` if set, else `flag`.
    pub fn resolve_path(flag: Option<&Path>) -> Option<PathBuf> {
        std::env::var_os(CONFIG_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .or_else(|| flag.map(Path::to_path_buf))
    }

    /// Load from the resolved path, or defaults when there is none.
    pub fn from_env_or(flag: Option<&Path>) -> Result<Self, ConfigError> {
        match Self::resolve_path(flag) {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    /// Render as a config file that parses back to `self`.
    pub fn to_text(&self) -> String {
        let g = &self.geometry;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("n_detectors", g.n_detectors.to_string());
        kv("concavity_radius_m", g.concavity_radius_m.to_string());
        kv("angular_coverage_deg", g.angular_coverage_deg.to_string());
        kv("center_of_curvature_x_m", g.center_of_curvature_m[0].to_string());
        kv("center_of_curvature_y_m", g.center_of_curvature_m[1].to_string());
        kv("sampling_rate_hz", g.sampling_rate_hz.to_string());
        kv("n_time_samples", g.n_time_samples.to_string());
        kv("t0_offset_samples", g.t0_offset_samples.to_string());
        kv("sos_min_mps", self.sos_grid.min_mps.to_string());
        kv("sos_max_mps", self.sos_grid.max_mps.to_string());
        kv("sos_step_mps", self.sos_grid.step_mps.to_string());
        kv("eir", self.eir.is_some().to_string());
        let eir = self.eir.clone().unwrap_or_default();
        kv("eir_center_frequency_hz", eir.center_frequency_hz.to_string());
        kv("eir_fractional_bandwidth", eir.fractional_bandwidth.to_string());
        kv("eir_filter_length_samples", eir.filter_length_samples.to_string());
        kv(
            "mb_lambda",
            match self.mb.lambda {
                Lambda::Auto => "auto".to_string(),
                Lambda::Value(l) => l.to_string(),
            },
        );
        kv("mb_max_iters", self.mb.max_iters.to_string());
        kv("mb_rel_obj_tol", self.mb.rel_obj_tol.to_string());
        kv("mb_stall_iters", self.mb.stall_iters.to_string());
        kv("mb_monotone", self.mb.monotone.to_string());
        kv("mb_lcurve_iters", self.mb.lcurve_iters.to_string());
        kv("mb_lcurve_points", self.mb.lcurve_points.to_string());
        kv("image_size", self.image_size.to_string());
        kv("fov_m", self.fov_m.to_string());
        kv("dataset_root", self.dataset_root.display().to_string());
        s
    }
}
