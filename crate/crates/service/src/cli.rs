//! Command-line front end. Every failure prints one line
//! `error: kind=<kind> code=<code> message=<text>` to stderr and exits with
//! the code of its kind.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use oatk_core::analysis::{image_metrics, residual_norm, unmix_nnls, ResidualOptions};
use oatk_core::io::{read_image, read_sinogram_with, read_spectra, read_stack, write_image};
use oatk_core::solver::Lambda;
use oatk_core::synthesis::{generate_dataset, PhantomKind, SourceItem, SynthesisConfig};
use oatk_core::{Error as CoreError, Sinogram};

use crate::bench::bench_stream;
use crate::config::{ConfigError, EngineConfig};
use crate::dataset::Dataset;
use crate::recon::{operator_for, preview_png, reconstruct, Method, ReconParams};
use crate::service::{serve, AppState};

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const IO: i32 = 4;
    pub const DATA: i32 = 5;
    pub const RUNTIME: i32 = 6;
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: exit::USAGE,
            kind: "usage",
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = self.message.replace('\n', " ");
        write!(f, "error: kind={} code={} message={}", self.kind, self.code, msg)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let (code, kind) = match &e {
            CoreError::Io { .. } => (exit::IO, "io"),
            CoreError::InvalidParameter(_) => (exit::USAGE, "usage"),
            CoreError::BadMagic { .. }
            | CoreError::UnsupportedVersion(_)
            | CoreError::Truncated { .. }
            | CoreError::DimensionMismatch(_)
            | CoreError::NonFinite(_)
            | CoreError::Parse(_)
            | CoreError::Raster(_)
            | CoreError::RankDeficient
            | CoreError::ZeroNorm(_) => (exit::DATA, "data"),
            _ => (exit::RUNTIME, "runtime"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        let (code, kind) = match e {
            ConfigError::Io { .. } => (exit::IO, "io"),
            _ => (exit::CONFIG, "config"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CoreError::Io {
        path: path.to_path_buf(),
        source: e,
    }
    .into()
}

#[derive(Debug, Parser)]
#[command(name = "oatk", version, about = "Optoacoustic tomography reconstruction toolkit")]
pub struct Cli {
    /// Engine config file; $OATK_CONFIG takes precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a dataset of sinograms from rasters or phantoms.
    Simulate {
        /// Raster file, directory of rasters, or phantom spec
        /// (`disks[:N]`, `points[:N]`, `cartoon`). Repeatable.
        #[arg(long, required = true)]
        input: Vec<String>,
        /// Items generated per phantom spec.
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Standard deviation of additive Gaussian noise.
        #[arg(long)]
        noise_std: Option<f64>,
        /// Skip the band-pass and leading-sample crop.
        #[arg(long)]
        no_acquisition_filters: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct one sinogram.
    Recon {
        #[arg(long, default_value = "bp")]
        method: Method,
        #[arg(long, default_value_t = 1500.0)]
        sos: f64,
        /// `auto` or a number; overrides the config for `mb`.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write an 8-bit PNG preview.
        #[arg(long)]
        preview: Option<PathBuf>,
        /// Reject speeds of sound off the configured grid, as the service does.
        #[arg(long)]
        enforce_grid: bool,
    },
    /// Compare a reconstruction with a reference image.
    Metrics {
        #[arg(long)]
        rec: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Engine config describing the operator for the residual norm.
        #[arg(long, requires = "sino")]
        op_config: Option<PathBuf>,
        #[arg(long)]
        sino: Option<PathBuf>,
        #[arg(long, default_value_t = 1500.0)]
        sos: f64,
        /// Rescale the reconstruction per metric before comparing.
        #[arg(long)]
        scale_per_metric: bool,
    },
    /// Non-negative least-squares spectral unmixing of an image stack.
    Unmix {
        #[arg(long)]
        stack: PathBuf,
        #[arg(long)]
        spectra: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Clip negative pixels before unmixing.
        #[arg(long)]
        clamp: bool,
    },
    /// Time reconstructions of a replayed frame stream.
    Bench {
        #[arg(long, default_value_t = 50)]
        frames: usize,
        /// Comma-separated methods.
        #[arg(long, default_value = "bp", value_delimiter = ',')]
        method: Vec<Method>,
        /// Dataset directory to replay; zero sinograms of the configured
        /// array otherwise.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value_t = 1500.0)]
        sos: f64,
        /// Run frames back to back instead of at 25 Hz.
        #[arg(long)]
        no_pace: bool,
    },
    /// Run the HTTP reconstruction service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            if code == exit::OK {
                let _ = e.print();
            } else {
                eprintln!("{}", CliError::usage(e.to_string().trim()));
            }
            return code;
        }
    };
    match run(cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("{e}");
            e.code
        }
    }
}

fn parse_lambda(v: &str) -> Result<Lambda, CliError> {
    if v == "auto" {
        return Ok(Lambda::Auto);
    }
    match v.parse::<f64>() {
        Ok(l) if l >= 0.0 && l.is_finite() => Ok(Lambda::Value(l)),
        _ => Err(CliError::usage(format!("bad --lambda {v:?}; expected auto or a number >= 0"))),
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = EngineConfig::from_env_or(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate {
            input,
            count,
            seed,
            noise_std,
            no_acquisition_filters,
            out,
        } => simulate(&cfg, &input, count, seed, noise_std, !no_acquisition_filters, &out),
        Command::Recon {
            method,
            sos,
            lambda,
            input,
            out,
            preview,
            enforce_grid,
        } => {
            if enforce_grid && !cfg.sos_grid.contains(sos) {
                return Err(CliError::usage(format!("speed of sound {sos} is off the configured grid")));
            }
            let s = read_sinogram_with(&input, &cfg.geometry)?;
            let params = ReconParams {
                lambda: lambda.as_deref().map(parse_lambda).transpose()?,
                ..ReconParams::new(method, sos)
            };
            let r = reconstruct(&cfg, &s, &params, None)?;
            write_image(&r.image, &out)?;
            if let Some(p) = preview {
                fs::write(&p, preview_png(&r.image)).map_err(|e| io_err(&p, e))?;
            }
            if let Some(report) = &r.solve {
                let mut side = out.clone().into_os_string();
                side.push(".report.txt");
                let side = PathBuf::from(side);
                fs::write(&side, report.to_sidecar()).map_err(|e| io_err(&side, e))?;
            }
            println!("method={method} sos_mps={sos} elapsed_ms={:.3}", r.elapsed_ms);
            match r.residual_norm {
                Some(v) => println!("residual_norm={v}"),
                None => println!("residual_norm=nan"),
            }
            Ok(())
        }
        Command::Metrics {
            rec,
            reference,
            op_config,
            sino,
            sos,
            scale_per_metric,
        } => {
            let rec = read_image(&rec)?;
            let reference = read_image(&reference)?;
            let mut m = image_metrics(&rec, &reference, scale_per_metric)?;
            if let Some(sino) = sino {
                let op_cfg = match op_config {
                    Some(p) => EngineConfig::load(p)?,
                    None => cfg.clone(),
                };
                let s: Sinogram = read_sinogram_with(&sino, &op_cfg.geometry)?;
                let mut op_cfg = op_cfg;
                op_cfg.image_size = rec.nx();
                op_cfg.fov_m = rec.fov_m[0];
                if rec.nx() != rec.ny() {
                    return Err(CliError::usage("residual norm needs a square image"));
                }
                let op = operator_for(&op_cfg, &s, sos)?;
                m.residual_norm = Some(residual_norm(&op, &rec, &s, ResidualOptions::EVALUATION)?);
            }
            if let Some(r) = m.residual_norm {
                println!("residual_norm={r}");
            }
            println!("mae={}\nmae_rel={}\nmse={}\nmse_rel={}\nssim={}", m.mae, m.mae_rel, m.mse, m.mse_rel, m.ssim);
            Ok(())
        }
        Command::Unmix {
            stack,
            spectra,
            out,
            clamp,
        } => {
            let stack = read_stack(&stack)?;
            let h = read_spectra(&spectra)?;
            let res = unmix_nnls(&stack, &h, clamp)?;
            fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
            let fov = stack.images[0].fov_m;
            for (k, name) in res.chromophores.iter().enumerate() {
                let file = out.join(format!("{name}.oaim"));
                write_image(&res.component_map(k, fov), &file)?;
                println!("{}", file.display());
            }
            Ok(())
        }
        Command::Bench {
            frames,
            method,
            dataset,
            sos,
            no_pace,
        } => {
            if frames == 0 {
                return Err(CliError::usage("--frames must be at least 1"));
            }
            let stream = match dataset {
                Some(dir) => Dataset::load(&dir, &cfg.geometry)?.frames,
                None => vec![Sinogram::zeros(&cfg.geometry)],
            };
            if stream.is_empty() {
                return Err(CliError::usage("dataset holds no frames"));
            }
            for m in method {
                let report = bench_stream(&cfg, m, sos, &stream, frames, !no_pace)?;
                for (i, l) in report.latencies_ms.iter().enumerate() {
                    println!("frame={i} method={m} latency_ms={l:.3}");
                }
                println!("{report}");
            }
            Ok(())
        }
        Command::Serve { addr } => {
            let state = AppState::load(cfg)?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError {
                code: exit::RUNTIME,
                kind: "runtime",
                message: e.to_string(),
            })?;
            rt.block_on(serve(state, addr)).map_err(|e| CliError {
                code: exit::IO,
                kind: "io",
                message: e.to_string(),
            })
        }
    }
}

fn is_raster(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
}

fn simulate(
    cfg: &EngineConfig,
    inputs: &[String],
    count: usize,
    seed: u64,
    noise_std: Option<f64>,
    acquisition_filters: bool,
    out: &Path,
) -> Result<(), CliError> {
    let mut sources = Vec::new();
    for input in inputs {
        let path = Path::new(input);
        if path.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| io_err(path, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| is_raster(p))
                .collect();
            files.sort();
            sources.extend(files.into_iter().map(SourceItem::Raster));
        } else if path.is_file() {
            sources.push(SourceItem::Raster(path.to_path_buf()));
        } else if let Ok(kind) = input.parse::<PhantomKind>() {
            sources.extend(std::iter::repeat_n(SourceItem::Phantom(kind), count));
        } else if is_raster(path) {
            return Err(io_err(path, std::io::ErrorKind::NotFound.into()));
        } else {
            return Err(CliError::usage(format!(
                "--input {input:?} is neither a file, a directory, nor a phantom spec"
            )));
        }
    }
    if sources.is_empty() {
        return Err(CliError::usage("no inputs to simulate"));
    }
    let syn = SynthesisConfig {
        image_size: cfg.image_size,
        fov_m: cfg.fov_m,
        sos_grid: cfg.sos_grid,
        rng_seed: seed,
        noise_std,
        apply_acquisition_filters: acquisition_filters,
        ..SynthesisConfig::default()
    };
    let manifest = generate_dataset(&sources, out, &cfg.geometry, cfg.eir.as_ref(), &syn)?;
    println!("items={} hash={}", manifest.items.len(), manifest.hash);
    Ok(())
}
