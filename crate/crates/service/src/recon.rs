//! The reconstruction path shared by the CLI, the HTTP service, and the
//! benchmark, so all three produce identical images for identical inputs.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::AtomicBool;
use std::time::Instant;

use image::{GrayImage, ImageFormat, Luma};
use oatk_core::acoustic::{delay_transform, DelayMode, ForwardOperator};
use oatk_core::analysis::{residual_norm, ResidualOptions};
use oatk_core::direct::{reconstruct_direct, DirectMethod, DirectReconConfig};
use oatk_core::shearlet::ShearletSystem;
use oatk_core::solver::{reconstruct_model_based_with, Lambda, SolveControl, SolveReport};
use oatk_core::{Error, Image, Result, Sinogram};
use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bp,
    Dmas,
    Mb,
    Delay,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Bp, Method::Dmas, Method::Mb, Method::Delay];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bp => "bp",
            Method::Dmas => "dmas",
            Method::Mb => "mb",
            Method::Delay => "delay",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method {s:?}; expected bp, dmas, mb or delay"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconParams {
    pub method: Method,
    pub sos_mps: f64,
    /// Overrides the configured weight for `mb`.
    pub lambda: Option<Lambda>,
    /// Compute the data residual norm of the result.
    pub with_residual: bool,
}

impl ReconParams {
    pub fn new(method: Method, sos_mps: f64) -> Self {
        Self {
            method,
            sos_mps,
            lambda: None,
            with_residual: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReconOutcome {
    pub image: Image,
    /// `None` when not requested or when the sinogram carries no energy
    /// within the model reach.
    pub residual_norm: Option<f64>,
    pub elapsed_ms: f64,
    pub sos_used: f64,
    pub solve: Option<SolveReport>,
}

/// Forward operator used for model-based solves and residuals: the
/// configured grid and EIR, the sinogram's own timing.
pub fn operator_for(cfg: &EngineConfig, s: &Sinogram, sos_mps: f64) -> Result<ForwardOperator> {
    ForwardOperator::new(s.geometry.clone(), cfg.grid(), sos_mps, cfg.eir.clone())
}

pub fn reconstruct(
    cfg: &EngineConfig,
    s: &Sinogram,
    params: &ReconParams,
    cancel: Option<&AtomicBool>,
) -> Result<ReconOutcome> {
    let start = Instant::now();
    let grid = cfg.grid();
    let sos = params.sos_mps;
    let mut op = None;
    let mut solve = None;
    let image = match params.method {
        Method::Bp => reconstruct_direct(
            s,
            &grid,
            &DirectReconConfig::new(DirectMethod::Backprojection, sos),
        )?,
        Method::Dmas => reconstruct_direct(s, &grid, &DirectReconConfig::new(DirectMethod::DmasCf, sos))?,
        Method::Delay => delay_transform(s, &grid, sos, DelayMode::Summed)?
            .into_summed()
            .expect("summed mode"),
        Method::Mb => {
            let m = operator_for(cfg, s, sos)?;
            let sys = ShearletSystem::new(grid.ny, grid.nx)?;
            let mut mb = cfg.mb.clone();
            if let Some(l) = params.lambda {
                mb.lambda = l;
            }
            let (img, report) =
                reconstruct_model_based_with(&m, &sys, s, &mb, SolveControl { cancel })?;
            solve = Some(report);
            op = Some(m);
            img
        }
    };
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let residual = if params.with_residual {
        let op = match op {
            Some(op) => op,
            None => operator_for(cfg, s, sos)?,
        };
        match residual_norm(&op, &image, s, ResidualOptions::EVALUATION) {
            Ok(r) => Some(r),
            Err(Error::ZeroNorm(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(ReconOutcome {
        image,
        residual_norm: residual,
        elapsed_ms,
        sos_used: sos,
        solve,
    })
}

/// 8-bit grayscale preview, window `[0, max]`; negatives render black. An
/// image without positive pixels renders all black.
pub fn preview(img: &Image) -> GrayImage {
    let hi = img.max();
    let scale = if hi > 0.0 { 255.0 / hi } else { 0.0 };
    let (ny, nx) = img.pixels.dim();
    GrayImage::from_fn(nx as u32, ny as u32, |x, y| {
        let v = img.pixels[[y as usize, x as usize]] * scale;
        Luma([v.round().clamp(0.0, 255.0) as u8])
    })
}

pub fn preview_png(img: &Image) -> Vec<u8> {
    let mut buf = std::io::Cursor::new(Vec::new());
    preview(img)
        .write_to(&mut buf, ImageFormat::Png)
        .expect("in-memory PNG encoding");
    buf.into_inner()
}
