//! Non-iterative reconstructions: universal backprojection and
//! delay-multiply-and-sum with coherence factor.

use ndarray::Array2;
use rayon::prelude::*;

use crate::acoustic::{check_sinogram, distance, sample_linear, sample_position};
use crate::data::{Image, ImageGrid, Sinogram};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectMethod {
    Backprojection,
    DmasCf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectReconConfig {
    pub method: DirectMethod,
    pub sos_mps: f64,
    pub clamp_negatives: bool,
}

impl DirectReconConfig {
    pub fn new(method: DirectMethod, sos_mps: f64) -> Self {
        Self {
            method,
            sos_mps,
            clamp_negatives: false,
        }
    }
}

pub fn reconstruct_direct(s: &Sinogram, grid: &ImageGrid, cfg: &DirectReconConfig) -> Result<Image> {
    let img = match cfg.method {
        DirectMethod::Backprojection => backproject(s, grid, cfg.sos_mps)?,
        DirectMethod::DmasCf => dmas_cf(s, grid, cfg.sos_mps)?,
    };
    Ok(if cfg.clamp_negatives {
        img.clamped_non_negative()
    } else {
        img
    })
}

/// `b(t) = 2 p(t) − 2 t p'(t)` on the sample grid, with `t` measured from the
/// laser pulse and central differences in the interior.
fn ubp_term(ch: &[f64], t0_samples: f64) -> Vec<f64> {
    let n = ch.len();
    (0..n)
        .map(|i| {
            let deriv = if n < 2 {
                0.0
            } else if i == 0 {
                ch[1] - ch[0]
            } else if i == n - 1 {
                ch[n - 1] - ch[n - 2]
            } else {
                0.5 * (ch[i + 1] - ch[i - 1])
            };
            // t * dp/dt in samples: both factors carry 1/fs and fs, which cancel.
            2.0 * ch[i] - 2.0 * (i as f64 + t0_samples) * deriv
        })
        .collect()
}

fn gather<F>(s: &Sinogram, grid: &ImageGrid, sos_mps: f64, per_pixel: F) -> Result<Image>
where
    F: Fn(&mut dyn Iterator<Item = f64>) -> f64 + Sync,
{
    check_sinogram(&s.geometry, s)?;
    if !(sos_mps > 0.0) {
        return Err(Error::param("speed of sound must be positive"));
    }
    Ok(gather_channels(s, grid, sos_mps, |ch| ch.to_vec(), per_pixel))
}

fn gather_channels<P, F>(
    s: &Sinogram,
    grid: &ImageGrid,
    sos_mps: f64,
    prepare: P,
    per_pixel: F,
) -> Image
where
    P: Fn(&[f64]) -> Vec<f64> + Sync,
    F: Fn(&mut dyn Iterator<Item = f64>) -> f64 + Sync,
{
    let g = &s.geometry;
    let fs = g.sampling_rate_hz;
    let t0 = g.t0_offset_samples as f64;
    let detectors = g.detector_positions();
    let channels: Vec<Vec<f64>> = (0..s.n_detectors())
        .into_par_iter()
        .map(|d| prepare(&s.samples.column(d).to_vec()))
        .collect();
    let values: Vec<f64> = grid
        .pixel_centers()
        .par_iter()
        .map(|&pix| {
            let mut delayed = detectors.iter().zip(&channels).map(|(&det, ch)| {
                sample_linear(ch, sample_position(distance(det, pix), sos_mps, fs, t0))
            });
            per_pixel(&mut delayed)
        })
        .collect();
    Image {
        pixels: Array2::from_shape_vec((grid.ny, grid.nx), values).expect("grid"),
        fov_m: grid.fov_m,
    }
}

/// Universal backprojection with uniform detector weights. The output is
/// linear in `s` and may be negative.
pub fn backproject(s: &Sinogram, grid: &ImageGrid, sos_mps: f64) -> Result<Image> {
    check_sinogram(&s.geometry, s)?;
    if !(sos_mps > 0.0) {
        return Err(Error::param("speed of sound must be positive"));
    }
    let t0 = s.geometry.t0_offset_samples as f64;
    let weight = 1.0 / s.n_detectors() as f64;
    Ok(gather_channels(
        s,
        grid,
        sos_mps,
        |ch| ubp_term(ch, t0),
        |delayed| weight * delayed.sum::<f64>(),
    ))
}

/// DMAS and coherence factor of one pixel's delayed samples.
///
/// `DMAS = Σ_{i<j} sign(s_i s_j) √|s_i s_j|` and
/// `CF = (Σ s_i)² / (N Σ s_i²)`, with `CF = 0` when every sample is zero.
pub fn dmas_cf_samples(samples: &[f64]) -> (f64, f64) {
    let (dmas, cf) = accumulate(&mut samples.iter().copied());
    (dmas, cf)
}

fn accumulate(samples: &mut dyn Iterator<Item = f64>) -> (f64, f64) {
    // Σ_{i<j} y_i y_j with y_i = sign(s_i) √|s_i|, accumulated against the
    // running prefix sum of earlier y.
    let (mut n, mut sum, mut sum_sq, mut prefix, mut dmas) = (0usize, 0.0, 0.0, 0.0, 0.0);
    for v in samples {
        n += 1;
        sum += v;
        sum_sq += v * v;
        let y = v.signum() * v.abs().sqrt();
        dmas += y * prefix;
        prefix += y;
    }
    let cf = if sum_sq == 0.0 {
        0.0
    } else {
        sum * sum / (n as f64 * sum_sq)
    };
    (dmas, cf)
}

/// Delay-multiply-and-sum weighted by the coherence factor, without a
/// post-multiplication band-pass.
pub fn dmas_cf(s: &Sinogram, grid: &ImageGrid, sos_mps: f64) -> Result<Image> {
    gather(s, grid, sos_mps, |delayed| {
        let (dmas, cf) = accumulate(delayed);
        dmas * cf
    })
}

/// Coherence factor map alone, used for diagnostics.
pub fn coherence_factor(s: &Sinogram, grid: &ImageGrid, sos_mps: f64) -> Result<Image> {
    gather(s, grid, sos_mps, |delayed| accumulate(delayed).1)
}
