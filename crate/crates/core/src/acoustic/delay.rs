//! Delay-domain transform and speed-of-sound encoding used as the fixed
//! front-end of learned reconstruction.

use ndarray::{Array1, Array2, Array3};
use rayon::prelude::*;

use super::operator::{check_sinogram, distance, sample_linear, sample_position};
use crate::data::{Image, ImageGrid, Sinogram};
use crate::error::{Error, Result};
use crate::geometry::SosGrid;

/// Upper bound on `n_detectors * n_pixels` for per-channel output; the full
/// 256 x 416 x 416 stack is about 177 MB of `f32`.
pub const DEFAULT_MAX_CHANNEL_VOXELS: usize = 256 * 416 * 416;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DelayMode {
    #[default]
    Summed,
    PerChannel,
}

#[derive(Debug, Clone)]
pub enum DelayOutput {
    Summed(Image),
    /// `[n_detectors, ny, nx]`.
    PerChannel(Array3<f32>),
}

impl DelayOutput {
    pub fn into_summed(self) -> Option<Image> {
        match self {
            DelayOutput::Summed(img) => Some(img),
            DelayOutput::PerChannel(_) => None,
        }
    }
}

/// Map every channel into image space along its travel-time arcs.
///
/// Pixel `j` of channel `d` takes the value of `s_d` at
/// `|r_d − r_j| / sos − t0`, linearly interpolated.
pub fn delay_transform(
    s: &Sinogram,
    grid: &ImageGrid,
    sos_mps: f64,
    mode: DelayMode,
) -> Result<DelayOutput> {
    delay_transform_limited(s, grid, sos_mps, mode, DEFAULT_MAX_CHANNEL_VOXELS)
}

pub fn delay_transform_limited(
    s: &Sinogram,
    grid: &ImageGrid,
    sos_mps: f64,
    mode: DelayMode,
    max_channel_voxels: usize,
) -> Result<DelayOutput> {
    let g = &s.geometry;
    check_sinogram(g, s)?;
    if !(sos_mps > 0.0) {
        return Err(Error::param("speed of sound must be positive"));
    }
    let fs = g.sampling_rate_hz;
    let t0 = g.t0_offset_samples as f64;
    let detectors = g.detector_positions();
    let pixels = grid.pixel_centers();
    let channels: Vec<Vec<f64>> = (0..s.n_detectors())
        .map(|d| s.samples.column(d).to_vec())
        .collect();
    match mode {
        DelayMode::Summed => {
            let values: Vec<f64> = pixels
                .par_iter()
                .map(|&pix| {
                    detectors
                        .iter()
                        .zip(&channels)
                        .map(|(&det, ch)| {
                            sample_linear(ch, sample_position(distance(det, pix), sos_mps, fs, t0))
                        })
                        .sum()
                })
                .collect();
            Ok(DelayOutput::Summed(Image {
                pixels: Array2::from_shape_vec((grid.ny, grid.nx), values).expect("grid"),
                fov_m: grid.fov_m,
            }))
        }
        DelayMode::PerChannel => {
            let voxels = detectors.len() * pixels.len();
            if voxels > max_channel_voxels {
                return Err(Error::param(format!(
                    "per-channel delay output of {voxels} voxels exceeds the limit of {max_channel_voxels}"
                )));
            }
            let planes: Vec<Vec<f32>> = detectors
                .par_iter()
                .zip(&channels)
                .map(|(&det, ch)| {
                    pixels
                        .iter()
                        .map(|&pix| {
                            sample_linear(ch, sample_position(distance(det, pix), sos_mps, fs, t0))
                                as f32
                        })
                        .collect()
                })
                .collect();
            let flat: Vec<f32> = planes.into_iter().flatten().collect();
            Ok(DelayOutput::PerChannel(
                Array3::from_shape_vec((detectors.len(), grid.ny, grid.nx), flat).expect("grid"),
            ))
        }
    }
}

/// One-hot indicator of `sos_mps` on `grid`.
pub fn one_hot_sos(sos_mps: f64, grid: &SosGrid) -> Result<Array1<f32>> {
    grid.validate()?;
    let idx = grid.index_of(sos_mps).ok_or_else(|| {
        Error::param(format!(
            "speed of sound {sos_mps} m/s is not on the grid {}..={} step {}",
            grid.min_mps, grid.max_mps, grid.step_mps
        ))
    })?;
    let mut v = Array1::zeros(grid.len());
    v[idx] = 1.0;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ArrayGeometry;

    #[test]
    fn one_hot_positions() {
        let grid = SosGrid::default();
        for (sos, idx) in [(1475.0, 0), (1525.0, 10), (1500.0, 5)] {
            let v = one_hot_sos(sos, &grid).unwrap();
            assert_eq!(v.len(), 11);
            assert_eq!(v.sum(), 1.0);
            assert_eq!(v[idx], 1.0);
        }
        assert!(one_hot_sos(1503.0, &grid).is_err());
        assert!(one_hot_sos(1470.0, &grid).is_err());
    }

    #[test]
    fn zero_sinogram_gives_zero_output() {
        let g = ArrayGeometry {
            n_detectors: 8,
            ..ArrayGeometry::default().with_time_window(400, 900)
        };
        let s = Sinogram::zeros(&g);
        let grid = ImageGrid::square(16, 0.004);
        let out = delay_transform(&s, &grid, 1500.0, DelayMode::Summed)
            .unwrap()
            .into_summed()
            .unwrap();
        assert!(out.pixels.iter().all(|&v| v == 0.0));
        match delay_transform(&s, &grid, 1500.0, DelayMode::PerChannel).unwrap() {
            DelayOutput::PerChannel(stack) => {
                assert_eq!(stack.dim(), (8, 16, 16));
                assert!(stack.iter().all(|&v| v == 0.0));
            }
            DelayOutput::Summed(_) => panic!("wrong mode"),
        }
    }

    #[test]
    fn per_channel_guard() {
        let g = ArrayGeometry {
            n_detectors: 8,
            ..ArrayGeometry::default().with_time_window(50, 0)
        };
        let s = Sinogram::zeros(&g);
        let grid = ImageGrid::square(16, 0.004);
        assert!(delay_transform_limited(&s, &grid, 1500.0, DelayMode::PerChannel, 100).is_err());
    }
}
