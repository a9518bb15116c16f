//! Synthetic training and validation data: rasters to initial pressure,
//! forward simulation at a random grid speed of sound and random amplitude,
//! the in vivo acquisition filters, and the network preprocessing pair.

mod dataset;
mod phantom;

pub use dataset::{generate_dataset, manifest_hash, DatasetItem, Manifest, SourceItem, MANIFEST_FILE};
pub use phantom::{make_phantom, PhantomKind, MIN_PHANTOM_SIZE};

use std::path::Path;

use image::imageops::{self, FilterType};
use image::{DynamicImage, ImageBuffer, Luma};
use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::acoustic::{bandpass_filter, crop_leading_samples, EirSpec, ForwardOperator};
use crate::data::{Image, ImageGrid, Sinogram, DEFAULT_FOV_M, DEFAULT_IMAGE_SIZE};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, SosGrid};

/// Network input/target scaling constant `K`.
pub const PREPROCESS_SCALE: f64 = 1.0 / 450.0;
/// Band edges of the acquisition band-pass.
pub const ACQUISITION_BAND_HZ: (f64, f64) = (100e3, 12e6);
/// Leading samples removed after band-pass filtering.
pub const ACQUISITION_CROP_SAMPLES: usize = 110;

const LUMA: [f64; 3] = [0.2126, 0.7152, 0.0722];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    pub image_size: usize,
    pub fov_m: f64,
    pub sos_grid: SosGrid,
    pub amplitude_scale_range: (f64, f64),
    pub rng_seed: u64,
    /// Standard deviation of additive white Gaussian noise, applied after
    /// scaling. `None` for noise-free data.
    pub noise_std: Option<f64>,
    pub apply_acquisition_filters: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            image_size: DEFAULT_IMAGE_SIZE,
            fov_m: DEFAULT_FOV_M,
            sos_grid: SosGrid::default(),
            amplitude_scale_range: (0.0, 450.0),
            rng_seed: 0,
            noise_std: None,
            apply_acquisition_filters: true,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        self.sos_grid.validate()?;
        let (lo, hi) = self.amplitude_scale_range;
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::param(format!(
                "amplitude scale range must satisfy 0 <= lo <= hi, got [{lo}, {hi}]"
            )));
        }
        if let Some(sd) = self.noise_std {
            if !(sd >= 0.0 && sd.is_finite()) {
                return Err(Error::param("noise std must be finite and non-negative"));
            }
        }
        if self.image_size == 0 || !(self.fov_m > 0.0) {
            return Err(Error::param("image size and field of view must be positive"));
        }
        Ok(())
    }

    pub fn grid(&self) -> ImageGrid {
        ImageGrid::square(self.image_size, self.fov_m)
    }
}

/// Luminosity grayscale of an RGB raster, before any normalization.
pub fn luminance(raster: &DynamicImage) -> Array2<f64> {
    let rgb = raster.to_rgb32f();
    let (w, h) = rgb.dimensions();
    Array2::from_shape_fn((h as usize, w as usize), |(r, c)| {
        let p = rgb.get_pixel(c as u32, r as u32).0;
        LUMA[0] * p[0] as f64 + LUMA[1] * p[1] as f64 + LUMA[2] * p[2] as f64
    })
}

/// Grayscale, bilinear resize to `size × size`, and division by the maximum.
/// An all-black raster yields the zero image.
pub fn raster_to_initial_pressure(raster: &DynamicImage, size: usize, fov_m: f64) -> Result<Image> {
    if raster.width() == 0 || raster.height() == 0 {
        return Err(Error::Raster("empty raster".into()));
    }
    if size == 0 {
        return Err(Error::param("image size must be positive"));
    }
    let gray = luminance(raster);
    let (h, w) = gray.dim();
    let buf: ImageBuffer<Luma<f32>, Vec<f32>> =
        ImageBuffer::from_fn(w as u32, h as u32, |c, r| Luma([gray[[r as usize, c as usize]] as f32]));
    let resized = if (w, h) == (size, size) {
        buf
    } else {
        imageops::resize(&buf, size as u32, size as u32, FilterType::Triangle)
    };
    let mut px = Array2::from_shape_fn((size, size), |(r, c)| {
        (resized.get_pixel(c as u32, r as u32).0[0] as f64).max(0.0)
    });
    let max = px.iter().fold(0.0f64, |m, &v| m.max(v));
    if max > 0.0 {
        px.mapv_inplace(|v| (v / max).min(1.0));
    }
    Image::new(px, [fov_m, fov_m])
}

pub fn image_to_initial_pressure(path: impl AsRef<Path>, size: usize, fov_m: f64) -> Result<Image> {
    let path = path.as_ref();
    let raster = image::open(path).map_err(|e| Error::Raster(format!("{}: {e}", path.display())))?;
    raster_to_initial_pressure(&raster, size, fov_m)
}

/// Synthetic sinogram with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub sinogram: Sinogram,
    pub sos_mps: f64,
    pub scale: f64,
}

/// Apply the in vivo band-pass and leading-sample crop.
pub fn apply_acquisition_filters(s: &Sinogram) -> Result<Sinogram> {
    let (lo, hi) = ACQUISITION_BAND_HZ;
    crop_leading_samples(&bandpass_filter(s, lo, hi)?, ACQUISITION_CROP_SAMPLES)
}

/// Forward-simulate `p` at a speed of sound drawn from the grid, scaled by an
/// amplitude drawn uniformly from the configured range. The draws happen in a
/// fixed order (speed of sound, scale, noise), so a seeded `rng` reproduces
/// the output exactly.
pub fn synthesize_sinogram<R: Rng + ?Sized>(
    p: &Image,
    geometry: &ArrayGeometry,
    eir: Option<&EirSpec>,
    cfg: &SynthesisConfig,
    rng: &mut R,
) -> Result<Synthesized> {
    cfg.validate()?;
    p.validate()?;
    let grid_values = cfg.sos_grid.values();
    let sos_mps = grid_values[rng.random_range(0..grid_values.len())];
    let (lo, hi) = cfg.amplitude_scale_range;
    let scale = if hi > lo { rng.random_range(lo..=hi) } else { lo };

    let op = ForwardOperator::new(geometry.clone(), p.grid(), sos_mps, eir.cloned())?;
    let mut s = op.forward(p)?.scaled(scale);
    if let Some(sd) = cfg.noise_std.filter(|&sd| sd > 0.0) {
        let normal = Normal::new(0.0, sd).map_err(|e| Error::param(e.to_string()))?;
        s.samples.mapv_inplace(|v| v + normal.sample(rng));
    }
    if cfg.apply_acquisition_filters {
        s = apply_acquisition_filters(&s)?;
    }
    Ok(Synthesized {
        sinogram: s,
        sos_mps,
        scale,
    })
}

/// Network input and target: `K·s` and `√(K·p)`.
pub fn preprocess_pair(s: &Sinogram, target: &Image) -> Result<(Sinogram, Image)> {
    if target.pixels.iter().any(|&v| v < 0.0) {
        return Err(Error::param("preprocessing target has negative pixels"));
    }
    let t = target.pixels.mapv(|v| (PREPROCESS_SCALE * v).sqrt());
    Ok((s.scaled(PREPROCESS_SCALE), Image::new(t, target.fov_m)?))
}

/// Inverse of the target transform: `x² / K`.
pub fn postprocess_image(x: &Image) -> Image {
    Image {
        pixels: x.pixels.mapv(|v| v * v / PREPROCESS_SCALE),
        fov_m: x.fov_m,
    }
}
