//! Value types passed between the reconstruction stages.

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;

/// Time-major pressure record: `samples[[t, d]]` is detector `d` at sample `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    pub samples: Array2<f64>,
    pub geometry: ArrayGeometry,
    pub wavelength_nm: Option<f64>,
}

impl Sinogram {
    pub fn new(samples: Array2<f64>, geometry: ArrayGeometry) -> Result<Self> {
        let s = Self {
            samples,
            geometry,
            wavelength_nm: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn zeros(geometry: &ArrayGeometry) -> Self {
        Self {
            samples: Array2::zeros((geometry.n_time_samples, geometry.n_detectors)),
            geometry: geometry.clone(),
            wavelength_nm: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        let (nt, nd) = self.samples.dim();
        if nt != self.geometry.n_time_samples || nd != self.geometry.n_detectors {
            return Err(Error::dims(format!(
                "sinogram is {nt}x{nd} but geometry expects {}x{}",
                self.geometry.n_time_samples, self.geometry.n_detectors
            )));
        }
        if !self.samples.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("sinogram"));
        }
        Ok(())
    }

    pub fn n_time(&self) -> usize {
        self.samples.nrows()
    }

    pub fn n_detectors(&self) -> usize {
        self.samples.ncols()
    }

    pub fn norm_sq(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }

    pub fn dot(&self, other: &Sinogram) -> f64 {
        Zip::from(&self.samples)
            .and(&other.samples)
            .fold(0.0, |acc, a, b| acc + a * b)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: &self.samples * factor,
            ..self.clone()
        }
    }
}

/// Pixel grid of an image: `ny` rows by `nx` columns spanning `fov_m`,
/// centered on the image-coordinate origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageGrid {
    pub ny: usize,
    pub nx: usize,
    pub fov_m: [f64; 2],
}

impl ImageGrid {
    pub fn new(ny: usize, nx: usize, fov_m: [f64; 2]) -> Self {
        Self { ny, nx, fov_m }
    }

    /// `n x n` pixels over a square field of view of side `fov_m`.
    pub fn square(n: usize, fov_m: f64) -> Self {
        Self::new(n, n, [fov_m, fov_m])
    }

    pub fn len(&self) -> usize {
        self.ny * self.nx
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pitch(&self) -> [f64; 2] {
        [self.fov_m[0] / self.nx as f64, self.fov_m[1] / self.ny as f64]
    }

    pub fn pixel_center(&self, row: usize, col: usize) -> [f64; 2] {
        let [dx, dy] = self.pitch();
        [
            -0.5 * self.fov_m[0] + (col as f64 + 0.5) * dx,
            0.5 * self.fov_m[1] - (row as f64 + 0.5) * dy,
        ]
    }

    /// Pixel centers in row-major order.
    pub fn pixel_centers(&self) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(self.len());
        for r in 0..self.ny {
            for c in 0..self.nx {
                out.push(self.pixel_center(r, c));
            }
        }
        out
    }

    pub fn zeros(&self) -> Image {
        Image::zeros(self.ny, self.nx, self.fov_m)
    }
}

impl Default for ImageGrid {
    fn default() -> Self {
        Self::square(DEFAULT_IMAGE_SIZE, DEFAULT_FOV_M)
    }
}

/// Square-pixel raster of initial pressure, `pixels[[row, col]]` with row 0
/// nearest the probe (largest `y`).
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub pixels: Array2<f64>,
    /// Physical side lengths `[x, y]` in meters.
    pub fov_m: [f64; 2],
}

pub const DEFAULT_FOV_M: f64 = 0.0416;
pub const DEFAULT_IMAGE_SIZE: usize = 416;

impl Image {
    pub fn new(pixels: Array2<f64>, fov_m: [f64; 2]) -> Result<Self> {
        let img = Self { pixels, fov_m };
        img.validate()?;
        Ok(img)
    }

    pub fn zeros(ny: usize, nx: usize, fov_m: [f64; 2]) -> Self {
        Self {
            pixels: Array2::zeros((ny, nx)),
            fov_m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (ny, nx) = self.pixels.dim();
        if nx == 0 || ny == 0 {
            return Err(Error::dims("image must have at least one pixel"));
        }
        if !(self.fov_m[0] > 0.0 && self.fov_m[1] > 0.0) {
            return Err(Error::param("field of view must be positive"));
        }
        if !self.pixels.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("image"));
        }
        Ok(())
    }

    pub fn ny(&self) -> usize {
        self.pixels.nrows()
    }

    pub fn nx(&self) -> usize {
        self.pixels.ncols()
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn grid(&self) -> ImageGrid {
        ImageGrid::new(self.ny(), self.nx(), self.fov_m)
    }

    /// Pixel pitch `[dx, dy]`.
    pub fn pitch(&self) -> [f64; 2] {
        self.grid().pitch()
    }

    /// Physical center of pixel `(row, col)`.
    pub fn pixel_center(&self, row: usize, col: usize) -> [f64; 2] {
        self.grid().pixel_center(row, col)
    }

    pub fn norm_sq(&self) -> f64 {
        self.pixels.iter().map(|v| v * v).sum()
    }

    pub fn dot(&self, other: &Image) -> f64 {
        Zip::from(&self.pixels)
            .and(&other.pixels)
            .fold(0.0, |acc, a, b| acc + a * b)
    }

    pub fn clamped_non_negative(&self) -> Self {
        Self {
            pixels: self.pixels.mapv(|v| v.max(0.0)),
            fov_m: self.fov_m,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            pixels: &self.pixels * factor,
            fov_m: self.fov_m,
        }
    }

    pub fn max(&self) -> f64 {
        self.pixels.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(row, col)` of the largest pixel.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_v = f64::NEG_INFINITY;
        for ((r, c), &v) in self.pixels.indexed_iter() {
            if v > best_v {
                best_v = v;
                best = (r, c);
            }
        }
        best
    }
}

/// Images of one scan position at increasing wavelengths.
#[derive(Debug, Clone)]
pub struct MultispectralStack {
    pub images: Vec<Image>,
    pub wavelengths_nm: Vec<f64>,
}

/// Default acquisition wavelengths: 700 to 980 nm in 10 nm steps.
pub fn default_wavelengths_nm() -> Vec<f64> {
    (0..29).map(|i| 700.0 + 10.0 * i as f64).collect()
}

impl MultispectralStack {
    pub fn new(images: Vec<Image>, wavelengths_nm: Vec<f64>) -> Result<Self> {
        let stack = Self {
            images,
            wavelengths_nm,
        };
        stack.validate()?;
        Ok(stack)
    }

    pub fn validate(&self) -> Result<()> {
        if self.images.len() != self.wavelengths_nm.len() {
            return Err(Error::dims(format!(
                "{} images but {} wavelengths",
                self.images.len(),
                self.wavelengths_nm.len()
            )));
        }
        if self.images.is_empty() {
            return Err(Error::dims("stack is empty"));
        }
        let dim = self.images[0].pixels.dim();
        if self.images.iter().any(|im| im.pixels.dim() != dim) {
            return Err(Error::dims("stack images differ in size"));
        }
        if self.wavelengths_nm.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("wavelengths must be strictly increasing"));
        }
        Ok(())
    }

    pub fn n_pixels(&self) -> usize {
        self.images[0].len()
    }
}

/// Reference absorption spectra, one row per chromophore.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectraMatrix {
    pub chromophores: Vec<String>,
    pub wavelengths_nm: Vec<f64>,
    /// `[n_chromophores, n_wavelengths]`.
    pub absorption: Array2<f64>,
}

pub const DEFAULT_CHROMOPHORES: [&str; 4] = ["water", "fat", "oxyhemoglobin", "deoxyhemoglobin"];

impl SpectraMatrix {
    pub fn new(
        chromophores: Vec<String>,
        wavelengths_nm: Vec<f64>,
        absorption: Array2<f64>,
    ) -> Result<Self> {
        let m = Self {
            chromophores,
            wavelengths_nm,
            absorption,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let (nc, nw) = self.absorption.dim();
        if nc != self.chromophores.len() || nw != self.wavelengths_nm.len() {
            return Err(Error::dims(format!(
                "absorption is {nc}x{nw} for {} chromophores and {} wavelengths",
                self.chromophores.len(),
                self.wavelengths_nm.len()
            )));
        }
        if !self.absorption.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("spectra"));
        }
        if self.absorption.iter().any(|&v| v < 0.0) {
            return Err(Error::param("absorption spectra must be non-negative"));
        }
        for (row, name) in self.absorption.rows().into_iter().zip(&self.chromophores) {
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::param(format!("spectrum of {name} is all zero")));
            }
        }
        Ok(())
    }

    pub fn n_chromophores(&self) -> usize {
        self.absorption.nrows()
    }

    pub fn n_wavelengths(&self) -> usize {
        self.absorption.ncols()
    }
}

/// Non-negative per-pixel chromophore weights, `[n_pixels, n_chromophores]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnmixResult {
    pub components: Array2<f64>,
    pub chromophores: Vec<String>,
    /// `(ny, nx)` of the source images, used to reshape component maps.
    pub image_dim: (usize, usize),
}

impl UnmixResult {
    /// Component `k` reshaped into an image raster.
    pub fn component_map(&self, k: usize, fov_m: [f64; 2]) -> Image {
        let (ny, nx) = self.image_dim;
        let col = self.components.column(k).to_owned();
        Image {
            pixels: col.into_shape_with_order((ny, nx)).expect("component length"),
            fov_m,
        }
    }
}
