//! Band-limited, cone-adapted Parseval shearlet frame built in the Fourier
//! domain.
//!
//! Raw windows are products of a Meyer-type radial partition (in log-scale
//! of the max-norm frequency radius) and a cos² angular partition over
//! shears within each cone. Each window is symmetrized under `ω → −ω`,
//! which keeps coefficients real, and then divided by the square root of
//! the pointwise sum of squares. The resulting filters satisfy
//! `Σ_k |ψ̂_k(ω)|² = 1` exactly, so analysis is an isometry and synthesis is
//! its adjoint and left inverse.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::data::Image;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    Horizontal,
    Vertical,
}

/// Identity of one frame element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    LowPass,
    Shearlet { scale: usize, cone: Cone, shear: isize },
}

struct Fft2 {
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(ny: usize, nx: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            row_fwd: planner.plan_fft_forward(nx),
            row_inv: planner.plan_fft_inverse(nx),
            col_fwd: planner.plan_fft_forward(ny),
            col_inv: planner.plan_fft_inverse(ny),
        }
    }

    fn run(&self, a: &mut Array2<Complex64>, inverse: bool) {
        let (rows, cols) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        let (ny, nx) = a.dim();
        for mut row in a.rows_mut() {
            let slice = row.as_slice_mut().expect("standard layout");
            rows.process(slice);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); ny];
        for c in 0..nx {
            for r in 0..ny {
                col[r] = a[[r, c]];
            }
            cols.process(&mut col);
            for r in 0..ny {
                a[[r, c]] = col[r];
            }
        }
        if inverse {
            let scale = 1.0 / (ny * nx) as f64;
            a.mapv_inplace(|v| v * scale);
        }
    }

    fn forward_real(&self, x: &Array2<f64>) -> Array2<Complex64> {
        let mut a = x.mapv(|v| Complex64::new(v, 0.0));
        self.run(&mut a, false);
        a
    }

    fn inverse_real(&self, mut a: Array2<Complex64>) -> Array2<f64> {
        self.run(&mut a, true);
        a.mapv(|c| c.re)
    }
}

/// Frequency-domain shearlet filters for a fixed image size.
pub struct ShearletSystem {
    ny: usize,
    nx: usize,
    n_scales: usize,
    bands: Vec<Band>,
    filters: Vec<Array2<f64>>,
    fft: Fft2,
}

impl fmt::Debug for ShearletSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShearletSystem")
            .field("ny", &self.ny)
            .field("nx", &self.nx)
            .field("n_scales", &self.n_scales)
            .field("n_filters", &self.filters.len())
            .finish()
    }
}

/// Shearlet coefficients: one real raster per frame element.
#[derive(Debug, Clone, PartialEq)]
pub struct ShearletCoeffs {
    pub bands: Vec<Array2<f64>>,
}

impl ShearletCoeffs {
    pub fn l1_norm(&self) -> f64 {
        self.bands.iter().flat_map(|b| b.iter()).map(|v| v.abs()).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.bands.iter().flat_map(|b| b.iter()).map(|v| v * v).sum()
    }

    pub fn len(&self) -> usize {
        self.bands.iter().map(|b| b.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.bands.iter().flat_map(|b| b.iter())
    }

    /// `sign(c) · max(|c| − θ, 0)` on every coefficient.
    pub fn soft_threshold(&self, threshold: f64) -> Result<Self> {
        if !(threshold >= 0.0) {
            return Err(Error::param(format!(
                "soft threshold must be non-negative, got {threshold}"
            )));
        }
        Ok(Self {
            bands: self
                .bands
                .par_iter()
                .map(|b| b.mapv(|c| soft_threshold(c, threshold)))
                .collect(),
        })
    }
}

#[inline]
pub fn soft_threshold(c: f64, threshold: f64) -> f64 {
    c.signum() * (c.abs() - threshold).max(0.0)
}

/// cos² bump of unit half-width; integer translates sum to one.
fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (0.5 * PI * x).cos().powi(2)
    }
}

fn lowpass_weight(u: f64) -> f64 {
    if u <= 0.0 {
        1.0
    } else {
        bump(u)
    }
}

/// Normalized FFT frequency of bin `i` out of `n`, in `[-1, 1)`.
fn normalized_frequency(i: usize, n: usize) -> f64 {
    let f = if i < n.div_ceil(2) {
        i as f64
    } else {
        i as f64 - n as f64
    };
    if n == 1 {
        0.0
    } else {
        f / (0.5 * n as f64)
    }
}

/// Shears on each side of zero at scale `j`.
pub fn shears_at_scale(j: usize) -> usize {
    2f64.powf(j as f64 / 2.0).ceil() as usize
}

/// Number of scales used for an image whose smaller side is `min_dim`.
pub fn default_scales(min_dim: usize) -> usize {
    let log = (min_dim.max(1) as f64).log2().floor() as isize;
    (log - 4).clamp(1, 4) as usize
}

impl ShearletSystem {
    pub fn new(ny: usize, nx: usize) -> Result<Self> {
        Self::with_scales(ny, nx, default_scales(ny.min(nx)))
    }

    pub fn with_scales(ny: usize, nx: usize, n_scales: usize) -> Result<Self> {
        if ny < 2 || nx < 2 {
            return Err(Error::param("shearlet system needs at least 2x2 pixels"));
        }
        if n_scales == 0 {
            return Err(Error::param("shearlet system needs at least one scale"));
        }
        let mut bands = vec![Band::LowPass];
        for scale in 0..n_scales {
            let k = shears_at_scale(scale) as isize;
            for cone in [Cone::Horizontal, Cone::Vertical] {
                for shear in -k..=k {
                    bands.push(Band::Shearlet { scale, cone, shear });
                }
            }
        }
        let fy: Vec<f64> = (0..ny).map(|i| normalized_frequency(i, ny)).collect();
        let fx: Vec<f64> = (0..nx).map(|i| normalized_frequency(i, nx)).collect();
        let j = n_scales as f64;
        let raw: Vec<Array2<f64>> = bands
            .par_iter()
            .map(|band| {
                let w = Array2::from_shape_fn((ny, nx), |(r, c)| {
                    let (wy, wx) = (fy[r], fx[c]);
                    let radius = wy.abs().max(wx.abs());
                    let u = if radius == 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        radius.log2() + j
                    };
                    match *band {
                        Band::LowPass => lowpass_weight(u),
                        Band::Shearlet { scale, cone, shear } => {
                            let radial = bump(u - (scale as f64 + 1.0));
                            if radial == 0.0 {
                                return 0.0;
                            }
                            let slope = match cone {
                                Cone::Horizontal if wy.abs() <= wx.abs() => wy / wx,
                                Cone::Vertical if wx.abs() <= wy.abs() => wx / wy,
                                _ => return 0.0,
                            };
                            let k = shears_at_scale(scale) as f64;
                            radial * bump(k * slope - shear as f64)
                        }
                    }
                });
                // Average with the mirrored window so ψ̂(ω) = ψ̂(−ω) on the
                // discrete grid, including the Nyquist row and column.
                Array2::from_shape_fn((ny, nx), |(r, c)| {
                    0.5 * (w[[r, c]] + w[[(ny - r) % ny, (nx - c) % nx]])
                })
            })
            .collect();
        let mut total = Array2::<f64>::zeros((ny, nx));
        for w in &raw {
            Zip::from(&mut total).and(w).for_each(|t, &v| *t += v * v);
        }
        if total.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::param("shearlet windows leave a frequency uncovered"));
        }
        let norm = total.mapv(f64::sqrt);
        let filters = raw.into_iter().map(|w| &w / &norm).collect();
        Ok(Self {
            ny,
            nx,
            n_scales,
            bands,
            filters,
            fft: Fft2::new(ny, nx),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.ny, self.nx)
    }

    pub fn n_scales(&self) -> usize {
        self.n_scales
    }

    pub fn n_filters(&self) -> usize {
        self.filters.len()
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    /// Frequency response of filter `k`.
    pub fn filter(&self, k: usize) -> &Array2<f64> {
        &self.filters[k]
    }

    /// Human-readable summary of the filter layout.
    pub fn describe(&self) -> String {
        let mut s = format!(
            "shearlet system {}x{}: {} scales, {} filters (1 low-pass",
            self.ny,
            self.nx,
            self.n_scales,
            self.n_filters()
        );
        for j in 0..self.n_scales {
            s.push_str(&format!(
                "; scale {j}: 2 cones x {} shears",
                2 * shears_at_scale(j) + 1
            ));
        }
        s.push(')');
        s
    }

    fn check(&self, img: &Image) -> Result<()> {
        if img.pixels.dim() != (self.ny, self.nx) {
            return Err(Error::dims(format!(
                "image is {:?}, shearlet system is {}x{}",
                img.pixels.dim(),
                self.ny,
                self.nx
            )));
        }
        Ok(())
    }

    pub fn analysis(&self, img: &Image) -> Result<ShearletCoeffs> {
        self.check(img)?;
        let spectrum = self.fft.forward_real(&img.pixels);
        let bands = self
            .filters
            .par_iter()
            .map(|psi| {
                let prod = Zip::from(&spectrum)
                    .and(psi)
                    .map_collect(|&z, &w| z * w);
                self.fft.inverse_real(prod)
            })
            .collect();
        Ok(ShearletCoeffs { bands })
    }

    pub fn synthesis(&self, coeffs: &ShearletCoeffs, fov_m: [f64; 2]) -> Result<Image> {
        if coeffs.bands.len() != self.filters.len()
            || coeffs.bands.iter().any(|b| b.dim() != (self.ny, self.nx))
        {
            return Err(Error::dims(format!(
                "coefficient set does not match a {}x{} system with {} filters",
                self.ny,
                self.nx,
                self.filters.len()
            )));
        }
        let spectrum = coeffs
            .bands
            .par_iter()
            .zip(&self.filters)
            .map(|(band, psi)| {
                let mut z = self.fft.forward_real(band);
                Zip::from(&mut z).and(psi).for_each(|z, &w| *z *= w);
                z
            })
            .reduce(
                || Array2::zeros((self.ny, self.nx)),
                |mut a, b| {
                    a += &b;
                    a
                },
            );
        Ok(Image {
            pixels: self.fft.inverse_real(spectrum),
            fov_m,
        })
    }
}
