//! The speed-of-sound parametrized forward model and its exact adjoint.
//!
//! Every pixel is a point absorber. Its contribution to detector `d` is
//! scattered onto the time axis at `τ = |r_d − r_j| / c` by two-tap linear
//! interpolation with amplitude `1 / max(|r_d − r_j|, pitch)`, then each
//! channel is passed through a backward difference and the EIR. The channel
//! is built on a padded buffer so the filter sees samples just outside the
//! recorded window, which keeps the output independent of where the record
//! was cropped.

use std::sync::OnceLock;

use ndarray::{Array1, Array2, Axis};
use rayon::prelude::*;

use super::filters::EirSpec;
use crate::data::{Image, ImageGrid, Sinogram};
use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;

/// Speeds of sound accepted by the operators, in m/s.
pub const SOS_BOUNDS_MPS: (f64, f64) = (1300.0, 1700.0);

#[inline]
pub(crate) fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Fractional sample index of travel distance `dist` in a record whose
/// sample 0 sits at `t0_samples` after the pulse.
#[inline]
pub(crate) fn sample_position(dist: f64, sos: f64, fs: f64, t0_samples: f64) -> f64 {
    dist / sos * fs - t0_samples
}

/// Two-tap linear interpolation; taps outside the record read as zero.
#[inline]
pub(crate) fn sample_linear(ch: &[f64], u: f64) -> f64 {
    let i0 = u.floor();
    let f = u - i0;
    let i0 = i0 as isize;
    let n = ch.len() as isize;
    let mut v = 0.0;
    if i0 >= 0 && i0 < n {
        v += (1.0 - f) * ch[i0 as usize];
    }
    if i0 + 1 >= 0 && i0 + 1 < n {
        v += f * ch[(i0 + 1) as usize];
    }
    v
}

pub(crate) fn check_sos(sos_mps: f64) -> Result<()> {
    let (lo, hi) = SOS_BOUNDS_MPS;
    if !(sos_mps >= lo && sos_mps <= hi) {
        return Err(Error::param(format!(
            "speed of sound {sos_mps} m/s outside [{lo}, {hi}]"
        )));
    }
    Ok(())
}

pub(crate) fn check_grid(expected: &ImageGrid, img: &Image) -> Result<()> {
    let g = img.grid();
    let fov_ok = (0..2).all(|i| (g.fov_m[i] - expected.fov_m[i]).abs() <= 1e-6 * expected.fov_m[i]);
    if g.ny != expected.ny || g.nx != expected.nx || !fov_ok {
        return Err(Error::dims(format!(
            "image is {}x{} over {:?} m, operator expects {}x{} over {:?} m",
            g.ny, g.nx, g.fov_m, expected.ny, expected.nx, expected.fov_m
        )));
    }
    Ok(())
}

pub(crate) fn check_sinogram(geometry: &ArrayGeometry, s: &Sinogram) -> Result<()> {
    if s.samples.dim() != (geometry.n_time_samples, geometry.n_detectors) {
        return Err(Error::dims(format!(
            "sinogram is {:?}, operator expects {}x{}",
            s.samples.dim(),
            geometry.n_time_samples,
            geometry.n_detectors
        )));
    }
    Ok(())
}

/// Linear map from an initial-pressure image to the sinogram it produces.
#[derive(Debug, Clone)]
pub struct ForwardOperator {
    geometry: ArrayGeometry,
    grid: ImageGrid,
    sos_mps: f64,
    eir: Option<EirSpec>,
    detectors: Vec<[f64; 2]>,
    pixels: Vec<[f64; 2]>,
    /// Backward difference convolved with the EIR; `kernel[i]` is tap
    /// `i + kernel_lo`.
    kernel: Vec<f64>,
    kernel_lo: isize,
    kernel_rev: Vec<f64>,
    pad: usize,
    min_amp_distance: f64,
    reach: OnceLock<ReachMask>,
    taps: OnceLock<Vec<Tap>>,
}

/// Dot product with eight independent accumulators, so the additions
/// pipeline and vectorize; the summation order is fixed.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// Above this many detector–pixel pairs the taps are recomputed on the fly
/// instead of cached (each entry is 24 bytes).
const TAP_CACHE_MAX_ENTRIES: usize = 1 << 22;

#[derive(Debug, Clone, Copy)]
struct Tap {
    b: u32,
    w0: f64,
    w1: f64,
}

impl ForwardOperator {
    pub fn new(
        geometry: ArrayGeometry,
        grid: ImageGrid,
        sos_mps: f64,
        eir: Option<EirSpec>,
    ) -> Result<Self> {
        geometry.validate()?;
        check_sos(sos_mps)?;
        if grid.is_empty() || !(grid.fov_m[0] > 0.0 && grid.fov_m[1] > 0.0) {
            return Err(Error::param("image grid must be non-empty"));
        }
        let eir_taps = match &eir {
            Some(spec) => spec.taps(geometry.sampling_rate_hz)?,
            None => vec![1.0],
        };
        let h = (eir_taps.len() / 2) as isize;
        // g[k] = h[k] - h[k-1] for k in -h..=h+1
        let kernel: Vec<f64> = (-h..=h + 1)
            .map(|k| {
                let at = |j: isize| -> f64 {
                    if j >= -h && j <= h {
                        eir_taps[(j + h) as usize]
                    } else {
                        0.0
                    }
                };
                at(k) - at(k - 1)
            })
            .collect();
        let [dx, dy] = grid.pitch();
        Ok(Self {
            detectors: geometry.detector_positions(),
            pixels: grid.pixel_centers(),
            geometry,
            grid,
            sos_mps,
            eir,
            kernel_rev: kernel.iter().rev().copied().collect(),
            kernel,
            kernel_lo: -h,
            pad: h as usize + 2,
            min_amp_distance: dx.max(dy),
            reach: OnceLock::new(),
            taps: OnceLock::new(),
        })
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn grid(&self) -> &ImageGrid {
        &self.grid
    }

    pub fn sos_mps(&self) -> f64 {
        self.sos_mps
    }

    pub fn eir(&self) -> Option<&EirSpec> {
        self.eir.as_ref()
    }

    /// Same geometry, grid and EIR at another speed of sound.
    pub fn with_sos(&self, sos_mps: f64) -> Result<Self> {
        Self::new(self.geometry.clone(), self.grid, sos_mps, self.eir)
    }

    /// Same operator for a record with a different time window.
    pub fn with_geometry(&self, geometry: ArrayGeometry) -> Result<Self> {
        Self::new(geometry, self.grid, self.sos_mps, self.eir)
    }

    #[inline]
    fn pair(&self, det: [f64; 2], pix: [f64; 2]) -> (f64, f64) {
        let dist = distance(det, pix);
        let u = sample_position(
            dist,
            self.sos_mps,
            self.geometry.sampling_rate_hz,
            self.geometry.t0_offset_samples as f64,
        );
        (u, 1.0 / dist.max(self.min_amp_distance))
    }

    fn buffer_len(&self) -> usize {
        self.geometry.n_time_samples + 2 * self.pad
    }

    /// Interpolation taps of one detector–pixel pair on the padded buffer.
    /// Taps falling off the buffer get zero weight, and `b + 1` is always a
    /// valid index.
    fn tap(&self, det: [f64; 2], pix: [f64; 2]) -> Tap {
        let len = self.buffer_len() as isize;
        let (u, amp) = self.pair(det, pix);
        let i0 = u.floor();
        let f = u - i0;
        let b = i0 as isize + self.pad as isize;
        let (w0, w1) = (amp * (1.0 - f), amp * f);
        if b >= 0 && b + 1 < len {
            Tap { b: b as u32, w0, w1 }
        } else if b == -1 {
            Tap { b: 0, w0: w1, w1: 0.0 }
        } else if b == len - 1 {
            Tap { b: (len - 2) as u32, w0: 0.0, w1: w0 }
        } else {
            Tap { b: 0, w0: 0.0, w1: 0.0 }
        }
    }

    /// Taps of detector `d` for every pixel, from the cache when the problem
    /// is small enough to hold one.
    fn with_taps<T>(&self, d: usize, f: impl FnOnce(&[Tap]) -> T) -> T {
        if let Some(table) = self.taps_table() {
            let n = self.pixels.len();
            return f(&table[d * n..(d + 1) * n]);
        }
        let det = self.detectors[d];
        let taps: Vec<Tap> = self.pixels.iter().map(|&pix| self.tap(det, pix)).collect();
        f(&taps)
    }

    fn taps_table(&self) -> Option<&[Tap]> {
        if self.pixels.len() * self.detectors.len() > TAP_CACHE_MAX_ENTRIES {
            return None;
        }
        Some(self.taps.get_or_init(|| {
            self.detectors
                .iter()
                .flat_map(|&det| self.pixels.iter().map(move |&pix| self.tap(det, pix)))
                .collect()
        }))
    }

    fn forward_channel(&self, d: usize, image: &[f64]) -> Vec<f64> {
        let len = self.buffer_len();
        let mut buf = vec![0.0; len];
        self.with_taps(d, |taps| {
            for (t, &value) in taps.iter().zip(image) {
                if value != 0.0 {
                    buf[t.b as usize] += t.w0 * value;
                    buf[t.b as usize + 1] += t.w1 * value;
                }
            }
        });
        // out[n] = Σ_i kernel[i] · buf[n + pad − kernel_lo − i]; with
        // pad = H + 2 every index lies inside the buffer.
        let k = self.kernel.len();
        let first = (self.pad as isize - self.kernel_lo) as usize + 1 - k;
        (0..self.geometry.n_time_samples)
            .map(|n| {
                dot(&buf[n + first..n + first + k], &self.kernel_rev)
            })
            .collect()
    }

    fn adjoint_channel(&self, ch: &[f64]) -> Vec<f64> {
        // z[b] = Σ_i kernel[i] · ch[b − pad + kernel_lo + i], read from a
        // zero-extended copy of the channel.
        let len = self.buffer_len();
        let k = self.kernel.len();
        let lead = (self.pad as isize - self.kernel_lo) as usize;
        let mut ext = vec![0.0; lead + ch.len() + len + k];
        ext[lead..lead + ch.len()].copy_from_slice(ch);
        (0..len)
            .map(|b| dot(&ext[b..b + k], &self.kernel))
            .collect()
    }

    /// `M p`.
    pub fn forward(&self, p: &Image) -> Result<Sinogram> {
        check_grid(&self.grid, p)?;
        if !p.pixels.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("image"));
        }
        let flat: Vec<f64> = p.pixels.iter().copied().collect();
        let columns: Vec<Vec<f64>> = (0..self.detectors.len())
            .into_par_iter()
            .map(|d| self.forward_channel(d, &flat))
            .collect();
        let nt = self.geometry.n_time_samples;
        let mut samples = Array2::zeros((nt, self.detectors.len()));
        for (d, col) in columns.into_iter().enumerate() {
            samples.column_mut(d).assign(&Array1::from(col));
        }
        Ok(Sinogram {
            samples,
            geometry: self.geometry.clone(),
            wavelength_nm: None,
        })
    }

    /// `Mᵀ s`.
    pub fn adjoint(&self, s: &Sinogram) -> Result<Image> {
        check_sinogram(&self.geometry, s)?;
        if !s.samples.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("sinogram"));
        }
        let filtered: Vec<Vec<f64>> = (0..self.detectors.len())
            .into_par_iter()
            .map(|d| {
                let ch: Vec<f64> = s.samples.column(d).to_vec();
                self.adjoint_channel(&ch)
            })
            .collect();
        // Each pixel sums detectors in index order regardless of the
        // chunking, so the result does not depend on the thread count.
        let nx = self.grid.nx;
        let mut values = vec![0.0; self.pixels.len()];
        values.par_chunks_mut(nx).enumerate().for_each(|(row, acc)| {
            let offset = row * nx;
            let table = self.taps_table();
            for (d, z) in filtered.iter().enumerate() {
                let gather = |t: &Tap, a: &mut f64| {
                    *a += t.w0 * z[t.b as usize] + t.w1 * z[t.b as usize + 1];
                };
                match table {
                    Some(table) => {
                        let n = self.pixels.len();
                        let taps = &table[d * n + offset..d * n + offset + acc.len()];
                        for (t, a) in taps.iter().zip(acc.iter_mut()) {
                            gather(t, a);
                        }
                    }
                    None => {
                        let det = self.detectors[d];
                        for (j, a) in acc.iter_mut().enumerate() {
                            gather(&self.tap(det, self.pixels[offset + j]), a);
                        }
                    }
                }
            }
        });
        let pixels = Array2::from_shape_vec((self.grid.ny, self.grid.nx), values)
            .expect("grid size");
        Ok(Image {
            pixels,
            fov_m: self.grid.fov_m,
        })
    }

    /// Bins that can receive signal from some pixel of the grid. Computed
    /// on first use and cached.
    pub fn reach_mask(&self) -> &ReachMask {
        self.reach.get_or_init(|| self.compute_reach_mask())
    }

    fn compute_reach_mask(&self) -> ReachMask {
        let nt = self.geometry.n_time_samples;
        let nd = self.detectors.len();
        let kernel_hi = self.kernel_lo + self.kernel.len() as isize - 1;
        let mut mask = Array2::from_elem((nt, nd), false);
        for (d, &det) in self.detectors.iter().enumerate() {
            let (mut umin, mut umax) = (f64::INFINITY, f64::NEG_INFINITY);
            for &pix in &self.pixels {
                let (u, _) = self.pair(det, pix);
                umin = umin.min(u);
                umax = umax.max(u);
            }
            let start = umin.floor() as isize + self.kernel_lo;
            let end = umax.floor() as isize + 1 + kernel_hi;
            let lo = start.max(0);
            let hi = end.min(nt as isize - 1);
            for t in lo..=hi {
                mask[[t as usize, d]] = true;
            }
        }
        ReachMask { mask }
    }
}

/// Sinogram-shaped support of the forward model.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachMask {
    /// `[n_time, n_detectors]`, true inside the reach.
    pub mask: Array2<bool>,
}

impl ReachMask {
    /// Copy of `s` with bins outside the reach set to zero.
    pub fn apply(&self, s: &Sinogram) -> Result<Sinogram> {
        if s.samples.dim() != self.mask.dim() {
            return Err(Error::dims("mask and sinogram differ in shape"));
        }
        let mut out = s.clone();
        ndarray::Zip::from(&mut out.samples)
            .and(&self.mask)
            .for_each(|v, &m| {
                if !m {
                    *v = 0.0
                }
            });
        Ok(out)
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// First bin inside the reach for detector `d`.
    pub fn first_bin(&self, d: usize) -> Option<usize> {
        self.mask.index_axis(Axis(1), d).iter().position(|&m| m)
    }
}
