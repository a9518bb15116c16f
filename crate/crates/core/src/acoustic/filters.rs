//! Per-channel sinogram filters: the electrical impulse response, the
//! acquisition band-pass, and leading-sample cropping.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{s, Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::data::Sinogram;
use crate::error::{Error, Result};

/// Parametric electrical impulse response of the detection chain.
///
/// Realized as a zero-phase FIR: a cosine at `center_frequency_hz` under a
/// Gaussian envelope whose half-amplitude bandwidth is
/// `fractional_bandwidth * center_frequency_hz`, with the DC component
/// removed and the passband peak normalized to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EirSpec {
    pub center_frequency_hz: f64,
    pub fractional_bandwidth: f64,
    pub filter_length_samples: usize,
}

impl Default for EirSpec {
    fn default() -> Self {
        Self {
            center_frequency_hz: 4e6,
            fractional_bandwidth: 1.53,
            filter_length_samples: 129,
        }
    }
}

impl EirSpec {
    pub fn validate(&self, sampling_rate_hz: f64) -> Result<()> {
        if self.filter_length_samples % 2 == 0 || self.filter_length_samples < 3 {
            return Err(Error::param("EIR filter length must be odd and at least 3"));
        }
        if !(self.center_frequency_hz > 0.0 && self.center_frequency_hz < 0.5 * sampling_rate_hz) {
            return Err(Error::param("EIR center frequency must lie below Nyquist"));
        }
        if !(self.fractional_bandwidth > 0.0) {
            return Err(Error::param("EIR bandwidth must be positive"));
        }
        Ok(())
    }

    pub fn half_length(&self) -> usize {
        self.filter_length_samples / 2
    }

    /// Symmetric taps `h[-half..=half]`, stored from index 0.
    pub fn taps(&self, sampling_rate_hz: f64) -> Result<Vec<f64>> {
        self.validate(sampling_rate_hz)?;
        let half = self.half_length() as isize;
        let sigma_f =
            self.fractional_bandwidth * self.center_frequency_hz / (2.0 * (2.0 * 2f64.ln()).sqrt());
        let sigma_t = 1.0 / (2.0 * PI * sigma_f);
        let env: Vec<f64> = (-half..=half)
            .map(|n| {
                let t = n as f64 / sampling_rate_hz;
                (-t * t / (2.0 * sigma_t * sigma_t)).exp()
            })
            .collect();
        let carrier: Vec<f64> = (-half..=half)
            .map(|n| (2.0 * PI * self.center_frequency_hz * n as f64 / sampling_rate_hz).cos())
            .collect();
        let env_sum: f64 = env.iter().sum();
        let dc: f64 = env.iter().zip(&carrier).map(|(e, c)| e * c).sum::<f64>() / env_sum;
        let mut taps: Vec<f64> = env
            .iter()
            .zip(&carrier)
            .map(|(e, c)| e * (c - dc))
            .collect();
        let peak = (0..=2048)
            .map(|i| {
                let f = 0.5 * sampling_rate_hz * i as f64 / 2048.0;
                frequency_response(&taps, f, sampling_rate_hz).abs()
            })
            .fold(0.0, f64::max);
        for t in &mut taps {
            *t /= peak;
        }
        Ok(taps)
    }
}

/// Real frequency response of a symmetric FIR centered on its middle tap.
pub fn frequency_response(taps: &[f64], freq_hz: f64, sampling_rate_hz: f64) -> f64 {
    let half = (taps.len() / 2) as isize;
    taps.iter()
        .enumerate()
        .map(|(i, &h)| {
            let n = i as isize - half;
            h * (2.0 * PI * freq_hz * n as f64 / sampling_rate_hz).cos()
        })
        .sum()
}

fn reflect(i: isize, n: usize) -> usize {
    // Half-sample symmetric extension: ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} ...
    let n = n as isize;
    let period = 2 * n;
    let mut k = i.rem_euclid(period);
    if k >= n {
        k = period - 1 - k;
    }
    k as usize
}

fn convolve_symmetric_ext(x: &[f64], taps: &[f64]) -> Vec<f64> {
    let half = (taps.len() / 2) as isize;
    let n = x.len();
    (0..n as isize)
        .map(|i| {
            taps.iter()
                .enumerate()
                .map(|(k, &h)| h * x[reflect(i - (k as isize - half), n)])
                .sum()
        })
        .collect()
}

fn map_channels(s: &Sinogram, f: impl Fn(&[f64]) -> Vec<f64> + Sync) -> Sinogram {
    let (nt, nd) = s.samples.dim();
    let columns: Vec<Vec<f64>> = (0..nd)
        .into_par_iter()
        .map(|d| {
            let ch: Vec<f64> = s.samples.column(d).to_vec();
            f(&ch)
        })
        .collect();
    let mut out = Array2::zeros((nt, nd));
    for (d, col) in columns.into_iter().enumerate() {
        out.column_mut(d).assign(&ndarray::Array1::from(col));
    }
    Sinogram {
        samples: out,
        geometry: s.geometry.clone(),
        wavelength_nm: s.wavelength_nm,
    }
}

/// Convolve every channel with the EIR, using symmetric boundary extension.
pub fn eir_filter(s: &Sinogram, spec: &EirSpec) -> Result<Sinogram> {
    let taps = spec.taps(s.geometry.sampling_rate_hz)?;
    Ok(map_channels(s, |ch| convolve_symmetric_ext(ch, &taps)))
}

/// Zero-phase spectral mask: zero outside `[lo, hi]`, one inside, with
/// raised-cosine shoulders just inside both edges.
fn bandpass_gain(f: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    let rise = lo.min(0.25 * width);
    let fall = (0.1 * hi).min(0.25 * width);
    if f <= lo || f >= hi {
        0.0
    } else if f < lo + rise {
        let x = (f - lo) / rise;
        (0.5 * PI * x).sin().powi(2)
    } else if f > hi - fall {
        let x = (hi - f) / fall;
        (0.5 * PI * x).sin().powi(2)
    } else {
        1.0
    }
}

struct BandPass {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    gains: Vec<f64>,
}

impl BandPass {
    fn new(n: usize, lo: f64, hi: f64, fs: f64) -> Self {
        // The channel is mirrored to length 2n so the periodic FFT sees no
        // jump at the record ends.
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        let gains = (0..m)
            .map(|k| {
                let kk = if k <= m / 2 { k } else { m - k };
                bandpass_gain(kk as f64 * fs / m as f64, lo, hi)
            })
            .collect();
        Self {
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
            gains,
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let m = 2 * n;
        let mut buf: Vec<Complex64> = x
            .iter()
            .chain(x.iter().rev())
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.forward.process(&mut buf);
        for (b, g) in buf.iter_mut().zip(&self.gains) {
            *b *= g;
        }
        self.inverse.process(&mut buf);
        buf[..n].iter().map(|c| c.re / m as f64).collect()
    }
}

/// Zero-phase band-pass of every channel between `lo_hz` and `hi_hz`.
pub fn bandpass_filter(s: &Sinogram, lo_hz: f64, hi_hz: f64) -> Result<Sinogram> {
    let fs = s.geometry.sampling_rate_hz;
    if !(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz < 0.5 * fs) {
        return Err(Error::param(format!(
            "band edges must satisfy 0 < lo < hi < fs/2, got {lo_hz} and {hi_hz}"
        )));
    }
    let bp = BandPass::new(s.n_time(), lo_hz, hi_hz, fs);
    Ok(map_channels(s, |ch| bp.apply(ch)))
}

/// Drop the first `n` samples, recording them in the time offset.
pub fn crop_leading_samples(s: &Sinogram, n: usize) -> Result<Sinogram> {
    if n >= s.n_time() {
        return Err(Error::param(format!(
            "cannot crop {n} samples from a record of {}",
            s.n_time()
        )));
    }
    let samples = s.samples.slice_axis(Axis(0), (n..).into()).to_owned();
    let mut geometry = s.geometry.clone();
    geometry.n_time_samples -= n;
    geometry.t0_offset_samples += n;
    Ok(Sinogram {
        samples,
        geometry,
        wavelength_nm: s.wavelength_nm,
    })
}

/// Power outside `[lo, hi]` as a fraction of total power, per a plain FFT of
/// each channel.
pub fn out_of_band_energy_fraction(s: &Sinogram, lo_hz: f64, hi_hz: f64) -> f64 {
    let n = s.n_time();
    let fs = s.geometry.sampling_rate_hz;
    let fft = FftPlanner::new().plan_fft_forward(n);
    let (mut outside, mut total) = (0.0, 0.0);
    for d in 0..s.n_detectors() {
        let mut buf: Vec<Complex64> = s
            .samples
            .slice(s![.., d])
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft.process(&mut buf);
        for (k, c) in buf.iter().enumerate() {
            let kk = if k <= n / 2 { k } else { n - k };
            let f = kk as f64 * fs / n as f64;
            let p = c.norm_sqr();
            total += p;
            if f < lo_hz || f > hi_hz {
                outside += p;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outside / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ArrayGeometry;

    fn geometry(nt: usize, nd: usize) -> ArrayGeometry {
        ArrayGeometry {
            n_detectors: nd,
            ..ArrayGeometry::default().with_time_window(nt, 0)
        }
    }

    fn sinusoid(nt: usize, nd: usize, f: f64) -> Sinogram {
        let g = geometry(nt, nd);
        let fs = g.sampling_rate_hz;
        let samples = Array2::from_shape_fn((nt, nd), |(t, _)| (2.0 * PI * f * t as f64 / fs).sin());
        Sinogram::new(samples, g).unwrap()
    }

    // Independent check of the FIR gain: project the filtered steady-state
    // interior of a long sinusoid back onto the input tone.
    fn measured_gain(taps: &[f64], f: f64, fs: f64) -> f64 {
        let n = 4096;
        let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * f * t as f64 / fs).cos()).collect();
        let y = convolve_symmetric_ext(&x, taps);
        let (a, b) = (512, n - 512);
        let num: f64 = (a..b).map(|t| y[t] * x[t]).sum();
        let den: f64 = (a..b).map(|t| x[t] * x[t]).sum();
        num / den
    }

    #[test]
    fn eir_is_zero_phase_with_unit_peak_gain() {
        let spec = EirSpec::default();
        let fs = 40e6;
        let taps = spec.taps(fs).unwrap();
        assert_eq!(taps.len(), 129);
        for i in 0..64 {
            assert_eq!(taps[i], taps[128 - i]);
        }
        let peak = (1..200)
            .map(|i| measured_gain(&taps, i as f64 * 0.05e6, fs))
            .fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 0.05, "peak gain {peak}");
        assert!(measured_gain(&taps, 4e6, fs) > 0.9);
        assert!(frequency_response(&taps, 0.0, fs).abs() < 1e-12);
    }

    #[test]
    fn eir_kills_dc() {
        let g = geometry(512, 3);
        let s = Sinogram::new(Array2::from_elem((512, 3), 2.5), g).unwrap();
        let out = eir_filter(&s, &EirSpec::default()).unwrap();
        let max = out.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max <= 1e-3 * 2.5, "dc leak {max}");
    }

    #[test]
    fn bandpass_kills_dc_and_passes_four_megahertz() {
        let g = geometry(2030, 2);
        let s = Sinogram::new(Array2::from_elem((2030, 2), 1.0), g).unwrap();
        let out = bandpass_filter(&s, 100e3, 12e6).unwrap();
        let max = out.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max <= 1e-3, "dc leak {max}");

        let s = sinusoid(2030, 2, 4e6);
        let out = bandpass_filter(&s, 100e3, 12e6).unwrap();
        let interior = out.samples.slice(s![500..1500, 0]);
        let amp = interior.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(amp >= 0.9, "4 MHz amplitude {amp}");
    }

    #[test]
    fn bandpass_rejects_high_tone_and_bad_edges() {
        let s = sinusoid(2030, 2, 16e6);
        let out = bandpass_filter(&s, 100e3, 12e6).unwrap();
        // The mirrored extension kinks at the record ends; judge the interior.
        let interior = out.samples.slice(s![500..1500, 0]);
        let amp = interior.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(amp < 1e-3, "16 MHz leak {amp}");
        assert!(bandpass_filter(&s, 12e6, 100e3).is_err());
        assert!(bandpass_filter(&s, 100e3, 25e6).is_err());
    }

    #[test]
    fn filters_of_zero_are_zero() {
        let s = Sinogram::zeros(&geometry(300, 4));
        assert!(bandpass_filter(&s, 100e3, 12e6)
            .unwrap()
            .samples
            .iter()
            .all(|&v| v == 0.0));
        assert!(eir_filter(&s, &EirSpec::default())
            .unwrap()
            .samples
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn crop_updates_offset() {
        let s = Sinogram::zeros(&ArrayGeometry::default());
        let c = crop_leading_samples(&s, 110).unwrap();
        assert_eq!(c.samples.dim(), (1920, 256));
        assert_eq!(c.geometry.t0_offset_samples, 110);
        assert_eq!(c.geometry.n_time_samples, 1920);
        assert_eq!(crop_leading_samples(&s, 0).unwrap(), s);
        assert!(crop_leading_samples(&s, 2030).is_err());
    }
}
