//! Image-domain comparison against a reference reconstruction.

use ndarray::Array2;

use crate::data::Image;
use crate::error::{Error, Result};

pub const SSIM_WINDOW: usize = 21;

/// Fidelity of a reconstruction relative to a reference image.
///
/// `mae`/`mse` are per-pixel means; the relative variants divide by
/// `‖i_mb‖₁` and `‖i_mb‖₂²` respectively.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    /// Data residual norm, when a sinogram and operator were supplied.
    pub residual_norm: Option<f64>,
    pub mae: f64,
    pub mae_rel: f64,
    pub mse: f64,
    pub mse_rel: f64,
    pub ssim: f64,
}

fn check_same(a: &Image, b: &Image) -> Result<()> {
    if a.pixels.dim() != b.pixels.dim() {
        return Err(Error::dims(format!(
            "images differ in size: {:?} vs {:?}",
            a.pixels.dim(),
            b.pixels.dim()
        )));
    }
    Ok(())
}

/// Scale minimizing `‖α r − m‖²`.
pub fn mse_optimal_scale(rec: &Image, reference: &Image) -> f64 {
    let denom = rec.norm_sq();
    if denom == 0.0 {
        1.0
    } else {
        rec.dot(reference) / denom
    }
}

/// Scale minimizing `‖α r − m‖₁`: the weighted median of `m_i / r_i` with
/// weights `|r_i|`.
pub fn mae_optimal_scale(rec: &Image, reference: &Image) -> f64 {
    let mut ratios: Vec<(f64, f64)> = rec
        .pixels
        .iter()
        .zip(reference.pixels.iter())
        .filter(|(r, _)| **r != 0.0)
        .map(|(&r, &m)| (m / r, r.abs()))
        .collect();
    if ratios.is_empty() {
        return 1.0;
    }
    ratios.sort_by(|a, b| a.0.total_cmp(&b.0));
    let half = 0.5 * ratios.iter().map(|(_, w)| w).sum::<f64>();
    let mut acc = 0.0;
    for &(ratio, w) in &ratios {
        acc += w;
        if acc >= half {
            return ratio;
        }
    }
    ratios.last().unwrap().0
}

fn l1(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

fn l2sq(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

/// Structural similarity averaged over all fully contained `window x window`
/// patches, stride 1, uniform weights. `c1` and `c2` come from the maximum
/// of `reference`.
pub fn ssim_windowed(img: &Image, reference: &Image, window: usize) -> Result<f64> {
    check_same(img, reference)?;
    let (ny, nx) = img.pixels.dim();
    if window == 0 || window > ny || window > nx {
        return Err(Error::param(format!(
            "SSIM window {window} does not fit a {ny}x{nx} image"
        )));
    }
    let peak = reference.max();
    let c1 = (0.01 * peak).powi(2);
    let c2 = (0.03 * peak).powi(2);

    // Summed-area tables with a zero first row and column.
    let table = |f: &dyn Fn(f64, f64) -> f64| {
        let mut t = Array2::<f64>::zeros((ny + 1, nx + 1));
        for r in 0..ny {
            let mut row = 0.0;
            for c in 0..nx {
                row += f(img.pixels[[r, c]], reference.pixels[[r, c]]);
                t[[r + 1, c + 1]] = t[[r, c + 1]] + row;
            }
        }
        t
    };
    let sa = table(&|a, _| a);
    let sb = table(&|_, b| b);
    let saa = table(&|a, _| a * a);
    let sbb = table(&|_, b| b * b);
    let sab = table(&|a, b| a * b);
    let window_sum = |t: &Array2<f64>, r: usize, c: usize| {
        t[[r + window, c + window]] - t[[r, c + window]] - t[[r + window, c]] + t[[r, c]]
    };

    let n = (window * window) as f64;
    let mut total = 0.0;
    let mut count = 0usize;
    for r in 0..=ny - window {
        for c in 0..=nx - window {
            let mu_a = window_sum(&sa, r, c) / n;
            let mu_b = window_sum(&sb, r, c) / n;
            let var_a = window_sum(&saa, r, c) / n - mu_a * mu_a;
            let var_b = window_sum(&sbb, r, c) / n - mu_b * mu_b;
            let cov = window_sum(&sab, r, c) / n - mu_a * mu_b;
            let num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            let den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            total += if den == 0.0 {
                if num == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                num / den
            };
            count += 1;
        }
    }
    Ok(total / count as f64)
}

pub fn ssim(img: &Image, reference: &Image) -> Result<f64> {
    ssim_windowed(img, reference, SSIM_WINDOW)
}

/// Compare `rec` against `reference`.
///
/// With `scale_per_metric`, `rec` is rescaled separately for MAE (weighted
/// median) and MSE (least squares) so each is minimal; SSIM is always
/// computed on the unscaled input.
pub fn image_metrics(rec: &Image, reference: &Image, scale_per_metric: bool) -> Result<MetricReport> {
    check_same(rec, reference)?;
    let ref_l1 = l1(&reference.pixels);
    let ref_l2 = l2sq(&reference.pixels);
    if ref_l1 == 0.0 {
        return Err(Error::ZeroNorm("reference image"));
    }
    let n = rec.len() as f64;
    let (a_mae, a_mse) = if scale_per_metric {
        (mae_optimal_scale(rec, reference), mse_optimal_scale(rec, reference))
    } else {
        (1.0, 1.0)
    };
    let abs_err = l1(&(&rec.pixels * a_mae - &reference.pixels));
    let sq_err = l2sq(&(&rec.pixels * a_mse - &reference.pixels));
    Ok(MetricReport {
        residual_norm: None,
        mae: abs_err / n,
        mae_rel: abs_err / ref_l1,
        mse: sq_err / n,
        mse_rel: sq_err / ref_l2,
        ssim: ssim(rec, reference)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(n: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image {
            pixels: Array2::from_shape_fn((n, n), |_| rng.random_range(0.0..1.0)),
            fov_m: [0.01, 0.01],
        }
    }

    // Golden-section search on a unimodal scalar function.
    fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn identical_images() {
        let i = random_image(64, 1);
        let m = image_metrics(&i, &i, false).unwrap();
        assert_eq!(m.mae, 0.0);
        assert_eq!(m.mse, 0.0);
        assert_eq!(m.ssim, 1.0);
    }

    #[test]
    fn zero_reconstruction_has_unit_relative_error() {
        let i = random_image(32, 2);
        let zero = Image::zeros(32, 32, i.fov_m);
        let m = image_metrics(&zero, &i, false).unwrap();
        assert!((m.mae_rel - 1.0).abs() < 1e-15);
        assert!((m.mse_rel - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scales_match_brute_force() {
        let rec = random_image(32, 3);
        let reference = random_image(32, 4);
        let mse = |a: f64| l2sq(&(&rec.pixels * a - &reference.pixels));
        let mae = |a: f64| l1(&(&rec.pixels * a - &reference.pixels));
        let a = mse_optimal_scale(&rec, &reference);
        let brute = golden_min(mse, -10.0, 10.0);
        assert!(mse(a) <= mse(brute) + 1e-12 * mse(brute));
        // Stationarity of the closed form.
        let grad = (&rec.pixels * (&rec.pixels * a - &reference.pixels)).sum();
        assert!(grad.abs() < 1e-10 * rec.norm_sq());
        let b = mae_optimal_scale(&rec, &reference);
        let brute = golden_min(mae, -10.0, 10.0);
        assert!(mae(b) <= mae(brute) + 1e-9);
    }

    #[test]
    fn ssim_bounded_and_window_checked() {
        let a = random_image(40, 5);
        let b = random_image(40, 6);
        let s = ssim(&a, &b).unwrap();
        assert!(s < 1.0 && s > -1.0);
        assert!(ssim(&random_image(10, 1), &random_image(10, 2)).is_err());
        assert!(image_metrics(&a, &Image::zeros(40, 40, a.fov_m), false).is_err());
        assert!(image_metrics(&a, &random_image(30, 1), false).is_err());
    }
}
