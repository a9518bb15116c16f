//! Data residual norm `R = ‖M p − s‖² / ‖s‖²` over the reach of the model.

use crate::acoustic::{check_grid, check_sinogram, ForwardOperator};
use crate::data::{Image, Sinogram};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ResidualOptions {
    /// Zero negative pixels before projecting.
    pub clamp_negatives: bool,
    /// Rescale the image by the least-squares optimal factor first.
    pub optimal_scale: bool,
}

impl ResidualOptions {
    /// Settings used for evaluation: clamp, then optimally scale.
    pub const EVALUATION: Self = Self {
        clamp_negatives: true,
        optimal_scale: true,
    };
}

/// `α = ⟨M p, s⟩ / ‖M p‖²`, the minimizer of `‖α M p − s‖²`.
pub fn optimal_scale(op: &ForwardOperator, p: &Image, s: &Sinogram) -> Result<f64> {
    check_sinogram(op.geometry(), s)?;
    let mp = op.forward(p)?;
    scale_from_projection(&mp, s)
}

pub(crate) fn scale_from_projection(mp: &Sinogram, s: &Sinogram) -> Result<f64> {
    let denom = mp.norm_sq();
    if denom == 0.0 {
        return Err(Error::ZeroNorm("forward projection M p"));
    }
    Ok(mp.dot(s) / denom)
}

/// Residual of an already projected image against the masked sinogram.
pub(crate) fn residual_from_projection(
    mp: &Sinogram,
    s_masked: &Sinogram,
    optimal_scale: bool,
) -> Result<f64> {
    let s_norm = s_masked.norm_sq();
    if s_norm == 0.0 {
        return Err(Error::ZeroNorm("sinogram within the model reach"));
    }
    let alpha = if optimal_scale && mp.norm_sq() > 0.0 {
        scale_from_projection(mp, s_masked)?
    } else {
        1.0
    };
    let mut acc = 0.0;
    for (a, b) in mp.samples.iter().zip(s_masked.samples.iter()) {
        let d = alpha * a - b;
        acc += d * d;
    }
    Ok(acc / s_norm)
}

/// Data residual norm of `p0` against `s`. Sinogram bins outside the reach
/// of the forward model are zeroed first.
pub fn residual_norm(
    op: &ForwardOperator,
    p0: &Image,
    s: &Sinogram,
    opts: ResidualOptions,
) -> Result<f64> {
    check_sinogram(op.geometry(), s)?;
    check_grid(op.grid(), p0)?;
    let s_masked = op.reach_mask().apply(s)?;
    let p = if opts.clamp_negatives {
        p0.clamped_non_negative()
    } else {
        p0.clone()
    };
    let mp = op.forward(&p)?;
    residual_from_projection(&mp, &s_masked, opts.optimal_scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustic::EirSpec;
    use crate::data::ImageGrid;
    use crate::geometry::ArrayGeometry;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn op() -> ForwardOperator {
        let g = ArrayGeometry {
            n_detectors: 16,
            ..ArrayGeometry::default().with_time_window(500, 850)
        };
        ForwardOperator::new(g, ImageGrid::square(16, 0.004), 1500.0, Some(EirSpec::default()))
            .unwrap()
    }

    fn random_image(op: &ForwardOperator, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut img = op.grid().zeros();
        img.pixels.mapv_inplace(|_| rng.random_range(0.0..1.0));
        img
    }

    #[test]
    fn zero_image_and_exact_data() {
        let op = op();
        let p = random_image(&op, 1);
        let s = op.forward(&p).unwrap();
        let zero = op.grid().zeros();
        for scale in [false, true] {
            let opts = ResidualOptions {
                clamp_negatives: false,
                optimal_scale: scale,
            };
            assert_eq!(residual_norm(&op, &zero, &s, opts).unwrap(), 1.0);
            assert!(residual_norm(&op, &p, &s, opts).unwrap() < 1e-24);
        }
    }

    #[test]
    fn optimal_scale_makes_residual_scale_invariant() {
        let op = op();
        let p = random_image(&op, 2);
        let mut s = op.forward(&random_image(&op, 3)).unwrap();
        s.samples.mapv_inplace(|v| v + 0.01);
        let opts = ResidualOptions {
            clamp_negatives: false,
            optimal_scale: true,
        };
        let r1 = residual_norm(&op, &p, &s, opts).unwrap();
        let r2 = residual_norm(&op, &p.scaled(2.0), &s, opts).unwrap();
        assert!((r1 - r2).abs() < 1e-12);
        let s2 = op.forward(&p).unwrap().scaled(2.0);
        assert!((optimal_scale(&op, &p, &s2).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_sinogram_is_an_error() {
        let op = op();
        let s = Sinogram::zeros(op.geometry());
        assert!(matches!(
            residual_norm(&op, &random_image(&op, 4), &s, ResidualOptions::default()),
            Err(Error::ZeroNorm(_))
        ));
        assert!(matches!(
            optimal_scale(&op, &op.grid().zeros(), &s),
            Err(Error::ZeroNorm(_))
        ));
    }
}
