//! Image fidelity metrics with and without per-metric optimal scaling.

use oatk_core::analysis::{image_metrics, mae_optimal_scale, mse_optimal_scale, ssim};
use oatk_core::synthesis::{make_phantom, PhantomKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> oatk_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let reference = make_phantom(PhantomKind::Cartoon, 64, 0.0064, &mut rng)?;
    let mut rec = reference.scaled(0.6);
    rec.pixels.mapv_inplace(|v| v + rng.random_range(-0.02..0.02));

    println!("SSIM(ref, ref) = {}", ssim(&reference, &reference)?);
    println!("optimal scales: MSE {:.4}, MAE {:.4}", mse_optimal_scale(&rec, &reference), mae_optimal_scale(&rec, &reference));
    for scaled in [false, true] {
        let m = image_metrics(&rec, &reference, scaled)?;
        println!(
            "scaled={scaled}: MAE {:.4e} (rel {:.4}), MSE {:.4e} (rel {:.4}), SSIM {:.4}",
            m.mae, m.mae_rel, m.mse, m.mse_rel, m.ssim
        );
    }
    Ok(())
}
