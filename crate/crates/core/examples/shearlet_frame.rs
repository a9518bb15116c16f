//! Build the shearlet frame and verify that it is Parseval.

use oatk_core::shearlet::ShearletSystem;
use oatk_core::Image;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> oatk_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [64, 128] {
        let sys = ShearletSystem::new(n, n)?;
        println!("{n}x{n}: {}", sys.describe());
        let img = Image::new(Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0)), [0.01; 2])?;
        let c = sys.analysis(&img)?;
        let back = sys.synthesis(&c, img.fov_m)?;
        let err = (&back.pixels - &img.pixels).mapv(|v| v * v).sum().sqrt() / img.norm_sq().sqrt();
        println!("  energy ratio {:.12}, round-trip error {err:.2e}", c.norm_sq() / img.norm_sq());
    }
    Ok(())
}
