//! Backproject a simulated disk phantom at the true and at a wrong speed of
//! sound and compare the data residuals.

use oatk_core::acoustic::ForwardOperator;
use oatk_core::analysis::{residual_norm, ResidualOptions};
use oatk_core::direct::backproject;
use oatk_core::synthesis::{make_phantom, PhantomKind};
use oatk_core::{ArrayGeometry, ImageGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> oatk_core::Result<()> {
    let geometry = ArrayGeometry {
        n_detectors: 64,
        ..ArrayGeometry::default().with_time_window(512, 800)
    };
    let grid = ImageGrid::square(64, 0.0064);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = make_phantom(PhantomKind::Disks(3), 64, 0.0064, &mut rng)?;
    let s = ForwardOperator::new(geometry.clone(), grid, 1500.0, None)?.forward(&p)?;

    for sos in [1480.0, 1500.0, 1520.0] {
        let img = backproject(&s, &grid, sos)?;
        let op = ForwardOperator::new(geometry.clone(), grid, sos, None)?;
        let r = residual_norm(&op, &img, &s, ResidualOptions::EVALUATION)?;
        println!("sos {sos:>6}: max {:.3e}, R = {r:.4}", img.max());
    }
    Ok(())
}
