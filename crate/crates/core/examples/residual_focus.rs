//! Data residual norm as a focus measure: reconstruct a point phantom over
//! the speed-of-sound grid and report R at each value.

use oatk_core::acoustic::{EirSpec, ForwardOperator};
use oatk_core::analysis::{residual_norm, ResidualOptions};
use oatk_core::direct::backproject;
use oatk_core::synthesis::{make_phantom, PhantomKind};
use oatk_core::{ArrayGeometry, ImageGrid, SosGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> oatk_core::Result<()> {
    let geometry = ArrayGeometry {
        n_detectors: 64,
        ..ArrayGeometry::default().with_time_window(512, 800)
    };
    let grid = ImageGrid::square(64, 0.0064);
    let eir = Some(EirSpec::default());
    let p = make_phantom(PhantomKind::Points(4), 64, 0.0064, &mut ChaCha8Rng::seed_from_u64(11))?;
    let s = ForwardOperator::new(geometry.clone(), grid, 1500.0, eir.clone())?.forward(&p)?;

    let mut best = (f64::INFINITY, 0.0);
    for sos in SosGrid::default().values() {
        let op = ForwardOperator::new(geometry.clone(), grid, sos, eir.clone())?;
        let r = residual_norm(&op, &backproject(&s, &grid, sos)?, &s, ResidualOptions::EVALUATION)?;
        println!("sos {sos:>6}: R = {r:.4}");
        if r < best.0 {
            best = (r, sos);
        }
    }
    println!("lowest residual at {} m/s", best.1);
    Ok(())
}
