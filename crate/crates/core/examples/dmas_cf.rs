//! Delay-multiply-and-sum with coherence factor next to plain backprojection.

use oatk_core::acoustic::ForwardOperator;
use oatk_core::direct::{coherence_factor, reconstruct_direct, DirectMethod, DirectReconConfig};
use oatk_core::{ArrayGeometry, ImageGrid};

fn main() -> oatk_core::Result<()> {
    let geometry = ArrayGeometry {
        n_detectors: 64,
        ..ArrayGeometry::default().with_time_window(512, 800)
    };
    let grid = ImageGrid::square(48, 0.0048);
    let mut p = grid.zeros();
    p.pixels[[16, 20]] = 1.0;
    p.pixels[[30, 28]] = 0.5;
    let s = ForwardOperator::new(geometry, grid, 1500.0, None)?.forward(&p)?;

    for method in [DirectMethod::Backprojection, DirectMethod::DmasCf] {
        let img = reconstruct_direct(&s, &grid, &DirectReconConfig::new(method, 1500.0))?;
        println!("{method:?}: brightest pixel {:?}, max {:.3e}", img.argmax(), img.max());
    }
    let cf = coherence_factor(&s, &grid, 1500.0)?;
    println!("coherence factor at the sources: {:.3} {:.3}", cf.pixels[[16, 20]], cf.pixels[[30, 28]]);
    Ok(())
}
