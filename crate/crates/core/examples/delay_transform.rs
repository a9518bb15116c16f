//! Delay-domain front end: summed map, per-channel stack, and the one-hot
//! speed-of-sound code.

use oatk_core::acoustic::{delay_transform, one_hot_sos, DelayMode, DelayOutput, ForwardOperator};
use oatk_core::{ArrayGeometry, ImageGrid, SosGrid};

fn main() -> oatk_core::Result<()> {
    let geometry = ArrayGeometry {
        n_detectors: 32,
        ..ArrayGeometry::default().with_time_window(512, 800)
    };
    let grid = ImageGrid::square(32, 0.0048);
    let mut p = grid.zeros();
    p.pixels[[10, 12]] = 1.0;
    let s = ForwardOperator::new(geometry, grid, 1500.0, None)?.forward(&p)?;

    if let DelayOutput::Summed(img) = delay_transform(&s, &grid, 1500.0, DelayMode::Summed)? {
        println!("summed map: {}x{}, max {:.3e}", img.ny(), img.nx(), img.max());
    }
    if let DelayOutput::PerChannel(stack) = delay_transform(&s, &grid, 1500.0, DelayMode::PerChannel)? {
        println!("per-channel stack: {:?}", stack.dim());
    }
    let code = one_hot_sos(1505.0, &SosGrid::default())?;
    println!("one-hot code for 1505 m/s: {code}");
    Ok(())
}
