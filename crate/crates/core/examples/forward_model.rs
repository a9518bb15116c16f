//! Project a point absorber through the forward operator and check that the
//! adjoint is its transpose.

use oatk_core::acoustic::{EirSpec, ForwardOperator};
use oatk_core::{ArrayGeometry, ImageGrid};

fn main() -> oatk_core::Result<()> {
    let geometry = ArrayGeometry {
        n_detectors: 64,
        ..ArrayGeometry::default().with_time_window(512, 800)
    };
    let grid = ImageGrid::square(64, 0.0064);
    let op = ForwardOperator::new(geometry, grid, 1500.0, Some(EirSpec::default()))?;

    let mut p = grid.zeros();
    p.pixels[[32, 32]] = 1.0;
    let s = op.forward(&p)?;

    // Travel time of the central detector against the sample with the largest swing.
    let d = 32;
    let ch = s.samples.column(d);
    let peak = (0..ch.len()).max_by(|&a, &b| ch[a].abs().total_cmp(&ch[b].abs())).unwrap();
    let det = op.geometry().detector_position(d);
    let pix = grid.pixel_center(32, 32);
    let dist = ((det[0] - pix[0]).powi(2) + (det[1] - pix[1]).powi(2)).sqrt();
    let expected = dist / 1500.0 * op.geometry().sampling_rate_hz - 800.0;
    println!("detector {d}: peak at sample {peak}, travel time predicts {expected:.1}");

    let back = op.adjoint(&s)?;
    let lhs = s.norm_sq();
    let rhs = p.dot(&back);
    println!("<Mp, Mp> = {lhs:.6e}, <p, M^T M p> = {rhs:.6e}, rel diff {:.1e}", (lhs - rhs).abs() / lhs);
    println!("reach mask keeps {} of {} bins", op.reach_mask().count(), s.samples.len());
    Ok(())
}
