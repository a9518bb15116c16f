//! Pick the regularization weight from an L-curve sweep.

use oatk_core::acoustic::ForwardOperator;
use oatk_core::shearlet::ShearletSystem;
use oatk_core::solver::{default_lambda_grid, l_curve_select, MbConfig, SolveControl};
use oatk_core::synthesis::{make_phantom, PhantomKind};
use oatk_core::{ArrayGeometry, ImageGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> oatk_core::Result<()> {
    let geometry = ArrayGeometry {
        n_detectors: 32,
        ..ArrayGeometry::default().with_time_window(320, 900)
    };
    let grid = ImageGrid::square(32, 0.0032);
    let op = ForwardOperator::new(geometry, grid, 1500.0, None)?;
    let p = make_phantom(PhantomKind::Cartoon, 32, 0.0032, &mut ChaCha8Rng::seed_from_u64(2))?;
    let s = op.forward(&p)?;

    let sys = ShearletSystem::new(32, 32)?;
    let cfg = MbConfig::default();
    let lambdas = default_lambda_grid(&op, &sys, &s, cfg.lcurve_points)?;
    let sel = l_curve_select(&op, &sys, &s, &lambdas, &cfg, SolveControl::default())?;
    println!("{:>12} {:>12} {:>12} {:>10}", "lambda", "residual", "||SH p||_1", "curvature");
    for (pt, k) in sel.points.iter().zip(&sel.curvature) {
        println!("{:>12.4e} {:>12.4e} {:>12.4e} {:>10.3}", pt.lambda, pt.residual_norm, pt.regularizer_norm, k);
    }
    println!("selected lambda = {:.4e} (point {}, degenerate: {})", sel.lambda, sel.index, sel.degenerate);
    Ok(())
}
