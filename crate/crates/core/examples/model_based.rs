//! Non-negative shearlet-ℓ1 reconstruction of a disk phantom, compared with
//! clamped backprojection.

use oatk_core::acoustic::{EirSpec, ForwardOperator};
use oatk_core::analysis::{residual_norm, ResidualOptions};
use oatk_core::direct::backproject;
use oatk_core::shearlet::ShearletSystem;
use oatk_core::solver::{lambda_upper_bound, reconstruct_model_based, MbConfig};
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
    let op = ForwardOperator::new(geometry, grid, 1500.0, Some(EirSpec::default()))?;
    let p = make_phantom(PhantomKind::Disks(3), 64, 0.0064, &mut ChaCha8Rng::seed_from_u64(7))?;
    let s = op.forward(&p)?;

    let bp = backproject(&s, &grid, 1500.0)?;
    let r_bp = residual_norm(&op, &bp, &s, ResidualOptions::EVALUATION)?;

    let sys = ShearletSystem::new(64, 64)?;
    let lambda = 1e-2 * lambda_upper_bound(&op, &sys, &s)?;
    let (img, report) = reconstruct_model_based(&op, &s, &MbConfig::with_lambda(lambda))?;
    let r_mb = residual_norm(&op, &img, &s, ResidualOptions::EVALUATION)?;

    println!("lambda = {lambda:.4e}, {} iterations, converged: {}", report.iterations_run, report.converged);
    println!("objective {:.6e} -> {:.6e}", report.objective_trace[0], report.final_objective());
    println!("R(BP clamped) = {r_bp:.4}, R(MB) = {r_mb:.4}");
    Ok(())
}
