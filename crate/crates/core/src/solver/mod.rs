//! Model-based reconstruction.

mod lcurve;
mod sparsa;

pub use lcurve::{
    default_lambda_grid, l_curve_select, lambda_upper_bound, log_grid, menger_curvature,
    select_corner, LCurvePoint, LCurveSelection,
};
pub use sparsa::{
    sparsa_reconstruct, Initializer, Lambda, MbConfig, SolveControl, SolveReport,
};

use crate::acoustic::ForwardOperator;
use crate::data::{Image, Sinogram};
use crate::error::Result;
use crate::shearlet::ShearletSystem;

/// Build the shearlet system for the operator grid, resolve `Lambda::Auto`
/// with an L-curve sweep, and solve.
pub fn reconstruct_model_based(
    op: &ForwardOperator,
    s: &Sinogram,
    cfg: &MbConfig,
) -> Result<(Image, SolveReport)> {
    let sys = ShearletSystem::new(op.grid().ny, op.grid().nx)?;
    reconstruct_model_based_with(op, &sys, s, cfg, SolveControl::default())
}

pub fn reconstruct_model_based_with(
    op: &ForwardOperator,
    sys: &ShearletSystem,
    s: &Sinogram,
    cfg: &MbConfig,
    control: SolveControl<'_>,
) -> Result<(Image, SolveReport)> {
    let resolved = match cfg.lambda {
        Lambda::Value(_) => cfg.clone(),
        Lambda::Auto => {
            let grid = default_lambda_grid(op, sys, s, cfg.lcurve_points)?;
            let sel = l_curve_select(op, sys, s, &grid, cfg, control)?;
            log::info!("L-curve selected lambda = {}", sel.lambda);
            MbConfig {
                lambda: Lambda::Value(sel.lambda),
                ..cfg.clone()
            }
        }
    };
    sparsa_reconstruct(op, sys, s, &resolved, &Initializer::default(), control)
}
