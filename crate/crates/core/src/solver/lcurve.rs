//! L-curve selection of the regularization weight: solve over a grid of λ,
//! place each solution at `(log ‖M p − s‖, log ‖SH p‖₁)`, and take the point
//! of largest Menger curvature.

use log::warn;

use super::sparsa::{sparsa_reconstruct, Initializer, Lambda, MbConfig, SolveControl, SolveReport};
use crate::acoustic::ForwardOperator;
use crate::data::{Image, Sinogram};
use crate::error::{Error, Result};
use crate::shearlet::ShearletSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LCurvePoint {
    pub lambda: f64,
    /// `‖M p − s‖₂`.
    pub residual_norm: f64,
    /// `‖SH p‖₁`.
    pub regularizer_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LCurveSelection {
    pub lambda: f64,
    pub index: usize,
    pub points: Vec<LCurvePoint>,
    /// Signed Menger curvature at each point; end points are zero.
    pub curvature: Vec<f64>,
    /// All points were collinear; `lambda` is the geometric median of the grid.
    pub degenerate: bool,
    /// The residual term never decreased along increasing λ.
    pub residual_monotone: bool,
}

/// Signed Menger curvature of the circle through `a`, `b`, `c`; positive for a
/// counter-clockwise turn.
pub fn menger_curvature(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    let cross = (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0);
    let ab = (b.0 - a.0).hypot(b.1 - a.1);
    let bc = (c.0 - b.0).hypot(c.1 - b.1);
    let ca = (a.0 - c.0).hypot(a.1 - c.1);
    let denom = ab * bc * ca;
    if denom == 0.0 {
        0.0
    } else {
        2.0 * cross / denom
    }
}

fn check_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.len() < 5 {
        return Err(Error::param("L-curve grid needs at least 5 values"));
    }
    if lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::param("L-curve grid values must be positive and finite"));
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param(
            "L-curve grid must be strictly increasing (degenerate grid)",
        ));
    }
    Ok(())
}

/// `n` values spaced evenly in log between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Geometric median of a sorted positive grid.
fn geometric_median(lambdas: &[f64]) -> f64 {
    let n = lambdas.len();
    if n % 2 == 1 {
        lambdas[n / 2]
    } else {
        (lambdas[n / 2 - 1] * lambdas[n / 2]).sqrt()
    }
}

/// Corner of an already computed curve. `points` must be ordered by
/// increasing λ.
pub fn select_corner(points: &[LCurvePoint]) -> Result<LCurveSelection> {
    let lambdas: Vec<f64> = points.iter().map(|p| p.lambda).collect();
    check_grid(&lambdas)?;
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            (
                p.residual_norm.max(f64::MIN_POSITIVE).ln(),
                p.regularizer_norm.max(f64::MIN_POSITIVE).ln(),
            )
        })
        .collect();
    let mut curvature = vec![0.0; points.len()];
    let mut collinear = true;
    for i in 1..points.len() - 1 {
        let (a, b, c) = (xy[i - 1], xy[i], xy[i + 1]);
        curvature[i] = menger_curvature(a, b, c);
        let cross = (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0);
        let scale = (b.0 - a.0).hypot(b.1 - a.1) * (c.0 - b.0).hypot(c.1 - b.1);
        if cross.abs() > 1e-9 * scale.max(f64::MIN_POSITIVE) {
            collinear = false;
        }
    }
    let residual_monotone = points
        .windows(2)
        .all(|w| w[1].residual_norm >= w[0].residual_norm * (1.0 - 1e-9));

    let best = (1..points.len() - 1)
        .filter(|&i| curvature[i] > 0.0)
        .max_by(|&a, &b| curvature[a].total_cmp(&curvature[b]));
    match (collinear, best) {
        (false, Some(index)) => Ok(LCurveSelection {
            lambda: lambdas[index],
            index,
            points: points.to_vec(),
            curvature,
            degenerate: false,
            residual_monotone,
        }),
        _ => {
            warn!("L-curve has no corner; falling back to the geometric median of the grid");
            let lambda = geometric_median(&lambdas);
            Ok(LCurveSelection {
                lambda,
                index: lambdas.len() / 2,
                points: points.to_vec(),
                curvature,
                degenerate: true,
                residual_monotone,
            })
        }
    }
}

/// Largest useful λ: above `2 ‖SH Mᵀ s‖∞` the zero image is optimal for the
/// unconstrained problem.
pub fn lambda_upper_bound(op: &ForwardOperator, sys: &ShearletSystem, s: &Sinogram) -> Result<f64> {
    let back = op.adjoint(s)?;
    let c = sys.analysis(&back)?;
    Ok(2.0 * c.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Default sweep: `n` log-spaced values over six decades below the upper bound.
pub fn default_lambda_grid(
    op: &ForwardOperator,
    sys: &ShearletSystem,
    s: &Sinogram,
    n: usize,
) -> Result<Vec<f64>> {
    let hi = lambda_upper_bound(op, sys, s)?;
    if !(hi > 0.0) {
        return Err(Error::ZeroNorm("back-projected sinogram"));
    }
    Ok(log_grid(hi * 1e-6, hi * 1e-1, n.max(5)))
}

/// Solve at every λ of `grid` with `cfg.lcurve_iters` iterations and pick the
/// corner. The sweep runs from the largest λ down, each solve warm-started
/// from the previous solution, which keeps the truncated solves comparable.
pub fn l_curve_select(
    op: &ForwardOperator,
    sys: &ShearletSystem,
    s: &Sinogram,
    grid: &[f64],
    cfg: &MbConfig,
    control: SolveControl<'_>,
) -> Result<LCurveSelection> {
    check_grid(grid)?;
    let mut points = Vec::with_capacity(grid.len());
    let mut init = Initializer::default();
    for &lambda in grid.iter().rev() {
        let sweep_cfg = MbConfig {
            lambda: Lambda::Value(lambda),
            max_iters: cfg.lcurve_iters,
            initial_step: None,
            ..cfg.clone()
        };
        let (p, report) = sparsa_reconstruct(op, sys, s, &sweep_cfg, &init, control)?;
        points.push(curve_point(op, sys, s, &p, &report)?);
        init = Initializer::Image(p);
    }
    points.reverse();
    let sel = select_corner(&points)?;
    if !sel.residual_monotone {
        warn!("L-curve residual is not monotone in lambda; the sweep solves may be under-converged");
    }
    Ok(sel)
}

fn curve_point(
    op: &ForwardOperator,
    sys: &ShearletSystem,
    s: &Sinogram,
    p: &Image,
    report: &SolveReport,
) -> Result<LCurvePoint> {
    let mut r = op.forward(p)?;
    r.samples -= &s.samples;
    Ok(LCurvePoint {
        lambda: report.lambda,
        residual_norm: r.norm_sq().sqrt(),
        regularizer_norm: sys.analysis(p)?.l1_norm(),
    })
}
