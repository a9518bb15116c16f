//! Non-negative shearlet-ℓ1 model-based reconstruction,
//! `min_{p ≥ 0} ‖M p − s‖² + λ ‖SH p‖₁`, solved by SpaRSA: a
//! Barzilai–Borwein step on the data term followed by frame-domain soft
//! thresholding and projection onto the non-negative orthant.

use std::sync::atomic::{AtomicBool, Ordering};

use log::debug;

use crate::acoustic::{check_grid, check_sinogram, ForwardOperator};
use crate::analysis::{residual_norm, ResidualOptions};
use crate::data::{Image, Sinogram};
use crate::direct::backproject;
use crate::error::{Error, Result};
use crate::shearlet::ShearletSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Value(f64),
    /// Resolve by L-curve selection before solving.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MbConfig {
    pub lambda: Lambda,
    pub max_iters: usize,
    /// Stop once the relative objective change stays below this value for
    /// `stall_iters` consecutive iterations.
    pub rel_obj_tol: f64,
    pub stall_iters: usize,
    /// Bounds on the Barzilai–Borwein curvature estimate.
    pub bb_bounds: (f64, f64),
    /// The next iteration starts from `max(α_BB, bb_memory · α_accepted)`,
    /// which spares most backtracking when the BB estimate undershoots the
    /// step the thresholded update can take. Zero gives plain BB.
    pub bb_memory: f64,
    /// Curvature `α` of the first iteration; `None` takes the Rayleigh
    /// quotient of the data-term Hessian along the initial gradient. Passing a
    /// previous [`SolveReport::final_step`] resumes that solve exactly.
    pub initial_step: Option<f64>,
    /// Reject steps that increase the objective.
    pub monotone: bool,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    /// Iteration budget for each solve of an L-curve sweep.
    pub lcurve_iters: usize,
    pub lcurve_points: usize,
}

impl Default for MbConfig {
    fn default() -> Self {
        Self {
            lambda: Lambda::Auto,
            max_iters: 200,
            rel_obj_tol: 1e-6,
            stall_iters: 3,
            bb_bounds: (1e-8, 1e8),
            bb_memory: 0.5,
            initial_step: None,
            monotone: true,
            backtrack_factor: 2.0,
            max_backtracks: 60,
            lcurve_iters: 50,
            lcurve_points: 7,
        }
    }
}

impl MbConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda: Lambda::Value(lambda),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Lambda::Value(l) = self.lambda {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(Error::param(format!("lambda must be finite and >= 0, got {l}")));
            }
        }
        if !(self.rel_obj_tol > 0.0) || self.stall_iters == 0 {
            return Err(Error::param("stopping tolerances must be positive"));
        }
        if self.initial_step.is_some_and(|a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::param("initial step must be positive and finite"));
        }
        let (lo, hi) = self.bb_bounds;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::param("BB bounds must satisfy 0 < lo < hi"));
        }
        if !(0.0..1.0).contains(&self.bb_memory) {
            return Err(Error::param("bb_memory must lie in [0, 1)"));
        }
        if !(self.backtrack_factor > 1.0) {
            return Err(Error::param("backtracking factor must exceed 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// `‖M p − s‖² + λ ‖SH p‖₁`, starting with the initializer's value.
    pub objective_trace: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    /// Data residual norm of the result (optimal scaling, no clamping);
    /// `None` when the sinogram has no energy within the model reach.
    pub residual_norm_r: Option<f64>,
    pub lambda: f64,
    /// Curvature `α` of the last accepted step. The fixed points of the
    /// thresholded update depend on `α`, so a restart that should continue
    /// this solve passes it back as [`MbConfig::initial_step`].
    pub final_step: f64,
}

impl SolveReport {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the initial value")
    }

    /// Key-value text summary.
    pub fn to_sidecar(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("lambda={}\n", self.lambda));
        s.push_str(&format!("iterations_run={}\n", self.iterations_run));
        s.push_str(&format!("converged={}\n", self.converged));
        match self.residual_norm_r {
            Some(r) => s.push_str(&format!("residual_norm_r={r}\n")),
            None => s.push_str("residual_norm_r=nan\n"),
        }
        s.push_str(&format!("final_step={}\n", self.final_step));
        s.push_str(&format!("final_objective={}\n", self.final_objective()));
        let trace: Vec<String> = self.objective_trace.iter().map(|v| v.to_string()).collect();
        s.push_str(&format!("objective_trace={}\n", trace.join(",")));
        s
    }
}

#[derive(Debug, Clone, Default)]
pub enum Initializer {
    /// Clamped backprojection times its least-squares optimal scale.
    #[default]
    ScaledBackprojection,
    Zero,
    Image(Image),
}

/// Per-solve options that do not belong in the persistent configuration.
#[derive(Debug, Default, Clone, Copy)]
pub struct SolveControl<'a> {
    pub cancel: Option<&'a AtomicBool>,
}

fn initial_image(op: &ForwardOperator, s: &Sinogram, init: &Initializer) -> Result<Image> {
    match init {
        Initializer::Zero => Ok(op.grid().zeros()),
        Initializer::Image(img) => {
            check_grid(op.grid(), img)?;
            Ok(img.clamped_non_negative())
        }
        Initializer::ScaledBackprojection => {
            let bp = backproject(s, op.grid(), op.sos_mps())?.clamped_non_negative();
            let mp = op.forward(&bp)?;
            let denom = mp.norm_sq();
            if denom == 0.0 {
                return Ok(op.grid().zeros());
            }
            let alpha = (mp.dot(s) / denom).max(0.0);
            Ok(bp.scaled(alpha))
        }
    }
}

struct State {
    p: Image,
    residual: Sinogram,
    data: f64,
    reg: f64,
}

impl State {
    fn evaluate(op: &ForwardOperator, sys: &ShearletSystem, s: &Sinogram, p: Image) -> Result<Self> {
        let mut residual = op.forward(&p)?;
        residual.samples -= &s.samples;
        let data = residual.norm_sq();
        let reg = sys.analysis(&p)?.l1_norm();
        Ok(Self {
            p,
            residual,
            data,
            reg,
        })
    }

    fn objective(&self, lambda: f64) -> f64 {
        self.data + lambda * self.reg
    }
}

/// Solve with a numeric λ. `Lambda::Auto` is rejected; resolve it with
/// [`super::l_curve_select`] or use [`super::reconstruct_model_based`].
pub fn sparsa_reconstruct(
    op: &ForwardOperator,
    sys: &ShearletSystem,
    s: &Sinogram,
    cfg: &MbConfig,
    init: &Initializer,
    control: SolveControl<'_>,
) -> Result<(Image, SolveReport)> {
    cfg.validate()?;
    let lambda = match cfg.lambda {
        Lambda::Value(l) => l,
        Lambda::Auto => return Err(Error::LambdaUnresolved),
    };
    check_sinogram(op.geometry(), s)?;
    if sys.shape() != (op.grid().ny, op.grid().nx) {
        return Err(Error::dims("shearlet system does not match the image grid"));
    }
    let (bb_lo, bb_hi) = cfg.bb_bounds;

    let mut state = State::evaluate(op, sys, s, initial_image(op, s, init)?)?;
    let mut obj = state.objective(lambda);
    if !obj.is_finite() {
        return Err(Error::NonFiniteObjective(0));
    }
    let mut trace = vec![obj];
    let mut grad = op.adjoint(&state.residual)?;
    grad.pixels *= 2.0;

    let grad_norm = grad.norm_sq();
    let mut alpha = match cfg.initial_step {
        Some(a) => a.clamp(bb_lo, bb_hi),
        None if grad_norm > 0.0 => (2.0 * op.forward(&grad)?.norm_sq() / grad_norm).clamp(bb_lo, bb_hi),
        None => 1.0,
    };

    let mut last_step = alpha;
    let mut converged = false;
    let mut quiet = 0;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        if control.cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Err(Error::Cancelled);
        }
        iterations += 1;

        let mut step = alpha;
        let mut backtracks = 0;
        let candidate = loop {
            let mut v = state.p.clone();
            v.pixels.scaled_add(-1.0 / step, &grad.pixels);
            let coeffs = sys.analysis(&v)?.soft_threshold(lambda / step)?;
            let p_new = sys.synthesis(&coeffs, v.fov_m)?.clamped_non_negative();
            let next = State::evaluate(op, sys, s, p_new)?;
            let next_obj = next.objective(lambda);
            if !next_obj.is_finite() {
                return Err(Error::NonFiniteObjective(iterations));
            }
            if !cfg.monotone || next_obj <= obj {
                break Some(next);
            }
            backtracks += 1;
            if backtracks > cfg.max_backtracks {
                break None;
            }
            step *= cfg.backtrack_factor;
        };

        let Some(next) = candidate else {
            // No decrease at any step length: a fixed point of the iteration.
            debug!("sparsa: no descent after {} backtracks at iteration {iterations}", cfg.max_backtracks);
            trace.push(obj);
            converged = true;
            break;
        };

        let next_obj = next.objective(lambda);
        last_step = step;
        let dp = &next.p.pixels - &state.p.pixels;
        let dp_norm = dp.iter().map(|v| v * v).sum::<f64>();
        let dr_norm = (&next.residual.samples - &state.residual.samples)
            .iter()
            .map(|v| v * v)
            .sum::<f64>();
        if dp_norm > 0.0 {
            let bb = 2.0 * dr_norm / dp_norm;
            alpha = bb.max(cfg.bb_memory * step).clamp(bb_lo, bb_hi);
        }

        let rel = (obj - next_obj).abs() / obj.abs().max(f64::MIN_POSITIVE);
        state = next;
        obj = next_obj;
        trace.push(obj);
        grad = op.adjoint(&state.residual)?;
        grad.pixels *= 2.0;

        if obj == 0.0 {
            converged = true;
            break;
        }
        quiet = if rel < cfg.rel_obj_tol { quiet + 1 } else { 0 };
        if quiet >= cfg.stall_iters {
            converged = true;
            break;
        }
    }

    let residual_norm_r = match residual_norm(
        op,
        &state.p,
        s,
        ResidualOptions {
            clamp_negatives: false,
            optimal_scale: true,
        },
    ) {
        Ok(r) => Some(r),
        Err(Error::ZeroNorm(_)) => None,
        Err(e) => return Err(e),
    };
    Ok((
        state.p,
        SolveReport {
            objective_trace: trace,
            iterations_run: iterations,
            converged,
            residual_norm_r,
            lambda,
            final_step: last_step,
        },
    ))
}
