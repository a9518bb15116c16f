//! Evaluation: data residual norm, image metrics, and spectral unmixing.

mod metrics;
mod residual;
mod unmix;

pub use metrics::{
    image_metrics, mae_optimal_scale, mse_optimal_scale, ssim, ssim_windowed, MetricReport,
    SSIM_WINDOW,
};
pub use residual::{optimal_scale, residual_norm, ResidualOptions};
pub use unmix::{nnls_gram, unmix_nnls};

