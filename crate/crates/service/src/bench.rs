//! Streaming benchmark: replay frames at up to 25 Hz and time each
//! reconstruction against the 40 ms frame budget.

use std::fmt;
use std::time::{Duration, Instant};

use oatk_core::{Error, Result, Sinogram};
use serde::Serialize;

use crate::config::EngineConfig;
use crate::recon::{reconstruct, Method, ReconParams};

pub const FRAME_RATE_HZ: f64 = 25.0;
pub const FRAME_BUDGET_MS: f64 = 1e3 / FRAME_RATE_HZ;

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub method: Method,
    pub n_frames: usize,
    pub latencies_ms: Vec<f64>,
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
    /// Frames reconstructed per second of reconstruction time.
    pub fps: f64,
    /// `p95 <= 40 ms`.
    pub budget_met: bool,
}

/// Nearest-rank percentile of `sorted` (ascending), `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

impl BenchReport {
    pub fn from_latencies(method: Method, latencies_ms: Vec<f64>) -> Self {
        let n = latencies_ms.len();
        let mut sorted = latencies_ms.clone();
        sorted.sort_by(f64::total_cmp);
        let total: f64 = sorted.iter().sum();
        let p95 = percentile(&sorted, 0.95);
        Self {
            method,
            n_frames: n,
            mean_ms: total / n as f64,
            p50_ms: percentile(&sorted, 0.5),
            p95_ms: p95,
            fps: if total > 0.0 { n as f64 * 1e3 / total } else { f64::INFINITY },
            budget_met: p95 <= FRAME_BUDGET_MS,
            latencies_ms,
        }
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "method={} frames={} mean_ms={:.3} p50_ms={:.3} p95_ms={:.3} fps={:.2} budget_40ms={}",
            self.method,
            self.n_frames,
            self.mean_ms,
            self.p50_ms,
            self.p95_ms,
            self.fps,
            if self.budget_met { "met" } else { "missed" }
        )
    }
}

/// Reconstruct `n_frames` frames, cycling through `frames`. With `pace`
/// frame `i` is not started before `i / 25 s`; latency excludes that wait.
pub fn bench_stream(
    cfg: &EngineConfig,
    method: Method,
    sos_mps: f64,
    frames: &[Sinogram],
    n_frames: usize,
    pace: bool,
) -> Result<BenchReport> {
    if n_frames == 0 || frames.is_empty() {
        return Err(Error::InvalidParameter("bench needs at least one frame".into()));
    }
    let params = ReconParams {
        with_residual: false,
        ..ReconParams::new(method, sos_mps)
    };
    let period = Duration::from_secs_f64(1.0 / FRAME_RATE_HZ);
    let start = Instant::now();
    let mut latencies = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        if pace {
            let due = start + period * i as u32;
            if let Some(wait) = due.checked_duration_since(Instant::now()) {
                std::thread::sleep(wait);
            }
        }
        let t = Instant::now();
        reconstruct(cfg, &frames[i % frames.len()], &params, None)?;
        latencies.push(t.elapsed().as_secs_f64() * 1e3);
    }
    Ok(BenchReport::from_latencies(method, latencies))
}
