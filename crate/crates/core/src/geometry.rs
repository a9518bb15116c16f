//! Detector array geometry and the speed-of-sound grid.

use crate::error::{Error, Result};

/// Concave detector arc plus the sampling clock.
///
/// Coordinates are in meters with the origin at the image center, `x` to the
/// right and `y` pointing up toward the probe. Detector `k` sits at
/// `(cx + R sin θ_k, cy + R cos θ_k)` with `θ_k` uniform over `±coverage/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub n_detectors: usize,
    pub concavity_radius_m: f64,
    pub angular_coverage_deg: f64,
    pub center_of_curvature_m: [f64; 2],
    pub sampling_rate_hz: f64,
    pub n_time_samples: usize,
    /// Leading samples that were cropped off; sample `n` was recorded at
    /// `(n + t0_offset_samples) / sampling_rate_hz` after the laser pulse.
    pub t0_offset_samples: usize,
}

impl Default for ArrayGeometry {
    fn default() -> Self {
        Self {
            n_detectors: 256,
            concavity_radius_m: 0.04,
            angular_coverage_deg: 125.0,
            center_of_curvature_m: [0.0, 0.0],
            sampling_rate_hz: 40e6,
            n_time_samples: 2030,
            t0_offset_samples: 0,
        }
    }
}

impl ArrayGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.n_detectors < 2 {
            return Err(Error::param("n_detectors must be at least 2"));
        }
        if !(self.concavity_radius_m > 0.0) {
            return Err(Error::param("concavity_radius must be positive"));
        }
        if !(self.angular_coverage_deg > 0.0 && self.angular_coverage_deg <= 360.0) {
            return Err(Error::param("angular_coverage must lie in (0, 360]"));
        }
        if !(self.sampling_rate_hz > 0.0) {
            return Err(Error::param("sampling_rate must be positive"));
        }
        if self.n_time_samples == 0 {
            return Err(Error::param("n_time_samples must be positive"));
        }
        if !self.center_of_curvature_m.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("center_of_curvature"));
        }
        Ok(())
    }

    /// Sampling interval in seconds.
    pub fn dt(&self) -> f64 {
        1.0 / self.sampling_rate_hz
    }

    /// Angle of detector `k` from the upward vertical, in radians.
    pub fn detector_angle(&self, k: usize) -> f64 {
        let half = 0.5 * self.angular_coverage_deg.to_radians();
        let n = self.n_detectors as f64;
        if (self.angular_coverage_deg - 360.0).abs() < 1e-12 {
            // Full ring: avoid a duplicated detector at ±180°.
            -half + (k as f64) * (2.0 * half) / n
        } else {
            -half + (k as f64) * (2.0 * half) / (n - 1.0)
        }
    }

    pub fn detector_position(&self, k: usize) -> [f64; 2] {
        let theta = self.detector_angle(k);
        let [cx, cy] = self.center_of_curvature_m;
        let r = self.concavity_radius_m;
        [cx + r * theta.sin(), cy + r * theta.cos()]
    }

    pub fn detector_positions(&self) -> Vec<[f64; 2]> {
        (0..self.n_detectors)
            .map(|k| self.detector_position(k))
            .collect()
    }

    /// Same array and clock with a different record length and offset.
    pub fn with_time_window(&self, n_time_samples: usize, t0_offset_samples: usize) -> Self {
        Self {
            n_time_samples,
            t0_offset_samples,
            ..self.clone()
        }
    }
}

/// Discrete set of speeds of sound, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SosGrid {
    pub min_mps: f64,
    pub max_mps: f64,
    pub step_mps: f64,
}

impl Default for SosGrid {
    fn default() -> Self {
        Self {
            min_mps: 1475.0,
            max_mps: 1525.0,
            step_mps: 5.0,
        }
    }
}

impl SosGrid {
    pub fn new(min_mps: f64, max_mps: f64, step_mps: f64) -> Result<Self> {
        let grid = Self {
            min_mps,
            max_mps,
            step_mps,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_mps > 0.0) || !(self.max_mps >= self.min_mps) {
            return Err(Error::param("sos grid needs step > 0 and max >= min"));
        }
        let steps = (self.max_mps - self.min_mps) / self.step_mps;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::param(
                "sos grid range is not divisible by its step",
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.max_mps - self.min_mps) / self.step_mps).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.min_mps + i as f64 * self.step_mps)
            .collect()
    }

    /// Grid index of `sos`, or `None` when it is off the grid.
    pub fn index_of(&self, sos_mps: f64) -> Option<usize> {
        let pos = (sos_mps - self.min_mps) / self.step_mps;
        let idx = pos.round();
        if (pos - idx).abs() > 1e-6 || idx < 0.0 || idx as usize >= self.len() {
            None
        } else {
            Some(idx as usize)
        }
    }

    pub fn contains(&self, sos_mps: f64) -> bool {
        self.index_of(sos_mps).is_some()
    }
}
