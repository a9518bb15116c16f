//! Analytic test phantoms on a square grid. Coordinates below are in pixels
//! with the origin at the image center.
//!
//! - `disks:N`: N disks with centers within 0.3·size of the center, radii in
//!   [0.05, 0.12]·size and amplitudes in [0.5, 1]. Later disks overwrite
//!   earlier ones, so every pixel is 0 or one disk's amplitude.
//! - `points:N`: N distinct unit pixels within the central half of the grid.
//! - `cartoon`: an ellipse of amplitude 0.3 (semi-axes 0.35·size, 0.25·size)
//!   holding two disks of amplitude 1.0 and 0.7 and a vessel segment of
//!   amplitude 0.8 and width 0.03·size.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::Rng;

use crate::data::Image;
use crate::error::{Error, Result};

pub const MIN_PHANTOM_SIZE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomKind {
    Disks(usize),
    Points(usize),
    Cartoon,
}

impl FromStr for PhantomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, count) = match s.split_once(':') {
            Some((n, c)) => {
                let c = c
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::param(format!("bad phantom count in {s:?}")))?;
                (n.trim(), Some(c))
            }
            None => (s.trim(), None),
        };
        match (name, count) {
            ("disks", c) => Ok(Self::Disks(c.unwrap_or(3))),
            ("points", c) => Ok(Self::Points(c.unwrap_or(1))),
            ("cartoon", None) => Ok(Self::Cartoon),
            _ => Err(Error::param(format!(
                "unsupported phantom {s:?}; expected disks[:N], points[:N] or cartoon"
            ))),
        }
    }
}

impl fmt::Display for PhantomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Disks(n) => write!(f, "disks:{n}"),
            Self::Points(n) => write!(f, "points:{n}"),
            Self::Cartoon => write!(f, "cartoon"),
        }
    }
}

fn centered(size: usize, r: usize, c: usize) -> (f64, f64) {
    let h = 0.5 * size as f64;
    (c as f64 + 0.5 - h, h - (r as f64 + 0.5))
}

fn paint_disk(img: &mut Array2<f64>, cx: f64, cy: f64, radius: f64, amp: f64) {
    let size = img.nrows();
    for ((r, c), v) in img.indexed_iter_mut() {
        let (x, y) = centered(size, r, c);
        if (x - cx).powi(2) + (y - cy).powi(2) <= radius * radius {
            *v = amp;
        }
    }
}

/// Square phantom of side `size` covering `fov_m`.
pub fn make_phantom<R: Rng + ?Sized>(kind: PhantomKind, size: usize, fov_m: f64, rng: &mut R) -> Result<Image> {
    if size < MIN_PHANTOM_SIZE {
        return Err(Error::param(format!(
            "phantom size must be at least {MIN_PHANTOM_SIZE}, got {size}"
        )));
    }
    let n = size as f64;
    let mut px = Array2::zeros((size, size));
    match kind {
        PhantomKind::Disks(count) => {
            if count == 0 {
                return Err(Error::param("disk phantom needs at least one disk"));
            }
            for _ in 0..count {
                let rho = 0.3 * n * rng.random::<f64>().sqrt();
                let phi = rng.random_range(0.0..std::f64::consts::TAU);
                let radius = rng.random_range(0.05..=0.12) * n;
                let amp = rng.random_range(0.5..=1.0);
                paint_disk(&mut px, rho * phi.cos(), rho * phi.sin(), radius, amp);
            }
        }
        PhantomKind::Points(count) => {
            let lo = size / 4;
            let span = size / 2;
            if count == 0 || count > span * span {
                return Err(Error::param(format!("cannot place {count} points")));
            }
            let mut placed = 0;
            while placed < count {
                let (r, c) = (lo + rng.random_range(0..span), lo + rng.random_range(0..span));
                if px[[r, c]] == 0.0 {
                    px[[r, c]] = 1.0;
                    placed += 1;
                }
            }
        }
        PhantomKind::Cartoon => {
            let (a, b) = (0.35 * n, 0.25 * n);
            let tilt = rng.random_range(-0.5..0.5f64);
            let (ct, st) = (tilt.cos(), tilt.sin());
            for ((r, c), v) in px.indexed_iter_mut() {
                let (x, y) = centered(size, r, c);
                let (u, w) = (ct * x + st * y, -st * x + ct * y);
                if (u / a).powi(2) + (w / b).powi(2) <= 1.0 {
                    *v = 0.3;
                }
            }
            let jitter = |rng: &mut R| rng.random_range(-0.04..0.04) * n;
            paint_disk(&mut px, -0.15 * n + jitter(rng), 0.05 * n + jitter(rng), 0.07 * n, 1.0);
            paint_disk(&mut px, 0.15 * n + jitter(rng), -0.05 * n + jitter(rng), 0.05 * n, 0.7);
            // Vessel: segment between two points inside the ellipse.
            let (x0, y0) = (-0.25 * n, -0.12 * n + jitter(rng));
            let (x1, y1) = (0.25 * n, 0.12 * n + jitter(rng));
            let half_width = 0.015 * n;
            let (dx, dy) = (x1 - x0, y1 - y0);
            let len_sq = dx * dx + dy * dy;
            for ((r, c), v) in px.indexed_iter_mut() {
                let (x, y) = centered(size, r, c);
                let t = (((x - x0) * dx + (y - y0) * dy) / len_sq).clamp(0.0, 1.0);
                let (ex, ey) = (x - x0 - t * dx, y - y0 - t * dy);
                if ex * ex + ey * ey <= half_width * half_width {
                    *v = 0.8;
                }
            }
        }
    }
    Image::new(px, [fov_m, fov_m])
}
