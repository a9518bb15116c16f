//! Time direct reconstructions of a replayed frame stream against the 25 Hz
//! budget, at a reduced scale so it finishes quickly.

use oatk::bench::bench_stream;
use oatk::config::EngineConfig;
use oatk::recon::Method;
use oatk_core::{ArrayGeometry, Sinogram};

fn main() -> oatk_core::Result<()> {
    let mut cfg = EngineConfig::default();
    cfg.geometry = ArrayGeometry {
        n_detectors: 128,
        ..ArrayGeometry::default().with_time_window(1024, 400)
    };
    cfg.image_size = 128;
    cfg.fov_m = 0.0128;
    let frames = vec![Sinogram::zeros(&cfg.geometry)];
    for method in [Method::Bp, Method::Dmas, Method::Delay] {
        println!("{}", bench_stream(&cfg, method, 1500.0, &frames, 25, false)?);
    }
    Ok(())
}
