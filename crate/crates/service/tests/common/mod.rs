#![allow(dead_code)]

use std::path::Path;

use oatk::config::EngineConfig;
use oatk_core::acoustic::ForwardOperator;
use oatk_core::io::write_sinogram;
use oatk_core::solver::Lambda;
use oatk_core::synthesis::{make_phantom, PhantomKind};
use oatk_core::ArrayGeometry;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Small engine: 32 detectors, 32x32 images.
pub fn config(root: &Path) -> EngineConfig {
    let mut cfg = EngineConfig::default();
    cfg.geometry = ArrayGeometry {
        n_detectors: 32,
        ..ArrayGeometry::default().with_time_window(320, 900)
    };
    cfg.image_size = 32;
    cfg.fov_m = 0.0032;
    cfg.mb.lambda = Lambda::Value(50.0);
    cfg.mb.max_iters = 40;
    cfg.dataset_root = root.join("datasets");
    cfg
}

/// Dataset `disks` with two frames (wavelengths 750 and 800 nm) simulated
/// at 1500 m/s.
pub fn write_dataset(cfg: &EngineConfig) {
    let dir = cfg.dataset_root.join("disks");
    std::fs::create_dir_all(&dir).unwrap();
    let op = ForwardOperator::new(cfg.geometry.clone(), cfg.grid(), 1500.0, cfg.eir.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..2 {
        let p = make_phantom(PhantomKind::Disks(2), cfg.image_size, cfg.fov_m, &mut rng).unwrap();
        write_sinogram(&op.forward(&p).unwrap(), dir.join(format!("f{k}.oasg"))).unwrap();
    }
    std::fs::write(dir.join("frames.csv"), "frame,wavelength_nm,file\n0,750,f0.oasg\n1,800,f1.oasg\n").unwrap();
}

pub fn write_config(cfg: &EngineConfig, path: &Path) {
    std::fs::write(path, cfg.to_text()).unwrap();
}
