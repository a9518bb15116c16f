//! End-to-end: synthesize, reconstruct, and score.

use oatk_core::acoustic::{EirSpec, ForwardOperator};
use oatk_core::analysis::{image_metrics, residual_norm, ResidualOptions};
use oatk_core::direct::backproject;
use oatk_core::io::{read_image, read_sinogram_with};
use oatk_core::shearlet::ShearletSystem;
use oatk_core::solver::{lambda_upper_bound, reconstruct_model_based, MbConfig};
use oatk_core::synthesis::{generate_dataset, manifest_hash, PhantomKind, SourceItem, SynthesisConfig};
use oatk_core::ArrayGeometry;

#[test]
fn synthesized_items_reconstruct_at_their_recorded_sos() {
    let dir = tempfile::tempdir().unwrap();
    let geometry = ArrayGeometry {
        n_detectors: 32,
        ..ArrayGeometry::default().with_time_window(600, 700)
    };
    let cfg = SynthesisConfig {
        image_size: 32,
        fov_m: 0.0032,
        rng_seed: 17,
        apply_acquisition_filters: false,
        ..SynthesisConfig::default()
    };
    let eir = EirSpec::default();
    let sources = vec![SourceItem::Phantom(PhantomKind::Disks(2)); 2];
    let manifest = generate_dataset(&sources, dir.path(), &geometry, Some(&eir), &cfg).unwrap();
    assert_eq!(manifest_hash(dir.path()).unwrap(), manifest.hash);

    for item in &manifest.items {
        let s = read_sinogram_with(dir.path().join(&item.sinogram_file), &geometry).unwrap();
        let target = read_image(dir.path().join(&item.target_file)).unwrap();
        let op = ForwardOperator::new(s.geometry.clone(), cfg.grid(), item.sos_mps, Some(eir.clone())).unwrap();

        let bp = backproject(&s, &cfg.grid(), item.sos_mps).unwrap();
        let r_bp = residual_norm(&op, &bp, &s, ResidualOptions::EVALUATION).unwrap();
        let sys = ShearletSystem::new(32, 32).unwrap();
        let lambda = 1e-2 * lambda_upper_bound(&op, &sys, &s).unwrap();
        let cfg_mb = MbConfig {
            max_iters: 60,
            ..MbConfig::with_lambda(lambda)
        };
        let (mb, report) = reconstruct_model_based(&op, &s, &cfg_mb).unwrap();
        let r_mb = residual_norm(&op, &mb, &s, ResidualOptions::EVALUATION).unwrap();
        assert!(r_mb < r_bp, "item {}: R(MB) {r_mb} vs R(BP) {r_bp}", item.index);
        assert!(report.objective_trace.windows(2).all(|w| w[1] <= w[0]));

        let m = image_metrics(&mb, &target, true).unwrap();
        assert!(m.ssim > 0.0 && m.mse_rel < 1.0, "{m:?}");
    }
}
