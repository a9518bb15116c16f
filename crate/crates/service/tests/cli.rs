mod common;

use std::path::Path;
use std::process::{Command, Output};

use oatk::cli::exit;
use oatk::recon::{reconstruct, Method, ReconParams};
use oatk_core::io::{encode_image, read_sinogram_with, write_image, write_spectra, write_stack};
use oatk_core::{Image, MultispectralStack, SpectraMatrix};

fn oatk(args: &[&str], config: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_oatk"));
    cmd.args(args).env_remove("OATK_CONFIG").env("RUST_LOG", "warn");
    if let Some(c) = config {
        cmd.env("OATK_CONFIG", c);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn recon_writes_the_shared_code_path_image_and_prints_r() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::config(dir.path());
    common::write_dataset(&cfg);
    let cfg_path = dir.path().join("engine.cfg");
    common::write_config(&cfg, &cfg_path);
    let sino = cfg.dataset_root.join("disks/f0.oasg");
    let out = dir.path().join("bp.oaim");
    let png = dir.path().join("bp.png");

    let o = oatk(
        &["recon", "--method", "bp", "--sos", "1500", "--in", p(&sino), "--out", p(&out), "--preview", p(&png)],
        Some(&cfg_path),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let r_line = stdout(&o).lines().find(|l| l.starts_with("residual_norm=")).unwrap().to_string();
    let r: f64 = r_line["residual_norm=".len()..].parse().unwrap();

    let s = read_sinogram_with(&sino, &cfg.geometry).unwrap();
    let local = reconstruct(&cfg, &s, &ReconParams::new(Method::Bp, 1500.0), None).unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), encode_image(&local.image));
    assert_eq!(r, local.residual_norm.unwrap());
    assert!(std::fs::read(&png).unwrap().starts_with(b"\x89PNG"));

    // Off-grid speeds are fine in library mode and refused with --enforce-grid.
    let o = oatk(&["recon", "--sos", "1503", "--in", p(&sino), "--out", p(&out)], Some(&cfg_path));
    assert!(o.status.success(), "{}", stderr(&o));
    let o = oatk(&["recon", "--sos", "1503", "--enforce-grid", "--in", p(&sino), "--out", p(&out)], Some(&cfg_path));
    assert_eq!(o.status.code(), Some(exit::USAGE));

    // Model-based solves leave a report next to the image.
    let mb = dir.path().join("mb.oaim");
    let o = oatk(
        &["recon", "--method", "mb", "--lambda", "20", "--in", p(&sino), "--out", p(&mb)],
        Some(&cfg_path),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report = std::fs::read_to_string(dir.path().join("mb.oaim.report.txt")).unwrap();
    assert!(report.contains("lambda=20\n") && report.contains("objective_trace="));
}

#[test]
fn config_flag_is_overridden_by_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::config(dir.path());
    common::write_dataset(&cfg);
    let good = dir.path().join("good.cfg");
    common::write_config(&cfg, &good);
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "n_detectors = 32\nwarp = 9\n").unwrap();
    let sino = cfg.dataset_root.join("disks/f0.oasg");
    let out = dir.path().join("x.oaim");
    let args = ["recon", "--config", p(&good), "--in", p(&sino), "--out", p(&out)];

    assert!(oatk(&args, None).status.success());
    let o = oatk(&args, Some(&bad));
    assert_eq!(o.status.code(), Some(exit::CONFIG));
    let line = stderr(&o);
    assert!(line.starts_with("error: kind=config code=3 message="), "{line}");
}

#[test]
fn failures_map_to_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.oasg");
    let out = dir.path().join("o.oaim");

    let o = oatk(&["recon", "--bogus"], None);
    assert_eq!(o.status.code(), Some(exit::USAGE));
    assert!(stderr(&o).starts_with("error: kind=usage"));
    assert_eq!(oatk(&["frobnicate"], None).status.code(), Some(exit::USAGE));
    assert_eq!(oatk(&["--help"], None).status.code(), Some(exit::OK));

    let o = oatk(&["recon", "--in", p(&missing), "--out", p(&out)], None);
    assert_eq!(o.status.code(), Some(exit::IO));
    assert!(stderr(&o).starts_with("error: kind=io code=4"));

    let junk = dir.path().join("junk.oasg");
    std::fs::write(&junk, b"not a sinogram at all, but long enough").unwrap();
    let o = oatk(&["recon", "--in", p(&junk), "--out", p(&out)], None);
    assert_eq!(o.status.code(), Some(exit::DATA));

    let o = oatk(&["recon", "--in", p(&junk), "--out", p(&out)], Some(&dir.path().join("nope.cfg")));
    assert_eq!(o.status.code(), Some(exit::IO));
}

#[test]
fn simulate_is_reproducible_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::config(dir.path());
    let cfg_path = dir.path().join("engine.cfg");
    common::write_config(&cfg, &cfg_path);
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let o = oatk(
            &["simulate", "--input", "disks:2", "--input", "points", "--count", "2", "--seed", seed, "--out", p(&out)],
            Some(&cfg_path),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        let text = stdout(&o);
        assert!(text.contains("items=4"), "{text}");
        text
    };
    assert_eq!(run("7", "a"), run("7", "b"));
    assert_ne!(run("7", "a"), run("8", "c"));
    let o = oatk(&["simulate", "--input", "triangles", "--out", p(&dir.path().join("d"))], None);
    assert_eq!(o.status.code(), Some(exit::USAGE));
}

#[test]
fn metrics_and_unmix_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let img = |v: f64| Image::new(ndarray::Array2::from_shape_fn((24, 24), |(r, c)| v * ((r * 24 + c) % 7) as f64), [0.0024; 2]).unwrap();
    let a = dir.path().join("a.oaim");
    write_image(&img(1.0), &a).unwrap();
    let o = oatk(&["metrics", "--rec", p(&a), "--ref", p(&a)], None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("ssim=1\n") && stdout(&o).contains("mae=0\n"), "{}", stdout(&o));

    // Two chromophores, three wavelengths; pixel weights (1, 2).
    let wl = vec![750.0, 800.0, 850.0];
    let h = ndarray::array![[1.0, 0.5, 0.2], [0.1, 0.4, 1.0]];
    let spectra = SpectraMatrix::new(vec!["hb".into(), "hbo2".into()], wl.clone(), h.clone()).unwrap();
    let images = (0..3).map(|k| img(1.0 * h[[0, k]] + 2.0 * h[[1, k]])).collect();
    let stack_dir = dir.path().join("stack");
    write_stack(&MultispectralStack::new(images, wl).unwrap(), &stack_dir).unwrap();
    let spectra_path = dir.path().join("spectra.csv");
    write_spectra(&spectra, &spectra_path).unwrap();
    let out = dir.path().join("maps");
    let o = oatk(&["unmix", "--stack", p(&stack_dir), "--spectra", p(&spectra_path), "--out", p(&out)], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let hbo2 = oatk_core::io::read_image(out.join("hbo2.oaim")).unwrap();
    let want = img(2.0);
    for (x, y) in hbo2.pixels.iter().zip(want.pixels.iter()) {
        assert!((x - y).abs() < 1e-5 * (1.0 + y.abs()));
    }
}

#[test]
fn bench_reports_latency_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::config(dir.path());
    let cfg_path = dir.path().join("engine.cfg");
    common::write_config(&cfg, &cfg_path);
    let o = oatk(&["bench", "--frames", "5", "--method", "bp,delay", "--no-pace"], Some(&cfg_path));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("frame=")).count(), 10);
    for m in ["bp", "delay"] {
        let line = text.lines().find(|l| l.starts_with(&format!("method={m} frames=5"))).unwrap();
        assert!(line.contains("p50_ms=") && line.contains("p95_ms=") && line.contains("fps=") && line.contains("budget_40ms="));
    }
    assert_eq!(oatk(&["bench", "--frames", "0"], Some(&cfg_path)).status.code(), Some(exit::USAGE));
}
