//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion, with
//! indented `info:` lines for context, and exits non-zero if any criterion
//! fails.
//!
//! Run alone with `cargo test -p oatk --test acceptance`.

use std::time::Instant;

use ndarray::Array2;
use oatk::bench::{bench_stream, FRAME_BUDGET_MS};
use oatk::config::EngineConfig;
use oatk::recon::Method;
use oatk_core::acoustic::{EirSpec, ForwardOperator};
use oatk_core::analysis::{
    image_metrics, mae_optimal_scale, mse_optimal_scale, optimal_scale, residual_norm, ssim, unmix_nnls,
    ResidualOptions,
};
use oatk_core::data::{default_wavelengths_nm, DEFAULT_CHROMOPHORES};
use oatk_core::direct::backproject;
use oatk_core::io::{decode_image, decode_sinogram, encode_image, encode_sinogram};
use oatk_core::shearlet::ShearletSystem;
use oatk_core::solver::{
    lambda_upper_bound, sparsa_reconstruct, Initializer, MbConfig, SolveControl, SolveReport,
};
use oatk_core::synthesis::{generate_dataset, make_phantom, manifest_hash, PhantomKind, SourceItem, SynthesisConfig};
use oatk_core::{ArrayGeometry, Image, ImageGrid, MultispectralStack, Sinogram, SpectraMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances.
const ADJOINT_TOL: f64 = 1e-5;
const ADJOINT_MAX_SECONDS: f64 = 60.0;
const FRAME_TOL: f64 = 1e-8;
const MB_MAX_RESIDUAL: f64 = 0.05;
const MB_MIN_WINS: usize = 19;
const RESTART_TOL: f64 = 1e-6;
const SCALE_TOL: f64 = 1e-6;
const UNMIX_TOL: f64 = 1e-6;
const FULL_BP_MAX_SECONDS: f64 = 5.0;

// Desk-scale problem shared by criteria 3 to 5.
const DESK_SIZE: usize = 64;
const DESK_FOV_M: f64 = 0.0064;
const DESK_DETECTORS: usize = 64;
const DESK_SAMPLES: usize = 512;
const DESK_T0: usize = 800;
const N_PHANTOMS: usize = 20;
const N_POINT_PHANTOMS: usize = 5;
/// λ as a fraction of the smallest weight that zeroes the solution.
const LAMBDA_FRACTION: f64 = 1e-2;
const TRUE_SOS: f64 = 1500.0;

struct Outcome {
    pass: bool,
    summary: String,
    info: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: String) -> Self {
        Self {
            pass,
            summary,
            info: Vec::new(),
        }
    }

    fn info(mut self, lines: impl IntoIterator<Item = String>) -> Self {
        self.info.extend(lines);
        self
    }
}

fn desk_geometry() -> ArrayGeometry {
    ArrayGeometry {
        n_detectors: DESK_DETECTORS,
        ..ArrayGeometry::default().with_time_window(DESK_SAMPLES, DESK_T0)
    }
}

fn desk_grid() -> ImageGrid {
    ImageGrid::square(DESK_SIZE, DESK_FOV_M)
}

fn desk_operator(sos: f64, eir: bool) -> ForwardOperator {
    ForwardOperator::new(desk_geometry(), desk_grid(), sos, eir.then(EirSpec::default)).unwrap()
}

fn phantom(kind: PhantomKind, seed: u64) -> Image {
    make_phantom(kind, DESK_SIZE, DESK_FOV_M, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn solve(op: &ForwardOperator, sys: &ShearletSystem, s: &Sinogram) -> (Image, SolveReport, MbConfig) {
    let lambda = LAMBDA_FRACTION * lambda_upper_bound(op, sys, s).unwrap();
    let cfg = MbConfig::with_lambda(lambda);
    let (img, report) =
        sparsa_reconstruct(op, sys, s, &cfg, &Initializer::default(), SolveControl::default()).unwrap();
    (img, report, cfg)
}

fn r_eval(op: &ForwardOperator, p: &Image, s: &Sinogram) -> f64 {
    residual_norm(op, p, s, ResidualOptions::EVALUATION).unwrap()
}

fn random_image(grid: &ImageGrid, rng: &mut ChaCha8Rng) -> Image {
    let mut img = grid.zeros();
    img.pixels.mapv_inplace(|_| rng.random_range(-1.0..1.0));
    img
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let g = ArrayGeometry {
        n_detectors: 64,
        ..ArrayGeometry::default().with_time_window(512, 800)
    };
    let grid = ImageGrid::square(128, 0.0128);
    let op = ForwardOperator::new(g.clone(), grid, TRUE_SOS, Some(EirSpec::default())).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x = random_image(&grid, &mut rng);
        let mut y = Sinogram::zeros(&g);
        y.samples.mapv_inplace(|_| rng.random_range(-1.0..1.0));
        let mx = op.forward(&x).unwrap();
        let gap = (mx.dot(&y) - x.dot(&op.adjoint(&y).unwrap())).abs();
        worst = worst.max(gap / (mx.norm_sq() * y.norm_sq()).sqrt());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst <= ADJOINT_TOL && secs < ADJOINT_MAX_SECONDS,
        format!(
            "adjoint consistency, 20 pairs at 128x128/64 det/512 samples: max gap {worst:.2e} (<= {ADJOINT_TOL:.0e}), {secs:.1} s (< {ADJOINT_MAX_SECONDS} s)"
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [64, 128, 416] {
        let sys = ShearletSystem::new(n, n).unwrap();
        let img = random_image(&ImageGrid::square(n, 0.01), &mut rng);
        let c = sys.analysis(&img).unwrap();
        let back = sys.synthesis(&c, img.fov_m).unwrap();
        let err = (&back.pixels - &img.pixels).mapv(|v| v * v).sum().sqrt() / img.norm_sq().sqrt();
        let energy = c.norm_sq() / img.norm_sq();
        pass &= err <= FRAME_TOL && (energy - 1.0).abs() <= FRAME_TOL;
        parts.push(format!("{n}: err {err:.1e}, energy {energy:.12}"));
    }
    Outcome::new(pass, format!("shearlet tight frame (tol {FRAME_TOL:.0e}): {}", parts.join("; ")))
}

/// Results of the desk-scale disk suite, reused by criterion 5.
struct DeskRun {
    s: Sinogram,
    image: Image,
    report: SolveReport,
    cfg: MbConfig,
}

fn disk_suite(eir: bool) -> Vec<DeskRun> {
    let op = desk_operator(TRUE_SOS, eir);
    let sys = ShearletSystem::new(DESK_SIZE, DESK_SIZE).unwrap();
    (0..N_PHANTOMS as u64)
        .map(|seed| {
            let s = op.forward(&phantom(PhantomKind::Disks(3), seed)).unwrap();
            let (image, report, cfg) = solve(&op, &sys, &s);
            DeskRun { s, image, report, cfg }
        })
        .collect()
}

fn criterion_3(runs: &[DeskRun]) -> Outcome {
    let op = desk_operator(TRUE_SOS, true);
    let grid = desk_grid();
    let mut wins = 0;
    let mut worst_mb = 0.0f64;
    let mut zero_exact = true;
    let (mut sum_bp, mut sum_mb) = (0.0, 0.0);
    for run in runs {
        let bp = backproject(&run.s, &grid, TRUE_SOS).unwrap();
        let r_bp = r_eval(&op, &bp, &run.s);
        let r_mb = r_eval(&op, &run.image, &run.s);
        wins += usize::from(r_mb < r_bp);
        worst_mb = worst_mb.max(r_mb);
        sum_bp += r_bp;
        sum_mb += r_mb;
        zero_exact &= r_eval(&op, &grid.zeros(), &run.s) == 1.0;
    }
    let n = runs.len() as f64;
    Outcome::new(
        wins >= MB_MIN_WINS && worst_mb <= MB_MAX_RESIDUAL && zero_exact,
        format!(
            "residual ordering on {} disk phantoms: R(MB) < R(BP clamped) in {wins}/{} (need {MB_MIN_WINS}), max R(MB) {worst_mb:.4} (<= {MB_MAX_RESIDUAL}), R(zero) == 1 exactly: {zero_exact}",
            runs.len(),
            runs.len()
        ),
    )
    .info([format!(
        "mean R(BP clamped) {:.4}, mean R(MB) {:.4}; lambda = {LAMBDA_FRACTION:.0e} x lambda_max, EIR on",
        sum_bp / n,
        sum_mb / n
    )])
}

fn criterion_4() -> Outcome {
    let grid = desk_grid();
    let sys = ShearletSystem::new(DESK_SIZE, DESK_SIZE).unwrap();
    let offsets = [-20.0, -10.0, 0.0, 10.0, 20.0];
    let ops: Vec<_> = offsets.iter().map(|d| desk_operator(TRUE_SOS + d, true)).collect();
    let mut pass = true;
    let mut info = Vec::new();
    for seed in 0..N_POINT_PHANTOMS as u64 {
        let s = ops[2].forward(&phantom(PhantomKind::Points(1), 100 + seed)).unwrap();
        let mut r_bp = Vec::new();
        let mut r_mb = Vec::new();
        for op in &ops {
            let sos = op.sos_mps();
            r_bp.push(r_eval(op, &backproject(&s, &grid, sos).unwrap(), &s));
            r_mb.push(r_eval(op, &solve(op, &sys, &s).0, &s));
        }
        for r in [&r_bp, &r_mb] {
            pass &= [0, 1, 3, 4].iter().all(|&i| r[i] > r[2]);
        }
        let fmt = |r: &[f64]| r.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(" ");
        info.push(format!("phantom {seed}: R(BP) [{}], R(MB) [{}]", fmt(&r_bp), fmt(&r_mb)));
    }
    Outcome::new(
        pass,
        format!(
            "out-of-focus residuals, {N_POINT_PHANTOMS} point phantoms at {TRUE_SOS} m/s: R rises for every |dSoS| in {{10, 20}} for BP and MB"
        ),
    )
    .info(std::iter::once("R listed at SoS 1480 1490 1500 1510 1520 m/s".to_string()).chain(info))
}

fn monotone(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0])
}

fn rel_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(f64::MIN_POSITIVE)
}

/// Resume a finished solve from its image and final step and report the
/// relative objective change.
fn restart_change(op: &ForwardOperator, sys: &ShearletSystem, run: &DeskRun, keep_step: bool) -> f64 {
    let cfg = MbConfig {
        initial_step: keep_step.then_some(run.report.final_step),
        ..run.cfg.clone()
    };
    let (_, again) =
        sparsa_reconstruct(op, sys, &run.s, &cfg, &Initializer::Image(run.image.clone()), SolveControl::default())
            .unwrap();
    rel_change(run.report.final_objective(), again.final_objective())
}

fn criterion_5(eir_runs: &[DeskRun]) -> Outcome {
    let sys = ShearletSystem::new(DESK_SIZE, DESK_SIZE).unwrap();
    // The same phantoms without the EIR: a better conditioned operator.
    let plain_runs = disk_suite(false);
    let plain_op = desk_operator(TRUE_SOS, false);
    let eir_op = desk_operator(TRUE_SOS, true);

    let all: Vec<&DeskRun> = eir_runs.iter().chain(&plain_runs).collect();
    let monotone_ok = all.iter().filter(|r| monotone(&r.report.objective_trace)).count();
    let converged_eir = eir_runs.iter().filter(|r| r.report.converged).count();
    let converged_plain = plain_runs.iter().filter(|r| r.report.converged).count();
    let iters = |runs: &[DeskRun]| {
        let v: Vec<usize> = runs.iter().map(|r| r.report.iterations_run).collect();
        (*v.iter().min().unwrap(), *v.iter().max().unwrap())
    };
    let last_change = |r: &DeskRun| {
        let t = &r.report.objective_trace;
        rel_change(t[t.len() - 2], t[t.len() - 1])
    };

    let huge = MbConfig::with_lambda(1e12);
    let (zero, _) = sparsa_reconstruct(
        &eir_op,
        &sys,
        &eir_runs[0].s,
        &huge,
        &Initializer::default(),
        SolveControl::default(),
    )
    .unwrap();
    let zero_ok = zero.pixels.iter().all(|&v| v == 0.0);

    // Fixed-point check on the solves that reached the stopping rule.
    let converged: Vec<(&ForwardOperator, &DeskRun)> = eir_runs
        .iter()
        .map(|r| (&eir_op, r))
        .chain(plain_runs.iter().map(|r| (&plain_op, r)))
        .filter(|(_, r)| r.report.converged)
        .collect();
    let restarts: Vec<f64> = converged.iter().map(|(op, r)| restart_change(op, &sys, r, true)).collect();
    let restart_worst = restarts.iter().copied().fold(0.0f64, f64::max);
    let restart_within = restarts.iter().filter(|&&v| v < RESTART_TOL).count();
    let restart_ok = !converged.is_empty() && restart_within == converged.len();
    let image_only = converged
        .first()
        .map(|(op, r)| restart_change(op, &sys, r, false));

    let total = all.len();
    let converged_all = converged_eir + converged_plain;
    let pass = monotone_ok == total && converged_all == total && zero_ok && restart_ok;
    let (lo_e, hi_e) = iters(eir_runs);
    let (lo_p, hi_p) = iters(&plain_runs);
    let max_last = eir_runs.iter().map(last_change).fold(0.0f64, f64::max);
    let min_last = eir_runs.iter().map(last_change).fold(f64::INFINITY, f64::min);
    Outcome::new(
        pass,
        format!(
            "SpaRSA: monotone traces {monotone_ok}/{total}; converged within 200 iterations {converged_all}/{total}; lambda=1e12 gives the zero image: {zero_ok}; restart-from-solution change < {RESTART_TOL:.0e} in {restart_within}/{} converged solves (worst {restart_worst:.1e})",
            converged.len()
        ),
    )
    .info([
        format!(
            "with EIR: {converged_eir}/{} converged, iterations {lo_e}..{hi_e}, relative change at the last iteration {min_last:.1e}..{max_last:.1e}",
            eir_runs.len()
        ),
        format!(
            "without EIR: {converged_plain}/{} converged, iterations {lo_p}..{hi_p}",
            plain_runs.len()
        ),
        "the band-limited EIR operator is ill-conditioned; at the weight needed for R <= 0.05 the 1e-6 relative-change rule needs several hundred iterations".to_string(),
        "a restart that moves the objective far more than 1e-6 means the stopping rule fired on a plateau: three consecutive changes below 1e-6 before the solver found further descent".to_string(),
        format!(
            "restart from the image alone (step re-estimated): relative change {}",
            image_only.map_or("n/a".to_string(), |v| format!("{v:.1e}"))
        ),
    ])
}

fn brute_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    // Coarse scan, then golden section around the best sample.
    let n = 2000;
    let step = (hi - lo) / n as f64;
    let best = (0..=n).map(|i| lo + i as f64 * step).min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
    let (mut a, mut b) = (best - step, best + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let reference = phantom(PhantomKind::Cartoon, 6);
    let ssim_self = ssim(&reference, &reference).unwrap();
    let mae_rel_zero = image_metrics(&desk_grid().zeros(), &reference, false).unwrap().mae_rel;

    let mut rec = reference.scaled(0.7);
    rec.pixels.mapv_inplace(|v| v + rng.random_range(-0.05..0.05));
    let f_mse = |a: f64| (&rec.pixels * a - &reference.pixels).mapv(|v| v * v).sum();
    let f_mae = |a: f64| (&rec.pixels * a - &reference.pixels).mapv(f64::abs).sum();
    let a_mse = mse_optimal_scale(&rec, &reference);
    let a_mae = mae_optimal_scale(&rec, &reference);
    let b_mse = brute_argmin(f_mse, 0.0, 5.0);
    let b_mae = brute_argmin(f_mae, 0.0, 5.0);

    let op = desk_operator(TRUE_SOS, true);
    let s = op.forward(&phantom(PhantomKind::Disks(3), 60)).unwrap();
    let p = backproject(&s, &desk_grid(), TRUE_SOS).unwrap().clamped_non_negative();
    let mp = op.forward(&p).unwrap();
    let f_res = |a: f64| (&mp.samples * a - &s.samples).mapv(|v| v * v).sum();
    let a_res = optimal_scale(&op, &p, &s).unwrap();
    let b_res = brute_argmin(f_res, 0.0, 10.0 * a_res.abs().max(1e-3));

    let scale_err = [(a_mse, b_mse), (a_mae, b_mae), (a_res, b_res)]
        .iter()
        .map(|(a, b)| rel_change(*b, *a))
        .fold(0.0f64, f64::max);

    let mut t = s.clone();
    for ((idx, v), &inside) in t.samples.indexed_iter_mut().zip(op.reach_mask().mask.iter()) {
        if !inside {
            *v += 1e3 * ((idx.0 * 7 + idx.1) as f64).sin();
        }
    }
    let mask_invariant = [ResidualOptions::default(), ResidualOptions::EVALUATION]
        .iter()
        .all(|&o| residual_norm(&op, &p, &s, o).unwrap() == residual_norm(&op, &p, &t, o).unwrap());

    let pass = (ssim_self - 1.0).abs() <= 1e-12 && mae_rel_zero == 1.0 && scale_err <= SCALE_TOL && mask_invariant;
    Outcome::new(
        pass,
        format!(
            "metrics: SSIM(i,i) = {ssim_self}; MAE_rel(0,i) = {mae_rel_zero}; closed-form scales vs 1-D search max rel diff {scale_err:.1e} (<= {SCALE_TOL:.0e}); residual invariant to reach-masked bins: {mask_invariant}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let wl = default_wavelengths_nm();
    let nw = wl.len();
    let h = Array2::from_shape_fn((4, nw), |_| rng.random_range(0.05..2.0));
    let spectra = SpectraMatrix::new(DEFAULT_CHROMOPHORES.map(String::from).to_vec(), wl.clone(), h.clone()).unwrap();
    let (ny, nx) = (10, 10);
    let w = Array2::from_shape_fn((ny * nx, 4), |_| rng.random_range(0.0..1.0));
    let s = w.dot(&h);
    let stack = |f: &dyn Fn(usize, usize) -> f64| {
        let images = (0..nw)
            .map(|k| Image::new(Array2::from_shape_fn((ny, nx), |(r, c)| f(r * nx + c, k)), [0.001; 2]).unwrap())
            .collect();
        MultispectralStack::new(images, wl.clone()).unwrap()
    };
    let res = unmix_nnls(&stack(&|i, k| s[[i, k]]), &spectra, false).unwrap();
    let err = (&res.components - &w).mapv(|v| v * v).sum().sqrt() / w.mapv(|v| v * v).sum().sqrt();
    let zero = unmix_nnls(&stack(&|_, _| 0.0), &spectra, false).unwrap();
    let zero_ok = zero.components.iter().all(|&v| v == 0.0);
    Outcome::new(
        err <= UNMIX_TOL && zero_ok,
        format!(
            "unmixing 4x{nw} spectra, {} pixels: relative error {err:.1e} (<= {UNMIX_TOL:.0e}); zero stack gives zero maps: {zero_ok}",
            ny * nx
        ),
    )
}

fn criterion_8() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let raster = root.path().join("gradient.png");
    image::RgbImage::from_fn(40, 30, |x, y| image::Rgb([(x * 6) as u8, (y * 8) as u8, 90]))
        .save(&raster)
        .unwrap();
    let geometry = ArrayGeometry {
        n_detectors: 32,
        ..ArrayGeometry::default().with_time_window(640, 700)
    };
    let sources = vec![
        SourceItem::Raster(raster),
        SourceItem::Phantom(PhantomKind::Disks(3)),
        SourceItem::Phantom(PhantomKind::Points(2)),
        SourceItem::Phantom(PhantomKind::Cartoon),
    ];
    let run = |seed: u64, name: &str| {
        let cfg = SynthesisConfig {
            image_size: 48,
            fov_m: 0.0048,
            rng_seed: seed,
            noise_std: Some(0.5),
            ..SynthesisConfig::default()
        };
        let dir = root.path().join(name);
        let m = generate_dataset(&sources, &dir, &geometry, Some(&EirSpec::default()), &cfg).unwrap();
        (m.hash, manifest_hash(&dir).unwrap())
    };
    let (a, a_disk) = run(42, "a");
    let (b, _) = run(42, "b");
    let (c, _) = run(43, "c");
    let hash_ok = a == b && a == a_disk && a != c;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = ArrayGeometry {
        n_detectors: 256,
        ..ArrayGeometry::default().with_time_window(2030, 110)
    };
    let mut s = Sinogram::zeros(&g);
    s.samples.mapv_inplace(|_| rng.random_range(-450.0f32..450.0) as f64);
    let sb = encode_sinogram(&s);
    let s2 = decode_sinogram(&sb, &g).unwrap();
    let mut img = ImageGrid::square(416, 0.0416).zeros();
    img.pixels.mapv_inplace(|_| rng.random::<f32>() as f64);
    img.fov_m = [0.0416f32 as f64; 2];
    let ib = encode_image(&img);
    let i2 = decode_image(&ib).unwrap();
    let io_ok = s2 == s && encode_sinogram(&s2) == sb && i2 == img && encode_image(&i2) == ib;
    Outcome::new(
        hash_ok && io_ok,
        format!(
            "determinism: seeded dataset hash stable across runs and on disk, differs for another seed: {hash_ok}; OASG/OAIM round trips bit-exact: {io_ok}"
        ),
    )
    .info([format!("dataset hash (seed 42): {a}")])
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = EngineConfig::default();
    let mut s = Sinogram::zeros(&cfg.geometry);
    s.samples.mapv_inplace(|_| rng.random_range(-1.0..1.0));
    let grid = cfg.grid();
    let start = Instant::now();
    let img = backproject(&s, &grid, TRUE_SOS).unwrap();
    let secs = start.elapsed().as_secs_f64();
    assert_eq!(img.pixels.dim(), (416, 416));

    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut info = vec![format!(
        "{threads} hardware thread(s); frame budget {FRAME_BUDGET_MS} ms (25 Hz)"
    )];
    let frames = vec![s];
    for method in [Method::Bp, Method::Dmas, Method::Delay] {
        let r = bench_stream(&cfg, method, TRUE_SOS, &frames, 5, true).unwrap();
        info.push(format!("full scale {r}"));
    }
    let mut desk = EngineConfig::default();
    desk.geometry = desk_geometry();
    desk.image_size = DESK_SIZE;
    desk.fov_m = DESK_FOV_M;
    desk.mb.lambda = oatk_core::solver::Lambda::Value(1.0);
    let frame = vec![desk_operator(TRUE_SOS, true).forward(&phantom(PhantomKind::Disks(3), 90)).unwrap()];
    for method in [Method::Bp, Method::Mb] {
        let r = bench_stream(&desk, method, TRUE_SOS, &frame, 3, true).unwrap();
        info.push(format!("desk scale 64x64 {r}"));
    }
    Outcome::new(
        secs <= FULL_BP_MAX_SECONDS,
        format!("performance: full-scale BP 2030x256 -> 416x416 in {secs:.2} s (<= {FULL_BP_MAX_SECONDS} s)"),
    )
    .info(info)
}

fn report(n: usize, o: &Outcome, failures: &mut Vec<usize>) {
    println!("criterion {n}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.summary);
    for line in &o.info {
        println!("    info: {line}");
    }
    if !o.pass {
        failures.push(n);
    }
}

fn main() {
    let start = Instant::now();
    let mut failures = Vec::new();
    report(1, &criterion_1(), &mut failures);
    report(2, &criterion_2(), &mut failures);
    let desk = disk_suite(true);
    report(3, &criterion_3(&desk), &mut failures);
    report(4, &criterion_4(), &mut failures);
    report(5, &criterion_5(&desk), &mut failures);
    report(6, &criterion_6(), &mut failures);
    report(7, &criterion_7(), &mut failures);
    report(8, &criterion_8(), &mut failures);
    report(9, &criterion_9(), &mut failures);
    println!(
        "acceptance: {} of 9 criteria passed in {:.0} s",
        9 - failures.len(),
        start.elapsed().as_secs_f64()
    );
    if !failures.is_empty() {
        println!("acceptance: failing criteria {failures:?}");
        std::process::exit(1);
    }
}
