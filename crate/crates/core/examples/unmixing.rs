//! Recover chromophore maps from a multispectral stack by per-pixel NNLS.

use ndarray::Array2;
use oatk_core::analysis::unmix_nnls;
use oatk_core::data::{default_wavelengths_nm, DEFAULT_CHROMOPHORES};
use oatk_core::{Image, MultispectralStack, SpectraMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> oatk_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let wl = default_wavelengths_nm();
    // Smooth, distinct synthetic spectra.
    let h = Array2::from_shape_fn((4, wl.len()), |(c, w)| {
        let x = w as f64 / wl.len() as f64;
        1.0 + (std::f64::consts::PI * (c as f64 + 1.0) * x + c as f64).sin() * 0.8
    });
    let spectra = SpectraMatrix::new(DEFAULT_CHROMOPHORES.map(String::from).to_vec(), wl.clone(), h.clone())?;

    let (ny, nx) = (16, 16);
    let w = Array2::from_shape_fn((ny * nx, 4), |_| rng.random_range(0.0..1.0));
    let s = w.dot(&h);
    let images = (0..wl.len())
        .map(|k| Image::new(Array2::from_shape_fn((ny, nx), |(r, c)| s[[r * nx + c, k]]), [0.0016; 2]))
        .collect::<oatk_core::Result<Vec<_>>>()?;
    let stack = MultispectralStack::new(images, wl)?;

    let res = unmix_nnls(&stack, &spectra, false)?;
    let err = (&res.components - &w).mapv(f64::abs).sum() / w.sum();
    println!("recovered {} maps, relative L1 error {err:.2e}", res.chromophores.len());
    for (k, name) in res.chromophores.iter().enumerate() {
        println!("  {name:<16} mean {:.4}", res.component_map(k, [0.0016; 2]).pixels.mean().unwrap());
    }
    Ok(())
}
