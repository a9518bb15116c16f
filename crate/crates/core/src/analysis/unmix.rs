//! Per-pixel non-negative least-squares spectral unmixing,
//! `Ŵ = argmin_{W ≥ 0} ‖S − W H‖²_F`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::Array2;
use rayon::prelude::*;

use crate::data::{MultispectralStack, SpectraMatrix, UnmixResult};
use crate::error::{Error, Result};

const NNLS_TOL: f64 = 1e-10;

/// Lawson–Hanson active-set NNLS in normal-equation form: minimizes
/// `½ xᵀ G x − xᵀ b` over `x ≥ 0`, i.e. `‖A x − y‖²` with `G = AᵀA`,
/// `b = Aᵀy`. Returns the solution and the number of outer iterations.
pub fn nnls_gram(gram: &DMatrix<f64>, atb: &DVector<f64>, max_outer: usize) -> (DVector<f64>, usize) {
    let n = atb.len();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let scale = atb.amax().max(f64::MIN_POSITIVE);
    let tol = NNLS_TOL * scale;
    let mut outer = 0;

    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
        let mut z = DVector::zeros(n);
        if idx.is_empty() {
            return z;
        }
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| gram[(idx[r], idx[c])]);
        let rhs = DVector::from_fn(idx.len(), |r, _| atb[idx[r]]);
        let sol = match sub.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => sub
                .svd(true, true)
                .solve(&rhs, 1e-14)
                .unwrap_or_else(|_| DVector::zeros(idx.len())),
        };
        for (k, &i) in idx.iter().enumerate() {
            z[i] = sol[k];
        }
        z
    };

    while outer < max_outer {
        let w = atb - gram * &x;
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(t) = candidate.filter(|&j| w[j] > tol) else {
            break;
        };
        outer += 1;
        passive[t] = true;
        loop {
            let z = solve_passive(&passive);
            let infeasible: Vec<usize> = (0..n).filter(|&j| passive[j] && z[j] <= 0.0).collect();
            if infeasible.is_empty() {
                x = z;
                break;
            }
            let alpha = infeasible
                .iter()
                .map(|&j| x[j] / (x[j] - z[j]))
                .fold(f64::INFINITY, f64::min);
            x += (z - &x) * alpha;
            let xtol = 1e-14 * x.amax();
            for j in 0..n {
                if passive[j] && x[j] <= xtol {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    (x, outer)
}

fn spectra_gram(h: &SpectraMatrix) -> Result<DMatrix<f64>> {
    let (nc, nw) = h.absorption.dim();
    let hm = DMatrix::from_fn(nc, nw, |r, c| h.absorption[[r, c]]);
    let gram = &hm * hm.transpose();
    let eig = SymmetricEigen::new(gram.clone());
    let max = eig.eigenvalues.amax();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min <= 1e-12 * max {
        return Err(Error::RankDeficient);
    }
    Ok(gram)
}

/// Unmix every pixel of `stack` against the rows of `spectra`.
///
/// With `clamp_negatives` the stack is clipped at zero first, as done for
/// backprojection inputs.
pub fn unmix_nnls(
    stack: &MultispectralStack,
    spectra: &SpectraMatrix,
    clamp_negatives: bool,
) -> Result<UnmixResult> {
    stack.validate()?;
    spectra.validate()?;
    if stack.wavelengths_nm.len() != spectra.n_wavelengths() {
        return Err(Error::dims(format!(
            "stack has {} wavelengths, spectra have {}",
            stack.wavelengths_nm.len(),
            spectra.n_wavelengths()
        )));
    }
    if stack
        .wavelengths_nm
        .iter()
        .zip(&spectra.wavelengths_nm)
        .any(|(a, b)| (a - b).abs() > 1e-6)
    {
        return Err(Error::dims("stack and spectra wavelengths differ"));
    }
    let gram = spectra_gram(spectra)?;
    let nc = spectra.n_chromophores();
    let n_pix = stack.n_pixels();
    let max_outer = 3 * nc;
    let planes: Vec<&[f64]> = stack
        .images
        .iter()
        .map(|im| im.pixels.as_slice().expect("standard layout"))
        .collect();
    let rows: Vec<Vec<f64>> = (0..n_pix)
        .into_par_iter()
        .map(|p| {
            let atb = DVector::from_fn(nc, |c, _| {
                planes
                    .iter()
                    .enumerate()
                    .map(|(w, plane)| {
                        let v = plane[p];
                        let v = if clamp_negatives { v.max(0.0) } else { v };
                        spectra.absorption[[c, w]] * v
                    })
                    .sum()
            });
            nnls_gram(&gram, &atb, max_outer).0.iter().copied().collect()
        })
        .collect();
    let components =
        Array2::from_shape_vec((n_pix, nc), rows.into_iter().flatten().collect()).expect("size");
    Ok(UnmixResult {
        components,
        chromophores: spectra.chromophores.clone(),
        image_dim: stack.images[0].pixels.dim(),
    })
}
