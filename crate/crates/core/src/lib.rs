//! Matrix-free optoacoustic tomography reconstruction.
//!
//! The crate is organized around one linear forward operator, `M_c`, that
//! maps an initial-pressure image to the sinogram recorded by a concave
//! detector arc at speed of sound `c`:
//!
//! - [`acoustic`]: the operator, its adjoint, acquisition filters, the reach
//!   mask, and the delay-domain transform.
//! - [`direct`]: backprojection and delay-multiply-and-sum with coherence
//!   factor.
//! - [`shearlet`]: a band-limited Parseval shearlet frame.
//! - [`solver`]: non-negative shearlet-ℓ1 reconstruction by SpaRSA and
//!   L-curve selection of the regularization weight.
//! - [`synthesis`]: phantoms and synthetic sinogram datasets.
//! - [`analysis`]: data residual norm, image metrics, and spectral unmixing.
//! - [`io`]: sinogram, image, spectra and stack file formats.

pub mod acoustic;
pub mod analysis;
pub mod data;
pub mod direct;
pub mod error;
pub mod geometry;
pub mod io;
pub mod shearlet;
pub mod solver;
pub mod synthesis;

pub use data::{Image, ImageGrid, MultispectralStack, Sinogram, SpectraMatrix, UnmixResult};
pub use error::{Error, Result};
pub use geometry::{ArrayGeometry, SosGrid};
