//! Write and read back sinogram and image files.

use ndarray::Array2;
use oatk_core::io::{decode_image, decode_sinogram, encode_image, encode_sinogram};
use oatk_core::{ArrayGeometry, Image, Sinogram};

fn main() -> oatk_core::Result<()> {
    let g = ArrayGeometry {
        n_detectors: 4,
        ..ArrayGeometry::default().with_time_window(6, 110)
    };
    let s = Sinogram::new(Array2::from_shape_fn((6, 4), |(t, d)| (t * 4 + d) as f64 * 0.25), g.clone())?;
    let bytes = encode_sinogram(&s);
    println!("sinogram: {} bytes, header {:?}", bytes.len(), std::str::from_utf8(&bytes[..4]).unwrap());
    let back = decode_sinogram(&bytes, &g)?;
    println!("  t0 offset {} samples, identical: {}", back.geometry.t0_offset_samples, back == s);

    let img = Image::new(Array2::from_shape_fn((3, 5), |(r, c)| (r as f64) - 0.5 * c as f64), [0.0078125, 0.00390625])?;
    let bytes = encode_image(&img);
    let back = decode_image(&bytes)?;
    println!("image: {} bytes, identical: {}, re-encoded identical: {}", bytes.len(), back == img, encode_image(&back) == bytes);
    Ok(())
}
