//! On-disk formats.
//!
//! Sinogram (`.oasg`) and image (`.oaim`) files share a 24-byte little-endian
//! header followed by a packed `f32` payload:
//!
//! ```text
//! OASG | u32 version=1 | u32 n_time | u32 n_det | f32 t0_offset_s | f32 sampling_rate_hz | n_time*n_det f32 (time-major)
//! OAIM | u32 version=1 | u32 nx     | u32 ny    | f32 fov_x_m     | f32 fov_y_m          | ny*nx f32 (row-major)
//! ```
//!
//! Spectra are a UTF-8 CSV with header `wavelength_nm,<chromophore names>`
//! and one row per wavelength.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::data::{Image, MultispectralStack, Sinogram, SpectraMatrix};
use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;

pub const SINOGRAM_MAGIC: [u8; 4] = *b"OASG";
pub const IMAGE_MAGIC: [u8; 4] = *b"OAIM";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

struct Header {
    a: u32,
    b: u32,
    c: f32,
    d: f32,
}

fn encode(magic: [u8; 4], h: Header, payload: impl Iterator<Item = f64>, n: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * n);
    out.extend_from_slice(&magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&h.a.to_le_bytes());
    out.extend_from_slice(&h.b.to_le_bytes());
    out.extend_from_slice(&h.c.to_le_bytes());
    out.extend_from_slice(&h.d.to_le_bytes());
    for v in payload {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes(b.try_into().unwrap())
}

fn le_f32(b: &[u8]) -> f32 {
    f32::from_le_bytes(b.try_into().unwrap())
}

fn decode(magic: [u8; 4], bytes: &[u8]) -> Result<(Header, Vec<f64>)> {
    if bytes.len() < 4 {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let found: [u8; 4] = bytes[..4].try_into().unwrap();
    if found != magic {
        return Err(Error::BadMagic {
            expected: magic,
            found,
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let version = le_u32(&bytes[4..8]);
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let h = Header {
        a: le_u32(&bytes[8..12]),
        b: le_u32(&bytes[12..16]),
        c: le_f32(&bytes[16..20]),
        d: le_f32(&bytes[20..24]),
    };
    let n = (h.a as usize)
        .checked_mul(h.b as usize)
        .ok_or_else(|| Error::dims("declared dimensions overflow"))?;
    if n == 0 {
        return Err(Error::dims("declared dimensions are empty"));
    }
    let expected = HEADER_LEN + 4 * n;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::dims(format!(
            "payload holds {} bytes beyond the declared {}x{}",
            bytes.len() - expected,
            h.a,
            h.b
        )));
    }
    let payload = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| le_f32(c) as f64)
        .collect();
    Ok((h, payload))
}

pub fn encode_sinogram(s: &Sinogram) -> Vec<u8> {
    let g = &s.geometry;
    let t0_s = g.t0_offset_samples as f64 / g.sampling_rate_hz;
    encode(
        SINOGRAM_MAGIC,
        Header {
            a: s.n_time() as u32,
            b: s.n_detectors() as u32,
            c: t0_s as f32,
            d: g.sampling_rate_hz as f32,
        },
        s.samples.iter().copied(),
        s.samples.len(),
    )
}

/// Decode a sinogram, taking array shape parameters not stored in the file
/// from `template`.
pub fn decode_sinogram(bytes: &[u8], template: &ArrayGeometry) -> Result<Sinogram> {
    let (h, payload) = decode(SINOGRAM_MAGIC, bytes)?;
    let (n_time, n_det) = (h.a as usize, h.b as usize);
    let fs = h.d as f64;
    if !(fs > 0.0) || !(h.c >= 0.0) {
        return Err(Error::param("sinogram header holds invalid timing"));
    }
    let geometry = ArrayGeometry {
        n_detectors: n_det,
        n_time_samples: n_time,
        sampling_rate_hz: fs,
        t0_offset_samples: (h.c as f64 * fs).round() as usize,
        ..template.clone()
    };
    let samples = Array2::from_shape_vec((n_time, n_det), payload).expect("checked length");
    Sinogram::new(samples, geometry)
}

pub fn encode_image(img: &Image) -> Vec<u8> {
    encode(
        IMAGE_MAGIC,
        Header {
            a: img.nx() as u32,
            b: img.ny() as u32,
            c: img.fov_m[0] as f32,
            d: img.fov_m[1] as f32,
        },
        img.pixels.iter().copied(),
        img.len(),
    )
}

pub fn decode_image(bytes: &[u8]) -> Result<Image> {
    let (h, payload) = decode(IMAGE_MAGIC, bytes)?;
    let (nx, ny) = (h.a as usize, h.b as usize);
    let pixels = Array2::from_shape_vec((ny, nx), payload).expect("checked length");
    Image::new(pixels, [h.c as f64, h.d as f64])
}

pub fn write_sinogram(s: &Sinogram, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_sinogram(s)).map_err(|e| Error::io(path, e))
}

/// Read a sinogram using the default array for fields the file lacks.
pub fn read_sinogram(path: impl AsRef<Path>) -> Result<Sinogram> {
    read_sinogram_with(path, &ArrayGeometry::default())
}

/// Read a sinogram and check it against an expected detector count.
pub fn read_sinogram_with(path: impl AsRef<Path>, geometry: &ArrayGeometry) -> Result<Sinogram> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let s = decode_sinogram(&bytes, geometry)?;
    if s.n_detectors() != geometry.n_detectors {
        return Err(Error::dims(format!(
            "{} holds {} detectors, configured array has {}",
            path.display(),
            s.n_detectors(),
            geometry.n_detectors
        )));
    }
    Ok(s)
}

pub fn write_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_image(img)).map_err(|e| Error::io(path, e))
}

pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes)
}

pub fn parse_spectra(text: &str) -> Result<SpectraMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    if headers.get(0) != Some("wavelength_nm") || headers.len() < 2 {
        return Err(Error::Parse(
            "spectra header must be `wavelength_nm,<chromophore names>`".into(),
        ));
    }
    let chromophores: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
    let mut wavelengths = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let values = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {f:?}: {e}", line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        wavelengths.push(values[0]);
        rows.push(values[1..].to_vec());
    }
    if rows.is_empty() {
        return Err(Error::Parse("spectra file has no rows".into()));
    }
    let nc = chromophores.len();
    let nw = rows.len();
    let absorption = Array2::from_shape_fn((nc, nw), |(c, w)| rows[w][c]);
    if wavelengths.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("spectra wavelengths must be strictly increasing"));
    }
    SpectraMatrix::new(chromophores, wavelengths, absorption)
}

pub fn format_spectra(h: &SpectraMatrix) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["wavelength_nm".to_string()];
    header.extend(h.chromophores.iter().cloned());
    wtr.write_record(&header).expect("in-memory write");
    for (w, &wl) in h.wavelengths_nm.iter().enumerate() {
        let mut row = vec![wl.to_string()];
        row.extend(h.absorption.column(w).iter().map(|v| v.to_string()));
        wtr.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(wtr.into_inner().expect("flush")).expect("utf-8")
}

pub fn read_spectra(path: impl AsRef<Path>) -> Result<SpectraMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_spectra(&text)
}

pub fn write_spectra(h: &SpectraMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_spectra(h)).map_err(|e| Error::io(path, e))
}

/// Name of the index file inside a stack directory.
pub const STACK_INDEX: &str = "stack.csv";

/// Read a multispectral stack directory: `stack.csv` lists
/// `wavelength_nm,file` rows pointing at `.oaim` images in the same folder.
pub fn read_stack(dir: impl AsRef<Path>) -> Result<MultispectralStack> {
    let dir = dir.as_ref();
    let index = dir.join(STACK_INDEX);
    let text = fs::read_to_string(&index).map_err(|e| Error::io(&index, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut images = Vec::new();
    let mut wavelengths = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let wl = record
            .get(0)
            .and_then(|f| f.parse::<f64>().ok())
            .ok_or_else(|| Error::Parse(format!("bad wavelength in {}", index.display())))?;
        let file = record
            .get(1)
            .ok_or_else(|| Error::Parse(format!("missing file column in {}", index.display())))?;
        wavelengths.push(wl);
        images.push(read_image(dir.join(file))?);
    }
    MultispectralStack::new(images, wavelengths)
}

pub fn write_stack(stack: &MultispectralStack, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut index = String::from("wavelength_nm,file\n");
    for (img, wl) in stack.images.iter().zip(&stack.wavelengths_nm) {
        let name = format!("wl_{:04}.oaim", wl.round() as i64);
        write_image(img, dir.join(&name))?;
        index.push_str(&format!("{wl},{name}\n"));
    }
    let path = dir.join(STACK_INDEX);
    fs::write(&path, index).map_err(|e| Error::io(&path, e))
}
