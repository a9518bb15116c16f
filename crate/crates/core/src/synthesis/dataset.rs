//! Seeded dataset generation. Item `i` draws from its own ChaCha stream
//! `(seed, i)`, so the output does not depend on thread scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{image_to_initial_pressure, make_phantom, synthesize_sinogram, PhantomKind, SynthesisConfig};
use crate::acoustic::EirSpec;
use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;
use crate::io::{write_image, write_sinogram};

pub const MANIFEST_FILE: &str = "manifest.csv";

#[derive(Debug, Clone, PartialEq)]
pub enum SourceItem {
    Raster(PathBuf),
    Phantom(PhantomKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetItem {
    pub index: usize,
    pub sos_mps: f64,
    pub scale: f64,
    pub sinogram_file: String,
    /// Scaled initial pressure matching the sinogram.
    pub target_file: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub items: Vec<DatasetItem>,
    /// SHA-256 over the manifest and every listed file, in item order.
    pub hash: String,
}

fn item_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Simulate every source into `out_dir` and write the manifest.
pub fn generate_dataset(
    sources: &[SourceItem],
    out_dir: impl AsRef<Path>,
    geometry: &ArrayGeometry,
    eir: Option<&EirSpec>,
    cfg: &SynthesisConfig,
) -> Result<Manifest> {
    cfg.validate()?;
    geometry.validate()?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let items = sources
        .par_iter()
        .enumerate()
        .map(|(index, source)| -> Result<DatasetItem> {
            let mut rng = item_rng(cfg.rng_seed, index);
            let p = match source {
                SourceItem::Raster(path) => image_to_initial_pressure(path, cfg.image_size, cfg.fov_m)?,
                SourceItem::Phantom(kind) => make_phantom(*kind, cfg.image_size, cfg.fov_m, &mut rng)?,
            };
            let out = synthesize_sinogram(&p, geometry, eir, cfg, &mut rng)?;
            let sinogram_file = format!("item_{index:05}.oasg");
            let target_file = format!("item_{index:05}_target.oaim");
            let mut sinogram = out.sinogram;
            sinogram.wavelength_nm = None;
            write_sinogram(&sinogram, out_dir.join(&sinogram_file))?;
            write_image(&p.scaled(out.scale), out_dir.join(&target_file))?;
            Ok(DatasetItem {
                index,
                sos_mps: out.sos_mps,
                scale: out.scale,
                sinogram_file,
                target_file,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest_path = out_dir.join(MANIFEST_FILE);
    let mut w = csv::Writer::from_path(&manifest_path).map_err(|e| csv_error(&manifest_path, e))?;
    let write = |w: &mut csv::Writer<fs::File>, rec: &[String]| {
        w.write_record(rec).map_err(|e| csv_error(&manifest_path, e))
    };
    write(&mut w, &["item", "sos_mps", "scale", "sinogram", "target"].map(String::from))?;
    for it in &items {
        write(
            &mut w,
            &[
                it.index.to_string(),
                it.sos_mps.to_string(),
                it.scale.to_string(),
                it.sinogram_file.clone(),
                it.target_file.clone(),
            ],
        )?;
    }
    w.flush().map_err(|e| Error::io(&manifest_path, e))?;
    drop(w);

    let hash = manifest_hash(out_dir)?;
    Ok(Manifest { items, hash })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Parse(format!("{}: {e}", path.display()))
}

/// Recompute the dataset hash from the files on disk.
pub fn manifest_hash(dir: impl AsRef<Path>) -> Result<String> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let mut hasher = Sha256::new();
    hasher.update(&text);
    let mut rdr = csv::Reader::from_reader(text.as_slice());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(&manifest_path, e))?;
        for col in [3, 4] {
            let name = rec
                .get(col)
                .ok_or_else(|| Error::Parse(format!("{}: short record", manifest_path.display())))?;
            let path = dir.join(name);
            hasher.update(fs::read(&path).map_err(|e| Error::io(&path, e))?);
        }
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}
