//! In-memory index of the sinogram datasets under `dataset_root`.
//!
//! Each subdirectory is one dataset. Frames are listed by an optional
//! `frames.csv` (`frame,wavelength_nm,file`); without it every `*.oasg` file
//! is a frame, in file-name order.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use oatk_core::io::read_sinogram_with;
use oatk_core::{ArrayGeometry, Error, Result, Sinogram};
use serde::Serialize;

pub const FRAME_INDEX: &str = "frames.csv";

#[derive(Debug, Clone)]
pub struct Dataset {
    pub id: String,
    pub frames: Vec<Sinogram>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DatasetSummary {
    pub id: String,
    pub n_frames: usize,
    /// Wavelength of each frame, `null` where unknown.
    pub wavelengths: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FrameMeta {
    pub dataset_id: String,
    pub frame_index: usize,
    pub n_time_samples: usize,
    pub n_detectors: usize,
    pub t0_offset_samples: usize,
    pub sampling_rate_hz: f64,
    pub wavelength_nm: Option<f64>,
}

impl Dataset {
    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            id: self.id.clone(),
            n_frames: self.frames.len(),
            wavelengths: self.frames.iter().map(|f| f.wavelength_nm).collect(),
        }
    }

    pub fn frame_meta(&self, k: usize) -> Option<FrameMeta> {
        let f = self.frames.get(k)?;
        Some(FrameMeta {
            dataset_id: self.id.clone(),
            frame_index: k,
            n_time_samples: f.n_time(),
            n_detectors: f.n_detectors(),
            t0_offset_samples: f.geometry.t0_offset_samples,
            sampling_rate_hz: f.geometry.sampling_rate_hz,
            wavelength_nm: f.wavelength_nm,
        })
    }

    pub fn load(dir: &Path, geometry: &ArrayGeometry) -> Result<Self> {
        let id = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let index = dir.join(FRAME_INDEX);
        let mut frames = Vec::new();
        if index.is_file() {
            let mut rdr = csv::ReaderBuilder::new()
                .trim(csv::Trim::All)
                .from_path(&index)
                .map_err(|e| Error::Parse(format!("{}: {e}", index.display())))?;
            let mut rows = Vec::new();
            for rec in rdr.records() {
                let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", index.display())))?;
                let bad = || Error::Parse(format!("{}: bad row {:?}", index.display(), rec));
                let frame: usize = rec.get(0).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                let wl = match rec.get(1) {
                    Some("") | None => None,
                    Some(v) => Some(v.parse::<f64>().map_err(|_| bad())?),
                };
                let file = rec.get(2).ok_or_else(bad)?.to_string();
                rows.push((frame, wl, file));
            }
            rows.sort_by_key(|r| r.0);
            if rows.iter().enumerate().any(|(i, r)| r.0 != i) {
                return Err(Error::Parse(format!(
                    "{}: frame numbers must be 0..n without gaps",
                    index.display()
                )));
            }
            for (_, wl, file) in rows {
                let mut s = read_sinogram_with(dir.join(file), geometry)?;
                s.wavelength_nm = wl;
                frames.push(s);
            }
        } else {
            let mut files: Vec<_> = fs::read_dir(dir)
                .map_err(|e| Error::Io {
                    path: dir.to_path_buf(),
                    source: e,
                })?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "oasg"))
                .collect();
            files.sort();
            for f in files {
                frames.push(read_sinogram_with(f, geometry)?);
            }
        }
        Ok(Self { id, frames })
    }
}

/// All datasets under `root`, keyed by directory name. A missing root yields
/// an empty catalog; directories without frames are skipped.
pub fn load_catalog(root: &Path, geometry: &ArrayGeometry) -> Result<BTreeMap<String, Dataset>> {
    let mut out = BTreeMap::new();
    if !root.is_dir() {
        log::warn!("dataset root {} does not exist", root.display());
        return Ok(out);
    }
    let entries = fs::read_dir(root).map_err(|e| Error::Io {
        path: root.to_path_buf(),
        source: e,
    })?;
    for entry in entries.filter_map(|e| e.ok()) {
        let path = entry.path();
        if !path.is_dir() {
            continue;
        }
        let ds = Dataset::load(&path, geometry)?;
        if ds.frames.is_empty() {
            continue;
        }
        out.insert(ds.id.clone(), ds);
    }
    Ok(out)
}
