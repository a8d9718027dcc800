//! File formats: PFM and 16-bit PGM rasters, normalization sidecars and
//! serialized decode grids.
//!
//! Every decoder takes untrusted bytes and must fail with
//! [`Error::Format`](crate::Error::Format) rather than panic or over-allocate.

mod lut;
mod netpbm;
mod pfm;
mod pgm;
mod sidecar;

use std::path::Path;

pub use lut::{decode_lut_file, encode_lut_file, read_lut, write_lut, LutHeader, LUT_VERSION};
pub use pfm::{decode_pfm, encode_pfm, read_pfm, write_pfm};
pub use pgm::{decode_pgm, encode_pgm, read_pgm, write_pgm};
pub use sidecar::{read_sidecar, sidecar_path, write_sidecar, Normalization};

use crate::error::{Error, Result};
use crate::raster::Raster;

/// Reads a raster by extension (`.pfm` or `.pgm`). PGM samples are mapped
/// back to physical units through the sidecar when one exists.
pub fn read_raster(path: &Path) -> Result<Raster> {
    match extension(path).as_deref() {
        Some("pfm") => read_pfm(path),
        Some("pgm") => {
            let raster = read_pgm(path)?;
            match read_sidecar(path)? {
                Some(norm) => Ok(raster.map(|v| norm.denormalize(v))),
                None => Ok(raster),
            }
        }
        _ => Err(Error::Config(format!(
            "unsupported raster extension: {}",
            path.display()
        ))),
    }
}

/// Writes a raster by extension. For PGM, values are normalized with `norm`
/// (or the raster's own range) and the sidecar is written alongside.
pub fn write_raster(path: &Path, raster: &Raster, norm: Option<Normalization>) -> Result<()> {
    match extension(path).as_deref() {
        Some("pfm") => write_pfm(path, raster),
        Some("pgm") => {
            let norm = match norm {
                Some(n) => n,
                None => Normalization::of(raster)?,
            };
            write_pgm(path, &raster.map(|v| norm.normalize(v)))?;
            write_sidecar(path, &norm)
        }
        _ => Err(Error::Config(format!(
            "unsupported raster extension: {}",
            path.display()
        ))),
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}
