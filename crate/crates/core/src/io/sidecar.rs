use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;

/// Affine map between physical values and `[0, 1]`, stored as a JSON
/// sidecar `{"min": .., "max": ..}` next to the raster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Normalization {
    pub min: f64,
    pub max: f64,
}

impl Normalization {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        let n = Normalization { min, max };
        n.validate()?;
        Ok(n)
    }

    /// Range of the raster's finite samples.
    pub fn of(raster: &Raster) -> Result<Self> {
        let (lo, hi) = raster.finite_range().ok_or(Error::NoValidPixels)?;
        if lo < hi {
            Self::new(lo, hi)
        } else {
            Self::new(lo, lo + 1.0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::Config(format!(
                "normalization needs finite min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn normalize(&self, v: f64) -> f64 {
        (v - self.min) / (self.max - self.min)
    }

    pub fn denormalize(&self, q: f64) -> f64 {
        self.min + q * (self.max - self.min)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let n: Normalization = serde_json::from_slice(bytes)?;
        n.validate()?;
        Ok(n)
    }
}

/// `depth.pgm` → `depth.pgm.json`
pub fn sidecar_path(raster_path: &Path) -> PathBuf {
    let mut s = raster_path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn read_sidecar(raster_path: &Path) -> Result<Option<Normalization>> {
    let path = sidecar_path(raster_path);
    if !path.exists() {
        return Ok(None);
    }
    Normalization::from_json(&fs::read(path)?).map(Some)
}

pub fn write_sidecar(raster_path: &Path, norm: &Normalization) -> Result<()> {
    fs::write(sidecar_path(raster_path), serde_json::to_string(norm)? + "\n")?;
    Ok(())
}
