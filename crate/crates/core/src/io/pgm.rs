//! Binary PGM (`P5`). Samples are exposed normalized to `[0, 1]` by maxval;
//! the writer emits 16-bit big-endian samples with maxval 65535.

use std::fs;
use std::path::Path;

use super::netpbm::{payload_len, HeaderReader};
use crate::error::{Error, Result};
use crate::raster::Raster;

const FORMAT: &str = "PGM";

pub fn decode_pgm(bytes: &[u8]) -> Result<Raster> {
    let mut header = HeaderReader::new(bytes, FORMAT);
    let magic = header.token()?;
    if magic != "P5" {
        return Err(Error::format(FORMAT, format!("bad magic {magic:?}")));
    }
    let width = header.dimension()?;
    let height = header.dimension()?;
    let maxval = match header.token()?.parse::<u32>() {
        Ok(v @ 1..=65535) => v,
        _ => return Err(Error::format(FORMAT, "maxval must be in 1..=65535")),
    };
    let payload = header.payload()?;
    let sample_size = if maxval < 256 { 1 } else { 2 };
    let expected = payload_len(FORMAT, width, height, sample_size)?;
    if payload.len() != expected {
        return Err(Error::format(
            FORMAT,
            format!("expected {expected} payload bytes, found {}", payload.len()),
        ));
    }

    let scale = maxval as f64;
    let mut data = Vec::with_capacity(width * height);
    for sample in payload.chunks_exact(sample_size) {
        let v = match sample {
            [b] => *b as u32,
            [hi, lo] => u16::from_be_bytes([*hi, *lo]) as u32,
            _ => unreachable!(),
        };
        if v > maxval {
            return Err(Error::format(FORMAT, "sample exceeds maxval"));
        }
        data.push(v as f64 / scale);
    }
    Raster::new(width, height, data)
}

/// Encodes normalized values; samples are clamped into `[0, 1]` and
/// non-finite samples are written as 0.
pub fn encode_pgm(raster: &Raster) -> Vec<u8> {
    let (w, h) = raster.dims();
    let mut out = format!("P5\n{w} {h}\n65535\n").into_bytes();
    out.reserve(w * h * 2);
    for &v in raster.data() {
        let v = if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 };
        out.extend_from_slice(&((v * 65535.0).round() as u16).to_be_bytes());
    }
    out
}

pub fn read_pgm(path: &Path) -> Result<Raster> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm(path: &Path, raster: &Raster) -> Result<()> {
    fs::write(path, encode_pgm(raster))?;
    Ok(())
}
