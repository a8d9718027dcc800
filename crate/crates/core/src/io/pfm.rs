//! Grayscale portable float map (`Pf`).
//!
//! Rows are stored bottom-to-top; a negative scale marks little-endian data.
//! The writer always emits little-endian with scale `-1.0`.

use std::fs;
use std::path::Path;

use super::netpbm::{payload_len, HeaderReader};
use crate::error::{Error, Result};
use crate::raster::Raster;

const FORMAT: &str = "PFM";

pub fn decode_pfm(bytes: &[u8]) -> Result<Raster> {
    let mut header = HeaderReader::new(bytes, FORMAT);
    match header.token()? {
        "Pf" => {}
        "PF" => return Err(Error::format(FORMAT, "color PFM is not supported")),
        other => return Err(Error::format(FORMAT, format!("bad magic {other:?}"))),
    }
    let width = header.dimension()?;
    let height = header.dimension()?;
    let scale: f32 = header
        .token()?
        .parse()
        .map_err(|_| Error::format(FORMAT, "bad scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::format(FORMAT, "scale must be finite and non-zero"));
    }
    let little_endian = scale < 0.0;
    let payload = header.payload()?;
    let expected = payload_len(FORMAT, width, height, 4)?;
    if payload.len() != expected {
        return Err(Error::format(
            FORMAT,
            format!("expected {expected} payload bytes, found {}", payload.len()),
        ));
    }

    let mut data = vec![0.0; width * height];
    for (file_row, chunk) in payload.chunks_exact(width * 4).enumerate() {
        let row = height - 1 - file_row;
        for (col, sample) in chunk.chunks_exact(4).enumerate() {
            let raw = [sample[0], sample[1], sample[2], sample[3]];
            let v = if little_endian {
                f32::from_le_bytes(raw)
            } else {
                f32::from_be_bytes(raw)
            };
            data[row * width + col] = v as f64;
        }
    }
    Raster::new(width, height, data)
}

pub fn encode_pfm(raster: &Raster) -> Vec<u8> {
    let (w, h) = raster.dims();
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for row in (0..h).rev() {
        for col in 0..w {
            out.extend_from_slice(&(raster.get(row, col) as f32).to_le_bytes());
        }
    }
    out
}

pub fn read_pfm(path: &Path) -> Result<Raster> {
    decode_pfm(&fs::read(path)?)
}

pub fn write_pfm(path: &Path, raster: &Raster) -> Result<()> {
    fs::write(path, encode_pfm(raster))?;
    Ok(())
}
