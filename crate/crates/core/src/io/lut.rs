//! Serialized decode grids: one JSON header line
//! `{"family":..,"p":..,"b":..,"n":..,"version":1}` followed by `n²`
//! little-endian `f32` values of `q_map` and then `n²` of `r_map`, both
//! row-major with row 0 at `y ≈ 0`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codec::{DecodeGrid, DEFAULT_MAX_GRID_CELLS};
use crate::curve::{CurveFamily, CurveSpec};
use crate::error::{Error, Result};

pub const LUT_VERSION: u32 = 1;
const FORMAT: &str = "LUT";
const MAX_HEADER: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LutHeader {
    pub family: CurveFamily,
    pub p: u32,
    pub b: f64,
    pub n: usize,
    pub version: u32,
}

impl LutHeader {
    pub fn spec(&self) -> CurveSpec {
        CurveSpec {
            family: self.family,
            order: self.p,
            border: self.b,
        }
    }
}

pub fn encode_lut_file(grid: &DecodeGrid) -> Result<Vec<u8>> {
    let spec = grid.spec();
    let header = LutHeader {
        family: spec.family,
        p: spec.order,
        b: spec.border,
        n: grid.n(),
        version: LUT_VERSION,
    };
    let mut out = serde_json::to_vec(&header)?;
    out.push(b'\n');
    out.reserve(grid.q_map().len() * 8);
    for &v in grid.q_map().iter().chain(grid.r_map()) {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode_lut_file(bytes: &[u8]) -> Result<DecodeGrid> {
    let limit = bytes.len().min(MAX_HEADER);
    let newline = bytes[..limit]
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::format(FORMAT, "missing header line"))?;
    let header: LutHeader = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| Error::format(FORMAT, format!("bad header: {e}")))?;
    if header.version != LUT_VERSION {
        return Err(Error::format(
            FORMAT,
            format!("unsupported version {}", header.version),
        ));
    }
    let cells = header
        .n
        .checked_mul(header.n)
        .filter(|&c| c <= DEFAULT_MAX_GRID_CELLS)
        .ok_or_else(|| Error::format(FORMAT, format!("grid side {} too large", header.n)))?;
    let body = &bytes[newline + 1..];
    if body.len() != cells * 8 {
        return Err(Error::format(
            FORMAT,
            format!("expected {} payload bytes, found {}", cells * 8, body.len()),
        ));
    }
    let mut values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64);
    let q_map: Vec<f64> = values.by_ref().take(cells).collect();
    let r_map: Vec<f64> = values.collect();
    DecodeGrid::from_parts(header.spec(), header.n, q_map, r_map)
        .map_err(|e| Error::format(FORMAT, e.to_string()))
}

pub fn write_lut(path: &Path, grid: &DecodeGrid) -> Result<()> {
    fs::write(path, encode_lut_file(grid)?)?;
    Ok(())
}

pub fn read_lut(path: &Path) -> Result<DecodeGrid> {
    decode_lut_file(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::generate;

    #[test]
    fn roundtrip_to_f32_precision() {
        let curve = generate(CurveSpec::hilbert(2)).unwrap();
        let grid = DecodeGrid::build(&curve, 8).unwrap();
        let bytes = encode_lut_file(&grid).unwrap();
        let header_end = bytes.iter().position(|&b| b == b'\n').unwrap();
        assert_eq!(
            std::str::from_utf8(&bytes[..header_end]).unwrap(),
            r#"{"family":"hilbert","p":2,"b":0.1,"n":8,"version":1}"#
        );
        assert_eq!(bytes.len(), header_end + 1 + 8 * 64);
        let back = decode_lut_file(&bytes).unwrap();
        assert_eq!(back.spec(), grid.spec());
        for (a, b) in grid.q_map().iter().zip(back.q_map()) {
            assert_eq!(*a as f32 as f64, *b);
        }
    }

    #[test]
    fn rejects_malformed() {
        let curve = generate(CurveSpec::hilbert(1)).unwrap();
        let good = encode_lut_file(&DecodeGrid::build(&curve, 4).unwrap()).unwrap();
        assert!(decode_lut_file(&good[..good.len() - 1]).is_err());
        assert!(decode_lut_file(b"no newline").is_err());
        assert!(decode_lut_file(b"{\"family\":\"hilbert\",\"p\":1,\"b\":0.1,\"n\":4,\"version\":2}\n").is_err());
        assert!(decode_lut_file(b"{\"family\":\"peano\",\"p\":9,\"b\":0.1,\"n\":2,\"version\":1}\n").is_err());
        assert!(decode_lut_file(
            b"{\"family\":\"hilbert\",\"p\":1,\"b\":0.1,\"n\":18446744073709551615,\"version\":1}\n"
        )
        .is_err());
        let mut nan = good.clone();
        let start = good.iter().position(|&b| b == b'\n').unwrap() + 1;
        nan[start..start + 4].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(decode_lut_file(&nan).is_err());
    }
}
