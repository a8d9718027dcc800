use crate::error::{Error, Result};

const MAX_TOKEN: usize = 32;

/// Header tokenizer shared by the PFM and PGM readers.
pub(crate) struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    format: &'static str,
}

impl<'a> HeaderReader<'a> {
    pub fn new(bytes: &'a [u8], format: &'static str) -> Self {
        HeaderReader {
            bytes,
            pos: 0,
            format,
        }
    }

    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    pub fn token(&mut self) -> Result<&'a str> {
        self.skip_space_and_comments();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
            if self.pos - start > MAX_TOKEN {
                return Err(Error::format(self.format, "header token too long"));
            }
        }
        if start == self.pos {
            return Err(Error::format(self.format, "truncated header"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| Error::format(self.format, "header is not ASCII"))
    }

    pub fn dimension(&mut self) -> Result<usize> {
        let tok = self.token()?;
        match tok.parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(Error::format(
                self.format,
                format!("bad dimension {tok:?}"),
            )),
        }
    }

    /// Consumes the single whitespace byte that ends the header and returns
    /// the payload.
    pub fn payload(self) -> Result<&'a [u8]> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => Ok(&self.bytes[self.pos + 1..]),
            _ => Err(Error::format(self.format, "missing header terminator")),
        }
    }
}

/// `width · height · sample_size`, rejecting overflow.
pub(crate) fn payload_len(
    format: &'static str,
    width: usize,
    height: usize,
    sample_size: usize,
) -> Result<usize> {
    width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(sample_size))
        .ok_or_else(|| Error::format(format, "dimensions overflow"))
}
