//! Binary PGM (P5) reading and writing.
//!
//! Only 8-bit files are accepted (`maxval` in 1..=255). Sample values are kept
//! as stored; no rescaling to 255 is applied.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::Frame;
use crate::error::{Error, Result};

/// Parses a P5 image from an in-memory buffer.
pub fn decode(bytes: &[u8]) -> Result<Frame> {
    decode_inner(bytes, None)
}

/// Reads a P5 image from disk.
pub fn read(path: &Path) -> Result<Frame> {
    let bytes = fs::read(path)?;
    decode_inner(&bytes, Some(path))
}

/// Writes a frame as P5 with maxval 255.
pub fn write(path: &Path, frame: &Frame) -> Result<()> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    out.write_all(&encode(frame))?;
    out.flush()?;
    Ok(())
}

pub fn encode(frame: &Frame) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", frame.width(), frame.height());
    let mut buf = Vec::with_capacity(header.len() + frame.pixels().len());
    buf.extend_from_slice(header.as_bytes());
    buf.extend_from_slice(frame.pixels());
    buf
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str, path: Option<&Path>) -> Result<usize> {
        let tok = self
            .token()
            .ok_or_else(|| Error::parse(path, format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::parse(path, format!("invalid {what}")))
    }
}

fn decode_inner(bytes: &[u8], path: Option<&Path>) -> Result<Frame> {
    let mut cur = Cursor { bytes, pos: 0 };
    match cur.token() {
        Some(b"P5") => {}
        Some(_) => return Err(Error::parse(path, "not a binary PGM (expected P5 magic)")),
        None => return Err(Error::parse(path, "empty file")),
    }
    let width = cur.number("width", path)?;
    let height = cur.number("height", path)?;
    let maxval = cur.number("maxval", path)?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::parse(
            path,
            format!("maxval {maxval} unsupported (8-bit only)"),
        ));
    }
    // exactly one whitespace byte separates the header from the raster
    if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
        return Err(Error::parse(path, "truncated header"));
    }
    let start = cur.pos + 1;
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::parse(path, "image dimensions overflow"))?;
    let raster = bytes
        .get(start..start + count)
        .ok_or_else(|| Error::parse(path, format!("expected {count} pixel bytes")))?;
    Frame::new(width, height, raster.to_vec()).map_err(|e| Error::parse(path, e.to_string()))
}
