//! Binary PGM (P5, maxval 255) eye images and PBM (P4) occlusion masks.
//!
//! PBM stores 1 for black; black marks an occluded cell, so a set bit reads
//! as invalid.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{EyeImage, EyeSide, OcclusionMask};

struct Header {
    width: usize,
    height: usize,
    maxval: Option<usize>,
    raster_start: usize,
}

fn parse_header(data: &[u8], magic: &[u8; 2], with_maxval: bool) -> Result<Header> {
    if data.len() < 2 || &data[..2] != magic {
        return Err(Error::format(
            0,
            format!("expected magic {:?}", String::from_utf8_lossy(magic)),
        ));
    }
    let mut pos = 2;
    let mut fields = Vec::with_capacity(3);
    let wanted = if with_maxval { 3 } else { 2 };
    while fields.len() < wanted {
        // Whitespace and comments between header tokens.
        loop {
            match data.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while data.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(Error::format(pos as u64, "truncated header")),
            }
        }
        let start = pos;
        while data.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(pos as u64, "expected a decimal header field"));
        }
        let text = std::str::from_utf8(&data[start..pos]).unwrap();
        let value: usize = text
            .parse()
            .map_err(|_| Error::format(start as u64, format!("header field {text} too large")))?;
        fields.push(value);
    }
    match data.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::format(pos as u64, "missing whitespace before raster")),
    }
    let (width, height) = (fields[0], fields[1]);
    if width == 0 || height == 0 {
        return Err(Error::format(2, format!("empty image {width}x{height}")));
    }
    Ok(Header {
        width,
        height,
        maxval: with_maxval.then(|| fields[2]),
        raster_start: pos,
    })
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn decode_pgm(data: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let h = parse_header(data, b"P5", true)?;
    if h.maxval != Some(255) {
        return Err(Error::format(
            2,
            format!("only maxval 255 is supported, got {}", h.maxval.unwrap_or(0)),
        ));
    }
    let need = h
        .width
        .checked_mul(h.height)
        .ok_or_else(|| Error::format(2, "image dimensions overflow"))?;
    let raster = &data[h.raster_start..];
    if raster.len() < need {
        return Err(Error::format(
            h.raster_start as u64,
            format!("truncated raster: expected {need} bytes, found {}", raster.len()),
        ));
    }
    Ok((h.width, h.height, raster[..need].to_vec()))
}

/// Reads an 8-bit binary PGM as an eye image with the given identity.
pub fn read_pgm(
    path: impl AsRef<Path>,
    image_id: &str,
    subject_id: &str,
    eye_side: EyeSide,
) -> Result<EyeImage> {
    let data = read_file(path.as_ref())?;
    let (w, h, px) = decode_pgm(&data)?;
    EyeImage::new(image_id, subject_id, eye_side, w, h, px)
}

pub fn encode_pgm(img: &EyeImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn write_pgm(img: &EyeImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

pub fn decode_pbm_mask(data: &[u8]) -> Result<OcclusionMask> {
    let h = parse_header(data, b"P4", false)?;
    let stride = h.width.div_ceil(8);
    let need = stride
        .checked_mul(h.height)
        .ok_or_else(|| Error::format(2, "mask dimensions overflow"))?;
    let raster = &data[h.raster_start..];
    if raster.len() < need {
        return Err(Error::format(
            h.raster_start as u64,
            format!("truncated raster: expected {need} bytes, found {}", raster.len()),
        ));
    }
    let mut valid = Vec::with_capacity(h.width * h.height);
    for r in 0..h.height {
        let line = &raster[r * stride..(r + 1) * stride];
        for c in 0..h.width {
            let black = line[c / 8] & (0x80 >> (c % 8)) != 0;
            valid.push(!black);
        }
    }
    OcclusionMask::from_vec(h.height, h.width, valid)
}

/// Reads a PBM mask; rows are radial, columns angular.
pub fn read_pbm_mask(path: impl AsRef<Path>) -> Result<OcclusionMask> {
    decode_pbm_mask(&read_file(path.as_ref())?)
}

pub fn encode_pbm_mask(mask: &OcclusionMask) -> Vec<u8> {
    let (rows, cols) = (mask.rows(), mask.cols());
    let mut out = Vec::new();
    write!(out, "P4\n{cols} {rows}\n").unwrap();
    let stride = cols.div_ceil(8);
    for r in 0..rows {
        let mut line = vec![0u8; stride];
        for c in 0..cols {
            if !mask.get(r, c) {
                line[c / 8] |= 0x80 >> (c % 8);
            }
        }
        out.extend_from_slice(&line);
    }
    out
}

pub fn write_pbm_mask(mask: &OcclusionMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pbm_mask(mask)).map_err(|e| Error::io(path, e))
}
