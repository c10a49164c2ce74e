//! NIR1 container for a [`NormalizedIris`].
//!
//! ```text
//! offset  size           field
//! 0       4              magic "NIR1"
//! 4       4              rows, u32 LE
//! 8       4              cols, u32 LE
//! 12      4              scale, f32 LE
//! 16      4              intensity_scale, f32 LE
//! 20      16             image_id, UTF-8, zero padded
//! 36      16             subject_id, UTF-8, zero padded
//! 52      4*rows*cols    intensities, f32 LE, row-major, row 0 = pupil
//! ..      rows*cols      mask, 1 = valid, 0 = masked
//! ```
//!
//! Values are stored single precision, so a round trip is exact for any iris
//! whose intensities are representable as `f32` and whose scale is either
//! `f32`-exact or a decimal of at most 6 places. Re-encoding a decoded file
//! always reproduces the same bytes.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::NormalizedIris;

pub const MAGIC: &[u8; 4] = b"NIR1";
pub const ID_LEN: usize = 16;
const HEADER_LEN: usize = 52;

fn put_id(buf: &mut Vec<u8>, id: &str) {
    let mut end = id.len().min(ID_LEN);
    while !id.is_char_boundary(end) {
        end -= 1;
    }
    let mut field = [0u8; ID_LEN];
    field[..end].copy_from_slice(&id.as_bytes()[..end]);
    buf.extend_from_slice(&field);
}

pub fn encode_nir(nir: &NormalizedIris) -> Vec<u8> {
    let cells = nir.len();
    let mut buf = Vec::with_capacity(HEADER_LEN + 5 * cells);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(nir.rows() as u32).to_le_bytes());
    buf.extend_from_slice(&(nir.cols() as u32).to_le_bytes());
    buf.extend_from_slice(&(nir.scale as f32).to_le_bytes());
    buf.extend_from_slice(&(nir.intensity_scale as f32).to_le_bytes());
    put_id(&mut buf, &nir.image_id);
    put_id(&mut buf, &nir.subject_id);
    for &v in nir.intensities() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    buf.extend(nir.mask().iter().map(|&m| u8::from(m)));
    buf
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let avail = self.data.len() - self.pos;
        if avail < n {
            return Err(Error::format(
                self.pos as u64,
                format!("truncated {what}: expected {n} bytes, found {avail}"),
            ));
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f32(&mut self, what: &str) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn id(&mut self, what: &str) -> Result<String> {
        let start = self.pos;
        let raw = self.take(ID_LEN, what)?;
        let end = raw.iter().rposition(|&b| b != 0).map_or(0, |p| p + 1);
        String::from_utf8(raw[..end].to_vec())
            .map_err(|e| Error::format(start as u64, format!("{what} is not UTF-8: {e}")))
    }
}

/// Pyramid scales are short decimals (0.3, 0.05) that single precision cannot
/// hold. Prefer the 6-decimal value when it encodes to the same bits, so such
/// scales come back exactly while re-encoding stays byte-identical.
fn decimal_or_exact(v: f32) -> f64 {
    let snapped = (f64::from(v) * 1e6).round() / 1e6;
    if snapped as f32 == v {
        snapped
    } else {
        f64::from(v)
    }
}

pub fn decode_nir(data: &[u8]) -> Result<NormalizedIris> {
    let mut cur = Cursor { data, pos: 0 };
    let magic = cur.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::format(
            0,
            format!("bad magic {:?}, expected \"NIR1\"", String::from_utf8_lossy(magic)),
        ));
    }
    let rows = cur.u32("rows")? as usize;
    let cols = cur.u32("cols")? as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::format(4, format!("empty grid {rows}x{cols}")));
    }
    let cells = rows
        .checked_mul(cols)
        .filter(|c| c.checked_mul(5).is_some())
        .ok_or_else(|| Error::format(4, format!("grid {rows}x{cols} overflows")))?;
    let scale = decimal_or_exact(cur.f32("scale")?);
    let intensity_scale = f64::from(cur.f32("intensity_scale")?);
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::format(12, format!("scale {scale} outside (0, 1]")));
    }
    if !(intensity_scale > 0.0 && intensity_scale.is_finite()) {
        return Err(Error::format(16, format!("intensity scale {intensity_scale} not positive")));
    }
    let image_id = cur.id("image_id")?;
    let subject_id = cur.id("subject_id")?;

    let start = cur.pos;
    let raw = cur.take(4 * cells, "intensity section")?;
    let mut intensities = Vec::with_capacity(cells);
    for (k, chunk) in raw.chunks_exact(4).enumerate() {
        let v = f64::from(f32::from_le_bytes(chunk.try_into().unwrap()));
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::format(
                (start + 4 * k) as u64,
                format!("intensity {v} must be finite and >= 0"),
            ));
        }
        intensities.push(v);
    }
    let start = cur.pos;
    let raw = cur.take(cells, "mask section")?;
    let mut mask = Vec::with_capacity(cells);
    for (k, &b) in raw.iter().enumerate() {
        match b {
            0 => mask.push(false),
            1 => mask.push(true),
            other => {
                return Err(Error::format(
                    (start + k) as u64,
                    format!("mask byte {other} is neither 0 nor 1"),
                ))
            }
        }
    }
    if cur.pos != data.len() {
        return Err(Error::format(
            cur.pos as u64,
            format!("{} trailing bytes", data.len() - cur.pos),
        ));
    }
    Ok(NormalizedIris::new(image_id, subject_id, rows, cols, intensities, mask)?
        .with_scale(scale)
        .with_intensity_scale(intensity_scale))
}

pub fn save_nir(nir: &NormalizedIris, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_nir(nir)).map_err(|e| Error::io(path, e))
}

pub fn load_nir(path: impl AsRef<Path>) -> Result<NormalizedIris> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_nir(&data)
}
