//! The `MVIMG1` binary image format.
//!
//! Layout, all little endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 6     | magic `MVIMG1` |
//! | 8     | manifold tag, ASCII, zero padded |
//! | 4 × 3 | `n1`, `n2`, `point_len` as `u32` |
//! | rest  | `n1·n2·point_len` values as `f64`, pixels in column-major order |

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{ManifoldImage, PixelGrid};
use crate::manifolds;

pub const MAGIC: &[u8; 6] = b"MVIMG1";

/// Manifold tags the format accepts.
pub const TAGS: [&str; 6] = ["s1", "s2", "s3", "so3", "spd2", "spd3"];

const TAG_LEN: usize = 8;
const HEADER_LEN: usize = 6 + TAG_LEN + 12;

/// Drift the reader repairs by re-projection.
const READ_TOL: f64 = 1e-8;
const EXACT_TOL: f64 = 1e-12;

pub fn encode_mvimg(img: &ManifoldImage) -> Result<Vec<u8>> {
    let tag = img.manifold().name();
    if !TAGS.contains(&tag.as_str()) {
        return Err(Error::UnknownName(format!("manifold tag {tag}")));
    }
    let g = img.grid();
    let dims = [g.n1, g.n2, img.point_len()]
        .iter()
        .map(|&n| u32::try_from(n).map_err(|_| Error::SizeMismatch(format!("dimension {n} exceeds u32"))))
        .collect::<Result<Vec<u32>>>()?;
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * img.data().len());
    out.extend_from_slice(MAGIC);
    let mut t = [0u8; TAG_LEN];
    t[..tag.len()].copy_from_slice(tag.as_bytes());
    out.extend_from_slice(&t);
    for d in dims {
        out.extend_from_slice(&d.to_le_bytes());
    }
    for v in img.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_mvimg(bytes: &[u8]) -> Result<ManifoldImage> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::SizeMismatch(format!("header needs {HEADER_LEN} bytes, file has {}", bytes.len())));
    }
    let raw_tag = &bytes[6..6 + TAG_LEN];
    let end = raw_tag.iter().position(|&b| b == 0).unwrap_or(TAG_LEN);
    let tag = std::str::from_utf8(&raw_tag[..end]).map_err(|_| Error::UnknownName("non-ASCII manifold tag".into()))?;
    if !TAGS.contains(&tag) {
        return Err(Error::UnknownName(format!("manifold tag {tag}")));
    }
    let u = |i: usize| {
        let o = 6 + TAG_LEN + 4 * i;
        u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize
    };
    let (n1, n2, len) = (u(0), u(1), u(2));
    let m = manifolds::from_name(tag)?;
    if len != m.point_len() {
        return Err(Error::SizeMismatch(format!("{tag} points have length {}, header says {len}", m.point_len())));
    }
    let count = n1
        .checked_mul(n2)
        .and_then(|n| n.checked_mul(len))
        .ok_or_else(|| Error::SizeMismatch("header dimensions overflow".into()))?;
    if n1 == 0 || n2 == 0 {
        return Err(Error::SizeMismatch(format!("empty grid {n1}×{n2}")));
    }
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != 8 * count {
        return Err(Error::SizeMismatch(format!("expected {} payload bytes, found {}", 8 * count, payload.len())));
    }
    let mut data: Vec<f64> = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    for (k, p) in data.chunks_mut(len).enumerate() {
        m.check_point(p, READ_TOL).map_err(|e| Error::Membership(e.at_pixel(k).to_string()))?;
        // Points that are members up to rounding are kept bit for bit.
        if m.check_point(p, EXACT_TOL).is_err() {
            let q = m.normalize(p);
            p.copy_from_slice(&q);
        }
    }
    Ok(ManifoldImage::from_raw(PixelGrid::new(n1, n2), m, data))
}

pub fn write_mvimg(path: impl AsRef<Path>, img: &ManifoldImage) -> Result<()> {
    fs::write(path, encode_mvimg(img)?)?;
    Ok(())
}

pub fn read_mvimg(path: impl AsRef<Path>) -> Result<ManifoldImage> {
    decode_mvimg(&fs::read(path)?)
}
