use std::fs;
use std::path::Path;

use demosyn_core::perception::{DepthImage, ObjectMask};

use super::FormatError;

const DEPTH_MAGIC: &str = "PF32LE";

/// Splits `magic`, then whitespace-separated ASCII integers, each header
/// field followed by exactly one whitespace byte before the payload.
fn parse_header<'a>(path: &Path, bytes: &'a [u8], magic: &str, fields: usize) -> Result<(Vec<u64>, &'a [u8]), FormatError> {
    let bad = |m: &str| FormatError::invalid(path, m.to_string());
    let mut pos = 0;
    let token = |pos: &mut usize| -> Result<&'a [u8], FormatError> {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos || *pos >= bytes.len() {
            return Err(bad("truncated header"));
        }
        let t = &bytes[start..*pos];
        *pos += 1;
        Ok(t)
    };
    if token(&mut pos)? != magic.as_bytes() {
        return Err(bad(&format!("expected `{magic}` header")));
    }
    let mut values = Vec::with_capacity(fields);
    for _ in 0..fields {
        let t = token(&mut pos)?;
        let v = std::str::from_utf8(t)
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| bad("header fields must be decimal integers"))?;
        values.push(v);
    }
    Ok((values, &bytes[pos..]))
}

fn read(path: &Path) -> Result<Vec<u8>, FormatError> {
    fs::read(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    fs::write(path, bytes).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn dims(path: &Path, w: u64, h: u64) -> Result<(u32, u32), FormatError> {
    match (u32::try_from(w), u32::try_from(h)) {
        (Ok(w), Ok(h)) if w > 0 && h > 0 => Ok((w, h)),
        _ => Err(FormatError::invalid(path, "image dimensions must be positive 32-bit integers")),
    }
}

/// Binary PGM (`P5`, maxval 255): 0 background, 255 object, row-major.
pub fn encode_mask(mask: &ObjectMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

pub fn decode_mask(path: &Path, bytes: &[u8]) -> Result<ObjectMask, FormatError> {
    let (h, data) = parse_header(path, bytes, "P5", 3)?;
    let (w, hgt) = dims(path, h[0], h[1])?;
    if h[2] != 255 {
        return Err(FormatError::invalid(path, "mask maxval must be 255"));
    }
    let n = w as usize * hgt as usize;
    if data.len() != n {
        return Err(FormatError::invalid(path, format!("mask payload has {} bytes, expected {n}", data.len())));
    }
    let bits = data
        .iter()
        .enumerate()
        .map(|(i, &b)| match b {
            0 => Ok(false),
            255 => Ok(true),
            v => Err(FormatError::invalid(path, format!("mask byte {i} is {v}, expected 0 or 255"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    ObjectMask::new(w, hgt, bits).map_err(|e| FormatError::invalid(path, e.to_string()))
}

/// `PF32LE\n{w} {h}\n` followed by row-major little-endian `f32` meters.
pub fn encode_depth(depth: &DepthImage) -> Vec<u8> {
    let mut out = format!("{DEPTH_MAGIC}\n{} {}\n", depth.width(), depth.height()).into_bytes();
    for v in depth.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_depth(path: &Path, bytes: &[u8]) -> Result<DepthImage, FormatError> {
    let (h, data) = parse_header(path, bytes, DEPTH_MAGIC, 2)?;
    let (w, hgt) = dims(path, h[0], h[1])?;
    let n = w as usize * hgt as usize;
    if data.len() != 4 * n {
        return Err(FormatError::invalid(path, format!("depth payload has {} bytes, expected {}", data.len(), 4 * n)));
    }
    let values = data
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    DepthImage::new(w, hgt, values).map_err(|e| FormatError::invalid(path, e.to_string()))
}

pub fn load_mask(path: &Path) -> Result<ObjectMask, FormatError> {
    decode_mask(path, &read(path)?)
}

pub fn save_mask(path: &Path, mask: &ObjectMask) -> Result<(), FormatError> {
    write(path, &encode_mask(mask))
}

pub fn load_depth(path: &Path) -> Result<DepthImage, FormatError> {
    decode_depth(path, &read(path)?)
}

pub fn save_depth(path: &Path, depth: &DepthImage) -> Result<(), FormatError> {
    write(path, &encode_depth(depth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_round_trip() {
        let m = ObjectMask::from_fn(5, 3, |u, v| (u + v) % 2 == 0);
        let p = Path::new("m.pgm");
        assert_eq!(decode_mask(p, &encode_mask(&m)).unwrap(), m);
    }

    #[test]
    fn depth_round_trip() {
        let values: Vec<f32> = (0..12).map(|i| 0.5 + i as f32 * 0.01).collect();
        let d = DepthImage::new(4, 3, values).unwrap();
        let p = Path::new("d.pf32");
        assert_eq!(decode_depth(p, &encode_depth(&d)).unwrap(), d);
    }

    #[test]
    fn truncated_payload_rejected() {
        let d = DepthImage::filled(4, 3, 1.0);
        let bytes = encode_depth(&d);
        assert!(decode_depth(Path::new("d"), &bytes[..bytes.len() - 1]).is_err());
        assert!(decode_mask(Path::new("m"), b"P5\n4").is_err());
    }
}
