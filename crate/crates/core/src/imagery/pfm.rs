//! Portable float map codec. Scanlines are stored bottom-to-top; a negative
//! scale marks little-endian data.

use super::{DisparityImage, ImageError};

/// Refuse rasters above 2^28 pixels.
const MAX_PIXELS: u64 = 1 << 28;

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| &bytes[start..*pos])
}

fn parse<T: std::str::FromStr>(tok: Option<&[u8]>, what: &str) -> Result<T, ImageError> {
    tok.and_then(|t| std::str::from_utf8(t).ok())
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ImageError::Corrupt(format!("pfm header: bad {what}")))
}

pub(super) fn decode(bytes: &[u8]) -> Result<DisparityImage, ImageError> {
    let mut pos = 0;
    let channels = match next_token(bytes, &mut pos) {
        Some(b"Pf") => 1usize,
        Some(b"PF") => 3usize,
        _ => return Err(ImageError::FormatMismatch("missing Pf/PF magic".into())),
    };
    let width: u64 = parse(next_token(bytes, &mut pos), "width")?;
    let height: u64 = parse(next_token(bytes, &mut pos), "height")?;
    let scale: f64 = parse(next_token(bytes, &mut pos), "scale")?;
    if width == 0 || height == 0 || width.checked_mul(height).is_none_or(|n| n > MAX_PIXELS) {
        return Err(ImageError::DimensionOverflow { width, height });
    }
    if scale == 0.0 || !scale.is_finite() {
        return Err(ImageError::Corrupt(
            "pfm header: scale must be non-zero".into(),
        ));
    }
    // exactly one whitespace byte separates the header from the payload
    pos += 1;
    let (w, h) = (width as usize, height as usize);
    let needed = w * h * channels * 4;
    let payload = bytes.get(pos..).unwrap_or(&[]);
    if payload.len() < needed {
        return Err(ImageError::Corrupt(format!(
            "pfm payload has {} bytes, expected {needed}",
            payload.len()
        )));
    }
    let little = scale < 0.0;
    let mut values = vec![None; w * h];
    for row in 0..h {
        let v = h - 1 - row;
        for u in 0..w {
            let off = ((row * w + u) * channels) * 4;
            let raw: [u8; 4] = payload[off..off + 4].try_into().expect("4 bytes");
            let x = if little {
                f32::from_le_bytes(raw)
            } else {
                f32::from_be_bytes(raw)
            };
            values[v * w + u] = (x.is_finite() && x > 0.0).then_some(x);
        }
    }
    DisparityImage::from_values(w, h, values)
}

pub(super) fn encode(d: &DisparityImage) -> Vec<u8> {
    let (w, h) = (d.width(), d.height());
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for row in 0..h {
        let v = h - 1 - row;
        for u in 0..w {
            let x = match d.get(u, v) {
                Some(x) if x > 0.0 => x,
                // a valid zero would read back as invalid
                Some(_) => f32::from_bits(1),
                None => f32::INFINITY,
            };
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}
