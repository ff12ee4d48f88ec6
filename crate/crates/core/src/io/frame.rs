use std::io::Write;
use std::path::Path;

use crate::error::{ConfigError, Error, Result};
use crate::model::TrailField;

/// Map trail values to grey levels: `round(min(v, cap) / cap × 255)`,
/// rounding halves up.
pub fn quantise_trail(trail: &TrailField, cap: f64) -> Result<Vec<u8>, ConfigError> {
    if !(cap.is_finite() && cap > 0.0) {
        return Err(ConfigError::new("trail_display_cap", "must be positive"));
    }
    Ok(trail
        .values()
        .iter()
        .map(|&v| ((v.clamp(0.0, cap) / cap * 255.0) + 0.5).floor() as u8)
        .collect())
}

fn pgm_bytes(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

pub fn write_pgm(path: impl AsRef<Path>, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    assert_eq!(pixels.len(), width * height);
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&pgm_bytes(width, height, pixels))?;
    f.flush()?;
    Ok(())
}

/// Write the trail as a binary greyscale PGM.
pub fn write_frame(trail: &TrailField, path: impl AsRef<Path>, cap: f64) -> Result<()> {
    let pixels = quantise_trail(trail, cap)?;
    write_pgm(path, trail.width(), trail.height(), &pixels)
}

/// Write agent cells as white on black.
pub fn write_agent_overlay(occupancy: &[bool], width: usize, height: usize, path: impl AsRef<Path>) -> Result<()> {
    let pixels: Vec<u8> = occupancy.iter().map(|&o| if o { 255 } else { 0 }).collect();
    write_pgm(path, width, height, &pixels)
}

/// Parse a binary PGM with maxval 255, returning `(width, height, pixels)`.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<u8>)> {
    parse_pgm(&std::fs::read(path)?)
}

pub fn parse_pgm(data: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    // Header: magic, width, height, maxval separated by whitespace, with
    // optional `#` comments, then exactly one whitespace byte.
    let mut fields = Vec::new();
    let mut i = 0;
    while fields.len() < 4 {
        while i < data.len() && (data[i].is_ascii_whitespace() || data[i] == b'#') {
            if data[i] == b'#' {
                while i < data.len() && data[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        let start = i;
        while i < data.len() && !data[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(Error::Frame("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&data[start..i]).into_owned());
    }
    if fields[0] != "P5" {
        return Err(Error::Frame(format!("expected P5, found {}", fields[0])));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| Error::Frame(format!("bad header number `{s}`")));
    let (w, h, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval != 255 {
        return Err(Error::Frame(format!("unsupported maxval {maxval}")));
    }
    let body = &data[(i + 1).min(data.len())..];
    if body.len() != w * h {
        return Err(Error::Frame(format!("expected {} pixel bytes, found {}", w * h, body.len())));
    }
    Ok((w, h, body.to_vec()))
}
