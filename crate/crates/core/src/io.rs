//! File formats: PGM images for facies grids and the `VECF` text format for
//! vector fields.
//!
//! Image files are stored top row first while grids keep row 0 at the
//! bottom, so rows are flipped on every read and write.
//!
//! `VECF` layout:
//!
//! ```text
//! VECF <width> <height>
//! <width tokens for row 0 (bottom)>
//! ...
//! <width tokens for row height-1 (top)>
//! ```
//!
//! Each token is a radian value or the literal `ND`.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{BinaryGrid, VectorField};

/// Grey level at or above which (on a 0..=255 scale) a pixel is background.
pub const SAND_THRESHOLD: u32 = 128;

/// Significant digits used when writing angles.
pub const ANGLE_DIGITS: usize = 9;

/// Writes `bytes` to `path` through a temporary file in the same directory
/// followed by a rename, so readers never observe a partial file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

struct HeaderScanner<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> HeaderScanner<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            let c = self.data[self.pos];
            if c == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format {
                offset: start,
                message: format!("expected {what}"),
            });
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format {
                offset: start,
                message: format!("{what} out of range"),
            })
    }
}

/// Decodes a P2 or P5 greymap into raw grey levels (top row first) plus
/// width, height and maxval.
fn decode_pgm(data: &[u8]) -> Result<(usize, usize, u32, Vec<u32>)> {
    let binary = match data.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => {
            return Err(Error::Format {
                offset: 0,
                message: "missing P2/P5 magic".into(),
            })
        }
    };
    let mut sc = HeaderScanner { data, pos: 2 };
    let width = sc.number("width")? as usize;
    let height = sc.number("height")? as usize;
    let maxval_at = sc.pos;
    let maxval = sc.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format {
            offset: maxval_at,
            message: format!("maxval {maxval} must be in 1..=255"),
        });
    }
    let expected = width * height;
    let mut values = Vec::with_capacity(expected);
    if binary {
        match data.get(sc.pos) {
            Some(c) if c.is_ascii_whitespace() => sc.pos += 1,
            _ => {
                return Err(Error::Format {
                    offset: sc.pos,
                    message: "expected single whitespace before raster".into(),
                })
            }
        }
        let raster = &data[sc.pos..];
        if raster.len() < expected {
            return Err(Error::Truncated {
                expected,
                found: raster.len(),
            });
        }
        values.extend(raster[..expected].iter().map(|&b| u32::from(b)));
    } else {
        while values.len() < expected {
            sc.skip_space_and_comments();
            if sc.pos >= data.len() {
                return Err(Error::Truncated {
                    expected,
                    found: values.len(),
                });
            }
            values.push(sc.number("pixel value")?);
        }
    }
    if let Some(pos) = values.iter().position(|&v| v > maxval) {
        return Err(Error::Format {
            offset: sc.pos,
            message: format!("pixel {pos} exceeds maxval {maxval}"),
        });
    }
    Ok((width, height, maxval, values))
}

/// Parses PGM bytes into a facies grid. Dark pixels (below half intensity)
/// are sand.
pub fn decode_binary_pgm(data: &[u8]) -> Result<BinaryGrid> {
    let (width, height, maxval, values) = decode_pgm(data)?;
    let mut cells = vec![0u8; width * height];
    for (row, chunk) in values.chunks(width.max(1)).enumerate().take(height) {
        let y = height - 1 - row;
        for (x, &v) in chunk.iter().enumerate() {
            // v scaled to 0..=255 is below the threshold
            cells[y * width + x] = u8::from(v * 255 < SAND_THRESHOLD * maxval);
        }
    }
    BinaryGrid::from_cells(width, height, cells)
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<BinaryGrid> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_binary_pgm(&data)
}

/// Encodes raw grey levels given bottom row first as a P5 image.
pub fn encode_gray_pgm(width: usize, height: usize, bottom_up: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.reserve(width * height);
    for y in (0..height).rev() {
        out.extend_from_slice(&bottom_up[y * width..(y + 1) * width]);
    }
    out
}

/// P5, maxval 255: sand is black (0), background white (255).
pub fn encode_binary_pgm(grid: &BinaryGrid) -> Vec<u8> {
    let levels: Vec<u8> = grid
        .cells()
        .iter()
        .map(|&c| if c == 1 { 0 } else { 255 })
        .collect();
    encode_gray_pgm(grid.width(), grid.height(), &levels)
}

pub fn write_pgm(grid: &BinaryGrid, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, &encode_binary_pgm(grid))
}

/// Writes per-cell grey levels (bottom row first) as a P5 image.
pub fn write_gray_pgm(
    width: usize,
    height: usize,
    bottom_up: &[u8],
    path: impl AsRef<Path>,
) -> Result<()> {
    write_atomic(path, &encode_gray_pgm(width, height, bottom_up))
}

/// Formats an angle with [`ANGLE_DIGITS`] significant digits in plain
/// decimal notation.
pub fn format_angle(a: f64) -> String {
    if a == 0.0 {
        return "0".to_string();
    }
    let int_digits = a.abs().log10().floor() as i64 + 1;
    let decimals = (ANGLE_DIGITS as i64 - int_digits).max(0) as usize;
    let mut s = format!("{a:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

pub fn encode_field(field: &VectorField) -> String {
    let (w, h) = field.dims();
    let mut out = format!("VECF {w} {h}\n");
    for y in 0..h {
        for x in 0..w {
            if x > 0 {
                out.push(' ');
            }
            match field.get(x, y) {
                Some(a) => out.push_str(&format_angle(a)),
                None => out.push_str("ND"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn decode_field(text: &str) -> Result<VectorField> {
    let header_end = text.find('\n').unwrap_or(text.len());
    let mut header = text[..header_end].split_whitespace();
    let bad_header = || Error::Format {
        offset: 0,
        message: "expected header `VECF <width> <height>`".into(),
    };
    if header.next() != Some("VECF") {
        return Err(bad_header());
    }
    let width: usize = header
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(bad_header)?;
    let height: usize = header
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(bad_header)?;
    if header.next().is_some() {
        return Err(bad_header());
    }

    let mut cells = Vec::with_capacity(width * height);
    let mut offset = header_end + 1;
    let body = text.get(header_end + 1..).unwrap_or("");
    let mut rows = 0;
    for line in body.split_inclusive('\n') {
        let content = line.trim();
        if content.is_empty() {
            offset += line.len();
            continue;
        }
        if rows == height {
            return Err(Error::Format {
                offset,
                message: format!("more than {height} rows"),
            });
        }
        let before = cells.len();
        for token in content.split_whitespace() {
            if token == "ND" {
                cells.push(None);
                continue;
            }
            let a: f64 = token.parse().map_err(|_| Error::Format {
                offset,
                message: format!("bad token {token:?}"),
            })?;
            if !a.is_finite() {
                return Err(Error::Format {
                    offset,
                    message: format!("non-finite angle {token:?}"),
                });
            }
            if a.abs() > PI {
                return Err(Error::Format {
                    offset,
                    message: format!("angle {token} outside [-pi, pi]"),
                });
            }
            cells.push(Some(a));
        }
        if cells.len() - before != width {
            return Err(Error::Format {
                offset,
                message: format!(
                    "row {rows} has {} tokens, expected {width}",
                    cells.len() - before
                ),
            });
        }
        rows += 1;
        offset += line.len();
    }
    if rows != height {
        return Err(Error::Format {
            offset: text.len(),
            message: format!("expected {height} rows, found {rows}"),
        });
    }
    VectorField::from_cells(width, height, cells)
}

pub fn read_field(path: impl AsRef<Path>) -> Result<VectorField> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_field(&text)
}

pub fn write_field(field: &VectorField, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, encode_field(field).as_bytes())
}
