//! File formats: MMAF1 field files, PGM masks and renderings, CSV point sets.
//!
//! PGM images are stored top row first, so image row `r` holds grid row
//! `ny - 1 - r` and the picture is upright when viewed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use medax::fields::{BinaryMask2, GridSpec, Point2, PointSet2, ScalarField2};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const FIELD_MAGIC: &str = "MMAF1";

/// Header line of a field file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldFileHeader {
    pub magic: &'static str,
    pub nx: usize,
    pub ny: usize,
    pub origin_x: f64,
    pub origin_y: f64,
    pub spacing_h: f64,
}

#[derive(Deserialize)]
struct RawHeader {
    magic: String,
    nx: usize,
    ny: usize,
    origin_x: f64,
    origin_y: f64,
    spacing_h: f64,
}

impl FieldFileHeader {
    pub fn of(spec: &GridSpec) -> Self {
        FieldFileHeader {
            magic: FIELD_MAGIC,
            nx: spec.nx,
            ny: spec.ny,
            origin_x: spec.origin_x,
            origin_y: spec.origin_y,
            spacing_h: spec.spacing,
        }
    }
}

pub fn encode_field(f: &ScalarField2) -> Vec<u8> {
    let header = serde_json::to_string(&FieldFileHeader::of(f.spec())).expect("header serializes");
    let mut out = Vec::with_capacity(header.len() + 1 + 8 * f.values().len());
    out.extend_from_slice(header.as_bytes());
    out.push(b'\n');
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<ScalarField2, CliError> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| CliError::Parse("field file has no header line".into()))?;
    let raw: RawHeader = serde_json::from_slice(&bytes[..nl])
        .map_err(|e| CliError::Parse(format!("field header: {e}")))?;
    if raw.magic != FIELD_MAGIC {
        return Err(CliError::Parse(format!("bad magic {:?}", raw.magic)));
    }
    let spec = GridSpec::new(raw.origin_x, raw.origin_y, raw.spacing_h, raw.nx, raw.ny)
        .map_err(|e| CliError::Parse(format!("field header: {e}")))?;
    let payload = &bytes[nl + 1..];
    if payload.len() != 8 * spec.len() {
        return Err(CliError::Parse(format!(
            "payload is {} bytes, header needs {}",
            payload.len(),
            8 * spec.len()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    ScalarField2::from_values(spec, values).map_err(|e| CliError::Parse(format!("field payload: {e}")))
}

pub fn write_field(path: &Path, f: &ScalarField2) -> Result<(), CliError> {
    write_bytes(path, &encode_field(f))
}

pub fn read_field(path: &Path) -> Result<ScalarField2, CliError> {
    decode_field(&read_bytes(path)?)
}

/// Parses "x,y" lines. Blank lines and anything after '#' are ignored.
pub fn parse_points_csv(text: &str) -> Result<PointSet2, CliError> {
    let mut pts = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || CliError::Parse(format!("line {}: expected \"x,y\", got {line:?}", n + 1));
        let mut parts = line.split(',');
        let (Some(x), Some(y), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad());
        };
        let x: f64 = x.trim().parse().map_err(|_| bad())?;
        let y: f64 = y.trim().parse().map_err(|_| bad())?;
        if !x.is_finite() || !y.is_finite() {
            return Err(bad());
        }
        pts.push(Point2::new(x, y));
    }
    Ok(PointSet2::new(pts))
}

/// A decoded PGM image, top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

fn pgm_tokens(bytes: &[u8], count: usize) -> Result<(Vec<usize>, usize), CliError> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    while out.len() < count {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'#') {
            if bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if start == i {
            return Err(CliError::Parse("truncated or malformed PGM".into()));
        }
        let tok = std::str::from_utf8(&bytes[start..i]).expect("digits");
        out.push(tok.parse().map_err(|_| CliError::Parse(format!("bad PGM number {tok}")))?);
    }
    Ok((out, i))
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Pgm, CliError> {
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return Err(CliError::Parse("not a P5 or P2 PGM".into())),
    };
    let (head, end) = pgm_tokens(&bytes[2..], 3)?;
    let (width, height, maxval) = (head[0], head[1], head[2]);
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(CliError::Parse(format!("bad PGM header {width}x{height} max {maxval}")));
    }
    let n = width * height;
    let body = &bytes[2 + end..];
    let pixels: Vec<u16> = if binary {
        // exactly one whitespace byte separates the header from the raster
        let raster = body.get(1..).unwrap_or(&[]);
        let wide = maxval > 255;
        let need = if wide { 2 * n } else { n };
        if raster.len() < need {
            return Err(CliError::Parse(format!("PGM raster has {} bytes, needs {need}", raster.len())));
        }
        if wide {
            raster[..need].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
        } else {
            raster[..n].iter().map(|&b| b as u16).collect()
        }
    } else {
        let (vals, _) = pgm_tokens(body, n)?;
        vals.into_iter().map(|v| v.min(65535) as u16).collect()
    };
    if pixels.iter().any(|&p| p as usize > maxval) {
        return Err(CliError::Parse("PGM pixel above maxval".into()));
    }
    Ok(Pgm { width, height, maxval: maxval as u16, pixels })
}

pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Members are the nonzero pixels. Without `grid` the image sits on the unit
/// lattice with its bottom-left pixel at the origin.
pub fn pgm_to_mask(pgm: &Pgm, grid: Option<GridSpec>) -> Result<BinaryMask2, CliError> {
    let spec = match grid {
        Some(g) if g.nx != pgm.width || g.ny != pgm.height => {
            return Err(CliError::BadParameter(format!(
                "--grid is {}x{} but the image is {}x{}",
                g.nx, g.ny, pgm.width, pgm.height
            )))
        }
        Some(g) => g,
        None => GridSpec::new(0.0, 0.0, 1.0, pgm.width, pgm.height).map_err(CliError::from)?,
    };
    let mut bits = vec![false; spec.len()];
    for r in 0..pgm.height {
        let j = pgm.height - 1 - r;
        for i in 0..pgm.width {
            bits[spec.index(i, j)] = pgm.pixels[r * pgm.width + i] != 0;
        }
    }
    Ok(BinaryMask2::new(spec, bits)?)
}

fn raster(spec: &GridSpec, pixel: impl Fn(usize) -> u8) -> Vec<u8> {
    let mut out = Vec::with_capacity(spec.len());
    for r in 0..spec.ny {
        let j = spec.ny - 1 - r;
        for i in 0..spec.nx {
            out.push(pixel(spec.index(i, j)));
        }
    }
    out
}

pub fn encode_mask_pgm(mask: &BinaryMask2) -> Vec<u8> {
    let spec = mask.spec();
    let bits = mask.bits();
    encode_pgm(spec.nx, spec.ny, &raster(spec, |k| if bits[k] { 255 } else { 0 }))
}

pub fn write_mask_pgm(path: &Path, mask: &BinaryMask2) -> Result<(), CliError> {
    write_bytes(path, &encode_mask_pgm(mask))
}

/// Normalization recorded next to an 8-bit rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderSidecar {
    pub image: String,
    pub min: f64,
    pub max: f64,
    pub nx: usize,
    pub ny: usize,
    pub origin_x: f64,
    pub origin_y: f64,
    pub spacing_h: f64,
}

pub fn sidecar_path(image: &Path) -> PathBuf {
    let mut s = image.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Min-max normalized 8-bit rendering of `f` plus its sidecar JSON.
/// A constant field renders black.
pub fn write_rendering(path: &Path, f: &ScalarField2) -> Result<RenderSidecar, CliError> {
    let (lo, hi) = (f.min(), f.max());
    let span = hi - lo;
    let v = f.values();
    let px = raster(f.spec(), |k| {
        if span > 0.0 {
            (255.0 * (v[k] - lo) / span).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    });
    write_bytes(path, &encode_pgm(f.spec().nx, f.spec().ny, &px))?;
    let spec = f.spec();
    let side = RenderSidecar {
        image: path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        min: lo,
        max: hi,
        nx: spec.nx,
        ny: spec.ny,
        origin_x: spec.origin_x,
        origin_y: spec.origin_y,
        spacing_h: spec.spacing,
    };
    let json = serde_json::to_vec_pretty(&side).expect("sidecar serializes");
    write_bytes(&sidecar_path(path), &json)?;
    Ok(side)
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
