//! Bit-exact file IO.
//!
//! Masks and gray frames are binary portable graymaps (`P5`, maxval 255,
//! foreground = 255). Color frames are binary portable pixmaps (`P6`).
//! Probability maps are raw little-endian f32 grids behind a 16-byte header:
//! magic `PMAP`, u32 width, u32 height, u32 reserved = 0.
//!
//! A sequence lives at `<root>/<name>/frames/%05d.pgm|ppm` with ground truth
//! at `<root>/<name>/gt/%05d.pgm` and an optional `attributes.txt` holding
//! one tag per line.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frame::{Attribute, Frame, VideoSequence};
use crate::mask::Mask;
use crate::probmap::ProbMap;

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Netpbm header: magic, then three whitespace-separated decimal fields with
/// `#` comments allowed, then exactly one whitespace byte before the raster.
fn parse_pnm_header<'a>(path: &Path, data: &'a [u8], magic: &str) -> Result<(usize, usize, &'a [u8])> {
    let bad = |reason: &str| Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if data.len() < 2 || &data[..2] != magic.as_bytes() {
        return Err(bad(&format!("expected magic {magic}")));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        // skip whitespace and comments
        loop {
            while pos < data.len() && data[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < data.len() && data[pos] == b'#' {
                while pos < data.len() && data[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < data.len() && data[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("missing header field"));
        }
        let text = std::str::from_utf8(&data[start..pos]).expect("digits are utf8");
        *field = text.parse().map_err(|_| bad("header field out of range"))?;
    }
    if pos >= data.len() || !data[pos].is_ascii_whitespace() {
        return Err(bad("missing separator before raster"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(bad("zero dimension"));
    }
    if maxval != 255 {
        return Err(bad(&format!("maxval must be 255, got {maxval}")));
    }
    Ok((width, height, &data[pos..]))
}

/// Loads a binary mask: 0 is background, 255 foreground, anything else is
/// rejected with the offending pixel index.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let data = read_file(path)?;
    let (width, height, raster) = parse_pnm_header(path, &data, "P5")?;
    if raster.len() != width * height {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            reason: format!("raster has {} bytes, expected {}", raster.len(), width * height),
        });
    }
    let mut bits = Vec::with_capacity(width * height);
    for (index, &value) in raster.iter().enumerate() {
        match value {
            0 => bits.push(false),
            255 => bits.push(true),
            _ => return Err(Error::NonBinaryMask { index, value }),
        }
    }
    Ok(Mask::from_bits(width, height, bits))
}

pub fn save_mask(path: impl AsRef<Path>, mask: &Mask) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    write_file(path.as_ref(), &out)
}

/// Loads a frame from a P5 (gray) or P6 (color) file, chosen by magic.
pub fn load_frame(path: impl AsRef<Path>) -> Result<Frame> {
    let path = path.as_ref();
    let data = read_file(path)?;
    let channels = match data.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => {
            return Err(Error::MalformedHeader {
                path: path.to_path_buf(),
                reason: "expected magic P5 or P6".to_string(),
            })
        }
    };
    let magic = if channels == 1 { "P5" } else { "P6" };
    let (width, height, raster) = parse_pnm_header(path, &data, magic)?;
    if raster.len() != width * height * channels {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            reason: format!(
                "raster has {} bytes, expected {}",
                raster.len(),
                width * height * channels
            ),
        });
    }
    let mut planes = vec![vec![0.0; width * height]; channels];
    for (i, px) in raster.chunks_exact(channels).enumerate() {
        for (c, &v) in px.iter().enumerate() {
            planes[c][i] = v as f64 / 255.0;
        }
    }
    Ok(Frame::from_planes(width, height, planes))
}

pub fn save_frame(path: impl AsRef<Path>, frame: &Frame) -> Result<()> {
    let (w, h, c) = (frame.width(), frame.height(), frame.channels());
    let magic = if c == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{w} {h}\n255\n").into_bytes();
    for i in 0..w * h {
        for plane in 0..c {
            let v = frame.plane(plane)[i];
            out.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    write_file(path.as_ref(), &out)
}

pub fn frame_extension(frame: &Frame) -> &'static str {
    if frame.channels() == 1 {
        "pgm"
    } else {
        "ppm"
    }
}

const PMAP_MAGIC: &[u8; 4] = b"PMAP";

pub fn save_probmap(path: impl AsRef<Path>, map: &ProbMap) -> Result<()> {
    let mut out = Vec::with_capacity(16 + map.values().len() * 4);
    out.extend_from_slice(PMAP_MAGIC);
    out.extend_from_slice(&(map.width() as u32).to_le_bytes());
    out.extend_from_slice(&(map.height() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for &v in map.values() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    write_file(path.as_ref(), &out)
}

pub fn load_probmap(path: impl AsRef<Path>) -> Result<ProbMap> {
    let path = path.as_ref();
    let data = read_file(path)?;
    let bad = |reason: &str| Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if data.len() < 16 || &data[..4] != PMAP_MAGIC {
        return Err(bad("expected magic PMAP"));
    }
    let width = u32::from_le_bytes(data[4..8].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(data[8..12].try_into().unwrap()) as usize;
    let reserved = u32::from_le_bytes(data[12..16].try_into().unwrap());
    if reserved != 0 {
        return Err(bad("reserved field must be 0"));
    }
    let expected = 16 + width * height * 4;
    if data.len() != expected {
        return Err(bad(&format!("file has {} bytes, expected {expected}", data.len())));
    }
    let values: Vec<f64> = data[16..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    ProbMap::from_values(width, height, values)
}

fn frame_index_name(t: usize, ext: &str) -> String {
    format!("{t:05}.{ext}")
}

/// Writes a sequence under `<root>/<name>/` in the standard layout.
pub fn write_sequence(root: impl AsRef<Path>, seq: &VideoSequence) -> Result<()> {
    let dir = root.as_ref().join(&seq.name);
    for (t, frame) in seq.frames.iter().enumerate() {
        let name = frame_index_name(t, frame_extension(frame));
        save_frame(dir.join("frames").join(name), frame)?;
    }
    if let Some(gt) = &seq.gt {
        for (t, mask) in gt.iter().enumerate() {
            save_mask(dir.join("gt").join(frame_index_name(t, "pgm")), mask)?;
        }
    }
    if !seq.attributes.is_empty() {
        let text: String = seq.attributes.iter().map(|a| format!("{a}\n")).collect();
        write_file(&dir.join("attributes.txt"), text.as_bytes())?;
    }
    Ok(())
}

/// Reads a sequence from `<root>/<name>/`. Frames are read at consecutive
/// indices from 0 until the first gap; ground truth and attributes load when
/// present.
pub fn read_sequence(root: impl AsRef<Path>, name: &str) -> Result<VideoSequence> {
    let dir = root.as_ref().join(name);
    let frames_dir = dir.join("frames");
    let mut frames = Vec::new();
    loop {
        let t = frames.len();
        let pgm = frames_dir.join(frame_index_name(t, "pgm"));
        let ppm = frames_dir.join(frame_index_name(t, "ppm"));
        let path = if pgm.exists() {
            pgm
        } else if ppm.exists() {
            ppm
        } else {
            break;
        };
        frames.push(load_frame(path)?);
    }
    if frames.is_empty() {
        return Err(Error::Io {
            path: frames_dir,
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no frames found"),
        });
    }

    let gt_dir = dir.join("gt");
    let gt = if gt_dir.is_dir() {
        let mut masks = Vec::with_capacity(frames.len());
        for t in 0..frames.len() {
            masks.push(load_mask(gt_dir.join(frame_index_name(t, "pgm")))?);
        }
        Some(masks)
    } else {
        None
    };

    let attr_path = dir.join("attributes.txt");
    let attributes: BTreeSet<Attribute> = if attr_path.is_file() {
        let text = fs::read_to_string(&attr_path).map_err(|e| Error::io(&attr_path, e))?;
        let mut set = BTreeSet::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            set.insert(line.parse().map_err(|reason| Error::MalformedHeader {
                path: attr_path.clone(),
                reason,
            })?);
        }
        set
    } else {
        BTreeSet::new()
    };

    Ok(VideoSequence::new(name, frames, gt, attributes))
}

/// Sequence names under a dataset root (directories containing `frames/`),
/// sorted.
pub fn list_sequences(root: impl AsRef<Path>) -> Result<Vec<String>> {
    let root = root.as_ref();
    let mut names = Vec::new();
    let entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let path = entry.path();
        if path.is_dir() && path.join("frames").is_dir() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

/// Masks at `<dir>/%05d.pgm` for indices `0..n`.
pub fn read_mask_series(dir: impl AsRef<Path>, n: usize) -> Result<Vec<Mask>> {
    let dir = dir.as_ref();
    (0..n).map(|t| load_mask(dir.join(frame_index_name(t, "pgm")))).collect()
}

pub fn mask_series_path(dir: impl AsRef<Path>, t: usize) -> PathBuf {
    dir.as_ref().join(frame_index_name(t, "pgm"))
}

pub fn probmap_series_path(dir: impl AsRef<Path>, t: usize) -> PathBuf {
    dir.as_ref().join(frame_index_name(t, "pmap"))
}
