//! Versioned binary weight checkpoints.
//!
//! Layout, all little-endian:
//! `OSWT` magic (4 bytes), u32 version, u32 input channels, u32 stage count,
//! u32 per-stage channel widths, u64 parameter count, then the flat parameter
//! vector as f64. Round trips are bit-exact.

use std::fs;
use std::path::Path;

use super::model::{FcnArch, FcnModel};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"OSWT";
const VERSION: u32 = 1;

pub fn save_model(path: impl AsRef<Path>, model: &FcnModel) -> Result<()> {
    let path = path.as_ref();
    let arch = model.arch();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(arch.in_channels as u32).to_le_bytes());
    out.extend_from_slice(&(arch.stages() as u32).to_le_bytes());
    for &c in &arch.stage_channels {
        out.extend_from_slice(&(c as u32).to_le_bytes());
    }
    out.extend_from_slice(&(model.params().len() as u64).to_le_bytes());
    for &p in model.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<FcnModel> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |reason: String| Error::Checkpoint(format!("{}: {reason}", path.display()));

    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        if pos + n > data.len() {
            return Err(bad(format!("truncated at byte {pos}")));
        }
        let s = &data[pos..pos + n];
        pos += n;
        Ok(s)
    };

    if take(4)? != MAGIC {
        return Err(bad("bad magic, expected OSWT".into()));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let in_channels = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let stages = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    if stages == 0 || stages > 16 {
        return Err(bad(format!("implausible stage count {stages}")));
    }
    let mut stage_channels = Vec::with_capacity(stages);
    for _ in 0..stages {
        stage_channels.push(u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize);
    }
    let arch = FcnArch {
        in_channels,
        stage_channels,
    };
    let count = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    if count != arch.param_count() {
        return Err(bad(format!(
            "parameter count {count} does not match architecture ({})",
            arch.param_count()
        )));
    }
    let blob = take(count * 8)?;
    if pos != data.len() {
        return Err(bad("trailing bytes after parameter blob".into()));
    }
    let params: Vec<f64> = blob
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    FcnModel::from_params(arch, params)
}
