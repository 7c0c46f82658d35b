//! Image frames, video sequences, and the benchmark attribute tags.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::mask::Mask;

/// One image: 1 (gray) or 3 (color) channel planes with intensities in [0, 1].
#[derive(Clone, PartialEq, Debug)]
pub struct Frame {
    width: usize,
    height: usize,
    planes: Vec<Vec<f64>>,
}

impl Frame {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        assert!(width >= 1 && height >= 1, "frame dimensions must be >= 1");
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        Frame {
            width,
            height,
            planes: vec![vec![0.0; width * height]; channels],
        }
    }

    pub fn from_planes(width: usize, height: usize, planes: Vec<Vec<f64>>) -> Self {
        assert!(planes.len() == 1 || planes.len() == 3, "channels must be 1 or 3");
        for p in &planes {
            assert_eq!(p.len(), width * height, "plane length mismatch");
        }
        Frame {
            width,
            height,
            planes,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        &self.planes[c]
    }

    #[inline]
    pub fn get(&self, c: usize, x: usize, y: usize) -> f64 {
        self.planes[c][y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, x: usize, y: usize, v: f64) {
        self.planes[c][y * self.width + x] = v;
    }
}

/// Benchmark challenge tags. The acronyms follow the usual video-segmentation
/// shorthand but carry generator-defined meanings here.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Attribute {
    /// An occluder crosses the target during some frame window.
    Occlusion,
    /// Target speed above the fast-motion threshold.
    FastMotion,
    /// Target appearance drifts over time.
    AppearanceChange,
    /// Background texture is animated.
    DynamicBackground,
    /// Target is rendered with motion blur.
    MotionBlur,
}

impl Attribute {
    pub const ALL: [Attribute; 5] = [
        Attribute::Occlusion,
        Attribute::FastMotion,
        Attribute::AppearanceChange,
        Attribute::DynamicBackground,
        Attribute::MotionBlur,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Attribute::Occlusion => "OCC",
            Attribute::FastMotion => "FM",
            Attribute::AppearanceChange => "AC",
            Attribute::DynamicBackground => "DB",
            Attribute::MotionBlur => "MB",
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Attribute {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "OCC" => Ok(Attribute::Occlusion),
            "FM" => Ok(Attribute::FastMotion),
            "AC" => Ok(Attribute::AppearanceChange),
            "DB" => Ok(Attribute::DynamicBackground),
            "MB" => Ok(Attribute::MotionBlur),
            other => Err(format!("unknown attribute tag `{other}`")),
        }
    }
}

/// Ordered frames plus optional per-frame ground truth and attribute tags.
#[derive(Clone, PartialEq, Debug)]
pub struct VideoSequence {
    pub name: String,
    pub frames: Vec<Frame>,
    pub gt: Option<Vec<Mask>>,
    pub attributes: BTreeSet<Attribute>,
}

impl VideoSequence {
    pub fn new(
        name: impl Into<String>,
        frames: Vec<Frame>,
        gt: Option<Vec<Mask>>,
        attributes: BTreeSet<Attribute>,
    ) -> Self {
        assert!(!frames.is_empty(), "sequence must have frames");
        let (w, h) = (frames[0].width(), frames[0].height());
        for f in &frames {
            assert!(f.width() == w && f.height() == h, "frames must share dimensions");
        }
        if let Some(gt) = &gt {
            assert_eq!(gt.len(), frames.len(), "gt length must match frame count");
            for m in gt {
                assert!(m.width() == w && m.height() == h, "gt must share frame dimensions");
            }
        }
        VideoSequence {
            name: name.into(),
            frames,
            gt,
            attributes,
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    /// Ground truth of frame `t`; panics if the sequence is unannotated.
    pub fn gt_frame(&self, t: usize) -> &Mask {
        &self.gt.as_ref().expect("sequence has no ground truth")[t]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attribute_round_trip() {
        for a in Attribute::ALL {
            assert_eq!(a.as_str().parse::<Attribute>().unwrap(), a);
        }
        assert!("XYZ".parse::<Attribute>().is_err());
    }
}
