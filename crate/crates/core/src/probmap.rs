//! Per-pixel real-valued maps in [0, 1]: network foreground output and
//! contour-strength maps.

use crate::error::{Error, Result};
use crate::mask::Mask;

/// Row-major grid of values in [0, 1].
#[derive(Clone, PartialEq, Debug)]
pub struct ProbMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ProbMap {
    /// Validates every value into [0, 1].
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        assert!(width >= 1 && height >= 1, "map dimensions must be >= 1");
        assert_eq!(values.len(), width * height, "value grid length mismatch");
        for &v in &values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter {
                    name: "probability",
                    reason: format!("value {v} outside [0, 1]"),
                });
            }
        }
        Ok(ProbMap {
            width,
            height,
            values,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        ProbMap::from_values(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Binarize: pixel is foreground iff its value >= `tau` (inclusive, so the
    /// tie case is deterministic).
    pub fn threshold(&self, tau: f64) -> Result<Mask> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::ThresholdOutOfRange(tau));
        }
        Ok(Mask::from_bits(
            self.width,
            self.height,
            self.values.iter().map(|&v| v >= tau).collect(),
        ))
    }
}
