//! Binary per-pixel foreground labelings and the geometry utilities built on
//! them: bounding boxes, boundary extraction, dilation, centroid alignment.

/// Row-major binary grid; `true` marks foreground.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

/// Axis-aligned box with inclusive pixel coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BoundingBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Mask {
    /// All-background mask. Dimensions must be at least 1x1.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width >= 1 && height >= 1, "mask dimensions must be >= 1");
        Mask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Self {
        assert!(width >= 1 && height >= 1, "mask dimensions must be >= 1");
        assert_eq!(bits.len(), width * height, "bit grid length mismatch");
        Mask {
            width,
            height,
            bits,
        }
    }

    /// Builds a mask from a predicate over (x, y).
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Mask::from_bits(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn same_dims(&self, other: &Mask) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Number of foreground pixels.
    pub fn area(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn foreground_pixels(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Tightest box containing all foreground pixels; `None` iff empty.
    pub fn bounding_box(&self) -> Option<BoundingBox> {
        let mut bb: Option<BoundingBox> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if !self.get(x, y) {
                    continue;
                }
                bb = Some(match bb {
                    None => BoundingBox {
                        x0: x,
                        y0: y,
                        x1: x,
                        y1: y,
                    },
                    Some(b) => BoundingBox {
                        x0: b.x0.min(x),
                        y0: b.y0.min(y),
                        x1: b.x1.max(x),
                        y1: b.y1.max(y),
                    },
                });
            }
        }
        bb
    }

    /// Foreground pixels with at least one 4-neighbor that is background or
    /// outside the image, as a mask of the same dimensions.
    pub fn boundary_mask(&self) -> Mask {
        let mut out = Mask::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                if !self.get(x, y) {
                    continue;
                }
                let exposed = x == 0
                    || y == 0
                    || x == self.width - 1
                    || y == self.height - 1
                    || !self.get(x - 1, y)
                    || !self.get(x + 1, y)
                    || !self.get(x, y - 1)
                    || !self.get(x, y + 1);
                if exposed {
                    out.set(x, y, true);
                }
            }
        }
        out
    }

    /// Boundary pixel coordinates in row-major order.
    pub fn boundary_pixels(&self) -> Vec<(usize, usize)> {
        self.boundary_mask().foreground_pixels()
    }

    /// Morphological dilation with a 3x3 structuring element, clipped to the
    /// image.
    pub fn dilate3x3(&self) -> Mask {
        let mut out = Mask::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                if !self.get(x, y) {
                    continue;
                }
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let nx = x as i64 + dx;
                        let ny = y as i64 + dy;
                        if nx >= 0 && ny >= 0 && (nx as usize) < self.width && (ny as usize) < self.height {
                            out.set(nx as usize, ny as usize, true);
                        }
                    }
                }
            }
        }
        out
    }

    /// Mean foreground coordinate; `None` iff empty.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let mut sx = 0u64;
        let mut sy = 0u64;
        let mut n = 0u64;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    sx += x as u64;
                    sy += y as u64;
                    n += 1;
                }
            }
        }
        if n == 0 {
            None
        } else {
            Some((sx as f64 / n as f64, sy as f64 / n as f64))
        }
    }

    /// Translation by whole pixels; pixels shifted outside the image are
    /// dropped.
    pub fn translated(&self, dx: i64, dy: i64) -> Mask {
        let mut out = Mask::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                if !self.get(x, y) {
                    continue;
                }
                let nx = x as i64 + dx;
                let ny = y as i64 + dy;
                if nx >= 0 && ny >= 0 && (nx as usize) < self.width && (ny as usize) < self.height {
                    out.set(nx as usize, ny as usize, true);
                }
            }
        }
        out
    }

    /// Pixels in `self` but not in `other`. Caller guarantees equal dims.
    pub fn difference_count(&self, other: &Mask) -> usize {
        debug_assert!(self.same_dims(other));
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a && !b)
            .count()
    }
}

impl BoundingBox {
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    /// Intersection-over-union of two boxes (inclusive-coordinate areas).
    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let ix0 = self.x0.max(other.x0);
        let iy0 = self.y0.max(other.y0);
        let ix1 = self.x1.min(other.x1);
        let iy1 = self.y1.min(other.y1);
        if ix0 > ix1 || iy0 > iy1 {
            return 0.0;
        }
        let inter = (ix1 - ix0 + 1) as u64 * (iy1 - iy0 + 1) as u64;
        let union = self.area() + other.area() - inter;
        inter as f64 / union as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::rng::SplitMix64;

    fn random_mask(rng: &mut SplitMix64, w: usize, h: usize, density: f64) -> Mask {
        Mask::from_fn(w, h, |_, _| rng.next_f64() < density)
    }

    #[test]
    fn bounding_box_full_extent() {
        let m = Mask::from_fn(4, 4, |_, _| true);
        assert_eq!(
            m.bounding_box(),
            Some(BoundingBox {
                x0: 0,
                y0: 0,
                x1: 3,
                y1: 3
            })
        );
    }

    #[test]
    fn bounding_box_single_pixel() {
        let mut m = Mask::new(5, 6);
        m.set(2, 3, true);
        assert_eq!(
            m.bounding_box(),
            Some(BoundingBox {
                x0: 2,
                y0: 3,
                x1: 2,
                y1: 3
            })
        );
    }

    #[test]
    fn bounding_box_empty() {
        assert_eq!(Mask::new(4, 4).bounding_box(), None);
    }

    #[test]
    fn bounding_box_tight_on_random_masks() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..50 {
            let m = random_mask(&mut rng, 9, 7, 0.2);
            let Some(b) = m.bounding_box() else {
                continue;
            };
            for (x, y) in m.foreground_pixels() {
                assert!(x >= b.x0 && x <= b.x1 && y >= b.y0 && y <= b.y1);
            }
            // each side touches a foreground pixel
            assert!((b.y0..=b.y1).any(|y| m.get(b.x0, y)));
            assert!((b.y0..=b.y1).any(|y| m.get(b.x1, y)));
            assert!((b.x0..=b.x1).any(|x| m.get(x, b.y0)));
            assert!((b.x0..=b.x1).any(|x| m.get(x, b.y1)));
        }
    }

    #[test]
    fn boundary_of_solid_block_is_its_border() {
        let m = Mask::from_fn(3, 3, |_, _| true);
        let b = m.boundary_pixels();
        assert_eq!(b.len(), 8);
        assert!(!b.contains(&(1, 1)));
    }

    #[test]
    fn boundary_single_pixel_is_itself() {
        let mut m = Mask::new(4, 4);
        m.set(1, 2, true);
        assert_eq!(m.boundary_pixels(), vec![(1, 2)]);
    }

    #[test]
    fn boundary_matches_brute_force_scan() {
        let mut rng = SplitMix64::new(23);
        for _ in 0..30 {
            let m = random_mask(&mut rng, 10, 10, 0.4);
            let fast = m.boundary_pixels();
            let mut slow = Vec::new();
            for y in 0..10usize {
                for x in 0..10usize {
                    if !m.get(x, y) {
                        continue;
                    }
                    let neighbors = [
                        (x as i64 - 1, y as i64),
                        (x as i64 + 1, y as i64),
                        (x as i64, y as i64 - 1),
                        (x as i64, y as i64 + 1),
                    ];
                    if neighbors.iter().any(|&(nx, ny)| {
                        nx < 0 || ny < 0 || nx >= 10 || ny >= 10 || !m.get(nx as usize, ny as usize)
                    }) {
                        slow.push((x, y));
                    }
                }
            }
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn centroid_of_symmetric_square() {
        let m = Mask::from_fn(6, 6, |x, y| (2..4).contains(&x) && (2..4).contains(&y));
        assert_eq!(m.centroid(), Some((2.5, 2.5)));
    }

    #[test]
    fn translation_clips_at_borders() {
        let mut m = Mask::new(3, 3);
        m.set(2, 2, true);
        assert!(m.translated(1, 1).is_empty());
        assert!(m.translated(-2, -2).get(0, 0));
    }

    #[test]
    fn box_iou_hand_case() {
        // 10x10 boxes overlapping in a 5x10 strip: 50 / 150.
        let a = BoundingBox {
            x0: 0,
            y0: 0,
            x1: 9,
            y1: 9,
        };
        let b = BoundingBox {
            x0: 5,
            y0: 0,
            x1: 14,
            y1: 9,
        };
        assert_eq!(a.iou(&b), 50.0 / 150.0);
        assert_eq!(b.iou(&a), 50.0 / 150.0);
    }

    #[test]
    fn box_iou_disjoint_is_zero() {
        let a = BoundingBox {
            x0: 0,
            y0: 0,
            x1: 1,
            y1: 1,
        };
        let b = BoundingBox {
            x0: 3,
            y0: 3,
            x1: 4,
            y1: 4,
        };
        assert_eq!(a.iou(&b), 0.0);
    }
}
