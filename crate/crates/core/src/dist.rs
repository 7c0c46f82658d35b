//! Exact Euclidean distance transform.
//!
//! Two-pass separable algorithm over exact integer squared distances: a row
//! pass finds the nearest foreground pixel within each row, a column pass
//! minimizes `dy^2 + rowdist^2` over all rows. The result is the true nearest
//! foreground distance for every pixel, so it can be compared bit-for-bit
//! against a brute-force scan.

use crate::error::{Error, Result};
use crate::mask::Mask;

/// Squared distance (in pixels^2) from each pixel to the nearest foreground
/// pixel of `m`. Errors on an empty mask so callers handle empty ground truth
/// explicitly.
pub fn squared_distance_transform(m: &Mask) -> Result<Vec<u64>> {
    if m.is_empty() {
        return Err(Error::EmptyMaskDistanceTransform);
    }
    let (w, h) = (m.width(), m.height());
    // No in-row neighbor: any value > max possible distance works as a
    // sentinel because (w + h)^2 > w^2 + h^2 >= any true squared distance.
    let sentinel = (w + h) as u64;

    let mut row_dist = vec![sentinel; w * h];
    for y in 0..h {
        let row = &mut row_dist[y * w..(y + 1) * w];
        let mut last_fg: Option<usize> = None;
        for x in 0..w {
            if m.get(x, y) {
                last_fg = Some(x);
            }
            if let Some(fx) = last_fg {
                row[x] = (x - fx) as u64;
            }
        }
        last_fg = None;
        for x in (0..w).rev() {
            if m.get(x, y) {
                last_fg = Some(x);
            }
            if let Some(fx) = last_fg {
                row[x] = row[x].min((fx - x) as u64);
            }
        }
    }

    let mut out = vec![0u64; w * h];
    for x in 0..w {
        for y in 0..h {
            let mut best = u64::MAX;
            for y2 in 0..h {
                let dy = y.abs_diff(y2) as u64;
                let rd = row_dist[y2 * w + x];
                let cand = dy * dy + rd * rd;
                if cand < best {
                    best = cand;
                }
            }
            out[y * w + x] = best;
        }
    }
    Ok(out)
}

/// Exact Euclidean distance (in pixels) from each pixel to the nearest
/// foreground pixel: square root of the exact squared transform.
pub fn euclidean_distance_transform(m: &Mask) -> Result<Vec<f64>> {
    let sq = squared_distance_transform(m)?;
    Ok(sq.iter().map(|&d| (d as f64).sqrt()).collect())
}

/// O(n^2) nearest-foreground scan; the independent oracle the two-pass
/// transform is checked against.
pub fn brute_force_squared_distances(m: &Mask) -> Result<Vec<u64>> {
    if m.is_empty() {
        return Err(Error::EmptyMaskDistanceTransform);
    }
    let (w, h) = (m.width(), m.height());
    let fg = m.foreground_pixels();
    let mut out = vec![0u64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut best = u64::MAX;
            for &(fx, fy) in &fg {
                let dx = x.abs_diff(fx) as u64;
                let dy = y.abs_diff(fy) as u64;
                let d = dx * dx + dy * dy;
                if d < best {
                    best = d;
                }
            }
            out[y * w + x] = best;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::rng::SplitMix64;

    #[test]
    fn unit_step_neighbors() {
        let mut m = Mask::new(5, 5);
        m.set(2, 2, true);
        let d = euclidean_distance_transform(&m).unwrap();
        assert_eq!(d[2 * 5 + 2], 0.0);
        assert_eq!(d[2 * 5 + 3], 1.0); // 4-adjacent
        assert_eq!(d[3 * 5 + 3], 2f64.sqrt()); // diagonal
        assert_eq!(d[0], 8f64.sqrt()); // corner (2,2) away
    }

    #[test]
    fn zero_exactly_on_foreground() {
        let mut rng = SplitMix64::new(7);
        for _ in 0..20 {
            let m = Mask::from_fn(12, 9, |_, _| rng.next_f64() < 0.15);
            if m.is_empty() {
                continue;
            }
            let d = squared_distance_transform(&m).unwrap();
            for y in 0..9 {
                for x in 0..12 {
                    if m.get(x, y) {
                        assert_eq!(d[y * 12 + x], 0);
                    } else {
                        assert!(d[y * 12 + x] > 0);
                    }
                }
            }
        }
    }

    #[test]
    fn matches_brute_force_on_random_grids() {
        let mut rng = SplitMix64::new(99);
        let mut checked = 0;
        while checked < 60 {
            let w = 1 + (rng.next_u64() % 16) as usize;
            let h = 1 + (rng.next_u64() % 16) as usize;
            let density = 0.05 + rng.next_f64() * 0.5;
            let m = Mask::from_fn(w, h, |_, _| rng.next_f64() < density);
            if m.is_empty() {
                continue;
            }
            assert_eq!(
                squared_distance_transform(&m).unwrap(),
                brute_force_squared_distances(&m).unwrap()
            );
            checked += 1;
        }
    }

    #[test]
    fn empty_mask_is_an_error() {
        let m = Mask::new(4, 4);
        assert!(matches!(
            squared_distance_transform(&m),
            Err(Error::EmptyMaskDistanceTransform)
        ));
    }
}
