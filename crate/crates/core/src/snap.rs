//! Boundary snapping: a superpixel partition grown from a contour-strength
//! map, majority re-labeling of whole superpixels, and the two oracle bounds
//! (best proposal, best superpixel subset).

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::metrics::region_similarity;
use crate::probmap::ProbMap;

/// Exhaustive, disjoint labeling of pixels into 4-connected regions.
#[derive(Clone, Debug)]
pub struct SuperpixelPartition {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    region_count: usize,
}

impl SuperpixelPartition {
    /// Wraps an existing labeling. Labels must be `0..region_count` with
    /// every id used; connectivity is the caller's responsibility.
    pub fn from_labels(width: usize, height: usize, labels: Vec<u32>, region_count: usize) -> Self {
        assert_eq!(labels.len(), width * height);
        debug_assert!(labels.iter().all(|&l| (l as usize) < region_count));
        SuperpixelPartition {
            width,
            height,
            labels,
            region_count,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn region_count(&self) -> usize {
        self.region_count
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Mask of the union of the selected regions.
    pub fn union_mask(&self, selected: &[bool]) -> Mask {
        assert_eq!(selected.len(), self.region_count);
        Mask::from_bits(
            self.width,
            self.height,
            self.labels.iter().map(|&l| selected[l as usize]).collect(),
        )
    }
}

const NEIGHBORS: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

/// Grows a partition from a contour map. Pixels with strength below the
/// threshold seed 4-connected regions (labeled in row-major discovery
/// order); contour pixels are absorbed by priority flooding in order of
/// increasing strength, ties broken by pixel index then lowest region id.
/// An all-contour map yields a single region.
pub fn partition_from_contours(contours: &ProbMap, strength_threshold: f64) -> Result<SuperpixelPartition> {
    if !(strength_threshold > 0.0 && strength_threshold < 1.0) {
        return Err(Error::InvalidParameter {
            name: "strength_threshold",
            reason: format!("{strength_threshold} outside (0, 1)"),
        });
    }
    let (w, h) = (contours.width(), contours.height());
    const UNLABELED: u32 = u32::MAX;
    let mut labels = vec![UNLABELED; w * h];

    // seed regions: connected components of sub-threshold pixels
    let mut region_count = 0usize;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if labels[start] != UNLABELED || contours.values()[start] >= strength_threshold {
            continue;
        }
        let id = region_count as u32;
        region_count += 1;
        labels[start] = id;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let (x, y) = (idx % w, idx / w);
            for (dx, dy) in NEIGHBORS {
                let nx = x as i64 + dx;
                let ny = y as i64 + dy;
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let n_idx = ny as usize * w + nx as usize;
                if labels[n_idx] == UNLABELED && contours.values()[n_idx] < strength_threshold {
                    labels[n_idx] = id;
                    stack.push(n_idx);
                }
            }
        }
    }

    if region_count == 0 {
        // no sub-threshold pixel anywhere: the whole image is one region
        return Ok(SuperpixelPartition {
            width: w,
            height: h,
            labels: vec![0; w * h],
            region_count: 1,
        });
    }

    // Absorb contour pixels: min-heap keyed by (strength bits, pixel index,
    // region id). The bit pattern of a non-negative f64 orders like its
    // value, so the u64 key is a valid strength order.
    let mut heap: BinaryHeap<Reverse<(u64, usize, u32)>> = BinaryHeap::new();
    let push_candidates =
        |idx: usize, labels: &[u32], heap: &mut BinaryHeap<Reverse<(u64, usize, u32)>>| {
            let (x, y) = (idx % w, idx / w);
            let id = labels[idx];
            for (dx, dy) in NEIGHBORS {
                let nx = x as i64 + dx;
                let ny = y as i64 + dy;
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let n_idx = ny as usize * w + nx as usize;
                if labels[n_idx] == UNLABELED {
                    let key = contours.values()[n_idx].to_bits();
                    heap.push(Reverse((key, n_idx, id)));
                }
            }
        };
    for idx in 0..w * h {
        if labels[idx] != UNLABELED {
            push_candidates(idx, &labels, &mut heap);
        }
    }
    while let Some(Reverse((_, idx, id))) = heap.pop() {
        if labels[idx] != UNLABELED {
            continue;
        }
        labels[idx] = id;
        push_candidates(idx, &labels, &mut heap);
    }

    Ok(SuperpixelPartition {
        width: w,
        height: h,
        labels,
        region_count,
    })
}

/// Re-labels whole superpixels: a region becomes foreground iff its mean
/// foreground probability reaches the majority level (inclusive).
pub fn snap_mask(fg: &ProbMap, part: &SuperpixelPartition, majority: f64) -> Result<Mask> {
    if fg.width() != part.width() || fg.height() != part.height() {
        return Err(Error::dims(fg.width(), fg.height(), part.width(), part.height()));
    }
    if !(majority > 0.0 && majority <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "majority",
            reason: format!("{majority} outside (0, 1]"),
        });
    }
    let mut sums = vec![0.0f64; part.region_count()];
    let mut counts = vec![0u64; part.region_count()];
    for (&label, &p) in part.labels().iter().zip(fg.values()) {
        sums[label as usize] += p;
        counts[label as usize] += 1;
    }
    let selected: Vec<bool> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| s / c as f64 >= majority)
        .collect();
    Ok(part.union_mask(&selected))
}

/// Index and J of the candidate closest to ground truth; ties pick the
/// lowest index.
pub fn best_proposal_oracle(candidates: &[Mask], gt: &Mask) -> Result<(usize, f64)> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("candidate list"));
    }
    let mut best = (0usize, -1.0f64);
    for (i, c) in candidates.iter().enumerate() {
        let j = region_similarity(c, gt)?;
        if j > best.1 {
            best = (i, j);
        }
    }
    Ok(best)
}

/// Per-region overlap tallies for the subset-selection oracle.
struct RegionTallies {
    /// |region ∩ gt|
    hits: Vec<u64>,
    /// |region \ gt|
    misses: Vec<u64>,
    gt_area: u64,
}

fn tally_regions(part: &SuperpixelPartition, gt: &Mask) -> RegionTallies {
    let mut hits = vec![0u64; part.region_count()];
    let mut misses = vec![0u64; part.region_count()];
    for (&label, &g) in part.labels().iter().zip(gt.bits()) {
        if g {
            hits[label as usize] += 1;
        } else {
            misses[label as usize] += 1;
        }
    }
    RegionTallies {
        hits,
        misses,
        gt_area: gt.area() as u64,
    }
}

/// The union of regions maximizing J against ground truth, solved exactly by
/// fractional-programming iteration: select `{i : hits_i - lambda*misses_i > 0}`
/// and raise `lambda` to the achieved ratio until a fixpoint. Zero-margin
/// regions join only when they are free (no misses) and useful (hits > 0),
/// so the selection is deterministic. Returns the mask and its J.
pub fn best_superpixel_oracle(part: &SuperpixelPartition, gt: &Mask) -> Result<(Mask, f64)> {
    let (mask, j, _) = best_superpixel_oracle_trace(part, gt)?;
    Ok((mask, j))
}

/// Same as [`best_superpixel_oracle`], also returning the achieved ratio per
/// iteration (strictly increasing until the fixpoint).
pub fn best_superpixel_oracle_trace(
    part: &SuperpixelPartition,
    gt: &Mask,
) -> Result<(Mask, f64, Vec<f64>)> {
    if gt.width() != part.width() || gt.height() != part.height() {
        return Err(Error::dims(gt.width(), gt.height(), part.width(), part.height()));
    }
    if gt.is_empty() {
        return Err(Error::EmptyInput("ground truth for superpixel oracle"));
    }
    let t = tally_regions(part, gt);
    let mut lambda = 0.0f64;
    let mut trace = Vec::new();
    let mut selected = vec![false; part.region_count()];
    loop {
        let mut next = vec![false; part.region_count()];
        let mut hits = 0u64;
        let mut misses = 0u64;
        for i in 0..part.region_count() {
            if t.hits[i] == 0 {
                continue;
            }
            let margin = t.hits[i] as f64 - lambda * t.misses[i] as f64;
            let take = margin > 0.0 || (margin == 0.0 && t.misses[i] == 0);
            if take {
                next[i] = true;
                hits += t.hits[i];
                misses += t.misses[i];
            }
        }
        let achieved = hits as f64 / (t.gt_area + misses) as f64;
        trace.push(achieved);
        if achieved <= lambda {
            // fixpoint: the previous selection is optimal
            break;
        }
        lambda = achieved;
        selected = next;
    }
    let mask = part.union_mask(&selected);
    Ok((mask, lambda, trace))
}

/// Exhaustive subset search; the oracle the fractional iteration is checked
/// against (exponential, callers keep region counts small).
pub fn brute_force_superpixel_oracle(part: &SuperpixelPartition, gt: &Mask) -> Result<(Mask, f64)> {
    if gt.is_empty() {
        return Err(Error::EmptyInput("ground truth for superpixel oracle"));
    }
    let n = part.region_count();
    assert!(n <= 20, "brute force limited to 20 regions");
    let t = tally_regions(part, gt);
    let mut best_subset = 0u64;
    let mut best_num = 0u64;
    let mut best_den = t.gt_area;
    for subset in 0u64..(1 << n) {
        let mut hits = 0u64;
        let mut misses = 0u64;
        for i in 0..n {
            if subset >> i & 1 == 1 {
                hits += t.hits[i];
                misses += t.misses[i];
            }
        }
        // compare hits/(gt+misses) > best_num/best_den without rounding
        let den = t.gt_area + misses;
        if hits as u128 * best_den as u128 > best_num as u128 * den as u128 {
            best_num = hits;
            best_den = den;
            best_subset = subset;
        }
    }
    let selected: Vec<bool> = (0..n).map(|i| best_subset >> i & 1 == 1).collect();
    Ok((part.union_mask(&selected), best_num as f64 / best_den as f64))
}

/// Random guillotine partition: `k` 4-connected rectangular regions. Test
/// input for the oracle equivalence suites.
pub fn random_rect_partition(
    rng: &mut crate::synth::rng::SplitMix64,
    w: usize,
    h: usize,
    k: usize,
) -> SuperpixelPartition {
    // each rect: (x0, y0, x1, y1), exclusive ends
    let mut rects = vec![(0usize, 0usize, w, h)];
    while rects.len() < k {
        let (idx, _) = rects
            .iter()
            .enumerate()
            .max_by_key(|(_, r)| (r.2 - r.0) * (r.3 - r.1))
            .unwrap();
        let (x0, y0, x1, y1) = rects[idx];
        let (rw, rh) = (x1 - x0, y1 - y0);
        if rw < 2 && rh < 2 {
            break;
        }
        let vertical = if rw >= 2 && rh >= 2 {
            rng.next_below(2) == 0
        } else {
            rw >= 2
        };
        if vertical {
            let cut = x0 + 1 + rng.next_below((rw - 1) as u64) as usize;
            rects[idx] = (x0, y0, cut, y1);
            rects.push((cut, y0, x1, y1));
        } else {
            let cut = y0 + 1 + rng.next_below((rh - 1) as u64) as usize;
            rects[idx] = (x0, y0, x1, cut);
            rects.push((x0, cut, x1, y1));
        }
    }
    let mut labels = vec![0u32; w * h];
    for (id, &(x0, y0, x1, y1)) in rects.iter().enumerate() {
        for y in y0..y1 {
            for x in x0..x1 {
                labels[y * w + x] = id as u32;
            }
        }
    }
    SuperpixelPartition::from_labels(w, h, labels, rects.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::rng::SplitMix64;

    fn assert_valid_partition(p: &SuperpixelPartition) {
        // exhaustive + labels in range + every id used
        let mut seen = vec![false; p.region_count()];
        for &l in p.labels() {
            assert!((l as usize) < p.region_count());
            seen[l as usize] = true;
        }
        assert!(seen.iter().all(|&s| s), "every region id must be used");
        // 4-connected: flood fill each region from its first pixel
        for id in 0..p.region_count() as u32 {
            let first = p.labels().iter().position(|&l| l == id).unwrap();
            let mut visited = vec![false; p.labels().len()];
            let mut stack = vec![first];
            visited[first] = true;
            let mut count = 1usize;
            while let Some(idx) = stack.pop() {
                let (x, y) = (idx % p.width(), idx / p.width());
                for (dx, dy) in NEIGHBORS {
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if nx < 0 || ny < 0 || nx >= p.width() as i64 || ny >= p.height() as i64 {
                        continue;
                    }
                    let n = ny as usize * p.width() + nx as usize;
                    if !visited[n] && p.labels()[n] == id {
                        visited[n] = true;
                        count += 1;
                        stack.push(n);
                    }
                }
            }
            let total = p.labels().iter().filter(|&&l| l == id).count();
            assert_eq!(count, total, "region {id} must be 4-connected");
        }
    }

    #[test]
    fn zero_contours_give_one_region() {
        let c = ProbMap::constant(8, 6, 0.0).unwrap();
        let p = partition_from_contours(&c, 0.5).unwrap();
        assert_eq!(p.region_count(), 1);
        assert!(p.labels().iter().all(|&l| l == 0));
    }

    #[test]
    fn all_contour_map_yields_one_region() {
        let c = ProbMap::constant(5, 5, 0.9).unwrap();
        let p = partition_from_contours(&c, 0.5).unwrap();
        assert_eq!(p.region_count(), 1);
    }

    #[test]
    fn vertical_line_splits_into_two_regions() {
        // 6x6, full-height contour line at x = 2
        let c = ProbMap::from_values(
            6,
            6,
            (0..36).map(|i| if i % 6 == 2 { 1.0 } else { 0.0 }).collect(),
        )
        .unwrap();
        let p = partition_from_contours(&c, 0.5).unwrap();
        assert_eq!(p.region_count(), 2);
        assert_valid_partition(&p);
        // left block is region 0, right block region 1
        assert!((0..6).all(|y| p.label(0, y) == 0 && p.label(1, y) == 0));
        assert!((3..6).all(|x| (0..6).all(|y| p.label(x, y) == 1)));
        // the line pixels are divided between the two regions; with fully
        // symmetric strengths the id tie-break sends each one to region 0
        for y in 0..6 {
            assert_eq!(p.label(2, y), 0);
        }
    }

    #[test]
    fn flooding_prefers_the_weaker_contour_side() {
        // line at x=2 of strength 0.9, but a weak gap (0.6) at y=3 reaches
        // region 1 first when flooding by increasing strength... both sides
        // see the same pixel; region assignment still follows (strength,
        // pixel, id) order. Just assert validity and 2 regions.
        let mut values = vec![0.0; 36];
        for y in 0..6 {
            values[y * 6 + 2] = if y == 3 { 0.6 } else { 0.9 };
        }
        let c = ProbMap::from_values(6, 6, values).unwrap();
        let p = partition_from_contours(&c, 0.5).unwrap();
        assert_eq!(p.region_count(), 2);
        assert_valid_partition(&p);
    }

    #[test]
    fn partitions_are_exhaustive_and_disjoint_on_random_maps() {
        let mut rng = SplitMix64::new(8);
        for _ in 0..15 {
            let values: Vec<f64> = (0..12 * 10).map(|_| rng.next_f64()).collect();
            let c = ProbMap::from_values(12, 10, values).unwrap();
            let p = partition_from_contours(&c, 0.55).unwrap();
            assert_valid_partition(&p);
        }
    }

    #[test]
    fn snapping_reproduces_threshold_when_probs_align_with_regions() {
        let mut rng = SplitMix64::new(9);
        let part = random_rect_partition(&mut rng, 10, 8, 6);
        // constant probability inside each region
        let levels: Vec<f64> = (0..part.region_count()).map(|_| rng.next_f64()).collect();
        let probs: Vec<f64> = part.labels().iter().map(|&l| levels[l as usize]).collect();
        let fg = ProbMap::from_values(10, 8, probs).unwrap();
        let snapped = snap_mask(&fg, &part, 0.5).unwrap();
        assert_eq!(snapped, fg.threshold(0.5).unwrap());
    }

    #[test]
    fn single_region_majority_case() {
        let c = ProbMap::constant(4, 4, 0.0).unwrap();
        let part = partition_from_contours(&c, 0.5).unwrap();
        let fg = ProbMap::constant(4, 4, 0.6).unwrap();
        assert_eq!(snap_mask(&fg, &part, 0.5).unwrap().area(), 16);
        assert_eq!(snap_mask(&fg, &part, 0.7).unwrap().area(), 0);
    }

    #[test]
    fn spurious_interior_blob_is_erased() {
        // 32x32 single region; a small high-probability blob inside a sea of
        // low probability disappears after snapping
        let mut values = vec![0.1f64; 32 * 32];
        for y in 10..14 {
            for x in 10..14 {
                values[y * 32 + x] = 0.95;
            }
        }
        let fg = ProbMap::from_values(32, 32, values).unwrap();
        let c = ProbMap::constant(32, 32, 0.0).unwrap();
        let part = partition_from_contours(&c, 0.5).unwrap();
        // region mean = (16*0.95 + 1008*0.1)/1024 < 0.5
        let snapped = snap_mask(&fg, &part, 0.5).unwrap();
        assert!(snapped.is_empty());
        // while plain thresholding keeps the blob
        assert_eq!(fg.threshold(0.5).unwrap().area(), 16);
    }

    #[test]
    fn snapped_masks_are_measurable_wrt_partition() {
        let mut rng = SplitMix64::new(10);
        for _ in 0..10 {
            let part = random_rect_partition(&mut rng, 9, 9, 7);
            let values: Vec<f64> = (0..81).map(|_| rng.next_f64()).collect();
            let fg = ProbMap::from_values(9, 9, values).unwrap();
            let snapped = snap_mask(&fg, &part, 0.5).unwrap();
            for id in 0..part.region_count() as u32 {
                let states: Vec<bool> = part
                    .labels()
                    .iter()
                    .zip(snapped.bits())
                    .filter(|(&l, _)| l == id)
                    .map(|(_, &b)| b)
                    .collect();
                assert!(states.iter().all(|&b| b == states[0]));
            }
        }
    }

    #[test]
    fn best_proposal_finds_gt_itself() {
        let gt = Mask::from_fn(6, 6, |x, y| x > 2 && y > 2);
        let candidates = vec![Mask::new(6, 6), gt.clone(), Mask::from_fn(6, 6, |x, _| x == 0)];
        let (idx, j) = best_proposal_oracle(&candidates, &gt).unwrap();
        assert_eq!(idx, 1);
        assert_eq!(j, 1.0);
    }

    #[test]
    fn best_proposal_tie_picks_lowest_index() {
        let gt = Mask::from_fn(4, 4, |x, _| x == 0);
        let empties = vec![Mask::new(4, 4), Mask::new(4, 4)];
        let (idx, j) = best_proposal_oracle(&empties, &gt).unwrap();
        assert_eq!(idx, 0);
        assert_eq!(j, 0.0);
    }

    #[test]
    fn superpixel_oracle_exact_region_match() {
        let mut rng = SplitMix64::new(11);
        let part = random_rect_partition(&mut rng, 8, 8, 5);
        let mut selected = vec![false; part.region_count()];
        selected[2] = true;
        let gt = part.union_mask(&selected);
        let (mask, j) = best_superpixel_oracle(&part, &gt).unwrap();
        assert_eq!(j, 1.0);
        assert_eq!(mask, gt);
    }

    #[test]
    fn superpixel_oracle_hand_case() {
        // Region A: 10 hits, 0 misses. Region B: 2 hits, 8 misses. |gt| = 12.
        // {A}: 10/12. {A,B}: 12/20 = 0.6 < 10/12. Optimal: {A}.
        let mut labels = vec![0u32; 30];
        for l in labels.iter_mut().skip(10).take(10) {
            *l = 1; // region B
        }
        for l in labels.iter_mut().skip(20) {
            *l = 2; // filler, no hits
        }
        let part = SuperpixelPartition::from_labels(6, 5, labels, 3);
        let mut gt_bits = vec![false; 30];
        for b in gt_bits.iter_mut().take(12) {
            *b = true; // all of A plus 2 px of B
        }
        let gt = Mask::from_bits(6, 5, gt_bits);
        let (mask, j) = best_superpixel_oracle(&part, &gt).unwrap();
        assert_eq!(j, 10.0 / 12.0);
        assert!(!(10..20).any(|i| mask.bits()[i]), "region B must not be selected");
    }

    #[test]
    fn superpixel_oracle_matches_brute_force() {
        let mut rng = SplitMix64::new(12);
        for round in 0..30 {
            let k = 2 + (rng.next_u64() % 14) as usize;
            let part = random_rect_partition(&mut rng, 10, 10, k);
            let density = 0.2 + rng.next_f64() * 0.5;
            let gt = Mask::from_fn(10, 10, |_, _| rng.next_f64() < density);
            if gt.is_empty() {
                continue;
            }
            let (fast_mask, fast_j) = best_superpixel_oracle(&part, &gt).unwrap();
            let (_, slow_j) = brute_force_superpixel_oracle(&part, &gt).unwrap();
            assert_eq!(fast_j, slow_j, "round {round}: J mismatch");
            assert_eq!(region_similarity(&fast_mask, &gt).unwrap(), fast_j);
        }
    }

    #[test]
    fn oracle_dominates_snapping() {
        let mut rng = SplitMix64::new(13);
        for _ in 0..10 {
            let part = random_rect_partition(&mut rng, 8, 8, 6);
            let values: Vec<f64> = (0..64).map(|_| rng.next_f64()).collect();
            let fg = ProbMap::from_values(8, 8, values).unwrap();
            let gt = Mask::from_fn(8, 8, |_, _| rng.next_f64() < 0.4);
            if gt.is_empty() {
                continue;
            }
            let (_, oracle_j) = best_superpixel_oracle(&part, &gt).unwrap();
            for majority in [0.3, 0.5, 0.7] {
                let snapped = snap_mask(&fg, &part, majority).unwrap();
                let j = region_similarity(&snapped, &gt).unwrap();
                assert!(oracle_j >= j - 1e-15);
            }
        }
    }

    #[test]
    fn fractional_iteration_ratio_strictly_increases() {
        let mut rng = SplitMix64::new(14);
        for _ in 0..20 {
            let part = random_rect_partition(&mut rng, 10, 10, 9);
            let gt = Mask::from_fn(10, 10, |_, _| rng.next_f64() < 0.35);
            if gt.is_empty() {
                continue;
            }
            let (_, j, trace) = best_superpixel_oracle_trace(&part, &gt).unwrap();
            // strictly increasing except the terminal non-improving entry
            for w in trace[..trace.len() - 1].windows(2) {
                assert!(w[1] > w[0]);
            }
            let fix = if trace.len() >= 2 { trace[trace.len() - 2] } else { trace[0] };
            assert_eq!(j, fix.max(0.0));
        }
    }

    #[test]
    fn empty_gt_is_rejected() {
        let c = ProbMap::constant(4, 4, 0.0).unwrap();
        let part = partition_from_contours(&c, 0.5).unwrap();
        assert!(best_superpixel_oracle(&part, &Mask::new(4, 4)).is_err());
    }
}
