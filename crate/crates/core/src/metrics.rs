//! Region similarity J, contour accuracy F, temporal instability T, and the
//! per-sequence aggregation (mean M, recall O, decay D).
//!
//! Conventions fixed here (toolkits differ on every one of them):
//! - J and F of two empty masks are 1.0: an empty prediction on a fully
//!   occluded frame is a perfect answer. One empty side gives 0.0.
//! - F matches boundary pixels within a Euclidean tolerance; the default
//!   tolerance is 0.8% of the image diagonal, rounded up, at least 1 px.
//! - T centroid-aligns consecutive masks, so pure translation scores 0.
//! - Recall counts frames strictly above 0.5; decay uses ceil(n/4) quartiles.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dist::squared_distance_transform;
use crate::error::{Error, Result};
use crate::frame::Attribute;
use crate::mask::Mask;

/// Per-frame region and contour scores.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FrameScores {
    pub j: f64,
    pub f: f64,
}

/// Mean M, recall O, decay D of a per-frame score series.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Aggregate {
    pub mean: f64,
    pub recall: f64,
    pub decay: f64,
}

/// Everything measured on one sequence.
#[derive(Clone, Debug, Serialize)]
pub struct SequenceReport {
    pub sequence: String,
    pub frames: Vec<FrameScores>,
    pub j: Aggregate,
    pub f: Aggregate,
    pub t_mean: f64,
}

fn check_dims(a: &Mask, b: &Mask) -> Result<()> {
    if !a.same_dims(b) {
        return Err(Error::dims(a.width(), a.height(), b.width(), b.height()));
    }
    Ok(())
}

/// Intersection over union. Both-empty pairs score 1.0.
pub fn region_similarity(pred: &Mask, gt: &Mask) -> Result<f64> {
    check_dims(pred, gt)?;
    let mut inter = 0u64;
    let mut union = 0u64;
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        inter += (p && g) as u64;
        union += (p || g) as u64;
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Default boundary match tolerance for an image size.
pub fn default_boundary_tolerance(width: usize, height: usize) -> f64 {
    let diag = ((width * width + height * height) as f64).sqrt();
    (0.008 * diag).ceil().max(1.0)
}

/// Fraction of foreground pixels of `from` within `tol` of a foreground pixel
/// of `to`. `from` must be non-empty; `to` may not be empty either (callers
/// handle those conventions).
fn matched_fraction(from: &Mask, to: &Mask, tol: f64) -> Result<f64> {
    let sq = squared_distance_transform(to)?;
    let w = from.width();
    let limit = tol * tol;
    let mut total = 0u64;
    let mut matched = 0u64;
    for (x, y) in from.foreground_pixels() {
        total += 1;
        if (sq[y * w + x] as f64) <= limit {
            matched += 1;
        }
    }
    Ok(matched as f64 / total as f64)
}

/// Boundary F-measure: harmonic mean of tolerance-matched boundary precision
/// and recall.
pub fn contour_accuracy(pred: &Mask, gt: &Mask, tol: f64) -> Result<f64> {
    check_dims(pred, gt)?;
    if tol < 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("{tol} is negative"),
        });
    }
    let pb = pred.boundary_mask();
    let gb = gt.boundary_mask();
    match (pb.is_empty(), gb.is_empty()) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        (false, false) => {}
    }
    let precision = matched_fraction(&pb, &gb, tol)?;
    let recall = matched_fraction(&gb, &pb, tol)?;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Contour accuracy at the default tolerance for the masks' size.
pub fn contour_accuracy_default(pred: &Mask, gt: &Mask) -> Result<f64> {
    contour_accuracy(pred, gt, default_boundary_tolerance(gt.width(), gt.height()))
}

/// Translates `m` so its centroid lands (rounded) on `target_centroid`.
fn align_to_centroid(m: &Mask, target_centroid: (f64, f64)) -> Mask {
    let (cx, cy) = m.centroid().expect("caller skips empty masks");
    let dx = (target_centroid.0 - cx).round() as i64;
    let dy = (target_centroid.1 - cy).round() as i64;
    m.translated(dx, dy)
}

/// Temporal instability: 100 times the mean contour dissimilarity of
/// consecutive masks after centroid alignment. Pairs with an empty side are
/// skipped; if every pair is skipped the sequence scores 0.
pub fn temporal_instability(masks: &[Mask], tol: f64) -> Result<f64> {
    if masks.len() < 2 {
        return Err(Error::EmptyInput("temporal instability needs at least 2 masks"));
    }
    for m in &masks[1..] {
        check_dims(&masks[0], m)?;
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for pair in masks.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.is_empty() || b.is_empty() {
            continue;
        }
        let aligned = align_to_centroid(a, b.centroid().expect("non-empty"));
        total += 1.0 - contour_accuracy(&aligned, b, tol)?;
        pairs += 1;
    }
    if pairs == 0 {
        return Ok(0.0);
    }
    Ok(100.0 * total / pairs as f64)
}

pub fn temporal_instability_default(masks: &[Mask]) -> Result<f64> {
    if masks.is_empty() {
        return Err(Error::EmptyInput("temporal instability needs at least 2 masks"));
    }
    let tol = default_boundary_tolerance(masks[0].width(), masks[0].height());
    temporal_instability(masks, tol)
}

/// Mean M, recall O (fraction strictly above 0.5), decay D (first-quartile
/// mean minus last-quartile mean, quartile size ceil(n/4)).
pub fn aggregate(per_frame: &[f64]) -> Result<Aggregate> {
    if per_frame.is_empty() {
        return Err(Error::EmptyInput("aggregate over empty score list"));
    }
    let n = per_frame.len();
    let mean = per_frame.iter().sum::<f64>() / n as f64;
    let recall = per_frame.iter().filter(|&&v| v > 0.5).count() as f64 / n as f64;
    let q = n.div_ceil(4);
    let first = per_frame[..q].iter().sum::<f64>() / q as f64;
    let last = per_frame[n - q..].iter().sum::<f64>() / q as f64;
    Ok(Aggregate {
        mean,
        recall,
        decay: first - last,
    })
}

/// Scores a predicted mask series against ground truth.
pub fn evaluate_sequence(name: impl Into<String>, preds: &[Mask], gt: &[Mask]) -> Result<SequenceReport> {
    if preds.len() != gt.len() {
        return Err(Error::LengthMismatch {
            what: "prediction series",
            expected: gt.len(),
            got: preds.len(),
        });
    }
    if gt.is_empty() {
        return Err(Error::EmptyInput("evaluate_sequence over empty series"));
    }
    let tol = default_boundary_tolerance(gt[0].width(), gt[0].height());
    let mut frames = Vec::with_capacity(gt.len());
    for (p, g) in preds.iter().zip(gt) {
        frames.push(FrameScores {
            j: region_similarity(p, g)?,
            f: contour_accuracy(p, g, tol)?,
        });
    }
    let js: Vec<f64> = frames.iter().map(|s| s.j).collect();
    let fs: Vec<f64> = frames.iter().map(|s| s.f).collect();
    let t_mean = if preds.len() >= 2 {
        temporal_instability(preds, tol)?
    } else {
        0.0
    };
    Ok(SequenceReport {
        sequence: name.into(),
        frames,
        j: aggregate(&js)?,
        f: aggregate(&fs)?,
        t_mean,
    })
}

/// Per-attribute mean quality and gain, Table-style.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AttributeRow {
    /// Mean j over sequences carrying the attribute.
    pub with_mean: f64,
    /// Mean over sequences without it, minus `with_mean`.
    pub gain: f64,
}

/// Attribute-conditioned report over a set of sequence reports. Attributes
/// with an empty tagged or untagged side are omitted.
pub fn attribute_report(
    reports: &[SequenceReport],
    tags: &[std::collections::BTreeSet<Attribute>],
) -> Result<BTreeMap<String, AttributeRow>> {
    if reports.is_empty() {
        return Err(Error::EmptyInput("attribute report over no sequences"));
    }
    if reports.len() != tags.len() {
        return Err(Error::LengthMismatch {
            what: "attribute tag sets",
            expected: reports.len(),
            got: tags.len(),
        });
    }
    let mut out = BTreeMap::new();
    for attr in Attribute::ALL {
        let (mut with_sum, mut with_n) = (0.0, 0usize);
        let (mut without_sum, mut without_n) = (0.0, 0usize);
        for (report, tagset) in reports.iter().zip(tags) {
            if tagset.contains(&attr) {
                with_sum += report.j.mean;
                with_n += 1;
            } else {
                without_sum += report.j.mean;
                without_n += 1;
            }
        }
        if with_n == 0 || without_n == 0 {
            continue;
        }
        let with_mean = with_sum / with_n as f64;
        out.insert(
            attr.as_str().to_string(),
            AttributeRow {
                with_mean,
                gain: without_sum / without_n as f64 - with_mean,
            },
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::rng::SplitMix64;
    use approx::assert_abs_diff_eq;
    use std::collections::BTreeSet;

    fn mask_from(w: usize, h: usize, fg: &[(usize, usize)]) -> Mask {
        let mut m = Mask::new(w, h);
        for &(x, y) in fg {
            m.set(x, y, true);
        }
        m
    }

    /// Brute-force boundary F: nearest-boundary search with no transform.
    fn brute_force_f(pred: &Mask, gt: &Mask, tol: f64) -> f64 {
        let pb = pred.boundary_pixels();
        let gb = gt.boundary_pixels();
        match (pb.is_empty(), gb.is_empty()) {
            (true, true) => return 1.0,
            (true, false) | (false, true) => return 0.0,
            _ => {}
        }
        let close = |a: &(usize, usize), set: &[(usize, usize)]| {
            set.iter().any(|b| {
                let dx = a.0.abs_diff(b.0) as f64;
                let dy = a.1.abs_diff(b.1) as f64;
                dx * dx + dy * dy <= tol * tol
            })
        };
        let p = pb.iter().filter(|px| close(px, &gb)).count() as f64 / pb.len() as f64;
        let r = gb.iter().filter(|px| close(px, &pb)).count() as f64 / gb.len() as f64;
        if p + r == 0.0 {
            return 0.0;
        }
        2.0 * p * r / (p + r)
    }

    #[test]
    fn j_identity_is_one() {
        let m = mask_from(4, 4, &[(1, 1), (2, 1), (1, 2)]);
        assert_eq!(region_similarity(&m, &m).unwrap(), 1.0);
    }

    #[test]
    fn j_disjoint_is_zero() {
        let a = mask_from(4, 4, &[(0, 0)]);
        let b = mask_from(4, 4, &[(3, 3)]);
        assert_eq!(region_similarity(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn j_pixel_counting_case() {
        // pred {(0,0),(0,1)}, gt {(0,1),(1,1)}: intersection 1, union 3
        let pred = mask_from(3, 3, &[(0, 0), (0, 1)]);
        let gt = mask_from(3, 3, &[(0, 1), (1, 1)]);
        assert_eq!(region_similarity(&pred, &gt).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn j_both_empty_is_one() {
        let e = Mask::new(4, 4);
        assert_eq!(region_similarity(&e, &e).unwrap(), 1.0);
    }

    #[test]
    fn j_dimension_mismatch_errors() {
        let a = Mask::new(4, 4);
        let b = Mask::new(5, 4);
        assert!(region_similarity(&a, &b).is_err());
    }

    #[test]
    fn f_identity_is_one() {
        let m = mask_from(8, 8, &[(2, 2), (3, 2), (2, 3), (3, 3)]);
        assert_eq!(contour_accuracy(&m, &m, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn f_one_pixel_translation_within_tol() {
        let gt = Mask::from_fn(12, 12, |x, y| (3..7).contains(&x) && (3..7).contains(&y));
        let pred = gt.translated(1, 0);
        assert_eq!(contour_accuracy(&pred, &gt, 2.0).unwrap(), 1.0);
        assert_eq!(brute_force_f(&pred, &gt, 2.0), 1.0);
    }

    #[test]
    fn f_far_translation_is_zero() {
        let gt = Mask::from_fn(16, 16, |x, y| (1..4).contains(&x) && (1..4).contains(&y));
        let pred = gt.translated(10, 10);
        assert_eq!(contour_accuracy(&pred, &gt, 2.0).unwrap(), 0.0);
        assert_eq!(brute_force_f(&pred, &gt, 2.0), 0.0);
    }

    #[test]
    fn f_matches_brute_force_on_random_masks() {
        let mut rng = SplitMix64::new(31);
        for _ in 0..40 {
            let a = Mask::from_fn(10, 10, |_, _| rng.next_f64() < 0.3);
            let b = Mask::from_fn(10, 10, |_, _| rng.next_f64() < 0.3);
            for tol in [1.0, 2.0, 3.5] {
                let got = contour_accuracy(&a, &b, tol).unwrap();
                let want = brute_force_f(&a, &b, tol);
                assert_abs_diff_eq!(got, want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn f_is_symmetric_and_monotone_in_tol() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..20 {
            let a = Mask::from_fn(9, 9, |_, _| rng.next_f64() < 0.35);
            let b = Mask::from_fn(9, 9, |_, _| rng.next_f64() < 0.35);
            let mut prev = -1.0;
            for tol in [0.0, 1.0, 1.5, 2.0, 4.0, 8.0] {
                let fab = contour_accuracy(&a, &b, tol).unwrap();
                let fba = contour_accuracy(&b, &a, tol).unwrap();
                assert_abs_diff_eq!(fab, fba, epsilon = 1e-12);
                assert!(fab >= prev - 1e-12, "F must not decrease in tol");
                prev = fab;
            }
        }
    }

    #[test]
    fn f_empty_conventions() {
        let e = Mask::new(6, 6);
        let m = mask_from(6, 6, &[(2, 2)]);
        assert_eq!(contour_accuracy(&e, &e, 2.0).unwrap(), 1.0);
        assert_eq!(contour_accuracy(&e, &m, 2.0).unwrap(), 0.0);
        assert_eq!(contour_accuracy(&m, &e, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn t_static_sequence_is_zero() {
        let m = Mask::from_fn(16, 16, |x, y| (4..9).contains(&x) && (5..10).contains(&y));
        let masks = vec![m.clone(), m.clone(), m];
        assert_eq!(temporal_instability(&masks, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn t_uniform_translation_is_zero() {
        let base = Mask::from_fn(20, 20, |x, y| (2..7).contains(&x) && (3..8).contains(&y));
        let masks: Vec<Mask> = (0..5).map(|t| base.translated(2 * t, t)).collect();
        assert_eq!(temporal_instability(&masks, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn t_growth_matches_direct_evaluation() {
        // centered square doubles in side: centroids already coincide
        let small = Mask::from_fn(16, 16, |x, y| (6..10).contains(&x) && (6..10).contains(&y));
        let large = Mask::from_fn(16, 16, |x, y| (4..12).contains(&x) && (4..12).contains(&y));
        let t = temporal_instability(&[small.clone(), large.clone()], 1.0).unwrap();
        let expected = 100.0 * (1.0 - brute_force_f(&small, &large, 1.0));
        assert_abs_diff_eq!(t, expected, epsilon = 1e-12);
        assert!(t > 0.0);
    }

    #[test]
    fn t_skips_empty_frames() {
        let m = Mask::from_fn(8, 8, |x, y| x == 4 && y == 4);
        let e = Mask::new(8, 8);
        let masks = vec![m.clone(), e, m];
        assert_eq!(temporal_instability(&masks, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn t_needs_two_masks() {
        let m = Mask::new(8, 8);
        assert!(temporal_instability(&[m], 2.0).is_err());
    }

    #[test]
    fn aggregate_constant_series() {
        let a = aggregate(&[0.8; 6]).unwrap();
        assert_abs_diff_eq!(a.mean, 0.8, epsilon = 1e-15);
        assert_eq!(a.recall, 1.0);
        assert_eq!(a.decay, 0.0);
    }

    #[test]
    fn aggregate_step_series() {
        let a = aggregate(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(a.mean, 0.5);
        assert_eq!(a.recall, 0.5);
        assert_eq!(a.decay, 1.0);
    }

    #[test]
    fn aggregate_recall_is_strict() {
        let a = aggregate(&[0.5; 5]).unwrap();
        assert_eq!(a.recall, 0.0);
    }

    #[test]
    fn aggregate_permutation_and_reversal() {
        let values = [0.9, 0.2, 0.7, 0.4, 0.55, 0.8, 0.1];
        let base = aggregate(&values).unwrap();
        let mut shuffled = values;
        shuffled.swap(0, 4);
        shuffled.swap(2, 6);
        let s = aggregate(&shuffled).unwrap();
        assert_abs_diff_eq!(base.mean, s.mean, epsilon = 1e-15);
        assert_eq!(base.recall, s.recall);
        let mut rev = values;
        rev.reverse();
        let r = aggregate(&rev).unwrap();
        assert_abs_diff_eq!(base.decay, -r.decay, epsilon = 1e-15);
    }

    #[test]
    fn aggregate_rejects_empty() {
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn attribute_report_two_sequences() {
        let report = |name: &str, j: f64| SequenceReport {
            sequence: name.into(),
            frames: vec![],
            j: Aggregate {
                mean: j,
                recall: 1.0,
                decay: 0.0,
            },
            f: Aggregate {
                mean: j,
                recall: 1.0,
                decay: 0.0,
            },
            t_mean: 0.0,
        };
        let reports = vec![report("a", 0.8), report("b", 0.6)];
        let tags = vec![
            BTreeSet::from([Attribute::Occlusion]),
            BTreeSet::new(),
        ];
        let table = attribute_report(&reports, &tags).unwrap();
        let occ = &table["OCC"];
        assert_abs_diff_eq!(occ.with_mean, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(occ.gain, -0.2, epsilon = 1e-15);
        assert_eq!(table.len(), 1);

        // all tagged: no complement, attribute omitted
        let all_tagged = vec![
            BTreeSet::from([Attribute::Occlusion]),
            BTreeSet::from([Attribute::Occlusion]),
        ];
        assert!(attribute_report(&reports, &all_tagged).unwrap().is_empty());

        // no tags anywhere: empty report
        let none = vec![BTreeSet::new(), BTreeSet::new()];
        assert!(attribute_report(&reports, &none).unwrap().is_empty());
    }

    #[test]
    fn default_tolerance_small_images() {
        // 64x64: diag 90.5, 0.8% = 0.72, ceil -> 1
        assert_eq!(default_boundary_tolerance(64, 64), 1.0);
        // 854x480: diag 979.7, 0.8% = 7.84 -> 8
        assert_eq!(default_boundary_tolerance(854, 480), 8.0);
    }
}
