//! Error decomposition, tracker-style evaluation, and assembly of the
//! experiment report bundle.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::dist::squared_distance_transform;
use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::metrics::{AttributeRow, SequenceReport};

/// Default close/far split distance, in pixels from the ground-truth object.
pub const DEFAULT_FP_SPLIT: f64 = 20.0;

/// False positives split at a distance from the object, plus false
/// negatives. The three counts partition the symmetric difference exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ErrorBreakdown {
    pub fp_close: u64,
    pub fp_far: u64,
    pub fn_count: u64,
    pub total_error: u64,
}

/// The three counts normalized by a caller-supplied reference total.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ErrorShares {
    pub fp_close: f64,
    pub fp_far: f64,
    pub fn_share: f64,
}

impl ErrorBreakdown {
    pub fn shares(&self, reference_total: u64) -> ErrorShares {
        let r = reference_total as f64;
        ErrorShares {
            fp_close: self.fp_close as f64 / r,
            fp_far: self.fp_far as f64 / r,
            fn_share: self.fn_count as f64 / r,
        }
    }

    fn add(&mut self, other: &ErrorBreakdown) {
        self.fp_close += other.fp_close;
        self.fp_far += other.fp_far;
        self.fn_count += other.fn_count;
        self.total_error += other.total_error;
    }

    pub fn zero() -> Self {
        ErrorBreakdown {
            fp_close: 0,
            fp_far: 0,
            fn_count: 0,
            total_error: 0,
        }
    }

    pub fn fp_total(&self) -> u64 {
        self.fp_close + self.fp_far
    }
}

/// Splits prediction errors into FP-close (within `d` pixels of the
/// ground-truth object), FP-far, and FN. With empty ground truth every false
/// positive counts as far.
pub fn error_decomposition(pred: &Mask, gt: &Mask, d: f64) -> Result<ErrorBreakdown> {
    if !pred.same_dims(gt) {
        return Err(Error::dims(pred.width(), pred.height(), gt.width(), gt.height()));
    }
    let sq_dist = if gt.is_empty() {
        None
    } else {
        Some(squared_distance_transform(gt)?)
    };
    let w = pred.width();
    let limit = d * d;
    let mut out = ErrorBreakdown::zero();
    for y in 0..pred.height() {
        for x in 0..w {
            match (pred.get(x, y), gt.get(x, y)) {
                (true, false) => {
                    let close = sq_dist
                        .as_ref()
                        .map(|sd| (sd[y * w + x] as f64) <= limit)
                        .unwrap_or(false);
                    if close {
                        out.fp_close += 1;
                    } else {
                        out.fp_far += 1;
                    }
                }
                (false, true) => out.fn_count += 1,
                _ => {}
            }
        }
    }
    out.total_error = out.fp_close + out.fp_far + out.fn_count;
    Ok(out)
}

/// Summed decomposition over a frame series.
pub fn error_decomposition_series(preds: &[Mask], gts: &[Mask], d: f64) -> Result<ErrorBreakdown> {
    if preds.len() != gts.len() {
        return Err(Error::LengthMismatch {
            what: "error decomposition series",
            expected: gts.len(),
            got: preds.len(),
        });
    }
    let mut total = ErrorBreakdown::zero();
    for (p, g) in preds.iter().zip(gts) {
        total.add(&error_decomposition(p, g, d)?);
    }
    Ok(total)
}

/// Success fractions at increasing box-overlap thresholds.
#[derive(Clone, Debug, Serialize)]
pub struct TrackerCurve {
    pub thresholds: Vec<f64>,
    pub success: Vec<f64>,
}

/// Scores predictions as a tracker: per frame, the bounding boxes of the
/// predicted and ground-truth masks must overlap above the threshold. Frames
/// where both masks are empty succeed at every threshold; frames where
/// exactly one is empty fail at every threshold.
pub fn tracker_eval(pred_masks: &[Mask], gt_masks: &[Mask], thresholds: &[f64]) -> Result<TrackerCurve> {
    if pred_masks.is_empty() {
        return Err(Error::EmptyInput("tracker evaluation mask series"));
    }
    if pred_masks.len() != gt_masks.len() {
        return Err(Error::LengthMismatch {
            what: "tracker evaluation series",
            expected: gt_masks.len(),
            got: pred_masks.len(),
        });
    }
    for t in thresholds {
        if !(0.0..1.0).contains(t) {
            return Err(Error::InvalidParameter {
                name: "threshold",
                reason: format!("{t} outside (0, 1)"),
            });
        }
    }
    let ious: Vec<Option<f64>> = pred_masks
        .iter()
        .zip(gt_masks)
        .map(|(p, g)| match (p.bounding_box(), g.bounding_box()) {
            (None, None) => Some(f64::INFINITY), // success at every threshold
            (Some(pb), Some(gb)) => Some(pb.iou(&gb)),
            _ => None, // failure at every threshold
        })
        .collect();
    let n = ious.len() as f64;
    let success = thresholds
        .iter()
        .map(|&t| ious.iter().filter(|i| matches!(i, Some(v) if *v > t)).count() as f64 / n)
        .collect();
    Ok(TrackerCurve {
        thresholds: thresholds.to_vec(),
        success,
    })
}

/// Standard tracker thresholds 0.5..0.9.
pub const TRACKER_THRESHOLDS: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];

// ---------------------------------------------------------------------------
// report assembly
// ---------------------------------------------------------------------------

/// One evaluated variant: a method tag plus its per-sequence reports.
#[derive(Clone, Debug, Serialize)]
pub struct MethodResult {
    pub method: String,
    pub sequences: Vec<SequenceReport>,
}

impl MethodResult {
    pub fn mean_j(&self) -> f64 {
        self.sequences.iter().map(|s| s.j.mean).sum::<f64>() / self.sequences.len() as f64
    }

    pub fn mean_f(&self) -> f64 {
        self.sequences.iter().map(|s| s.f.mean).sum::<f64>() / self.sequences.len() as f64
    }

    pub fn mean_t(&self) -> f64 {
        self.sequences.iter().map(|s| s.t_mean).sum::<f64>() / self.sequences.len() as f64
    }
}

/// Ablation-table row: per-measure aggregate plus the delta against the
/// reference method (positive = loss).
#[derive(Clone, Debug, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub j_mean: f64,
    pub j_recall: f64,
    pub j_decay: f64,
    pub f_mean: f64,
    pub f_recall: f64,
    pub f_decay: f64,
    pub t_mean: f64,
    /// Reference J mean minus this method's J mean; None for the reference.
    pub j_loss_vs_reference: Option<f64>,
}

/// Point on the quality-versus-iterations curve. Wall-clock cost is recorded
/// separately from the report bundle so rebuilds are byte-identical.
#[derive(Clone, Debug, Serialize)]
pub struct TimingPoint {
    pub mode: String,
    pub iterations: usize,
    pub mean_j: f64,
}

/// Measured wall-clock companion to a [`TimingPoint`].
#[derive(Clone, Debug, Serialize)]
pub struct TimingMeasurement {
    pub mode: String,
    pub iterations: usize,
    pub seconds_per_frame: f64,
}

/// Refinement trace row.
#[derive(Clone, Debug, Serialize)]
pub struct RefinementPoint {
    pub annotations: usize,
    pub mean_j: f64,
}

/// Everything the experiment pipeline produced, ready to serialize.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ExperimentBundle {
    /// Method results in ablation order; the first entry is the reference.
    pub methods: Vec<MethodResult>,
    pub attribute_table: BTreeMap<String, BTreeMap<String, AttributeRow>>,
    /// Per-method total error decomposition over the validation set.
    pub errors: BTreeMap<String, ErrorBreakdown>,
    pub tracker: BTreeMap<String, TrackerCurve>,
    pub timing: Vec<TimingPoint>,
    pub refinement: Vec<RefinementPoint>,
    /// Training-data budget: (fraction of train frames, mean J).
    pub budget: Vec<(f64, f64)>,
}

/// The summary JSON mirrors the ablation-table structure: per method, per
/// measure, mean/recall/decay.
#[derive(Serialize)]
struct SummaryJson<'a> {
    methods: Vec<MethodSummary>,
    attribute_table: &'a BTreeMap<String, BTreeMap<String, AttributeRow>>,
    refinement: &'a [RefinementPoint],
    budget: &'a [(f64, f64)],
}

impl ExperimentBundle {
    pub fn method(&self, name: &str) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.method == name)
    }

    /// Table-shaped summaries with deltas against the first (reference)
    /// method; positive delta means the variant loses quality.
    pub fn method_summaries(&self) -> Vec<MethodSummary> {
        let reference_j = self.methods.first().map(|m| m.mean_j());
        self.methods
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let agg = |f: fn(&SequenceReport) -> f64| {
                    m.sequences.iter().map(f).sum::<f64>() / m.sequences.len() as f64
                };
                MethodSummary {
                    method: m.method.clone(),
                    j_mean: agg(|s| s.j.mean),
                    j_recall: agg(|s| s.j.recall),
                    j_decay: agg(|s| s.j.decay),
                    f_mean: agg(|s| s.f.mean),
                    f_recall: agg(|s| s.f.recall),
                    f_decay: agg(|s| s.f.decay),
                    t_mean: agg(|s| s.t_mean),
                    j_loss_vs_reference: if i == 0 {
                        None
                    } else {
                        reference_j.map(|r| r - m.mean_j())
                    },
                }
            })
            .collect()
    }

    /// Writes the bundle under `<dir>/`: `summary.json`, `per_sequence.csv`,
    /// `errors.csv`, `tracker.csv`, `timing.csv`. Output depends only on the
    /// bundle contents, byte for byte.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, bytes: &[u8]| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))
        };

        let summary = SummaryJson {
            methods: self.method_summaries(),
            attribute_table: &self.attribute_table,
            refinement: &self.refinement,
            budget: &self.budget,
        };
        let mut json = serde_json::to_string_pretty(&summary).expect("serializable summary");
        json.push('\n');
        write("summary.json", json.as_bytes())?;

        let mut per_seq = String::from("method,seq,frame,J,F\n");
        for m in &self.methods {
            for s in &m.sequences {
                for (t, fr) in s.frames.iter().enumerate() {
                    writeln!(per_seq, "{},{},{},{:.12},{:.12}", m.method, s.sequence, t, fr.j, fr.f)
                        .expect("string write");
                }
            }
        }
        write("per_sequence.csv", per_seq.as_bytes())?;

        let mut errors = String::from("method,fp_close,fp_far,fn,total\n");
        for (method, e) in &self.errors {
            writeln!(errors, "{method},{},{},{},{}", e.fp_close, e.fp_far, e.fn_count, e.total_error)
                .expect("string write");
        }
        write("errors.csv", errors.as_bytes())?;

        let mut tracker = String::from("method,threshold,success\n");
        for (method, curve) in &self.tracker {
            for (t, s) in curve.thresholds.iter().zip(&curve.success) {
                writeln!(tracker, "{method},{t:.2},{s:.12}").expect("string write");
            }
        }
        write("tracker.csv", tracker.as_bytes())?;

        let mut timing = String::from("mode,iterations,mean_j\n");
        for p in &self.timing {
            writeln!(timing, "{},{},{:.12}", p.mode, p.iterations, p.mean_j).expect("string write");
        }
        write("timing.csv", timing.as_bytes())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{aggregate, FrameScores};
    use tempfile::tempdir;

    fn mask_from(w: usize, h: usize, fg: &[(usize, usize)]) -> Mask {
        let mut m = Mask::new(w, h);
        for &(x, y) in fg {
            m.set(x, y, true);
        }
        m
    }

    #[test]
    fn identical_masks_have_no_errors() {
        let m = mask_from(8, 8, &[(2, 2), (3, 3)]);
        let e = error_decomposition(&m, &m, 20.0).unwrap();
        assert_eq!(e, ErrorBreakdown::zero());
    }

    #[test]
    fn fp_distance_split() {
        let gt = mask_from(40, 40, &[(0, 0)]);
        // FP at distance 5: close under d = 20
        let pred_close = mask_from(40, 40, &[(0, 0), (5, 0)]);
        let e = error_decomposition(&pred_close, &gt, 20.0).unwrap();
        assert_eq!((e.fp_close, e.fp_far, e.fn_count), (1, 0, 0));

        // FP at distance 25: far
        let pred_far = mask_from(40, 40, &[(0, 0), (25, 0)]);
        let e = error_decomposition(&pred_far, &gt, 20.0).unwrap();
        assert_eq!((e.fp_close, e.fp_far, e.fn_count), (0, 1, 0));

        // exact boundary distance 20 is close (inclusive)
        let pred_edge = mask_from(40, 40, &[(0, 0), (20, 0)]);
        let e = error_decomposition(&pred_edge, &gt, 20.0).unwrap();
        assert_eq!((e.fp_close, e.fp_far), (1, 0));
    }

    #[test]
    fn empty_gt_makes_all_fp_far() {
        let gt = Mask::new(10, 10);
        let pred = mask_from(10, 10, &[(1, 1), (2, 2)]);
        let e = error_decomposition(&pred, &gt, 20.0).unwrap();
        assert_eq!((e.fp_close, e.fp_far, e.fn_count), (0, 2, 0));
    }

    #[test]
    fn decomposition_partitions_symmetric_difference() {
        use crate::synth::rng::SplitMix64;
        let mut rng = SplitMix64::new(3);
        for _ in 0..30 {
            let pred = Mask::from_fn(12, 12, |_, _| rng.next_f64() < 0.3);
            let gt = Mask::from_fn(12, 12, |_, _| rng.next_f64() < 0.3);
            for d in [0.0, 3.0, 20.0] {
                let e = error_decomposition(&pred, &gt, d).unwrap();
                assert_eq!(e.fp_close + e.fp_far + e.fn_count, e.total_error);
                let sym_diff = pred.difference_count(&gt) + gt.difference_count(&pred);
                assert_eq!(e.total_error as usize, sym_diff);
            }
            // raising d never decreases fp_close
            let mut prev = 0;
            for d in [0.0, 1.0, 2.0, 5.0, 20.0] {
                let e = error_decomposition(&pred, &gt, d).unwrap();
                assert!(e.fp_close >= prev);
                prev = e.fp_close;
            }
        }
    }

    #[test]
    fn shares_normalize_by_reference() {
        let e = ErrorBreakdown {
            fp_close: 10,
            fp_far: 30,
            fn_count: 60,
            total_error: 100,
        };
        let s = e.shares(200);
        assert_eq!(s.fp_close, 0.05);
        assert_eq!(s.fp_far, 0.15);
        assert_eq!(s.fn_share, 0.30);
    }

    #[test]
    fn tracker_identity_is_perfect() {
        let m = mask_from(10, 10, &[(2, 2), (5, 5)]);
        let series = vec![m; 4];
        let curve = tracker_eval(&series, &series, &TRACKER_THRESHOLDS).unwrap();
        assert!(curve.success.iter().all(|&s| s == 1.0));
    }

    #[test]
    fn tracker_hand_box_case() {
        // pred box (0,0,9,9), gt box (5,0,14,9): IoU = 1/3
        let pred = Mask::from_fn(20, 20, |x, y| x <= 9 && y <= 9);
        let gt = Mask::from_fn(20, 20, |x, y| (5..=14).contains(&x) && y <= 9);
        let curve = tracker_eval(&[pred], &[gt], &[0.3, 0.5]).unwrap();
        assert_eq!(curve.success, vec![1.0, 0.0]);
    }

    #[test]
    fn tracker_empty_frame_conventions() {
        let empty = Mask::new(8, 8);
        let solid = mask_from(8, 8, &[(4, 4)]);
        // both empty: success
        let c = tracker_eval(&[empty.clone()], &[empty.clone()], &[0.5, 0.9]).unwrap();
        assert_eq!(c.success, vec![1.0, 1.0]);
        // one empty: failure
        let c = tracker_eval(&[empty.clone()], &[solid.clone()], &[0.5]).unwrap();
        assert_eq!(c.success, vec![0.0]);
        let c = tracker_eval(&[solid], &[empty], &[0.5]).unwrap();
        assert_eq!(c.success, vec![0.0]);
    }

    #[test]
    fn tracker_curve_is_monotone() {
        use crate::synth::rng::SplitMix64;
        let mut rng = SplitMix64::new(5);
        let preds: Vec<Mask> = (0..6)
            .map(|_| Mask::from_fn(12, 12, |_, _| rng.next_f64() < 0.3))
            .collect();
        let gts: Vec<Mask> = (0..6)
            .map(|_| Mask::from_fn(12, 12, |_, _| rng.next_f64() < 0.3))
            .collect();
        let curve = tracker_eval(&preds, &gts, &TRACKER_THRESHOLDS).unwrap();
        for w in curve.success.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    fn tiny_report(name: &str, js: &[f64]) -> SequenceReport {
        SequenceReport {
            sequence: name.to_string(),
            frames: js.iter().map(|&j| FrameScores { j, f: j }).collect(),
            j: aggregate(js).unwrap(),
            f: aggregate(js).unwrap(),
            t_mean: 0.0,
        }
    }

    #[test]
    fn delta_sign_convention_positive_is_loss() {
        let bundle = ExperimentBundle {
            methods: vec![
                MethodResult {
                    method: "full".into(),
                    sequences: vec![tiny_report("a", &[0.9, 0.9])],
                },
                MethodResult {
                    method: "downgraded".into(),
                    sequences: vec![tiny_report("a", &[0.7, 0.7])],
                },
            ],
            ..Default::default()
        };
        let summaries = bundle.method_summaries();
        assert!(summaries[0].j_loss_vs_reference.is_none());
        let delta = summaries[1].j_loss_vs_reference.unwrap();
        assert!((delta - 0.2).abs() < 1e-12, "positive delta = loss, got {delta}");
    }

    #[test]
    fn bundle_write_is_byte_identical() {
        let bundle = ExperimentBundle {
            methods: vec![MethodResult {
                method: "full".into(),
                sequences: vec![tiny_report("a", &[0.9, 0.8, 0.7, 0.6])],
            }],
            timing: vec![TimingPoint {
                mode: "plain".into(),
                iterations: 10,
                mean_j: 0.5,
            }],
            ..Default::default()
        };
        let dir = tempdir().unwrap();
        let (d1, d2) = (dir.path().join("r1"), dir.path().join("r2"));
        bundle.write_to(&d1).unwrap();
        bundle.write_to(&d2).unwrap();
        for name in ["summary.json", "per_sequence.csv", "errors.csv", "tracker.csv", "timing.csv"] {
            let a = std::fs::read(d1.join(name)).unwrap();
            let b = std::fs::read(d2.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
            assert!(!a.is_empty());
        }
    }
}
