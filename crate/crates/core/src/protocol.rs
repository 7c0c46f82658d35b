//! The three-stage training protocol and its experiment recipes.
//!
//! Stage 1 is the seeded base initialization, stage 2 trains the parent on
//! the benchmark train split, stage 3 fine-tunes per sequence on the
//! annotated frame(s). On top of those sit the ablation table, progressive
//! refinement, the training-data budget sweep, and the timing profile.
//!
//! Every training run is a pure function of (architecture, seed, data
//! order, config): two runs with the same inputs produce bit-identical
//! weights. Inference fans out per frame; frames never influence each other.

use std::time::Instant;

use rayon::prelude::*;

use crate::analysis::MethodResult;
use crate::error::{Error, Result};
use crate::frame::VideoSequence;
use crate::mask::Mask;
use crate::metrics::{evaluate_sequence, region_similarity};
use crate::nnet::{contour_target, FcnArch, FcnModel, Sgd, TrainConfig};
use crate::probmap::ProbMap;
use crate::snap::{partition_from_contours, snap_mask};
use crate::synth::rng::SplitMix64;
use crate::synth::SynthDataset;

pub const DEFAULT_PARENT_ITERS: usize = 2000;
pub const DEFAULT_ONESHOT_ITERS: usize = 200;
pub const DEFAULT_LEARNING_RATE: f64 = 0.01;
pub const DEFAULT_MOMENTUM: f64 = 0.9;
/// Weight of the contour-head loss in the total objective.
pub const CONTOUR_LOSS_WEIGHT: f64 = 1.0;
/// Binarization threshold applied to foreground probability maps.
pub const MASK_THRESHOLD: f64 = 0.5;

/// Provenance of a weight set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StageTag {
    Base,
    Parent,
    /// Records exactly which frames' annotations the fine-tune consumed.
    OneShot {
        sequence: String,
        annotated_frames: Vec<usize>,
    },
}

/// A checkpoint plus its provenance tag.
#[derive(Clone, Debug)]
pub struct StageWeights {
    pub tag: StageTag,
    pub model: FcnModel,
}

/// Boundary-snapping parameters.
#[derive(Clone, Copy, Debug)]
pub struct SnapParams {
    pub contour_threshold: f64,
    pub majority: f64,
}

impl Default for SnapParams {
    fn default() -> Self {
        SnapParams {
            contour_threshold: 0.5,
            majority: 0.5,
        }
    }
}

/// The seeded random initialization every pipeline starts from.
pub fn base_init(arch: &FcnArch, seed: u64) -> StageWeights {
    StageWeights {
        tag: StageTag::Base,
        model: FcnModel::init_seeded(arch.clone(), seed),
    }
}

struct TrainExample<'a> {
    seq: &'a VideoSequence,
    frame: usize,
    fg: Mask,
    contour: Mask,
}

/// Shared SGD loop: cycles examples in seeded shuffled order, one backward
/// pass and one momentum step per iteration. Returns the per-iteration total
/// loss.
fn sgd_loop(
    model: &mut FcnModel,
    examples: &[TrainExample<'_>],
    iterations: usize,
    config: &TrainConfig,
    shuffle: bool,
) -> Result<Vec<f64>> {
    let mut optimizer = Sgd::new(model.params().len(), config.learning_rate, config.momentum);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut order_rng = SplitMix64::new(config.seed ^ 0x0D0E_0F10_1112_1314);
    let mut pos = examples.len();
    let mut log = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        if pos >= order.len() {
            if shuffle {
                order_rng.shuffle(&mut order);
            }
            pos = 0;
        }
        let ex = &examples[order[pos]];
        pos += 1;
        let step = model.backward(
            &ex.seq.frames[ex.frame],
            &ex.fg,
            &ex.contour,
            CONTOUR_LOSS_WEIGHT,
            config.pos_weight_mode,
        )?;
        optimizer.step(model.params_mut(), &step.gradients);
        log.push(step.total_loss(CONTOUR_LOSS_WEIGHT));
    }
    Ok(log)
}

/// Trains the parent network from the base initialization on a seeded
/// per-sequence subset of the train split's annotated frames.
///
/// `subset_fraction` in (0, 1] selects that share of each sequence's frames
/// (at least one per sequence). Returns the parent weights and the training
/// loss log.
pub fn train_parent(
    train_split: &[VideoSequence],
    arch: &FcnArch,
    config: &TrainConfig,
    subset_fraction: f64,
) -> Result<(StageWeights, Vec<f64>)> {
    config.validate()?;
    if train_split.is_empty() {
        return Err(Error::EmptyInput("train split"));
    }
    if !(subset_fraction > 0.0 && subset_fraction <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "subset_fraction",
            reason: format!("{subset_fraction} outside (0, 1]"),
        });
    }
    let mut subset_rng = SplitMix64::new(config.seed ^ 0x5B5E7);
    let mut examples = Vec::new();
    for seq in train_split {
        let gt = seq.gt.as_ref().ok_or(Error::EmptyInput("ground truth of a train sequence"))?;
        let n = seq.len();
        let k = ((subset_fraction * n as f64).round() as usize).clamp(1, n);
        for t in subset_rng.sample_indices(n, k) {
            examples.push(TrainExample {
                seq,
                frame: t,
                fg: gt[t].clone(),
                contour: contour_target(&gt[t]),
            });
        }
    }
    if examples.is_empty() {
        return Err(Error::EmptyInput("effective training subset"));
    }
    let mut model = base_init(arch, config.seed).model;
    let log = sgd_loop(&mut model, &examples, config.iterations, config, true)?;
    Ok((
        StageWeights {
            tag: StageTag::Parent,
            model,
        },
        log,
    ))
}

/// Test-time adaptation: continues SGD from the given weights using only the
/// annotated frames, cycled in frame order. `iters = 0` returns the starting
/// weights unchanged (bit for bit).
pub fn finetune_oneshot(
    start: &StageWeights,
    seq: &VideoSequence,
    annotations: &[(usize, Mask)],
    iters: usize,
    config: &TrainConfig,
) -> Result<StageWeights> {
    config.validate()?;
    if annotations.is_empty() {
        return Err(Error::EmptyInput("annotation set"));
    }
    let mut sorted: Vec<&(usize, Mask)> = annotations.iter().collect();
    sorted.sort_by_key(|(t, _)| *t);
    for &&(t, _) in &sorted {
        if t >= seq.len() {
            return Err(Error::InvalidParameter {
                name: "annotation frame index",
                reason: format!("{t} out of range for {} frames", seq.len()),
            });
        }
    }
    let examples: Vec<TrainExample<'_>> = sorted
        .iter()
        .map(|(t, mask)| TrainExample {
            seq,
            frame: *t,
            fg: mask.clone(),
            contour: contour_target(mask),
        })
        .collect();
    let mut model = start.model.clone();
    sgd_loop(&mut model, &examples, iters, config, false)?;
    Ok(StageWeights {
        tag: StageTag::OneShot {
            sequence: seq.name.clone(),
            annotated_frames: sorted.iter().map(|(t, _)| *t).collect(),
        },
        model,
    })
}

/// The canonical one-shot annotation: the sequence's first ground-truth
/// frame.
pub fn first_frame_annotation(seq: &VideoSequence) -> Vec<(usize, Mask)> {
    vec![(0, seq.gt_frame(0).clone())]
}

/// Per-frame independent inference. Frames are processed in parallel; the
/// output for frame `t` depends only on the weights and that frame.
pub fn infer_sequence(model: &FcnModel, seq: &VideoSequence) -> Result<Vec<(ProbMap, ProbMap)>> {
    seq.frames.par_iter().map(|f| model.forward(f)).collect()
}

/// Maps raw network output to a mask: plain thresholding, or boundary
/// snapping when `snap` is given.
pub fn maps_to_mask(fg: &ProbMap, contour: &ProbMap, snap: Option<SnapParams>) -> Result<Mask> {
    match snap {
        None => fg.threshold(MASK_THRESHOLD),
        Some(p) => {
            let partition = partition_from_contours(contour, p.contour_threshold)?;
            snap_mask(fg, &partition, p.majority)
        }
    }
}

/// Inference straight to masks.
pub fn predict_masks(model: &FcnModel, seq: &VideoSequence, snap: Option<SnapParams>) -> Result<Vec<Mask>> {
    infer_sequence(model, seq)?
        .iter()
        .map(|(fg, contour)| maps_to_mask(fg, contour, snap))
        .collect()
}

/// Ablation variants, named after which components are removed: boundary
/// snapping (BS), parent pre-training (PN), one-shot fine-tuning (OS).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AblationMode {
    /// Parent + one-shot + snapping.
    Full,
    /// No snapping.
    NoSnap,
    /// Fine-tune from the base init, no snapping.
    NoParent,
    /// Parent applied directly, no snapping.
    NoOneShot,
    /// Base init applied directly, no snapping.
    BaseOnly,
}

impl AblationMode {
    pub const ALL: [AblationMode; 5] = [
        AblationMode::Full,
        AblationMode::NoSnap,
        AblationMode::NoParent,
        AblationMode::NoOneShot,
        AblationMode::BaseOnly,
    ];

    /// Table tag.
    pub fn tag(&self) -> &'static str {
        match self {
            AblationMode::Full => "Ours",
            AblationMode::NoSnap => "-BS",
            AblationMode::NoParent => "-PN-BS",
            AblationMode::NoOneShot => "-OS-BS",
            AblationMode::BaseOnly => "-PN-OS-BS",
        }
    }
}

/// Everything one ablation variant produced on the validation set.
#[derive(Clone, Debug)]
pub struct AblationOutcome {
    pub mode: AblationMode,
    pub result: MethodResult,
    /// Predicted masks, per sequence, per frame.
    pub masks: Vec<Vec<Mask>>,
}

/// Runs the requested ablation variants over the validation split. The
/// one-shot annotation is always the first frame. Fine-tunes are shared
/// between variants that only differ in snapping.
pub fn run_ablation(
    dataset: &SynthDataset,
    parent: &StageWeights,
    base: &StageWeights,
    oneshot_iters: usize,
    config: &TrainConfig,
    snap: SnapParams,
    modes: &[AblationMode],
) -> Result<Vec<AblationOutcome>> {
    if dataset.val.is_empty() {
        return Err(Error::EmptyInput("validation split"));
    }
    let needs_oneshot = modes.iter().any(|m| matches!(m, AblationMode::Full | AblationMode::NoSnap));
    let needs_scratch = modes.contains(&AblationMode::NoParent);

    // per-sequence fine-tunes, independent across sequences
    let oneshot_models: Vec<Option<FcnModel>> = dataset
        .val
        .par_iter()
        .map(|seq| -> Result<Option<FcnModel>> {
            if !needs_oneshot {
                return Ok(None);
            }
            let w = finetune_oneshot(parent, seq, &first_frame_annotation(seq), oneshot_iters, config)?;
            Ok(Some(w.model))
        })
        .collect::<Result<_>>()?;
    let scratch_models: Vec<Option<FcnModel>> = dataset
        .val
        .par_iter()
        .map(|seq| -> Result<Option<FcnModel>> {
            if !needs_scratch {
                return Ok(None);
            }
            let w = finetune_oneshot(base, seq, &first_frame_annotation(seq), oneshot_iters, config)?;
            Ok(Some(w.model))
        })
        .collect::<Result<_>>()?;

    let mut outcomes = Vec::with_capacity(modes.len());
    for &mode in modes {
        let mut sequences = Vec::with_capacity(dataset.val.len());
        let mut masks = Vec::with_capacity(dataset.val.len());
        for (i, seq) in dataset.val.iter().enumerate() {
            let (model, use_snap) = match mode {
                AblationMode::Full => (oneshot_models[i].as_ref().unwrap(), Some(snap)),
                AblationMode::NoSnap => (oneshot_models[i].as_ref().unwrap(), None),
                AblationMode::NoParent => (scratch_models[i].as_ref().unwrap(), None),
                AblationMode::NoOneShot => (&parent.model, None),
                AblationMode::BaseOnly => (&base.model, None),
            };
            let preds = predict_masks(model, seq, use_snap)?;
            let gt = seq.gt.as_ref().ok_or(Error::EmptyInput("validation ground truth"))?;
            sequences.push(evaluate_sequence(&seq.name, &preds, gt)?);
            masks.push(preds);
        }
        outcomes.push(AblationOutcome {
            mode,
            result: MethodResult {
                method: mode.tag().to_string(),
                sequences,
            },
            masks,
        });
    }
    Ok(outcomes)
}

/// One refinement round: how many annotations, which frames, what quality.
#[derive(Clone, Debug)]
pub struct RefinementRound {
    pub annotations: usize,
    pub annotated_frames: Vec<usize>,
    pub mean_j: f64,
}

/// Progressive refinement on one sequence: round 0 applies the parent
/// directly (zero-shot); each later round annotates the worst-J frame among
/// the not-yet-annotated ones (ties to the lowest index) and re-fine-tunes
/// from the parent with the full annotation set. Evaluation always covers
/// all frames, annotated ones included.
pub fn progressive_refine(
    parent: &StageWeights,
    seq: &VideoSequence,
    max_annotations: usize,
    iters_per_round: usize,
    config: &TrainConfig,
    snap: Option<SnapParams>,
) -> Result<Vec<RefinementRound>> {
    let gt = seq.gt.as_ref().ok_or(Error::EmptyInput("refinement ground truth"))?;
    if max_annotations > seq.len() {
        return Err(Error::InvalidParameter {
            name: "max_annotations",
            reason: format!("{max_annotations} exceeds {} frames", seq.len()),
        });
    }
    let mut rounds = Vec::with_capacity(max_annotations + 1);
    let mut annotated: Vec<usize> = Vec::new();
    let mut model = parent.model.clone();
    loop {
        let preds = predict_masks(&model, seq, snap)?;
        let per_frame_j: Vec<f64> = preds
            .iter()
            .zip(gt)
            .map(|(p, g)| region_similarity(p, g))
            .collect::<Result<_>>()?;
        let mean_j = per_frame_j.iter().sum::<f64>() / per_frame_j.len() as f64;
        rounds.push(RefinementRound {
            annotations: annotated.len(),
            annotated_frames: annotated.clone(),
            mean_j,
        });
        if annotated.len() >= max_annotations {
            break;
        }
        // worst not-yet-annotated frame, ties to the lowest index
        let worst = (0..seq.len())
            .filter(|t| !annotated.contains(t))
            .min_by(|&a, &b| per_frame_j[a].partial_cmp(&per_frame_j[b]).expect("finite J").then(a.cmp(&b)))
            .expect("at least one unannotated frame");
        annotated.push(worst);
        let ann: Vec<(usize, Mask)> = annotated.iter().map(|&t| (t, gt[t].clone())).collect();
        // always restart from the parent so rounds are comparable
        model = finetune_oneshot(parent, seq, &ann, iters_per_round, config)?.model;
    }
    Ok(rounds)
}

/// Fine-tunes on every frame's annotation — the capacity upper bound that
/// pairs with a refinement trace.
pub fn refine_all_frames(
    parent: &StageWeights,
    seq: &VideoSequence,
    iters: usize,
    config: &TrainConfig,
    snap: Option<SnapParams>,
) -> Result<f64> {
    let gt = seq.gt.as_ref().ok_or(Error::EmptyInput("refinement ground truth"))?;
    let ann: Vec<(usize, Mask)> = gt.iter().cloned().enumerate().collect();
    let model = finetune_oneshot(parent, seq, &ann, iters, config)?.model;
    let preds = predict_masks(&model, seq, snap)?;
    let mut total = 0.0;
    for (p, g) in preds.iter().zip(gt) {
        total += region_similarity(p, g)?;
    }
    Ok(total / gt.len() as f64)
}

/// One timing-profile row.
#[derive(Clone, Debug)]
pub struct TimingEntry {
    pub mode: String,
    pub iterations: usize,
    pub seconds_per_frame: f64,
    pub mean_j: f64,
}

/// Measures the quality/time trade-off across fine-tuning budgets.
///
/// For each iteration count the amortized modes (`-BS`, `Ours`) charge
/// fine-tune time spread over the sequence plus the per-frame forward (plus
/// snapping for `Ours`); the `Pre` modes exclude fine-tuning, as if it had
/// happened offline. The 0-iteration rows coincide with applying the parent
/// directly.
pub fn timing_profile(
    parent: &StageWeights,
    seq: &VideoSequence,
    iteration_grid: &[usize],
    config: &TrainConfig,
    snap: SnapParams,
) -> Result<Vec<TimingEntry>> {
    if iteration_grid.is_empty() {
        return Err(Error::EmptyInput("iteration grid"));
    }
    let gt = seq.gt.as_ref().ok_or(Error::EmptyInput("timing ground truth"))?;
    let n = seq.len() as f64;
    let mut entries = Vec::new();
    for &iters in iteration_grid {
        let t0 = Instant::now();
        let weights = finetune_oneshot(parent, seq, &first_frame_annotation(seq), iters, config)?;
        let finetune_secs = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let maps = infer_sequence(&weights.model, seq)?;
        let forward_secs = t1.elapsed().as_secs_f64() / n;

        let plain: Vec<Mask> = maps
            .iter()
            .map(|(fg, contour)| maps_to_mask(fg, contour, None))
            .collect::<Result<_>>()?;
        let t2 = Instant::now();
        let snapped: Vec<Mask> = maps
            .iter()
            .map(|(fg, contour)| maps_to_mask(fg, contour, Some(snap)))
            .collect::<Result<_>>()?;
        let snap_secs = t2.elapsed().as_secs_f64() / n;

        let mean_j = |preds: &[Mask]| -> Result<f64> {
            let mut total = 0.0;
            for (p, g) in preds.iter().zip(gt) {
                total += region_similarity(p, g)?;
            }
            Ok(total / n)
        };
        let j_plain = mean_j(&plain)?;
        let j_snapped = mean_j(&snapped)?;
        let amortized = finetune_secs / n;

        entries.push(TimingEntry {
            mode: "-BS".into(),
            iterations: iters,
            seconds_per_frame: amortized + forward_secs,
            mean_j: j_plain,
        });
        entries.push(TimingEntry {
            mode: "Ours".into(),
            iterations: iters,
            seconds_per_frame: amortized + forward_secs + snap_secs,
            mean_j: j_snapped,
        });
        entries.push(TimingEntry {
            mode: "-BS Pre".into(),
            iterations: iters,
            seconds_per_frame: forward_secs,
            mean_j: j_plain,
        });
        entries.push(TimingEntry {
            mode: "Ours Pre".into(),
            iterations: iters,
            seconds_per_frame: forward_secs + snap_secs,
            mean_j: j_snapped,
        });
    }
    Ok(entries)
}
