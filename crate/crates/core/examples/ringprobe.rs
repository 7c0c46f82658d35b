use voslab_core::nnet::{FcnArch, PosWeightMode, TrainConfig};
use voslab_core::protocol::*;
use voslab_core::metrics::region_similarity;
use voslab_core::snap::{partition_from_contours, snap_mask};
use voslab_core::synth::make_benchmark;
use voslab_core::probmap::ProbMap;

fn main() {
    let ds = make_benchmark(7, 8, 4);
    let arch = FcnArch::desk_default();
    let pcfg = TrainConfig {
        learning_rate: 0.005, momentum: DEFAULT_MOMENTUM,
        iterations: DEFAULT_PARENT_ITERS, seed: 7, pos_weight_mode: PosWeightMode::Balanced,
    };
    let (parent, _) = train_parent(&ds.train, &arch, &pcfg, 1.0).unwrap();
    let ocfg = TrainConfig { learning_rate: 0.01, ..pcfg };

    // Variant A: default pipeline (oneshot contours), ct 0.5
    // Variant B: union with parent contours (elementwise max), ct 0.5
    // summarize per sequence: frames_leaked (region_count<=1 among non-occluded), J_snap vs J_thresh
    for (label, use_union) in [("oneshot", false), ("union  ", true)] {
        let mut tot_snap = 0.0; let mut tot_thr = 0.0; let mut leaks = 0; let mut frames = 0;
        for seq in &ds.val {
            let w = finetune_oneshot(&parent, seq, &first_frame_annotation(seq), 200, &ocfg).unwrap();
            let os_maps = infer_sequence(&w.model, seq).unwrap();
            let p_maps = infer_sequence(&parent.model, seq).unwrap();
            let gt = seq.gt.as_ref().unwrap();
            let mut js = 0.0; let mut jt = 0.0;
            for (t, ((fg, oc), (_, pc))) in os_maps.iter().zip(&p_maps).enumerate() {
                let cmap = if use_union {
                    ProbMap::from_values(64, 64, oc.values().iter().zip(pc.values())
                        .map(|(a, b)| a.max(*b)).collect()).unwrap()
                } else { oc.clone() };
                let part = partition_from_contours(&cmap, 0.5).unwrap();
                if part.region_count() <= 1 && !gt[t].is_empty() { leaks += 1; }
                frames += 1;
                let snapped = snap_mask(fg, &part, 0.5).unwrap();
                js += region_similarity(&snapped, &gt[t]).unwrap();
                jt += region_similarity(&fg.threshold(0.5).unwrap(), &gt[t]).unwrap();
            }
            tot_snap += js / gt.len() as f64;
            tot_thr += jt / gt.len() as f64;
        }
        println!("{label}: J_snap {:.4} J_thresh {:.4} leaked {}/{} frames",
            tot_snap/4.0, tot_thr/4.0, leaks, frames);
    }
}
