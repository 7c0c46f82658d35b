use voslab_core::nnet::{FcnArch, PosWeightMode, TrainConfig};
use voslab_core::protocol::*;
use voslab_core::metrics::region_similarity;
use voslab_core::snap::{partition_from_contours, snap_mask};
use voslab_core::synth::make_benchmark;
use voslab_core::probmap::ProbMap;
use voslab_core::mask::Mask;

fn guarded_snap(fg: &ProbMap, cmap: &ProbMap, taus: &[f64], majority: f64, bar: f64) -> Mask {
    let base = fg.threshold(0.5).unwrap();
    let mut best = base.clone();
    let mut best_score = bar;
    for &tau in taus {
        let part = partition_from_contours(cmap, tau).unwrap();
        let snapped = snap_mask(fg, &part, majority).unwrap();
        let score = region_similarity(&snapped, &base).unwrap();
        if score > best_score {
            best = snapped;
            best_score = score;
        }
    }
    best
}

fn main() {
    let ds = make_benchmark(7, 8, 4);
    let arch = FcnArch::desk_default();
    let pcfg = TrainConfig {
        learning_rate: 0.005, momentum: DEFAULT_MOMENTUM,
        iterations: DEFAULT_PARENT_ITERS, seed: 7, pos_weight_mode: PosWeightMode::Balanced,
    };
    let (parent, _) = train_parent(&ds.train, &arch, &pcfg, 1.0).unwrap();
    let ocfg = TrainConfig { learning_rate: 0.01, ..pcfg };

    let taus = [0.5, 0.4, 0.3, 0.2, 0.15, 0.1];
    for union in [false, true] {
        let mut tot_snap = 0.0; let mut tot_thr = 0.0;
        let mut fp_snap = 0u64; let mut fp_thr = 0u64;
        let mut snap_wins = 0; let mut snap_losses = 0; let mut fallbacks = 0;
        for seq in &ds.val {
            let w = finetune_oneshot(&parent, seq, &first_frame_annotation(seq), 200, &ocfg).unwrap();
            let os_maps = infer_sequence(&w.model, seq).unwrap();
            let p_maps = infer_sequence(&parent.model, seq).unwrap();
            let gt = seq.gt.as_ref().unwrap();
            let mut js = 0.0; let mut jt = 0.0;
            for (t, ((fg, oc), (_, pc))) in os_maps.iter().zip(&p_maps).enumerate() {
                let cmap = if union {
                    ProbMap::from_values(64, 64, oc.values().iter().zip(pc.values())
                        .map(|(a, b)| a.max(*b)).collect()).unwrap()
                } else { oc.clone() };
                let snapped = guarded_snap(fg, &cmap, &taus, 0.5, 0.5);
                let base = fg.threshold(0.5).unwrap();
                if snapped == base { fallbacks += 1; }
                let j_s = region_similarity(&snapped, &gt[t]).unwrap();
                let j_t = region_similarity(&base, &gt[t]).unwrap();
                if j_s > j_t + 1e-12 { snap_wins += 1; }
                if j_s < j_t - 1e-12 { snap_losses += 1; }
                js += j_s; jt += j_t;
                fp_snap += snapped.difference_count(&gt[t]) as u64;
                fp_thr += base.difference_count(&gt[t]) as u64;
            }
            tot_snap += js / gt.len() as f64;
            tot_thr += jt / gt.len() as f64;
        }
        println!("union {union}: J_ours {:.4} J_bs {:.4} | wins {snap_wins} losses {snap_losses} fallbacks {fallbacks} | FP {fp_snap} vs {fp_thr}",
            tot_snap/4.0, tot_thr/4.0);
    }
}
