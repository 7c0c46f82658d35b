use voslab_core::nnet::{FcnArch, PosWeightMode, TrainConfig};
use voslab_core::protocol::*;
use voslab_core::metrics::region_similarity;
use voslab_core::snap::{partition_from_contours, snap_mask};
use voslab_core::synth::make_benchmark;

fn main() {
    let ds = make_benchmark(7, 8, 4);
    let arch = FcnArch::desk_default();
    let pcfg = TrainConfig {
        learning_rate: 0.005, momentum: DEFAULT_MOMENTUM,
        iterations: DEFAULT_PARENT_ITERS, seed: 7, pos_weight_mode: PosWeightMode::Balanced,
    };
    let (parent, _) = train_parent(&ds.train, &arch, &pcfg, 1.0).unwrap();
    let ocfg = TrainConfig { learning_rate: 0.01, ..pcfg };
    for tau in [0.95, 0.9, 0.85, 0.8, 0.7, 0.6] {
        let mut deltas: Vec<f64> = Vec::new();
        let mut sealed = 0; let mut total = 0;
        for seq in &ds.val {
            let w = finetune_oneshot(&parent, seq, &first_frame_annotation(seq), 200, &ocfg).unwrap();
            let maps = infer_sequence(&w.model, seq).unwrap();
            let gt = seq.gt.as_ref().unwrap();
            for (t, (fg, c)) in maps.iter().enumerate() {
                total += 1;
                let part = partition_from_contours(c, tau).unwrap();
                if part.region_count() < 2 { continue; }
                sealed += 1;
                let snapped = snap_mask(fg, &part, 0.5).unwrap();
                let base = fg.threshold(0.5).unwrap();
                let d = region_similarity(&snapped, &gt[t]).unwrap()
                      - region_similarity(&base, &gt[t]).unwrap();
                deltas.push(d);
            }
        }
        let mean_d = if deltas.is_empty() { 0.0 } else { deltas.iter().sum::<f64>() / deltas.len() as f64 };
        let wins = deltas.iter().filter(|&&d| d > 1e-12).count();
        let losses = deltas.iter().filter(|&&d| d < -1e-12).count();
        println!("tau {tau}: sealed {sealed}/{total} mean_delta {mean_d:+.4} wins {wins} losses {losses}");
    }
}
