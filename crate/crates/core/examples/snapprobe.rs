use voslab_core::nnet::{FcnArch, PosWeightMode, TrainConfig};
use voslab_core::protocol::*;
use voslab_core::metrics::evaluate_sequence;
use voslab_core::snap::{partition_from_contours, snap_mask};
use voslab_core::synth::make_benchmark;

fn main() {
    let ds = make_benchmark(7, 8, 4);
    let arch = FcnArch::desk_default();
    let cfg = TrainConfig {
        learning_rate: DEFAULT_LEARNING_RATE,
        momentum: DEFAULT_MOMENTUM,
        iterations: DEFAULT_PARENT_ITERS,
        seed: 7,
        pos_weight_mode: PosWeightMode::Balanced,
    };
    let (parent, _) = train_parent(&ds.train, &arch, &cfg, 1.0).unwrap();

    // one-shot per val sequence, cache the prob maps
    let mut all_maps = Vec::new();
    for seq in &ds.val {
        let w = finetune_oneshot(&parent, seq, &first_frame_annotation(seq), DEFAULT_ONESHOT_ITERS, &cfg).unwrap();
        all_maps.push(infer_sequence(&w.model, seq).unwrap());
    }

    // -BS baseline
    let mut base_js = Vec::new();
    for (seq, maps) in ds.val.iter().zip(&all_maps) {
        let preds: Vec<_> = maps.iter().map(|(fg, _)| fg.threshold(0.5).unwrap()).collect();
        let r = evaluate_sequence(&seq.name, &preds, seq.gt.as_ref().unwrap()).unwrap();
        base_js.push(r.j.mean);
    }
    println!("-BS: mean {:.4} per-seq {:?}", base_js.iter().sum::<f64>()/4.0,
        base_js.iter().map(|j|(j*1000.0).round()/1000.0).collect::<Vec<_>>());

    for ct in [0.5, 0.4, 0.3, 0.25, 0.2, 0.15] {
        for maj in [0.5] {
            let mut js = Vec::new();
            let mut region_counts = Vec::new();
            for (seq, maps) in ds.val.iter().zip(&all_maps) {
                let preds: Vec<_> = maps.iter().map(|(fg, c)| {
                    let part = partition_from_contours(c, ct).unwrap();
                    region_counts.push(part.region_count());
                    snap_mask(fg, &part, maj).unwrap()
                }).collect();
                let r = evaluate_sequence(&seq.name, &preds, seq.gt.as_ref().unwrap()).unwrap();
                js.push(r.j.mean);
            }
            let regions_avg = region_counts.iter().sum::<usize>() as f64 / region_counts.len() as f64;
            println!("ct {:.2} maj {:.2}: mean {:.4} per-seq {:?} (avg regions {:.1})",
                ct, maj, js.iter().sum::<f64>()/4.0,
                js.iter().map(|j|(j*1000.0).round()/1000.0).collect::<Vec<_>>(), regions_avg);
        }
    }
}
