use voslab_core::nnet::{FcnArch, PosWeightMode, TrainConfig};
use voslab_core::protocol::*;
use voslab_core::synth::make_benchmark;

fn main() {
    let arch = FcnArch::desk_default();
    for n_train in [16usize, 24] {
        let ds = make_benchmark(7, n_train, 4);
        for lr in [0.005, 0.003] {
            let cfg = TrainConfig {
                learning_rate: lr, momentum: DEFAULT_MOMENTUM,
                iterations: DEFAULT_PARENT_ITERS, seed: 7, pos_weight_mode: PosWeightMode::Balanced,
            };
            let (parent, _) = train_parent(&ds.train, &arch, &cfg, 1.0).unwrap();
            let base = base_init(&arch, cfg.seed);
            let outcomes = run_ablation(&ds, &parent, &base, DEFAULT_ONESHOT_ITERS, &cfg,
                SnapParams::default(), &AblationMode::ALL).unwrap();
            println!("== n_train {n_train} lr {lr}");
            for o in &outcomes {
                println!("{:>10}: mean J {:.4} per-seq {:?}", o.mode.tag(), o.result.mean_j(),
                    o.result.sequences.iter().map(|s|(s.j.mean*1000.0).round()/1000.0).collect::<Vec<_>>());
            }
        }
    }
}
