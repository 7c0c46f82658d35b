use voslab_core::nnet::{FcnArch, PosWeightMode, TrainConfig};
use voslab_core::protocol::*;
use voslab_core::synth::make_benchmark;

fn main() {
    let arch = FcnArch::desk_default();
    for n_train in [8usize, 16] {
        let ds = make_benchmark(7, n_train, 4);
        for parent_lr in [0.004, 0.005] {
            let pcfg = TrainConfig {
                learning_rate: parent_lr, momentum: DEFAULT_MOMENTUM,
                iterations: DEFAULT_PARENT_ITERS, seed: 7, pos_weight_mode: PosWeightMode::Balanced,
            };
            let (parent, _) = train_parent(&ds.train, &arch, &pcfg, 1.0).unwrap();
            let base = base_init(&arch, pcfg.seed);
            for os_lr in [0.01, 0.02] {
                let ocfg = TrainConfig { learning_rate: os_lr, ..pcfg };
                let outcomes = run_ablation(&ds, &parent, &base, DEFAULT_ONESHOT_ITERS, &ocfg,
                    SnapParams::default(), &AblationMode::ALL).unwrap();
                println!("== n_train {n_train} parent_lr {parent_lr} oneshot_lr {os_lr}");
                for o in &outcomes {
                    println!("{:>10}: mean J {:.4} per-seq {:?}", o.mode.tag(), o.result.mean_j(),
                        o.result.sequences.iter().map(|s|(s.j.mean*1000.0).round()/1000.0).collect::<Vec<_>>());
                }
            }
        }
    }
}
