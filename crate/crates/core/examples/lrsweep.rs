use voslab_core::nnet::{FcnArch, PosWeightMode, TrainConfig};
use voslab_core::protocol::*;
use voslab_core::synth::make_benchmark;

fn main() {
    let arch = FcnArch::desk_default();
    for n_train in [8usize, 16] {
        let ds = make_benchmark(7, n_train, 4);
        for lr in [0.01, 0.005, 0.003, 0.002, 0.001] {
            let cfg = TrainConfig {
                learning_rate: lr, momentum: DEFAULT_MOMENTUM,
                iterations: DEFAULT_PARENT_ITERS, seed: 7, pos_weight_mode: PosWeightMode::Balanced,
            };
            let (_parent, log) = train_parent(&ds.train, &arch, &cfg, 1.0).unwrap();
            let tail = log[log.len()-100..].iter().sum::<f64>()/100.0;
            let mid = log[log.len()/2 - 50..log.len()/2 + 50].iter().sum::<f64>()/100.0;
            println!("n_train {n_train} lr {lr}: mid {mid:.4} end {tail:.4}");
        }
    }
}
