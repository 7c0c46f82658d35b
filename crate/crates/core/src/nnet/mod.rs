//! Minimal dependency-free FCN kernel: tensors, layers, the two-headed
//! model, class-balanced loss, reverse-mode gradients, SGD, and checkpoints.

pub mod checkpoint;
pub mod gradcheck;
pub mod loss;
pub mod model;
pub mod ops;
pub mod optim;
pub mod tensor;

pub use checkpoint::{load_model, save_model};
pub use loss::{balanced_bce_loss, PosWeightMode};
pub use model::{contour_target, FcnArch, FcnModel, TrainStep};
pub use optim::{sgd_step, Sgd, TrainConfig};
pub use tensor::Tensor;
