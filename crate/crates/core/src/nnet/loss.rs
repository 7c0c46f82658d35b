//! Class-balanced binary cross-entropy over logits.

use super::ops::{sigmoid, softplus};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::mask::Mask;

/// How the positive class is weighted in the pixel loss.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum PosWeightMode {
    /// w+ = N / (2 N+), w- = N / (2 N-); falls back to 1/1 when either class
    /// is empty.
    Balanced,
    /// Fixed positive-class weight, w- = 1.
    Fixed(f64),
}

/// Mean weighted BCE of a single-channel logit map against a binary target.
/// Returns the loss and its analytic gradient with respect to the logits.
pub fn balanced_bce_loss(logits: &Tensor, target: &Mask, mode: PosWeightMode) -> Result<(f64, Tensor)> {
    if logits.channels != 1 || logits.height != target.height() || logits.width != target.width() {
        return Err(Error::dims(logits.width, logits.height, target.width(), target.height()));
    }
    let n = (target.width() * target.height()) as f64;
    let n_pos = target.area() as f64;
    let n_neg = n - n_pos;
    let (w_pos, w_neg) = match mode {
        PosWeightMode::Balanced => {
            if n_pos == 0.0 || n_neg == 0.0 {
                (1.0, 1.0)
            } else {
                (n / (2.0 * n_pos), n / (2.0 * n_neg))
            }
        }
        PosWeightMode::Fixed(w) => (w, 1.0),
    };

    let mut loss = 0.0;
    let mut grad = Tensor::zeros(1, logits.height, logits.width);
    for (i, (&x, &y)) in logits.data.iter().zip(target.bits()).enumerate() {
        if y {
            // -log sigmoid(x) = softplus(-x)
            loss += w_pos * softplus(-x);
            grad.data[i] = w_pos * (sigmoid(x) - 1.0) / n;
        } else {
            loss += w_neg * softplus(x);
            grad.data[i] = w_neg * sigmoid(x) / n;
        }
    }
    Ok((loss / n, grad))
}
