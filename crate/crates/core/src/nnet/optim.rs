//! Stochastic gradient descent with classic momentum.

use serde::{Deserialize, Serialize};

use super::loss::PosWeightMode;
use crate::error::{Error, Result};

/// Training hyperparameters for one stage.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub iterations: usize,
    pub seed: u64,
    #[serde(skip, default = "default_mode")]
    pub pos_weight_mode: PosWeightMode,
}

fn default_mode() -> PosWeightMode {
    PosWeightMode::Balanced
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter {
                name: "learning_rate",
                reason: format!("{} is not > 0", self.learning_rate),
            });
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidParameter {
                name: "momentum",
                reason: format!("{} outside [0, 1)", self.momentum),
            });
        }
        Ok(())
    }
}

/// Classic momentum update: `v <- mu*v - eta*g; p <- p + v`.
pub fn sgd_step(params: &mut [f64], velocity: &mut [f64], grads: &[f64], learning_rate: f64, momentum: f64) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(params.len(), velocity.len());
    for ((p, v), &g) in params.iter_mut().zip(velocity.iter_mut()).zip(grads) {
        *v = momentum * *v - learning_rate * g;
        *p += *v;
    }
}

/// Stateful wrapper holding the velocity buffer.
pub struct Sgd {
    velocity: Vec<f64>,
    pub learning_rate: f64,
    pub momentum: f64,
}

impl Sgd {
    pub fn new(param_count: usize, learning_rate: f64, momentum: f64) -> Self {
        Sgd {
            velocity: vec![0.0; param_count],
            learning_rate,
            momentum,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        sgd_step(params, &mut self.velocity, grads, self.learning_rate, self.momentum);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_momentum_is_plain_descent() {
        let mut p = vec![1.0, -2.0];
        let mut v = vec![0.0, 0.0];
        sgd_step(&mut p, &mut v, &[0.5, -1.0], 0.1, 0.0);
        assert_eq!(p, vec![1.0 - 0.05, -2.0 + 0.1]);
    }

    #[test]
    fn zero_gradient_zero_velocity_is_identity() {
        let mut p = vec![3.0, 4.0];
        let mut v = vec![0.0, 0.0];
        sgd_step(&mut p, &mut v, &[0.0, 0.0], 0.1, 0.9);
        assert_eq!(p, vec![3.0, 4.0]);
    }

    #[test]
    fn two_momentum_steps_match_hand_recurrence() {
        // eta = 0.1, mu = 0.9, g constant 1:
        // v1 = -0.1, p1 = 1 - 0.1 = 0.9
        // v2 = 0.9*(-0.1) - 0.1 = -0.19, p2 = 0.9 - 0.19 = 0.71
        let mut p = vec![1.0];
        let mut v = vec![0.0];
        sgd_step(&mut p, &mut v, &[1.0], 0.1, 0.9);
        assert_abs_diff_eq!(p[0], 0.9, epsilon = 1e-15);
        sgd_step(&mut p, &mut v, &[1.0], 0.1, 0.9);
        assert_abs_diff_eq!(p[0], 0.71, epsilon = 1e-15);
    }

    #[test]
    fn config_validation() {
        let mut cfg = TrainConfig {
            learning_rate: 0.01,
            momentum: 0.9,
            iterations: 10,
            seed: 1,
            pos_weight_mode: PosWeightMode::Balanced,
        };
        assert!(cfg.validate().is_ok());
        cfg.momentum = 1.0;
        assert!(cfg.validate().is_err());
        cfg.momentum = 0.5;
        cfg.learning_rate = 0.0;
        assert!(cfg.validate().is_err());
    }
}
