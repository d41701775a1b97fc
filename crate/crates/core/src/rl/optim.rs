use serde::{Deserialize, Serialize};

use crate::rl::qnet::{Gradient, QNetwork};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

pub trait Optimizer<T> {
    fn step(&mut self, net: &mut QNetwork<T>, grad: &Gradient<T>);
}

/// Plain gradient descent `θ ← θ - lr ∇L`.
#[derive(Debug, Clone)]
pub struct Sgd<T> {
    pub learning_rate: T,
}

impl<T: Scalar> Optimizer<T> for Sgd<T> {
    fn step(&mut self, net: &mut QNetwork<T>, grad: &Gradient<T>) {
        for ((layer, gw), gb) in net.layers_mut().iter_mut().zip(&grad.weights).zip(&grad.biases) {
            for (w, &g) in layer.weights.iter_mut().zip(gw) {
                *w -= self.learning_rate * g;
            }
            for (b, &g) in layer.bias.iter_mut().zip(gb) {
                *b -= self.learning_rate * g;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    first: Vec<T>,
    second: Vec<T>,
    steps: i32,
}

impl<T: Scalar> Adam<T> {
    pub fn new(learning_rate: T) -> Self {
        Self {
            learning_rate,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            epsilon: T::lit(1e-8),
            first: Vec::new(),
            second: Vec::new(),
            steps: 0,
        }
    }
}

impl<T: Scalar> Optimizer<T> for Adam<T> {
    fn step(&mut self, net: &mut QNetwork<T>, grad: &Gradient<T>) {
        let flat = grad.flatten();
        if self.first.len() != flat.len() {
            self.first = vec![T::zero(); flat.len()];
            self.second = vec![T::zero(); flat.len()];
            self.steps = 0;
        }
        self.steps += 1;
        let c1 = T::one() - self.beta1.powi(self.steps);
        let c2 = T::one() - self.beta2.powi(self.steps);
        let mut params = net.params();
        for (i, (p, &g)) in params.iter_mut().zip(&flat).enumerate() {
            self.first[i] = self.beta1 * self.first[i] + (T::one() - self.beta1) * g;
            self.second[i] = self.beta2 * self.second[i] + (T::one() - self.beta2) * g * g;
            let m = self.first[i] / c1;
            let v = self.second[i] / c2;
            *p -= self.learning_rate * m / (v.sqrt() + self.epsilon);
        }
        net.set_params(&params).expect("gradient shaped like the network");
    }
}

pub fn build_optimizer<T: Scalar>(kind: OptimizerKind, learning_rate: f64) -> Box<dyn Optimizer<T>> {
    match kind {
        OptimizerKind::Sgd => Box::new(Sgd {
            learning_rate: T::lit(learning_rate),
        }),
        OptimizerKind::Adam => Box::new(Adam::new(T::lit(learning_rate))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::qnet::Dense;

    fn tiny() -> QNetwork<f64> {
        QNetwork::from_layers(vec![Dense {
            inputs: 1,
            outputs: 3,
            weights: vec![1.0, 2.0, 3.0],
            bias: vec![0.0, 0.0, 0.0],
        }])
        .unwrap()
    }

    #[test]
    fn sgd_moves_against_the_gradient() {
        let mut net = tiny();
        let grad = Gradient {
            weights: vec![vec![1.0, -1.0, 0.0]],
            biases: vec![vec![0.5, 0.0, 0.0]],
        };
        Sgd { learning_rate: 0.1 }.step(&mut net, &grad);
        assert_eq!(net.params(), vec![0.9, 2.1, 3.0, -0.05, 0.0, 0.0]);
    }

    #[test]
    fn adam_first_step_is_learning_rate_sized() {
        let mut net = tiny();
        let grad = Gradient {
            weights: vec![vec![4.0, -0.01, 0.0]],
            biases: vec![vec![0.0; 3]],
        };
        Adam::new(0.01).step(&mut net, &grad);
        let p = net.params();
        assert!((p[0] - 0.99).abs() < 1e-6);
        assert!((p[1] - 2.01).abs() < 1e-6);
        assert_eq!(p[2], 3.0);
    }
}
