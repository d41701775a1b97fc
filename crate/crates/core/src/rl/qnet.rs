//! Feed-forward action-value network `Q(s, ·; θ)` with reverse-mode gradients.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rl::action::Action;
use crate::scalar::Scalar;

const MODEL_HEADER: &str = "qnet v1";

/// Fully connected layer; `weights` is row-major `outputs x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    fn affine(&self, x: &[T], out: &mut Vec<T>) {
        out.clear();
        out.extend(self.weights.chunks_exact(self.inputs).zip(&self.bias).map(|(row, &b)| {
            row.iter().zip(x).fold(b, |acc, (&w, &xi)| acc + w * xi)
        }));
    }
}

/// Smooth ramp `ln(1 + e^z)`, evaluated without overflow.
#[inline]
fn softplus<T: Scalar>(z: T) -> T {
    if z > T::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[inline]
fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// One regression sample for the squared TD error.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a, T> {
    pub input: &'a [T],
    pub action: Action,
    pub target: T,
}

/// Gradient of the loss, shaped like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient<T> {
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
}

impl<T: Scalar> Gradient<T> {
    pub fn flatten(&self) -> Vec<T> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b).copied())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork<T> {
    layers: Vec<Dense<T>>,
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return Err(Error::Validation(format!("network needs input and output sizes, got {dims:?}")));
    }
    if dims.contains(&0) {
        return Err(Error::Validation(format!("zero-width layer in {dims:?}")));
    }
    if *dims.last().unwrap() != Action::COUNT {
        return Err(Error::Validation(format!(
            "output layer must have {} units, got {dims:?}",
            Action::COUNT
        )));
    }
    Ok(())
}

impl<T: Scalar> QNetwork<T> {
    /// Network with every weight and bias set to zero.
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        let layers = dims
            .windows(2)
            .map(|w| Dense {
                inputs: w[0],
                outputs: w[1],
                weights: vec![T::zero(); w[0] * w[1]],
                bias: vec![T::zero(); w[1]],
            })
            .collect();
        Ok(Self { layers })
    }

    /// Glorot-uniform weights and zero biases.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(dims)?;
        for layer in &mut net.layers {
            let limit = (6.0 / (layer.inputs + layer.outputs) as f64).sqrt();
            for w in &mut layer.weights {
                *w = T::lit(rng.random_range(-limit..limit));
            }
        }
        Ok(net)
    }

    pub fn from_layers(layers: Vec<Dense<T>>) -> Result<Self> {
        let mut dims: Vec<usize> = layers.iter().map(|l| l.inputs).collect();
        dims.extend(layers.last().map(|l| l.outputs));
        check_dims(&dims)?;
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::Validation("consecutive layer sizes disagree".into()));
            }
        }
        for l in &layers {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::Validation("layer parameter count does not match its shape".into()));
            }
        }
        Ok(Self { layers })
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims: Vec<usize> = self.layers.iter().map(|l| l.inputs).collect();
        dims.push(Action::COUNT);
        dims
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn layers(&self) -> &[Dense<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<T>] {
        &mut self.layers
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters in file order: per layer, weights row-major then biases.
    pub fn params(&self) -> Vec<T> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn set_params(&mut self, values: &[T]) -> Result<()> {
        if values.len() != self.num_params() {
            return Err(Error::Validation(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                values.len()
            )));
        }
        let mut it = values.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *w = it.next().expect("length checked");
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Action values for one observation.
    pub fn forward(&self, x: &[T]) -> Result<[T; Action::COUNT]> {
        self.check_input(x)?;
        let mut current = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.affine(&current, &mut next);
            if i < last {
                next.iter_mut().for_each(|z| *z = softplus(*z));
            }
            std::mem::swap(&mut current, &mut next);
        }
        Ok([current[0], current[1], current[2]])
    }

    pub fn forward_batch(&self, xs: &[Vec<T>]) -> Result<Vec<[T; Action::COUNT]>> {
        xs.iter().map(|x| self.forward(x)).collect()
    }

    /// Mean squared error `mean (target - Q(s, a))^2` and its gradient.
    pub fn loss_and_gradient(&self, samples: &[Sample<'_, T>]) -> Result<(T, Gradient<T>)> {
        if samples.is_empty() {
            return Err(Error::Validation("empty batch".into()));
        }
        let n = T::lit(samples.len() as f64);
        let mut grad = Gradient {
            weights: self.layers.iter().map(|l| vec![T::zero(); l.weights.len()]).collect(),
            biases: self.layers.iter().map(|l| vec![T::zero(); l.bias.len()]).collect(),
        };
        let mut loss = T::zero();
        let last = self.layers.len() - 1;
        // Per-layer inputs (post-activation) and pre-activations.
        let mut inputs: Vec<Vec<T>> = vec![Vec::new(); self.layers.len()];
        let mut pre: Vec<Vec<T>> = vec![Vec::new(); self.layers.len()];

        for sample in samples {
            self.check_input(sample.input)?;
            inputs[0].clear();
            inputs[0].extend_from_slice(sample.input);
            for i in 0..self.layers.len() {
                let mut z = std::mem::take(&mut pre[i]);
                self.layers[i].affine(&inputs[i], &mut z);
                if i < last {
                    inputs[i + 1] = z.iter().map(|&v| softplus(v)).collect();
                }
                pre[i] = z;
            }
            let q = pre[last][sample.action.index()];
            let err = q - sample.target;
            loss += err * err;

            let mut delta = vec![T::zero(); Action::COUNT];
            delta[sample.action.index()] = T::lit(2.0) * err / n;
            for i in (0..self.layers.len()).rev() {
                let layer = &self.layers[i];
                let x = &inputs[i];
                for (o, &g) in delta.iter().enumerate() {
                    if g == T::zero() {
                        continue;
                    }
                    grad.biases[i][o] += g;
                    let row = &mut grad.weights[i][o * layer.inputs..(o + 1) * layer.inputs];
                    for (gw, &xi) in row.iter_mut().zip(x) {
                        *gw += g * xi;
                    }
                }
                if i == 0 {
                    break;
                }
                let mut back = vec![T::zero(); layer.inputs];
                for (o, &g) in delta.iter().enumerate() {
                    if g == T::zero() {
                        continue;
                    }
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (b, &w) in back.iter_mut().zip(row) {
                        *b += g * w;
                    }
                }
                for (b, &z) in back.iter_mut().zip(&pre[i - 1]) {
                    *b *= sigmoid(z);
                }
                delta = back;
            }
        }
        Ok((loss / n, grad))
    }

    /// Serializes to the `qnet v1` text format with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MODEL_HEADER);
        out.push('\n');
        let dims: Vec<String> = self.dims().iter().map(|d| d.to_string()).collect();
        out.push_str(&dims.join(" "));
        out.push('\n');
        let fmt_row = |out: &mut String, row: &[T]| {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{:.16e}", v.to_f64_lossy());
            }
            out.push('\n');
        };
        for layer in &self.layers {
            for row in layer.weights.chunks_exact(layer.inputs) {
                fmt_row(&mut out, row);
            }
            fmt_row(&mut out, &layer.bias);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MODEL_HEADER) {
            return Err(Error::ModelFormat(format!("missing `{MODEL_HEADER}` header")));
        }
        let dims = lines
            .next()
            .ok_or_else(|| Error::ModelFormat("missing layer dimensions".into()))?
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| Error::ModelFormat(format!("bad dimension `{t}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut net = Self::zeros(&dims).map_err(|e| Error::ModelFormat(e.to_string()))?;
        let values = lines
            .flat_map(str::split_whitespace)
            .map(|t| {
                t.parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::ModelFormat(format!("bad parameter `{t}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != net.num_params() {
            return Err(Error::ModelFormat(format!(
                "expected {} parameters for dims {dims:?}, found {}",
                net.num_params(),
                values.len()
            )));
        }
        net.set_params(&values)?;
        if !net.is_finite() {
            return Err(Error::ModelFormat("non-finite parameter".into()));
        }
        Ok(net)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let net = QNetwork::<f64>::zeros(&[18, 64, 64, 3]).unwrap();
        assert_eq!(net.forward(&[0.3; 18]).unwrap(), [0.0; 3]);
    }

    #[test]
    fn linear_network_by_hand() {
        let layer = Dense {
            inputs: 2,
            outputs: 3,
            weights: vec![1.0, 2.0, -1.0, 0.5, 0.0, 3.0],
            bias: vec![0.1, -0.2, 0.3],
        };
        let net = QNetwork::from_layers(vec![layer]).unwrap();
        let q = net.forward(&[2.0, -1.0]).unwrap();
        // W x + b = (2 - 2 + 0.1, -2 - 0.5 - 0.2, 0 - 3 + 0.3)
        for (got, want) in q.iter().zip([0.1f64, -2.7, -2.7]) {
            assert!((got - want).abs() < 1e-12, "{q:?}");
        }
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let net = QNetwork::<f64>::zeros(&[4, 3]).unwrap();
        assert!(matches!(
            net.forward(&[1.0; 5]),
            Err(Error::DimensionMismatch { expected: 4, got: 5 })
        ));
        assert!(QNetwork::<f64>::zeros(&[4, 2]).is_err());
    }

    #[test]
    fn batch_matches_single() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let net = QNetwork::<f64>::random(&[5, 8, 3], &mut rng).unwrap();
        let xs: Vec<Vec<f64>> = (0..10)
            .map(|i| (0..5).map(|j| ((i * 5 + j) as f64).sin()).collect())
            .collect();
        let batch = net.forward_batch(&xs).unwrap();
        for (x, q) in xs.iter().zip(batch) {
            assert_eq!(net.forward(x).unwrap(), q);
        }
    }

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus(1000.0f64), 1000.0);
        assert!(softplus(-1000.0f64) >= 0.0);
        assert!((softplus(0.0f64) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn text_format_round_trips_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = QNetwork::<f64>::random(&[6, 5, 3], &mut rng).unwrap();
        let text = net.to_text();
        assert!(text.starts_with("qnet v1\n6 5 3\n"));
        let back = QNetwork::<f64>::from_text(&text).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn malformed_models_are_rejected() {
        assert!(QNetwork::<f64>::from_text("qnet v2\n2 3\n").is_err());
        assert!(QNetwork::<f64>::from_text("qnet v1\n2 3\n1 2 3\n").is_err());
        assert!(QNetwork::<f64>::from_text("qnet v1\n2 3\n1 2 3 4 5 6 7 8 x\n").is_err());
    }
}
