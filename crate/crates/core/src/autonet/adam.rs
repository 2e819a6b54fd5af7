use ndarray::Zip;

use super::{DenseNetwork, Gradients, NetError};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
}

impl<T: Scalar> Default for AdamConfig<T> {
    fn default() -> Self {
        Self {
            learning_rate: T::lit(0.001),
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            epsilon: T::lit(1e-8),
        }
    }
}

/// Adam optimizer state: moment estimates shaped like the network parameters
/// plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub config: AdamConfig<T>,
    first: Gradients<T>,
    second: Gradients<T>,
    step: u64,
}

impl<T: Scalar> Adam<T> {
    pub fn new(net: &DenseNetwork<T>, config: AdamConfig<T>) -> Self {
        Self {
            config,
            first: Gradients::zeros_like(net),
            second: Gradients::zeros_like(net),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moments(&self) -> &Gradients<T> {
        &self.first
    }

    pub fn second_moments(&self) -> &Gradients<T> {
        &self.second
    }

    /// One bias-corrected update:
    /// `m = b1 m + (1-b1) g`, `v = b2 v + (1-b2) g^2`,
    /// `p -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)`.
    pub fn step(&mut self, net: &mut DenseNetwork<T>, grads: &Gradients<T>) -> Result<(), NetError> {
        self.check_shapes(net, grads)?;
        self.step += 1;
        let AdamConfig {
            learning_rate: lr,
            beta1: b1,
            beta2: b2,
            epsilon: eps,
        } = self.config;
        let one = T::one();
        let t = i32::try_from(self.step).unwrap_or(i32::MAX);
        let m_correction = one - b1.powi(t);
        let v_correction = one - b2.powi(t);

        let update = |p: &mut T, m: &mut T, v: &mut T, g: &T| {
            *m = b1 * *m + (one - b1) * *g;
            *v = b2 * *v + (one - b2) * *g * *g;
            let m_hat = *m / m_correction;
            let v_hat = *v / v_correction;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        };

        for (((layer, m), v), g) in net
            .layers_mut()
            .iter_mut()
            .zip(&mut self.first.layers)
            .zip(&mut self.second.layers)
            .zip(&grads.layers)
        {
            Zip::from(&mut layer.weights)
                .and(&mut m.weights)
                .and(&mut v.weights)
                .and(&g.weights)
                .for_each(update);
            Zip::from(&mut layer.biases)
                .and(&mut m.biases)
                .and(&mut v.biases)
                .and(&g.biases)
                .for_each(update);
        }
        Ok(())
    }

    fn check_shapes(&self, net: &DenseNetwork<T>, grads: &Gradients<T>) -> Result<(), NetError> {
        if grads.layers.len() != net.layers().len() || self.first.layers.len() != net.layers().len() {
            return Err(NetError::ShapeMismatch {
                what: "gradient layers",
                expected: net.layers().len(),
                found: grads.layers.len(),
            });
        }
        for ((layer, g), m) in net.layers().iter().zip(&grads.layers).zip(&self.first.layers) {
            for (expected, found) in [
                (layer.weights.len(), g.weights.len()),
                (layer.weights.len(), m.weights.len()),
                (layer.biases.len(), g.biases.len()),
                (layer.biases.len(), m.biases.len()),
            ] {
                if expected != found || layer.weights.dim() != g.weights.dim() {
                    return Err(NetError::ShapeMismatch {
                        what: "gradient shape",
                        expected,
                        found,
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autonet::{Activation, DenseLayer};
    use ndarray::array;

    fn scalar_net(w: f64) -> DenseNetwork<f64> {
        DenseNetwork::from_layers(
            vec![DenseLayer {
                activation: Activation::Linear,
                weights: array![[w]],
                biases: array![0.0],
            }],
            0,
        )
        .unwrap()
    }

    fn scalar_grad(g: f64) -> Gradients<f64> {
        Gradients {
            layers: vec![crate::autonet::LayerGradient {
                weights: array![[g]],
                biases: array![0.0],
            }],
        }
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut net = scalar_net(0.42);
        let mut adam = Adam::new(&net, AdamConfig::default());
        adam.step(&mut net, &scalar_grad(0.0)).unwrap();
        assert_eq!(net.layers()[0].weights[[0, 0]], 0.42);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        for g in [3.0, -0.02, 1e-3] {
            let mut net = scalar_net(1.0);
            let mut adam = Adam::new(&net, AdamConfig::default());
            adam.step(&mut net, &scalar_grad(g)).unwrap();
            // m_hat = g and v_hat = g^2 at t = 1.
            let expected = 1.0 - 0.001 * g / (g.abs() + 1e-8);
            assert!((net.layers()[0].weights[[0, 0]] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn mismatched_gradients_rejected() {
        let mut net = scalar_net(1.0);
        let mut adam = Adam::new(&net, AdamConfig::default());
        let bad = Gradients { layers: vec![] };
        assert!(matches!(adam.step(&mut net, &bad), Err(NetError::ShapeMismatch { .. })));
        assert_eq!(adam.step_count(), 0);
    }
}
