use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};

use super::NetError;
use crate::rng::XorShift64Star;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    Sigmoid,
    Linear,
}

impl Activation {
    pub fn tag(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Linear => "linear",
        }
    }

    fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Relu => z.max(T::zero()),
            Activation::Sigmoid => T::one() / (T::one() + (-z).exp()),
            Activation::Linear => z,
        }
    }

    /// Derivative at pre-activation `z`, given the activation output `a`.
    fn derivative<T: Scalar>(self, z: T, a: T) -> T {
        match self {
            Activation::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Sigmoid => a * (T::one() - a),
            Activation::Linear => T::one(),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "linear" => Ok(Activation::Linear),
            other => Err(format!("unknown activation `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub input_width: usize,
    pub output_width: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(input_width: usize, output_width: usize, activation: Activation) -> Self {
        Self {
            input_width,
            output_width,
            activation,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.input_width * self.output_width + self.output_width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<T> {
    pub activation: Activation,
    /// `output_width x input_width`.
    pub weights: Array2<T>,
    pub biases: Array1<T>,
}

impl<T: Scalar> DenseLayer<T> {
    pub fn zeros(spec: LayerSpec) -> Self {
        Self {
            activation: spec.activation,
            weights: Array2::zeros((spec.output_width, spec.input_width)),
            biases: Array1::zeros(spec.output_width),
        }
    }

    /// Glorot-uniform weights on `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    /// Weights are drawn in row-major order.
    pub fn glorot(spec: LayerSpec, rng: &mut XorShift64Star) -> Self {
        let limit = T::lit((6.0 / (spec.input_width + spec.output_width) as f64).sqrt());
        let mut layer = Self::zeros(spec);
        layer.weights.iter_mut().for_each(|w| *w = rng.uniform(-limit, limit));
        layer
    }

    pub fn spec(&self) -> LayerSpec {
        LayerSpec::new(self.weights.ncols(), self.weights.nrows(), self.activation)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork<T> {
    layers: Vec<DenseLayer<T>>,
    seed: u64,
}

impl<T: Scalar> DenseNetwork<T> {
    /// Randomly initialized network with the given layer chain.
    pub fn new(specs: &[LayerSpec], seed: u64) -> Result<Self, NetError> {
        validate_chain(specs)?;
        let mut rng = XorShift64Star::new(seed);
        let layers = specs.iter().map(|&s| DenseLayer::glorot(s, &mut rng)).collect();
        Ok(Self { layers, seed })
    }

    pub fn from_layers(layers: Vec<DenseLayer<T>>, seed: u64) -> Result<Self, NetError> {
        let specs: Vec<LayerSpec> = layers.iter().map(DenseLayer::spec).collect();
        validate_chain(&specs)?;
        for layer in &layers {
            if layer.biases.len() != layer.weights.nrows() {
                return Err(NetError::ShapeMismatch {
                    what: "bias length",
                    expected: layer.weights.nrows(),
                    found: layer.biases.len(),
                });
            }
        }
        Ok(Self { layers, seed })
    }

    pub fn layers(&self) -> &[DenseLayer<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer<T>] {
        &mut self.layers
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(DenseLayer::spec).collect()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].weights.ncols()
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].weights.nrows()
    }

    /// Width of the first sigmoid layer, which the autoencoder uses as its
    /// bottleneck (one unit per cluster).
    pub fn latent_width(&self) -> Option<usize> {
        self.layers
            .iter()
            .find(|l| l.activation == Activation::Sigmoid)
            .map(|l| l.weights.nrows())
    }

    pub fn parameter_count(&self) -> usize {
        count_parameters(self)
    }

    pub fn forward(&self, batch: ArrayView2<T>) -> Result<(Array2<T>, ForwardCache<T>), NetError> {
        forward(self, batch)
    }
}

fn validate_chain(specs: &[LayerSpec]) -> Result<(), NetError> {
    if specs.is_empty() {
        return Err(NetError::BadConfig("network needs at least one layer"));
    }
    for (index, s) in specs.iter().enumerate() {
        if s.input_width == 0 || s.output_width == 0 {
            return Err(NetError::BadWidth { index });
        }
    }
    for w in specs.windows(2) {
        if w[0].output_width != w[1].input_width {
            return Err(NetError::ShapeMismatch {
                what: "layer chain width",
                expected: w[0].output_width,
                found: w[1].input_width,
            });
        }
    }
    Ok(())
}

/// Encoder/bottleneck/decoder layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutoencoderSpec {
    pub input_width: usize,
    pub encoder_widths: Vec<usize>,
    pub latent_width: usize,
    pub output_width: usize,
}

impl Default for AutoencoderSpec {
    fn default() -> Self {
        Self {
            input_width: 2,
            encoder_widths: vec![100, 50, 20],
            latent_width: 4,
            output_width: 1,
        }
    }
}

impl AutoencoderSpec {
    pub fn with_latent_width(mut self, latent_width: usize) -> Self {
        self.latent_width = latent_width;
        self
    }

    /// ReLU encoder, sigmoid bottleneck, mirrored ReLU decoder, linear output.
    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        let mut widths = vec![self.input_width];
        widths.extend(&self.encoder_widths);
        let mut specs: Vec<LayerSpec> = widths
            .windows(2)
            .map(|w| LayerSpec::new(w[0], w[1], Activation::Relu))
            .collect();
        let last_encoder = *widths.last().expect("input width present");
        specs.push(LayerSpec::new(last_encoder, self.latent_width, Activation::Sigmoid));
        let mut previous = self.latent_width;
        for &w in self.encoder_widths.iter().rev() {
            specs.push(LayerSpec::new(previous, w, Activation::Relu));
            previous = w;
        }
        specs.push(LayerSpec::new(previous, self.output_width, Activation::Linear));
        specs
    }

    pub fn build<T: Scalar>(&self, seed: u64) -> Result<DenseNetwork<T>, NetError> {
        let widths = std::iter::once(self.input_width)
            .chain(self.encoder_widths.iter().copied())
            .chain([self.latent_width, self.output_width]);
        for (index, w) in widths.enumerate() {
            if w == 0 {
                return Err(NetError::BadWidth { index });
            }
        }
        DenseNetwork::new(&self.layer_specs(), seed)
    }
}

pub fn build_autoencoder<T: Scalar>(
    input_width: usize,
    encoder_widths: &[usize],
    latent_width: usize,
    output_width: usize,
    seed: u64,
) -> Result<DenseNetwork<T>, NetError> {
    AutoencoderSpec {
        input_width,
        encoder_widths: encoder_widths.to_vec(),
        latent_width,
        output_width,
    }
    .build(seed)
}

pub fn count_parameters<T: Scalar>(net: &DenseNetwork<T>) -> usize {
    net.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
}

/// Values saved by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    pub input: Array2<T>,
    /// Per layer `batch x output_width` pre-activations.
    pub pre: Vec<Array2<T>>,
    /// Per layer `batch x output_width` activations.
    pub post: Vec<Array2<T>>,
}

pub fn forward<T: Scalar>(
    net: &DenseNetwork<T>,
    batch: ArrayView2<T>,
) -> Result<(Array2<T>, ForwardCache<T>), NetError> {
    if batch.ncols() != net.input_width() {
        return Err(NetError::ShapeMismatch {
            what: "input width",
            expected: net.input_width(),
            found: batch.ncols(),
        });
    }
    if batch.iter().any(|v| !v.is_finite()) {
        return Err(NetError::NonFiniteInput);
    }

    let mut pre = Vec::with_capacity(net.layers.len());
    let mut post: Vec<Array2<T>> = Vec::with_capacity(net.layers.len());
    for layer in &net.layers {
        let input = post.last().map_or(batch, |a| a.view());
        let z = input.dot(&layer.weights.t()) + &layer.biases;
        let act = layer.activation;
        let a = z.mapv(|v| act.apply(v));
        pre.push(z);
        post.push(a);
    }
    let output = post.last().expect("non-empty network").clone();
    Ok((
        output,
        ForwardCache {
            input: batch.to_owned(),
            pre,
            post,
        },
    ))
}

/// Mean over every entry of the squared difference.
pub fn mse_loss<T: Scalar>(pred: ArrayView2<T>, target: ArrayView2<T>) -> Result<T, NetError> {
    check_same_shape(pred, target)?;
    if pred.is_empty() {
        return Err(NetError::EmptyDataset);
    }
    let sum: T = pred.iter().zip(target.iter()).map(|(&p, &t)| (p - t) * (p - t)).sum();
    Ok(sum / T::from_usize_lossy(pred.len()))
}

fn check_same_shape<T>(a: ArrayView2<T>, b: ArrayView2<T>) -> Result<(), NetError> {
    if a.nrows() != b.nrows() {
        return Err(NetError::ShapeMismatch {
            what: "row count",
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    if a.ncols() != b.ncols() {
        return Err(NetError::ShapeMismatch {
            what: "column count",
            expected: a.ncols(),
            found: b.ncols(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient<T> {
    pub weights: Array2<T>,
    pub biases: Array1<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<LayerGradient<T>>,
}

impl<T: Scalar> Gradients<T> {
    pub fn zeros_like(net: &DenseNetwork<T>) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weights: Array2::zeros(l.weights.raw_dim()),
                    biases: Array1::zeros(l.biases.raw_dim()),
                })
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.layers.iter().flat_map(|g| g.weights.iter().chain(g.biases.iter()))
    }
}

/// Analytic gradient of [`mse_loss`] with respect to every weight and bias.
pub fn backward<T: Scalar>(
    net: &DenseNetwork<T>,
    cache: &ForwardCache<T>,
    target: ArrayView2<T>,
) -> Result<Gradients<T>, NetError> {
    if cache.post.len() != net.layers.len() {
        return Err(NetError::ShapeMismatch {
            what: "cached layers",
            expected: net.layers.len(),
            found: cache.post.len(),
        });
    }
    let output = cache.post.last().expect("non-empty network");
    check_same_shape(output.view(), target)?;

    let scale = T::lit(2.0) / T::from_usize_lossy(output.len());
    let mut upstream = (output - &target) * scale;
    let mut grads = Vec::with_capacity(net.layers.len());

    for (idx, layer) in net.layers.iter().enumerate().rev() {
        let act = layer.activation;
        let mut delta = upstream;
        Zip::from(&mut delta)
            .and(&cache.pre[idx])
            .and(&cache.post[idx])
            .for_each(|d, &z, &a| *d *= act.derivative(z, a));

        let layer_input = if idx == 0 { &cache.input } else { &cache.post[idx - 1] };
        grads.push(LayerGradient {
            weights: delta.t().dot(layer_input),
            biases: delta.sum_axis(Axis(0)),
        });
        upstream = delta.dot(&layer.weights);
    }
    grads.reverse();
    Ok(Gradients { layers: grads })
}
