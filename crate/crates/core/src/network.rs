//! Converging-diverging network definition and forward evaluation.
//!
//! Every interior layer is a set of adalines: a weighted sum of the previous
//! layer's outputs plus a bias, passed through `tanh(x / 2)`. Weight matrices
//! are stored row-major with shape `(size[l], size[l - 1])`.

use std::fmt;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::error::{Error, Result};

/// Half-width of the uniform range initial weights and biases are drawn from.
pub const INIT_RANGE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArchitectureError {
    #[error("need at least 3 layers (input, hidden, output), got {0}")]
    TooFewLayers(usize),
    #[error("layer {index} has size 0")]
    EmptyLayer { index: usize },
    #[error("output size {output} differs from input size {input}")]
    EndpointMismatch { input: usize, output: usize },
    #[error("smallest interior size {size} occurs more than once")]
    NonUniqueMinimum { size: usize },
    #[error("layer {index} does not shrink toward the code layer")]
    NotConverging { index: usize },
    #[error("layer {index} does not grow toward the output layer")]
    NotDiverging { index: usize },
    #[error("cannot parse layer list {0:?}")]
    Parse(String),
}

/// Validated layer sizes: strictly decreasing from the input to a unique
/// smallest code layer, then strictly increasing back to the input size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    sizes: Vec<usize>,
    code_layer: usize,
}

impl Architecture {
    pub fn new(sizes: &[usize]) -> Result<Self, ArchitectureError> {
        if sizes.len() < 3 {
            return Err(ArchitectureError::TooFewLayers(sizes.len()));
        }
        if let Some(index) = sizes.iter().position(|&s| s == 0) {
            return Err(ArchitectureError::EmptyLayer { index });
        }
        let (input, output) = (sizes[0], sizes[sizes.len() - 1]);
        if input != output {
            return Err(ArchitectureError::EndpointMismatch { input, output });
        }
        let interior = &sizes[1..sizes.len() - 1];
        let smallest = *interior.iter().min().expect("at least one interior layer");
        if interior.iter().filter(|&&s| s == smallest).count() > 1 {
            return Err(ArchitectureError::NonUniqueMinimum { size: smallest });
        }
        let code_layer = 1 + interior
            .iter()
            .position(|&s| s == smallest)
            .expect("minimum is present");
        if let Some(i) = (1..=code_layer).find(|&i| sizes[i] >= sizes[i - 1]) {
            return Err(ArchitectureError::NotConverging { index: i });
        }
        if let Some(i) = (code_layer + 1..sizes.len()).find(|&i| sizes[i] <= sizes[i - 1]) {
            return Err(ArchitectureError::NotDiverging { index: i });
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            code_layer,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_size(&self) -> usize {
        self.sizes[0]
    }

    /// Index (into `sizes`) of the least-dimensional layer.
    pub fn code_layer(&self) -> usize {
        self.code_layer
    }

    pub fn code_size(&self) -> usize {
        self.sizes[self.code_layer]
    }

    /// Number of weighted layers (everything except the input).
    pub fn depth(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn parameter_count(&self) -> usize {
        self.sizes.windows(2).map(|w| w[1] * (w[0] + 1)).sum()
    }
}

impl std::str::FromStr for Architecture {
    type Err = ArchitectureError;

    /// Parses a comma-separated list such as `"25,10,6,3,8,25"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let sizes = s
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| ArchitectureError::Parse(s.to_string()))?;
        Self::new(&sizes)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sizes.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// One weighted layer: `weights` is `outputs x inputs`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    inputs: usize,
    outputs: usize,
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// Weight connecting input `k` to unit `j`.
    pub fn weight(&self, j: usize, k: usize) -> f64 {
        self.weights[j * self.inputs + k]
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.weights[j * self.inputs..(j + 1) * self.inputs]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    architecture: Architecture,
    layers: Vec<Layer>,
}

impl Network {
    /// A network with every weight and bias set to zero.
    pub fn zeros(architecture: Architecture) -> Self {
        let layers = architecture
            .sizes()
            .windows(2)
            .map(|w| Layer::zeros(w[0], w[1]))
            .collect();
        Self {
            architecture,
            layers,
        }
    }

    /// Draws every parameter i.i.d. from `U[-0.2, 0.2]` using ChaCha8 seeded
    /// with `seed`. Fill order is layer by layer, the weight matrix row-major
    /// and then the bias vector.
    pub fn init_weights(architecture: Architecture, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Uniform::new_inclusive(-INIT_RANGE, INIT_RANGE);
        let mut net = Self::zeros(architecture);
        for layer in &mut net.layers {
            for w in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
                *w = dist.sample(&mut rng);
            }
        }
        net
    }

    /// Rebuilds a network from parameters in canonical order (see
    /// [`Network::parameters`]).
    pub fn from_parameters(architecture: Architecture, params: &[f64]) -> Result<Self> {
        let expected = architecture.parameter_count();
        if params.len() != expected {
            return Err(Error::shape(expected, params.len(), "network parameters"));
        }
        if let Some(bad) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::Numeric(format!("non-finite parameter {bad}")));
        }
        let mut net = Self::zeros(architecture);
        let mut rest = params;
        for layer in &mut net.layers {
            let (w, tail) = rest.split_at(layer.weights.len());
            let (b, tail) = tail.split_at(layer.bias.len());
            layer.weights.copy_from_slice(w);
            layer.bias.copy_from_slice(b);
            rest = tail;
        }
        Ok(net)
    }

    pub fn architecture(&self) -> &Architecture {
        &self.architecture
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    /// All parameters in canonical order: per layer, weights row-major then
    /// biases.
    pub fn parameters(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        let expected = self.architecture.input_size();
        if input.len() != expected {
            return Err(Error::shape(expected, input.len(), "network input"));
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Activations> {
        self.check_input(input)?;
        let mut net_inputs = Vec::with_capacity(self.layers.len());
        let mut outputs: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let prev = outputs.last().map_or(input, Vec::as_slice);
            let net: Vec<f64> = (0..layer.outputs)
                .map(|j| layer.bias[j] + dot(layer.row(j), prev))
                .collect();
            outputs.push(net.iter().map(|&x| activation(x)).collect());
            net_inputs.push(net);
        }
        Ok(Activations {
            input: input.to_vec(),
            net_inputs,
            outputs,
        })
    }

    /// The mirrored input: output-layer activations.
    pub fn reconstruct(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut acts = self.forward(input)?;
        Ok(acts.outputs.pop().expect("network has layers"))
    }

    /// Activations of the least-dimensional hidden layer.
    pub fn signature(&self, input: &[f64]) -> Result<Signature> {
        self.check_input(input)?;
        let mut current = input.to_vec();
        for layer in &self.layers[..self.architecture.code_layer()] {
            current = (0..layer.outputs)
                .map(|j| activation(layer.bias[j] + dot(layer.row(j), &current)))
                .collect();
        }
        Ok(Signature(current))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-layer net inputs and adaline outputs from one forward pass. Index `l`
/// of `net_inputs`/`outputs` is the `l + 1`-th layer of the architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    pub input: Vec<f64>,
    pub net_inputs: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

impl Activations {
    /// Output of layer `index` in architecture numbering (0 is the input).
    pub fn layer_output(&self, index: usize) -> &[f64] {
        if index == 0 {
            &self.input
        } else {
            &self.outputs[index - 1]
        }
    }

    pub fn reconstruction(&self) -> &[f64] {
        self.outputs.last().expect("network has layers")
    }
}

/// Code-layer activations: the reduced-dimension characteristic vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature(pub Vec<f64>);

impl Signature {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[f64]> for Signature {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// `tanh(x / 2)`, equivalently `(1 - e^-x) / (1 + e^-x)`.
pub fn activation(x: f64) -> f64 {
    (x / 2.0).tanh()
}

/// Derivative of [`activation`] written in terms of its output `y`:
/// `(1 - y^2) / 2`.
pub fn activation_derivative(y: f64) -> f64 {
    (1.0 - y * y) / 2.0
}
