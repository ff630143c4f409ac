//! Online backpropagation of the reconstruction error.
//!
//! The network is auto-associative: the training target is the input itself.
//! Gradients are taken of `L = 1/2 * sum_k (out_k - in_k)^2`; the figure
//! reported per epoch is the per-component mean squared error.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::network::{activation_derivative, Network};

/// Hidden layers learn 10% faster than the output layer.
pub const DEFAULT_HIDDEN_MULTIPLIER: f64 = 1.1;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Output-layer learning rate.
    pub base_rate: f64,
    /// Rate factor applied to every non-output layer.
    pub hidden_multiplier: f64,
    pub max_epochs: usize,
    pub target_mse: f64,
    pub shuffle_seed: u64,
}

impl TrainConfig {
    pub fn new(base_rate: f64, max_epochs: usize) -> Self {
        Self {
            base_rate,
            hidden_multiplier: DEFAULT_HIDDEN_MULTIPLIER,
            max_epochs,
            target_mse: 0.0,
            shuffle_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_rate.is_finite() && self.base_rate > 0.0) {
            return Err(Error::Usage(format!(
                "base rate must be positive, got {}",
                self.base_rate
            )));
        }
        if !(self.hidden_multiplier.is_finite() && self.hidden_multiplier > 0.0) {
            return Err(Error::Usage(format!(
                "hidden multiplier must be positive, got {}",
                self.hidden_multiplier
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::Usage("max_epochs must be at least 1".into()));
        }
        if self.target_mse.is_nan() || self.target_mse < 0.0 {
            return Err(Error::Usage(format!(
                "target MSE must be non-negative, got {}",
                self.target_mse
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// `dL/dW` and `dL/db` for every layer, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradients>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self::filled(net, 0.0)
    }

    pub fn filled(net: &Network, value: f64) -> Self {
        Self {
            layers: net
                .layers()
                .iter()
                .map(|l| LayerGradients {
                    weights: vec![value; l.weights().len()],
                    bias: vec![value; l.bias().len()],
                })
                .collect(),
        }
    }

    /// Gradient components in the network's canonical parameter order.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
    }
}

/// Per-component mean squared error.
pub fn mse(output: &[f64], input: &[f64]) -> Result<f64> {
    if output.len() != input.len() {
        return Err(Error::shape(input.len(), output.len(), "mse operands"));
    }
    if input.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = output
        .iter()
        .zip(input)
        .map(|(o, i)| (o - i) * (o - i))
        .sum();
    Ok(sum / input.len() as f64)
}

/// The loss backpropagation differentiates: half the summed squared error.
pub fn half_squared_error(net: &Network, input: &[f64]) -> Result<f64> {
    let out = net.reconstruct(input)?;
    Ok(0.5
        * out
            .iter()
            .zip(input)
            .map(|(o, i)| (o - i) * (o - i))
            .sum::<f64>())
}

pub fn backprop_gradients(net: &Network, input: &[f64]) -> Result<Gradients> {
    Ok(backprop_with_output(net, input)?.0)
}

/// Gradients plus the reconstruction computed on the way.
fn backprop_with_output(net: &Network, input: &[f64]) -> Result<(Gradients, Vec<f64>)> {
    let acts = net.forward(input)?;
    let layers = net.layers();
    let mut grads = Gradients::zeros_like(net);

    // delta_j = dL/d(net input of unit j) for the current layer.
    let mut delta: Vec<f64> = acts
        .reconstruction()
        .iter()
        .zip(input)
        .map(|(&o, &t)| (o - t) * activation_derivative(o))
        .collect();

    for l in (0..layers.len()).rev() {
        let upstream = acts.layer_output(l);
        let g = &mut grads.layers[l];
        let fan_in = layers[l].inputs();
        for (j, &d) in delta.iter().enumerate() {
            g.bias[j] = d;
            for (gw, &a) in g.weights[j * fan_in..(j + 1) * fan_in]
                .iter_mut()
                .zip(upstream)
            {
                *gw = d * a;
            }
        }
        if l > 0 {
            delta = (0..fan_in)
                .map(|k| {
                    let back: f64 = delta
                        .iter()
                        .enumerate()
                        .map(|(j, &d)| d * layers[l].weight(j, k))
                        .sum();
                    back * activation_derivative(upstream[k])
                })
                .collect();
        }
    }
    let output = acts.outputs.last().expect("network has layers").clone();
    Ok((grads, output))
}

/// Gradient-descent update: the output layer moves by `base_rate * g`,
/// every other layer by `base_rate * hidden_multiplier * g`.
pub fn sgd_step(net: &mut Network, grads: &Gradients, cfg: &TrainConfig) -> Result<()> {
    let congruent =
        grads.layers.len() == net.layers().len()
            && grads.layers.iter().zip(net.layers()).all(|(g, l)| {
                g.weights.len() == l.weights().len() && g.bias.len() == l.bias().len()
            });
    if !congruent {
        return Err(Error::Validation(
            "gradients are not shaped like the network".into(),
        ));
    }
    if let Some(bad) = grads.values().find(|g| !g.is_finite()) {
        return Err(Error::Numeric(format!("non-finite gradient {bad}")));
    }
    let last = net.layers().len() - 1;
    for (l, (layer, g)) in net.layers_mut().iter_mut().zip(&grads.layers).enumerate() {
        let rate = if l == last {
            cfg.base_rate
        } else {
            cfg.base_rate * cfg.hidden_multiplier
        };
        for (w, dw) in layer.weights.iter_mut().zip(&g.weights) {
            *w -= rate * dw;
        }
        for (b, db) in layer.bias.iter_mut().zip(&g.bias) {
            *b -= rate * db;
        }
    }
    Ok(())
}

/// Presentation order for one epoch: a permutation of `0..len` drawn from
/// ChaCha8 seeded with `shuffle_seed`, on stream `epoch_index`.
pub fn epoch_order(len: usize, shuffle_seed: u64, epoch_index: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
    rng.set_stream(epoch_index);
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut rng);
    order
}

fn check_dataset<V: AsRef<[f64]>>(net: &Network, data: &[V]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Usage("training set is empty".into()));
    }
    let n = net.architecture().input_size();
    if let Some(bad) = data.iter().find(|v| v.as_ref().len() != n) {
        return Err(Error::shape(n, bad.as_ref().len(), "training sample"));
    }
    Ok(())
}

/// One pass over `data` with a per-sample update. Returns the mean of the
/// per-sample MSE measured before each sample's update.
pub fn train_epoch<V: AsRef<[f64]>>(
    net: &mut Network,
    data: &[V],
    cfg: &TrainConfig,
    epoch_index: u64,
) -> Result<f64> {
    cfg.validate()?;
    check_dataset(net, data)?;
    let mut total = 0.0;
    for i in epoch_order(data.len(), cfg.shuffle_seed, epoch_index) {
        let input = data[i].as_ref();
        let (grads, output) = backprop_with_output(net, input)?;
        total += mse(&output, input)?;
        sgd_step(net, &grads, cfg)?;
    }
    Ok(total / data.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    TargetReached,
    EpochBudget,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::TargetReached => "target_reached",
            StopReason::EpochBudget => "epoch_budget",
        })
    }
}

impl FromStr for StopReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "target_reached" => Ok(StopReason::TargetReached),
            "epoch_budget" => Ok(StopReason::EpochBudget),
            other => Err(Error::Format(format!("unknown stop reason {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean MSE of each completed epoch.
    pub epoch_mse: Vec<f64>,
    pub stop: StopReason,
}

impl TrainReport {
    pub fn epochs(&self) -> usize {
        self.epoch_mse.len()
    }

    pub fn final_mse(&self) -> f64 {
        *self.epoch_mse.last().expect("at least one epoch")
    }

    /// `epoch,mse` per line (1-based epochs), then `stop,<reason>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, m) in self.epoch_mse.iter().enumerate() {
            out.push_str(&format!("{},{m:e}\n", i + 1));
        }
        out.push_str(&format!("stop,{}\n", self.stop));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut epoch_mse = Vec::new();
        let mut stop = None;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            if stop.is_some() {
                return Err(Error::Format("data after stop line".into()));
            }
            let (key, value) = line
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("bad report line {line:?}")))?;
            if key == "stop" {
                stop = Some(value.parse()?);
                continue;
            }
            let epoch: usize = key
                .parse()
                .map_err(|_| Error::Format(format!("bad epoch {key:?}")))?;
            if epoch != epoch_mse.len() + 1 {
                return Err(Error::Format(format!("epoch {epoch} out of sequence")));
            }
            epoch_mse.push(
                value
                    .parse()
                    .map_err(|_| Error::Format(format!("bad mse {value:?}")))?,
            );
        }
        let stop = stop.ok_or_else(|| Error::Truncation("report has no stop line".into()))?;
        if epoch_mse.is_empty() {
            return Err(Error::Truncation("report has no epochs".into()));
        }
        Ok(Self { epoch_mse, stop })
    }
}

/// Runs epochs until the epoch MSE reaches `target_mse` or `max_epochs` pass.
pub fn train<V: AsRef<[f64]>>(
    net: &mut Network,
    data: &[V],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    check_dataset(net, data)?;
    let mut epoch_mse = Vec::new();
    for epoch in 0..cfg.max_epochs {
        let m = train_epoch(net, data, cfg, epoch as u64)?;
        epoch_mse.push(m);
        if m <= cfg.target_mse {
            return Ok(TrainReport {
                epoch_mse,
                stop: StopReason::TargetReached,
            });
        }
    }
    Ok(TrainReport {
        epoch_mse,
        stop: StopReason::EpochBudget,
    })
}

/// Magnitude below which the discrepancy is compared absolutely.
const RELATIVE_FLOOR: f64 = 1e-8;

/// Compares backpropagated gradients against central differences of the
/// half-squared-error loss, perturbing each parameter by `±epsilon`.
/// Returns the largest relative discrepancy (absolute when both sides are
/// below `1e-8`).
///
/// The perturbed losses are evaluated in double-double precision so the
/// reference gradient is limited by the `O(epsilon²)` truncation of the
/// difference rather than by `f64` rounding in the loss.
pub fn finite_difference_check(net: &Network, input: &[f64], epsilon: f64) -> Result<f64> {
    Ok(finite_difference_errors(net, input, epsilon)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Per-parameter discrepancies behind [`finite_difference_check`], in
/// parameter order (per layer: weights row-major, then bias).
pub fn finite_difference_errors(net: &Network, input: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Usage(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let analytic: Vec<f64> = backprop_gradients(net, input)?.values().collect();
    let params: Vec<f64> = net.parameters().collect();
    let error_at = |i: usize| {
        let plus = perturbed_loss(net, input, i, Dd::from(params[i]) + Dd::from(epsilon));
        let minus = perturbed_loss(net, input, i, Dd::from(params[i]) - Dd::from(epsilon));
        let numeric = ((plus - minus) / Dd::from(2.0 * epsilon)).to_f64();
        relative_error(analytic[i], numeric)
    };
    #[cfg(feature = "parallel")]
    let errors = {
        use rayon::prelude::*;
        (0..params.len()).into_par_iter().map(error_at).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let errors = (0..params.len()).map(error_at).collect();
    Ok(errors)
}

/// Half-squared-error loss in double-double, with parameter `index`
/// replaced by `value`. Shapes have already been checked by backprop.
fn perturbed_loss(net: &Network, input: &[f64], index: usize, value: Dd) -> Dd {
    let mut offset = 0;
    let mut x: Vec<Dd> = input.iter().map(|&v| Dd::from(v)).collect();
    for layer in net.layers() {
        let param = |k: usize, stored: f64| {
            if offset + k == index {
                value
            } else {
                Dd::from(stored)
            }
        };
        let n_in = layer.inputs();
        let bias_at = layer.weights.len();
        x = (0..layer.outputs())
            .map(|j| {
                let row = &layer.weights[j * n_in..(j + 1) * n_in];
                let sum = row
                    .iter()
                    .zip(&x)
                    .enumerate()
                    .fold(param(bias_at + j, layer.bias[j]), |acc, (k, (&w, &xi))| {
                        acc + param(j * n_in + k, w) * xi
                    });
                sum.activation()
            })
            .collect();
        offset += bias_at + layer.bias.len();
    }
    let sum = x.iter().zip(input).fold(Dd::ZERO, |acc, (&o, &t)| {
        let d = o - Dd::from(t);
        acc + d * d
    });
    sum * Dd::from(0.5)
}

pub(crate) fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    let diff = (a - b).abs();
    if scale < RELATIVE_FLOOR {
        diff
    } else {
        diff / scale
    }
}
