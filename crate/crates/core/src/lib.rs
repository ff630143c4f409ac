//! Mirroring neural networks.
//!
//! A mirroring network is an autoencoder whose layer sizes shrink from the
//! input to a single smallest *code* layer and grow back to the input size.
//! Trained to reproduce its input, the code-layer activations serve as a
//! compact signature of the pattern. Recognition accepts a pattern when its
//! signature is close to the class mean and the network reconstructs it
//! well; a [`dispatcher::NetworkBank`] runs several class networks side by
//! side and names the best mirror.
//!
//! ```
//! use mnn::{network::{Architecture, Network}, trainer::{train, TrainConfig}};
//!
//! let arch: Architecture = "6,3,6".parse()?;
//! let mut net = Network::init_weights(arch, 7);
//! let pattern = vec![0.5, -0.5, 0.25, 0.0, -0.75, 0.9];
//! let report = train(&mut net, &[pattern.clone()], &TrainConfig::new(0.1, 200))?;
//! assert!(report.final_mse() < report.epoch_mse[0]);
//! assert_eq!(net.signature(&pattern)?.len(), 3);
//! # Ok::<(), mnn::Error>(())
//! ```

mod dd;
pub mod dispatcher;
pub mod error;
pub mod model_store;
pub mod network;
pub mod preprocess;
pub mod recognizer;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
