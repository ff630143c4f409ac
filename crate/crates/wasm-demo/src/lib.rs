//! Browser demo for mirroring networks.
//!
//! [`Lab`] holds a small two-class synthetic dataset and, once trained, a
//! calibrated bank with one network per class. The page drives three
//! operations through [`Demo`]: draw a fresh dataset, train the bank, and
//! mirror a pattern (a dataset sample or one painted by hand) through every
//! network to see the reconstructions and which network claims it.

use mnn::dispatcher::{dispatch, BankEntry, DispatchResult, NetworkBank};
use mnn::network::{Architecture, Network};
use mnn::preprocess::{preprocess_image, GrayImage, InputVector};
use mnn::recognizer::{calibrate_thresholds, class_mean, RecognizerProfile};
use mnn::synth::{generate, SynthConfig};
use mnn::trainer::{train, TrainConfig};
use mnn::{Error, Result};
use wasm_bindgen::prelude::*;

/// Images are `SIZE x SIZE`.
pub const SIZE: usize = 12;
pub const CLASSES: usize = 2;
pub const PER_CLASS: usize = 40;
/// Samples `[0, TRAIN_END)` train, `[TRAIN_END, CALIBRATE_END)` calibrate,
/// the rest are held out.
pub const TRAIN_END: usize = 24;
pub const CALIBRATE_END: usize = 32;
const CODE_SIZE: usize = 16;
const RATE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSummary {
    pub label: String,
    pub initial_mse: f64,
    pub final_mse: f64,
    pub tau_sig: f64,
    pub tau_rec: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mirror {
    /// One reconstruction per bank entry, in bank order.
    pub reconstructions: Vec<GrayImage>,
    pub result: DispatchResult,
}

#[derive(Debug, Clone)]
pub struct Lab {
    seed: u64,
    labels: Vec<String>,
    images: Vec<Vec<GrayImage>>,
    inputs: Vec<Vec<InputVector>>,
    bank: Option<NetworkBank>,
}

impl Lab {
    pub fn new(seed: u64) -> Result<Self> {
        let classes = generate(&SynthConfig {
            classes: CLASSES,
            per_class: PER_CLASS,
            size: SIZE,
            seed,
        })?;
        let inputs = classes
            .iter()
            .map(|c| c.samples.iter().map(preprocess_image).collect())
            .collect::<Result<_>>()?;
        Ok(Lab {
            seed,
            labels: classes.iter().map(|c| c.name.clone()).collect(),
            images: classes.into_iter().map(|c| c.samples).collect(),
            inputs,
            bank: None,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn sample(&self, class: usize, index: usize) -> Result<&GrayImage> {
        self.images
            .get(class)
            .and_then(|c| c.get(index))
            .ok_or_else(|| {
                Error::Usage(format!(
                    "no sample {index} in class {class} ({CLASSES} classes of {PER_CLASS})"
                ))
            })
    }

    pub fn is_trained(&self) -> bool {
        self.bank.is_some()
    }

    /// Trains one network per class on its training split and calibrates
    /// it against its own calibration split and the other classes'
    /// training samples. Replaces any previous bank.
    pub fn train(&mut self, epochs: usize) -> Result<Vec<ClassSummary>> {
        let n = SIZE * SIZE;
        let arch = Architecture::new(&[n, CODE_SIZE, n])?;
        let cfg = TrainConfig {
            shuffle_seed: self.seed,
            ..TrainConfig::new(RATE, epochs)
        };
        let mut entries = Vec::with_capacity(CLASSES);
        let mut summaries = Vec::with_capacity(CLASSES);
        for (k, label) in self.labels.iter().enumerate() {
            let own = &self.inputs[k];
            let mut net = Network::init_weights(arch.clone(), self.seed + 1 + k as u64);
            let report = train(&mut net, &own[..TRAIN_END], &cfg)?;
            let mean = class_mean(&net, &own[..TRAIN_END])?;
            let negatives: Vec<&InputVector> = self
                .inputs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .flat_map(|(_, c)| &c[..TRAIN_END])
                .collect();
            let positives: Vec<&InputVector> = own[TRAIN_END..CALIBRATE_END].iter().collect();
            let cal = calibrate_thresholds(&net, &mean, &positives, &negatives)?;
            summaries.push(ClassSummary {
                label: label.clone(),
                initial_mse: report.epoch_mse.first().copied().unwrap_or(f64::NAN),
                final_mse: report.final_mse(),
                tau_sig: cal.tau_sig,
                tau_rec: cal.tau_rec,
            });
            entries.push(BankEntry {
                label: label.clone(),
                network: net,
                profile: RecognizerProfile::new(mean, cal.tau_sig, cal.tau_rec)?,
            });
        }
        self.bank = Some(NetworkBank::new(entries)?);
        Ok(summaries)
    }

    /// Runs `image` through every network in the bank.
    pub fn mirror(&self, image: &GrayImage) -> Result<Mirror> {
        let bank = self
            .bank
            .as_ref()
            .ok_or_else(|| Error::Usage("train the bank before mirroring".into()))?;
        let input = preprocess_image(image)?;
        let reconstructions = bank
            .entries()
            .iter()
            .map(|e| {
                let out = e.network.reconstruct(input.as_slice())?;
                GrayImage::from_unit_range(image.width(), image.height(), &out)
            })
            .collect::<Result<_>>()?;
        Ok(Mirror {
            reconstructions,
            result: dispatch(bank, input.as_slice())?,
        })
    }
}

/// Grayscale bytes, row-major, for drawing on a canvas.
pub fn to_bytes(image: &GrayImage) -> Vec<u8> {
    image
        .intensities()
        .iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect()
}

fn js(err: Error) -> JsError {
    JsError::new(&err.to_string())
}

#[wasm_bindgen]
pub struct Demo {
    lab: Lab,
}

#[wasm_bindgen]
impl Demo {
    /// Draws a fresh two-class dataset; the bank starts untrained.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> Result<Demo, JsError> {
        Ok(Demo {
            lab: Lab::new(u64::from(seed)).map_err(js)?,
        })
    }

    pub fn size() -> usize {
        SIZE
    }

    pub fn per_class() -> usize {
        PER_CLASS
    }

    pub fn first_held_out() -> usize {
        CALIBRATE_END
    }

    pub fn label(&self, class: usize) -> Option<String> {
        self.lab.labels().get(class).cloned()
    }

    pub fn sample(&self, class: usize, index: usize) -> Result<Vec<u8>, JsError> {
        Ok(to_bytes(self.lab.sample(class, index).map_err(js)?))
    }

    pub fn trained(&self) -> bool {
        self.lab.is_trained()
    }

    /// Trains and calibrates the bank; returns one summary line per class.
    pub fn train(&mut self, epochs: usize) -> Result<String, JsError> {
        let summaries = self.lab.train(epochs).map_err(js)?;
        Ok(summaries
            .iter()
            .map(|s| {
                format!(
                    "{}: mse {:.4e} -> {:.4e}, tau_sig {:.4}, tau_rec {:.4}",
                    s.label, s.initial_mse, s.final_mse, s.tau_sig, s.tau_rec
                )
            })
            .collect::<Vec<_>>()
            .join("\n"))
    }

    /// Mirrors `SIZE * SIZE` grayscale bytes through the bank.
    pub fn mirror(&self, pixels: &[u8]) -> Result<MirrorView, JsError> {
        let image = GrayImage::new(SIZE, SIZE, pixels.iter().map(|&p| f64::from(p)).collect())
            .map_err(js)?;
        let mirror = self.lab.mirror(&image).map_err(js)?;
        Ok(MirrorView { mirror })
    }
}

#[wasm_bindgen]
pub struct MirrorView {
    mirror: Mirror,
}

#[wasm_bindgen]
impl MirrorView {
    pub fn reconstruction(&self, entry: usize) -> Option<Vec<u8>> {
        self.mirror.reconstructions.get(entry).map(to_bytes)
    }

    pub fn winner(&self) -> Option<String> {
        self.mirror.result.winner.clone()
    }

    /// One line per network: distances, verdict and score.
    pub fn report(&self) -> String {
        self.mirror
            .result
            .records
            .iter()
            .map(|r| {
                format!(
                    "{}: d_sig {:.4}, d_rec {:.4}, {}, score {:.3}",
                    r.label,
                    r.d_sig,
                    r.d_rec,
                    if r.accepted { "ACCEPT" } else { "REJECT" },
                    r.score
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}
