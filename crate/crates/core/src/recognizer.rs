//! Two-threshold recognition on top of a trained mirroring network.
//!
//! A pattern is accepted when its signature lies close to the class's mean
//! signature and the network mirrors it well. Both distances are Euclidean
//! distances between unit-normalized vectors.

use crate::error::{Error, Result};
use crate::network::{Network, Signature};

#[derive(Debug, Clone, PartialEq)]
pub struct RecognizerProfile {
    pub mean_signature: Vec<f64>,
    pub tau_sig: f64,
    pub tau_rec: f64,
}

impl RecognizerProfile {
    pub fn new(mean_signature: Vec<f64>, tau_sig: f64, tau_rec: f64) -> Result<Self> {
        for (name, tau) in [("tau_sig", tau_sig), ("tau_rec", tau_rec)] {
            if !(tau.is_finite() && tau >= 0.0) {
                return Err(Error::Validation(format!(
                    "{name} must be a non-negative number, got {tau}"
                )));
            }
        }
        if let Some(bad) = mean_signature.iter().find(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "mean signature component {bad} is not finite"
            )));
        }
        Ok(Self {
            mean_signature,
            tau_sig,
            tau_rec,
        })
    }

    /// Checks that the profile belongs with `net`.
    pub fn check_network(&self, net: &Network) -> Result<()> {
        let code = net.architecture().code_size();
        if self.mean_signature.len() != code {
            return Err(Error::Validation(format!(
                "mean signature has {} components, network code layer has {code}",
                self.mean_signature.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub accepted: bool,
    pub d_sig: f64,
    pub d_rec: f64,
}

impl Decision {
    /// Threshold rule; a distance equal to its threshold is accepted.
    pub fn new(d_sig: f64, d_rec: f64, tau_sig: f64, tau_rec: f64) -> Self {
        Self {
            accepted: d_sig <= tau_sig && d_rec <= tau_rec,
            d_sig,
            d_rec,
        }
    }
}

pub fn average_signature(signatures: &[Signature]) -> Result<Vec<f64>> {
    let first = signatures
        .first()
        .ok_or_else(|| Error::Usage("cannot average an empty signature list".into()))?;
    let n = first.len();
    let mut mean = vec![0.0; n];
    for s in signatures {
        if s.len() != n {
            return Err(Error::shape(n, s.len(), "signature"));
        }
        for (m, v) in mean.iter_mut().zip(s.as_slice()) {
            *m += v;
        }
    }
    let count = signatures.len() as f64;
    mean.iter_mut().for_each(|m| *m /= count);
    Ok(mean)
}

/// Mean signature of `data` under `net`.
pub fn class_mean<V: AsRef<[f64]>>(net: &Network, data: &[V]) -> Result<Vec<f64>> {
    let signatures = data
        .iter()
        .map(|v| net.signature(v.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    average_signature(&signatures)
}

/// Euclidean distance after scaling both vectors to unit norm. A zero
/// vector stays zero.
pub fn normalized_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::shape(a.len(), b.len(), "distance operands"));
    }
    let norm = |v: &[f64]| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            n
        } else {
            1.0
        }
    };
    let (na, nb) = (norm(a), norm(b));
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x / na - y / nb;
            d * d
        })
        .sum::<f64>()
        .sqrt())
}

pub fn signature_distance(s: &Signature, mean: &[f64]) -> Result<f64> {
    normalized_distance(s.as_slice(), mean)
}

pub fn reconstruction_distance(input: &[f64], output: &[f64]) -> Result<f64> {
    normalized_distance(input, output)
}

/// `(d_sig, d_rec)` for one input.
pub fn distances(net: &Network, mean: &[f64], input: &[f64]) -> Result<(f64, f64)> {
    let acts = net.forward(input)?;
    let code = net.architecture().code_layer();
    let d_sig = normalized_distance(acts.layer_output(code), mean)?;
    let d_rec = reconstruction_distance(input, acts.reconstruction())?;
    Ok((d_sig, d_rec))
}

pub fn classify(profile: &RecognizerProfile, net: &Network, input: &[f64]) -> Result<Decision> {
    let (d_sig, d_rec) = distances(net, &profile.mean_signature, input)?;
    Ok(Decision::new(
        d_sig,
        d_rec,
        profile.tau_sig,
        profile.tau_rec,
    ))
}

/// Outcome of a threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub tau_sig: f64,
    pub tau_rec: f64,
    /// Fraction of positives accepted plus negatives rejected, over all samples.
    pub accuracy: f64,
    pub false_accepts: usize,
}

/// Chooses the threshold pair, from observed distances, that maximizes
/// accuracy over positives and negatives. Ties go to fewer false accepts,
/// then to the lexicographically smaller `(tau_sig, tau_rec)`.
///
/// Each sample is a `(d_sig, d_rec)` pair.
pub fn calibrate_from_distances(
    positives: &[(f64, f64)],
    negatives: &[(f64, f64)],
) -> Result<Calibration> {
    if positives.is_empty() {
        return Err(Error::Usage(
            "calibration needs at least one positive".into(),
        ));
    }
    if negatives.is_empty() {
        return Err(Error::Usage(
            "calibration needs at least one negative".into(),
        ));
    }
    let all = || positives.iter().chain(negatives);
    if let Some(bad) = all().find(|(s, r)| !(s.is_finite() && r.is_finite())) {
        return Err(Error::Numeric(format!("non-finite distance pair {bad:?}")));
    }
    let candidates = |pick: fn(&(f64, f64)) -> f64| {
        let mut c: Vec<f64> = all().map(pick).collect();
        c.sort_by(f64::total_cmp);
        c.dedup();
        c
    };
    let sig_grid = candidates(|p| p.0);
    let rec_grid = candidates(|p| p.1);

    let total = (positives.len() + negatives.len()) as f64;
    let mut best: Option<(usize, usize, f64, f64)> = None;
    // Grids are ascending, so the first pair reaching a given score is the
    // lexicographically smallest; only strict improvements replace it.
    for &ts in &sig_grid {
        for &tr in &rec_grid {
            let hits = positives
                .iter()
                .filter(|&&(s, r)| s <= ts && r <= tr)
                .count();
            let false_accepts = negatives
                .iter()
                .filter(|&&(s, r)| s <= ts && r <= tr)
                .count();
            let correct = hits + negatives.len() - false_accepts;
            let better = match best {
                None => true,
                Some((bc, bfa, _, _)) => correct > bc || (correct == bc && false_accepts < bfa),
            };
            if better {
                best = Some((correct, false_accepts, ts, tr));
            }
        }
    }
    let (correct, false_accepts, tau_sig, tau_rec) = best.expect("grids are non-empty");
    Ok(Calibration {
        tau_sig,
        tau_rec,
        accuracy: correct as f64 / total,
        false_accepts,
    })
}

/// Computes distances for every sample under `(net, mean)` and searches for
/// the best threshold pair.
pub fn calibrate_thresholds<V: AsRef<[f64]>>(
    net: &Network,
    mean: &[f64],
    positives: &[V],
    negatives: &[V],
) -> Result<Calibration> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::Usage(
            "calibration needs non-empty positive and negative sets".into(),
        ));
    }
    let measure = |set: &[V]| {
        set.iter()
            .map(|v| distances(net, mean, v.as_ref()))
            .collect::<Result<Vec<_>>>()
    };
    calibrate_from_distances(&measure(positives)?, &measure(negatives)?)
}
