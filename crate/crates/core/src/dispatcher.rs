//! A bank of per-class mirroring networks. Each input is offered to every
//! network; among those that accept it, the one with the lowest
//! threshold-normalized distance names the pattern.

use std::collections::HashSet;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::Network;
use crate::recognizer::{classify, RecognizerProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct BankEntry {
    pub label: String,
    pub network: Network,
    pub profile: RecognizerProfile,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkBank {
    entries: Vec<BankEntry>,
}

impl NetworkBank {
    /// Labels must be unique, non-empty, and free of commas and line breaks
    /// (they are written to manifest lines). All networks must share an input
    /// size, and every profile must match its network's code layer.
    pub fn new(entries: Vec<BankEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if e.label.is_empty() || e.label.contains([',', '\n', '\r']) {
                return Err(Error::Validation(format!("invalid label {:?}", e.label)));
            }
            if !seen.insert(e.label.as_str()) {
                return Err(Error::Validation(format!("duplicate label {:?}", e.label)));
            }
            e.profile
                .check_network(&e.network)
                .map_err(|err| Error::Validation(format!("entry {:?}: {err}", e.label)))?;
        }
        if let Some(first) = entries.first() {
            let n = first.network.architecture().input_size();
            if let Some(e) = entries
                .iter()
                .find(|e| e.network.architecture().input_size() != n)
            {
                return Err(Error::Validation(format!(
                    "entry {:?} takes {} inputs, bank takes {n}",
                    e.label,
                    e.network.architecture().input_size()
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[BankEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn input_size(&self) -> Option<usize> {
        self.entries
            .first()
            .map(|e| e.network.architecture().input_size())
    }

    pub fn push(&mut self, entry: BankEntry) -> Result<()> {
        let mut entries = self.entries.clone();
        entries.push(entry);
        *self = Self::new(entries)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchRecord {
    pub label: String,
    pub d_sig: f64,
    pub d_rec: f64,
    pub accepted: bool,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchResult {
    pub winner: Option<String>,
    /// One record per bank entry, in bank order.
    pub records: Vec<DispatchRecord>,
}

/// `d_sig / tau_sig + d_rec / tau_rec`; a zero threshold contributes nothing
/// when its distance is also zero, and makes the score infinite otherwise.
pub fn combined_score(d_sig: f64, d_rec: f64, tau_sig: f64, tau_rec: f64) -> f64 {
    let term = |d: f64, tau: f64| {
        if tau > 0.0 {
            d / tau
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    term(d_sig, tau_sig) + term(d_rec, tau_rec)
}

fn evaluate(entry: &BankEntry, input: &[f64]) -> Result<DispatchRecord> {
    let decision = classify(&entry.profile, &entry.network, input)?;
    Ok(DispatchRecord {
        label: entry.label.clone(),
        d_sig: decision.d_sig,
        d_rec: decision.d_rec,
        accepted: decision.accepted,
        score: combined_score(
            decision.d_sig,
            decision.d_rec,
            entry.profile.tau_sig,
            entry.profile.tau_rec,
        ),
    })
}

/// Winner among records: lowest score among accepted entries, ties to the
/// smallest label.
pub fn select_winner(records: &[DispatchRecord]) -> Option<&DispatchRecord> {
    records.iter().filter(|r| r.accepted).min_by(|a, b| {
        a.score
            .total_cmp(&b.score)
            .then_with(|| a.label.cmp(&b.label))
    })
}

pub fn dispatch(bank: &NetworkBank, input: &[f64]) -> Result<DispatchResult> {
    let expected = bank
        .input_size()
        .ok_or_else(|| Error::Usage("cannot dispatch to an empty bank".into()))?;
    if input.len() != expected {
        return Err(Error::shape(expected, input.len(), "dispatch input"));
    }

    #[cfg(feature = "parallel")]
    let records = bank
        .entries
        .par_iter()
        .map(|e| evaluate(e, input))
        .collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let records = bank
        .entries
        .iter()
        .map(|e| evaluate(e, input))
        .collect::<Result<Vec<_>>>()?;

    let winner = select_winner(&records).map(|r| r.label.clone());
    Ok(DispatchResult { winner, records })
}
