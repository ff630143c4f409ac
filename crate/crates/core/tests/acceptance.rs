//! Acceptance criteria. Run with
//! `cargo test -p mnn-core --test acceptance -- --nocapture --test-threads 1`
//! to see one PASS/FAIL line per criterion.

use std::sync::OnceLock;

use mnn::dispatcher::{dispatch, BankEntry, NetworkBank};
use mnn::model_store::{load_network, load_profile, save_network, save_profile};
use mnn::network::{Architecture, Network};
use mnn::preprocess::{
    map_to_unit_range, preprocess_pipeline, rescale_intensities, write_pgm, GrayImage,
};
use mnn::recognizer::{
    calibrate_from_distances, calibrate_thresholds, class_mean, classify, distances, Calibration,
    RecognizerProfile,
};
use mnn::synth::{generate, SynthConfig};
use mnn::trainer::{finite_difference_check, mse, train, TrainConfig, TrainReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRAD_EPSILON: f64 = 1e-5;
const GRAD_TOLERANCE: f64 = 1e-4;
const OVERFIT_TARGET: f64 = 1e-3;
const MIN_ACCEPT_RATE: f64 = 0.90;
const MIN_REJECT_RATE: f64 = 0.85;
const MIN_ROUTING_RATE: f64 = 0.90;
const EXACTNESS: f64 = 1e-12;

/// Synthetic protocol settings, fixed before the protocol was first run.
const PROTOCOL_SEED: u64 = 2026;
const IMAGE_SIZE: usize = 16;
const PER_CLASS: usize = 100;
const TRAIN_END: usize = 60;
const CALIBRATE_END: usize = 80;
const PROTOCOL_RATE: f64 = 0.01;
const PROTOCOL_EPOCHS: usize = 200;

fn verdict(name: &str, pass: bool, detail: String) {
    println!(
        "ACCEPTANCE {:<32} {}  {detail}",
        name,
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name}: {detail}");
}

fn uniform_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

#[test]
fn gradient_correctness() {
    let archs = ["6,3,6", "9,4,2,4,9", "25,10,6,3,8,25"];
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    for i in 0..20u64 {
        let arch: Architecture = archs[i as usize % archs.len()].parse().unwrap();
        let input = uniform_vec(&mut rng, arch.input_size());
        let net = Network::init_weights(arch, 1000 + i);
        worst = worst.max(finite_difference_check(&net, &input, GRAD_EPSILON).unwrap());
    }
    verdict(
        "gradient correctness",
        worst < GRAD_TOLERANCE,
        format!("20 networks, max relative error {worst:.3e} (< {GRAD_TOLERANCE:e})"),
    );
}

#[test]
fn overfit_sanity() {
    let pattern = {
        let classes = generate(&SynthConfig {
            classes: 1,
            per_class: 1,
            size: 5,
            seed: 1,
        })
        .unwrap();
        preprocess_pipeline(&write_pgm(&classes[0].samples[0])).unwrap()
    };
    let mut net = Network::init_weights("25,10,6,3,8,25".parse().unwrap(), 1);
    let initial = mse(
        &net.reconstruct(pattern.as_slice()).unwrap(),
        pattern.as_slice(),
    )
    .unwrap();
    let cfg = TrainConfig {
        base_rate: 0.1,
        hidden_multiplier: 1.1,
        max_epochs: 2000,
        target_mse: 0.0,
        shuffle_seed: 0,
    };
    train(&mut net, std::slice::from_ref(&pattern), &cfg).unwrap();
    let last = mse(
        &net.reconstruct(pattern.as_slice()).unwrap(),
        pattern.as_slice(),
    )
    .unwrap();
    verdict(
        "overfit sanity",
        last < OVERFIT_TARGET && last < initial,
        format!("MSE {initial:.4e} -> {last:.4e} after 2000 epochs (< {OVERFIT_TARGET:e})"),
    );
}

/// Everything one run of the synthetic protocol produces.
#[derive(Debug, PartialEq)]
struct ProtocolRun {
    reports: Vec<TrainReport>,
    calibrations: Vec<Calibration>,
    /// Class-0 recognizer verdicts on its held-out positives, then on the
    /// class-1 negatives.
    positive_verdicts: Vec<bool>,
    negative_verdicts: Vec<bool>,
    /// Dispatch winners for the held-out images of both classes.
    winners: Vec<Option<String>>,
    expected_winners: Vec<String>,
}

impl ProtocolRun {
    fn accept_rate(&self) -> f64 {
        rate(&self.positive_verdicts, true)
    }

    fn reject_rate(&self) -> f64 {
        rate(&self.negative_verdicts, false)
    }

    fn routed(&self) -> usize {
        self.winners
            .iter()
            .zip(&self.expected_winners)
            .filter(|(w, e)| w.as_deref() == Some(e.as_str()))
            .count()
    }
}

fn rate(verdicts: &[bool], want: bool) -> f64 {
    verdicts.iter().filter(|&&v| v == want).count() as f64 / verdicts.len() as f64
}

fn run_protocol(seed: u64) -> ProtocolRun {
    let classes = generate(&SynthConfig {
        classes: 2,
        per_class: PER_CLASS,
        size: IMAGE_SIZE,
        seed,
    })
    .unwrap();
    // Through PGM bytes, exactly as the command-line tools see them.
    let sets: Vec<Vec<Vec<f64>>> = classes
        .iter()
        .map(|c| {
            c.samples
                .iter()
                .map(|img| preprocess_pipeline(&write_pgm(img)).unwrap().into_inner())
                .collect()
        })
        .collect();
    let n = IMAGE_SIZE * IMAGE_SIZE;
    let arch = Architecture::new(&[n, 24, n]).unwrap();

    let mut reports = Vec::new();
    let mut calibrations = Vec::new();
    let mut entries = Vec::new();
    for (k, class) in classes.iter().enumerate() {
        let (own, other) = (&sets[k], &sets[1 - k]);
        let mut net = Network::init_weights(arch.clone(), seed + 1 + k as u64);
        let cfg = TrainConfig {
            shuffle_seed: seed,
            ..TrainConfig::new(PROTOCOL_RATE, PROTOCOL_EPOCHS)
        };
        reports.push(train(&mut net, &own[..TRAIN_END], &cfg).unwrap());
        let mean = class_mean(&net, &own[..TRAIN_END]).unwrap();
        let cal = calibrate_thresholds(
            &net,
            &mean,
            &own[TRAIN_END..CALIBRATE_END],
            &other[TRAIN_END..CALIBRATE_END],
        )
        .unwrap();
        calibrations.push(cal);
        entries.push(BankEntry {
            label: class.name.clone(),
            network: net,
            profile: RecognizerProfile::new(mean, cal.tau_sig, cal.tau_rec).unwrap(),
        });
    }

    let first = &entries[0];
    let verdicts = |set: &[Vec<f64>]| -> Vec<bool> {
        set.iter()
            .map(|x| {
                classify(&first.profile, &first.network, x)
                    .unwrap()
                    .accepted
            })
            .collect()
    };
    let positive_verdicts = verdicts(&sets[0][CALIBRATE_END..]);
    // Class-1 images outside its calibration split; network 0 never saw any.
    let negative_verdicts = verdicts(&sets[1][..TRAIN_END]);

    let bank = NetworkBank::new(entries).unwrap();
    let mut winners = Vec::new();
    let mut expected_winners = Vec::new();
    for (k, class) in classes.iter().enumerate() {
        for x in &sets[k][CALIBRATE_END..] {
            winners.push(dispatch(&bank, x).unwrap().winner);
            expected_winners.push(class.name.clone());
        }
    }

    ProtocolRun {
        reports,
        calibrations,
        positive_verdicts,
        negative_verdicts,
        winners,
        expected_winners,
    }
}

fn protocol() -> &'static ProtocolRun {
    static RUN: OnceLock<ProtocolRun> = OnceLock::new();
    RUN.get_or_init(|| run_protocol(PROTOCOL_SEED))
}

#[test]
fn synthetic_protocol() {
    let run = protocol();
    assert_eq!(run.positive_verdicts.len(), 20);
    assert_eq!(run.negative_verdicts.len(), 60);
    let (acc, rej) = (run.accept_rate(), run.reject_rate());
    let cal = &run.calibrations[0];
    verdict(
        "synthetic recognition protocol",
        acc >= MIN_ACCEPT_RATE && rej >= MIN_REJECT_RATE,
        format!(
            "accept {:.1}% of 20 held-out positives (>= 90%), reject {:.1}% of 60 negatives (>= 85%); \
             train MSE {:.4e} -> {:.4e}; tau_sig {:.4}, tau_rec {:.4}",
            100.0 * acc,
            100.0 * rej,
            run.reports[0].epoch_mse[0],
            run.reports[0].final_mse(),
            cal.tau_sig,
            cal.tau_rec
        ),
    );
}

#[test]
fn dispatch_routing() {
    let run = protocol();
    let total = run.winners.len();
    assert_eq!(total, 40);
    let routed = run.routed();
    let unrouted = run.winners.iter().filter(|w| w.is_none()).count();
    verdict(
        "dispatch routing",
        routed as f64 / total as f64 >= MIN_ROUTING_RATE,
        format!(
            "{routed}/{total} routed to the right network (>= 90%), {unrouted} without a winner"
        ),
    );
}

#[test]
fn architecture_gate() {
    let accepted = [&[25, 10, 6, 3, 8, 25][..], &[676, 40, 676][..]];
    let rejected = [&[10, 12, 10][..], &[6, 3, 5][..], &[6, 3, 6, 3, 6][..]];
    let ok = accepted.iter().all(|s| Architecture::new(s).is_ok())
        && rejected.iter().all(|s| Architecture::new(s).is_err());
    let reasons: Vec<String> = rejected
        .iter()
        .map(|s| format!("{s:?}: {}", Architecture::new(s).unwrap_err()))
        .collect();
    verdict("architecture gate", ok, reasons.join("; "));
}

#[test]
fn preprocessing_exactness() {
    let close = |a: &[f64], b: &[f64]| {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= EXACTNESS)
    };
    let img = |v: &[f64]| GrayImage::new(v.len(), 1, v.to_vec()).unwrap();
    let rescaled = rescale_intensities(&img(&[50.0, 150.0, 250.0]));
    let top = map_to_unit_range(&img(&[255.0])).unwrap();
    let flat = map_to_unit_range(&rescale_intensities(&img(&[7.0; 4]))).unwrap();
    let ok = close(rescaled.intensities(), &[0.0, 127.5, 255.0])
        && close(top.as_slice(), &[0.9921875])
        && close(flat.as_slice(), &[0.0; 4]);
    verdict(
        "preprocessing exactness",
        ok,
        format!(
            "rescale {:?}, map(255) = {}, constant image -> {:?}",
            rescaled.intensities(),
            top.as_slice()[0],
            flat.as_slice()
        ),
    );
}

#[test]
fn persistence() {
    let net = Network::init_weights("25,10,6,3,8,25".parse().unwrap(), 77);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let inputs: Vec<Vec<f64>> = (0..100).map(|_| uniform_vec(&mut rng, 25)).collect();
    // Thresholds at the median observed distances, so both verdicts occur.
    let mean = class_mean(&net, &inputs[..10]).unwrap();
    let (mut sig, mut rec): (Vec<f64>, Vec<f64>) = inputs
        .iter()
        .map(|x| distances(&net, &mean, x).unwrap())
        .unzip();
    sig.sort_by(f64::total_cmp);
    rec.sort_by(f64::total_cmp);
    let profile = RecognizerProfile::new(mean, sig[50], rec[50]).unwrap();
    let net2 = load_network(&save_network(&net)).unwrap();
    let profile2 = load_profile(&save_profile(&profile)).unwrap();
    let bitwise = net
        .parameters()
        .zip(net2.parameters())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    let mut same = 0;
    let mut accepted = 0;
    for x in &inputs {
        let d1 = classify(&profile, &net, x).unwrap();
        let d2 = classify(&profile2, &net2, x).unwrap();
        same += usize::from(d1 == d2);
        accepted += usize::from(d1.accepted);
    }
    verdict(
        "persistence",
        bitwise && same == 100 && accepted > 0 && accepted < 100,
        format!("parameters bitwise equal: {bitwise}; {same}/100 identical decisions ({accepted} accepts)"),
    );
}

#[test]
fn determinism() {
    let again = run_protocol(PROTOCOL_SEED);
    let first = protocol();
    let reports_equal = first.reports.len() == again.reports.len()
        && first.reports.iter().zip(&again.reports).all(|(a, b)| {
            a.stop == b.stop
                && a.epoch_mse.len() == b.epoch_mse.len()
                && a.epoch_mse
                    .iter()
                    .zip(&b.epoch_mse)
                    .all(|(x, y)| x.to_bits() == y.to_bits())
        });
    let thresholds_equal = first.calibrations == again.calibrations;
    let verdicts_equal = first.positive_verdicts == again.positive_verdicts
        && first.negative_verdicts == again.negative_verdicts
        && first.winners == again.winners;
    verdict(
        "determinism",
        reports_equal && thresholds_equal && verdicts_equal,
        format!(
            "reports identical: {reports_equal}, thresholds identical: {thresholds_equal}, verdicts identical: {verdicts_equal}"
        ),
    );
}

/// Independent exhaustive search: every pair of observed values, one sample
/// at a time, counted as accepted positives plus rejected negatives.
fn brute_force_correct(pos: &[(f64, f64)], neg: &[(f64, f64)]) -> usize {
    let all: Vec<(f64, f64)> = pos.iter().chain(neg).copied().collect();
    let mut best = 0;
    for a in &all {
        for b in &all {
            let (ts, tr) = (a.0, b.1);
            let mut correct = 0;
            for p in pos {
                if p.0 <= ts && p.1 <= tr {
                    correct += 1;
                }
            }
            for q in neg {
                if !(q.0 <= ts && q.1 <= tr) {
                    correct += 1;
                }
            }
            best = best.max(correct);
        }
    }
    best
}

#[test]
fn calibration_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0;
    let trials = 500;
    for _ in 0..trials {
        let total = rng.gen_range(2..=20);
        let n_pos = rng.gen_range(1..total);
        // Coarse values force ties on both axes.
        let mut draw = |shift: f64| {
            (
                (rng.gen_range(0..8) as f64 + shift) / 8.0,
                (rng.gen_range(0..8) as f64 + shift) / 8.0,
            )
        };
        let pos: Vec<_> = (0..n_pos).map(|_| draw(0.0)).collect();
        let neg: Vec<_> = (n_pos..total).map(|_| draw(2.0)).collect();
        let cal = calibrate_from_distances(&pos, &neg).unwrap();
        let achieved = (cal.accuracy * total as f64).round() as usize;
        if achieved != brute_force_correct(&pos, &neg) {
            mismatches += 1;
        }
    }
    verdict(
        "calibration oracle equivalence",
        mismatches == 0,
        format!("{trials} random instances of 2..=20 samples, {mismatches} accuracy mismatches"),
    );
}
