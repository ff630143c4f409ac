use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mnn::dispatcher::dispatch;
use mnn::model_store::{load_bank, read_network, read_profile, write_network, write_profile};
use mnn::network::{Architecture, Network};
use mnn::preprocess::{load_pgm, preprocess_image, write_pgm, GrayImage};
use mnn::recognizer::{calibrate_thresholds, class_mean, classify, RecognizerProfile};
use mnn::synth::{generate, write_dataset, SynthConfig};
use mnn::trainer::{finite_difference_check, mse, train, TrainConfig, DEFAULT_HIDDEN_MULTIPLIER};
use mnn::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gradient checks pass below this relative discrepancy.
const GRADCHECK_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "mnn", version, about = "Mirroring neural network toolkit")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate seeded synthetic pattern classes as PGM files.
    Synth(SynthArgs),
    /// Train a network to mirror a directory of PGM images.
    Train(TrainArgs),
    /// Mirror one image through a trained network.
    Reconstruct(ReconstructArgs),
    /// Fix the two recognition thresholds from positive and negative images.
    Calibrate(CalibrateArgs),
    /// Accept or reject one image (exit 0 = accept, 1 = reject).
    Classify(ClassifyArgs),
    /// Route one image through a bank of networks (exit 0 = winner, 1 = none).
    Dispatch(DispatchArgs),
    /// Compare backpropagation against finite differences on a random network.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    classes: usize,
    #[arg(long)]
    per_class: usize,
    /// Side length of the square images.
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Comma-separated layer sizes, e.g. 676,40,676.
    #[arg(long)]
    arch: String,
    /// Output-layer learning rate.
    #[arg(long)]
    rate: f64,
    #[arg(long, default_value_t = DEFAULT_HIDDEN_MULTIPLIER)]
    hidden_multiplier: f64,
    #[arg(long)]
    epochs: usize,
    #[arg(long, default_value_t = 0.0)]
    target_mse: f64,
    /// Seeds weight initialization and sample shuffling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Where to write the per-epoch report; defaults to the model path with
    /// a `.report.txt` extension.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ThresholdOverrides {
    #[arg(long)]
    tau_sig: Option<f64>,
    #[arg(long)]
    tau_rec: Option<f64>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Training images; the mean signature is taken over these.
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    positives: PathBuf,
    #[arg(long)]
    negatives: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    overrides: ThresholdOverrides,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    profile: PathBuf,
    #[arg(long)]
    image: PathBuf,
    #[command(flatten)]
    overrides: ThresholdOverrides,
}

#[derive(Debug, Args)]
struct DispatchArgs {
    /// Manifest with one `label,network_path,profile_path` per line.
    #[arg(long)]
    bank: PathBuf,
    #[arg(long)]
    image: PathBuf,
}

#[derive(Debug, Args)]
struct GradcheckArgs {
    #[arg(long)]
    arch: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    epsilon: f64,
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const NEGATIVE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const DATA: u8 = 3;

    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: Self::USAGE,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Self {
            code: Self::DATA,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err {
            Error::Usage(_) | Error::Architecture(_) => Self::usage(err.to_string()),
            _ => Self::data(err.to_string()),
        }
    }
}

type CmdResult = Result<u8, Failure>;

pub fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Train(a) => train_cmd(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Classify(a) => classify_cmd(a),
        Command::Dispatch(a) => dispatch_cmd(a),
        Command::Gradcheck(a) => gradcheck(a),
    }
}

fn parse_arch(s: &str) -> Result<Architecture, Failure> {
    s.parse()
        .map_err(|e| Failure::usage(format!("--arch {s}: {e}")))
}

fn read_image(path: &Path) -> Result<GrayImage, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    load_pgm(&bytes).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

/// Every `.pgm` in `dir`, sorted by file name, preprocessed. All images must
/// share one size.
fn read_dataset(dir: &Path) -> Result<(Vec<Vec<f64>>, usize, usize), Failure> {
    let entries =
        fs::read_dir(dir).map_err(|e| Failure::data(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .is_some_and(|ext| ext.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    paths.sort();
    let mut dims = None;
    let mut data = Vec::with_capacity(paths.len());
    for path in &paths {
        let img = read_image(path)?;
        let these = (img.width(), img.height());
        match dims {
            None => dims = Some(these),
            Some(d) if d != these => {
                return Err(Failure::data(format!(
                    "{}: image is {}x{}, expected {}x{}",
                    path.display(),
                    these.0,
                    these.1,
                    d.0,
                    d.1
                )))
            }
            Some(_) => {}
        }
        data.push(preprocess_image(&img)?.into_inner());
    }
    let (w, h) = dims.ok_or_else(|| Failure::data(format!("{}: no .pgm images", dir.display())))?;
    Ok((data, w, h))
}

fn check_input_size(net: &Network, n: usize, source: &Path) -> Result<(), Failure> {
    let expected = net.architecture().input_size();
    if expected != n {
        return Err(Failure::data(format!(
            "{}: {n} pixels, network expects {expected}",
            source.display()
        )));
    }
    Ok(())
}

fn synth(a: SynthArgs) -> CmdResult {
    let cfg = SynthConfig {
        classes: a.classes,
        per_class: a.per_class,
        size: a.size,
        seed: a.seed,
    };
    cfg.validate()?;
    let classes = generate(&cfg)?;
    write_dataset(&a.out, &classes)?;
    println!(
        "wrote {} classes x {} images ({}x{}) to {}",
        a.classes,
        a.per_class,
        a.size,
        a.size,
        a.out.display()
    );
    Ok(0)
}

fn train_cmd(a: TrainArgs) -> CmdResult {
    let arch = parse_arch(&a.arch)?;
    let cfg = TrainConfig {
        base_rate: a.rate,
        hidden_multiplier: a.hidden_multiplier,
        max_epochs: a.epochs,
        target_mse: a.target_mse,
        shuffle_seed: a.seed,
    };
    cfg.validate()?;
    let (data, _, _) = read_dataset(&a.data)?;
    let mut net = Network::init_weights(arch, a.seed);
    check_input_size(&net, data[0].len(), &a.data)?;
    let report = train(&mut net, &data, &cfg)?;
    write_network(&a.out, &net)?;
    let report_path = a
        .report
        .unwrap_or_else(|| a.out.with_extension("report.txt"));
    fs::write(&report_path, report.to_text())
        .map_err(|e| Failure::data(format!("{}: {e}", report_path.display())))?;
    println!("samples {}", data.len());
    println!("epochs {}", report.epochs());
    println!("initial_mse {}", report.epoch_mse[0]);
    println!("final_mse {}", report.final_mse());
    println!("stop {}", report.stop);
    Ok(0)
}

fn reconstruct(a: ReconstructArgs) -> CmdResult {
    let net = read_network(&a.model)?;
    let img = read_image(&a.image)?;
    check_input_size(&net, img.len(), &a.image)?;
    let input = preprocess_image(&img)?;
    let output = net.reconstruct(input.as_slice())?;
    let mirror = GrayImage::from_unit_range(img.width(), img.height(), &output)?;
    fs::write(&a.out, write_pgm(&mirror))
        .map_err(|e| Failure::data(format!("{}: {e}", a.out.display())))?;
    println!("mse {}", mse(&output, input.as_slice())?);
    Ok(0)
}

fn apply_overrides(tau_sig: f64, tau_rec: f64, o: &ThresholdOverrides) -> (f64, f64) {
    (o.tau_sig.unwrap_or(tau_sig), o.tau_rec.unwrap_or(tau_rec))
}

fn calibrate(a: CalibrateArgs) -> CmdResult {
    let net = read_network(&a.model)?;
    let (train_set, ..) = read_dataset(&a.train)?;
    let (positives, ..) = read_dataset(&a.positives)?;
    let (negatives, ..) = read_dataset(&a.negatives)?;
    for (set, dir) in [
        (&train_set, &a.train),
        (&positives, &a.positives),
        (&negatives, &a.negatives),
    ] {
        check_input_size(&net, set[0].len(), dir)?;
    }
    let mean = class_mean(&net, &train_set)?;
    let cal = calibrate_thresholds(&net, &mean, &positives, &negatives)?;
    let (tau_sig, tau_rec) = apply_overrides(cal.tau_sig, cal.tau_rec, &a.overrides);
    let profile = RecognizerProfile::new(mean, tau_sig, tau_rec)
        .map_err(|e| Failure::usage(e.to_string()))?;
    write_profile(&a.out, &profile)?;
    println!("tau_sig {tau_sig}");
    println!("tau_rec {tau_rec}");
    println!("accuracy {}", cal.accuracy);
    println!("false_accepts {}", cal.false_accepts);
    Ok(0)
}

fn classify_cmd(a: ClassifyArgs) -> CmdResult {
    let net = read_network(&a.model)?;
    let mut profile = read_profile(&a.profile)?;
    profile.check_network(&net)?;
    (profile.tau_sig, profile.tau_rec) =
        apply_overrides(profile.tau_sig, profile.tau_rec, &a.overrides);
    let profile = RecognizerProfile::new(profile.mean_signature, profile.tau_sig, profile.tau_rec)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let img = read_image(&a.image)?;
    check_input_size(&net, img.len(), &a.image)?;
    let input = preprocess_image(&img)?;
    let decision = classify(&profile, &net, input.as_slice())?;
    println!("d_sig {}", decision.d_sig);
    println!("d_rec {}", decision.d_rec);
    if decision.accepted {
        println!("ACCEPT");
        Ok(0)
    } else {
        println!("REJECT");
        Ok(Failure::NEGATIVE)
    }
}

fn dispatch_cmd(a: DispatchArgs) -> CmdResult {
    let bank = load_bank(&a.bank)?;
    let img = read_image(&a.image)?;
    let input = preprocess_image(&img)?;
    let result = dispatch(&bank, input.as_slice())?;
    for r in &result.records {
        println!(
            "{} d_sig={} d_rec={} score={} {}",
            r.label,
            r.d_sig,
            r.d_rec,
            r.score,
            if r.accepted { "ACCEPT" } else { "REJECT" }
        );
    }
    match result.winner {
        Some(label) => {
            println!("winner {label}");
            Ok(0)
        }
        None => {
            println!("winner NONE");
            Ok(Failure::NEGATIVE)
        }
    }
}

fn gradcheck(a: GradcheckArgs) -> CmdResult {
    let arch = parse_arch(&a.arch)?;
    let n = arch.input_size();
    let net = Network::init_weights(arch, a.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    rng.set_stream(1);
    let input: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let err = finite_difference_check(&net, &input, a.epsilon)?;
    println!("max_relative_error {err:e}");
    if err < GRADCHECK_TOLERANCE {
        println!("PASS");
        Ok(0)
    } else {
        println!("FAIL");
        Ok(Failure::NEGATIVE)
    }
}
