//! Line-oriented text formats for networks, recognizer profiles and bank
//! manifests.
//!
//! ```text
//! MNN 1                 MNP 1                 label,network_path,profile_path
//! 2,1,2                 tau_sig,tau_rec       ...
//! <one parameter        mu_1,mu_2,...
//!  per line>
//! ```
//!
//! Numbers are written with 17 significant digits so every `f64` survives a
//! round trip bit for bit. Network parameters follow the canonical order:
//! layer by layer, weights row-major, then biases.

use std::fs;
use std::path::{Path, PathBuf};

use crate::dispatcher::{BankEntry, NetworkBank};
use crate::error::{Error, Result};
use crate::network::{Architecture, Network};
use crate::recognizer::RecognizerProfile;

const NETWORK_HEADER: &str = "MNN 1";
const PROFILE_HEADER: &str = "MNP 1";

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("invalid {what} {s:?}")))
}

fn text(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|_| Error::Format("file is not UTF-8".into()))
}

fn check_header(found: Option<&str>, expected: &str) -> Result<()> {
    match found.map(str::trim) {
        Some(h) if h == expected => Ok(()),
        Some(h) if h.split_whitespace().next() == expected.split_whitespace().next() => {
            Err(Error::Version(format!("{h:?}, expected {expected:?}")))
        }
        Some(h) => Err(Error::Version(format!(
            "unrecognized header {h:?}, expected {expected:?}"
        ))),
        None => Err(Error::Truncation("empty file".into())),
    }
}

pub fn save_network(net: &Network) -> Vec<u8> {
    let mut out = format!("{NETWORK_HEADER}\n{}\n", net.architecture());
    for p in net.parameters() {
        out.push_str(&fmt_f64(p));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn load_network(bytes: &[u8]) -> Result<Network> {
    let mut lines = text(bytes)?.lines();
    check_header(lines.next(), NETWORK_HEADER)?;
    let arch_line = lines
        .next()
        .ok_or_else(|| Error::Truncation("missing layer sizes".into()))?;
    let architecture: Architecture = arch_line.trim().parse()?;
    let params = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_f64(l, "parameter"))
        .collect::<Result<Vec<_>>>()?;
    let expected = architecture.parameter_count();
    if params.len() != expected {
        return Err(Error::Truncation(format!(
            "architecture {architecture} needs {expected} parameters, file has {}",
            params.len()
        )));
    }
    Network::from_parameters(architecture, &params)
}

pub fn save_profile(profile: &RecognizerProfile) -> Vec<u8> {
    let mean: Vec<String> = profile.mean_signature.iter().map(|&v| fmt_f64(v)).collect();
    format!(
        "{PROFILE_HEADER}\n{},{}\n{}\n",
        fmt_f64(profile.tau_sig),
        fmt_f64(profile.tau_rec),
        mean.join(",")
    )
    .into_bytes()
}

pub fn load_profile(bytes: &[u8]) -> Result<RecognizerProfile> {
    let mut lines = text(bytes)?.lines();
    check_header(lines.next(), PROFILE_HEADER)?;
    let taus = lines
        .next()
        .ok_or_else(|| Error::Truncation("missing thresholds".into()))?;
    let (ts, tr) = taus
        .split_once(',')
        .ok_or_else(|| Error::Format(format!("thresholds line {taus:?} needs two values")))?;
    let (tau_sig, tau_rec) = (parse_f64(ts, "tau_sig")?, parse_f64(tr, "tau_rec")?);
    let mean_line = lines
        .next()
        .ok_or_else(|| Error::Truncation("missing mean signature".into()))?;
    let mean = mean_line
        .split(',')
        .map(|v| parse_f64(v, "mean signature component"))
        .collect::<Result<Vec<_>>>()?;
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(Error::Format("unexpected data after mean signature".into()));
    }
    RecognizerProfile::new(mean, tau_sig, tau_rec)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// One manifest line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub label: String,
    pub network_path: PathBuf,
    pub profile_path: PathBuf,
}

pub fn parse_manifest(bytes: &[u8]) -> Result<Vec<ManifestEntry>> {
    text(bytes)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            match fields.as_slice() {
                [label, net, profile] => Ok(ManifestEntry {
                    label: label.to_string(),
                    network_path: PathBuf::from(net),
                    profile_path: PathBuf::from(profile),
                }),
                _ => Err(Error::Format(format!(
                    "manifest line {line:?} must be label,network_path,profile_path"
                ))),
            }
        })
        .collect()
}

pub fn render_manifest(entries: &[ManifestEntry]) -> Vec<u8> {
    entries
        .iter()
        .map(|e| {
            format!(
                "{},{},{}\n",
                e.label,
                e.network_path.display(),
                e.profile_path.display()
            )
        })
        .collect::<String>()
        .into_bytes()
}

/// Writes `<label>.mnn` and `<label>.mnp` next to the manifest, plus the
/// manifest itself with relative paths.
pub fn save_bank(bank: &NetworkBank, manifest_path: &Path) -> Result<()> {
    let dir = manifest_path.parent().unwrap_or_else(|| Path::new(""));
    let mut manifest = Vec::with_capacity(bank.len());
    for e in bank.entries() {
        let entry = ManifestEntry {
            label: e.label.clone(),
            network_path: PathBuf::from(format!("{}.mnn", e.label)),
            profile_path: PathBuf::from(format!("{}.mnp", e.label)),
        };
        write(&dir.join(&entry.network_path), &save_network(&e.network))?;
        write(&dir.join(&entry.profile_path), &save_profile(&e.profile))?;
        manifest.push(entry);
    }
    write(manifest_path, &render_manifest(&manifest))
}

/// Loads a manifest; relative paths resolve against the manifest's
/// directory. The assembled bank is re-validated.
pub fn load_bank(manifest_path: &Path) -> Result<NetworkBank> {
    let dir = manifest_path.parent().unwrap_or_else(|| Path::new(""));
    let entries = parse_manifest(&read(manifest_path)?)?
        .into_iter()
        .map(|m| {
            let network = load_network(&read(&dir.join(&m.network_path))?)?;
            let profile = load_profile(&read(&dir.join(&m.profile_path))?)?;
            Ok(BankEntry {
                label: m.label,
                network,
                profile,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    NetworkBank::new(entries)
}

pub fn read_network(path: &Path) -> Result<Network> {
    load_network(&read(path)?)
}

pub fn write_network(path: &Path, net: &Network) -> Result<()> {
    write(path, &save_network(net))
}

pub fn read_profile(path: &Path) -> Result<RecognizerProfile> {
    load_profile(&read(path)?)
}

pub fn write_profile(path: &Path, profile: &RecognizerProfile) -> Result<()> {
    write(path, &save_profile(profile))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recognizer::classify;
    use proptest::prelude::*;

    fn arch(sizes: &[usize]) -> Architecture {
        Architecture::new(sizes).unwrap()
    }

    #[test]
    fn zero_network_layout() {
        let text = String::from_utf8(save_network(&Network::zeros(arch(&[2, 1, 2])))).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "MNN 1");
        assert_eq!(lines[1], "2,1,2");
        assert_eq!(lines.len(), 2 + 7);
        for l in &lines[2..] {
            assert_eq!(parse_f64(l, "p").unwrap(), 0.0);
        }
    }

    #[test]
    fn network_round_trip_is_bitwise() {
        let net = Network::init_weights(arch(&[25, 10, 6, 3, 8, 25]), 17);
        let bytes = save_network(&net);
        assert_eq!(bytes, save_network(&net));
        let back = load_network(&bytes).unwrap();
        let bits = |n: &Network| n.parameters().map(f64::to_bits).collect::<Vec<_>>();
        assert_eq!(bits(&net), bits(&back));
        let input = vec![0.25; 25];
        assert_eq!(
            net.reconstruct(&input).unwrap(),
            back.reconstruct(&input).unwrap()
        );
    }

    #[test]
    fn network_load_errors() {
        assert!(matches!(
            load_network(b"MNN 2\n2,1,2\n"),
            Err(Error::Version(_))
        ));
        assert!(matches!(load_network(b"XYZ\n"), Err(Error::Version(_))));
        assert!(matches!(load_network(b""), Err(Error::Truncation(_))));
        let six = "MNN 1\n2,1,2\n0\n0\n0\n0\n0\n0\n";
        assert!(matches!(
            load_network(six.as_bytes()),
            Err(Error::Truncation(_))
        ));
        let bad_arch = "MNN 1\n2,3,2\n";
        assert!(matches!(
            load_network(bad_arch.as_bytes()),
            Err(Error::Architecture(_))
        ));
        let junk = "MNN 1\n2,1,2\n0\n0\nzero\n0\n0\n0\n0\n";
        assert!(matches!(
            load_network(junk.as_bytes()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn profile_round_trip_keeps_decisions() {
        let net = Network::init_weights(arch(&[6, 3, 6]), 2);
        let profile = RecognizerProfile::new(vec![0.1, -1.0 / 3.0, 0.7], 0.35, 0.9).unwrap();
        let bytes = save_profile(&profile);
        assert!(bytes.starts_with(b"MNP 1\n"));
        let back = load_profile(&bytes).unwrap();
        assert_eq!(back, profile);
        for i in 0..20 {
            let x: Vec<f64> = (0..6)
                .map(|k| ((i * 7 + k * 3) % 11) as f64 / 5.5 - 1.0)
                .collect();
            assert_eq!(
                classify(&profile, &net, &x).unwrap(),
                classify(&back, &net, &x).unwrap()
            );
        }
    }

    #[test]
    fn profile_load_errors() {
        assert!(matches!(
            load_profile(b"MNP 1\n-0.1,0.2\n0.5\n"),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            load_profile(b"MNP 3\n0,0\n0\n"),
            Err(Error::Version(_))
        ));
        assert!(matches!(
            load_profile(b"MNP 1\n0.1,0.2\n"),
            Err(Error::Truncation(_))
        ));
        assert!(matches!(
            load_profile(b"MNP 1\n0.1\n0\n"),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn manifest_parsing() {
        let m = parse_manifest(b"a,a.mnn,a.mnp\n\nb, nets/b.mnn ,b.mnp\n").unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[1].network_path, PathBuf::from("nets/b.mnn"));
        assert_eq!(parse_manifest(&render_manifest(&m)).unwrap(), m);
        assert!(parse_manifest(b"a,a.mnn\n").is_err());
        assert!(parse_manifest(b"").unwrap().is_empty());
    }

    fn entry(label: &str, seed: u64) -> BankEntry {
        BankEntry {
            label: label.into(),
            network: Network::init_weights(arch(&[6, 3, 6]), seed),
            profile: RecognizerProfile::new(vec![0.1, 0.0, -0.1], 1.5, 1.5).unwrap(),
        }
    }

    #[test]
    fn bank_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = dir.path().join("bank.txt");
        let bank = NetworkBank::new(vec![entry("a", 1), entry("b", 2)]).unwrap();
        save_bank(&bank, &manifest).unwrap();
        let back = load_bank(&manifest).unwrap();
        assert_eq!(back, bank);
        let x = [0.3, -0.2, 0.5, 0.1, 0.0, -0.7];
        assert_eq!(
            crate::dispatcher::dispatch(&bank, &x).unwrap(),
            crate::dispatcher::dispatch(&back, &x).unwrap()
        );
    }

    #[test]
    fn bank_load_errors() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        write_network(&d.join("a.mnn"), &entry("a", 1).network).unwrap();
        write_profile(&d.join("a.mnp"), &entry("a", 1).profile).unwrap();
        write_profile(
            &d.join("short.mnp"),
            &RecognizerProfile::new(vec![0.0; 2], 1.0, 1.0).unwrap(),
        )
        .unwrap();

        let dup = d.join("dup.txt");
        fs::write(&dup, "a,a.mnn,a.mnp\na,a.mnn,a.mnp\n").unwrap();
        assert!(matches!(load_bank(&dup), Err(Error::Validation(_))));

        let missing = d.join("missing.txt");
        fs::write(&missing, "a,a.mnn,nope.mnp\n").unwrap();
        assert!(matches!(load_bank(&missing), Err(Error::Io { .. })));

        let short = d.join("short.txt");
        fs::write(&short, "a,a.mnn,short.mnp\n").unwrap();
        assert!(matches!(load_bank(&short), Err(Error::Validation(_))));

        assert!(matches!(
            load_bank(&d.join("absent.txt")),
            Err(Error::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn any_finite_parameters_round_trip(params in prop::collection::vec(-1e6f64..1e6, 7)) {
            let net = Network::from_parameters(arch(&[2, 1, 2]), &params).unwrap();
            let back = load_network(&save_network(&net)).unwrap();
            for (a, b) in net.parameters().zip(back.parameters()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        #[test]
        fn distinct_parameters_serialize_differently(
            a in prop::collection::vec(-1.0f64..1.0, 7),
            b in prop::collection::vec(-1.0f64..1.0, 7),
        ) {
            prop_assume!(a != b);
            let na = Network::from_parameters(arch(&[2, 1, 2]), &a).unwrap();
            let nb = Network::from_parameters(arch(&[2, 1, 2]), &b).unwrap();
            prop_assert_ne!(save_network(&na), save_network(&nb));
        }
    }
}
