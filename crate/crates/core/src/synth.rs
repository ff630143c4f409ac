//! Seeded synthetic pattern classes.
//!
//! Each class has a smooth base pattern, a sum of 2-D Gaussian bumps
//! stretched to `[0, 255]`. Samples are the base shifted by up to one pixel
//! in each direction (edges replicated) plus uniform noise of up to ±10 gray
//! levels, rounded to integers.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::preprocess::{write_pgm, GrayImage};

const BUMPS: usize = 4;
const NOISE_AMPLITUDE: f64 = 10.0;
const MAX_SHIFT: i64 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthConfig {
    pub classes: usize,
    pub per_class: usize,
    /// Images are `size x size`.
    pub size: usize,
    pub seed: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.classes == 0 || self.per_class == 0 {
            return Err(Error::Usage(
                "class count and samples per class must be positive".into(),
            ));
        }
        if self.size < 2 {
            return Err(Error::Usage(format!(
                "image size must be at least 2, got {}",
                self.size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthClass {
    pub name: String,
    pub base: GrayImage,
    pub samples: Vec<GrayImage>,
}

pub fn class_name(index: usize) -> String {
    format!("class{index}")
}

/// Generates every class. Class `i` draws from ChaCha8 seeded with `seed` on
/// stream `i`, so adding classes leaves existing ones unchanged.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<SynthClass>> {
    cfg.validate()?;
    (0..cfg.classes)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let base = base_pattern(cfg.size, &mut rng)?;
            let samples = (0..cfg.per_class)
                .map(|_| variant(&base, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            Ok(SynthClass {
                name: class_name(i),
                base,
                samples,
            })
        })
        .collect()
}

fn base_pattern(size: usize, rng: &mut ChaCha8Rng) -> Result<GrayImage> {
    let s = size as f64;
    let bumps: Vec<(f64, f64, f64, f64)> = (0..BUMPS)
        .map(|_| {
            let cx = rng.gen_range(0.15..0.85) * s;
            let cy = rng.gen_range(0.15..0.85) * s;
            let sigma = rng.gen_range(0.1..0.25) * s;
            let amp = rng.gen_range(-1.0..1.0);
            (cx, cy, sigma, amp)
        })
        .collect();
    let field: Vec<f64> = (0..size * size)
        .map(|idx| {
            let (x, y) = ((idx % size) as f64, (idx / size) as f64);
            bumps
                .iter()
                .map(|&(cx, cy, sigma, amp)| {
                    let r2 = (x - cx).powi(2) + (y - cy).powi(2);
                    amp * (-r2 / (2.0 * sigma * sigma)).exp()
                })
                .sum()
        })
        .collect();
    let lo = field.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = if hi > lo { hi - lo } else { 1.0 };
    GrayImage::new(
        size,
        size,
        field.iter().map(|v| (v - lo) * 255.0 / range).collect(),
    )
}

fn variant(base: &GrayImage, rng: &mut ChaCha8Rng) -> Result<GrayImage> {
    let (w, h) = (base.width() as i64, base.height() as i64);
    let dx = rng.gen_range(-MAX_SHIFT..=MAX_SHIFT);
    let dy = rng.gen_range(-MAX_SHIFT..=MAX_SHIFT);
    let mut pixels = Vec::with_capacity(base.len());
    for y in 0..h {
        for x in 0..w {
            let sx = (x - dx).clamp(0, w - 1);
            let sy = (y - dy).clamp(0, h - 1);
            let v = base.intensities()[(sy * w + sx) as usize]
                + rng.gen_range(-NOISE_AMPLITUDE..=NOISE_AMPLITUDE);
            pixels.push(v.round().clamp(0.0, 255.0));
        }
    }
    GrayImage::new(base.width(), base.height(), pixels)
}

/// Writes `dir/<class>/<index>.pgm` for every sample.
pub fn write_dataset(dir: &Path, classes: &[SynthClass]) -> Result<()> {
    for class in classes {
        let class_dir = dir.join(&class.name);
        fs::create_dir_all(&class_dir).map_err(|e| Error::io(&class_dir, e))?;
        let width = class
            .samples
            .len()
            .saturating_sub(1)
            .to_string()
            .len()
            .max(3);
        for (i, img) in class.samples.iter().enumerate() {
            let path = class_dir.join(format!("{i:0width$}.pgm"));
            fs::write(&path, write_pgm(img)).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}
