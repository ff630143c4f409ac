//! Grayscale image input: PGM decoding and encoding, full-range intensity
//! rescaling, and the mapping into the network's `[-1, +1]` input domain.

use crate::error::{Error, Result};

/// Center of the 8-bit range; also the value a featureless image collapses to.
const MID_GRAY: f64 = 128.0;
const FULL_SCALE: f64 = 255.0;

/// Row-major grayscale raster. Intensities are kept as reals so values such
/// as `127.5` survive rescaling; quantization happens only on PGM output.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    intensities: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, intensities: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Validation(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::Validation(format!("image {width}x{height} is too large")))?;
        if intensities.len() != expected {
            return Err(Error::shape(
                expected,
                intensities.len(),
                "image intensities",
            ));
        }
        if let Some(bad) = intensities.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite intensity {bad}")));
        }
        Ok(Self {
            width,
            height,
            intensities,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    /// Builds an image from network-domain values with the inverse mapping
    /// `G = clamp(round(v * 128 + 128), 0, 255)`.
    pub fn from_unit_range(width: usize, height: usize, values: &[f64]) -> Result<Self> {
        let intensities = values
            .iter()
            .map(|&v| (v * MID_GRAY + MID_GRAY).round().clamp(0.0, FULL_SCALE))
            .collect();
        Self::new(width, height, intensities)
    }
}

/// A preprocessed pattern as presented to the network. Every component lies
/// in `[-1, +1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputVector(Vec<f64>);

impl InputVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values
            .iter()
            .find(|v| !(v.is_finite() && (-1.0..=1.0).contains(*v)))
        {
            return Err(Error::Domain(format!(
                "input component {bad} lies outside [-1, 1]"
            )));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for InputVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Decodes a PGM file (`P2` ASCII or `P5` binary, maxval 1..=255). Samples
/// are scaled to `[0, 255]` by `255 / maxval`.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut header = HeaderReader { bytes, pos: 0 };
    let magic = header
        .token()
        .ok_or_else(|| Error::Format("empty PGM input".into()))?;
    let binary = match magic {
        b"P2" => false,
        b"P5" => true,
        other => {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected P2 or P5",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = header.number("width")?;
    let height = header.number("height")?;
    let maxval = header.number("maxval")?;
    if !(1..=255).contains(&maxval) {
        return Err(Error::Unsupported(format!(
            "maxval {maxval} outside [1, 255]"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::Format(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    let count = width
        .checked_mul(height)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| Error::Format(format!("image {width}x{height} is too large")))?;

    let raw: Vec<u64> = if binary {
        // Exactly one whitespace byte separates maxval from the raster.
        let start = header.pos + 1;
        let raster = bytes.get(start..).unwrap_or(&[]);
        if raster.len() != count {
            return Err(Error::Truncation(format!(
                "header declares {count} pixels, raster holds {}",
                raster.len()
            )));
        }
        raster.iter().map(|&b| u64::from(b)).collect()
    } else {
        let mut samples = Vec::with_capacity(count.min(bytes.len()));
        while let Some(tok) = header.token() {
            samples.push(parse_decimal(tok, "sample")?);
        }
        if samples.len() != count {
            return Err(Error::Truncation(format!(
                "header declares {count} pixels, found {}",
                samples.len()
            )));
        }
        samples
    };

    if let Some(bad) = raw.iter().find(|&&s| s > maxval) {
        return Err(Error::Format(format!(
            "sample {bad} exceeds maxval {maxval}"
        )));
    }
    let scale = FULL_SCALE / maxval as f64;
    let intensities = raw.into_iter().map(|s| s as f64 * scale).collect();
    GrayImage::new(width as usize, height as usize, intensities)
}

/// Encodes an image as binary PGM (`P5`, maxval 255), quantizing each
/// intensity by rounding and clamping to `[0, 255]`.
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(
        img.intensities
            .iter()
            .map(|v| v.round().clamp(0.0, FULL_SCALE) as u8),
    );
    out
}

/// Stretches intensities to the full `[0, 255]` range with
/// `(G - MIN) * 255 / (MAX - MIN)`. A constant image maps to mid-gray (128).
pub fn rescale_intensities(img: &GrayImage) -> GrayImage {
    let (min, max) = img
        .intensities
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let intensities = if max > min {
        let range = max - min;
        img.intensities
            .iter()
            .map(|&g| (g - min) / range * FULL_SCALE)
            .collect()
    } else {
        vec![MID_GRAY; img.len()]
    };
    GrayImage {
        intensities,
        ..*img
    }
}

/// Maps `[0, 255]` intensities to `(G - 128) / 128`, i.e. into `[-1, 127/128]`.
pub fn map_to_unit_range(img: &GrayImage) -> Result<InputVector> {
    if let Some(bad) = img
        .intensities
        .iter()
        .find(|v| !(0.0..=FULL_SCALE).contains(*v))
    {
        return Err(Error::Domain(format!(
            "intensity {bad} lies outside [0, 255]"
        )));
    }
    let values = img
        .intensities
        .iter()
        .map(|&g| (g - MID_GRAY) / MID_GRAY)
        .collect();
    Ok(InputVector(values))
}

/// Rescales then maps an already decoded image.
pub fn preprocess_image(img: &GrayImage) -> Result<InputVector> {
    map_to_unit_range(&rescale_intensities(img))
}

/// `load_pgm`, then `rescale_intensities`, then `map_to_unit_range`.
pub fn preprocess_pipeline(bytes: &[u8]) -> Result<InputVector> {
    preprocess_image(&load_pgm(bytes)?)
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    /// Next whitespace-delimited token, skipping `#` comments.
    fn token(&mut self) -> Option<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.bytes.get(self.pos) == Some(&b'#') {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Some(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        let tok = self
            .token()
            .ok_or_else(|| Error::Format(format!("PGM header ends before {what}")))?;
        parse_decimal(tok, what)
    }
}

fn parse_decimal(tok: &[u8], what: &str) -> Result<u64> {
    std::str::from_utf8(tok)
        .ok()
        .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format(format!("invalid {what} {:?}", String::from_utf8_lossy(tok))))
}
