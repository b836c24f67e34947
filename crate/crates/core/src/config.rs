//! Flat `key = value` configuration.
//!
//! [`KEYS`] is the single table of recognized keys and their defaults; the
//! command line exposes every entry as a `--<key>` flag.

use crate::error::{Error, Result};
use crate::features::shape::{CannyParams, CentroidMode};
use crate::features::SpectrumOptions;

pub struct KeySpec {
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

pub const KEYS: &[KeySpec] = &[
    KeySpec { key: "canny.low", default: "50", help: "Canny hysteresis low threshold (Sobel magnitude)" },
    KeySpec { key: "canny.high", default: "150", help: "Canny hysteresis high threshold (Sobel magnitude)" },
    KeySpec { key: "canny.sigma", default: "1.4", help: "Gaussian sigma applied before Canny, or 'none'" },
    KeySpec { key: "rdp.epsilon", default: "2.0", help: "Ramer-Douglas-Peucker tolerance in pixels" },
    KeySpec { key: "hull.threshold", default: "50", help: "intensities at or below this are background for hulls" },
    KeySpec { key: "spectrum.size", default: "128", help: "side of the square grid crops are resampled to" },
    KeySpec { key: "spectrum.include_dc", default: "true", help: "include the DC bin in the mean amplitude" },
    KeySpec { key: "features.centroids", default: "normalized", help: "edge/hull centroids: 'normalized' or 'raw'" },
    KeySpec { key: "kmeans.k", default: "auto", help: "cluster count, or 'auto' for the most detections in one frame" },
    KeySpec { key: "kmeans.seed", default: "0", help: "seed for center initialization" },
    KeySpec { key: "kmeans.tol", default: "1e-4", help: "centroid displacement convergence threshold" },
    KeySpec { key: "kmeans.max_iter", default: "300", help: "iteration cap" },
    KeySpec { key: "kmeans.normalize", default: "false", help: "z-score features before clustering" },
    KeySpec { key: "session.mode", default: "batch", help: "'batch' or 'online'" },
    KeySpec { key: "session.warmup", default: "30", help: "frames collected before the first fit in online mode" },
    KeySpec { key: "detections.min_score", default: "0.5", help: "detections scoring below this are ignored" },
    KeySpec { key: "detections.class", default: "diver", help: "class label of processed detections" },
    KeySpec { key: "detections.strict", default: "true", help: "reject unknown fields in detection files" },
    KeySpec { key: "identity.names", default: "", help: "comma separated names handed out by first appearance" },
    KeySpec { key: "eval.iou", default: "0.5", help: "minimum IoU for matching a detection to ground truth" },
    KeySpec { key: "threads", default: "0", help: "worker threads for feature extraction, 0 = all cores" },
];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub canny: CannyParams,
    pub rdp_epsilon: f64,
    pub hull_threshold: u8,
    pub spectrum: SpectrumOptions,
    pub centroid_mode: CentroidMode,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            canny: CannyParams::default(),
            rdp_epsilon: 2.0,
            hull_threshold: 50,
            spectrum: SpectrumOptions::default(),
            centroid_mode: CentroidMode::Normalized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterCount {
    /// Largest number of detections seen in a single frame.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig {
    pub k: ClusterCount,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub normalize: bool,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            k: ClusterCount::Auto,
            seed: 0,
            tol: 1e-4,
            max_iter: 300,
            normalize: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionMode {
    Batch,
    Online,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub features: FeatureConfig,
    pub clustering: ClusterConfig,
    pub mode: SessionMode,
    pub warmup_frames: usize,
    pub min_score: f64,
    pub class_label: String,
    pub names: Option<Vec<String>>,
    /// 0 = one worker per core.
    pub threads: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            features: FeatureConfig::default(),
            clustering: ClusterConfig::default(),
            mode: SessionMode::Batch,
            warmup_frames: 30,
            min_score: 0.5,
            class_label: "diver".into(),
            names: None,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub session: SessionConfig,
    pub strict: bool,
    pub iou_threshold: f64,
}

impl Default for Config {
    fn default() -> Self {
        let mut cfg = Config {
            session: SessionConfig::default(),
            strict: true,
            iou_threshold: 0.5,
        };
        for spec in KEYS {
            cfg.set(spec.key, spec.default)
                .expect("table defaults are valid");
        }
        cfg
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got '{value}'"))),
    }
}

fn ensure(ok: bool, key: &str, what: &str, value: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("{key}: {what}, got '{value}'")))
    }
}

impl Config {
    /// Set one key, validating it against its domain.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let s = &mut self.session;
        match key {
            "canny.low" | "canny.high" => {
                let v: f64 = parse(key, value)?;
                ensure((0.0..=255.0).contains(&v), key, "must be in [0, 255]", value)?;
                if key == "canny.low" {
                    s.features.canny.low = v;
                } else {
                    s.features.canny.high = v;
                }
            }
            "canny.sigma" => {
                s.features.canny.sigma = if value.trim().eq_ignore_ascii_case("none") {
                    None
                } else {
                    let v: f64 = parse(key, value)?;
                    ensure(v > 0.0 && v.is_finite(), key, "must be positive", value)?;
                    Some(v)
                };
            }
            "rdp.epsilon" => {
                let v: f64 = parse(key, value)?;
                ensure(v >= 0.0 && v.is_finite(), key, "must be >= 0", value)?;
                s.features.rdp_epsilon = v;
            }
            "hull.threshold" => s.features.hull_threshold = parse(key, value)?,
            "spectrum.size" => {
                let v: usize = parse(key, value)?;
                ensure((1..=4096).contains(&v), key, "must be in [1, 4096]", value)?;
                s.features.spectrum.size = v;
            }
            "spectrum.include_dc" => s.features.spectrum.include_dc = parse_bool(key, value)?,
            "features.centroids" => {
                s.features.centroid_mode = match value.trim() {
                    "normalized" => CentroidMode::Normalized,
                    "raw" => CentroidMode::Raw,
                    _ => return Err(Error::Config(format!("{key}: expected 'normalized' or 'raw', got '{value}'"))),
                }
            }
            "kmeans.k" => {
                s.clustering.k = if value.trim() == "auto" {
                    ClusterCount::Auto
                } else {
                    let v: usize = parse(key, value)?;
                    ensure(v >= 1, key, "must be >= 1 or 'auto'", value)?;
                    ClusterCount::Fixed(v)
                };
            }
            "kmeans.seed" => s.clustering.seed = parse(key, value)?,
            "kmeans.tol" => {
                let v: f64 = parse(key, value)?;
                ensure(v > 0.0 && v.is_finite(), key, "must be positive", value)?;
                s.clustering.tol = v;
            }
            "kmeans.max_iter" => {
                let v: usize = parse(key, value)?;
                ensure(v >= 1, key, "must be >= 1", value)?;
                s.clustering.max_iter = v;
            }
            "kmeans.normalize" => s.clustering.normalize = parse_bool(key, value)?,
            "session.mode" => {
                s.mode = match value.trim() {
                    "batch" => SessionMode::Batch,
                    "online" => SessionMode::Online,
                    _ => return Err(Error::Config(format!("{key}: expected 'batch' or 'online', got '{value}'"))),
                }
            }
            "session.warmup" => {
                let v: usize = parse(key, value)?;
                ensure(v >= 1, key, "must be >= 1", value)?;
                s.warmup_frames = v;
            }
            "detections.min_score" => {
                let v: f64 = parse(key, value)?;
                ensure((0.0..=1.0).contains(&v), key, "must be in [0, 1]", value)?;
                s.min_score = v;
            }
            "detections.class" => {
                ensure(!value.trim().is_empty(), key, "must not be empty", value)?;
                s.class_label = value.trim().to_string();
            }
            "detections.strict" => self.strict = parse_bool(key, value)?,
            "identity.names" => {
                let names: Vec<String> = value
                    .split(',')
                    .map(|n| n.trim().to_string())
                    .filter(|n| !n.is_empty())
                    .collect();
                s.names = (!names.is_empty()).then_some(names);
            }
            "eval.iou" => {
                let v: f64 = parse(key, value)?;
                ensure(v > 0.0 && v <= 1.0, key, "must be in (0, 1]", value)?;
                self.iou_threshold = v;
            }
            "threads" => s.threads = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Checks that span more than one key.
    pub fn validate(&self) -> Result<()> {
        let c = &self.session.features.canny;
        if c.low >= c.high {
            return Err(Error::Config(format!(
                "canny.low ({}) must be below canny.high ({})",
                c.low, c.high
            )));
        }
        Ok(())
    }

    /// Apply `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (pair, line) in parse_pairs(text)? {
            self.set(&pair.0, &pair.1)
                .map_err(|e| Error::Config(format!("line {line}: {e}")))?;
        }
        Ok(())
    }
}

type Pair = (String, String);

/// Split configuration text into `(key, value)` pairs with line numbers.
pub fn parse_pairs(text: &str) -> Result<Vec<(Pair, usize)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected 'key = value'", i + 1)));
        };
        out.push(((k.trim().to_string(), v.trim().to_string()), i + 1));
    }
    Ok(out)
}
