//! Synthetic micro-motion clips with known labels.
//!
//! Each subject has its own face-like texture; each clip adds a small
//! clip-specific pattern, brightness offset and sensor noise. The class is a
//! subtle motion confined to a disc around the mouth position: horizontal
//! drift, vertical drift, an intensity pulse, and diagonal drifts for any
//! further classes. All motions follow the same onset-apex-offset profile.
//! Two clips with the same (subject, clip index) differ only inside the disc.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use elbptop_core::VideoVolume;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifest::{DatasetManifest, ManifestEntry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub classes: usize,
    pub subjects: usize,
    pub clips_per_subject: usize,
    pub width: usize,
    pub height: usize,
    pub length: usize,
    pub frame_rate: f64,
    pub seed: u64,
    /// Peak displacement of the drift classes, pixels.
    pub drift: f64,
    /// Peak brightness change of the pulse class, grey levels.
    pub pulse: f64,
    /// Standard deviation of the per-pixel noise, grey levels.
    pub noise: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            classes: 3,
            subjects: 8,
            clips_per_subject: 4,
            width: 64,
            height: 64,
            length: 12,
            frame_rate: 100.0,
            seed: 0,
            drift: 2.0,
            pulse: 10.0,
            noise: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
}

impl Region {
    /// Raised-cosine weight, exactly zero outside the disc.
    pub fn weight(&self, x: f64, y: f64) -> f64 {
        let rho = ((x - self.cx).powi(2) + (y - self.cy).powi(2)).sqrt();
        if rho >= self.radius {
            0.0
        } else {
            0.5 * (1.0 + (PI * rho / self.radius).cos())
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Motion {
    Drift(f64, f64),
    Pulse,
}

struct Wave {
    kx: f64,
    ky: f64,
    phase: f64,
    amp: f64,
}

fn waves(rng: &mut ChaCha8Rng, n: usize, amp: (f64, f64)) -> Vec<Wave> {
    (0..n)
        .map(|_| {
            let wavelength = rng.gen_range(5.0..16.0);
            let theta = rng.gen_range(0.0..PI);
            let k = 2.0 * PI / wavelength;
            Wave { kx: k * theta.cos(), ky: k * theta.sin(), phase: rng.gen_range(0.0..2.0 * PI), amp: rng.gen_range(amp.0..amp.1) }
        })
        .collect()
}

fn eval(waves: &[Wave], x: f64, y: f64) -> f64 {
    waves.iter().map(|w| w.amp * (w.kx * x + w.ky * y + w.phase).sin()).sum()
}

const STREAM_SUBJECT: u64 = 1;
const STREAM_CLIP: u64 = 2;
const STREAM_NOISE: u64 = 3;

impl SynthSpec {
    fn rng(&self, purpose: u64, subject: usize, clip: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((purpose << 48) | ((subject as u64) << 24) | clip as u64);
        rng
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 || self.subjects < 2 || self.clips_per_subject == 0 {
            return Err(Error::Config("synthetic data needs at least 2 classes, 2 subjects and 1 clip each".into()));
        }
        if self.width < 8 || self.height < 8 || self.length < 2 {
            return Err(Error::Config("synthetic frames must be at least 8x8 and clips at least 2 frames".into()));
        }
        if !(self.frame_rate > 0.0) {
            return Err(Error::Config("frame_rate must be positive".into()));
        }
        Ok(())
    }

    pub fn region(&self) -> Region {
        Region { cx: 0.5 * self.width as f64, cy: 0.68 * self.height as f64, radius: 0.22 * self.width.min(self.height) as f64 }
    }

    pub fn class_of(&self, subject: usize, clip: usize) -> usize {
        (subject + clip) % self.classes
    }

    pub fn class_names(&self) -> Vec<String> {
        (0..self.classes)
            .map(|c| match c {
                0 => "drift_x".to_string(),
                1 => "drift_y".to_string(),
                2 => "pulse".to_string(),
                _ => format!("drift_{}", c),
            })
            .collect()
    }

    fn motion(&self, class: usize) -> Motion {
        match class {
            0 => Motion::Drift(1.0, 0.0),
            1 => Motion::Drift(0.0, 1.0),
            2 => Motion::Pulse,
            c => {
                let angle = PI * (c - 2) as f64 / (self.classes - 2) as f64 - PI / 4.0;
                Motion::Drift(angle.cos(), angle.sin())
            }
        }
    }

    /// Renders clip `clip` of `subject` with an arbitrary class, as
    /// unquantised grey values.
    pub fn render(&self, subject: usize, clip: usize, class: usize) -> VideoVolume {
        let (w, h, len) = (self.width, self.height, self.length);
        let mut srng = self.rng(STREAM_SUBJECT, subject, 0);
        let base = srng.gen_range(100.0..150.0);
        let face = waves(&mut srng, 10, (4.0, 12.0));
        let mut crng = self.rng(STREAM_CLIP, subject, clip);
        let offset = crng.gen_range(-8.0..8.0);
        let detail = waves(&mut crng, 3, (1.0, 4.0));
        let mut nrng = self.rng(STREAM_NOISE, subject, clip);
        let noise: Vec<f64> = (0..w * h * len)
            .map(|_| {
                // Box-Muller.
                let u1: f64 = nrng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = nrng.gen();
                self.noise * (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
            })
            .collect();

        let region = self.region();
        let (fw, fh) = (w as f64, h as f64);
        let scene = |x: f64, y: f64| {
            let shading = 30.0 * (-((x - 0.5 * fw) / (0.4 * fw)).powi(2) - ((y - 0.5 * fh) / (0.5 * fh)).powi(2)).exp();
            base + offset + shading + eval(&face, x, y) + eval(&detail, x, y)
        };
        let motion = self.motion(class);
        VideoVolume::from_fn(w, h, len, |x, y, t| {
            let (xf, yf) = (x as f64, y as f64);
            let profile = if len > 1 { (PI * t as f64 / (len - 1) as f64).sin().powi(2) } else { 0.0 };
            let wgt = region.weight(xf, yf) * profile;
            let v = match motion {
                Motion::Drift(dx, dy) => scene(xf - self.drift * dx * wgt, yf - self.drift * dy * wgt),
                Motion::Pulse => scene(xf, yf) + self.pulse * wgt,
            };
            v + noise[(t * h + y) * w + x]
        })
    }

    /// The clip as written to disk: rounded and clamped to 8 bits.
    pub fn clip(&self, subject: usize, clip: usize) -> VideoVolume {
        self.render(subject, clip, self.class_of(subject, clip)).map(|v| v.round().clamp(0.0, 255.0))
    }
}

pub fn clip_dir(subject: usize, clip: usize) -> PathBuf {
    PathBuf::from(format!("s{:02}", subject + 1)).join(format!("c{:02}", clip + 1))
}

/// Writes every clip as PNG frames under `out` plus `out/manifest.json`,
/// returning the manifest.
pub fn synth_generate(spec: &SynthSpec, out: &Path) -> Result<DatasetManifest> {
    spec.validate()?;
    let names = spec.class_names();
    let mut entries = Vec::new();
    for s in 0..spec.subjects {
        for c in 0..spec.clips_per_subject {
            let rel = clip_dir(s, c);
            let dir = out.join(&rel);
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let vol = spec.clip(s, c);
            for t in 0..spec.length {
                let bytes: Vec<u8> = vol.frame(t).iter().map(|&v| v as u8).collect();
                let img = image::GrayImage::from_raw(spec.width as u32, spec.height as u32, bytes)
                    .ok_or_else(|| Error::Config("frame buffer size mismatch".into()))?;
                let path = dir.join(format!("frame_{:03}.png", t));
                img.save(&path).map_err(|e| Error::Image { path, source: e })?;
            }
            entries.push(ManifestEntry {
                clip_id: Some(format!("s{:02}_c{:02}", s + 1, c + 1)),
                clip_path: rel,
                subject_id: format!("s{:02}", s + 1),
                label: names[spec.class_of(s, c)].clone(),
                dataset_id: "synth".into(),
            });
        }
    }
    let manifest = DatasetManifest { class_names: names, frame_rate: Some(spec.frame_rate), entries, root: out.to_path_buf() };
    manifest.save(&out.join("manifest.json"))?;
    Ok(manifest)
}
