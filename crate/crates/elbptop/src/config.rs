//! Run configuration, presets and cache keys.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use elbptop_core::classify::{default_c_grid, CompositeProtocol};
use elbptop_core::preprocess::{EvmParams, FrequencyUnits, TimParams};
use elbptop_core::{BlockGrid, CodeKind, DescriptorConfig, EncodingKind, NeighborSpec, PlaneKind, PlaneSet};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Bumped whenever extraction output for an unchanged config would change.
const FEATURE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WpcaSettings {
    #[serde(default = "yes")]
    pub enabled: bool,
    /// Retained components; defaults to training size minus one.
    #[serde(default)]
    pub k: Option<usize>,
    /// Fit on every clip, test clips included. Off by default; the report
    /// flags it when on.
    #[serde(default)]
    pub transductive: bool,
}

fn yes() -> bool {
    true
}

impl Default for WpcaSettings {
    fn default() -> Self {
        Self { enabled: true, k: None, transductive: false }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Protocol {
    /// Leave one subject out over the manifest as given.
    #[default]
    Loso,
    /// Several source datasets merged into unified classes. `class_map`
    /// sends each manifest class name to a name in `classes`.
    Composite { style: CompositeProtocol, classes: Vec<String>, class_map: BTreeMap<String, String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Descriptors fused by concatenation, in this order.
    pub descriptors: Vec<DescriptorConfig>,
    #[serde(default)]
    pub evm: Option<EvmParams>,
    #[serde(default)]
    pub tim: Option<TimParams>,
    /// `[width, height]` frames are resized to; native size when absent.
    #[serde(default)]
    pub frame_size: Option<[usize; 2]>,
    #[serde(default)]
    pub wpca: WpcaSettings,
    #[serde(default)]
    pub protocol: Protocol,
    #[serde(default = "default_c_grid")]
    pub c_grid: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    /// Z-score fused features with training statistics.
    #[serde(default)]
    pub standardize: bool,
    /// L2-normalise each fused vector.
    #[serde(default)]
    pub renormalize_fused: bool,
}

fn descriptor(kind: CodeKind, radius: f64, points: usize, gap: f64, blocks: (usize, usize, usize)) -> DescriptorConfig {
    DescriptorConfig {
        kind,
        neighbors: NeighborSpec { radius, points, gap },
        encoding: EncodingKind::Full,
        planes: PlaneSet::TOP,
        blocks: BlockGrid { m: blocks.0, q: blocks.1, l: blocks.2 },
    }
}

impl RunConfig {
    pub const PRESETS: [&'static str; 3] = ["casme2", "smic", "samm"];

    /// Published per-dataset settings: best radius per descriptor, full
    /// 2^p encoding on all three planes, band [0.05, 0.4] of Nyquist.
    pub fn preset(name: &str) -> Result<Self> {
        let (blocks, alpha, radii) = match name {
            "casme2" => ((8, 8, 2), 20.0, [(2.0, 0.0), (2.0, 0.0), (3.0, 2.0)]),
            "smic" => ((8, 8, 2), 8.0, [(1.0, 0.0), (4.0, 0.0), (4.0, 1.0)]),
            "samm" => ((5, 5, 2), 20.0, [(2.0, 0.0), (2.0, 0.0), (3.0, 2.0)]),
            _ => return Err(Error::Config(format!("unknown preset {:?}, expected one of {:?}", name, Self::PRESETS))),
        };
        let kinds = [CodeKind::Adlbp, CodeKind::Lbp, CodeKind::Rdlbp];
        Ok(Self {
            descriptors: kinds.iter().zip(radii).map(|(&k, (r, gap))| descriptor(k, r, 8, gap, blocks)).collect(),
            evm: Some(EvmParams {
                alpha,
                low: 0.05,
                high: 0.4,
                units: FrequencyUnits::NyquistFraction,
                frame_rate: None,
                lambda_c: 16.0,
                levels: 4,
            }),
            tim: Some(TimParams { target_length: 10 }),
            frame_size: None,
            wpca: WpcaSettings::default(),
            protocol: Protocol::Loso,
            c_grid: default_c_grid(),
            seed: 0,
            cache_dir: None,
            standardize: false,
            renormalize_fused: false,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Json { path: path.into(), source: e })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Json { path: path.into(), source: e })?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// Checks everything that does not depend on the clips themselves.
    pub fn validate(&self) -> Result<()> {
        if self.descriptors.is_empty() {
            return Err(Error::Config("at least one descriptor is required".into()));
        }
        for d in &self.descriptors {
            d.validate()?;
        }
        if let Some(evm) = &self.evm {
            // Hertz edges are checked against the manifest frame rate later.
            if evm.units != FrequencyUnits::Hertz || evm.frame_rate.is_some() {
                evm.validate()?;
            }
        }
        if let Some(tim) = &self.tim {
            if tim.target_length < 2 {
                return Err(Error::Config("tim.target_length must be at least 2".into()));
            }
            for d in &self.descriptors {
                let margin = d.neighbors.radius.ceil() as usize;
                let temporal = d.planes.contains(PlaneKind::XT) || d.planes.contains(PlaneKind::YT);
                if temporal && tim.target_length < 2 * margin + 1 {
                    return Err(Error::Config(format!(
                        "{} needs at least {} frames, tim.target_length is {}",
                        d.tag(),
                        2 * margin + 1,
                        tim.target_length
                    )));
                }
            }
        }
        if let Some([w, h]) = self.frame_size {
            if w == 0 || h == 0 {
                return Err(Error::Config("frame_size must be positive".into()));
            }
        }
        if self.c_grid.is_empty() || self.c_grid.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::Config("c_grid must be a non-empty list of positive penalties".into()));
        }
        if self.wpca.k == Some(0) {
            return Err(Error::Config("wpca.k must be positive".into()));
        }
        if let Protocol::Composite { classes, class_map, .. } = &self.protocol {
            if let Some((from, to)) = class_map.iter().find(|(_, to)| !classes.contains(to)) {
                return Err(Error::Config(format!("class_map sends {:?} to unknown class {:?}", from, to)));
            }
        }
        Ok(())
    }

    /// Content key of one descriptor's features: everything upstream of the
    /// histogram that can change its values.
    pub fn feature_key(&self, descriptor: &DescriptorConfig) -> serde_json::Value {
        serde_json::json!({
            "version": FEATURE_FORMAT_VERSION,
            "frame_size": self.frame_size,
            "evm": self.evm,
            "tim": self.tim,
            "descriptor": descriptor,
        })
    }

    pub fn feature_hash(&self, descriptor: &DescriptorConfig) -> String {
        hash_json(&self.feature_key(descriptor))
    }
}

/// SHA-256 of the compact JSON text, hex encoded.
pub fn hash_json(value: &serde_json::Value) -> String {
    let text = serde_json::to_string(value).unwrap_or_default();
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in RunConfig::PRESETS {
            let cfg = RunConfig::preset(name).unwrap();
            cfg.validate().unwrap();
            let text = serde_json::to_string(&cfg).unwrap();
            let back: RunConfig = serde_json::from_str(&text).unwrap();
            assert_eq!(back, cfg);
        }
        assert!(RunConfig::preset("nope").is_err());
    }

    #[test]
    fn sparse_json_gets_defaults() {
        let text = r#"{"descriptors":[{"kind":"lbp","neighbors":{"radius":1.0,"points":8},"encoding":"u2","planes":"TOP","blocks":{"m":2,"q":2,"l":1}}]}"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert!(cfg.wpca.enabled && !cfg.wpca.transductive);
        assert_eq!(cfg.c_grid, default_c_grid());
        assert_eq!(cfg.protocol, Protocol::Loso);
    }

    #[test]
    fn short_tim_is_rejected() {
        let mut cfg = RunConfig::preset("smic").unwrap();
        cfg.tim = Some(TimParams { target_length: 8 });
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
