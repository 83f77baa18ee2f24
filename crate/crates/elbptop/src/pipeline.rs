//! Ingest, conditioning, cached extraction and fold-safe evaluation.

use std::collections::BTreeMap;

use elbptop_core::classify::{
    assemble_report, l2_normalize, loso_plan, run_fold, standardize, FeatureProvider, FoldData, FoldObserver, FoldPlan,
    LinearSvmLearner, NoopObserver, SampleInfo, Stage,
};
use elbptop_core::preprocess::{magnify, tim_interpolate, FrequencyUnits};
use elbptop_core::volume::HistogramLayout;
use elbptop_core::{
    extract_descriptor, fuse_concat, wpca_fit, wpca_transform, DescriptorConfig, EvalReport, FeatureMatrix, VideoVolume,
    WpcaModel,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::FeatureCache;
use crate::config::{Protocol, RunConfig, WpcaSettings};
use crate::error::{Error, Result};
use crate::ingest::ClipSource;
use crate::manifest::DatasetManifest;
use crate::report::{DescriptorSummary, RunReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub clip_id: String,
    pub subject_id: String,
    /// Index into the manifest's `class_names`.
    pub label: usize,
    pub dataset_id: String,
}

/// Per-descriptor features of every clip, in clip-id order.
#[derive(Debug, Clone)]
pub struct FeatureSet {
    pub clips: Vec<ClipRecord>,
    pub descriptors: Vec<DescriptorConfig>,
    pub layouts: Vec<HistogramLayout>,
    pub hashes: Vec<String>,
    /// `features[descriptor][clip]`; values are stored at `f32` precision.
    pub features: Vec<Vec<Vec<f64>>>,
    pub cache_hits: usize,
    pub computed: usize,
}

pub fn layout_of(d: &DescriptorConfig) -> Result<HistogramLayout> {
    Ok(HistogramLayout { kind: d.kind, planes: d.planes.planes(), blocks: d.blocks, bins: d.bins()? })
}

/// Magnification at the source rate, then temporal normalisation.
pub fn condition_volume(volume: &VideoVolume, config: &RunConfig, frame_rate: Option<f64>) -> Result<VideoVolume> {
    let mut vol = match &config.evm {
        Some(evm) => {
            let mut params = *evm;
            if params.units == FrequencyUnits::Hertz && params.frame_rate.is_none() {
                params.frame_rate = Some(frame_rate.ok_or_else(|| {
                    Error::Config("EVM band in hertz needs a frame rate in the config or the manifest".into())
                })?);
            }
            magnify(volume, &params)?
        }
        None => volume.clone(),
    };
    if let Some(tim) = &config.tim {
        vol = tim_interpolate(&vol, tim)?;
    }
    Ok(vol)
}

/// Conditions a volume and extracts every configured descriptor.
pub fn extract_volume(volume: &VideoVolume, config: &RunConfig, frame_rate: Option<f64>) -> Result<Vec<Vec<f32>>> {
    let vol = condition_volume(volume, config, frame_rate)?;
    config
        .descriptors
        .iter()
        .map(|d| Ok(extract_descriptor(&vol, d)?.values.iter().map(|&v| v as f32).collect()))
        .collect()
}

fn clip_records(manifest: &DatasetManifest) -> Vec<ClipRecord> {
    manifest
        .sorted_entries()
        .into_iter()
        .map(|e| ClipRecord {
            clip_id: e.id(),
            subject_id: e.subject_id.clone(),
            label: manifest.label_index(e),
            dataset_id: e.dataset_id.clone(),
        })
        .collect()
}

/// Extracts (or loads from the cache) every descriptor for every clip.
pub fn extract_features(config: &RunConfig, manifest: &DatasetManifest) -> Result<FeatureSet> {
    config.validate()?;
    manifest.validate()?;
    let entries = manifest.sorted_entries();
    let layouts = config.descriptors.iter().map(layout_of).collect::<Result<Vec<_>>>()?;
    let layout_names: Vec<String> = layouts.iter().map(HistogramLayout::describe).collect();
    let hashes: Vec<String> = config.descriptors.iter().map(|d| config.feature_hash(d)).collect();
    let cache = config.cache_dir.as_ref().map(FeatureCache::new);
    if let Some(cache) = &cache {
        for (d, h) in config.descriptors.iter().zip(&hashes) {
            cache.register(h, &config.feature_key(d))?;
        }
    }

    let per_clip = entries
        .par_iter()
        .map(|entry| -> Result<(Vec<Vec<f32>>, usize)> {
            let source = ClipSource::open(manifest, entry)?;
            let id = &source.clip_id;
            let mut found: Vec<Option<Vec<f32>>> = vec![None; hashes.len()];
            if let Some(cache) = &cache {
                for (i, h) in hashes.iter().enumerate() {
                    found[i] = cache.load(h, id, &source.digest, &layout_names[i])?;
                }
            }
            let hits = found.iter().filter(|f| f.is_some()).count();
            if hits < found.len() {
                let volume = source.load(config.frame_size)?;
                let vol = condition_volume(&volume, config, manifest.frame_rate).map_err(|e| e.context(format!("clip {}", id)))?;
                for (i, d) in config.descriptors.iter().enumerate() {
                    if found[i].is_some() {
                        continue;
                    }
                    let hist = extract_descriptor(&vol, d).map_err(|e| Error::from(e).context(format!("clip {}", id)))?;
                    let values: Vec<f32> = hist.values.iter().map(|&v| v as f32).collect();
                    if let Some(cache) = &cache {
                        cache.store(&hashes[i], id, &source.digest, &layout_names[i], &values)?;
                    }
                    found[i] = Some(values);
                }
            }
            Ok((found.into_iter().map(Option::unwrap_or_default).collect(), hits))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut features = vec![Vec::with_capacity(entries.len()); hashes.len()];
    let mut cache_hits = 0;
    for (clip, hits) in per_clip {
        cache_hits += hits;
        for (d, v) in clip.into_iter().enumerate() {
            features[d].push(v.into_iter().map(f64::from).collect());
        }
    }
    let total = entries.len() * hashes.len();
    Ok(FeatureSet {
        clips: clip_records(manifest),
        descriptors: config.descriptors.clone(),
        layouts,
        hashes,
        features,
        cache_hits,
        computed: total - cache_hits,
    })
}

/// Protocol samples and class names. Composite runs remap labels and
/// namespace subjects by dataset.
pub fn protocol_samples(config: &RunConfig, manifest: &DatasetManifest, clips: &[ClipRecord]) -> Result<(Vec<SampleInfo>, Vec<String>)> {
    match &config.protocol {
        Protocol::Loso => Ok((
            clips
                .iter()
                .map(|c| SampleInfo { subject_id: c.subject_id.clone(), label: c.label, dataset_id: c.dataset_id.clone() })
                .collect(),
            manifest.class_names.clone(),
        )),
        Protocol::Composite { classes, class_map, .. } => {
            let mut samples = Vec::with_capacity(clips.len());
            for c in clips {
                let name = &manifest.class_names[c.label];
                let unified = class_map
                    .get(name)
                    .and_then(|u| classes.iter().position(|x| x == u))
                    .ok_or_else(|| Error::Config(format!("class {:?} of clip {} has no composite mapping", name, c.clip_id)))?;
                samples.push(SampleInfo {
                    subject_id: format!("{}/{}", c.dataset_id, c.subject_id),
                    label: unified,
                    dataset_id: c.dataset_id.clone(),
                });
            }
            Ok((samples, classes.clone()))
        }
    }
}

fn rows_of<'a>(all: &'a [Vec<f64>], idx: &[usize]) -> Vec<&'a [f64]> {
    idx.iter().map(|&i| all[i].as_slice()).collect()
}

/// Projects one descriptor's features for a fold. Without a fixed model the
/// projection is fitted on the training clips only.
pub fn embed_fold(
    features: &[Vec<f64>],
    plan: &FoldPlan,
    settings: &WpcaSettings,
    fixed: Option<&WpcaModel>,
    observer: &dyn FoldObserver,
) -> Result<FoldData> {
    let train = rows_of(features, &plan.train);
    let test = rows_of(features, &plan.test);
    if !settings.enabled {
        return Ok(FoldData { train: train.iter().map(|r| r.to_vec()).collect(), test: test.iter().map(|r| r.to_vec()).collect() });
    }
    let fitted;
    let model = match fixed {
        Some(m) => m,
        None => {
            observer.record(plan.index, Stage::WpcaFit, &plan.train);
            fitted = wpca_fit(&FeatureMatrix::from_rows(&train)?, settings.k)?;
            &fitted
        }
    };
    let project = |rows: &[&[f64]]| -> Result<Vec<Vec<f64>>> {
        if rows.is_empty() {
            return Ok(Vec::new());
        }
        let m = wpca_transform(model, &FeatureMatrix::from_rows(rows)?)?;
        Ok(m.iter_rows().map(<[f64]>::to_vec).collect())
    };
    Ok(FoldData { train: project(&train)?, test: project(&test)? })
}

/// Concatenates per-descriptor fold data row by row, then applies the
/// optional fused-vector post-processing.
pub fn fuse_folds(parts: &[&FoldData], renormalize: bool, zscore: bool) -> Result<FoldData> {
    let fuse = |sides: Vec<&Vec<Vec<f64>>>| -> Result<Vec<Vec<f64>>> {
        let n = sides.first().map(|s| s.len()).unwrap_or(0);
        (0..n)
            .map(|i| {
                let row: Vec<&[f64]> = sides.iter().map(|s| s[i].as_slice()).collect();
                let mut v = fuse_concat(&row)?;
                if renormalize {
                    l2_normalize(&mut v);
                }
                Ok(v)
            })
            .collect()
    };
    let mut data = FoldData {
        train: fuse(parts.iter().map(|p| &p.train).collect())?,
        test: fuse(parts.iter().map(|p| &p.test).collect())?,
    };
    if zscore {
        standardize(&mut data);
    }
    Ok(data)
}

/// Per-fold projection of every descriptor followed by fusion.
pub struct EmbeddingProvider<'a> {
    pub features: &'a [Vec<Vec<f64>>],
    pub settings: &'a WpcaSettings,
    /// Models fitted on all clips, present only in transductive mode.
    pub transductive: Vec<WpcaModel>,
    pub renormalize: bool,
    pub standardize: bool,
    n_samples: usize,
}

impl<'a> EmbeddingProvider<'a> {
    pub fn new(features: &'a [Vec<Vec<f64>>], config: &'a RunConfig) -> Result<Self> {
        let n_samples = features.first().map(Vec::len).unwrap_or(0);
        let transductive = if config.wpca.enabled && config.wpca.transductive {
            features.iter().map(|f| Ok(wpca_fit(&FeatureMatrix::from_rows(f)?, config.wpca.k)?)).collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(Self {
            features,
            settings: &config.wpca,
            transductive,
            renormalize: config.renormalize_fused,
            standardize: config.standardize,
            n_samples,
        })
    }
}

impl FeatureProvider for EmbeddingProvider<'_> {
    fn prepare(&self, plan: &FoldPlan, observer: &dyn FoldObserver) -> elbptop_core::Result<FoldData> {
        if !self.transductive.is_empty() {
            let all: Vec<usize> = (0..self.n_samples).collect();
            observer.record(plan.index, Stage::WpcaFit, &all);
        }
        let parts = self
            .features
            .iter()
            .enumerate()
            .map(|(d, f)| embed_fold(f, plan, self.settings, self.transductive.get(d), observer))
            .collect::<Result<Vec<_>>>()
            .map_err(into_core)?;
        let refs: Vec<&FoldData> = parts.iter().collect();
        fuse_folds(&refs, self.renormalize, self.standardize).map_err(into_core)
    }
}

fn into_core(e: Error) -> elbptop_core::Error {
    match e {
        Error::Core(c) => c,
        other => elbptop_core::Error::Protocol(other.to_string()),
    }
}

/// Leave-one-subject-out over `samples`, folds in parallel.
pub fn evaluate_samples<P: FeatureProvider>(
    samples: &[SampleInfo],
    provider: &P,
    c_grid: &[f64],
    n_classes: usize,
    observer: &dyn FoldObserver,
) -> Result<EvalReport> {
    let plans = loso_plan(samples)?;
    let learner = LinearSvmLearner::default();
    let folds = plans
        .par_iter()
        .map(|plan| {
            let data = provider.prepare(plan, observer)?;
            run_fold(plan, samples, &data, &learner, c_grid, observer)
        })
        .collect::<elbptop_core::Result<Vec<_>>>()?;
    Ok(assemble_report(folds, samples, n_classes)?)
}

pub fn evaluate_features(
    config: &RunConfig,
    manifest: &DatasetManifest,
    set: &FeatureSet,
    observer: &dyn FoldObserver,
) -> Result<(EvalReport, Vec<String>)> {
    let (samples, class_names) = protocol_samples(config, manifest, &set.clips)?;
    let provider = EmbeddingProvider::new(&set.features, config)?;
    let report = evaluate_samples(&samples, &provider, &config.c_grid, class_names.len(), observer)?;
    Ok((report, class_names))
}

/// The whole pipeline: extraction (cached when configured) and evaluation.
pub fn run_pipeline(config: &RunConfig, manifest: &DatasetManifest) -> Result<RunReport> {
    let set = extract_features(config, manifest)?;
    let (evaluation, class_names) = evaluate_features(config, manifest, &set, &NoopObserver)?;
    let mut clips_per_class = BTreeMap::new();
    for c in &set.clips {
        *clips_per_class.entry(manifest.class_names[c.label].clone()).or_insert(0usize) += 1;
    }
    Ok(RunReport {
        config: config.clone(),
        class_names,
        clips: set.clips.len(),
        clips_per_class,
        descriptors: set
            .descriptors
            .iter()
            .zip(&set.layouts)
            .zip(&set.hashes)
            .map(|((d, l), h)| DescriptorSummary { tag: d.tag(), layout: l.describe(), dimension: l.dimension(), config_hash: h.clone() })
            .collect(),
        transductive_wpca: config.wpca.enabled && config.wpca.transductive,
        evaluation,
    })
}
