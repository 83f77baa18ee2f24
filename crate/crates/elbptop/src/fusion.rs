//! Exhaustive search over descriptor and plane-subset combinations.

use elbptop_core::classify::{assemble_report, loso_plan, run_fold, FoldData, LinearSvmLearner, Metrics, NoopObserver};
use elbptop_core::{CodeKind, DescriptorHistogram, PlaneSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::manifest::DatasetManifest;
use crate::pipeline::{embed_fold, extract_features, fuse_folds, protocol_samples, FeatureSet};

/// One candidate: a plane subset (or absence) per template descriptor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheme {
    /// Position in enumeration order.
    pub index: usize,
    /// `choice[i]` is `None` when descriptor `i` is left out.
    pub choice: Vec<Option<PlaneSet>>,
}

impl Scheme {
    pub fn name(&self, kinds: &[CodeKind]) -> String {
        let parts: Vec<String> = self
            .choice
            .iter()
            .zip(kinds)
            .filter_map(|(c, k)| c.map(|set| format!("{}{}", k.name(), set.name())))
            .collect();
        parts.join("+")
    }
}

/// Every non-empty combination, descriptor 0 varying slowest and options in
/// the order absent, TOP, XYOT, XOT, YOT, XY. Three descriptors give
/// 6³ − 1 = 215 schemes.
pub fn enumerate_schemes(descriptors: usize) -> Vec<Scheme> {
    let options = PlaneSet::NAMED.len() + 1;
    let total = options.pow(descriptors as u32);
    (1..total)
        .enumerate()
        .map(|(index, code)| {
            let choice = (0..descriptors)
                .map(|i| {
                    let digit = code / options.pow((descriptors - 1 - i) as u32) % options;
                    (digit > 0).then(|| PlaneSet::NAMED[digit - 1])
                })
                .collect();
            Scheme { index, choice }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeResult {
    pub index: usize,
    pub name: String,
    pub metrics: Metrics,
    pub chosen_c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionRanking {
    /// Best first: accuracy, then macro F1, descending; then enumeration order.
    pub ranked: Vec<SchemeResult>,
}

impl FusionRanking {
    pub fn table(&self, top: usize) -> String {
        let mut out = format!("{:>5} {:>4} {:<40} {:>8} {:>8}\n", "rank", "id", "scheme", "Acc.", "F1");
        for (rank, r) in self.ranked.iter().take(top).enumerate() {
            out.push_str(&format!("{:>5} {:>4} {:<40} {:>8.4} {:>8.4}\n", rank + 1, r.index, r.name, r.metrics.mean_accuracy, r.metrics.f1_macro));
        }
        out
    }
}

/// Restricts stored TOP histograms to a plane subset.
fn select(set: &FeatureSet, d: usize, planes: PlaneSet) -> Result<Vec<Vec<f64>>> {
    set.features[d]
        .iter()
        .map(|v| {
            let h = DescriptorHistogram { values: v.clone(), layout: set.layouts[d].clone() };
            Ok(h.select_planes(planes)?.values)
        })
        .collect()
}

/// Searches all plane-subset combinations of the config's descriptors.
/// Each descriptor is extracted once on all three planes; subsets are read
/// out of that histogram.
pub fn fusion_search(config: &RunConfig, manifest: &DatasetManifest) -> Result<FusionRanking> {
    let mut template = config.clone();
    for d in &mut template.descriptors {
        d.planes = PlaneSet::TOP;
    }
    let set = extract_features(&template, manifest)?;
    fusion_search_features(&template, manifest, &set)
}

pub fn fusion_search_features(config: &RunConfig, manifest: &DatasetManifest, set: &FeatureSet) -> Result<FusionRanking> {
    if config.wpca.transductive {
        return Err(Error::Config("fusion search only supports fold-fitted projections".into()));
    }
    if set.layouts.iter().any(|l| l.planes.len() != 3) {
        return Err(Error::Config("fusion search needs descriptors extracted on all three planes".into()));
    }
    let (samples, class_names) = protocol_samples(config, manifest, &set.clips)?;
    let plans = loso_plan(&samples)?;
    let kinds: Vec<CodeKind> = set.descriptors.iter().map(|d| d.kind).collect();

    // embedded[d][option][fold]
    let jobs: Vec<(usize, usize)> = (0..kinds.len()).flat_map(|d| (0..PlaneSet::NAMED.len()).map(move |o| (d, o))).collect();
    let flat = jobs
        .par_iter()
        .map(|&(d, o)| {
            let feats = select(set, d, PlaneSet::NAMED[o])?;
            plans.iter().map(|p| embed_fold(&feats, p, &config.wpca, None, &NoopObserver)).collect::<Result<Vec<FoldData>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let embedded = |d: usize, set: PlaneSet, fold: usize| -> &FoldData {
        let o = PlaneSet::NAMED.iter().position(|s| *s == set).unwrap_or(0);
        &flat[d * PlaneSet::NAMED.len() + o][fold]
    };

    let learner = LinearSvmLearner::default();
    let mut results = enumerate_schemes(kinds.len())
        .par_iter()
        .map(|scheme| -> Result<SchemeResult> {
            let folds = plans
                .iter()
                .map(|plan| {
                    let parts: Vec<&FoldData> = scheme
                        .choice
                        .iter()
                        .enumerate()
                        .filter_map(|(d, c)| c.map(|s| embedded(d, s, plan.index)))
                        .collect();
                    let data = fuse_folds(&parts, config.renormalize_fused, config.standardize)?;
                    Ok(run_fold(plan, &samples, &data, &learner, &config.c_grid, &NoopObserver)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let report = assemble_report(folds, &samples, class_names.len())?;
            Ok(SchemeResult {
                index: scheme.index,
                name: scheme.name(&kinds),
                chosen_c: report.chosen_penalties(),
                metrics: report.metrics,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| {
        b.metrics
            .mean_accuracy
            .total_cmp(&a.metrics.mean_accuracy)
            .then(b.metrics.f1_macro.total_cmp(&a.metrics.f1_macro))
            .then(a.index.cmp(&b.index))
    });
    Ok(FusionRanking { ranked: results })
}
