mod common;

use std::collections::BTreeMap;
use std::sync::Mutex;

use elbptop::config::{hash_json, Protocol};
use elbptop::pipeline::{evaluate_features, extract_features};
use elbptop::{run_pipeline, DatasetManifest, RunConfig, RunReport};
use elbptop_core::classify::{loso_plan, CompositeProtocol, FoldObserver, SampleInfo, Stage};
use elbptop_core::{EncodingKind, PlaneSet};
use proptest::prelude::*;

#[test]
fn warm_cache_skips_extraction_and_matches_cold_run() {
    let data = tempfile::tempdir().unwrap();
    let cache = tempfile::tempdir().unwrap();
    let m = common::small_dataset(data.path());
    let cfg = common::small_config(Some(cache.path()));

    let cold_set = extract_features(&cfg, &m).unwrap();
    assert_eq!((cold_set.cache_hits, cold_set.computed), (0, 36));
    let cold = run_pipeline(&cfg, &m).unwrap();
    let warm_set = extract_features(&cfg, &m).unwrap();
    assert_eq!((warm_set.cache_hits, warm_set.computed), (36, 0));
    let warm = run_pipeline(&cfg, &m).unwrap();
    assert_eq!(cold.to_json(), warm.to_json());

    // Without a cache the same (f32-rounded) features come out.
    let uncached = run_pipeline(&common::small_config(None), &m).unwrap();
    assert_eq!(uncached.evaluation, cold.evaluation);

    // Each descriptor directory records the configuration it was built from.
    for (d, h) in cfg.descriptors.iter().zip(&cold_set.hashes) {
        let text = std::fs::read_to_string(cache.path().join(h).join("cache.json")).unwrap();
        let key: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(key, cfg.feature_key(d));
        assert_eq!(&hash_json(&key), h);
    }
}

#[test]
fn corrupted_cache_entry_is_an_error_and_stale_entry_is_recomputed() {
    let data = tempfile::tempdir().unwrap();
    let cache = tempfile::tempdir().unwrap();
    let m = common::small_dataset(data.path());
    let cfg = common::small_config(Some(cache.path()));
    let first = extract_features(&cfg, &m).unwrap();

    // Changing a frame invalidates that clip's entries only.
    let clip = &m.sorted_entries()[0].clone();
    let frame = m.resolve(clip).join("frame_000.png");
    let mut img = image::open(&frame).unwrap().to_luma8();
    img.put_pixel(0, 0, image::Luma([img.get_pixel(0, 0)[0].wrapping_add(1)]));
    img.save(&frame).unwrap();
    let second = extract_features(&cfg, &m).unwrap();
    assert_eq!((second.computed, second.cache_hits), (3, 33));
    assert_eq!(first.features[0][1..], second.features[0][1..]);

    let path = elbptop::cache::FeatureCache::new(cache.path()).path(&first.hashes[0], &clip.id());
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
    assert!(extract_features(&cfg, &m).is_err());
}

#[test]
fn report_echoes_config_and_round_trips() {
    let data = tempfile::tempdir().unwrap();
    let m = common::small_dataset(data.path());
    let cfg = common::small_config(None);
    let report = run_pipeline(&cfg, &m).unwrap();
    assert_eq!(report.config, cfg);
    let path = data.path().join("report.json");
    report.save(&path).unwrap();
    let back = RunReport::load(&path).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.evaluation.folds.len(), 4);
    assert_eq!(back.descriptors.iter().map(|d| d.dimension).collect::<Vec<_>>(), vec![4 * 3 * 59; 3]);
    let table = report.table();
    assert!(table.contains("overall") && table.contains("drift_x"), "{}", table);
}

struct Recorder(Mutex<Vec<(usize, Stage, Vec<usize>)>>);

impl FoldObserver for Recorder {
    fn record(&self, fold: usize, stage: Stage, samples: &[usize]) {
        self.0.lock().unwrap().push((fold, stage, samples.to_vec()));
    }
}

fn samples_of(set: &elbptop::FeatureSet) -> Vec<SampleInfo> {
    set.clips
        .iter()
        .map(|c| SampleInfo { subject_id: c.subject_id.clone(), label: c.label, dataset_id: c.dataset_id.clone() })
        .collect()
}

#[test]
fn pipeline_never_fits_on_the_held_out_subject() {
    let data = tempfile::tempdir().unwrap();
    let m = common::small_dataset(data.path());
    let cfg = common::small_config(None);
    let set = extract_features(&cfg, &m).unwrap();
    let rec = Recorder(Mutex::new(Vec::new()));
    evaluate_features(&cfg, &m, &set, &rec).unwrap();
    let plans = loso_plan(&samples_of(&set)).unwrap();
    let log = rec.0.into_inner().unwrap();
    for stage in [Stage::WpcaFit, Stage::CSelection, Stage::SvmTrain] {
        assert!(log.iter().any(|(_, s, _)| *s == stage), "{:?} never observed", stage);
    }
    // One projection per descriptor per fold.
    assert_eq!(log.iter().filter(|(_, s, _)| *s == Stage::WpcaFit).count(), 3 * plans.len());
    for (fold, _, idx) in &log {
        let held = &plans[*fold].test;
        assert!(idx.iter().all(|i| !held.contains(i)), "fold {} touched its test clips", fold);
    }
}

#[test]
fn transductive_projection_is_flagged_and_observed() {
    let data = tempfile::tempdir().unwrap();
    let m = common::small_dataset(data.path());
    let mut cfg = common::small_config(None);
    cfg.wpca.transductive = true;
    let set = extract_features(&cfg, &m).unwrap();
    let rec = Recorder(Mutex::new(Vec::new()));
    evaluate_features(&cfg, &m, &set, &rec).unwrap();
    let log = rec.0.into_inner().unwrap();
    let fits: Vec<_> = log.iter().filter(|(_, s, _)| *s == Stage::WpcaFit).collect();
    assert!(fits.iter().all(|(_, _, idx)| idx.len() == set.clips.len()));
    assert!(run_pipeline(&cfg, &m).unwrap().transductive_wpca);
}

#[test]
fn composite_protocol_namespaces_subjects_and_reports_per_dataset() {
    let data = tempfile::tempdir().unwrap();
    let mut m = common::small_dataset(data.path());
    for (i, e) in m.entries.iter_mut().enumerate() {
        e.dataset_id = if i % 2 == 0 { "even".into() } else { "odd".into() };
    }
    let mut cfg = common::small_config(None);
    let class_map: BTreeMap<String, String> = [("drift_x", "motion"), ("drift_y", "motion"), ("pulse", "flash")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    cfg.protocol = Protocol::Composite { style: CompositeProtocol::Megc2019, classes: vec!["motion".into(), "flash".into()], class_map };
    let report = run_pipeline(&cfg, &m).unwrap();
    let ev = &report.evaluation;
    assert_eq!(report.class_names, vec!["motion", "flash"]);
    assert_eq!(ev.n_classes, 2);
    // Four subjects, each split across two datasets.
    assert_eq!(ev.folds.len(), 8);
    assert!(ev.folds.iter().all(|f| f.subject.starts_with("even/") || f.subject.starts_with("odd/")));
    let names: Vec<&str> = ev.per_dataset.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, vec!["even", "odd"]);
    assert_eq!(ev.per_dataset.iter().map(|(_, x)| x.samples).sum::<usize>(), 12);

    if let Protocol::Composite { class_map, .. } = &mut cfg.protocol {
        class_map.remove("pulse");
    }
    assert!(run_pipeline(&cfg, &m).is_err());
}

#[test]
fn single_subject_manifest_is_a_protocol_error() {
    let data = tempfile::tempdir().unwrap();
    let mut m = common::small_dataset(data.path());
    for e in &mut m.entries {
        e.subject_id = "only".into();
    }
    let err = run_pipeline(&common::small_config(None), &m).unwrap_err();
    assert!(err.to_string().contains("subjects"), "{}", err);
}

#[test]
fn hertz_band_uses_manifest_frame_rate() {
    let data = tempfile::tempdir().unwrap();
    let mut m: DatasetManifest = common::small_dataset(data.path());
    let mut cfg = common::small_config(None);
    let evm = cfg.evm.as_mut().unwrap();
    evm.units = elbptop_core::preprocess::FrequencyUnits::Hertz;
    evm.low = 5.0;
    evm.high = 30.0;
    cfg.validate().unwrap();
    let a = extract_features(&cfg, &m).unwrap();
    // 5..30 Hz at 100 fps is 0.1..0.6 of Nyquist.
    let mut nyq = common::small_config(None);
    let e = nyq.evm.as_mut().unwrap();
    e.low = 0.1;
    e.high = 0.6;
    let b = extract_features(&nyq, &m).unwrap();
    for (x, y) in a.features.iter().flatten().flatten().zip(b.features.iter().flatten().flatten()) {
        assert!((x - y).abs() < 1e-6);
    }
    m.frame_rate = None;
    assert!(extract_features(&cfg, &m).is_err());
}

#[derive(Debug, Clone)]
enum Tweak {
    Radius(f64),
    Points(usize),
    Gap(f64),
    Encoding(usize),
    Planes(usize),
    Blocks(usize, usize, usize),
    Alpha(f64),
    Band(f64, f64),
    LambdaC(f64),
    Levels(usize),
    Tim(usize),
    NoEvm,
    NoTim,
    FrameSize(usize, usize),
}

fn tweak() -> impl Strategy<Value = Tweak> {
    prop_oneof![
        (0.5f64..5.0).prop_map(Tweak::Radius),
        (4usize..16).prop_map(Tweak::Points),
        (0.1f64..0.9).prop_map(Tweak::Gap),
        (0usize..4).prop_map(Tweak::Encoding),
        (0usize..5).prop_map(Tweak::Planes),
        (1usize..9, 1usize..9, 1usize..4).prop_map(|(a, b, c)| Tweak::Blocks(a, b, c)),
        (0.0f64..50.0).prop_map(Tweak::Alpha),
        (0.01f64..0.3, 0.35f64..0.95).prop_map(|(a, b)| Tweak::Band(a, b)),
        (1.0f64..64.0).prop_map(Tweak::LambdaC),
        (1usize..8).prop_map(Tweak::Levels),
        (5usize..40).prop_map(Tweak::Tim),
        Just(Tweak::NoEvm),
        Just(Tweak::NoTim),
        (8usize..256, 8usize..256).prop_map(|(a, b)| Tweak::FrameSize(a, b)),
    ]
}

fn apply(cfg: &mut RunConfig, which: usize, t: &Tweak) {
    let d = &mut cfg.descriptors[which];
    match *t {
        Tweak::Radius(r) => d.neighbors.radius = r,
        Tweak::Points(p) => d.neighbors.points = p,
        Tweak::Gap(g) => d.neighbors.gap = g,
        Tweak::Encoding(e) => d.encoding = [EncodingKind::Full, EncodingKind::U2, EncodingKind::Ri, EncodingKind::Riu2][e],
        Tweak::Planes(p) => d.planes = PlaneSet::NAMED[p],
        Tweak::Blocks(m, q, l) => d.blocks = elbptop_core::BlockGrid { m, q, l },
        Tweak::Alpha(a) => cfg.evm.as_mut().unwrap().alpha = a,
        Tweak::Band(lo, hi) => {
            let e = cfg.evm.as_mut().unwrap();
            e.low = lo;
            e.high = hi;
        }
        Tweak::LambdaC(l) => cfg.evm.as_mut().unwrap().lambda_c = l,
        Tweak::Levels(l) => cfg.evm.as_mut().unwrap().levels = l,
        Tweak::Tim(n) => cfg.tim = Some(elbptop_core::preprocess::TimParams { target_length: n }),
        Tweak::NoEvm => cfg.evm = None,
        Tweak::NoTim => cfg.tim = None,
        Tweak::FrameSize(w, h) => cfg.frame_size = Some([w, h]),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn any_parameter_change_changes_the_cache_key(which in 0usize..3, t in tweak()) {
        let base = common::small_config(None);
        let mut changed = base.clone();
        apply(&mut changed, which, &t);
        let d0 = &base.descriptors[which];
        let d1 = &changed.descriptors[which];
        if changed.feature_key(d1) != base.feature_key(d0) {
            prop_assert_ne!(changed.feature_hash(d1), base.feature_hash(d0));
        } else {
            // Only a no-op tweak (same value drawn) may keep the key.
            prop_assert_eq!(&changed, &base);
        }
    }

    #[test]
    fn evaluation_settings_do_not_change_the_cache_key(seed in any::<u64>(), c in 0.01f64..100.0, k in 1usize..20) {
        let base = common::small_config(None);
        let mut other = base.clone();
        other.seed = seed;
        other.c_grid = vec![c];
        other.wpca.k = Some(k);
        other.standardize = true;
        for (a, b) in base.descriptors.iter().zip(&other.descriptors) {
            prop_assert_eq!(base.feature_hash(a), other.feature_hash(b));
        }
    }
}
