mod common;

use std::fs;
use std::path::Path;

use elbptop::ingest::ClipSource;
use elbptop::manifest::list_frames;
use elbptop::pipeline::extract_features;
use elbptop::{DatasetManifest, Error, ManifestEntry};

fn write_clip(dir: &Path, frames: usize, w: u32, h: u32, seed: u8) {
    fs::create_dir_all(dir).unwrap();
    for t in 0..frames {
        let img = image::GrayImage::from_fn(w, h, |x, y| image::Luma([(x * 7 + y * 3 + t as u32 * 11 + seed as u32) as u8]));
        img.save(dir.join(format!("img{:04}.png", t + 1))).unwrap();
    }
}

fn entry(id: &str, subject: &str, label: &str) -> ManifestEntry {
    ManifestEntry { clip_id: Some(id.into()), clip_path: id.into(), subject_id: subject.into(), label: label.into(), dataset_id: "d".into() }
}

fn two_clip_manifest(root: &Path) -> DatasetManifest {
    write_clip(&root.join("a"), 5, 10, 8, 0);
    write_clip(&root.join("b"), 5, 10, 8, 40);
    let m = DatasetManifest {
        class_names: vec!["x".into(), "y".into()],
        frame_rate: Some(30.0),
        entries: vec![entry("a", "s1", "x"), entry("b", "s2", "y")],
        root: root.into(),
    };
    m.save(&root.join("manifest.json")).unwrap();
    m
}

#[test]
fn two_clips_of_five_frames_give_two_volumes_of_length_five() {
    let dir = tempfile::tempdir().unwrap();
    two_clip_manifest(dir.path());
    let m = DatasetManifest::load(&dir.path().join("manifest.json")).unwrap();
    let vols: Vec<_> = m.sorted_entries().iter().map(|e| ClipSource::open(&m, e).unwrap().load(None).unwrap()).collect();
    assert_eq!(vols.len(), 2);
    for v in &vols {
        assert_eq!((v.width(), v.height(), v.length()), (10, 8, 5));
    }
    assert_eq!(vols[1].at(2, 1, 3), (2 * 7 + 3 + 33 + 40) as f64);
    let resized = ClipSource::open(&m, &m.entries[0]).unwrap().load(Some([5, 4])).unwrap();
    assert_eq!((resized.width(), resized.height(), resized.length()), (5, 4, 5));
}

#[test]
fn manifest_round_trip_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let m = two_clip_manifest(dir.path());
    let back = DatasetManifest::load(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(back, m);
    let text = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let again: DatasetManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(again.entries, m.entries);
    assert_eq!(again.class_names, m.class_names);
}

#[test]
fn synthetic_clip_survives_png_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = common::small_spec();
    let m = elbptop::synth_generate(&spec, dir.path()).unwrap();
    let loaded = DatasetManifest::load(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(loaded, m);
    for (i, e) in loaded.sorted_entries().into_iter().enumerate().step_by(5) {
        let (s, c) = (i / spec.clips_per_subject, i % spec.clips_per_subject);
        let source = spec.render(s, c, spec.class_of(s, c));
        let vol = ClipSource::open(&loaded, e).unwrap().load(None).unwrap();
        let worst = vol.data().iter().zip(source.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // Quantisation only, unless the renderer had to clamp.
        let clamped = source.data().iter().any(|v| !(0.0..=255.0).contains(v));
        assert!(clamped || worst <= 1.0, "{} deviates by {}", e.id(), worst);
        assert_eq!(vol, spec.clip(s, c));
    }
}

#[test]
fn shuffled_manifest_gives_identical_features() {
    let dir = tempfile::tempdir().unwrap();
    let m = common::small_dataset(dir.path());
    let mut shuffled = m.clone();
    shuffled.entries.reverse();
    shuffled.entries.swap(1, 4);
    let cfg = common::small_config(None);
    let a = extract_features(&cfg, &m).unwrap();
    let b = extract_features(&cfg, &shuffled).unwrap();
    assert_eq!(a.clips, b.clips);
    assert_eq!(a.features, b.features);
}

#[test]
fn missing_and_misordered_frames_are_reported_per_clip() {
    let dir = tempfile::tempdir().unwrap();
    two_clip_manifest(dir.path());
    fs::remove_file(dir.path().join("b/img0003.png")).unwrap();
    let m = DatasetManifest::load(&dir.path().join("manifest.json")).unwrap();
    let err = ClipSource::open(&m, &m.entries[1]).unwrap_err();
    assert!(matches!(&err, Error::Ingest { clip, .. } if clip == "b"), "{}", err);

    fs::write(dir.path().join("a/aaa0009.png"), b"").unwrap();
    let err = list_frames("a", &dir.path().join("a")).unwrap_err();
    assert!(err.to_string().contains("non-monotonic"), "{}", err);

    fs::remove_dir_all(dir.path().join("b")).unwrap();
    let err = DatasetManifest::load(&dir.path().join("manifest.json")).unwrap_err();
    assert!(matches!(&err, Error::Ingest { clip, .. } if clip == "b"), "{}", err);
}

#[test]
fn undecodable_frame_names_the_clip() {
    let dir = tempfile::tempdir().unwrap();
    let m = two_clip_manifest(dir.path());
    fs::write(dir.path().join("a/img0002.png"), b"not a png").unwrap();
    let err = ClipSource::open(&m, &m.entries[0]).unwrap().load(None).unwrap_err();
    assert!(matches!(&err, Error::Ingest { clip, .. } if clip == "a"), "{}", err);
}

#[test]
fn labels_outside_class_names_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = two_clip_manifest(dir.path());
    m.entries[0].label = "z".into();
    m.save(&dir.path().join("manifest.json")).unwrap();
    assert!(matches!(DatasetManifest::load(&dir.path().join("manifest.json")), Err(Error::Manifest(_))));
}
