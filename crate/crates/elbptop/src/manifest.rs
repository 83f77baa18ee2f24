//! Dataset manifests: a JSON list of clips, each a directory of ordered
//! frame images with subject, label and source-dataset tags.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAME_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    /// Defaults to `clip_path`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_id: Option<String>,
    /// Frame directory, relative to the manifest file unless absolute.
    pub clip_path: PathBuf,
    pub subject_id: String,
    /// One of the manifest's `class_names`.
    pub label: String,
    #[serde(default)]
    pub dataset_id: String,
}

impl ManifestEntry {
    pub fn id(&self) -> String {
        self.clip_id.clone().unwrap_or_else(|| self.clip_path.to_string_lossy().into_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub class_names: Vec<String>,
    /// Frames per second of the source clips.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_rate: Option<f64>,
    pub entries: Vec<ManifestEntry>,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub root: PathBuf,
}

impl DatasetManifest {
    /// Parses and validates, checking that every clip directory exists.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| Error::Json { path: path.into(), source: e })?;
        manifest.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        manifest.validate()?;
        for entry in &manifest.entries {
            let dir = manifest.resolve(entry);
            if !dir.is_dir() {
                return Err(Error::Ingest { clip: entry.id(), detail: format!("frame directory {} does not exist", dir.display()) });
            }
        }
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Json { path: path.into(), source: e })?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.class_names.is_empty() {
            return Err(Error::Manifest("class_names is empty".into()));
        }
        let names: BTreeSet<&str> = self.class_names.iter().map(String::as_str).collect();
        if names.len() != self.class_names.len() {
            return Err(Error::Manifest("class_names contains duplicates".into()));
        }
        if let Some(fr) = self.frame_rate {
            if !(fr > 0.0 && fr.is_finite()) {
                return Err(Error::Manifest(format!("frame_rate must be positive, got {}", fr)));
            }
        }
        let mut ids = BTreeSet::new();
        for entry in &self.entries {
            let id = entry.id();
            if id.is_empty() {
                return Err(Error::Manifest("entry with an empty clip id".into()));
            }
            if !ids.insert(id.clone()) {
                return Err(Error::Manifest(format!("duplicate clip id {}", id)));
            }
            if entry.subject_id.is_empty() {
                return Err(Error::Manifest(format!("clip {} has an empty subject_id", id)));
            }
            if !names.contains(entry.label.as_str()) {
                return Err(Error::Manifest(format!("clip {} has label {:?} outside class_names", id, entry.label)));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        if entry.clip_path.is_absolute() {
            entry.clip_path.clone()
        } else {
            self.root.join(&entry.clip_path)
        }
    }

    pub fn label_index(&self, entry: &ManifestEntry) -> usize {
        self.class_names.iter().position(|c| *c == entry.label).unwrap_or(usize::MAX)
    }

    /// Entries in clip-id order, which fixes every downstream ordering.
    pub fn sorted_entries(&self) -> Vec<&ManifestEntry> {
        let mut v: Vec<&ManifestEntry> = self.entries.iter().collect();
        v.sort_by_key(|e| e.id());
        v
    }
}

/// Trailing decimal digits of a file stem.
fn frame_index(path: &Path) -> Option<u64> {
    let stem = path.file_stem()?.to_str()?;
    let digits: String = stem.chars().rev().take_while(char::is_ascii_digit).collect();
    if digits.is_empty() {
        return None;
    }
    digits.chars().rev().collect::<String>().parse().ok()
}

/// Image files of a clip directory in temporal order. File names must sort
/// into strictly increasing, gap-free frame indices.
pub fn list_frames(clip: &str, dir: &Path) -> Result<Vec<PathBuf>> {
    let read = fs::read_dir(dir).map_err(|e| Error::Ingest { clip: clip.into(), detail: format!("{}: {}", dir.display(), e) })?;
    let mut frames = Vec::new();
    for item in read {
        let path = item.map_err(|e| Error::io(dir, e))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if path.is_file() && ext.is_some_and(|e| FRAME_EXTENSIONS.contains(&e.as_str())) {
            frames.push(path);
        }
    }
    if frames.is_empty() {
        return Err(Error::Ingest { clip: clip.into(), detail: format!("no frame images in {}", dir.display()) });
    }
    frames.sort();
    let mut previous: Option<u64> = None;
    for f in &frames {
        let idx = frame_index(f).ok_or_else(|| Error::Ingest {
            clip: clip.into(),
            detail: format!("frame {} has no numeric index", f.display()),
        })?;
        if let Some(p) = previous {
            if idx <= p {
                return Err(Error::Ingest {
                    clip: clip.into(),
                    detail: format!("non-monotonic frame indices: {} follows {}", idx, p),
                });
            }
            if idx != p + 1 {
                return Err(Error::Ingest { clip: clip.into(), detail: format!("missing frame {} (next is {})", p + 1, idx) });
            }
        }
        previous = Some(idx);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str, label: &str) -> ManifestEntry {
        ManifestEntry { clip_id: Some(id.into()), clip_path: id.into(), subject_id: "s".into(), label: label.into(), dataset_id: String::new() }
    }

    #[test]
    fn validation() {
        let mut m = DatasetManifest { class_names: vec!["a".into(), "b".into()], frame_rate: None, entries: vec![entry("x", "a")], root: PathBuf::new() };
        assert!(m.validate().is_ok());
        m.entries.push(entry("y", "c"));
        assert!(matches!(m.validate(), Err(Error::Manifest(_))));
        m.entries[1] = entry("x", "b");
        assert!(matches!(m.validate(), Err(Error::Manifest(_))));
    }

    #[test]
    fn trailing_index() {
        assert_eq!(frame_index(Path::new("img_0007.png")), Some(7));
        assert_eq!(frame_index(Path::new("12.bmp")), Some(12));
        assert_eq!(frame_index(Path::new("frame.png")), None);
    }

    #[test]
    fn frame_order_rules() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["f_01.png", "f_02.png", "f_03.png", "notes.txt"] {
            fs::write(dir.path().join(name), b"").unwrap();
        }
        assert_eq!(list_frames("c", dir.path()).unwrap().len(), 3);
        fs::write(dir.path().join("f_5.png"), b"").unwrap();
        assert!(matches!(list_frames("c", dir.path()), Err(Error::Ingest { .. })));
        fs::remove_file(dir.path().join("f_5.png")).unwrap();
        fs::write(dir.path().join("f_10.png"), b"").unwrap();
        let err = list_frames("c", dir.path()).unwrap_err().to_string();
        assert!(err.contains("clip c") && err.contains("missing frame 4"), "{}", err);

        let dir = tempfile::tempdir().unwrap();
        for name in ["a_2.png", "b_1.png"] {
            fs::write(dir.path().join(name), b"").unwrap();
        }
        let err = list_frames("d", dir.path()).unwrap_err().to_string();
        assert!(err.contains("non-monotonic"), "{}", err);
    }
}
