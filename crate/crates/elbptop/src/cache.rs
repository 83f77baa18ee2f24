//! On-disk feature cache.
//!
//! One file per (descriptor configuration, clip):
//! `<root>/<config_hash>/<clip>.feat`. A file is a single ASCII header line
//!
//! ```text
//! elbptop-feat dims=<n> layout=<layout> config_hash=<hex> source=<hex>
//! ```
//!
//! followed by `n` little-endian `f32` values. `cache.json` next to the
//! files records the configuration the hash was computed from. Writes go to
//! a temporary file that is renamed into place, so readers never observe a
//! partial file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use elbptop_core::WpcaModel;

use crate::error::{Error, Result};

const MAGIC: &str = "elbptop-feat";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordHeader {
    pub dims: usize,
    pub layout: String,
    pub config_hash: String,
    pub source: String,
}

impl RecordHeader {
    fn line(&self) -> Result<String> {
        for (name, v) in [("layout", &self.layout), ("config_hash", &self.config_hash), ("source", &self.source)] {
            if v.is_empty() || v.chars().any(|c| c.is_whitespace()) {
                return Err(Error::Cache(format!("{} {:?} must be a non-empty token", name, v)));
            }
        }
        Ok(format!("{} dims={} layout={} config_hash={} source={}\n", MAGIC, self.dims, self.layout, self.config_hash, self.source))
    }

    fn parse(line: &str) -> Result<Self> {
        let mut parts = line.split(' ');
        if parts.next() != Some(MAGIC) {
            return Err(Error::Cache("not a feature file".into()));
        }
        let (mut dims, mut layout, mut config_hash, mut source) = (None, None, None, None);
        for part in parts {
            let (k, v) = part.split_once('=').ok_or_else(|| Error::Cache(format!("bad header field {:?}", part)))?;
            match k {
                "dims" => dims = v.parse().ok(),
                "layout" => layout = Some(v.to_string()),
                "config_hash" => config_hash = Some(v.to_string()),
                "source" => source = Some(v.to_string()),
                _ => return Err(Error::Cache(format!("unknown header field {:?}", k))),
            }
        }
        match (dims, layout, config_hash, source) {
            (Some(dims), Some(layout), Some(config_hash), Some(source)) => Ok(Self { dims, layout, config_hash, source }),
            _ => Err(Error::Cache("incomplete header".into())),
        }
    }
}

pub fn encode_record(header: &RecordHeader, values: &[f32]) -> Result<Vec<u8>> {
    if header.dims != values.len() {
        return Err(Error::Cache(format!("header says {} values, got {}", header.dims, values.len())));
    }
    let mut out = header.line()?.into_bytes();
    out.reserve(values.len() * 4);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_record(bytes: &[u8]) -> Result<(RecordHeader, Vec<f32>)> {
    let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| Error::Cache("missing header".into()))?;
    let line = std::str::from_utf8(&bytes[..nl]).map_err(|_| Error::Cache("header is not UTF-8".into()))?;
    let header = RecordHeader::parse(line)?;
    let body = &bytes[nl + 1..];
    if body.len() != header.dims * 4 {
        return Err(Error::Cache(format!("expected {} values, file holds {} bytes", header.dims, body.len())));
    }
    let values = body.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    Ok((header, values))
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes via a uniquely named sibling and renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().ok_or_else(|| Error::Cache(format!("{} has no parent", path.display())))?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{}.{}.{}.tmp", name, std::process::id(), TMP_COUNTER.fetch_add(1, Ordering::Relaxed)));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Characters outside `[A-Za-z0-9._-]` become `_`, with a hash suffix
/// whenever anything was replaced so distinct ids stay distinct.
pub fn file_stem_for(clip_id: &str) -> String {
    let clean: String =
        clip_id.chars().map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' }).collect();
    if clean == clip_id && !clean.starts_with('.') {
        clean
    } else {
        use sha2::{Digest, Sha256};
        let h = hex::encode(Sha256::digest(clip_id.as_bytes()));
        format!("{}-{}", clean.trim_start_matches('.'), &h[..12])
    }
}

#[derive(Debug, Clone)]
pub struct FeatureCache {
    root: PathBuf,
}

impl FeatureCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, config_hash: &str, clip_id: &str) -> PathBuf {
        self.root.join(config_hash).join(format!("{}.feat", file_stem_for(clip_id)))
    }

    /// Records the configuration behind `config_hash`.
    pub fn register(&self, config_hash: &str, key: &serde_json::Value) -> Result<()> {
        let path = self.root.join(config_hash).join("cache.json");
        let text = serde_json::to_string_pretty(key).map_err(|e| Error::Json { path: path.clone(), source: e })? + "\n";
        match fs::read_to_string(&path) {
            Ok(existing) if existing == text => Ok(()),
            Ok(_) => Err(Error::Cache(format!("{} describes a different configuration", path.display()))),
            Err(_) => write_atomic(&path, text.as_bytes()),
        }
    }

    /// Cached features, or `None` when absent or computed from different
    /// source frames or with a different layout.
    pub fn load(&self, config_hash: &str, clip_id: &str, source: &str, layout: &str) -> Result<Option<Vec<f32>>> {
        let path = self.path(config_hash, clip_id);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(path, e)),
        };
        let (header, values) = decode_record(&bytes).map_err(|e| e.context(path.display().to_string()))?;
        if header.config_hash != config_hash || header.source != source || header.layout != layout {
            return Ok(None);
        }
        Ok(Some(values))
    }

    pub fn store(&self, config_hash: &str, clip_id: &str, source: &str, layout: &str, values: &[f32]) -> Result<()> {
        let header = RecordHeader { dims: values.len(), layout: layout.into(), config_hash: config_hash.into(), source: source.into() };
        write_atomic(&self.path(config_hash, clip_id), &encode_record(&header, values)?)
    }
}

/// Stores a projection as one record: mean, then the `k × d` axes, then the
/// `k` whitening scales, all as `f32`.
pub fn save_wpca(path: &Path, model: &WpcaModel, config_hash: &str) -> Result<()> {
    let (d, k) = (model.dim(), model.k());
    let values: Vec<f32> =
        model.mean().iter().chain(model.components()).chain(model.scales()).map(|&v| v as f32).collect();
    let header = RecordHeader { dims: values.len(), layout: format!("wpca:d={}:k={}", d, k), config_hash: config_hash.into(), source: "fit".into() };
    write_atomic(path, &encode_record(&header, &values)?)
}

pub fn load_wpca(path: &Path) -> Result<(WpcaModel, String)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (header, values) = decode_record(&bytes)?;
    let dims = header.layout.strip_prefix("wpca:").and_then(|s| {
        let (d, k) = s.split_once(':')?;
        Some((d.strip_prefix("d=")?.parse::<usize>().ok()?, k.strip_prefix("k=")?.parse::<usize>().ok()?))
    });
    let (d, k) = dims.ok_or_else(|| Error::Cache(format!("{} is not a projection record", path.display())))?;
    if values.len() != d + k * d + k {
        return Err(Error::Cache(format!("{}: size does not match d={} k={}", path.display(), d, k)));
    }
    let v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
    let model = WpcaModel::from_parts(v[..d].to_vec(), v[d..d + k * d].to_vec(), v[d + k * d..].to_vec())?;
    Ok((model, header.config_hash))
}

#[cfg(test)]
mod tests {
    use super::*;
    use elbptop_core::{wpca_fit, wpca_transform, FeatureMatrix};

    #[test]
    fn record_round_trip() {
        let header = RecordHeader { dims: 3, layout: "LBP:XY:1x1x1:256".into(), config_hash: "ab".into(), source: "cd".into() };
        let values = [0.25f32, -1.0, 3.5e-8];
        let bytes = encode_record(&header, &values).unwrap();
        assert!(bytes.starts_with(b"elbptop-feat dims=3 layout=LBP:XY:1x1x1:256 config_hash=ab source=cd\n"));
        let (h, v) = decode_record(&bytes).unwrap();
        assert_eq!(h, header);
        assert_eq!(v, values);
        assert!(decode_record(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn stale_entries_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FeatureCache::new(dir.path());
        cache.store("h1", "s01/clip a", "src", "L", &[1.0, 2.0]).unwrap();
        assert_eq!(cache.load("h1", "s01/clip a", "src", "L").unwrap(), Some(vec![1.0, 2.0]));
        assert_eq!(cache.load("h1", "s01/clip a", "other", "L").unwrap(), None);
        assert_eq!(cache.load("h2", "s01/clip a", "src", "L").unwrap(), None);
        assert_ne!(file_stem_for("a/b"), file_stem_for("a_b"));
    }

    #[test]
    fn wpca_record_round_trip() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| (0..5).map(|j| ((i * 7 + j * 3) % 11) as f64).collect()).collect();
        let m = FeatureMatrix::from_rows(&rows).unwrap();
        let model = wpca_fit(&m, None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.feat");
        save_wpca(&path, &model, "cfg").unwrap();
        let (back, hash) = load_wpca(&path).unwrap();
        assert_eq!(hash, "cfg");
        let a = wpca_transform(&model, &m).unwrap();
        let b = wpca_transform(&back, &m).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-4 * (1.0 + x.abs()), "{} {}", x, y);
        }
    }
}
