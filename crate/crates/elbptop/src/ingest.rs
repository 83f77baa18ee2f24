//! Frame decoding and clip loading.

use std::fs;
use std::path::{Path, PathBuf};

use elbptop_core::preprocess::{to_gray_resize, ColorFrame};
use elbptop_core::VideoVolume;
use image::DynamicImage;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::manifest::{list_frames, DatasetManifest, ManifestEntry};

pub fn decode_frame(path: &Path) -> Result<ColorFrame> {
    let img = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::Image { path: path.into(), source: e })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(match img {
        DynamicImage::ImageLuma8(g) => ColorFrame::gray(w, h, g.into_raw()),
        other if !other.color().has_color() => ColorFrame::gray(w, h, other.to_luma8().into_raw()),
        other => ColorFrame::rgb(w, h, other.to_rgb8().into_raw()),
    })
}

/// A clip's frame files plus a digest of their names and contents.
#[derive(Debug, Clone)]
pub struct ClipSource {
    pub clip_id: String,
    pub frames: Vec<PathBuf>,
    pub digest: String,
}

impl ClipSource {
    pub fn open(manifest: &DatasetManifest, entry: &ManifestEntry) -> Result<Self> {
        let clip_id = entry.id();
        let frames = list_frames(&clip_id, &manifest.resolve(entry))?;
        let mut hasher = Sha256::new();
        for f in &frames {
            let bytes = fs::read(f).map_err(|e| Error::io(f, e))?;
            hasher.update(f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default().as_bytes());
            hasher.update((bytes.len() as u64).to_le_bytes());
            hasher.update(&bytes);
        }
        Ok(Self { clip_id, frames, digest: hex::encode(hasher.finalize()) })
    }

    /// Decodes every frame into a grey volume, resized to `size` or kept
    /// at the first frame's size.
    pub fn load(&self, size: Option<[usize; 2]>) -> Result<VideoVolume> {
        let ingest = |detail: String| Error::Ingest { clip: self.clip_id.clone(), detail };
        let frames = self.frames.iter().map(|p| decode_frame(p)).collect::<Result<Vec<_>>>().map_err(|e| ingest(e.to_string()))?;
        let first = frames.first().ok_or_else(|| ingest("no frames".into()))?;
        let size = size.map(|[w, h]| (w, h)).unwrap_or((first.width, first.height));
        to_gray_resize(&frames, size).map_err(|e| ingest(e.to_string()))
    }
}
