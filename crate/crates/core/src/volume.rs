//! Video volumes, orthogonal plane slicing and block-histogram descriptors.
//!
//! A descriptor histogram is laid out plane-major, then block, then bin.
//! Planes appear in the fixed order XY, XT, YT (restricted to the configured
//! set). Blocks are ordered `t`-major, then `y`, then `x`:
//! `block = (bt * q + by) * m + bx`.
//!
//! Each plane visits every centre whose sampling neighbourhood fits inside
//! its slice, and the centre's global `(x, y, t)` decides its block. The
//! grid partitions the interior box that keeps a margin of `ceil(r)` from
//! every face of the volume (an axis too short for that margin is used
//! whole). Centres outside the box along an axis their plane does not
//! sample, such as XY centres in the first frames, clamp to the edge block.
//! The grid therefore does not depend on the plane set, and a plane's
//! segment is identical whether it is extracted alone or as part of TOP.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::codes::{adlbp_code, lbp_code, rdlbp_code, CodeKind, EncodingKind, EncodingTable, Grid2, NeighborSpec, RingSampler};
use crate::error::{config_err, Error, Result};

/// Per-clip metadata carried alongside the intensities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClipMeta {
    pub clip_id: String,
    pub subject_id: String,
    pub label: Option<usize>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub dataset_id: String,
}

/// Grayscale intensities indexed `(x, y, t)`, stored `x`-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoVolume {
    width: usize,
    height: usize,
    length: usize,
    data: Vec<f64>,
    pub meta: ClipMeta,
}

impl VideoVolume {
    pub fn new(width: usize, height: usize, length: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || length == 0 {
            return Err(Error::Shape(alloc::format!(
                "volume dimensions must be positive, got {}x{}x{}",
                width,
                height,
                length
            )));
        }
        if data.len() != width * height * length {
            return Err(Error::Shape(alloc::format!(
                "{}x{}x{} volume needs {} values, got {}",
                width,
                height,
                length,
                width * height * length,
                data.len()
            )));
        }
        Ok(Self { width, height, length, data, meta: ClipMeta::default() })
    }

    pub fn from_fn(width: usize, height: usize, length: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height * length);
        for t in 0..length {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(x, y, t));
                }
            }
        }
        Self { width, height, length, data, meta: ClipMeta::default() }
    }

    /// Stacks equally sized frames.
    pub fn from_frames(width: usize, height: usize, frames: &[Vec<f64>]) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Shape("no frames".into()));
        }
        let mut data = Vec::with_capacity(width * height * frames.len());
        for (i, frame) in frames.iter().enumerate() {
            if frame.len() != width * height {
                return Err(Error::Shape(alloc::format!(
                    "frame {} has {} values, expected {}",
                    i,
                    frame.len(),
                    width * height
                )));
            }
            data.extend_from_slice(frame);
        }
        Self::new(width, height, frames.len(), data)
    }

    pub fn with_meta(mut self, meta: ClipMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn length(&self) -> usize {
        self.length
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, t: usize) -> f64 {
        self.data[(t * self.height + y) * self.width + x]
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.data[t * n..(t + 1) * n]
    }

    /// Applies `f` to every intensity.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            length: self.length,
            data: self.data.iter().map(|&v| f(v)).collect(),
            meta: self.meta.clone(),
        }
    }
}

/// One of the three orthogonal planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PlaneKind {
    XY,
    XT,
    YT,
}

impl PlaneKind {
    pub const ALL: [PlaneKind; 3] = [PlaneKind::XY, PlaneKind::XT, PlaneKind::YT];

    fn bit(self) -> u8 {
        match self {
            PlaneKind::XY => 1,
            PlaneKind::XT => 2,
            PlaneKind::YT => 4,
        }
    }

    /// Whether the plane samples along axis 0 = x, 1 = y, 2 = t.
    fn samples_axis(self, axis: usize) -> bool {
        matches!(
            (self, axis),
            (PlaneKind::XY, 0) | (PlaneKind::XY, 1) | (PlaneKind::XT, 0) | (PlaneKind::XT, 2) | (PlaneKind::YT, 1) | (PlaneKind::YT, 2)
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            PlaneKind::XY => "XY",
            PlaneKind::XT => "XT",
            PlaneKind::YT => "YT",
        }
    }
}

/// Non-empty subset of the three planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlaneSet(u8);

impl PlaneSet {
    pub const TOP: PlaneSet = PlaneSet(7);
    pub const XYOT: PlaneSet = PlaneSet(6);
    pub const XOT: PlaneSet = PlaneSet(2);
    pub const YOT: PlaneSet = PlaneSet(4);
    pub const XY: PlaneSet = PlaneSet(1);

    /// The five named combinations, in the order they are usually reported.
    pub const NAMED: [PlaneSet; 5] = [Self::TOP, Self::XYOT, Self::XOT, Self::YOT, Self::XY];

    pub fn from_planes(planes: &[PlaneKind]) -> Result<Self> {
        let bits = planes.iter().fold(0u8, |acc, p| acc | p.bit());
        if bits == 0 {
            return Err(config_err!("plane set must not be empty"));
        }
        Ok(PlaneSet(bits))
    }

    pub fn contains(self, plane: PlaneKind) -> bool {
        self.0 & plane.bit() != 0
    }

    /// Planes in canonical order.
    pub fn planes(self) -> Vec<PlaneKind> {
        PlaneKind::ALL.iter().copied().filter(|p| self.contains(*p)).collect()
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: PlaneSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn name(self) -> String {
        match self.0 {
            7 => "TOP".into(),
            6 => "XYOT".into(),
            2 => "XOT".into(),
            4 => "YOT".into(),
            1 => "XY".into(),
            _ => {
                let names: Vec<&str> = self.planes().iter().map(|p| p.name()).collect();
                names.join("+")
            }
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "TOP" => Ok(Self::TOP),
            "XYOT" => Ok(Self::XYOT),
            "XOT" => Ok(Self::XOT),
            "YOT" => Ok(Self::YOT),
            other => {
                let mut planes = Vec::new();
                for part in other.split('+') {
                    planes.push(match part.trim() {
                        "XY" => PlaneKind::XY,
                        "XT" => PlaneKind::XT,
                        "YT" => PlaneKind::YT,
                        _ => return Err(config_err!("unknown plane set `{}`", s)),
                    });
                }
                Self::from_planes(&planes)
            }
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for PlaneSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for PlaneSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        PlaneSet::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Number of blocks along x (`m`), y (`q`) and t (`l`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockGrid {
    pub m: usize,
    pub q: usize,
    pub l: usize,
}

impl BlockGrid {
    pub fn new(m: usize, q: usize, l: usize) -> Result<Self> {
        if m == 0 || q == 0 || l == 0 {
            return Err(config_err!("block counts must be positive, got {}x{}x{}", m, q, l));
        }
        Ok(Self { m, q, l })
    }

    pub fn count(&self) -> usize {
        self.m * self.q * self.l
    }
}

/// Maps a coordinate to one of `k` consecutive blocks covering `[lo, lo + len)`.
/// The remainder `len % k` goes to the trailing blocks, one extra cell each.
/// Coordinates outside the range clamp to the nearest end block.
#[derive(Debug, Clone, Copy)]
struct AxisSplit {
    lo: usize,
    len: usize,
    base: usize,
    head: usize,
    split: usize,
}

impl AxisSplit {
    fn new(lo: usize, len: usize, k: usize) -> Self {
        let base = len / k;
        let head = k - len % k;
        Self { lo, len, base, head, split: head * base }
    }

    /// Interior `[margin, dim - margin)` when non-empty, otherwise the whole axis.
    fn interior(dim: usize, margin: usize, k: usize) -> Self {
        if dim > 2 * margin {
            Self::new(margin, dim - 2 * margin, k)
        } else {
            Self::new(0, dim, k)
        }
    }

    #[inline]
    fn block(&self, coord: usize) -> usize {
        let c = coord.saturating_sub(self.lo).min(self.len - 1);
        if c < self.split {
            c / self.base
        } else {
            self.head + (c - self.split) / (self.base + 1)
        }
    }
}

/// Everything that determines one histogram feature.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DescriptorConfig {
    pub kind: CodeKind,
    pub neighbors: NeighborSpec,
    pub encoding: EncodingKind,
    pub planes: PlaneSet,
    pub blocks: BlockGrid,
}

impl DescriptorConfig {
    pub fn validate(&self) -> Result<()> {
        self.neighbors.validate()?;
        BlockGrid::new(self.blocks.m, self.blocks.q, self.blocks.l)?;
        if self.planes.is_empty() {
            return Err(config_err!("plane set must not be empty"));
        }
        Ok(())
    }

    pub fn bins(&self) -> Result<usize> {
        Ok(EncodingTable::new(self.encoding, self.neighbors.points)?.bins())
    }

    /// `m · q · l · |planes| · bins`.
    pub fn dimension(&self) -> Result<usize> {
        Ok(self.blocks.count() * self.planes.len() * self.bins()?)
    }

    /// Short human-readable tag such as `ADLBPTOP(1,8)`.
    pub fn tag(&self) -> String {
        let n = &self.neighbors;
        let planes = self.planes.name();
        match self.kind {
            CodeKind::Rdlbp => alloc::format!("{}{}({},{},{})", self.kind.name(), planes, n.radius, n.points, n.gap),
            _ => alloc::format!("{}{}({},{})", self.kind.name(), planes, n.radius, n.points),
        }
    }
}

/// Layout of a descriptor histogram.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HistogramLayout {
    pub kind: CodeKind,
    pub planes: Vec<PlaneKind>,
    pub blocks: BlockGrid,
    pub bins: usize,
}

impl HistogramLayout {
    pub fn segment_len(&self) -> usize {
        self.bins
    }

    pub fn plane_len(&self) -> usize {
        self.blocks.count() * self.bins
    }

    pub fn dimension(&self) -> usize {
        self.planes.len() * self.plane_len()
    }

    /// Compact single-line description, used in cache headers.
    pub fn describe(&self) -> String {
        let planes: Vec<&str> = self.planes.iter().map(|p| p.name()).collect();
        alloc::format!(
            "{}:{}:{}x{}x{}:{}",
            self.kind.name(),
            planes.join("+"),
            self.blocks.m,
            self.blocks.q,
            self.blocks.l,
            self.bins
        )
    }
}

/// Concatenated per-plane, per-block normalised histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorHistogram {
    pub values: Vec<f64>,
    pub layout: HistogramLayout,
}

impl DescriptorHistogram {
    /// The `(plane, block)` segment, `plane_index` counting configured planes.
    pub fn segment(&self, plane_index: usize, block: usize) -> &[f64] {
        let start = plane_index * self.layout.plane_len() + block * self.layout.bins;
        &self.values[start..start + self.layout.bins]
    }

    /// Restricts the histogram to a subset of its planes, keeping canonical order.
    pub fn select_planes(&self, subset: PlaneSet) -> Result<DescriptorHistogram> {
        let mut values = Vec::new();
        let mut planes = Vec::new();
        for plane in subset.planes() {
            let idx = self.layout.planes.iter().position(|p| *p == plane).ok_or_else(|| {
                config_err!("plane {} not present in histogram", plane.name())
            })?;
            let len = self.layout.plane_len();
            values.extend_from_slice(&self.values[idx * len..(idx + 1) * len]);
            planes.push(plane);
        }
        Ok(DescriptorHistogram { values, layout: HistogramLayout { planes, ..self.layout.clone() } })
    }
}

/// A 2-D view into a volume along one plane, with the orthogonal coordinate fixed.
#[derive(Debug, Clone, Copy)]
pub struct PlaneView<'a> {
    volume: &'a VideoVolume,
    plane: PlaneKind,
    fixed: usize,
    base: usize,
    stride_u: usize,
    stride_v: usize,
    width: usize,
    height: usize,
}

impl<'a> PlaneView<'a> {
    pub fn new(volume: &'a VideoVolume, plane: PlaneKind, fixed: usize) -> Self {
        let (w, h, l) = (volume.width, volume.height, volume.length);
        let (base, stride_u, stride_v, width, height) = match plane {
            PlaneKind::XY => (fixed * w * h, 1, w, w, h),
            PlaneKind::XT => (fixed * w, 1, w * h, w, l),
            PlaneKind::YT => (fixed, w, w * h, h, l),
        };
        Self { volume, plane, fixed, base, stride_u, stride_v, width, height }
    }

    pub fn plane(&self) -> PlaneKind {
        self.plane
    }

    /// The coordinate held constant: `t` for XY, `y` for XT, `x` for YT.
    pub fn fixed(&self) -> usize {
        self.fixed
    }

    /// Global `(x, y, t)` of plane coordinates `(u, v)`.
    #[inline]
    pub fn global(&self, u: usize, v: usize) -> (usize, usize, usize) {
        match self.plane {
            PlaneKind::XY => (u, v, self.fixed),
            PlaneKind::XT => (u, self.fixed, v),
            PlaneKind::YT => (self.fixed, u, v),
        }
    }
}

impl Grid2 for PlaneView<'_> {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    #[inline]
    fn at(&self, u: usize, v: usize) -> f64 {
        self.volume.data[self.base + u * self.stride_u + v * self.stride_v]
    }
}

fn slice_count(volume: &VideoVolume, plane: PlaneKind) -> usize {
    match plane {
        PlaneKind::XY => volume.length,
        PlaneKind::XT => volume.height,
        PlaneKind::YT => volume.width,
    }
}

/// All slices of the requested planes: XY frames per `t`, XT slices per `y`,
/// YT slices per `x`.
pub fn slice_planes(volume: &VideoVolume, planes: PlaneSet) -> Result<impl Iterator<Item = PlaneView<'_>>> {
    if planes.is_empty() {
        return Err(config_err!("plane set must not be empty"));
    }
    Ok(planes
        .planes()
        .into_iter()
        .flat_map(move |plane| (0..slice_count(volume, plane)).map(move |i| PlaneView::new(volume, plane, i))))
}

fn check_dimensions(volume: &VideoVolume, planes: PlaneSet, margin: usize) -> Result<()> {
    let need = 2 * margin + 1;
    let dims = [("x", volume.width), ("y", volume.height), ("t", volume.length)];
    for (axis, &(name, len)) in dims.iter().enumerate() {
        let sampled = planes.planes().iter().any(|p| p.samples_axis(axis));
        if sampled && len < need {
            return Err(Error::Border {
                axis: name,
                detail: alloc::format!("extent {} is smaller than 2r+1 = {}", len, need),
            });
        }
    }
    Ok(())
}

/// Scans every valid centre of every configured plane, bins the configured
/// code through the encoding table into the block of the centre, and
/// normalises each plane-block histogram to unit mass.
pub fn extract_descriptor(volume: &VideoVolume, config: &DescriptorConfig) -> Result<DescriptorHistogram> {
    config.validate()?;
    let table = EncodingTable::new(config.encoding, config.neighbors.points)?;
    let margin = config.neighbors.margin();
    check_dimensions(volume, config.planes, margin)?;

    let planes = config.planes.planes();
    let dims = [volume.width, volume.height, volume.length];
    let counts = [config.blocks.m, config.blocks.q, config.blocks.l];
    let splits: Vec<AxisSplit> = (0..3).map(|axis| AxisSplit::interior(dims[axis], margin, counts[axis])).collect();

    let bins = table.bins();
    let layout = HistogramLayout { kind: config.kind, planes: planes.clone(), blocks: config.blocks, bins };
    let mut values = vec![0.0; layout.dimension()];

    let p = config.neighbors.points;
    let outer = RingSampler::new(config.neighbors.radius, p);
    let inner = RingSampler::new(config.neighbors.inner_radius(), p);
    let mut ring = vec![0.0; p];
    let mut inner_ring = vec![0.0; p];
    let (m, q) = (config.blocks.m, config.blocks.q);

    for (pi, &plane) in planes.iter().enumerate() {
        let plane_values = &mut values[pi * layout.plane_len()..(pi + 1) * layout.plane_len()];
        for fixed in 0..slice_count(volume, plane) {
            let view = PlaneView::new(volume, plane, fixed);
            let (w, h) = (view.width, view.height);
            for v in margin..h - margin {
                for u in margin..w - margin {
                    let (x, y, t) = view.global(u, v);
                    let block = (splits[2].block(t) * q + splits[1].block(y)) * m + splits[0].block(x);
                    outer.sample_into(&view, u, v, &mut ring);
                    let code = match config.kind {
                        CodeKind::Lbp => lbp_code(view.at(u, v), &ring),
                        CodeKind::Adlbp => adlbp_code(&ring),
                        CodeKind::Rdlbp => {
                            inner.sample_into(&view, u, v, &mut inner_ring);
                            rdlbp_code(&ring, &inner_ring)
                        }
                    };
                    plane_values[block * bins + table.bin(code)] += 1.0;
                }
            }
        }
    }

    for segment in values.chunks_mut(bins) {
        let total: f64 = segment.iter().sum();
        if total > 0.0 {
            segment.iter_mut().for_each(|v| *v /= total);
        }
    }
    Ok(DescriptorHistogram { values, layout })
}

/// Concatenates per-clip parts in the given order.
pub fn fuse_concat<S: AsRef<[f64]>>(parts: &[S]) -> Result<Vec<f64>> {
    if parts.is_empty() {
        return Err(config_err!("nothing to fuse"));
    }
    let total = parts.iter().map(|p| p.as_ref().len()).sum();
    let mut out = Vec::with_capacity(total);
    for part in parts {
        out.extend_from_slice(part.as_ref());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize, l: usize) -> VideoVolume {
        VideoVolume::from_fn(w, h, l, |x, y, t| (x * 100 + y * 10 + t) as f64)
    }

    #[test]
    fn slice_counts() {
        let vol = ramp(4, 5, 6);
        let mut counts = [0usize; 3];
        for view in slice_planes(&vol, PlaneSet::TOP).unwrap() {
            let idx = PlaneKind::ALL.iter().position(|p| *p == view.plane()).unwrap();
            counts[idx] += 1;
            let dims = (view.width(), view.height());
            match view.plane() {
                PlaneKind::XY => assert_eq!(dims, (4, 5)),
                PlaneKind::XT => assert_eq!(dims, (4, 6)),
                PlaneKind::YT => assert_eq!(dims, (5, 6)),
            }
        }
        assert_eq!(counts, [6, 5, 4]);
        assert_eq!(slice_planes(&vol, PlaneSet::XY).unwrap().count(), 6);
    }

    #[test]
    fn plane_view_indexing() {
        let vol = ramp(4, 5, 6);
        let xt = PlaneView::new(&vol, PlaneKind::XT, 3);
        assert_eq!(xt.at(2, 4), vol.at(2, 3, 4));
        let yt = PlaneView::new(&vol, PlaneKind::YT, 1);
        assert_eq!(yt.at(2, 5), vol.at(1, 2, 5));
        assert_eq!(yt.global(2, 5), (1, 2, 5));
    }

    #[test]
    fn plane_set_names() {
        for set in PlaneSet::NAMED {
            assert_eq!(PlaneSet::parse(&set.name()).unwrap(), set);
        }
        assert_eq!(PlaneSet::parse("xy+yt").unwrap().planes(), vec![PlaneKind::XY, PlaneKind::YT]);
        assert!(PlaneSet::from_planes(&[]).is_err());
        assert!(PlaneSet::parse("XZ").is_err());
    }

    #[test]
    fn axis_split_trailing_remainder() {
        // 10 cells into 3 blocks: sizes 3, 3, 4.
        let s = AxisSplit::interior(12, 1, 3);
        let blocks: Vec<usize> = (1..11).map(|c| s.block(c)).collect();
        assert_eq!(blocks, vec![0, 0, 0, 1, 1, 1, 2, 2, 2, 2]);
        assert_eq!((s.block(0), s.block(11)), (0, 2));
        // More blocks than cells: leading blocks stay empty.
        let s = AxisSplit::new(0, 2, 4);
        assert_eq!((s.block(0), s.block(1)), (2, 3));
        // Axis too short for the margin is used whole.
        let s = AxisSplit::interior(2, 1, 2);
        assert_eq!((s.block(0), s.block(1)), (0, 1));
    }

    #[test]
    fn too_small_volume_names_axis() {
        let vol = ramp(9, 9, 2);
        let cfg = DescriptorConfig {
            kind: CodeKind::Lbp,
            neighbors: NeighborSpec::new(1.0, 8, 0.0).unwrap(),
            encoding: EncodingKind::Full,
            planes: PlaneSet::TOP,
            blocks: BlockGrid::new(1, 1, 1).unwrap(),
        };
        match extract_descriptor(&vol, &cfg) {
            Err(Error::Border { axis, .. }) => assert_eq!(axis, "t"),
            other => panic!("unexpected {:?}", other),
        }
        let xy = DescriptorConfig { planes: PlaneSet::XY, ..cfg };
        assert!(extract_descriptor(&vol, &xy).is_ok());
    }

    #[test]
    fn constant_volume_puts_mass_in_all_ones_bin() {
        let vol = VideoVolume::from_fn(10, 10, 6, |_, _, _| 42.0);
        for kind in CodeKind::ALL {
            let cfg = DescriptorConfig {
                kind,
                neighbors: NeighborSpec::new(2.0, 8, 1.0).unwrap(),
                encoding: EncodingKind::Full,
                planes: PlaneSet::TOP,
                blocks: BlockGrid::new(2, 2, 2).unwrap(),
            };
            let h = extract_descriptor(&vol, &cfg).unwrap();
            for pi in 0..3 {
                for b in 0..8 {
                    let seg = h.segment(pi, b);
                    let total: f64 = seg.iter().sum();
                    if total > 0.0 {
                        assert_eq!(seg[255], 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn fuse_examples() {
        let parts = [vec![1.0; 163], vec![2.0; 163], vec![3.0; 163]];
        assert_eq!(fuse_concat(&parts).unwrap().len(), 489);
        assert_eq!(fuse_concat(&parts[..1]).unwrap(), parts[0]);
        let empty: [Vec<f64>; 0] = [];
        assert!(fuse_concat(&empty).is_err());
    }

    #[test]
    fn select_planes_slices_layout() {
        let vol = VideoVolume::from_fn(8, 8, 6, |x, y, t| ((x * 7 + y * 3 + t * 5) % 11) as f64);
        let cfg = DescriptorConfig {
            kind: CodeKind::Adlbp,
            neighbors: NeighborSpec::new(1.0, 4, 0.0).unwrap(),
            encoding: EncodingKind::Full,
            planes: PlaneSet::TOP,
            blocks: BlockGrid::new(2, 2, 1).unwrap(),
        };
        let top = extract_descriptor(&vol, &cfg).unwrap();
        let yt = top.select_planes(PlaneSet::YOT).unwrap();
        assert_eq!(yt.values.len(), top.values.len() / 3);
        assert_eq!(&yt.values[..], &top.values[2 * top.layout.plane_len()..]);
    }
}
