//! Binary codes at a single centre: LBP, angular-difference LBP (ADLBP) and
//! radial-difference LBP (RDLBP), plus the lookup tables that map raw codes
//! onto histogram bins.
//!
//! Ring geometry: neighbour `n` of `p` sits at angle `2πn/p`, measured
//! counter-clockwise from the positive x axis with image `y` pointing down,
//! so the sample lies at `(xc + r cos θ, yc − r sin θ)`. Fractional positions
//! are read with bilinear interpolation; lattice positions are read exactly.
//! Bit `n` of a code is the least significant bit for `n = 0`, and the sign
//! function maps zero to one.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{config_err, Error, Result};

/// Largest neighbour count for which encoding tables are materialised.
pub const MAX_POINTS: usize = 16;

const SNAP_EPS: f64 = 1e-9;

/// Read-only access to a 2-D grid of intensities, indexed `(u, v)` with `u`
/// the horizontal axis.
pub trait Grid2 {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn at(&self, u: usize, v: usize) -> f64;
}

/// A dense row-major 2-D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Image2 {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Image2 {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape(alloc::format!(
                "{}x{} image needs {} values, got {}",
                width,
                height,
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self { width, height, data: vec![value; width * height] }
    }
}

impl Grid2 for Image2 {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    #[inline]
    fn at(&self, u: usize, v: usize) -> f64 {
        self.data[v * self.width + u]
    }
}

/// Sampling geometry for one binary code.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NeighborSpec {
    /// Outer ring radius in pixels.
    pub radius: f64,
    /// Number of neighbours per ring.
    pub points: usize,
    /// Radial gap between the outer and inner ring (RDLBP only).
    #[cfg_attr(feature = "serde", serde(default))]
    pub gap: f64,
}

impl NeighborSpec {
    pub fn new(radius: f64, points: usize, gap: f64) -> Result<Self> {
        let spec = Self { radius, points, gap };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(config_err!("radius must be positive, got {}", self.radius));
        }
        if self.points < 2 || self.points > MAX_POINTS {
            return Err(config_err!(
                "neighbour count must lie in [2, {}], got {}",
                MAX_POINTS,
                self.points
            ));
        }
        if !(self.gap.is_finite() && self.gap >= 0.0 && self.gap <= self.radius) {
            return Err(config_err!(
                "radial gap must lie in [0, radius={}], got {}",
                self.radius,
                self.gap
            ));
        }
        Ok(())
    }

    /// Integer border margin a centre must keep on every sampled axis.
    pub fn margin(&self) -> usize {
        libm::ceil(self.radius - SNAP_EPS) as usize
    }

    pub fn inner_radius(&self) -> f64 {
        self.radius - self.gap
    }
}

/// Which of the three codes to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CodeKind {
    Lbp,
    Adlbp,
    Rdlbp,
}

impl CodeKind {
    pub const ALL: [CodeKind; 3] = [CodeKind::Lbp, CodeKind::Adlbp, CodeKind::Rdlbp];

    pub fn name(self) -> &'static str {
        match self {
            CodeKind::Lbp => "LBP",
            CodeKind::Adlbp => "ADLBP",
            CodeKind::Rdlbp => "RDLBP",
        }
    }
}

/// Precomputed bilinear taps for one ring.
#[derive(Debug, Clone)]
pub struct RingSampler {
    taps: Vec<Tap>,
}

#[derive(Debug, Clone, Copy)]
struct Tap {
    du: isize,
    dv: isize,
    fu: f64,
    fv: f64,
}

fn snap(x: f64) -> f64 {
    let r = libm::round(x);
    if libm::fabs(x - r) < SNAP_EPS {
        r
    } else {
        x
    }
}

impl RingSampler {
    pub fn new(radius: f64, points: usize) -> Self {
        let taps = (0..points)
            .map(|n| {
                let theta = 2.0 * core::f64::consts::PI * n as f64 / points as f64;
                let du = snap(radius * libm::cos(theta));
                let dv = snap(-radius * libm::sin(theta));
                let u0 = libm::floor(du);
                let v0 = libm::floor(dv);
                Tap { du: u0 as isize, dv: v0 as isize, fu: du - u0, fv: dv - v0 }
            })
            .collect();
        Self { taps }
    }

    pub fn points(&self) -> usize {
        self.taps.len()
    }

    /// Samples the ring around `(cu, cv)` into `out`. The caller guarantees
    /// the centre keeps the ring's margin from every border.
    #[inline]
    pub fn sample_into<G: Grid2 + ?Sized>(&self, grid: &G, cu: usize, cv: usize, out: &mut [f64]) {
        for (tap, slot) in self.taps.iter().zip(out.iter_mut()) {
            let u = (cu as isize + tap.du) as usize;
            let v = (cv as isize + tap.dv) as usize;
            *slot = if tap.fu == 0.0 && tap.fv == 0.0 {
                grid.at(u, v)
            } else if tap.fv == 0.0 {
                (1.0 - tap.fu) * grid.at(u, v) + tap.fu * grid.at(u + 1, v)
            } else if tap.fu == 0.0 {
                (1.0 - tap.fv) * grid.at(u, v) + tap.fv * grid.at(u, v + 1)
            } else {
                let top = (1.0 - tap.fu) * grid.at(u, v) + tap.fu * grid.at(u + 1, v);
                let bottom = (1.0 - tap.fu) * grid.at(u, v + 1) + tap.fu * grid.at(u + 1, v + 1);
                (1.0 - tap.fv) * top + tap.fv * bottom
            };
        }
    }
}

/// Samples `points` intensities on the ring of radius `radius` around
/// `center`.
pub fn sample_ring<G: Grid2 + ?Sized>(
    grid: &G,
    center: (usize, usize),
    radius: f64,
    points: usize,
) -> Result<Vec<f64>> {
    let (cu, cv) = center;
    let w = grid.width() as f64;
    let h = grid.height() as f64;
    let (x, y) = (cu as f64, cv as f64);
    if x < radius - SNAP_EPS || x + radius > w - 1.0 + SNAP_EPS {
        return Err(Error::Border {
            axis: "u",
            detail: alloc::format!("centre {} with radius {} in width {}", cu, radius, grid.width()),
        });
    }
    if y < radius - SNAP_EPS || y + radius > h - 1.0 + SNAP_EPS {
        return Err(Error::Border {
            axis: "v",
            detail: alloc::format!("centre {} with radius {} in height {}", cv, radius, grid.height()),
        });
    }
    let sampler = RingSampler::new(radius, points);
    let mut out = vec![0.0; points];
    sampler.sample_into(grid, cu, cv, &mut out);
    Ok(out)
}

/// `Σ s(ring[n] − center) 2^n`.
#[inline]
pub fn lbp_code(center: f64, ring: &[f64]) -> u32 {
    ring.iter()
        .enumerate()
        .fold(0, |acc, (n, &v)| acc | (((v - center >= 0.0) as u32) << n))
}

/// `Σ s(ring[(n+1) mod p] − ring[n]) 2^n`.
#[inline]
pub fn adlbp_code(ring: &[f64]) -> u32 {
    let p = ring.len();
    (0..p).fold(0, |acc, n| acc | (((ring[(n + 1) % p] - ring[n] >= 0.0) as u32) << n))
}

/// `Σ s(outer[n] − inner[n]) 2^n`.
#[inline]
pub fn rdlbp_code(outer: &[f64], inner: &[f64]) -> u32 {
    outer
        .iter()
        .zip(inner)
        .enumerate()
        .fold(0, |acc, (n, (&o, &i))| acc | (((o - i >= 0.0) as u32) << n))
}

/// How raw codes are grouped into histogram bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum EncodingKind {
    /// One bin per code, `2^p` bins.
    Full,
    /// Uniform codes get their own bin, every other code shares one.
    U2,
    /// Rotation-invariant: codes are grouped by cyclic bit rotation.
    Ri,
    /// Rotation-invariant uniform: `p + 1` uniform bins plus one shared bin
    /// (absent for `p < 4`, where every code is uniform).
    Riu2,
}

/// Rotates the low `p` bits of `code` right by one.
#[inline]
fn rotr(code: u32, p: usize) -> u32 {
    let mask = if p == 32 { u32::MAX } else { (1u32 << p) - 1 };
    ((code >> 1) | ((code & 1) << (p - 1))) & mask
}

/// Number of 0/1 transitions around the cyclic `p`-bit string.
pub fn transitions(code: u32, p: usize) -> u32 {
    (code ^ rotr(code, p)).count_ones()
}

pub fn is_uniform(code: u32, p: usize) -> bool {
    transitions(code, p) <= 2
}

/// Smallest value in the cyclic-rotation orbit of `code`.
pub fn min_rotation(code: u32, p: usize) -> u32 {
    let mut best = code;
    let mut c = code;
    for _ in 1..p {
        c = rotr(c, p);
        best = best.min(c);
    }
    best
}

/// Total map from raw codes `[0, 2^p)` to bin indices `[0, bins)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingTable {
    kind: EncodingKind,
    points: usize,
    bins: usize,
    table: Vec<u32>,
}

impl EncodingTable {
    pub fn new(kind: EncodingKind, points: usize) -> Result<Self> {
        if !(2..=MAX_POINTS).contains(&points) {
            return Err(config_err!(
                "encoding tables support 2..={} neighbours, got {}",
                MAX_POINTS,
                points
            ));
        }
        let size = 1u32 << points;
        let (table, bins) = match kind {
            EncodingKind::Full => ((0..size).collect(), size as usize),
            EncodingKind::U2 => {
                let mut next = 0u32;
                let mut table = vec![0u32; size as usize];
                let mut nonuniform = Vec::new();
                for code in 0..size {
                    if is_uniform(code, points) {
                        table[code as usize] = next;
                        next += 1;
                    } else {
                        nonuniform.push(code);
                    }
                }
                // Up to three neighbours every code is uniform and the
                // shared bin would stay empty.
                let shared = !nonuniform.is_empty();
                for code in nonuniform {
                    table[code as usize] = next;
                }
                (table, next as usize + shared as usize)
            }
            EncodingKind::Ri => {
                let reps: Vec<u32> = (0..size).map(|c| min_rotation(c, points)).collect();
                let mut distinct = reps.clone();
                distinct.sort_unstable();
                distinct.dedup();
                let table = reps
                    .iter()
                    .map(|r| distinct.binary_search(r).unwrap_or_else(|_| unreachable!()) as u32)
                    .collect();
                (table, distinct.len())
            }
            EncodingKind::Riu2 => {
                let table = (0..size)
                    .map(|c| if is_uniform(c, points) { c.count_ones() } else { points as u32 + 1 })
                    .collect();
                (table, if points >= 4 { points + 2 } else { points + 1 })
            }
        };
        Ok(Self { kind, points, bins, table })
    }

    pub fn kind(&self) -> EncodingKind {
        self.kind
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    #[inline]
    pub fn bin(&self, code: u32) -> usize {
        self.table[code as usize] as usize
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.table
    }

    /// Bins that hold only uniform codes.
    pub fn uniform_bins(&self) -> Vec<usize> {
        let mut flags = vec![true; self.bins];
        for (code, &bin) in self.table.iter().enumerate() {
            if !is_uniform(code as u32, self.points) {
                flags[bin as usize] = false;
            }
        }
        flags.iter().enumerate().filter(|(_, &u)| u).map(|(b, _)| b).collect()
    }

    /// Re-bins a histogram indexed by raw code (length `2^p`).
    pub fn remap_histogram(&self, full: &[f64]) -> Result<Vec<f64>> {
        if full.len() != self.table.len() {
            return Err(Error::Shape(alloc::format!(
                "expected a {}-bin raw histogram, got {}",
                self.table.len(),
                full.len()
            )));
        }
        let mut out = vec![0.0; self.bins];
        for (&bin, &mass) in self.table.iter().zip(full) {
            out[bin as usize] += mass;
        }
        Ok(out)
    }

    /// Fraction of histogram mass falling into uniform bins. Only meaningful
    /// for tables whose bins separate uniform from nonuniform codes.
    pub fn uniform_proportion(&self, hist: &[f64]) -> f64 {
        let total: f64 = hist.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        let uniform: f64 = self.uniform_bins().iter().map(|&b| hist[b]).sum();
        uniform / total
    }
}

/// Number of uniform codes for `p` neighbours.
pub fn uniform_count(points: usize) -> usize {
    points * (points - 1) + 2
}
