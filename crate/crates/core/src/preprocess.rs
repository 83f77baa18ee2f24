//! Clip conditioning: luminance conversion and resize, Eulerian motion
//! magnification, and temporal interpolation onto a path-graph curve.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{config_err, Error, Result};
use crate::volume::VideoVolume;

// ---------------------------------------------------------------------------
// Luminance + resize

/// An 8-bit frame with one (gray) or three (RGB) interleaved channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorFrame {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

impl ColorFrame {
    pub fn gray(width: usize, height: usize, data: Vec<u8>) -> Self {
        Self { width, height, channels: 1, data }
    }

    pub fn rgb(width: usize, height: usize, data: Vec<u8>) -> Self {
        Self { width, height, channels: 3, data }
    }

    /// Luminance on the 0..=255 scale (ITU-R BT.601 weights).
    pub fn luminance(&self) -> Vec<f64> {
        match self.channels {
            1 => self.data.iter().map(|&v| v as f64).collect(),
            _ => self
                .data
                .chunks_exact(self.channels)
                .map(|px| 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64)
                .collect(),
        }
    }
}

/// Bilinear resize with pixel-centre alignment and clamped borders.
pub fn resize_bilinear(src: &[f64], sw: usize, sh: usize, dw: usize, dh: usize) -> Vec<f64> {
    if sw == dw && sh == dh {
        return src.to_vec();
    }
    let sx = sw as f64 / dw as f64;
    let sy = sh as f64 / dh as f64;
    let axis = |d: usize, scale: f64, n: usize| -> (usize, usize, f64) {
        let pos = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (n - 1) as f64);
        let i0 = libm::floor(pos) as usize;
        let i1 = (i0 + 1).min(n - 1);
        (i0, i1, pos - i0 as f64)
    };
    let cols: Vec<_> = (0..dw).map(|x| axis(x, sx, sw)).collect();
    let mut out = Vec::with_capacity(dw * dh);
    for y in 0..dh {
        let (y0, y1, fy) = axis(y, sy, sh);
        for &(x0, x1, fx) in &cols {
            let top = (1.0 - fx) * src[y0 * sw + x0] + fx * src[y0 * sw + x1];
            let bottom = (1.0 - fx) * src[y1 * sw + x0] + fx * src[y1 * sw + x1];
            out.push((1.0 - fy) * top + fy * bottom);
        }
    }
    out
}

/// Converts frames to luminance and resizes them to `size = (width, height)`.
pub fn to_gray_resize(frames: &[ColorFrame], size: (usize, usize)) -> Result<VideoVolume> {
    let first = frames.first().ok_or_else(|| Error::Preprocess("empty frame sequence".into()))?;
    let (w, h) = size;
    if w == 0 || h == 0 {
        return Err(config_err!("target size must be positive, got {}x{}", w, h));
    }
    let mut out = Vec::with_capacity(frames.len());
    for (i, f) in frames.iter().enumerate() {
        if f.width != first.width || f.height != first.height || f.channels != first.channels {
            return Err(Error::Preprocess(alloc::format!(
                "frame {} is {}x{}x{}, expected {}x{}x{}",
                i,
                f.width,
                f.height,
                f.channels,
                first.width,
                first.height,
                first.channels
            )));
        }
        if !(f.channels == 1 || f.channels == 3) || f.data.len() != f.width * f.height * f.channels {
            return Err(Error::Preprocess(alloc::format!("frame {} has an invalid pixel buffer", i)));
        }
        out.push(resize_bilinear(&f.luminance(), f.width, f.height, w, h));
    }
    VideoVolume::from_frames(w, h, &out)
}

// ---------------------------------------------------------------------------
// Temporal band-pass

/// How the band edges of [`EvmParams`] are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FrequencyUnits {
    /// Hertz; needs the clip frame rate.
    Hertz,
    /// Cycles per frame, Nyquist at 0.5.
    CyclesPerFrame,
    /// Fraction of the Nyquist frequency, Nyquist at 1.0.
    NyquistFraction,
}

/// Second-order IIR section `b0 + b1 z⁻¹ + b2 z⁻²` over `1 + a1 z⁻¹ + a2 z⁻²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    /// Second-order Butterworth band-pass between `low` and `high` cycles per
    /// frame: a first-order low-pass prototype, band-transformed and mapped
    /// to discrete time by the bilinear transform with prewarped edges.
    pub fn butterworth_bandpass(low: f64, high: f64) -> Result<Self> {
        if !(low > 0.0 && low < high && high < 0.5) {
            return Err(config_err!("band edges must satisfy 0 < low < high < 0.5 cycles/frame, got [{}, {}]", low, high));
        }
        let wl = 2.0 * libm::tan(PI * low);
        let wh = 2.0 * libm::tan(PI * high);
        let bw = wh - wl;
        let w0sq = wl * wh;
        let c = 2.0;
        let a0 = c * c + bw * c + w0sq;
        Ok(Self {
            b: [bw * c / a0, 0.0, -bw * c / a0],
            a: [1.0, (2.0 * w0sq - 2.0 * c * c) / a0, (c * c - bw * c + w0sq) / a0],
        })
    }

    /// `|H(e^{j2πf})|` at `f` cycles per frame.
    pub fn magnitude(&self, f: f64) -> f64 {
        let w = 2.0 * PI * f;
        let eval = |c: &[f64; 3]| {
            let re = c[0] + c[1] * libm::cos(w) + c[2] * libm::cos(2.0 * w);
            let im = -c[1] * libm::sin(w) - c[2] * libm::sin(2.0 * w);
            libm::sqrt(re * re + im * im)
        };
        eval(&self.b) / eval(&self.a)
    }

    /// Steady-state state of the transposed direct form for a unit step.
    fn step_state(&self) -> [f64; 2] {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        // (I - Aᵀ) z = b[1..] - a[1..] b0, with A the companion matrix.
        let (m00, m01, m10, m11) = (1.0 + a1, -1.0, a2, 1.0);
        let r0 = b1 - a1 * b0;
        let r1 = b2 - a2 * b0;
        let det = m00 * m11 - m01 * m10;
        [(r0 * m11 - m01 * r1) / det, (m00 * r1 - m10 * r0) / det]
    }

    fn run(&self, x: &[f64], z0: [f64; 2], out: &mut Vec<f64>) {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        let (mut z1, mut z2) = (z0[0], z0[1]);
        out.clear();
        for &xi in x {
            let y = b0 * xi + z1;
            z1 = b1 * xi - a1 * y + z2;
            z2 = b2 * xi - a2 * y;
            out.push(y);
        }
    }

    /// Zero-phase forward-backward filtering with odd-reflection padding and
    /// steady-state initial conditions.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = 9.min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        for i in (1..=pad).rev() {
            ext.push(2.0 * x[0] - x[i]);
        }
        ext.extend_from_slice(x);
        for i in 1..=pad {
            ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
        }
        let zi = self.step_state();
        let mut fwd = Vec::with_capacity(ext.len());
        self.run(&ext, [zi[0] * ext[0], zi[1] * ext[0]], &mut fwd);
        fwd.reverse();
        let mut bwd = Vec::with_capacity(ext.len());
        self.run(&fwd, [zi[0] * fwd[0], zi[1] * fwd[0]], &mut bwd);
        bwd.reverse();
        bwd[pad..pad + n].to_vec()
    }
}

// ---------------------------------------------------------------------------
// Eulerian motion magnification

/// Motion magnification settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvmParams {
    /// Amplification factor.
    pub alpha: f64,
    /// Lower band edge.
    pub low: f64,
    /// Upper band edge.
    pub high: f64,
    pub units: FrequencyUnits,
    /// Needed when `units` is hertz.
    #[cfg_attr(feature = "serde", serde(default))]
    pub frame_rate: Option<f64>,
    /// Spatial wavelength cutoff in pixels.
    pub lambda_c: f64,
    /// Pyramid depth including the low-pass residual.
    pub levels: usize,
}

impl EvmParams {
    /// Band edges in cycles per frame.
    pub fn band(&self) -> Result<(f64, f64)> {
        let (lo, hi) = match self.units {
            FrequencyUnits::CyclesPerFrame => (self.low, self.high),
            FrequencyUnits::NyquistFraction => (self.low * 0.5, self.high * 0.5),
            FrequencyUnits::Hertz => {
                let fr = self
                    .frame_rate
                    .filter(|r| *r > 0.0)
                    .ok_or_else(|| config_err!("band edges in hertz need a positive frame rate"))?;
                (self.low / fr, self.high / fr)
            }
        };
        if !(lo > 0.0 && lo < hi && hi < 0.5) {
            return Err(config_err!(
                "effective band [{}, {}] cycles/frame must satisfy 0 < low < high < Nyquist",
                lo,
                hi
            ));
        }
        Ok((lo, hi))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(config_err!("alpha must be non-negative, got {}", self.alpha));
        }
        if !(self.lambda_c > 0.0) {
            return Err(config_err!("lambda_c must be positive, got {}", self.lambda_c));
        }
        if self.levels == 0 {
            return Err(config_err!("pyramid needs at least one level"));
        }
        self.band().map(|_| ())
    }

    /// Amplification applied to pyramid band `level`; `None` is the residual.
    /// Bands whose representative wavelength falls below `lambda_c` get a
    /// linearly reduced factor `(1 + α) λ / λc − 1`, floored at zero.
    pub fn level_alpha(&self, level: Option<usize>) -> f64 {
        match level {
            None => self.alpha,
            Some(i) => {
                let lambda = libm::pow(2.0, (i + 2) as f64);
                let ramp = (1.0 + self.alpha) * lambda / self.lambda_c - 1.0;
                ramp.clamp(0.0, self.alpha)
            }
        }
    }
}

const BINOMIAL: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];

#[derive(Debug, Clone)]
struct Layer {
    w: usize,
    h: usize,
    data: Vec<f64>,
}

fn blur_down(src: &Layer) -> Layer {
    let (w, h) = (src.w, src.h);
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let w2 = w.div_ceil(2);
    let h2 = h.div_ceil(2);
    // Horizontal pass at even columns only.
    let mut tmp = vec![0.0; w2 * h];
    for y in 0..h {
        for x2 in 0..w2 {
            let x = (2 * x2) as isize;
            let s: f64 = (0..5).map(|k| BINOMIAL[k] * src.data[y * w + clamp(x + k as isize - 2, w)]).sum();
            tmp[y * w2 + x2] = s / 16.0;
        }
    }
    let mut data = vec![0.0; w2 * h2];
    for y2 in 0..h2 {
        let y = (2 * y2) as isize;
        for x2 in 0..w2 {
            let s: f64 = (0..5).map(|k| BINOMIAL[k] * tmp[clamp(y + k as isize - 2, h) * w2 + x2]).sum();
            data[y2 * w2 + x2] = s / 16.0;
        }
    }
    Layer { w: w2, h: h2, data }
}

/// Interpolates a half-resolution signal back to `out.len()` samples.
fn expand_1d(src: &[f64], out: &mut [f64]) {
    let m = src.len() as isize;
    let get = |k: isize| src[k.clamp(0, m - 1) as usize];
    for (i, dst) in out.iter_mut().enumerate() {
        let k = (i / 2) as isize;
        let v = if i % 2 == 0 { get(k - 1) + 6.0 * get(k) + get(k + 1) } else { 4.0 * get(k) + 4.0 * get(k + 1) };
        *dst = v / 8.0;
    }
}

fn expand(src: &Layer, w: usize, h: usize) -> Layer {
    let mut tmp = vec![0.0; w * src.h];
    for y in 0..src.h {
        expand_1d(&src.data[y * src.w..(y + 1) * src.w], &mut tmp[y * w..(y + 1) * w]);
    }
    let mut data = vec![0.0; w * h];
    let mut col = vec![0.0; src.h];
    let mut out_col = vec![0.0; h];
    for x in 0..w {
        for y in 0..src.h {
            col[y] = tmp[y * w + x];
        }
        expand_1d(&col, &mut out_col);
        for y in 0..h {
            data[y * w + x] = out_col[y];
        }
    }
    Layer { w, h, data }
}

/// Band-limited pyramid: `bands[i] = G_i − expand(G_{i+1})`, then the residual `G_{L−1}`.
fn decompose(frame: Layer, levels: usize) -> (Vec<Layer>, Layer) {
    let mut bands = Vec::new();
    let mut current = frame;
    for _ in 1..levels {
        if current.w < 2 && current.h < 2 {
            break;
        }
        let down = blur_down(&current);
        let up = expand(&down, current.w, current.h);
        let band: Vec<f64> = current.data.iter().zip(&up.data).map(|(a, b)| a - b).collect();
        bands.push(Layer { w: current.w, h: current.h, data: band });
        current = down;
    }
    (bands, current)
}

/// Band-pass filters every pixel of a stack of equally sized layers over time
/// and scales by `gain`, in place.
fn filter_stack(stack: &mut [Layer], filter: &Biquad, gain: f64) {
    let n = stack[0].data.len();
    let mut series = vec![0.0; stack.len()];
    for i in 0..n {
        for (t, layer) in stack.iter().enumerate() {
            series[t] = layer.data[i];
        }
        let filtered = filter.filtfilt(&series);
        for (t, layer) in stack.iter_mut().enumerate() {
            layer.data[i] = gain * filtered[t];
        }
    }
}

/// Eulerian video magnification: decomposes each frame into a band-limited
/// pyramid, band-pass filters every pixel's time series per level, scales by
/// the level's amplification, collapses the pyramid of filtered signals and
/// adds it back to the input.
pub fn magnify(volume: &VideoVolume, params: &EvmParams) -> Result<VideoVolume> {
    params.validate()?;
    if volume.length() < 4 {
        return Err(Error::Preprocess(alloc::format!(
            "magnification needs at least 4 frames, got {}",
            volume.length()
        )));
    }
    let (lo, hi) = params.band()?;
    let filter = Biquad::butterworth_bandpass(lo, hi)?;
    if params.alpha == 0.0 {
        return Ok(volume.clone());
    }

    let (w, h, len) = (volume.width(), volume.height(), volume.length());
    let mut band_stacks: Vec<Vec<Layer>> = Vec::new();
    let mut residuals = Vec::with_capacity(len);
    for t in 0..len {
        let (bands, residual) = decompose(Layer { w, h, data: volume.frame(t).to_vec() }, params.levels);
        if band_stacks.is_empty() {
            band_stacks = (0..bands.len()).map(|_| Vec::with_capacity(len)).collect();
        }
        for (stack, band) in band_stacks.iter_mut().zip(bands) {
            stack.push(band);
        }
        residuals.push(residual);
    }

    let residual_gain = params.level_alpha(None);
    filter_stack(&mut residuals, &filter, residual_gain);
    for (i, stack) in band_stacks.iter_mut().enumerate() {
        let gain = params.level_alpha(Some(i));
        if gain == 0.0 {
            stack.iter_mut().for_each(|l| l.data.iter_mut().for_each(|v| *v = 0.0));
        } else {
            filter_stack(stack, &filter, gain);
        }
    }

    let mut out = volume.clone();
    let n = w * h;
    for t in 0..len {
        let mut delta = residuals[t].clone();
        for stack in band_stacks.iter().rev() {
            let band = &stack[t];
            let up = expand(&delta, band.w, band.h);
            delta = Layer { w: band.w, h: band.h, data: up.data.iter().zip(&band.data).map(|(a, b)| a + b).collect() };
        }
        if delta.w != w || delta.h != h {
            delta = expand(&delta, w, h);
        }
        for (dst, d) in out.data_mut()[t * n..(t + 1) * n].iter_mut().zip(&delta.data) {
            *dst += d;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Temporal interpolation

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimParams {
    pub target_length: usize,
}

/// Curve coordinate `k` at position `s ∈ [0, n−1]` of an `n`-node path graph.
///
/// For integer `s` these are the entries of the Laplacian eigenvectors of the
/// path graph, `cos(πk(s + ½)/n)`, with eigenvalue `2 − 2cos(πk/n)`; `k = 0`
/// is the constant vector.
#[inline]
pub fn path_graph_coordinate(n: usize, k: usize, s: f64) -> f64 {
    libm::cos(PI * k as f64 * (s + 0.5) / n as f64)
}

/// Laplacian eigenvalue paired with [`path_graph_coordinate`] `k`.
pub fn path_graph_eigenvalue(n: usize, k: usize) -> f64 {
    2.0 - 2.0 * libm::cos(PI * k as f64 / n as f64)
}

/// Resamples a clip to `target_length` frames. Frames are placed on the
/// path-graph curve, a least-squares linear map from curve coordinates (plus
/// the mean) back to pixel space is fitted on the source frames, and the map
/// is evaluated at uniformly spaced curve positions.
pub fn tim_interpolate(volume: &VideoVolume, params: &TimParams) -> Result<VideoVolume> {
    let n = volume.length();
    if n < 2 {
        return Err(Error::Preprocess(alloc::format!("interpolation needs at least 2 frames, got {}", n)));
    }
    let target = params.target_length;
    if target < 2 {
        return Err(config_err!("target length must be at least 2, got {}", target));
    }
    let px = volume.width() * volume.height();

    // The basis matrix is square with orthogonal columns, so the
    // least-squares fit is the exact projection onto each column.
    let mut coeffs = vec![0.0; n * px];
    for k in 0..n {
        let column: Vec<f64> = (0..n).map(|t| path_graph_coordinate(n, k, t as f64)).collect();
        let norm: f64 = column.iter().map(|c| c * c).sum();
        let row = &mut coeffs[k * px..(k + 1) * px];
        for (t, &c) in column.iter().enumerate() {
            let frame = volume.frame(t);
            for (acc, &v) in row.iter_mut().zip(frame) {
                *acc += c * v;
            }
        }
        row.iter_mut().for_each(|v| *v /= norm);
    }

    let mut frames = Vec::with_capacity(target);
    for j in 0..target {
        let s = j as f64 * (n - 1) as f64 / (target - 1) as f64;
        let mut frame = vec![0.0; px];
        for k in 0..n {
            let c = path_graph_coordinate(n, k, s);
            for (dst, &w) in frame.iter_mut().zip(&coeffs[k * px..(k + 1) * px]) {
                *dst += c * w;
            }
        }
        frames.push(frame);
    }
    Ok(VideoVolume::from_frames(volume.width(), volume.height(), &frames)?.with_meta(volume.meta.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bt601_primaries() {
        let red = ColorFrame::rgb(1, 1, vec![255, 0, 0]);
        let green = ColorFrame::rgb(1, 1, vec![0, 255, 0]);
        let blue = ColorFrame::rgb(1, 1, vec![0, 0, 255]);
        assert!((red.luminance()[0] - 0.299 * 255.0).abs() < 1e-12);
        assert!((green.luminance()[0] - 0.587 * 255.0).abs() < 1e-12);
        assert!((blue.luminance()[0] - 0.114 * 255.0).abs() < 1e-12);
    }

    #[test]
    fn gray_same_size_is_identity() {
        let frames = vec![ColorFrame::gray(3, 2, vec![1, 2, 3, 4, 5, 6]); 2];
        let vol = to_gray_resize(&frames, (3, 2)).unwrap();
        assert_eq!(vol.frame(1), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let frames = vec![ColorFrame::gray(2, 2, vec![0; 4]), ColorFrame::gray(3, 2, vec![0; 6])];
        assert!(matches!(to_gray_resize(&frames, (2, 2)), Err(Error::Preprocess(_))));
        assert!(to_gray_resize(&[], (2, 2)).is_err());
    }

    #[test]
    fn bandpass_peaks_at_centre() {
        let f = Biquad::butterworth_bandpass(0.05, 0.2).unwrap();
        let wl = libm::tan(PI * 0.05);
        let wh = libm::tan(PI * 0.2);
        let centre = libm::atan(libm::sqrt(wl * wh)) / PI;
        assert!((f.magnitude(centre) - 1.0).abs() < 1e-12);
        assert!((f.magnitude(0.05) - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((f.magnitude(0.2) - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(f.magnitude(0.0) < 1e-15);
        assert!(Biquad::butterworth_bandpass(0.3, 0.2).is_err());
        assert!(Biquad::butterworth_bandpass(0.1, 0.5).is_err());
    }

    #[test]
    fn filtfilt_of_constant_is_zero() {
        let f = Biquad::butterworth_bandpass(0.05, 0.2).unwrap();
        for n in [1, 2, 4, 10, 50] {
            let y = f.filtfilt(&vec![3.0; n]);
            assert!(y.iter().all(|v| v.abs() < 1e-12), "{:?}", y);
        }
    }

    #[test]
    fn level_alpha_ramp() {
        let p = EvmParams {
            alpha: 20.0,
            low: 0.05,
            high: 0.4,
            units: FrequencyUnits::NyquistFraction,
            frame_rate: None,
            lambda_c: 16.0,
            levels: 4,
        };
        assert_eq!(p.level_alpha(None), 20.0);
        assert_eq!(p.level_alpha(Some(2)), 20.0);
        assert!((p.level_alpha(Some(0)) - (21.0 * 4.0 / 16.0 - 1.0)).abs() < 1e-12);
        assert_eq!(p.band().unwrap(), (0.025, 0.2));
    }

    #[test]
    fn band_units() {
        let mut p = EvmParams {
            alpha: 1.0,
            low: 1.0,
            high: 2.0,
            units: FrequencyUnits::Hertz,
            frame_rate: None,
            lambda_c: 16.0,
            levels: 2,
        };
        assert!(p.band().is_err());
        p.frame_rate = Some(10.0);
        assert_eq!(p.band().unwrap(), (0.1, 0.2));
        p.frame_rate = Some(3.0);
        assert!(p.band().is_err());
    }

    #[test]
    fn short_clip_rejected() {
        let vol = VideoVolume::from_fn(4, 4, 3, |_, _, _| 1.0);
        let p = EvmParams {
            alpha: 1.0,
            low: 0.05,
            high: 0.2,
            units: FrequencyUnits::CyclesPerFrame,
            frame_rate: None,
            lambda_c: 16.0,
            levels: 2,
        };
        assert!(matches!(magnify(&vol, &p), Err(Error::Preprocess(_))));
        let one = VideoVolume::from_fn(4, 4, 1, |_, _, _| 1.0);
        assert!(matches!(tim_interpolate(&one, &TimParams { target_length: 10 }), Err(Error::Preprocess(_))));
    }

    #[test]
    fn pyramid_preserves_constants() {
        let layer = Layer { w: 7, h: 5, data: vec![2.5; 35] };
        let down = blur_down(&layer);
        assert_eq!((down.w, down.h), (4, 3));
        assert!(down.data.iter().all(|v| (v - 2.5).abs() < 1e-14));
        let up = expand(&down, 7, 5);
        assert!(up.data.iter().all(|v| (v - 2.5).abs() < 1e-14));
    }
}
