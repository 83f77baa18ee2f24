//! Whitened PCA.
//!
//! Feature vectors are far longer than the number of training clips, so the
//! principal axes come from the `n × n` Gram matrix of the centred training
//! rows rather than the `d × d` covariance.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Eigenvalues below this fraction of the largest are treated as noise.
pub const EIGEN_FLOOR: f64 = 1e-10;

/// What the columns of a [`FeatureMatrix`] mean.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ColumnSpace {
    Raw,
    /// Histogram bins; the string is the layout description.
    Histogram(String),
    /// Whitened principal components.
    Embedded { k: usize },
    /// Concatenation of named parts with their widths.
    Fused(Vec<(String, usize)>),
}

/// Rows are clips, columns are features. Row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    pub columns: ColumnSpace,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(alloc::format!(
                "{}x{} matrix needs {} values, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data, columns: ColumnSpace::Raw })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.as_ref().len() != cols {
                return Err(Error::Shape(alloc::format!("row {} has {} columns, expected {}", i, r.as_ref().len(), cols)));
            }
            data.extend_from_slice(r.as_ref());
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn with_columns(mut self, columns: ColumnSpace) -> Self {
        self.columns = columns;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    /// Sub-matrix of the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix { rows: indices.len(), cols: self.cols, data, columns: self.columns.clone() }
    }
}

/// A fitted whitening projection.
#[derive(Debug, Clone, PartialEq)]
pub struct WpcaModel {
    mean: Vec<f64>,
    /// `k × d`, row `i` is the `i`-th principal axis.
    components: Vec<f64>,
    /// Inverse square roots of the retained eigenvalues.
    scales: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl WpcaModel {
    pub fn from_parts(mean: Vec<f64>, components: Vec<f64>, scales: Vec<f64>) -> Result<Self> {
        let d = mean.len();
        let k = scales.len();
        if components.len() != d * k {
            return Err(Error::Shape(alloc::format!("expected {}x{} components, got {} values", k, d, components.len())));
        }
        if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Shape("whitening scales must be positive and finite".into()));
        }
        let eigenvalues = scales.iter().map(|s| 1.0 / (s * s)).collect();
        Ok(Self { mean, components, scales, eigenvalues })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Retained dimension.
    pub fn k(&self) -> usize {
        self.scales.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.components[i * d..(i + 1) * d]
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.dim() {
            return Err(Error::Shape(alloc::format!("model expects {} features, got {}", self.dim(), row.len())));
        }
        let centred: Vec<f64> = row.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        Ok((0..self.k())
            .map(|i| dot(self.component(i), &centred) * self.scales[i])
            .collect())
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fits whitened PCA on the training rows. `k = None` asks for `n − 1`
/// components; the achieved dimension is further capped by the rank and the
/// eigenvalue floor.
pub fn wpca_fit(train: &FeatureMatrix, k: Option<usize>) -> Result<WpcaModel> {
    let n = train.rows();
    let d = train.cols();
    if n < 2 {
        return Err(Error::Degenerate(alloc::format!("need at least 2 training rows, got {}", n)));
    }
    if k == Some(0) {
        return Err(Error::Config("requested dimension must be at least 1".into()));
    }

    let mut mean = vec![0.0; d];
    for row in train.iter_rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centred: Vec<Vec<f64>> = train.iter_rows().map(|r| r.iter().zip(&mean).map(|(x, m)| x - m).collect()).collect();

    let denom = (n - 1) as f64;
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let g = dot(&centred[i], &centred[j]) / denom;
            gram[i * n + j] = g;
            gram[j * n + i] = g;
        }
    }
    let eig = symmetric_eigen(&gram, n);

    let largest = eig.values[0];
    let energy: f64 = train.data().iter().map(|x| x * x).sum::<f64>() / n as f64;
    if !(largest > 1e-24 * energy.max(f64::MIN_POSITIVE)) {
        return Err(Error::Degenerate("training rows have no variance".into()));
    }
    let cap = k.unwrap_or(n - 1).min(n - 1);
    let keep = eig.values.iter().take(cap).take_while(|&&v| v > EIGEN_FLOOR * largest).count();

    let mut components = Vec::with_capacity(keep * d);
    let mut scales = Vec::with_capacity(keep);
    let mut eigenvalues = Vec::with_capacity(keep);
    for j in 0..keep {
        let lambda = eig.values[j];
        let u = eig.vector(j);
        let norm = libm::sqrt(denom * lambda);
        let mut axis = vec![0.0; d];
        for (ui, row) in u.iter().zip(&centred) {
            for (a, x) in axis.iter_mut().zip(row) {
                *a += ui * x;
            }
        }
        axis.iter_mut().for_each(|a| *a /= norm);
        let pivot = axis
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, &v)| if libm::fabs(v) > best.1 { (i, libm::fabs(v)) } else { best })
            .0;
        if axis[pivot] < 0.0 {
            axis.iter_mut().for_each(|a| *a = -*a);
        }
        components.extend_from_slice(&axis);
        scales.push(1.0 / libm::sqrt(lambda));
        eigenvalues.push(lambda);
    }
    Ok(WpcaModel { mean, components, scales, eigenvalues })
}

/// Projects rows onto the retained axes and whitens them.
pub fn wpca_transform(model: &WpcaModel, features: &FeatureMatrix) -> Result<FeatureMatrix> {
    if features.cols() != model.dim() {
        return Err(Error::Shape(alloc::format!("model expects {} features, got {}", model.dim(), features.cols())));
    }
    let mut data = Vec::with_capacity(features.rows() * model.k());
    for row in features.iter_rows() {
        data.extend(model.transform_row(row)?);
    }
    Ok(FeatureMatrix::new(features.rows(), model.k(), data)?.with_columns(ColumnSpace::Embedded { k: model.k() }))
}
