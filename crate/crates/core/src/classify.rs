//! Linear soft-margin SVM (one-vs-one), evaluation metrics, and the
//! leave-one-subject-out protocols with nested penalty selection.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default solver stopping tolerance on the maximal KKT violation.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
/// Default cap on SMO iterations per binary problem.
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

const TAU: f64 = 1e-12;

/// Penalties `2^-5, 2^-3, ..., 2^15`.
pub fn default_c_grid() -> Vec<f64> {
    (0..11).map(|i| libm::pow(2.0, (-5 + 2 * i) as f64)).collect()
}

/// One labelled clip feature.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabeledFeature {
    pub vector: Vec<f64>,
    pub subject_id: String,
    pub label: usize,
    #[cfg_attr(feature = "serde", serde(default))]
    pub dataset_id: String,
}

// ---------------------------------------------------------------------------
// Binary SVM

/// `f(x) = w·x + b`; positive values vote for the first class of the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl BinarySvm {
    #[inline]
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

/// Solves the dual of the soft-margin hinge-loss SVM with a linear kernel
/// by sequential minimal optimisation with second-order working-set
/// selection. `y` holds `+1.0` / `-1.0`.
pub fn train_binary(x: &[&[f64]], y: &[f64], c: f64, tol: f64, max_iter: usize) -> BinarySvm {
    let n = x.len();
    let d = x.first().map(|r| r.len()).unwrap_or(0);
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = x[i].iter().zip(x[j]).map(|(a, b)| a * b).sum();
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // Maximal violating index from the "up" set.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let in_up = if y[t] > 0.0 { !upper(alpha[t]) } else { !lower(alpha[t]) };
            if in_up && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else {
            converged = true;
            break;
        };

        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        for t in 0..n {
            let in_low = if y[t] > 0.0 { !lower(alpha[t]) } else { !upper(alpha[t]) };
            if !in_low {
                continue;
            }
            let yg = y[t] * grad[t];
            if yg >= gmax2 {
                gmax2 = yg;
            }
            let grad_diff = gmax + yg;
            if grad_diff > 0.0 {
                let quad = k[i * n + i] + k[t * n + t] - 2.0 * k[i * n + t];
                let quad = if quad > 0.0 { quad } else { TAU };
                let obj = -(grad_diff * grad_diff) / quad;
                if obj <= best_obj {
                    best_obj = obj;
                    j_sel = Some(t);
                }
            }
        }
        let Some(j) = j_sel else {
            converged = true;
            break;
        };
        if gmax + gmax2 < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = k[i * n + i] + k[j * n + j] + 2.0 * q(i, j);
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = k[i * n + i] + k[j * n + j] - 2.0 * q(i, j);
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q(i, t) * di + q(j, t) * dj;
        }
    }

    // Bias from free vectors, or the midpoint of the feasible interval.
    let (mut ub, mut lb, mut sum_free, mut n_free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };

    let mut weights = vec![0.0; d];
    for t in 0..n {
        if alpha[t] != 0.0 {
            let coef = alpha[t] * y[t];
            for (w, v) in weights.iter_mut().zip(x[t]) {
                *w += coef * v;
            }
        }
    }
    BinarySvm { weights, bias: -rho, iterations, converged }
}

// ---------------------------------------------------------------------------
// Multi-class

/// Something that predicts a class id for a feature vector.
pub trait Classifier {
    fn predict(&self, x: &[f64]) -> usize;
    fn converged(&self) -> bool {
        true
    }
}

/// Fits a [`Classifier`] for a penalty value.
pub trait Learner: Sync {
    type Model: Classifier;
    fn fit(&self, x: &[&[f64]], y: &[usize], c: f64) -> Result<Self::Model>;
}

/// One-vs-one linear SVM.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    /// Sorted class ids seen in training.
    pub classes: Vec<usize>,
    /// `(a, b, svm)` with `a < b` indexing `classes`.
    pub pairs: Vec<(usize, usize, BinarySvm)>,
}

impl LinearSvm {
    /// Votes and summed decision values per class (in `classes` order).
    pub fn scores(&self, x: &[f64]) -> (Vec<usize>, Vec<f64>) {
        let mut votes = vec![0usize; self.classes.len()];
        let mut sums = vec![0.0; self.classes.len()];
        for (a, b, svm) in &self.pairs {
            let f = svm.decision(x);
            // An exact zero abstains.
            if f > 0.0 {
                votes[*a] += 1;
            } else if f < 0.0 {
                votes[*b] += 1;
            }
            sums[*a] += f;
            sums[*b] -= f;
        }
        (votes, sums)
    }
}

impl Classifier for LinearSvm {
    /// Majority vote; ties go to the larger summed decision value, then to
    /// the smaller class id.
    fn predict(&self, x: &[f64]) -> usize {
        let (votes, sums) = self.scores(x);
        let mut best = 0;
        for i in 1..self.classes.len() {
            if votes[i] > votes[best] || (votes[i] == votes[best] && sums[i] > sums[best]) {
                best = i;
            }
        }
        self.classes[best]
    }

    fn converged(&self) -> bool {
        self.pairs.iter().all(|(_, _, s)| s.converged)
    }
}

/// Solver settings for [`LinearSvm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSvmLearner {
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for LinearSvmLearner {
    fn default() -> Self {
        Self { tolerance: DEFAULT_TOLERANCE, max_iter: DEFAULT_MAX_ITER }
    }
}

impl Learner for LinearSvmLearner {
    type Model = LinearSvm;

    fn fit(&self, x: &[&[f64]], y: &[usize], c: f64) -> Result<LinearSvm> {
        if x.len() != y.len() {
            return Err(Error::Shape(alloc::format!("{} vectors but {} labels", x.len(), y.len())));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Config(alloc::format!("penalty must be positive, got {}", c)));
        }
        let classes: Vec<usize> = y.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if classes.len() < 2 {
            return Err(Error::Protocol("training set needs at least two classes".into()));
        }
        let mut pairs = Vec::new();
        for a in 0..classes.len() {
            for b in a + 1..classes.len() {
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for (v, &l) in x.iter().zip(y) {
                    if l == classes[a] {
                        xs.push(*v);
                        ys.push(1.0);
                    } else if l == classes[b] {
                        xs.push(*v);
                        ys.push(-1.0);
                    }
                }
                pairs.push((a, b, train_binary(&xs, &ys, c, self.tolerance, self.max_iter)));
            }
        }
        Ok(LinearSvm { classes, pairs })
    }
}

/// Trains a one-vs-one linear SVM with the default solver settings.
pub fn train_linear_svm(train: &[LabeledFeature], c: f64) -> Result<LinearSvm> {
    let x: Vec<&[f64]> = train.iter().map(|f| f.vector.as_slice()).collect();
    let y: Vec<usize> = train.iter().map(|f| f.label).collect();
    LinearSvmLearner::default().fit(&x, &y, c)
}

// ---------------------------------------------------------------------------
// Metrics

/// Summary metrics of one evaluation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metrics {
    /// Mean over subjects of per-subject accuracy.
    pub mean_accuracy: f64,
    /// Correct predictions over all samples.
    pub pooled_accuracy: f64,
    /// Unweighted mean of per-class F1 over classes that occur in truths or predictions.
    pub f1_macro: f64,
    /// Per-class F1 weighted by class support.
    pub f1_weighted: f64,
    /// Mean recall over classes with support.
    pub uar: f64,
    /// `confusion[truth][prediction]`.
    pub confusion: Vec<Vec<usize>>,
    pub samples: usize,
}

pub fn compute_metrics<S: AsRef<str>>(predictions: &[usize], truths: &[usize], subjects: &[S], n_classes: usize) -> Result<Metrics> {
    if predictions.is_empty() {
        return Err(Error::Protocol("no predictions to score".into()));
    }
    if predictions.len() != truths.len() || truths.len() != subjects.len() {
        return Err(Error::Shape(alloc::format!(
            "{} predictions, {} truths, {} subjects",
            predictions.len(),
            truths.len(),
            subjects.len()
        )));
    }
    let nc = predictions.iter().chain(truths).map(|&c| c + 1).max().unwrap_or(0).max(n_classes);
    let mut confusion = vec![vec![0usize; nc]; nc];
    for (&p, &t) in predictions.iter().zip(truths) {
        confusion[t][p] += 1;
    }
    let n = truths.len();

    let mut per_subject: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for ((&p, &t), s) in predictions.iter().zip(truths).zip(subjects) {
        let e = per_subject.entry(s.as_ref()).or_default();
        e.0 += (p == t) as usize;
        e.1 += 1;
    }
    let mean_accuracy = per_subject.values().map(|&(c, t)| c as f64 / t as f64).sum::<f64>() / per_subject.len() as f64;
    let correct: usize = (0..nc).map(|i| confusion[i][i]).sum();

    let mut f1_sum = 0.0;
    let mut f1_classes = 0usize;
    let mut f1_weighted = 0.0;
    let mut recall_sum = 0.0;
    let mut recall_classes = 0usize;
    for c in 0..nc {
        let support: usize = confusion[c].iter().sum();
        let predicted: usize = (0..nc).map(|r| confusion[r][c]).sum();
        if support == 0 && predicted == 0 {
            continue;
        }
        let tp = confusion[c][c] as f64;
        let precision = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        let recall = if support > 0 { tp / support as f64 } else { 0.0 };
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        f1_sum += f1;
        f1_classes += 1;
        f1_weighted += support as f64 / n as f64 * f1;
        if support > 0 {
            recall_sum += recall;
            recall_classes += 1;
        }
    }
    Ok(Metrics {
        mean_accuracy,
        pooled_accuracy: correct as f64 / n as f64,
        f1_macro: f1_sum / f1_classes as f64,
        f1_weighted,
        uar: recall_sum / recall_classes as f64,
        confusion,
        samples: n,
    })
}

// ---------------------------------------------------------------------------
// Leave-one-subject-out

/// Evaluation stage reported to a [`FoldObserver`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    WpcaFit,
    CSelection,
    SvmTrain,
}

/// Receives the sample indices each stage of a fold consumed.
pub trait FoldObserver: Sync {
    fn record(&self, fold: usize, stage: Stage, samples: &[usize]);
}

pub struct NoopObserver;

impl FoldObserver for NoopObserver {
    fn record(&self, _: usize, _: Stage, _: &[usize]) {}
}

/// Metadata of one sample, without its feature vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleInfo {
    pub subject_id: String,
    pub label: usize,
    pub dataset_id: String,
}

impl From<&LabeledFeature> for SampleInfo {
    fn from(f: &LabeledFeature) -> Self {
        Self { subject_id: f.subject_id.clone(), label: f.label, dataset_id: f.dataset_id.clone() }
    }
}

/// One outer fold: every sample of `subject` is held out.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub index: usize,
    pub subject: String,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Feature vectors for a fold, aligned with `FoldPlan::train` / `test`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldData {
    pub train: Vec<Vec<f64>>,
    pub test: Vec<Vec<f64>>,
}

/// Produces fold features; implementations that learn anything (for example
/// a projection) must only look at `plan.train`.
pub trait FeatureProvider: Sync {
    fn prepare(&self, plan: &FoldPlan, observer: &dyn FoldObserver) -> Result<FoldData>;
}

/// Uses fixed per-sample vectors.
pub struct FixedFeatures<'a>(pub &'a [Vec<f64>]);

impl FeatureProvider for FixedFeatures<'_> {
    fn prepare(&self, plan: &FoldPlan, _: &dyn FoldObserver) -> Result<FoldData> {
        Ok(FoldData {
            train: plan.train.iter().map(|&i| self.0[i].clone()).collect(),
            test: plan.test.iter().map(|&i| self.0[i].clone()).collect(),
        })
    }
}

/// Per-fold outcome.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FoldReport {
    pub subject: String,
    pub chosen_c: f64,
    /// Inner mean accuracy of the chosen penalty, absent when no inner split was possible.
    pub inner_accuracy: Option<f64>,
    pub indices: Vec<usize>,
    pub predictions: Vec<usize>,
    pub truths: Vec<usize>,
    pub converged: bool,
}

/// Outcome of a full protocol run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub metrics: Metrics,
    /// Metrics restricted to each source dataset.
    pub per_dataset: Vec<(String, Metrics)>,
    pub folds: Vec<FoldReport>,
    pub n_classes: usize,
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn chosen_penalties(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.chosen_c).collect()
    }
}

/// Holds out each subject in turn, subjects in sorted order.
pub fn loso_plan(samples: &[SampleInfo]) -> Result<Vec<FoldPlan>> {
    let subjects: BTreeSet<&str> = samples.iter().map(|s| s.subject_id.as_str()).collect();
    if subjects.len() < 2 {
        return Err(Error::Protocol(alloc::format!("need at least 2 subjects, got {}", subjects.len())));
    }
    if let Some(s) = samples.iter().find(|s| s.subject_id.is_empty()) {
        return Err(Error::Protocol(alloc::format!("sample with label {} has an empty subject id", s.label)));
    }
    Ok(subjects
        .into_iter()
        .enumerate()
        .map(|(index, subject)| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..samples.len()).partition(|&i| samples[i].subject_id == subject);
            FoldPlan { index, subject: subject.into(), train, test }
        })
        .collect())
}

fn check_grid(c_grid: &[f64]) -> Result<()> {
    if c_grid.is_empty() {
        return Err(Error::Config("penalty grid is empty".into()));
    }
    if let Some(c) = c_grid.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
        return Err(Error::Config(alloc::format!("penalties must be positive, got {}", c)));
    }
    Ok(())
}

/// Fits on `train`, predicting `test`. A single-class training set yields a
/// constant predictor, which only arises inside penalty selection.
fn fit_predict<L: Learner>(learner: &L, xs: &[&[f64]], ys: &[usize], c: f64, test: &[&[f64]]) -> Result<(Vec<usize>, bool)> {
    let first = ys[0];
    if ys.iter().all(|&y| y == first) {
        return Ok((vec![first; test.len()], true));
    }
    let model = learner.fit(xs, ys, c)?;
    Ok((test.iter().map(|x| model.predict(x)).collect(), model.converged()))
}

/// Runs one outer fold: penalty selection by inner leave-one-subject-out on
/// the training part, then a final fit with the selected penalty.
pub fn run_fold<L: Learner>(
    plan: &FoldPlan,
    samples: &[SampleInfo],
    data: &FoldData,
    learner: &L,
    c_grid: &[f64],
    observer: &dyn FoldObserver,
) -> Result<FoldReport> {
    check_grid(c_grid)?;
    if plan.train.is_empty() {
        return Err(Error::Protocol(alloc::format!("fold {} has no training samples", plan.subject)));
    }
    if data.train.len() != plan.train.len() || data.test.len() != plan.test.len() {
        return Err(Error::Shape("fold features do not match the fold plan".into()));
    }
    let labels: Vec<usize> = plan.train.iter().map(|&i| samples[i].label).collect();
    let inner_subjects: BTreeSet<&str> = plan.train.iter().map(|&i| samples[i].subject_id.as_str()).collect();

    let mut converged = true;
    let smallest = c_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let (chosen_c, inner_accuracy) = if inner_subjects.len() >= 2 {
        observer.record(plan.index, Stage::CSelection, &plan.train);
        let mut best: Option<(f64, f64)> = None;
        for &c in c_grid {
            let mut acc_sum = 0.0;
            for &held in &inner_subjects {
                let (mut xs, mut ys, mut ids, mut tx, mut tys) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
                for (pos, &i) in plan.train.iter().enumerate() {
                    if samples[i].subject_id == held {
                        tx.push(data.train[pos].as_slice());
                        tys.push(labels[pos]);
                    } else {
                        xs.push(data.train[pos].as_slice());
                        ys.push(labels[pos]);
                        ids.push(i);
                    }
                }
                observer.record(plan.index, Stage::SvmTrain, &ids);
                let (pred, ok) = fit_predict(learner, &xs, &ys, c, &tx)?;
                converged &= ok;
                let correct = pred.iter().zip(&tys).filter(|(p, t)| p == t).count();
                acc_sum += correct as f64 / tys.len() as f64;
            }
            let acc = acc_sum / inner_subjects.len() as f64;
            best = match best {
                Some((bc, ba)) if ba > acc || (ba == acc && bc <= c) => Some((bc, ba)),
                _ => Some((c, acc)),
            };
        }
        let (c, a) = best.unwrap_or((smallest, 0.0));
        (c, Some(a))
    } else {
        (smallest, None)
    };

    observer.record(plan.index, Stage::SvmTrain, &plan.train);
    let xs: Vec<&[f64]> = data.train.iter().map(|v| v.as_slice()).collect();
    let tx: Vec<&[f64]> = data.test.iter().map(|v| v.as_slice()).collect();
    let (predictions, ok) = fit_predict(learner, &xs, &labels, chosen_c, &tx)?;
    converged &= ok;
    Ok(FoldReport {
        subject: plan.subject.clone(),
        chosen_c,
        inner_accuracy,
        indices: plan.test.clone(),
        predictions,
        truths: plan.test.iter().map(|&i| samples[i].label).collect(),
        converged,
    })
}

/// Pools fold predictions into overall and per-dataset metrics.
pub fn assemble_report(folds: Vec<FoldReport>, samples: &[SampleInfo], n_classes: usize) -> Result<EvalReport> {
    let mut predictions = vec![None; samples.len()];
    for fold in &folds {
        for (&i, &p) in fold.indices.iter().zip(&fold.predictions) {
            predictions[i] = Some(p);
        }
    }
    let mut preds = Vec::with_capacity(samples.len());
    for (i, p) in predictions.iter().enumerate() {
        preds.push(p.ok_or_else(|| Error::Protocol(alloc::format!("sample {} was never tested", i)))?);
    }
    let truths: Vec<usize> = samples.iter().map(|s| s.label).collect();
    let subjects: Vec<&str> = samples.iter().map(|s| s.subject_id.as_str()).collect();
    let metrics = compute_metrics(&preds, &truths, &subjects, n_classes)?;

    let datasets: BTreeSet<&str> = samples.iter().map(|s| s.dataset_id.as_str()).collect();
    let mut per_dataset = Vec::new();
    for ds in datasets {
        let idx: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].dataset_id == ds).collect();
        let p: Vec<usize> = idx.iter().map(|&i| preds[i]).collect();
        let t: Vec<usize> = idx.iter().map(|&i| truths[i]).collect();
        let s: Vec<&str> = idx.iter().map(|&i| subjects[i]).collect();
        per_dataset.push((ds.into(), compute_metrics(&p, &t, &s, metrics.confusion.len())?));
    }

    let warnings = folds
        .iter()
        .filter(|f| !f.converged)
        .map(|f| alloc::format!("solver hit the iteration cap in fold {}", f.subject))
        .collect();
    Ok(EvalReport { n_classes: metrics.confusion.len(), metrics, per_dataset, folds, warnings })
}

/// Leave-one-subject-out with nested penalty selection, fully generic.
pub fn loso_evaluate_with<P: FeatureProvider, L: Learner>(
    samples: &[SampleInfo],
    provider: &P,
    learner: &L,
    c_grid: &[f64],
    n_classes: usize,
    observer: &dyn FoldObserver,
) -> Result<EvalReport> {
    check_grid(c_grid)?;
    let plans = loso_plan(samples)?;
    let mut folds = Vec::with_capacity(plans.len());
    for plan in &plans {
        let data = provider.prepare(plan, observer)?;
        folds.push(run_fold(plan, samples, &data, learner, c_grid, observer)?);
    }
    assemble_report(folds, samples, n_classes)
}

/// Leave-one-subject-out over fixed features with the linear SVM.
pub fn loso_evaluate(data: &[LabeledFeature], c_grid: &[f64]) -> Result<EvalReport> {
    let samples: Vec<SampleInfo> = data.iter().map(SampleInfo::from).collect();
    let vectors: Vec<Vec<f64>> = data.iter().map(|f| f.vector.clone()).collect();
    let n_classes = samples.iter().map(|s| s.label + 1).max().unwrap_or(0);
    loso_evaluate_with(&samples, &FixedFeatures(&vectors), &LinearSvmLearner::default(), c_grid, n_classes, &NoopObserver)
}

/// Z-scores every column with statistics of the training rows only.
pub fn standardize(data: &mut FoldData) {
    let Some(d) = data.train.first().map(|r| r.len()) else { return };
    let n = data.train.len() as f64;
    for j in 0..d {
        let mean = data.train.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = data.train.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / n;
        let sd = libm::sqrt(var);
        let sd = if sd > 0.0 { sd } else { 1.0 };
        for row in data.train.iter_mut().chain(data.test.iter_mut()) {
            row[j] = (row[j] - mean) / sd;
        }
    }
}

/// Scales a vector to unit Euclidean norm (zero vectors are left alone).
pub fn l2_normalize(v: &mut [f64]) {
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

// ---------------------------------------------------------------------------
// Composite databases

/// Headline metrics of a composite run differ by protocol; the procedure does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CompositeProtocol {
    /// F1 and weighted F1 over objective classes.
    Megc2018,
    /// F1 and UAR over three emotion groups, broken down per source.
    Megc2019,
}

/// One source dataset with its label remapping.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDataset {
    pub name: String,
    pub samples: Vec<LabeledFeature>,
    /// Original label → unified class id.
    pub class_map: BTreeMap<usize, usize>,
}

/// Remaps labels, namespaces subject ids as `dataset/subject`, and merges.
pub fn composite_merge(datasets: &[SourceDataset]) -> Result<Vec<LabeledFeature>> {
    let mut out = Vec::new();
    for ds in datasets {
        for s in &ds.samples {
            let label = *ds.class_map.get(&s.label).ok_or_else(|| {
                Error::Config(alloc::format!("label {} of dataset {} has no mapping", s.label, ds.name))
            })?;
            out.push(LabeledFeature {
                vector: s.vector.clone(),
                subject_id: alloc::format!("{}/{}", ds.name, s.subject_id),
                label,
                dataset_id: ds.name.clone(),
            });
        }
    }
    Ok(out)
}

/// Merges the datasets and runs leave-one-subject-out over the union.
pub fn composite_evaluate(datasets: &[SourceDataset], _protocol: CompositeProtocol, c_grid: &[f64]) -> Result<EvalReport> {
    let merged = composite_merge(datasets)?;
    let n_classes = datasets.iter().flat_map(|d| d.class_map.values()).map(|c| c + 1).max().unwrap_or(0);
    let samples: Vec<SampleInfo> = merged.iter().map(SampleInfo::from).collect();
    let vectors: Vec<Vec<f64>> = merged.iter().map(|f| f.vector.clone()).collect();
    loso_evaluate_with(&samples, &FixedFeatures(&vectors), &LinearSvmLearner::default(), c_grid, n_classes, &NoopObserver)
}
