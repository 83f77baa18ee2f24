//! Run reports: JSON for machines, a fixed-width table for people.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use elbptop_core::{EvalReport, Metrics};
use serde::{Deserialize, Serialize};

use crate::cache::write_atomic;
use crate::config::RunConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSummary {
    pub tag: String,
    pub layout: String,
    pub dimension: usize,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// The configuration exactly as run.
    pub config: RunConfig,
    pub class_names: Vec<String>,
    pub clips: usize,
    pub clips_per_class: BTreeMap<String, usize>,
    pub descriptors: Vec<DescriptorSummary>,
    /// Projection fitted on test clips too; results are not leakage-free.
    pub transductive_wpca: bool,
    pub evaluation: EvalReport,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default() + "\n"
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json { path: path.into(), source: e })
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let tags: Vec<&str> = self.descriptors.iter().map(|d| d.tag.as_str()).collect();
        let _ = writeln!(out, "descriptors: {}", tags.join(" + "));
        let _ = writeln!(out, "clips: {}  classes: {}  folds: {}", self.clips, self.class_names.len(), self.evaluation.folds.len());
        if self.transductive_wpca {
            let _ = writeln!(out, "note: projection fitted transductively (includes test clips)");
        }
        out.push_str(&metrics_table(&self.evaluation));
        let _ = writeln!(out, "confusion (rows = truth, columns = prediction):");
        for (name, row) in self.class_names.iter().zip(&self.evaluation.metrics.confusion) {
            let cells: Vec<String> = row.iter().map(|c| format!("{:>4}", c)).collect();
            let _ = writeln!(out, "  {:<12} {}", name, cells.join(""));
        }
        for w in &self.evaluation.warnings {
            let _ = writeln!(out, "warning: {}", w);
        }
        out
    }
}

fn row(out: &mut String, name: &str, m: &Metrics) {
    let _ = writeln!(
        out,
        "{:<16} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>6}",
        name, m.mean_accuracy, m.pooled_accuracy, m.f1_macro, m.f1_weighted, m.uar, m.samples
    );
}

/// Overall and per-dataset metrics, one row each.
pub fn metrics_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<16} {:>8} {:>8} {:>8} {:>8} {:>8} {:>6}", "", "Acc.", "pooled", "F1", "wF1", "UAR", "n");
    row(&mut out, "overall", &report.metrics);
    if report.per_dataset.len() > 1 {
        for (name, m) in &report.per_dataset {
            row(&mut out, name, m);
        }
    }
    out
}
