//! Evaluation metrics and result emission: confusion matrix, accuracy,
//! precision/recall/F1, per-epoch curves, and the model comparison
//! table, written out as CSV/TXT/SVG artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dataset::LabeledDataset;
use crate::models::{is_malicious, predict, ClassifierModel, ModelError};
use crate::reduce::Reducer;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Reduce(#[from] crate::reduce::ReduceError),
    #[error("I/O failure: {0}")]
    IoFailure(#[from] std::io::Error),
}

/// Counts at threshold 0.5; the positive class is malicious.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub model_name: String,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub precision: f64,
    /// true when no positive predictions were made (precision reported
    /// as 0 rather than NaN)
    pub precision_degenerate: bool,
    pub recall: f64,
    pub f1: f64,
}

impl EvalReport {
    /// Derive all ratios from raw confusion counts.
    ///
    /// ```
    /// use permsentry::eval::{ConfusionMatrix, EvalReport};
    ///
    /// let report = EvalReport::from_confusion(
    ///     "demo",
    ///     ConfusionMatrix { tp: 19, fp: 2, tn: 30, fn_: 3 },
    /// );
    /// assert_eq!(format!("{:.5}", report.precision), "0.90476");
    /// ```
    pub fn from_confusion(model_name: &str, confusion: ConfusionMatrix) -> EvalReport {
        let total = confusion.total() as f64;
        let accuracy = (confusion.tp + confusion.tn) as f64 / total;
        let positive_predictions = confusion.tp + confusion.fp;
        let precision_degenerate = positive_predictions == 0;
        let precision = if precision_degenerate {
            0.0
        } else {
            confusion.tp as f64 / positive_predictions as f64
        };
        let actual_positives = confusion.tp + confusion.fn_;
        let recall = if actual_positives == 0 {
            0.0
        } else {
            confusion.tp as f64 / actual_positives as f64
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        EvalReport {
            model_name: model_name.to_string(),
            confusion,
            accuracy,
            precision,
            precision_degenerate,
            recall,
            f1,
        }
    }
}

/// Per-epoch training trace: (epoch, train accuracy, validation
/// accuracy, train loss). Epoch indices are strictly increasing from 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingCurve {
    pub records: Vec<(usize, f64, f64, f64)>,
}

impl TrainingCurve {
    pub fn push(&mut self, epoch: usize, train_acc: f64, val_acc: f64, train_loss: f64) {
        debug_assert!(self.records.last().is_none_or(|r| r.0 < epoch));
        self.records.push((epoch, train_acc, val_acc, train_loss));
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Run the model over every test row at threshold 0.5.
pub fn evaluate(
    model: &ClassifierModel,
    reducer: &Reducer,
    test: &LabeledDataset,
) -> Result<EvalReport, EvalError> {
    assert!(!test.is_empty(), "test set must be non-empty");
    let mut confusion = ConfusionMatrix::default();
    for (row, &label) in test.rows.iter().zip(&test.labels) {
        let x = reducer.apply(row)?;
        let p = predict(model, &x)?;
        let verdict = is_malicious(p);
        let truth = label == crate::dataset::Label::Malicious;
        match (truth, verdict) {
            (true, true) => confusion.tp += 1,
            (true, false) => confusion.fn_ += 1,
            (false, true) => confusion.fp += 1,
            (false, false) => confusion.tn += 1,
        }
    }
    Ok(EvalReport::from_confusion(model.kind().name(), confusion))
}

/// Sort reports by accuracy descending, ties by name ascending.
pub fn compare_models(reports: &[EvalReport]) -> Vec<EvalReport> {
    assert!(!reports.is_empty());
    let mut sorted = reports.to_vec();
    sorted.sort_by(|a, b| {
        b.accuracy
            .total_cmp(&a.accuracy)
            .then_with(|| a.model_name.cmp(&b.model_name))
    });
    sorted
}

/// Render the ranked comparison as an aligned text table.
pub fn render_comparison(ranked: &[EvalReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<22} {:>9}", "Technique", "Accuracy");
    for report in ranked {
        let _ = writeln!(
            out,
            "{:<22} {:>8.1}%",
            report.model_name,
            report.accuracy * 100.0
        );
    }
    out
}

pub fn comparison_csv(ranked: &[EvalReport]) -> String {
    let mut out = String::from("model,accuracy,precision,recall,f1,tp,fp,tn,fn\n");
    for r in ranked {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.model_name,
            r.accuracy,
            r.precision,
            r.recall,
            r.f1,
            r.confusion.tp,
            r.confusion.fp,
            r.confusion.tn,
            r.confusion.fn_
        );
    }
    out
}

pub fn render_report(report: &EvalReport) -> String {
    let c = &report.confusion;
    let mut out = String::new();
    let _ = writeln!(out, "model: {}", report.model_name);
    let _ = writeln!(out, "samples: {}", c.total());
    let _ = writeln!(out, "confusion matrix (positive = malicious):");
    let _ = writeln!(out, "             predicted+  predicted-");
    let _ = writeln!(out, "  actual+  {:>10}  {:>10}", c.tp, c.fn_);
    let _ = writeln!(out, "  actual-  {:>10}  {:>10}", c.fp, c.tn);
    let _ = writeln!(out, "accuracy:  {:.4}", report.accuracy);
    let degenerate = if report.precision_degenerate {
        "  (degenerate: no positive predictions)"
    } else {
        ""
    };
    let _ = writeln!(out, "precision: {:.5}{degenerate}", report.precision);
    let _ = writeln!(out, "recall:    {:.4}", report.recall);
    let _ = writeln!(out, "f1:        {:.4}", report.f1);
    out
}

fn curve_csv(curve: &TrainingCurve) -> String {
    let mut out = String::from("epoch,train_acc,val_acc,train_loss\n");
    for (epoch, train_acc, val_acc, train_loss) in &curve.records {
        let _ = writeln!(out, "{epoch},{train_acc},{val_acc},{train_loss}");
    }
    out
}

fn confusion_csv(c: &ConfusionMatrix) -> String {
    format!(
        ",predicted_malicious,predicted_benign\nactual_malicious,{},{}\nactual_benign,{},{}\n",
        c.tp, c.fn_, c.fp, c.tn
    )
}

/// Static SVG line chart of the train/validation accuracy series.
fn curve_svg(curve: &TrainingCurve) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const MARGIN: f64 = 40.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(
        out,
        "  <rect width=\"{W}\" height=\"{H}\" fill=\"white\" stroke=\"#ccc\"/>"
    );
    if !curve.is_empty() {
        let max_epoch = curve.records.last().unwrap().0 as f64;
        let scale_x = |epoch: usize| {
            MARGIN + (W - 2.0 * MARGIN) * (epoch as f64 - 1.0) / (max_epoch - 1.0).max(1.0)
        };
        let scale_y = |acc: f64| H - MARGIN - (H - 2.0 * MARGIN) * acc;
        for (series, color) in [(1usize, "#1f77b4"), (2usize, "#d62728")] {
            let points: Vec<String> = curve
                .records
                .iter()
                .map(|r| {
                    let acc = if series == 1 { r.1 } else { r.2 };
                    format!("{:.2},{:.2}", scale_x(r.0), scale_y(acc))
                })
                .collect();
            let _ = writeln!(
                out,
                "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
                points.join(" ")
            );
        }
        let _ = writeln!(
            out,
            "  <text x=\"{MARGIN}\" y=\"20\" font-size=\"12\">train accuracy (blue) / validation accuracy (red)</text>"
        );
    }
    let _ = writeln!(out, "</svg>");
    out
}

/// Write `confusion.csv`, `curve.csv`, `report.txt` and `curve.svg`
/// into `out_dir`; returns the written paths.
pub fn emit_artifacts(
    report: &EvalReport,
    curve: &TrainingCurve,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, EvalError> {
    std::fs::create_dir_all(out_dir)?;
    let files = [
        ("confusion.csv", confusion_csv(&report.confusion)),
        ("curve.csv", curve_csv(curve)),
        ("report.txt", render_report(report)),
        ("curve.svg", curve_svg(curve)),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = out_dir.join(name);
        std::fs::write(&path, contents)?;
        written.push(path);
    }
    Ok(written)
}
