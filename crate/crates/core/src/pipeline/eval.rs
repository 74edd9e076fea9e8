use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::classify::Verdict;
use crate::error::{Error, Result};
use crate::tseries::CenterSeq;

use super::GestureModel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRate {
    pub label: String,
    pub total: usize,
    pub correct: usize,
    pub rejected: usize,
    /// `correct / total`; absent for classes with no test samples.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalseDetection {
    pub total: usize,
    /// Unspecified gestures that were accepted as some class.
    pub accepted: usize,
    pub rate: f64,
}

/// Recognition statistics over a labeled test set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub labels: Vec<String>,
    /// `confusion[true][predicted]`; the extra last column counts rejections.
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassRate>,
    pub overall: f64,
    /// Absent when no unspecified gestures were evaluated.
    pub false_detection: Option<FalseDetection>,
}

impl Report {
    /// Builds a report from `(true class, predicted class or None for reject)`
    /// pairs and the accept/reject outcome of each unspecified gesture.
    pub fn from_outcomes(
        labels: Vec<String>,
        outcomes: &[(usize, Option<usize>)],
        unspecified_accepted: &[bool],
    ) -> Self {
        let k = labels.len();
        let mut confusion = vec![vec![0; k + 1]; k];
        for &(t, p) in outcomes {
            confusion[t][p.unwrap_or(k)] += 1;
        }
        let per_class = labels
            .iter()
            .enumerate()
            .map(|(i, label)| {
                let total: usize = confusion[i].iter().sum();
                ClassRate {
                    label: label.clone(),
                    total,
                    correct: confusion[i][i],
                    rejected: confusion[i][k],
                    rate: (total > 0).then(|| confusion[i][i] as f64 / total as f64),
                }
            })
            .collect::<Vec<_>>();
        let correct: usize = per_class.iter().map(|c| c.correct).sum();
        let overall = if outcomes.is_empty() {
            0.0
        } else {
            correct as f64 / outcomes.len() as f64
        };
        let false_detection = (!unspecified_accepted.is_empty()).then(|| {
            let accepted = unspecified_accepted.iter().filter(|&&a| a).count();
            FalseDetection {
                total: unspecified_accepted.len(),
                accepted,
                rate: accepted as f64 / unspecified_accepted.len() as f64,
            }
        });
        Self {
            labels,
            confusion,
            per_class,
            overall,
            false_detection,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.labels.iter().map(String::len).max().unwrap_or(5).max(5);
        writeln!(f, "{:<width$}  {:>5}  {:>7}  {:>8}  {:>6}", "class", "total", "correct", "rejected", "rate")?;
        for c in &self.per_class {
            let rate = c
                .rate
                .map(|r| format!("{:.1}%", 100.0 * r))
                .unwrap_or_else(|| "n/a".into());
            writeln!(
                f,
                "{:<width$}  {:>5}  {:>7}  {:>8}  {:>6}",
                c.label, c.total, c.correct, c.rejected, rate
            )?;
        }
        writeln!(f, "overall recognition: {:.1}%", 100.0 * self.overall)?;
        match &self.false_detection {
            Some(fd) => writeln!(
                f,
                "false detection: {:.1}% ({}/{})",
                100.0 * fd.rate,
                fd.accepted,
                fd.total
            )?,
            None => writeln!(f, "false detection: n/a")?,
        }
        writeln!(f, "confusion (rows: true, columns: predicted, last: rejected)")?;
        write!(f, "{:<width$}", "")?;
        for l in &self.labels {
            write!(f, " {l:>width$}")?;
        }
        writeln!(f, " {:>width$}", "rej")?;
        for (l, row) in self.labels.iter().zip(&self.confusion) {
            write!(f, "{l:<width$}")?;
            for v in row {
                write!(f, " {v:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Classifies every test sample and every unspecified gesture.
///
/// Test samples are pre-segmented gestures, so they are matched with full
/// DTW like the training data.
pub fn evaluate(
    model: &GestureModel,
    test: &[(String, CenterSeq)],
    unspecified: &[CenterSeq],
) -> Result<Report> {
    if test.is_empty() {
        return Err(Error::Config("test set is empty".into()));
    }
    let truths = test
        .iter()
        .map(|(label, _)| model.class_index(label).ok_or_else(|| Error::UnknownLabel(label.clone())))
        .collect::<Result<Vec<_>>>()?;
    let outcomes = test
        .par_iter()
        .zip(&truths)
        .map(|((_, seq), &t)| {
            let c = model.classify_seq(seq, false)?;
            Ok((t, predicted(&c.verdict)))
        })
        .collect::<Result<Vec<_>>>()?;
    let accepted = unspecified
        .par_iter()
        .map(|seq| Ok(!model.classify_seq(seq, false)?.verdict.is_reject()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Report::from_outcomes(
        model.labels().map(str::to_string).collect(),
        &outcomes,
        &accepted,
    ))
}

fn predicted(v: &Verdict) -> Option<usize> {
    match v {
        Verdict::Accept { class, .. } => Some(*class),
        Verdict::Reject { .. } => None,
    }
}
