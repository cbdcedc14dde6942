use std::io::Write;

use serde::{Deserialize, Serialize};

use super::stats::mean_std;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Classical dual solver.
    Baseline,
    /// QUBO sampled by simulated annealing.
    Annealing,
    /// QUBO solved by enumeration.
    Exhaustive,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Annealing => "annealing",
            Method::Exhaustive => "exhaustive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

/// Wall-clock seconds per phase. Phases a method does not have are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    /// QUBO construction.
    pub preprocess: Option<f64>,
    /// QUBO solving.
    pub sample: Option<f64>,
    /// Classical training, Gram matrix included.
    pub train: Option<f64>,
}

/// Checks run on every classical fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineDiagnostics {
    pub converged: bool,
    pub iterations: usize,
    /// `Σ λ_i y_i`.
    pub equality_residual: f64,
    pub within_box: bool,
    /// The dual objective never decreased between updates.
    pub monotone_ascent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRecord {
    pub variant: String,
    pub repetition: usize,
    pub method: Method,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub train_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub support_vectors: Option<usize>,
    /// QUBO energy of the returned sample.
    pub energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<PhaseTimings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<BaselineDiagnostics>,
}

/// Mean and population standard deviation over the successful records of
/// one `(variant, method)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub variant: String,
    pub method: Method,
    pub runs: usize,
    pub failures: usize,
    pub train_mean: Option<f64>,
    pub train_std: Option<f64>,
    pub test_mean: Option<f64>,
    pub test_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub name: String,
    pub seed: u64,
    pub records: Vec<RepetitionRecord>,
    pub aggregates: Vec<Aggregate>,
}

/// One CSV row per record.
#[derive(Serialize)]
struct CsvRow<'a> {
    variant: &'a str,
    repetition: usize,
    method: &'static str,
    status: Status,
    failure: Option<&'a str>,
    train_accuracy: Option<f64>,
    test_accuracy: Option<f64>,
    support_vectors: Option<usize>,
    energy: Option<f64>,
    preprocess_s: Option<f64>,
    sample_s: Option<f64>,
    train_s: Option<f64>,
    equality_residual: Option<f64>,
    converged: Option<bool>,
}

impl AccuracyReport {
    /// Builds the report and its aggregates. Aggregate rows follow the order
    /// in which `(variant, method)` pairs first appear in `records`.
    pub fn from_records(
        name: impl Into<String>,
        seed: u64,
        records: Vec<RepetitionRecord>,
    ) -> Self {
        let aggregates = aggregate(&records);
        Self {
            name: name.into(),
            seed,
            records,
            aggregates,
        }
    }

    pub fn aggregate(&self, variant: &str, method: Method) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.variant == variant && a.method == method)
    }

    /// Fails if the stored aggregates differ from a recomputation over the
    /// records.
    pub fn check_consistency(&self) -> Result<()> {
        if aggregate(&self.records) != self.aggregates {
            return Err(Error::invalid(format!(
                "report '{}': aggregates do not match its records",
                self.name
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.check_consistency()?;
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(s)?;
        report.check_consistency()?;
        Ok(report)
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        self.check_consistency()?;
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            let t = r.timings.as_ref();
            w.serialize(CsvRow {
                variant: &r.variant,
                repetition: r.repetition,
                method: r.method.as_str(),
                status: r.status,
                failure: r.failure.as_deref(),
                train_accuracy: r.train_accuracy,
                test_accuracy: r.test_accuracy,
                support_vectors: r.support_vectors,
                energy: r.energy,
                preprocess_s: t.and_then(|t| t.preprocess),
                sample_s: t.and_then(|t| t.sample),
                train_s: t.and_then(|t| t.train),
                equality_residual: r.diagnostics.as_ref().map(|d| d.equality_residual),
                converged: r.diagnostics.as_ref().map(|d| d.converged),
            })?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

fn aggregate(records: &[RepetitionRecord]) -> Vec<Aggregate> {
    let mut keys: Vec<(&str, Method)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.variant.as_str(), r.method)) {
            keys.push((&r.variant, r.method));
        }
    }
    keys.into_iter()
        .map(|(variant, method)| {
            let group: Vec<&RepetitionRecord> = records
                .iter()
                .filter(|r| r.variant == variant && r.method == method)
                .collect();
            let ok = || group.iter().filter(|r| r.status == Status::Ok);
            let train: Vec<f64> = ok().filter_map(|r| r.train_accuracy).collect();
            let test: Vec<f64> = ok().filter_map(|r| r.test_accuracy).collect();
            let (train_mean, train_std) = split(mean_std(&train));
            let (test_mean, test_std) = split(mean_std(&test));
            Aggregate {
                variant: variant.to_string(),
                method,
                runs: group.len(),
                failures: group.iter().filter(|r| r.status == Status::Failed).count(),
                train_mean,
                train_std,
                test_mean,
                test_std,
            }
        })
        .collect()
}

fn split(v: Option<(f64, f64)>) -> (Option<f64>, Option<f64>) {
    match v {
        Some((m, s)) => (Some(m), Some(s)),
        None => (None, None),
    }
}
