//! Wall-clock scaling of the three training phases against feature count
//! and point count.

use std::io::Write;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::report::Status;
use super::spec::{derive_seed, stream, DatasetSource, ExperimentSpec};
use super::stats::{loglog_slope, median};
use crate::baseline::train_classical;
use crate::dataset::{generate_blobs, normalize};
use crate::error::{Error, Result};
use crate::qubo::build_qubo;
use crate::solver::solve_sa;

/// Largest feature count accepted without [`ScalingOptions::allow_large`].
pub const MAX_DESK_FEATURES: usize = 1 << 14;
/// Largest point count accepted without [`ScalingOptions::allow_large`].
pub const MAX_DESK_POINTS: usize = 54;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingAxis {
    Features,
    Points,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Classical training, Gram matrix included.
    Baseline,
    /// QUBO construction.
    QuboBuild,
    /// Simulated annealing on the built QUBO.
    Sample,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Baseline, Phase::QuboBuild, Phase::Sample];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Baseline => "baseline",
            Phase::QuboBuild => "qubo_build",
            Phase::Sample => "sample",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScalingOptions {
    /// Lift the desk-scale caps on grid values.
    pub allow_large: bool,
    /// Cells whose estimated working set exceeds this are recorded as
    /// failed instead of run.
    pub memory_budget_bytes: u64,
    /// Timing samples per cell; the cell reports their median.
    pub samples: usize,
    /// Each sample repeats the phase until at least this much time has
    /// passed and reports the per-call average.
    pub min_sample_time: Duration,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        Self {
            allow_large: false,
            memory_budget_bytes: 4 << 30,
            samples: 3,
            min_sample_time: Duration::from_millis(20),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCell {
    /// Grid value: feature count or point count, depending on the axis.
    pub size: usize,
    pub phase: Phase,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    /// Calls per timing sample.
    pub loops: usize,
    /// Seconds per call, one entry per sample.
    pub samples: Vec<f64>,
    pub median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub name: String,
    pub axis: ScalingAxis,
    /// The dimension held constant: point count for a feature sweep,
    /// feature count for a point sweep.
    pub fixed: usize,
    pub cells: Vec<ScalingCell>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    axis: ScalingAxis,
    fixed: usize,
    size: usize,
    phase: &'static str,
    status: Status,
    failure: Option<&'a str>,
    loops: usize,
    median_s: Option<f64>,
    samples_s: String,
}

impl ScalingReport {
    /// `(size, median seconds)` of the successful cells of one phase.
    pub fn medians(&self, phase: Phase) -> Vec<(f64, f64)> {
        self.cells
            .iter()
            .filter(|c| c.phase == phase)
            .filter_map(|c| c.median.map(|m| (c.size as f64, m)))
            .collect()
    }

    /// Log-log slope of median time against size over `lo..=hi`.
    pub fn slope(&self, phase: Phase, lo: usize, hi: usize) -> Option<f64> {
        let lo = lo as f64;
        let hi = hi as f64;
        let points: Vec<(f64, f64)> = self
            .medians(phase)
            .into_iter()
            .filter(|(s, _)| (lo..=hi).contains(s))
            .collect();
        loglog_slope(&points)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for c in &self.cells {
            let samples = c
                .samples
                .iter()
                .map(|s| format!("{s:e}"))
                .collect::<Vec<_>>()
                .join(";");
            w.serialize(CsvRow {
                axis: self.axis,
                fixed: self.fixed,
                size: c.size,
                phase: c.phase.as_str(),
                status: c.status,
                failure: c.failure.as_deref(),
                loops: c.loops,
                median_s: c.median,
                samples_s: samples,
            })?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// Times the three phases on blobs with `spec.n_train` points and each
/// feature count in `feature_grid`. The spec's dataset must be a blob
/// source; only its center distance is used.
pub fn run_feature_scaling(
    spec: &ExperimentSpec,
    feature_grid: &[usize],
    options: &ScalingOptions,
) -> Result<ScalingReport> {
    check_grid(feature_grid, "feature")?;
    let n = spec.n_train;
    if !options.allow_large {
        if let Some(&d) = feature_grid.iter().find(|&&d| d > MAX_DESK_FEATURES) {
            return Err(Error::invalid(format!(
                "feature count {d} exceeds the desk-scale cap of {MAX_DESK_FEATURES}; enable large runs to go beyond it"
            )));
        }
    }
    let cells = run_grid(spec, options, feature_grid, |d| (n, d))?;
    Ok(ScalingReport {
        name: spec.name.clone(),
        axis: ScalingAxis::Features,
        fixed: n,
        cells,
    })
}

/// Times the three phases on blobs with the spec's feature count and each
/// point count in `point_grid`. Point counts must be even.
pub fn run_point_scaling(
    spec: &ExperimentSpec,
    point_grid: &[usize],
    options: &ScalingOptions,
) -> Result<ScalingReport> {
    check_grid(point_grid, "point")?;
    if let Some(&n) = point_grid.iter().find(|&&n| n < 2 || !n.is_multiple_of(2)) {
        return Err(Error::invalid(format!(
            "point counts must be even and >= 2, got {n}"
        )));
    }
    if !options.allow_large {
        if let Some(&n) = point_grid.iter().find(|&&n| n > MAX_DESK_POINTS) {
            return Err(Error::invalid(format!(
                "point count {n} exceeds the desk-scale cap of {MAX_DESK_POINTS}; enable large runs to go beyond it"
            )));
        }
    }
    let d = match &spec.dataset {
        DatasetSource::Blobs { n_features, .. } => *n_features,
        _ => return Err(Error::invalid("scaling runs need a blobs dataset source")),
    };
    let cells = run_grid(spec, options, point_grid, |n| (n, d))?;
    Ok(ScalingReport {
        name: spec.name.clone(),
        axis: ScalingAxis::Points,
        fixed: d,
        cells,
    })
}

fn check_grid(grid: &[usize], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(format!("{what} grid is empty")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!(
            "{what} grid must be strictly ascending"
        )));
    }
    if grid.contains(&0) {
        return Err(Error::invalid(format!(
            "{what} grid values must be positive"
        )));
    }
    Ok(())
}

/// Bytes held at once while timing a cell: two copies of the data, the Gram
/// matrix and the dense QUBO.
pub(crate) fn estimated_bytes(n: usize, d: usize, k: usize) -> u64 {
    let (n, d, k) = (n as u64, d as u64, k as u64);
    let m = n * k;
    8 * (2 * n * d + n * n + m * m + m)
}

fn run_grid(
    spec: &ExperimentSpec,
    options: &ScalingOptions,
    grid: &[usize],
    shape: impl Fn(usize) -> (usize, usize),
) -> Result<Vec<ScalingCell>> {
    let center_distance = match &spec.dataset {
        DatasetSource::Blobs {
            center_distance, ..
        } => *center_distance,
        _ => return Err(Error::invalid("scaling runs need a blobs dataset source")),
    };
    if options.samples == 0 {
        return Err(Error::invalid("need at least one timing sample per cell"));
    }
    spec.sa.validate()?;
    spec.baseline.validate()?;

    let mut cells = Vec::with_capacity(grid.len() * Phase::ALL.len());
    // Cells run one after another so timings do not compete for cores.
    for &size in grid {
        let (n, d) = shape(size);
        let needed = estimated_bytes(n, d, spec.precision.len());
        if needed > options.memory_budget_bytes {
            let msg = format!(
                "estimated {} MiB exceeds the memory budget of {} MiB",
                needed >> 20,
                options.memory_budget_bytes >> 20
            );
            cells.extend(Phase::ALL.map(|phase| failed(size, phase, msg.clone())));
            continue;
        }
        let data = match generate_blobs(
            n,
            d,
            derive_seed(spec.seed, stream::DATA, size as u64),
            center_distance,
        ) {
            Ok(data) => normalize(&data, spec.normalization),
            Err(e) => {
                cells.extend(Phase::ALL.map(|phase| failed(size, phase, e.to_string())));
                continue;
            }
        };

        cells.push(timed_cell(size, Phase::Baseline, options, || {
            train_classical(&data, &spec.baseline).map(drop)
        }));
        cells.push(timed_cell(size, Phase::QuboBuild, options, || {
            build_qubo(&data, &spec.precision, spec.equality_penalty).map(drop)
        }));
        match build_qubo(&data, &spec.precision, spec.equality_penalty) {
            Ok(problem) => cells.push(timed_cell(size, Phase::Sample, options, || {
                solve_sa(&problem, &spec.sa).map(drop)
            })),
            Err(e) => cells.push(failed(size, Phase::Sample, e.to_string())),
        }
    }
    Ok(cells)
}

fn failed(size: usize, phase: Phase, message: String) -> ScalingCell {
    ScalingCell {
        size,
        phase,
        status: Status::Failed,
        failure: Some(message),
        loops: 0,
        samples: Vec::new(),
        median: None,
    }
}

fn timed_cell(
    size: usize,
    phase: Phase,
    options: &ScalingOptions,
    mut f: impl FnMut() -> Result<()>,
) -> ScalingCell {
    match measure(options, &mut f) {
        Ok((loops, samples)) => ScalingCell {
            size,
            phase,
            status: Status::Ok,
            failure: None,
            loops,
            median: median(&samples),
            samples,
        },
        Err(e) => failed(size, phase, e.to_string()),
    }
}

/// Picks a loop count from one warm-up call, then takes
/// `options.samples` per-call averages.
fn measure(
    options: &ScalingOptions,
    f: &mut impl FnMut() -> Result<()>,
) -> Result<(usize, Vec<f64>)> {
    let started = Instant::now();
    f()?;
    let once = started.elapsed().max(Duration::from_nanos(100));
    let loops = (options.min_sample_time.as_secs_f64() / once.as_secs_f64())
        .ceil()
        .clamp(1.0, 1e6) as usize;
    let mut samples = Vec::with_capacity(options.samples);
    for _ in 0..options.samples {
        let started = Instant::now();
        for _ in 0..loops {
            f()?;
        }
        samples.push(started.elapsed().as_secs_f64() / loops as f64);
    }
    Ok((loops, samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(
            "scale",
            DatasetSource::Blobs {
                n_points: 8,
                n_features: 4,
                center_distance: 6.0,
            },
            8,
        );
        spec.sa.num_reads = 2;
        spec.sa.sweeps_per_read = 10;
        spec
    }

    fn quick() -> ScalingOptions {
        ScalingOptions {
            min_sample_time: Duration::ZERO,
            ..ScalingOptions::default()
        }
    }

    #[test]
    fn one_cell_per_size_and_phase() {
        let report = run_point_scaling(&spec(), &[4, 6, 8], &quick()).unwrap();
        assert_eq!(report.cells.len(), 9);
        assert_eq!(report.fixed, 4);
        for c in &report.cells {
            assert_eq!(c.status, Status::Ok);
            assert_eq!(c.samples.len(), 3);
            assert!(c.median.unwrap() > 0.0);
        }
        assert_eq!(report.medians(Phase::Sample).len(), 3);

        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 10);
    }

    #[test]
    fn over_budget_cells_fail_without_stopping_the_run() {
        let options = ScalingOptions {
            memory_budget_bytes: estimated_bytes(8, 4, 4),
            ..quick()
        };
        let report = run_feature_scaling(&spec(), &[4, 64], &options).unwrap();
        assert_eq!(report.cells.len(), 6);
        assert!(report.cells[..3].iter().all(|c| c.status == Status::Ok));
        assert!(report.cells[3..]
            .iter()
            .all(|c| c.status == Status::Failed && c.median.is_none()));
        assert!(report.cells[3]
            .failure
            .as_ref()
            .unwrap()
            .contains("memory budget"));
    }

    #[test]
    fn grid_validation() {
        let o = quick();
        assert!(run_point_scaling(&spec(), &[], &o).is_err());
        assert!(run_point_scaling(&spec(), &[6, 4], &o).is_err());
        assert!(run_point_scaling(&spec(), &[5], &o).is_err());
        assert!(run_point_scaling(&spec(), &[56], &o).is_err());
        assert!(run_feature_scaling(&spec(), &[1 << 15], &o).is_err());
        let large = ScalingOptions {
            allow_large: true,
            memory_budget_bytes: 0,
            ..quick()
        };
        // Allowed, but every cell is over the (zero) budget.
        let report = run_feature_scaling(&spec(), &[1 << 15], &large).unwrap();
        assert!(report.cells.iter().all(|c| c.status == Status::Failed));

        let mut csv_spec = spec();
        csv_spec.dataset = DatasetSource::Hyperplane {
            n_points: 8,
            normal: vec![1.0],
            offset: 0.0,
        };
        assert!(run_feature_scaling(&csv_spec, &[2], &o).is_err());
    }

    #[test]
    fn slope_uses_only_the_requested_range() {
        let cell = |size: usize, t: f64| ScalingCell {
            size,
            phase: Phase::QuboBuild,
            status: Status::Ok,
            failure: None,
            loops: 1,
            samples: vec![t],
            median: Some(t),
        };
        let report = ScalingReport {
            name: "s".into(),
            axis: ScalingAxis::Points,
            fixed: 1,
            cells: vec![
                cell(2, 100.0),
                cell(4, 16.0),
                cell(8, 64.0),
                cell(16, 256.0),
            ],
        };
        assert!((report.slope(Phase::QuboBuild, 4, 16).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(report.slope(Phase::Sample, 4, 16), None);
    }
}
