use std::time::Instant;

use rayon::prelude::*;

use super::report::{
    AccuracyReport, BaselineDiagnostics, Method, PhaseTimings, RepetitionRecord, Status,
};
use super::spec::{derive_seed, stream, ExperimentSpec};
use crate::baseline::{train_classical, BaselineFit, BaselineParams};
use crate::dataset::{split_stratified, Dataset, Normalizer, SplitSpec};
use crate::error::{Error, Result};
use crate::qubo::{build_qubo, decode_multipliers, QuboProblem};
use crate::solver::{
    solve_exhaustive, solve_sa, BinarySolution, SaParams, EXHAUSTIVE_MAX_VARIABLES,
};
use crate::svm::{accuracy, recover_model};

/// Relative slack allowed when checking that the dual objective never drops.
const ASCENT_SLACK: f64 = 1e-12;

#[derive(Clone, Copy)]
struct Methods {
    baseline: bool,
    exhaustive: bool,
}

/// Trains and scores every method on `spec.repetitions` independent splits.
///
/// Each repetition derives its own data, split and solver seeds from
/// `(spec.seed, repetition)`, so results do not depend on how repetitions
/// are scheduled across threads.
pub fn run_accuracy_experiment(spec: &ExperimentSpec) -> Result<AccuracyReport> {
    spec.validate()?;
    let records = run_variant(
        spec,
        &spec.name,
        Methods {
            baseline: true,
            exhaustive: spec.exhaustive,
        },
    )?;
    Ok(AccuracyReport::from_records(&spec.name, spec.seed, records))
}

/// Repeats the annealing part of the accuracy experiment once per sweep
/// budget. Every budget sees the same splits. Variants are named
/// `sweeps=<budget>`.
pub fn run_sweep_sensitivity(
    spec: &ExperimentSpec,
    sweep_grid: &[usize],
) -> Result<AccuracyReport> {
    if sweep_grid.is_empty() {
        return Err(Error::invalid("sweep grid is empty"));
    }
    spec.validate()?;
    let mut records = Vec::new();
    for &sweeps in sweep_grid {
        let mut variant = spec.clone();
        variant.sa.sweeps_per_read = sweeps;
        variant.sa.validate()?;
        records.extend(run_variant(
            &variant,
            &sweep_variant_name(sweeps),
            Methods {
                baseline: false,
                exhaustive: false,
            },
        )?);
    }
    Ok(AccuracyReport::from_records(&spec.name, spec.seed, records))
}

pub fn sweep_variant_name(sweeps: usize) -> String {
    format!("sweeps={sweeps}")
}

fn run_variant(
    spec: &ExperimentSpec,
    variant: &str,
    methods: Methods,
) -> Result<Vec<RepetitionRecord>> {
    let shared = if spec.dataset.is_synthetic() {
        None
    } else {
        Some(spec.dataset.load(spec.seed)?)
    };
    let per_rep: Vec<Vec<RepetitionRecord>> = (0..spec.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(spec, variant, rep, shared.as_ref(), methods))
        .collect::<Result<_>>()?;
    Ok(per_rep.into_iter().flatten().collect())
}

fn run_repetition(
    spec: &ExperimentSpec,
    variant: &str,
    rep: usize,
    shared: Option<&Dataset>,
    methods: Methods,
) -> Result<Vec<RepetitionRecord>> {
    let r = rep as u64;
    let generated;
    let data = match shared {
        Some(d) => d,
        None => {
            generated = spec.dataset.load(derive_seed(spec.seed, stream::DATA, r))?;
            &generated
        }
    };
    let split = SplitSpec {
        n_train: spec.n_train,
        seed: derive_seed(spec.seed, stream::SPLIT, r),
        per_class_balance: true,
    };
    let (train, test) = split_stratified(data, &split)?;
    let normalizer = Normalizer::fit(&train, spec.normalization);
    let train = normalizer.transform(&train);
    let test = test.map(|t| normalizer.transform(&t));
    let ctx = Context {
        variant,
        rep,
        train: &train,
        test: test.as_ref(),
        record_timings: spec.record_timings,
    };

    let mut records = Vec::new();
    if methods.baseline {
        let params = BaselineParams {
            seed: derive_seed(spec.seed ^ spec.baseline.seed, stream::BASELINE, r),
            ..spec.baseline.clone()
        };
        let started = Instant::now();
        let fit = train_classical(&train, &params)?;
        let elapsed = started.elapsed().as_secs_f64();
        let mut record = ctx.scored(Method::Baseline, &fit.model)?;
        record.diagnostics = Some(diagnostics(&fit, &train, params.c));
        if ctx.record_timings {
            record.timings = Some(PhaseTimings {
                train: Some(elapsed),
                ..PhaseTimings::default()
            });
        }
        records.push(record);
    }

    let started = Instant::now();
    let problem = build_qubo(&train, &spec.precision, spec.equality_penalty)?;
    let preprocess = started.elapsed().as_secs_f64();

    let sa = SaParams {
        seed: derive_seed(spec.seed ^ spec.sa.seed, stream::ANNEAL, r),
        ..spec.sa.clone()
    };
    let started = Instant::now();
    let sample = solve_sa(&problem, &sa)?;
    let elapsed = started.elapsed().as_secs_f64();
    records.push(ctx.record_sample(
        Method::Annealing,
        spec,
        &problem,
        &sample,
        preprocess,
        elapsed,
    )?);

    if methods.exhaustive && problem.num_variables() <= EXHAUSTIVE_MAX_VARIABLES {
        let started = Instant::now();
        let exact = solve_exhaustive(&problem)?;
        let elapsed = started.elapsed().as_secs_f64();
        records.push(ctx.record_sample(
            Method::Exhaustive,
            spec,
            &problem,
            &exact,
            preprocess,
            elapsed,
        )?);
    }
    Ok(records)
}

struct Context<'a> {
    variant: &'a str,
    rep: usize,
    train: &'a Dataset,
    test: Option<&'a Dataset>,
    record_timings: bool,
}

impl Context<'_> {
    fn scored(&self, method: Method, model: &crate::svm::SvmModel) -> Result<RepetitionRecord> {
        Ok(RepetitionRecord {
            variant: self.variant.to_string(),
            repetition: self.rep,
            method,
            status: Status::Ok,
            failure: None,
            train_accuracy: Some(accuracy(model, self.train)?),
            test_accuracy: self.test.map(|t| accuracy(model, t)).transpose()?,
            support_vectors: Some(model.support_indices.len()),
            energy: None,
            timings: None,
            diagnostics: None,
        })
    }

    fn record_sample(
        &self,
        method: Method,
        spec: &ExperimentSpec,
        problem: &QuboProblem,
        sample: &BinarySolution,
        preprocess: f64,
        elapsed: f64,
    ) -> Result<RepetitionRecord> {
        let lambdas = decode_multipliers(&sample.bits, &spec.precision, problem.n_points())?;
        let mut record = match recover_model(self.train, &lambdas) {
            Ok(model) => self.scored(method, &model)?,
            Err(e @ Error::NoSupportVectors { .. }) => RepetitionRecord {
                variant: self.variant.to_string(),
                repetition: self.rep,
                method,
                status: Status::Failed,
                failure: Some(e.to_string()),
                train_accuracy: None,
                test_accuracy: None,
                support_vectors: Some(0),
                energy: None,
                timings: None,
                diagnostics: None,
            },
            Err(e) => return Err(e),
        };
        record.energy = Some(sample.energy);
        if self.record_timings {
            record.timings = Some(PhaseTimings {
                preprocess: Some(preprocess),
                sample: Some(elapsed),
                train: None,
            });
        }
        Ok(record)
    }
}

fn diagnostics(fit: &BaselineFit, train: &Dataset, c: f64) -> BaselineDiagnostics {
    BaselineDiagnostics {
        converged: fit.converged,
        iterations: fit.iterations,
        equality_residual: fit.equality_residual(train),
        within_box: fit.model.lambdas.iter().all(|&l| (0.0..=c).contains(&l)),
        monotone_ascent: fit
            .objective_trace
            .windows(2)
            .all(|w| w[1] >= w[0] - ASCENT_SLACK * (1.0 + w[0].abs())),
    }
}
