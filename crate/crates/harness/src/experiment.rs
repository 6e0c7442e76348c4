//! Replicates, aggregation and the coverage/normality studies.

use layered_hill::{
    alpha_hat, confidence_interval, layered_hill, missing_count, normalized_statistic,
    remove_top_extremes, sample_cloud, select_regime, top_tuple_values, ConfidenceInterval,
    Constraint64, Error as CoreError, GeometricConstants64, Regime, SeededRng,
};
use log::warn;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, MIX_NAME};
use crate::error::{CellError, HarnessError, Result};

/// One estimator on one censored view of one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct CellEstimate {
    pub h: f64,
    pub alpha_hat: f64,
    /// `U_k(m^k)`.
    pub denominator: f64,
    pub ci: Option<ConfidenceInterval<f64>>,
    /// Regime picked from `beta` and this replicate's `alpha_hat`.
    pub regime: Regime<f64>,
    /// Statistic centered at the true alpha, normalized with `alpha_hat`.
    pub statistic: f64,
    /// True when the picked regime had no computable normalization and the
    /// vanishing one was used instead.
    pub fell_back: bool,
}

#[derive(Debug)]
pub struct ReplicateResult {
    pub stream_id: u64,
    pub cloud_size: usize,
    /// Indexed `[estimator][delta]`; `Err` only for missing extremes.
    pub cells: Vec<Vec<Result<CellEstimate, CellError>>>,
}

/// Everything derived once from a config and shared by all replicates.
#[derive(Debug, Clone)]
pub struct Plan {
    pub config: ExperimentConfig,
    pub names: Vec<String>,
    pub constraints: Vec<Constraint64>,
    pub constants: Vec<GeometricConstants64>,
    pub m: usize,
    pub beta: f64,
    pub true_alpha: f64,
}

impl Plan {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let n = config.estimators.len();
        Ok(Self {
            names: (0..n).map(|i| config.estimator_name(i)).collect(),
            constraints: (0..n).map(|i| config.constraint(i)).collect::<Result<_>>()?,
            constants: (0..n).map(|i| config.constants(i)).collect::<Result<_>>()?,
            m: config.m(),
            beta: config.effective_beta(),
            true_alpha: config.true_alpha()?,
            config: config.clone(),
        })
    }

    /// Samples one cloud and evaluates every estimator on every censored view.
    /// Views are nested: each δ removes its top points from the same cloud.
    pub fn run_replicate(&self, stream_id: u64) -> Result<ReplicateResult> {
        let cfg = &self.config;
        let model = cfg.radial_model()?;
        let cloud = sample_cloud(&model, cfg.n, &SeededRng::new(cfg.master_seed, stream_id), cfg.model.poissonize)?;
        let d = model.dim();
        let mut cells: Vec<Vec<_>> = (0..self.names.len()).map(|_| Vec::with_capacity(cfg.deltas.len())).collect();
        for &delta in &cfg.deltas {
            let remove = missing_count(delta, self.m)?;
            let view = remove_top_extremes(&cloud, remove.min(cloud.len()))?;
            for (e, cell_row) in cells.iter_mut().enumerate() {
                let tag = |source| CellError {
                    estimator: self.names[e].clone(),
                    delta,
                    stream_id,
                    source,
                };
                match self.evaluate(&view, e, d) {
                    Ok(est) => cell_row.push(Ok(est)),
                    Err(
                        source @ (CoreError::InsufficientExtremes { .. } | CoreError::ArityExceedsCloud { .. }),
                    ) => cell_row.push(Err(tag(source))),
                    Err(source) => return Err(tag(source).into()),
                }
            }
        }
        Ok(ReplicateResult {
            stream_id,
            cloud_size: cloud.len(),
            cells,
        })
    }

    fn evaluate(&self, view: &layered_hill::PointCloud64, e: usize, d: usize) -> layered_hill::Result<CellEstimate> {
        let c = &self.constraints[e];
        let gc = &self.constants[e];
        let k = c.arity();
        let budget = layered_hill::estimator::tuple_budget(self.m, k)?;
        let stream = top_tuple_values(view, c, budget)?;
        let h = layered_hill(&stream, self.m)?;
        let a_hat = alpha_hat(h, k, d)?;
        let ci = match confidence_interval(h, k, d, self.m, self.config.gamma, gc) {
            Ok(ci) => Some(ci),
            Err(CoreError::DegenerateInterval) => None,
            Err(err) => return Err(err),
        };
        let regime = match select_regime(self.beta, k, d, a_hat, self.config.regime_tol) {
            Regime::Constant { .. } => Regime::Constant { xi: self.config.xi },
            r => r,
        };
        let (statistic, fell_back) =
            match normalized_statistic(h, k, d, self.m, self.true_alpha, a_hat, &regime, gc) {
                Ok(s) => (s, false),
                Err(CoreError::UnsupportedRegime { .. } | CoreError::MissingXi) => (
                    normalized_statistic(h, k, d, self.m, self.true_alpha, a_hat, &Regime::Vanishing, gc)?,
                    true,
                ),
                Err(err) => return Err(err),
            };
        Ok(CellEstimate {
            h,
            alpha_hat: a_hat,
            denominator: stream.values()[budget - 1],
            ci,
            regime,
            statistic,
            fell_back,
        })
    }

    /// All replicates in stream order. The schedule never affects results:
    /// each replicate depends only on `(master_seed, stream_id)`.
    pub fn run_all(&self, workers: Option<usize>) -> Result<Vec<ReplicateResult>> {
        let reps = self.config.replications as u64;
        let go = || (0..reps).into_par_iter().map(|s| self.run_replicate(s)).collect::<Result<Vec<_>>>();
        match workers {
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| HarnessError::Pool(e.to_string()))?
                .install(go),
            None => go(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub estimator: String,
    /// `None` for the Mix row.
    pub k: Option<usize>,
    pub delta: f64,
    pub mean_alpha: f64,
    pub rmse: f64,
    /// Fraction of included replicates whose interval holds the true alpha.
    pub coverage: Option<f64>,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub true_alpha: f64,
    pub m: usize,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn row(&self, estimator: &str, delta: f64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.delta == delta)
    }
}

fn summarize(values: &[f64], truth: f64) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mse = values.iter().map(|a| (a - truth) * (a - truth)).sum::<f64>() / n;
    (mean, mse.sqrt())
}

/// Aggregates replicates in the given order.
pub fn aggregate(plan: &Plan, reps: &[ReplicateResult]) -> ExperimentReport {
    let cfg = &plan.config;
    let truth = plan.true_alpha;
    let mut rows = Vec::new();
    for (e, name) in plan.names.iter().enumerate() {
        for (j, &delta) in cfg.deltas.iter().enumerate() {
            let ok: Vec<&CellEstimate> = reps.iter().filter_map(|r| r.cells[e][j].as_ref().ok()).collect();
            let alphas: Vec<f64> = ok.iter().map(|c| c.alpha_hat).collect();
            let (mean_alpha, rmse) = summarize(&alphas, truth);
            let covered = ok.iter().filter(|c| c.ci.is_some_and(|ci| ci.contains(truth))).count();
            rows.push(ReportRow {
                estimator: name.clone(),
                k: Some(plan.constraints[e].arity()),
                delta,
                mean_alpha,
                rmse,
                coverage: (!ok.is_empty()).then(|| covered as f64 / ok.len() as f64),
                excluded: reps.len() - ok.len(),
            });
        }
    }
    if let Some([w1, w2]) = cfg.mix_weights {
        for (j, &delta) in cfg.deltas.iter().enumerate() {
            let mixed: Vec<f64> = reps
                .iter()
                .filter_map(|r| match (&r.cells[0][j], &r.cells[1][j]) {
                    (Ok(a), Ok(b)) => Some(w1 * a.alpha_hat + w2 * b.alpha_hat),
                    _ => None,
                })
                .collect();
            let (mean_alpha, rmse) = summarize(&mixed, truth);
            rows.push(ReportRow {
                estimator: MIX_NAME.to_string(),
                k: None,
                delta,
                mean_alpha,
                rmse,
                coverage: None,
                excluded: reps.len() - mixed.len(),
            });
        }
    }
    ExperimentReport {
        true_alpha: truth,
        m: plan.m,
        rows,
    }
}

fn log_exclusions(report: &ExperimentReport) {
    for row in report.rows.iter().filter(|r| r.excluded > 0) {
        warn!(
            "{} at delta {}: {} replicate(s) excluded for missing extremes",
            row.estimator, row.delta, row.excluded
        );
    }
}

pub fn run_experiment(config: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentReport> {
    let plan = Plan::new(config)?;
    let reps = plan.run_all(workers)?;
    let report = aggregate(&plan, &reps);
    log_exclusions(&report);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub estimator: String,
    pub k: usize,
    pub delta: f64,
    pub coverage: f64,
}

/// Coverage of the level-gamma interval, which assumes the vanishing regime.
/// Other regimes are reported with a warning and the study proceeds.
pub fn coverage_experiment(config: &ExperimentConfig, workers: Option<usize>) -> Result<Vec<CoverageRow>> {
    let plan = Plan::new(config)?;
    let reps = plan.run_all(workers)?;
    let report = aggregate(&plan, &reps);
    log_exclusions(&report);
    let d = config.model.d;
    for (e, name) in plan.names.iter().enumerate() {
        let k = plan.constraints[e].arity();
        let alphas: Vec<f64> = reps.iter().filter_map(|r| r.cells[e][0].as_ref().ok()).map(|c| c.alpha_hat).collect();
        if alphas.is_empty() {
            continue;
        }
        let mean = alphas.iter().sum::<f64>() / alphas.len() as f64;
        let regime = select_regime(plan.beta, k, d, mean, config.regime_tol);
        if regime != Regime::Vanishing {
            warn!(
                "{name}: beta = {} puts the estimator in the {} regime; intervals assume the vanishing one",
                plan.beta,
                regime.name()
            );
        }
    }
    Ok(report
        .rows
        .into_iter()
        .filter_map(|r| {
            Some(CoverageRow {
                coverage: r.coverage.unwrap_or(f64::NAN),
                k: r.k?,
                estimator: r.estimator,
                delta: r.delta,
            })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatisticSample {
    pub estimator: String,
    pub k: usize,
    pub delta: f64,
    pub stream_id: u64,
    pub statistic: f64,
}

/// Normalized statistics of every included cell, ordered by estimator,
/// delta, then stream.
pub fn normalized_samples(config: &ExperimentConfig, workers: Option<usize>) -> Result<Vec<StatisticSample>> {
    let plan = Plan::new(config)?;
    let reps = plan.run_all(workers)?;
    Ok(collect_samples(&plan, &reps))
}

pub fn collect_samples(plan: &Plan, reps: &[ReplicateResult]) -> Vec<StatisticSample> {
    let mut out = Vec::new();
    for (e, name) in plan.names.iter().enumerate() {
        let k = plan.constraints[e].arity();
        for (j, &delta) in plan.config.deltas.iter().enumerate() {
            let mut warned = false;
            for r in reps {
                if let Ok(c) = &r.cells[e][j] {
                    if c.fell_back && !warned {
                        warn!(
                            "{name} at delta {delta}: {} regime has no sample normalization, using the vanishing one",
                            c.regime.name()
                        );
                        warned = true;
                    }
                    out.push(StatisticSample {
                        estimator: name.clone(),
                        k,
                        delta,
                        stream_id: r.stream_id,
                        statistic: c.statistic,
                    });
                }
            }
        }
    }
    out
}
