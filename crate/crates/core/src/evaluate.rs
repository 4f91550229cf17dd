//! Runs every forecaster on a corpus and assembles the evaluation report.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{ar_run, naive_run, ArModel, DEFAULT_LAG_LEVEL};
use crate::data::CountSeries;
use crate::dm::{
    best_model_per_series, dm_statistic, Decision, DecisionSource, DmMatrix, DmResult, VarianceDivisor,
    DEFAULT_SIGNIFICANCE,
};
use crate::error::{Error, Result};
use crate::forecaster::{run_series, ForecastRecord, ForecasterConfig, Phase, DEFAULT_TRAIN_FRACTION};
use crate::metrics::{MetricReport, PocidDivisor};

pub const PROPOSED: &str = "Proposed";
/// The boosted forecaster's base rate alone, for ablation.
pub const BASE_ONLY: &str = "BaseOnly";
pub const NAIVE: &str = "Naive";
pub const LINEAR_AR: &str = "LinearAR";

/// Models that compete in the per-series decision.
pub const CONTESTANTS: [&str; 3] = [PROPOSED, NAIVE, LINEAR_AR];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvaluationOptions {
    pub train_fraction: f64,
    pub forecaster: ForecasterConfig,
    pub pocid_divisor: PocidDivisor,
    pub dm_variance: VarianceDivisor,
    pub significance: f64,
    pub lag_level: f64,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        Self {
            train_fraction: DEFAULT_TRAIN_FRACTION,
            forecaster: ForecasterConfig::default(),
            pocid_divisor: PocidDivisor::default(),
            dm_variance: VarianceDivisor::default(),
            significance: DEFAULT_SIGNIFICANCE,
            lag_level: DEFAULT_LAG_LEVEL,
        }
    }
}

impl EvaluationOptions {
    pub fn validate(&self) -> Result<()> {
        self.forecaster.validate()?;
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        for (name, v) in [("significance", self.significance), ("lag level", self.lag_level)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelResult {
    pub metrics: MetricReport,
    pub records: Vec<ForecastRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub a: String,
    pub b: String,
    #[serde(flatten)]
    pub result: DmResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesEvaluation {
    pub series_id: String,
    pub length: usize,
    pub train_len: usize,
    pub test_len: usize,
    pub ar_model: ArModel,
    pub models: BTreeMap<String, ModelResult>,
    pub dm: Vec<PairComparison>,
    pub decision: Decision,
}

/// One row per series: outcome and the signed DM statistic with the
/// proposed model as m_a.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionRow {
    pub series: String,
    pub verdict: String,
    pub dm_statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub comparator: String,
    pub winner: Option<String>,
    pub source: DecisionSource,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub inputs: Vec<String>,
    pub options: EvaluationOptions,
    pub proposed_model: String,
    pub models: Vec<String>,
    pub contestants: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub metadata: RunMetadata,
    pub decisions: Vec<DecisionRow>,
    pub series: Vec<SeriesEvaluation>,
}

fn test_forecasts(records: &[ForecastRecord]) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.phase == Phase::Test)
        .map(|r| r.x_hat)
        .collect()
}

/// Evaluates every model on one series over the same test window.
pub fn evaluate_series(series: &CountSeries, opts: &EvaluationOptions) -> Result<SeriesEvaluation> {
    opts.validate()?;
    let run = run_series(series, opts.train_fraction, &opts.forecaster)?;
    let train = run.train_len;
    let test_len = series.len() - train;
    if test_len < 2 {
        return Err(Error::Config(format!(
            "series {:?}: test window of {test_len} point(s) is too short to compare forecasts",
            series.id()
        )));
    }

    let base_only: Vec<ForecastRecord> = run
        .test_records()
        .map(|r| ForecastRecord::point(r.time_index, Phase::Test, r.lambda_hat, r.observed.unwrap_or(0)))
        .collect();
    let values = series.values();
    let ar_model = ArModel::from_training(&values[..train], opts.lag_level)?;
    let runs: [(&str, Vec<ForecastRecord>); 4] = [
        (PROPOSED, run.records),
        (BASE_ONLY, base_only),
        (NAIVE, naive_run(series, opts.train_fraction)?),
        (LINEAR_AR, ar_run(series, opts.train_fraction, &ar_model)?),
    ];

    let actual = &values[train - 1..];
    let target = &values[train..];
    let mut models = BTreeMap::new();
    let mut errors: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (name, records) in runs {
        let predicted = test_forecasts(&records);
        let metrics = MetricReport::compute(actual, &predicted, opts.pocid_divisor)?;
        errors.insert(name, target.iter().zip(&predicted).map(|(x, p)| x - p).collect());
        models.insert(name.to_string(), ModelResult { metrics, records });
    }

    let mut matrix = DmMatrix::new();
    let mut dm = Vec::new();
    let names: Vec<&str> = errors.keys().copied().collect();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            let result = dm_statistic(&errors[a], &errors[b], opts.significance, opts.dm_variance)?;
            matrix.insert(a, b, result.clone());
            dm.push(PairComparison {
                a: a.to_string(),
                b: b.to_string(),
                result,
            });
        }
    }

    let contested: BTreeMap<String, MetricReport> = CONTESTANTS
        .iter()
        .map(|&m| (m.to_string(), models[m].metrics.clone()))
        .collect();
    let decision = best_model_per_series(&contested, &matrix, PROPOSED)?;

    Ok(SeriesEvaluation {
        series_id: series.id().to_string(),
        length: series.len(),
        train_len: train,
        test_len,
        ar_model,
        models,
        dm,
        decision,
    })
}

/// Evaluates all series in parallel; output is ordered by series id.
pub fn evaluate_corpus(
    series: &[CountSeries],
    inputs: Vec<String>,
    opts: &EvaluationOptions,
) -> Result<EvaluationReport> {
    opts.validate()?;
    if series.is_empty() {
        return Err(Error::Data("no series to evaluate".into()));
    }
    let mut evaluated = series
        .par_iter()
        .map(|s| evaluate_series(s, opts))
        .collect::<Result<Vec<_>>>()?;
    evaluated.sort_by(|a, b| a.series_id.cmp(&b.series_id));

    let decisions = evaluated
        .iter()
        .map(|e| DecisionRow {
            series: e.series_id.clone(),
            verdict: e.decision.label.clone(),
            dm_statistic: e.decision.dm_statistic,
            p_value: e.decision.p_value,
            comparator: e.decision.comparator.clone(),
            winner: e.decision.winner.clone(),
            source: e.decision.source,
        })
        .collect();

    Ok(EvaluationReport {
        metadata: RunMetadata {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs,
            options: *opts,
            proposed_model: PROPOSED.to_string(),
            models: [PROPOSED, BASE_ONLY, NAIVE, LINEAR_AR].map(String::from).to_vec(),
            contestants: CONTESTANTS.map(String::from).to_vec(),
        },
        decisions,
        series: evaluated,
    })
}

impl EvaluationReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = crate::json::to_string_pretty(self).map_err(|e| Error::Data(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Per-step forecasts of every model, one row per record.
    pub fn forecasts_csv(&self, corpus: &[CountSeries]) -> String {
        use crate::json::format_f64;
        let dates: BTreeMap<&str, &CountSeries> = corpus.iter().map(|s| (s.id(), s)).collect();
        let mut out = String::from("series_id,model,time_index,date,phase,observed,lambda_hat,mu_hat,x_hat,residual\n");
        for e in &self.series {
            let series = dates.get(e.series_id.as_str());
            for (model, result) in &e.models {
                for r in &result.records {
                    let date = series
                        .and_then(|s| s.timestamps().get(r.time_index - 1))
                        .map(|d| d.to_string())
                        .unwrap_or_default();
                    let phase = match r.phase {
                        Phase::Warmup => "warmup",
                        Phase::Test => "test",
                    };
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{}\n",
                        e.series_id,
                        model,
                        r.time_index,
                        date,
                        phase,
                        r.observed.map(|v| v.to_string()).unwrap_or_default(),
                        format_f64(r.lambda_hat),
                        format_f64(r.mu_hat),
                        format_f64(r.x_hat),
                        r.residual.map(format_f64).unwrap_or_default(),
                    ));
                }
            }
        }
        out
    }

    /// POCID per series and model, laid out for boxplots.
    pub fn pocid_csv(&self) -> String {
        let mut out = String::from("series_id,model,pocid\n");
        for e in &self.series {
            for (model, result) in &e.models {
                out.push_str(&format!(
                    "{},{},{}\n",
                    e.series_id,
                    model,
                    crate::json::format_f64(result.metrics.pocid)
                ));
            }
        }
        out
    }
}
