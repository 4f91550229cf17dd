//! Command-line front end: `evaluate`, `forecast` and `simulate`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::data::{parse_series_csv_with_min, write_series_csv, CountSeries, SeriesSummary, MIN_SERIES_LEN};
use crate::dm::VarianceDivisor;
use crate::error::Error;
use crate::evaluate::{evaluate_corpus, EvaluationOptions, EvaluationReport};
use crate::forecaster::{forecast_next, ForecasterConfig, DEFAULT_TRAIN_FRACTION};
use crate::metrics::PocidDivisor;
use crate::synthetic::{bundled_corpus, generate_synthetic, Changepoint, SyntheticSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "countboost",
    version,
    about = "Boosted Bayesian forecasting for weekly count series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score all models on each series and pick the best one per series.
    Evaluate(EvaluateArgs),
    /// Print the next-step forecast of every series as JSON lines.
    Forecast(ForecastArgs),
    /// Write a synthetic corpus and print its summary table.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DivisorArg {
    #[value(name = "n")]
    N,
    #[value(name = "n-1")]
    NMinusOne,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Pseudo-count of the residual mean prior.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Prior mean of the log1p residual.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub m: f64,
    /// Shape of the residual precision prior.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Rate of the residual precision prior.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
}

impl ModelArgs {
    fn config(&self, warmup: bool) -> ForecasterConfig {
        ForecasterConfig {
            kappa: self.kappa,
            m: self.m,
            delta: self.delta,
            eta: self.eta,
            warmup,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// CSV file, or a directory of CSV files.
    pub input: PathBuf,
    /// Directory for report.json, forecasts.csv and pocid.csv.
    #[arg(long, default_value = "report")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TRAIN_FRACTION)]
    pub train_fraction: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Skip the training-window replay and start forecasting cold.
    #[arg(long)]
    pub no_warmup: bool,
    #[arg(long, value_enum, default_value = "n")]
    pub pocid_divisor: DivisorArg,
    #[arg(long, value_enum, default_value = "n")]
    pub dm_variance: DivisorArg,
    #[arg(long, default_value_t = 0.05)]
    pub significance: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ForecastArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Output CSV path.
    #[arg(long, default_value = "data/synthetic/corpus.csv")]
    pub output: PathBuf,
    /// Write the bundled ten-series corpus instead of a single series.
    #[arg(long)]
    pub corpus: bool,
    #[arg(long, default_value = "SYN")]
    pub id: String,
    #[arg(long, default_value_t = 100)]
    pub length: usize,
    #[arg(long, default_value_t = 20.0)]
    pub base_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    pub drift: f64,
    /// Rate change as INDEX:RATE; repeatable.
    #[arg(long = "changepoint", value_parser = parse_changepoint)]
    pub changepoints: Vec<Changepoint>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_changepoint(s: &str) -> Result<Changepoint, String> {
    let (index, rate) = s
        .split_once(':')
        .ok_or_else(|| format!("expected INDEX:RATE, got {s:?}"))?;
    Ok(Changepoint {
        index: index.trim().parse().map_err(|e| format!("bad index {index:?}: {e}"))?,
        rate: rate.trim().parse().map_err(|e| format!("bad rate {rate:?}: {e}"))?,
    })
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::EmptyTestWindow { .. } => EXIT_CONFIG,
            Error::Parse { .. }
            | Error::SeriesTooShort { .. }
            | Error::Data(_)
            | Error::InvalidInput(_)
            | Error::LengthMismatch { .. }
            | Error::DegenerateVariance(_) => EXIT_PARSE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn io_error(path: &Path, code: i32, e: std::io::Error) -> CliError {
    CliError {
        code,
        message: format!("{}: {e}", path.display()),
    }
}

/// Reads a CSV file or every `*.csv` in a directory (sorted by name).
/// Fails on the first bad file; series ids must be unique across files.
pub fn load_corpus(path: &Path, min_len: usize) -> Result<(Vec<CountSeries>, Vec<String>), CliError> {
    let files = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| io_error(path, EXIT_PARSE, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
            .collect();
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };

    let mut series: Vec<CountSeries> = Vec::new();
    for file in &files {
        let bytes = fs::read(file).map_err(|e| io_error(file, EXIT_PARSE, e))?;
        let parsed = parse_series_csv_with_min(&bytes, min_len).map_err(|e| {
            let mut err = CliError::from(e);
            err.message = format!("{}: {}", file.display(), err.message);
            err
        })?;
        for s in parsed {
            if series.iter().any(|existing| existing.id() == s.id()) {
                return Err(CliError {
                    code: EXIT_PARSE,
                    message: format!("{}: series {:?} defined in more than one file", file.display(), s.id()),
                });
            }
            series.push(s);
        }
    }
    if series.is_empty() {
        return Err(CliError {
            code: EXIT_PARSE,
            message: format!("{}: no series found", path.display()),
        });
    }
    series.sort_by(|a, b| a.id().cmp(b.id()));
    let inputs = files.iter().map(|f| f.display().to_string()).collect();
    Ok((series, inputs))
}

impl EvaluateArgs {
    pub fn options(&self) -> EvaluationOptions {
        EvaluationOptions {
            train_fraction: self.train_fraction,
            forecaster: self.model.config(!self.no_warmup),
            pocid_divisor: match self.pocid_divisor {
                DivisorArg::N => PocidDivisor::N,
                DivisorArg::NMinusOne => PocidDivisor::NMinusOne,
            },
            dm_variance: match self.dm_variance {
                DivisorArg::N => VarianceDivisor::N,
                DivisorArg::NMinusOne => VarianceDivisor::NMinusOne,
            },
            significance: self.significance,
            ..EvaluationOptions::default()
        }
    }
}

/// Loads the input and evaluates it without touching the filesystem.
pub fn evaluate(args: &EvaluateArgs) -> Result<(EvaluationReport, Vec<CountSeries>), CliError> {
    let opts = args.options();
    opts.validate()?;
    let (series, inputs) = load_corpus(&args.input, MIN_SERIES_LEN)?;
    let report = evaluate_corpus(&series, inputs, &opts)?;
    Ok((report, series))
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<String, CliError> {
    let (report, series) = evaluate(args)?;
    // Everything is rendered before anything is written.
    let json = report.to_json()?;
    let forecasts = report.forecasts_csv(&series);
    let pocid = report.pocid_csv();
    let out = &args.out_dir;
    fs::create_dir_all(out).map_err(|e| io_error(out, EXIT_FAILURE, e))?;
    for (name, body) in [
        ("report.json", json),
        ("forecasts.csv", forecasts),
        ("pocid.csv", pocid),
    ] {
        let path = out.join(name);
        fs::write(&path, body).map_err(|e| io_error(&path, EXIT_FAILURE, e))?;
    }
    Ok(decision_table(&report))
}

/// Text rendering of the per-series decisions.
pub fn decision_table(report: &EvaluationReport) -> String {
    let mut out = format!("{:<8} {:<18} {:>12}\n", "Series", "Statistical Result", "DM Stat.");
    for row in &report.decisions {
        let stat = match (row.winner.as_deref(), row.dm_statistic) {
            (Some(_), Some(s)) if row.source == crate::dm::DecisionSource::Significant => format!("{s:.2}"),
            _ => "--".to_string(),
        };
        out.push_str(&format!("{:<8} {:<18} {:>12}\n", row.series, row.verdict, stat));
    }
    out
}

#[derive(Serialize)]
struct NextForecast<'a> {
    series_id: &'a str,
    time_index: usize,
    lambda_hat: f64,
    mu_hat: f64,
    x_hat: f64,
}

fn cmd_forecast(args: &ForecastArgs) -> Result<String, CliError> {
    let config = args.model.config(true);
    config.validate()?;
    let (series, _) = load_corpus(&args.input, 1)?;
    let mut out = String::new();
    for s in &series {
        let p = forecast_next(s.counts(), &config)?;
        let line = crate::json::to_string_line(&NextForecast {
            series_id: s.id(),
            time_index: s.len() + 1,
            lambda_hat: p.lambda_hat,
            mu_hat: p.mu_hat,
            x_hat: p.x_hat,
        })
        .map_err(|e| Error::Data(e.to_string()))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

/// Summary table with one row per series: size, max, min, mean, std dev.
pub fn summary_table(series: &[CountSeries]) -> String {
    let mut out = format!(
        "{:<8} {:>6} {:>8} {:>8} {:>10} {:>10}\n",
        "ID", "Size", "Max", "Min", "Mean", "Std Dev"
    );
    for s in series {
        let row = SeriesSummary::of(s);
        out.push_str(&format!(
            "{:<8} {:>6} {:>8} {:>8} {:>10.2} {:>10.2}\n",
            row.id, row.size, row.max, row.min, row.mean, row.std_dev
        ));
    }
    out
}

fn cmd_simulate(args: &SimulateArgs) -> Result<String, CliError> {
    let series = if args.corpus {
        bundled_corpus(args.seed)?
    } else {
        let spec = SyntheticSpec {
            id: args.id.clone(),
            length: args.length,
            base_rate: args.base_rate,
            drift: args.drift,
            changepoints: args.changepoints.clone(),
            seed: args.seed,
            ..SyntheticSpec::default()
        };
        vec![generate_synthetic(&spec)?]
    };
    if let Some(parent) = args.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_error(parent, EXIT_FAILURE, e))?;
    }
    fs::write(&args.output, write_series_csv(&series)).map_err(|e| io_error(&args.output, EXIT_FAILURE, e))?;
    Ok(summary_table(&series))
}

/// Runs a parsed command and returns its stdout text.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Forecast(args) => cmd_forecast(args),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn changepoint_flag_parsing() {
        assert_eq!(
            parse_changepoint("50:12.5").unwrap(),
            Changepoint { index: 50, rate: 12.5 }
        );
        assert!(parse_changepoint("50").is_err());
        assert!(parse_changepoint("x:1").is_err());
    }

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(CliError::from(Error::Config("x".into())).code, EXIT_CONFIG);
        assert_eq!(
            CliError::from(Error::Parse {
                line: 2,
                message: "x".into()
            })
            .code,
            EXIT_PARSE
        );
        assert_eq!(
            CliError::from(Error::EmptyTestWindow { len: 3, train: 3 }).code,
            EXIT_CONFIG
        );
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
